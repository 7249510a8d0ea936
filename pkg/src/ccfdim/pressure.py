"""Two-sided evaluation of the partition sums psi^n and the pressure P(t).

Lower side: inf-norm sums over the truncated alphabet F(N) are
supermultiplicative (the image of X under any word stays inside X), so
(1/n) log psi_lower is a certified lower bound of the pressure for every n.

Upper side: sup-norm sums are submultiplicative, and words that leave F(N)
are covered by per-letter products, giving

    psi^n(whole alphabet) <= psi_upper(F(N)) + (A + T)^n - A^n

with A the level-1 sup sum over F(N) and T an upper bound on the level-1
tail sum.  (1/n) log of the right side is then a certified upper bound.

The tail bound sums the letters near the truncation exactly (closed forms
in |b + 1/2|) and controls the far lattice by dyadic blocks: the letters
with max(m, n) in [2^(p-1), 2^p) number at most 3*4^(p-1) and satisfy
|b|^2 >= 4^(p-1) * min(1 + |tau|^2/4^(p-1), |tau|^2), which makes the block
series geometric for t > 1 and divergent at t = 1 (the finiteness exponent).

Word norms for n >= 2 are accumulated into a fixed histogram of log-norms
in one streaming pass (no per-word arrays), with bin edges rounded in the
certified direction: upper sums use upper bin edges, lower sums lower ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import DOMAIN, Disk
from .system import Parameter, certify_invariant, invariant_disk, letter_grid

WORD_BUDGET_DEFAULT = 10**8
HIST_BINS = 1 << 20
CHUNK_WORDS = 1 << 22


class BudgetError(ValueError):
    """Word enumeration would exceed the configured budget."""


def psi1_partial(par: Parameter, t: float, N: int) -> tuple[float, float]:
    """(sum of sup^t, sum of inf^t) over the letters of F(N)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    r = np.abs(letter_grid(par, N) + 0.5)
    return (
        float(np.sum((r - 0.5) ** (-2.0 * t))),
        float(np.sum((r + 0.5) ** (-2.0 * t))),
    )


# --- infinite-alphabet tail -------------------------------------------------

EXACT_TAIL_FACTOR = 16      # sum letters exactly out to max(m,n) ~ 16 N
EXACT_TAIL_CAP = 2048       # memory guard on the exact region


def _tail_split(N: int) -> tuple[int, int]:
    """(top, p0): exact region covers max(m,n) <= top = 2^(p0-1) - 1."""
    exact_top = min(max(EXACT_TAIL_FACTOR * N, 64), max(EXACT_TAIL_CAP, N + 1))
    p0 = 1
    while 2 ** (p0 - 1) <= exact_top:
        p0 += 1
    return 2 ** (p0 - 1) - 1, p0


def tail_radii(par: Parameter, N: int) -> tuple[np.ndarray, int]:
    """|b + 1/2| for every letter outside F(N) with max(m,n) <= top.

    Two rectangles: m > N (any n <= top), and m <= N with n > N.
    Returned once per (par, N) and reused across bisection evaluations.
    """
    top, p0 = _tail_split(N)
    tau = par.tau
    m_hi = np.arange(N + 1, top + 1)
    n_all = np.arange(1, top + 1)
    M1, K1 = np.meshgrid(m_hi, n_all, indexing="ij")
    r1 = np.abs(M1 + K1 * tau + 0.5).ravel()
    m_lo = np.arange(1, N + 1)
    n_hi = np.arange(N + 1, top + 1)
    M2, K2 = np.meshgrid(m_lo, n_hi, indexing="ij")
    r2 = np.abs(M2 + K2 * tau + 0.5).ravel()
    return np.concatenate([r1, r2]), p0


def _block_series(par: Parameter, t: float, p0: int) -> float:
    """Upper bound on sum of sup^t over all letters with max(m,n) >= 2^(p0-1)."""
    at2 = abs(par.tau) ** 2
    # smallest modulus in the block region, for the (|b|-1)^-2 correction
    bmin = math.sqrt(4.0 ** (p0 - 1) * min(1.0 + at2 / 4.0 ** (p0 - 1), at2))
    rho = (bmin / (bmin - 1.0)) ** (2.0 * t)
    log4 = math.log(4.0)
    lat2 = math.log(at2)
    total = 0.0
    p = p0
    while True:
        x = math.exp(lat2 - (p - 1) * log4)
        mn = min(1.0 + x, at2)
        total += 3.0 * rho * math.exp((p - 1) * (1.0 - t) * log4) * mn ** (-t)
        p += 1
        if mn <= 1.0 + 1e-12:
            break
    # beyond this point min(...) = 1 exactly enough; geometric remainder
    q = 4.0 ** (1.0 - t)
    return total + 3.0 * rho * math.exp((p - 1) * (1.0 - t) * log4) / (1.0 - q)


def _ring_min_radius(par: Parameter, N: int) -> float:
    """min |b + 1/2| over the complement of F(N): attained on the ring
    max(m, n) = N + 1 because the modulus grows in both m and n on A0."""
    k = np.arange(1, N + 2)
    tau = par.tau
    edge_m = np.abs((N + 1) + k * tau + 0.5)
    edge_n = np.abs(k + (N + 1) * tau + 0.5)
    return float(min(edge_m.min(), edge_n.min()))


def _closed_form_tail(par: Parameter, t: float, N: int) -> float:
    """Row-integral upper bound on the tail sum, sharp for large |tau|.

    Each row n contributes sum_m ((m + nu + 1/2)^2 + (nv)^2)^-t, bounded by
    integrals in m: either the full-line value c^(1-2t) * I(t) with
    I(t) = (sqrt(pi)/2) Gamma(t - 1/2) / Gamma(t), or the shifted power
    integral when the real offset dominates.  The (|b+1/2| - 1/2)^-2t
    correction is a single rho factor off the region's minimal modulus.
    """
    u, v = par.u, par.v
    rmin = _ring_min_radius(par, N)
    rho = (rmin / (rmin - 0.5)) ** (2.0 * t)
    I_t = (
        0.5
        * math.sqrt(math.pi)
        * math.exp(math.lgamma(t - 0.5) - math.lgamma(t))
    )
    inv = 1.0 / (2.0 * t - 1.0)
    # rows n <= N, columns m > N
    n_arr = np.arange(1.0, N + 1.0)
    arm_flat = I_t * (n_arr * v) ** (1.0 - 2.0 * t)
    arm_shift = inv * (N + n_arr * u + 0.5) ** (1.0 - 2.0 * t)
    rows_right = float(np.sum(np.minimum(arm_flat, arm_shift)))
    # rows n > N, all m
    rows_far = I_t * v ** (1.0 - 2.0 * t) * N ** (2.0 - 2.0 * t) / (2.0 * t - 2.0)
    if u > 0:
        rows_far = min(
            rows_far,
            inv * (N * u + 0.5) ** (2.0 - 2.0 * t) / ((2.0 * t - 2.0) * u),
        )
    return rho * (rows_right + rows_far)


def psi1_tail_bound(
    par: Parameter,
    t: float,
    N: int,
    radii: np.ndarray | None = None,
    p0: int | None = None,
) -> float:
    """Upper bound T on the level-1 sup-norm sum over letters outside F(N).

    Infinite (math.inf) exactly when t <= 1: the tail sums diverge at the
    finiteness exponent 1.  For t > 1 two independent bounds are taken and
    the smaller wins: exact summation near the truncation plus the dyadic
    block series (sharp for moderate tau), and the closed-form row
    integrals (sharp for large tau, where the blocks overcount).
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t <= 1.0:
        return math.inf
    if radii is None or p0 is None:
        radii, p0 = tail_radii(par, N)
    exact = float(np.sum((radii - 0.5) ** (-2.0 * t))) if radii.size else 0.0
    return min(exact + _block_series(par, t, p0), _closed_form_tail(par, t, N))


# --- streamed word-norm histograms ------------------------------------------


@dataclass
class NormHistogram:
    """Binned log sup / log inf derivative norms of all words in F(N)^n."""

    counts_sup: np.ndarray
    counts_inf: np.ndarray
    lo: float
    width: float
    N: int
    n: int
    words: int

    def sum_upper(self, t: float) -> float:
        """Upper bound on the sup-norm power sum (bin upper edges)."""
        idx = np.nonzero(self.counts_sup)[0]
        edges = self.lo + (idx + 1) * self.width
        return float(np.sum(self.counts_sup[idx] * np.exp(t * edges)))

    def sum_lower(self, t: float) -> float:
        """Lower bound on the inf-norm power sum (bin lower edges)."""
        idx = np.nonzero(self.counts_inf)[0]
        edges = self.lo + idx * self.width
        return float(np.sum(self.counts_inf[idx] * np.exp(t * edges)))


def _compose_with_letters(mats, logs, b):
    """Right-compose each matrix with every letter; renormalize.

    mats = (a, b, c, d) arrays; logs = accumulated log normalization.
    The letter matrix is (0,1;1,beta), so the product has columns swapped
    and shifted: (a', b', c', d') = (b, a + beta*b, d, c + beta*d).
    """
    a0, b0, c0, d0 = mats
    K = len(b)
    a1 = np.repeat(b0, K)
    c1 = np.repeat(d0, K)
    bt = np.tile(b, len(b0))
    b1 = np.repeat(a0, K) + bt * a1
    d1 = np.repeat(c0, K) + bt * c1
    s = np.maximum(
        np.maximum(np.abs(a1), np.abs(b1)), np.maximum(np.abs(c1), np.abs(d1))
    )
    l1 = np.repeat(logs, K) + np.log(s)
    return (a1 / s, b1 / s, c1 / s, d1 / s), l1


def _norm_logs(c, d, logs, inf_disk: Disk = DOMAIN):
    """(log inf, log sup) of |phi'| from normalized last-level entries.

    Each letter matrix has |det| = 1, so the accumulated normalized matrix
    has |det| = exp(-2 * logs); |phi'(z)| = |det| / (|c| |z - pole|)^2.
    The sup is always over X; the inf may be taken over a smaller
    forward-invariant disk, where it is sharper but equally valid as a
    lower-bound ingredient.
    """
    pole = -d / c
    lc = np.log(np.abs(c))
    ls = -2.0 * (logs + lc + np.log(np.abs(pole - 0.5) - 0.5))
    dmax = np.abs(pole - inf_disk.center) + inf_disk.radius
    li = -2.0 * (logs + lc + np.log(dmax))
    return li, ls


def norm_histogram(
    par: Parameter,
    N: int,
    n: int,
    budget: int = WORD_BUDGET_DEFAULT,
    bins: int = HIST_BINS,
    chunk_words: int = CHUNK_WORDS,
    inf_disk: Disk = DOMAIN,
) -> NormHistogram:
    """One streaming pass over F(N)^n accumulating binned word log-norms.

    Levels 1..n-1 are materialized (N^(2(n-1)) matrices), the last level is
    visited in chunks, so memory is flat in the total word count.  inf_disk
    must be forward invariant under the letters (X itself, or a certified
    smaller disk from invariant_disk).
    """
    if n < 1:
        raise ValueError(f"word level must be >= 1, got {n}")
    words = N ** (2 * n)
    if words > budget:
        raise BudgetError(
            f"N={N}, n={n} needs {words:.3g} words > budget {budget:.3g}; "
            "reduce N or n (or raise the budget)"
        )
    b = letter_grid(par, N)
    r = np.abs(b + 0.5)
    l1_inf = -2.0 * np.log(np.abs(b + inf_disk.center) + inf_disk.radius)
    l1_sup = -2.0 * np.log(r - 0.5)
    # word logs live in [n min l1_inf, n max l1_sup]: inf over an invariant
    # disk is still supermultiplicative, so no value falls outside
    lo = n * float(l1_inf.min())
    hi = n * float(l1_sup.max())
    width = max((hi - lo) / bins, 1e-15)

    counts_sup = np.zeros(bins, dtype=np.int64)
    counts_inf = np.zeros(bins, dtype=np.int64)

    def _bin(values, counts):
        k = ((values - lo) / width).astype(np.int64)
        np.clip(k, 0, bins - 1, out=k)
        counts += np.bincount(k, minlength=bins)

    if n == 1:
        _bin(l1_sup, counts_sup)
        _bin(l1_inf, counts_inf)
        return NormHistogram(counts_sup, counts_inf, lo, width, N, n, words)

    mats = (np.zeros_like(b), np.ones_like(b), np.ones_like(b), b.copy())
    logs = np.zeros(len(b))
    for _ in range(n - 2):
        mats, logs = _compose_with_letters(mats, logs, b)

    a0, b0, c0, d0 = mats
    rows = max(1, chunk_words // len(b))
    for i in range(0, len(a0), rows):
        sl = slice(i, i + rows)
        (_, _, c1, d1), l1 = _compose_with_letters(
            (a0[sl], b0[sl], c0[sl], d0[sl]), logs[sl], b
        )
        li, ls = _norm_logs(c1, d1, l1, inf_disk)
        _bin(ls, counts_sup)
        _bin(li, counts_inf)
    return NormHistogram(counts_sup, counts_inf, lo, width, N, n, words)


def psi_n_bounds(
    par: Parameter,
    t: float,
    N: int,
    n: int,
    budget: int = WORD_BUDGET_DEFAULT,
    hist: NormHistogram | None = None,
) -> tuple[float, float]:
    """(psi_lower, psi_upper) over the words of F(N)^n.

    n = 1 reduces exactly to psi1_partial; deeper levels go through the
    histogram (pass one in to amortize over many t).
    """
    if n == 1:
        sup, inf = psi1_partial(par, t, N)
        return inf, sup
    if hist is None:
        hist = norm_histogram(par, N, n, budget)
    return hist.sum_lower(t), hist.sum_upper(t)


# --- pressure brackets -------------------------------------------------------


@dataclass(frozen=True)
class PressureBracket:
    t: float
    P_lo: float
    P_hi: float        # math.inf when the tail diverges (t <= 1)
    N: int
    n: int


class RungEvaluator:
    """Precomputes everything reusable at one (par, N, n) so that bisection
    pays only a power sum per pressure evaluation.

    tail=False restricts the system to the finite subsystem F(N): the upper
    bound then drops the (A+T)^n - A^n cover and brackets h of F(N) itself.

    refine_domain=True evaluates the inf norms over the invariant hull of
    the letter images instead of X, which typically lifts h_lo by ~0.02.
    The hull depends only on tau (fixed probe), so ladder monotonicity in N
    is preserved; if its invariance certificate fails the evaluator falls
    back to X silently.
    """

    def __init__(
        self,
        par: Parameter,
        N: int,
        n: int,
        budget: int = WORD_BUDGET_DEFAULT,
        tail: bool = True,
        refine_domain: bool = True,
        domain: Disk | None = None,
    ):
        self.par = par
        self.N = N
        self.n = n
        self.tail = tail
        self.words = N ** (2 * n)
        self.domain = DOMAIN
        if domain is not None:
            # caller-supplied domains are trusted to be certified for >= N
            # (certification at N' >= N covers every smaller letter set)
            self.domain = domain
        elif refine_domain:
            cand = invariant_disk(par)
            if certify_invariant(cand, par, N):
                self.domain = cand
        self.hist = (
            None
            if n == 1
            else norm_histogram(par, N, n, budget, inf_disk=self.domain)
        )
        b = letter_grid(par, N)
        self._sup1 = -2.0 * np.log(np.abs(b + 0.5) - 0.5)
        self._inf1 = -2.0 * np.log(
            np.abs(b + self.domain.center) + self.domain.radius
        )
        if tail:
            self._radii, self._p0 = tail_radii(par, N)

    def psi1_sup(self, t: float) -> float:
        return float(np.sum(np.exp(t * self._sup1)))

    def tail_bound(self, t: float) -> float:
        if not self.tail:
            return 0.0
        return psi1_tail_bound(self.par, t, self.N, self._radii, self._p0)

    def P_lo(self, t: float) -> float:
        if self.n == 1:
            s = float(np.sum(np.exp(t * self._inf1)))
        else:
            s = self.hist.sum_lower(t)
        return math.log(s) / self.n

    def P_hi(self, t: float) -> float:
        T = self.tail_bound(t)
        if math.isinf(T):
            return math.inf
        if self.n == 1:
            core = self.psi1_sup(t)
        else:
            core = self.hist.sum_upper(t)
        if self.tail:
            A = self.psi1_sup(t)
            core += (A + T) ** self.n - A**self.n
        return math.log(core) / self.n

    def bracket(self, t: float) -> PressureBracket:
        return PressureBracket(t, self.P_lo(t), self.P_hi(t), self.N, self.n)


def pressure_bracket(
    par: Parameter,
    t: float,
    N: int,
    n: int,
    budget: int = WORD_BUDGET_DEFAULT,
    evaluator: RungEvaluator | None = None,
) -> PressureBracket:
    """Certified two-sided pressure at one t: P_lo <= P_F <= P <= P_hi.

    P_lo here is the plain X-based (1/n) log psi_lower so that it matches
    psi_n_bounds exactly; the solver's rungs use the sharper invariant-disk
    variant.
    """
    if evaluator is None:
        evaluator = RungEvaluator(par, N, n, budget, refine_domain=False)
    return evaluator.bracket(t)


# --- finiteness-exponent diagnostic ------------------------------------------


@dataclass
class ThetaReport:
    par: Parameter
    p_max: int
    partial_sums: list          # cumulative sup-norm sums over K'(p)
    increments: list            # per-block sums over K(p)
    lower_estimates: list       # certified per-block lower values
    tail_at_105: float          # finite tail bound just above t = 1

    @property
    def passed(self) -> bool:
        inc_ok = all(
            inc >= est for inc, est in zip(self.increments, self.lower_estimates)
        )
        mono = all(b > a for a, b in zip(self.partial_sums, self.partial_sums[1:]))
        return inc_ok and mono and math.isfinite(self.tail_at_105)


def _block_letters_radii(par: Parameter, p: int) -> np.ndarray:
    """|b + 1/2| over K(p): letters with max(m,n) in [2^(p-1), 2^p - 1]."""
    tau = par.tau
    lo, hi = 2 ** (p - 1), 2**p - 1
    m_hi = np.arange(lo, hi + 1)
    n_all = np.arange(1, hi + 1)
    M1, K1 = np.meshgrid(m_hi, n_all, indexing="ij")
    r1 = np.abs(M1 + K1 * tau + 0.5).ravel()
    if lo > 1:
        m_lo = np.arange(1, lo)
        n_hi = np.arange(lo, hi + 1)
        M2, K2 = np.meshgrid(m_lo, n_hi, indexing="ij")
        r2 = np.abs(M2 + K2 * tau + 0.5).ravel()
        return np.concatenate([r1, r2])
    return r1


def theta_diagnostic(par: Parameter, p_max: int) -> ThetaReport:
    """Numeric certificate that the finiteness exponent is 1: the level-1
    sum at t = 1 grows by at least a fixed amount per dyadic block (so it
    diverges), while the tail bound just above 1 is already finite.
    """
    if p_max < 3:
        raise ValueError(f"need p_max >= 3, got {p_max}")
    at = abs(par.tau)
    sums, incs, lows = [], [], []
    acc = 0.0
    for p in range(1, p_max + 1):
        r = _block_letters_radii(par, p)
        inc = float(np.sum(1.0 / (r - 0.5) ** 2))
        acc += inc
        # |K(p)| >= 4^(p-1), each letter has |b| <= 2^p (1 + |tau|) and
        # sup norm >= |b|^-2
        lows.append(4.0 ** (p - 1) * (2.0**p * (1.0 + at)) ** -2)
        incs.append(inc)
        sums.append(acc)
    return ThetaReport(par, p_max, sums, incs, lows, psi1_tail_bound(par, 1.05, 1))
