"""Certified dimension brackets from two-sided pressure bounds.

The pressure t -> P(t) is strictly decreasing with a unique zero h in
(1, 2).  A verified P_lo(t) > 0 certifies t < h and a verified
P_hi(t) < 0 certifies h < t, so bisecting each bound separately yields an
interval [h_lo, h_hi] containing h.  Rungs (N, n) refine independently;
since every rung is certified, the final bracket is the intersection over
the ladder.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .cache import variant_tag
from .pressure import WORD_BUDGET_DEFAULT, BudgetError, RungEvaluator
from .system import Parameter, certify_invariant, invariant_disk

T_FLOOR = 1.0 + 1e-6       # the t = 1 divergence makes P_hi infinite below
T_CEIL = 2.0


class SignChangeError(ValueError):
    """The bracketing interval does not straddle a zero."""


@dataclass(frozen=True)
class BisectResult:
    lo: float
    hi: float
    evals: int

    @property
    def root(self) -> float:
        return 0.5 * (self.lo + self.hi)


def bisect_zero(f, a: float, b: float, tol: float, certify: str = "lo") -> BisectResult:
    """Bisect a decreasing f with f(a) > 0 > f(b) down to width tol.

    certify="lo" maintains a verified f(lo) > 0 (use lo as the certified
    value); certify="hi" maintains a verified f(hi) < 0.  The distinction
    only matters when an evaluation lands exactly on zero, but certified
    endpoints must never rest on an unverified sign.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if certify not in ("lo", "hi"):
        raise ValueError(f"certify must be 'lo' or 'hi', got {certify!r}")
    fa, fb = f(a), f(b)
    evals = 2
    if not fa > 0:
        raise SignChangeError(f"f({a}) = {fa}, expected positive")
    if not fb < 0:
        raise SignChangeError(f"f({b}) = {fb}, expected negative")
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        evals += 1
        if certify == "lo":
            if fm > 0:
                a = m
            else:
                b = m
        else:
            if fm < 0:
                b = m
            else:
                a = m
    return BisectResult(a, b, evals)


@dataclass
class SolverConfig:
    # default ladder tops out at (40, 2): 2.56e6 words, converges to the
    # default target in seconds; deeper rungs are opt-in via the schedules
    N_schedule: tuple = (10, 20, 40)
    n_schedule: tuple = (1, 2, 2)
    tol: float = 1e-3
    budget: int = WORD_BUDGET_DEFAULT
    target_width: float = 0.15
    tail: bool = True              # False brackets the finite subsystem F(N)
    refine_domain: bool = True

    def __post_init__(self):
        if len(self.N_schedule) == 0 or len(self.n_schedule) == 0:
            raise ValueError("schedules must be nonempty")
        if any(int(N) != N or N < 1 for N in self.N_schedule):
            raise ValueError(f"bad N schedule {self.N_schedule}")
        if any(int(n) != n or n < 1 for n in self.n_schedule):
            raise ValueError(f"bad n schedule {self.n_schedule}")
        if self.tol <= 0 or self.target_width <= 0:
            raise ValueError("tol and target_width must be positive")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")

    def rungs(self) -> list:
        """Zip the schedules into (N, n) rungs; length-1 sides broadcast."""
        Ns, ns = list(self.N_schedule), list(self.n_schedule)
        if len(Ns) == 1:
            Ns = Ns * len(ns)
        if len(ns) == 1:
            ns = ns * len(Ns)
        if len(Ns) != len(ns):
            raise ValueError(
                f"schedule lengths {len(self.N_schedule)} and "
                f"{len(self.n_schedule)} neither match nor broadcast"
            )
        return list(zip(Ns, ns))


@dataclass
class Rung:
    N: int
    n: int
    h_lo: float
    h_hi: float
    t_evals: int
    seconds: float
    words: int
    flags: list = field(default_factory=list)
    skipped: bool = False
    note: str = ""

    @property
    def width(self) -> float:
        return self.h_hi - self.h_lo


def solve_rung(
    par: Parameter,
    N: int,
    n: int,
    tol: float = 1e-3,
    budget: int = WORD_BUDGET_DEFAULT,
    tail: bool = True,
    refine_domain: bool = True,
    domain=None,
    evaluator: RungEvaluator | None = None,
) -> Rung:
    """Bracket the dimension from one (N, n) rung.

    Degenerate cases are clamped, not errors: a subsystem whose upper
    pressure is already negative at the floor has h below the bisection
    range entirely (flag "degenerate"), and a lower pressure that never
    turns positive yields the trivial bound (1 for the full system, where
    the dimension always exceeds the finiteness exponent; 0 otherwise).
    """
    start = time.perf_counter()
    if evaluator is None:
        evaluator = RungEvaluator(
            par, N, n, budget, tail=tail, refine_domain=refine_domain,
            domain=domain,
        )
    flags = []
    evals = 0
    if evaluator.domain.radius < 0.5:
        flags.append("refined-domain")

    p_hi_floor = evaluator.P_hi(T_FLOOR)
    p_hi_ceil = evaluator.P_hi(T_CEIL)
    evals += 2
    if p_hi_floor < 0:
        h_hi = T_FLOOR
        flags += ["hi-floor", "degenerate"]
    elif not p_hi_ceil < 0:
        h_hi = T_CEIL
        flags.append("hi-ceiling")
    else:
        res = bisect_zero(evaluator.P_hi, T_FLOOR, T_CEIL, tol, certify="hi")
        h_hi = res.hi
        evals += res.evals - 2

    p_lo_floor = evaluator.P_lo(T_FLOOR)
    evals += 1
    if not p_lo_floor > 0:
        h_lo = 1.0 if tail else 0.0
        flags.append("lo-floor")
    elif evaluator.P_lo(T_CEIL) > 0:
        evals += 1
        h_lo = T_CEIL
        flags.append("lo-ceiling")
    else:
        evals += 1
        res = bisect_zero(evaluator.P_lo, T_FLOOR, T_CEIL, tol, certify="lo")
        h_lo = res.lo
        evals += res.evals - 2

    return Rung(
        N=N,
        n=n,
        h_lo=h_lo,
        h_hi=h_hi,
        t_evals=evals,
        seconds=time.perf_counter() - start,
        words=evaluator.words,
        flags=flags,
    )


def refine_ladder(
    par: Parameter, config: SolverConfig | None = None, cache=None
) -> list:
    """Solve every rung of the schedule; over-budget rungs are kept in the
    output as skipped entries so callers can see what was not computed.

    With a cache, solved rungs round-trip through it keyed on the exact
    parameters and evaluator variant; hits preserve the original numbers
    (including the recorded seconds) so artifacts stay bitwise stable.
    """
    if config is None:
        config = SolverConfig()
    rungs = config.rungs()
    tag = variant_tag(config.tail, config.refine_domain)
    out: list = [None] * len(rungs)
    if cache is not None:
        for i, (N, n) in enumerate(rungs):
            hit = cache.get_rung(par, N, n, config.tol, tag)
            if hit is not None:
                out[i] = Rung(**hit)
    domain = None
    if config.refine_domain and any(r is None for r in out):
        # one hull per parameter; certifying at the largest N covers all
        cand = invariant_disk(par)
        if certify_invariant(cand, par, max(N for N, _ in rungs)):
            domain = cand
    for i, (N, n) in enumerate(rungs):
        if out[i] is not None:
            continue
        try:
            rung = solve_rung(
                par,
                N,
                n,
                tol=config.tol,
                budget=config.budget,
                tail=config.tail,
                refine_domain=False,
                domain=domain,
            )
            if cache is not None:
                cache.put_rung(par, N, n, config.tol, tag, rung)
        except BudgetError as e:
            rung = Rung(
                N=N,
                n=n,
                h_lo=1.0 if config.tail else 0.0,
                h_hi=T_CEIL,
                t_evals=0,
                seconds=0.0,
                words=N ** (2 * n),
                skipped=True,
                note=str(e),
            )
        out[i] = rung
    return out


@dataclass
class DimensionBracket:
    par: Parameter
    h_lo: float
    h_hi: float
    rungs: list
    seconds: float
    flags: list = field(default_factory=list)
    target_width: float = 0.05

    @property
    def width(self) -> float:
        return self.h_hi - self.h_lo

    @property
    def converged(self) -> bool:
        return self.width <= self.target_width

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.h_lo + self.h_hi)


def dimension_bracket(
    par: Parameter, config: SolverConfig | None = None, cache=None
) -> DimensionBracket:
    """Certified [h_lo, h_hi] for the dimension at par: the intersection of
    all computed rung brackets (each rung is individually certified)."""
    if config is None:
        config = SolverConfig()
    start = time.perf_counter()
    rungs = refine_ladder(par, config, cache=cache)
    live = [r for r in rungs if not r.skipped]
    if not live:
        raise BudgetError(
            "every rung exceeds the word budget; "
            "reduce N or n (or raise the budget)"
        )
    h_lo = max(r.h_lo for r in live)
    h_hi = min(r.h_hi for r in live)
    if h_lo > h_hi:
        raise RuntimeError(
            f"certified bounds crossed: {h_lo} > {h_hi}; this indicates a "
            "soundness bug, please report the parameter "
            f"({par.u}, {par.v}) and schedules"
        )
    flags = sorted({f for r in live for f in r.flags})
    if any(r.skipped for r in rungs):
        flags.append("skipped-rungs")
    bracket = DimensionBracket(
        par=par,
        h_lo=h_lo,
        h_hi=h_hi,
        rungs=rungs,
        seconds=time.perf_counter() - start,
        flags=flags,
        target_width=config.target_width,
    )
    if not bracket.converged:
        bracket.flags.append("unconverged")
    return bracket
