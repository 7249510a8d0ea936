"""Limit-set point clouds, closure structure, and box-counting estimates.

Points are images of the seed z0 = 1/2 (the center of X) under words of
F(N)^n.  Every point carries the certified position error bound
sup|phi_w'| * diam X of its word, and the box-counting scale floor is tied
to the worst such error so that discretization noise cannot masquerade as
fractal structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pressure import WORD_BUDGET_DEFAULT, BudgetError
from .system import DomainError, Parameter, letter_grid

SEED_POINT = 0.5 + 0.0j
DIAM_X = 1.0


class DegenerateFitError(ValueError):
    """Box counts carry no scaling information (all equal)."""


@dataclass
class PointCloud:
    points: np.ndarray          # complex positions
    par: Parameter
    N: int
    n: int
    method: str
    seed: int | None
    max_word_sup: float         # max over used words of sup|phi_w'|

    @property
    def error_bound(self) -> float:
        """Certified bound on the distance of each point to the limit set
        of the truncated subsystem (the word images have this diameter)."""
        return self.max_word_sup * DIAM_X


def _apply_words(letters_by_level: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Images of the seed under the words given as per-level letter arrays,
    plus the max sup-norm over those words.

    Matrices accumulate left to right ((a,b;c,d) -> column swap and shift),
    normalized each level; |det| of the normalized product is
    exp(-2 * logs), giving sup|phi_w'| = |det| / (|c| (|pole - 1/2| - 1/2))^2.
    """
    count = len(letters_by_level[0])
    a = np.zeros(count, dtype=np.complex128)
    b = np.ones(count, dtype=np.complex128)
    c = np.ones(count, dtype=np.complex128)
    d = letters_by_level[0].astype(np.complex128)
    logs = np.zeros(count)
    for beta in letters_by_level[1:]:
        a, b, c, d = b, a + beta * b, d, c + beta * d
        s = np.maximum(np.maximum(np.abs(a), np.abs(b)),
                       np.maximum(np.abs(c), np.abs(d)))
        a, b, c, d = a / s, b / s, c / s, d / s
        logs += np.log(s)
    pts = (a * SEED_POINT + b) / (c * SEED_POINT + d)
    dmin = np.abs(d / c + 0.5) - 0.5
    sup = np.exp(-2.0 * (logs + np.log(np.abs(c)) + np.log(dmin)))
    return pts, float(sup.max())


def generate_points(
    par: Parameter,
    N: int,
    n: int,
    count: int | None = None,
    seed: int = 0,
    budget: int = WORD_BUDGET_DEFAULT,
) -> PointCloud:
    """Limit-set samples from words of F(N)^n.

    count=None enumerates all N^(2n) words (subject to the budget); a
    count draws that many words with letters uniform over F(N), seeded.
    """
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    grid = letter_grid(par, N)
    if count is None:
        words = N ** (2 * n)
        if words > budget:
            raise BudgetError(
                f"N={N}, n={n} needs {words:.3g} words > budget "
                f"{budget:.3g}; reduce N or n (or pass a sample count)"
            )
        # enumerate in index blocks: n word-sized arrays at once would not fit
        pts = np.empty(words, dtype=np.complex128)
        max_sup = 0.0
        block = 1 << 21
        for start in range(0, words, block):
            idx = np.arange(start, min(start + block, words))
            levels = [grid[(idx // len(grid) ** k) % len(grid)] for k in range(n)]
            pts[idx[0] : idx[-1] + 1], sup = _apply_words(levels)
            max_sup = max(max_sup, sup)
        method, used_seed = "exhaustive", None
    else:
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        rng = np.random.default_rng(seed)
        levels = [grid[rng.integers(0, len(grid), count)] for _ in range(n)]
        pts, max_sup = _apply_words(levels)
        method, used_seed = "random", seed
    if np.any(np.abs(pts - 0.5) > 0.5 + 1e-9):
        raise RuntimeError("word image left X; this indicates a soundness bug")
    return PointCloud(
        points=pts,
        par=par,
        N=N,
        n=n,
        method=method,
        seed=used_seed,
        max_word_sup=max_sup,
    )


def closure_count(N: int, max_len: int) -> int:
    """1 + sum of N^(2k), k = 1..max_len: the closure adds the word images
    of 0 (and 0 itself) to the limit set."""
    return 1 + sum(N ** (2 * k) for k in range(1, max_len + 1))


def closure_points(par: Parameter, N: int, max_len: int) -> np.ndarray:
    """0 together with phi_w(0) for every word of length 1..max_len.

    These are the points the closure of the limit set adds: 0 is the sole
    accumulation point of the letter images, and its forward orbit lies in
    the closure of every orbit.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    grid = letter_grid(par, N)
    out = [np.array([0.0 + 0.0j])]
    level = out[0]
    for _ in range(max_len):
        level = (1.0 / (level[:, None] + grid[None, :])).ravel()
        out.append(level)
    return np.concatenate(out)


@dataclass
class XInfinityReport:
    par: Parameter
    Ns: list
    s_values: list              # radius bound on tail-letter images
    strictly_decreasing: bool
    vanishes: bool              # final value small: images shrink to {0}

    @property
    def passed(self) -> bool:
        return self.strictly_decreasing and self.vanishes


def tail_image_radius(par: Parameter, N: int) -> float:
    """s(N): every phi_b(X) with b outside F(N) lies within s(N) of 0.

    |phi_b(z)| = 1/|z + b| <= 1/(|b + 1/2| - 1/2) on X, and |b + 1/2| is
    minimized over the complement of F(N) on the ring max(m, n) = N + 1
    (the modulus grows in both m and n on A0).
    """
    k = np.arange(1, N + 2)
    tau = par.tau
    edge_m = np.abs((N + 1) + k * tau + 0.5)        # m = N+1, n = 1..N+1
    edge_n = np.abs(k + (N + 1) * tau + 0.5)        # n = N+1, m = 1..N+1
    rmin = float(min(edge_m.min(), edge_n.min()))
    if rmin <= 0.5:
        raise DomainError("tail letters reach X; parameter outside A0?")
    return 1.0 / (rmin - 0.5)


def verify_x_infinity(
    par: Parameter, Ns: tuple = (1, 10, 100, 1000), tol: float = 1e-2
) -> XInfinityReport:
    """Check that the letter images collapse onto {0} as the index grows:
    s(N) strictly decreasing and small at the largest N."""
    if len(Ns) < 2 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError(f"need strictly increasing truncations, got {Ns}")
    s = [tail_image_radius(par, N) for N in Ns]
    dec = all(b < a for a, b in zip(s, s[1:]))
    return XInfinityReport(par, list(Ns), s, dec, bool(s[-1] < tol))


@dataclass
class BoxCountResult:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    r_squared: float


def _box_count(points: np.ndarray, s: float) -> int:
    ix = np.floor(points.real / s).astype(np.int64)
    iy = np.floor(points.imag / s).astype(np.int64)
    return len(np.unique(ix + (iy << 32)))


def default_scales(
    cloud: PointCloud,
    k: int = 8,
    scale_max: float = 0.25,
    points_per_box: int = 500,
) -> np.ndarray:
    """Geometric scale ladder for box counting.

    Two floors keep the fit honest: scales never go below 4x the cloud's
    certified position error (grid noise must stay below structure), and
    never below the resolution of the sample itself.  The word measure is
    far from uniform over boxes, so the average occupancy must stay high
    (hundreds of points per box) for the low-measure boxes to be visited
    at all; with fewer, missing boxes flatten the count curve and bias the
    slope down.
    """
    floor = 4.0 * cloud.error_bound
    if not floor > 0:
        floor = 4.0 * (4.0 / 5.0) ** cloud.n     # worst-case contraction
    limit = len(cloud.points) / points_per_box
    s_min = scale_max
    s = scale_max
    while s * 0.5 >= floor:
        s *= 0.5
        if _box_count(cloud.points, s) > limit:
            break
        s_min = s
    if s_min >= scale_max:
        raise ValueError(
            f"no usable scale below {scale_max:.3g}: error floor {floor:.3g} "
            "or sample too sparse; deepen the words or add points"
        )
    return np.geomspace(s_min, scale_max, k)


def box_counting_dim(
    points: np.ndarray, scales: np.ndarray
) -> BoxCountResult:
    """Least-squares slope of log N(s) against log(1/s) over the scales.

    N(s) counts occupied cells of the square grid of pitch s.  Requires a
    cloud of at least 1000 points and scales inside (0, 1].
    """
    points = np.asarray(points)
    scales = np.asarray(scales, dtype=float)
    if len(points) < 1000:
        raise ValueError(f"need >= 1000 points, got {len(points)}")
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    if not (np.all(scales > 0) and np.all(scales <= 1.0)):
        raise ValueError("scales must lie in (0, 1]")
    counts = np.array([_box_count(points, s) for s in scales], dtype=np.int64)
    if np.all(counts == counts[0]):
        raise DegenerateFitError(
            f"box counts are constant ({counts[0]}) across scales"
        )
    x = np.log(1.0 / scales)
    y = np.log(counts.astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return BoxCountResult(scales, counts, float(slope), float(intercept), r2)
