"""Parameter-space experiments: grids over A0 and the structural checks.

Every check consumes the bracket widths as slack, so a failure implicates
the mathematics or the code rather than truncation error.  Midpoints are
used for statistics (argmax, jumps); only brackets decide pass/fail.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .pressure import RungEvaluator
from .solver import DimensionBracket, SolverConfig, dimension_bracket
from .system import DomainError, Parameter, validate_parameter


@dataclass
class CheckEntry:
    name: str
    status: str                 # "pass" | "fail" | "inconclusive"
    inequality: str             # the exact relation tested, with numbers
    slack: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass
class AnalysisReport:
    check: str
    entries: list
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if e.status == "fail"]


def _lattice(lo: float, hi: float, step: float) -> list:
    """Inclusive endpoint lattice; counts derived by rounding so that
    0.25-style steps do not drop the last point to float error."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    count = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(count)]


@dataclass
class SweepGrid:
    u0: float
    u1: float
    v0: float
    v1: float
    step: float
    us: list
    vs: list
    brackets: list              # row-major: brackets[i][j] at (us[i], vs[j])
    seconds: float = 0.0

    @property
    def shape(self) -> tuple:
        return len(self.us), len(self.vs)

    def at(self, i: int, j: int) -> DimensionBracket:
        return self.brackets[i][j]

    def cells(self):
        """Deterministic cell order: u-major, then v."""
        for i, u in enumerate(self.us):
            for j, v in enumerate(self.vs):
                yield i, j, u, v, self.brackets[i][j]


def sweep_grid(
    u0: float,
    u1: float,
    v0: float,
    v1: float,
    step: float,
    config: SolverConfig | None = None,
    cache=None,
    progress=None,
    jobs: int = 1,
) -> SweepGrid:
    """dimension_bracket at every lattice point of the region.

    The whole lattice is validated against A0 before any computation, so a
    bad region fails fast instead of after minutes of work.  jobs > 1 farms
    cells out to a thread pool; cells are independent and the cache is
    atomic per rung, so results do not depend on completion order.
    """
    if config is None:
        config = SolverConfig()
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    us, vs = _lattice(u0, u1, step), _lattice(v0, v1, step)
    pars = [[validate_parameter(u, v) for v in vs] for u in us]
    start = time.perf_counter()
    rows = [[None] * len(vs) for _ in us]
    done = [0]

    def run_cell(i, j):
        rows[i][j] = dimension_bracket(pars[i][j], config, cache=cache)
        done[0] += 1
        if progress is not None:
            progress(done[0], len(us) * len(vs))

    if jobs == 1:
        for i in range(len(us)):
            for j in range(len(vs)):
                run_cell(i, j)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run_cell, i, j)
                for i in range(len(us))
                for j in range(len(vs))
            ]
            for f in futures:
                f.result()
    return SweepGrid(
        u0, u1, v0, v1, step, us, vs, rows, time.perf_counter() - start
    )


def _adjacent_pairs(grid: SweepGrid):
    nu, nv = grid.shape
    for i in range(nu):
        for j in range(nv):
            if i + 1 < nu:
                yield (i, j), (i + 1, j)
            if j + 1 < nv:
                yield (i, j), (i, j + 1)


def _cell_name(grid: SweepGrid, ij: tuple) -> str:
    return f"({grid.us[ij[0]]:g},{grid.vs[ij[1]]:g})"


def continuity_check(grid: SweepGrid, slack: float = 0.1) -> AnalysisReport:
    """|mid(a) - mid(b)| <= slack + width(a) + width(b) over 4-adjacent
    cells; the max jump is reported either way."""
    start = time.perf_counter()
    entries = []
    max_jump, max_pair = -1.0, None
    for a, b in _adjacent_pairs(grid):
        ba, bb = grid.at(*a), grid.at(*b)
        jump = abs(ba.midpoint - bb.midpoint)
        allowed = slack + ba.width + bb.width
        if jump > max_jump:
            max_jump, max_pair = jump, (a, b)
        if jump > allowed:
            entries.append(
                CheckEntry(
                    name=f"jump {_cell_name(grid, a)}-{_cell_name(grid, b)}",
                    status="fail",
                    inequality=f"|{ba.midpoint:.6f} - {bb.midpoint:.6f}| = "
                    f"{jump:.6f} > {slack:.6f} + {ba.width:.6f} + {bb.width:.6f}",
                    slack=allowed,
                )
            )
    a, b = max_pair
    ba, bb = grid.at(*a), grid.at(*b)
    entries.insert(
        0,
        CheckEntry(
            name=f"max jump {_cell_name(grid, a)}-{_cell_name(grid, b)}",
            status="pass" if max_jump <= slack + ba.width + bb.width else "fail",
            inequality=f"max |mid jump| = {max_jump:.6f} <= {slack:.6f} "
            f"+ {ba.width:.6f} + {bb.width:.6f}",
            slack=slack + ba.width + bb.width,
            details={"max_jump": max_jump},
        ),
    )
    return AnalysisReport("continuity", entries, time.perf_counter() - start)


def subharmonic_check(
    par0: Parameter,
    radius: float,
    k: int,
    config: SolverConfig | None = None,
    cache=None,
    bracket_fn=None,
) -> AnalysisReport:
    """Mean-value inequality at par0 against k circle points:
    mid(center) <= mean(circle mids) + width(center) + max circle width."""
    if k < 8:
        raise ValueError(f"need k >= 8 circle points, got {k}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not (par0.u - radius > 0 and par0.v - radius > 1):
        raise DomainError(
            f"disk B(({par0.u}, {par0.v}), {radius}) leaves Int(A0): "
            "need u - radius > 0 and v - radius > 1"
        )
    if bracket_fn is None:
        cfg = config if config is not None else SolverConfig()
        bracket_fn = lambda p: dimension_bracket(p, cfg, cache=cache)
    start = time.perf_counter()
    center = bracket_fn(par0)
    circle = []
    for j in range(k):
        ang = 2.0 * math.pi * j / k
        circle.append(
            bracket_fn(
                Parameter(
                    par0.u + radius * math.cos(ang),
                    par0.v + radius * math.sin(ang),
                )
            )
        )
    mean = sum(b.midpoint for b in circle) / k
    wmax = max(b.width for b in circle)
    slack = center.width + wmax
    ok = center.midpoint <= mean + slack
    entry = CheckEntry(
        name=f"mean value at ({par0.u:g},{par0.v:g}) r={radius:g} k={k}",
        status="pass" if ok else "fail",
        inequality=f"{center.midpoint:.6f} <= {mean:.6f} + {center.width:.6f} "
        f"+ {wmax:.6f}",
        slack=slack,
        details={"center_mid": center.midpoint, "circle_mean": mean},
    )
    return AnalysisReport("subharmonic", [entry], time.perf_counter() - start)


def boundary_max_check(grid: SweepGrid) -> AnalysisReport:
    """The midpoint argmax must sit on a true boundary edge of A0 (u = 0 or
    v = 1).  An interior argmax whose bracket overlaps the best boundary
    bracket is inconclusive; only a certified interior max fails."""
    eps = 1e-12
    touches = abs(grid.u0) <= eps or abs(grid.v0 - 1.0) <= eps
    if not touches:
        raise ValueError(
            f"grid [{grid.u0},{grid.u1}]x[{grid.v0},{grid.v1}] does not "
            "touch the boundary edges u = 0 or v = 1"
        )
    start = time.perf_counter()

    def on_boundary(i, j):
        return abs(grid.us[i]) <= eps or abs(grid.vs[j] - 1.0) <= eps

    best = max(grid.cells(), key=lambda c: c[4].midpoint)
    bi, bj, bu, bv, bbr = best
    interior = [c for c in grid.cells() if not on_boundary(c[0], c[1])]
    boundary = [c for c in grid.cells() if on_boundary(c[0], c[1])]
    details = {"argmax": (bu, bv), "argmax_mid": bbr.midpoint}
    if interior:
        run = max(interior, key=lambda c: c[4].midpoint)
        details["best_interior"] = (run[2], run[3])
        details["best_interior_mid"] = run[4].midpoint
    if on_boundary(bi, bj):
        entry = CheckEntry(
            name="argmax location",
            status="pass",
            inequality=f"argmax ({bu:g},{bv:g}) has u = 0 or v = 1",
            details=details,
        )
    else:
        hi_boundary = max(c[4].h_hi for c in boundary)
        if bbr.h_lo > hi_boundary:
            entry = CheckEntry(
                name="argmax location",
                status="fail",
                inequality=f"interior cell ({bu:g},{bv:g}) certified above "
                f"the boundary: {bbr.h_lo:.6f} > {hi_boundary:.6f}",
                details=details,
            )
        else:
            entry = CheckEntry(
                name="argmax location",
                status="inconclusive",
                inequality=f"interior argmax ({bu:g},{bv:g}) bracket "
                f"[{bbr.h_lo:.6f},{bbr.h_hi:.6f}] overlaps boundary max "
                f"h_hi {hi_boundary:.6f}; refine to separate",
                details=details,
            )
    return AnalysisReport("boundary-max", [entry], time.perf_counter() - start)


def asymptotic_check(
    direction: complex,
    magnitudes: tuple,
    eps: float = 0.1,
    config: SolverConfig | None = None,
    cache=None,
) -> AnalysisReport:
    """h -> 1 along a ray: h_hi cannot certifiably increase, the final h_hi
    is <= 1 + eps, and the level-1 mechanism holds (sup sum + tail < 1 at
    t = 1 + eps, strictly decreasing in the magnitude)."""
    if len(magnitudes) < 2 or any(
        b <= a for a, b in zip(magnitudes, magnitudes[1:])
    ):
        raise ValueError(f"need strictly increasing magnitudes, got {magnitudes}")
    if config is None:
        config = SolverConfig()
    start = time.perf_counter()
    ad = abs(direction)
    if ad == 0:
        raise ValueError("direction must be nonzero")
    pars = [
        validate_parameter(m * direction.real / ad, m * direction.imag / ad)
        for m in magnitudes
    ]
    brs = [dimension_bracket(p, config, cache=cache) for p in pars]
    entries = []
    for a, b, ma, mb in zip(brs, brs[1:], magnitudes, magnitudes[1:]):
        slack = a.width + b.width
        ok = b.h_hi <= a.h_hi + slack
        entries.append(
            CheckEntry(
                name=f"h_hi nonincreasing {ma:g} -> {mb:g}",
                status="pass" if ok else "fail",
                inequality=f"{b.h_hi:.6f} <= {a.h_hi:.6f} + {slack:.6f}",
                slack=slack,
            )
        )
    final = brs[-1]
    entries.append(
        CheckEntry(
            name=f"final h_hi at magnitude {magnitudes[-1]:g}",
            status="pass" if final.h_hi <= 1.0 + eps else "fail",
            inequality=f"{final.h_hi:.6f} <= 1 + {eps:g}",
        )
    )
    # proof mechanism: the level-1 sup sum with its tail is already < 1 at
    # t = 1 + eps for the largest magnitude, and decreases along the ray
    t = 1.0 + eps
    sums = []
    for p, m in zip(pars, magnitudes):
        ev = RungEvaluator(p, N=10, n=1, tail=True, refine_domain=False)
        sums.append(ev.psi1_sup(t) + ev.tail_bound(t))
    entries.append(
        CheckEntry(
            name=f"level-1 sum at t = {t:g}, magnitude {magnitudes[-1]:g}",
            status="pass" if sums[-1] < 1.0 else "fail",
            inequality=f"{sums[-1]:.6e} < 1",
            details={"sums": sums},
        )
    )
    dec = all(b < a for a, b in zip(sums, sums[1:]))
    entries.append(
        CheckEntry(
            name="level-1 sums strictly decreasing along the ray",
            status="pass" if dec else "fail",
            inequality=" > ".join(f"{s:.6e}" for s in sums),
        )
    )
    return AnalysisReport("asymptotic", entries, time.perf_counter() - start)


ESCALATION_SCHEDULE = ((100, 2), (40, 3))
ESCALATION_BUDGET = 10**10


def non_constancy_check(
    grid: SweepGrid,
    config: SolverConfig | None = None,
    cache=None,
    escalate: bool = True,
) -> AnalysisReport:
    """Find an adjacent pair with certifiably different dimension
    (disjoint brackets).

    Default-rung brackets are usually too wide (adjacent true gaps at step
    0.25 are below the rung widths), so the top-scoring pair is recomputed
    at deeper escalation rungs and intersected with the base brackets.
    """
    start = time.perf_counter()
    entries = []

    def disjoint(ba, bb):
        return ba.h_lo > bb.h_hi or bb.h_lo > ba.h_hi

    def margin(ba, bb):
        return max(ba.h_lo - bb.h_hi, bb.h_lo - ba.h_hi)

    best_pair, best_margin = None, -math.inf
    for a, b in _adjacent_pairs(grid):
        m = margin(grid.at(*a), grid.at(*b))
        if m > best_margin:
            best_margin, best_pair = m, (a, b)
        if m > 0:
            break
    a, b = best_pair
    if best_margin > 0:
        ba, bb = grid.at(*a), grid.at(*b)
        entries.append(
            CheckEntry(
                name=f"disjoint pair {_cell_name(grid, a)}-{_cell_name(grid, b)}",
                status="pass",
                inequality=f"margin {best_margin:.6f} > 0 "
                f"([{ba.h_lo:.4f},{ba.h_hi:.4f}] vs [{bb.h_lo:.4f},{bb.h_hi:.4f}])",
                details={"pair": (a, b), "margin": best_margin},
            )
        )
        return AnalysisReport(
            "non-constancy", entries, time.perf_counter() - start
        )

    # no pair separates at base rungs: escalate the widest midpoint gap
    score = lambda pr: abs(grid.at(*pr[0]).midpoint - grid.at(*pr[1]).midpoint)
    a, b = max(_adjacent_pairs(grid), key=score)
    if not escalate:
        entries.append(
            CheckEntry(
                name=f"best pair {_cell_name(grid, a)}-{_cell_name(grid, b)}",
                status="fail",
                inequality=f"margin {margin(grid.at(*a), grid.at(*b)):.6f} <= 0 "
                "(escalation disabled)",
            )
        )
        return AnalysisReport(
            "non-constancy", entries, time.perf_counter() - start
        )
    base = config if config is not None else SolverConfig()
    esc = SolverConfig(
        N_schedule=tuple(N for N, _ in ESCALATION_SCHEDULE),
        n_schedule=tuple(n for _, n in ESCALATION_SCHEDULE),
        tol=base.tol,
        budget=ESCALATION_BUDGET,
        target_width=base.target_width,
        tail=base.tail,
        refine_domain=base.refine_domain,
    )
    # escalate one rung at a time, cheapest first, and stop the moment the
    # intersected brackets separate; the deepest rungs cost minutes each.
    # The higher cell goes first: refinement mostly lifts h_lo, so it can
    # clear the lower cell's h_hi before that cell pays for a deep rung.
    a, b = sorted((a, b), key=lambda ij: -grid.at(*ij).midpoint)
    pars = [
        validate_parameter(grid.us[ij[0]], grid.vs[ij[1]]) for ij in (a, b)
    ]
    sharp = [grid.at(*a), grid.at(*b)]
    spent = []
    for N, n in ESCALATION_SCHEDULE:
        for k in (0, 1):
            if margin(*sharp) > 0:
                break
            one = SolverConfig(
                N_schedule=(N,),
                n_schedule=(n,),
                tol=esc.tol,
                budget=esc.budget,
                target_width=esc.target_width,
                tail=esc.tail,
                refine_domain=esc.refine_domain,
            )
            deep = dimension_bracket(pars[k], one, cache=cache)
            prev = sharp[k]
            sharp[k] = DimensionBracket(
                par=pars[k],
                h_lo=max(deep.h_lo, prev.h_lo),
                h_hi=min(deep.h_hi, prev.h_hi),
                rungs=prev.rungs + deep.rungs,
                seconds=prev.seconds + deep.seconds,
                flags=sorted(set(deep.flags) | set(prev.flags)),
                target_width=esc.target_width,
            )
            spent.append((k, N, n))
        if margin(*sharp) > 0:
            break
    ba, bb = sharp
    m = margin(ba, bb)
    entries.append(
        CheckEntry(
            name=f"escalated pair {_cell_name(grid, a)}-{_cell_name(grid, b)}",
            status="pass" if m > 0 else "fail",
            inequality=f"margin {m:.6f} > 0 "
            f"([{ba.h_lo:.4f},{ba.h_hi:.4f}] vs [{bb.h_lo:.4f},{bb.h_hi:.4f}])",
            details={
                "pair": (a, b),
                "margin": m,
                "escalated_rungs": spent,
            },
        )
    )
    return AnalysisReport("non-constancy", entries, time.perf_counter() - start)
