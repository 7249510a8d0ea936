"""Command-line surface: dim, pressure, limitset, sweep, verify.

Exit codes are a stable contract: 0 success, 2 usage, 3 parameter outside
the admissible region, 4 bracket did not reach its target width, 5 a
structural check failed (or an internal invariant broke).  Config files are
JSON objects keyed by flag name; explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import outputs
from .cache import Cache, default_cache_dir
from .limitset import (
    box_counting_dim,
    default_scales,
    generate_points,
    verify_x_infinity,
)
from .pressure import BudgetError, RungEvaluator, theta_diagnostic
from .solver import SolverConfig, dimension_bracket
from .sweep import (
    boundary_max_check,
    continuity_check,
    non_constancy_check,
    sweep_grid,
)
from .system import DomainError, validate_parameter, verify_geometry

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_UNCONVERGED = 4
EXIT_CHECK = 5


def parse_complex(text: str) -> complex:
    """`a+bi` literal with decimal components, e.g. 0+1i or -0.5+2.25i."""
    s = text.strip().replace(" ", "")
    if s.endswith("i") or s.endswith("I"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad complex literal {text!r} (expected a+bi)"
        )


def parse_region(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"region needs four comma-separated numbers u0,u1,v0,v1, got {text!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric region component in {text!r}")


def parse_int_list(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def parse_float_list(text: str) -> tuple:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pick(ns, file_cfg: dict, name: str, default):
    """Flag > config file > hard default."""
    v = getattr(ns, name, None)
    if v is not None:
        return v
    if name in file_cfg:
        return file_cfg[name]
    return default


def _solver_config(ns, fc) -> SolverConfig:
    base = SolverConfig()
    return SolverConfig(
        N_schedule=tuple(_pick(ns, fc, "N", base.N_schedule)),
        n_schedule=tuple(_pick(ns, fc, "n", base.n_schedule)),
        tol=float(_pick(ns, fc, "tol", base.tol)),
        budget=int(float(_pick(ns, fc, "budget", base.budget))),
        target_width=float(_pick(ns, fc, "target_width", base.target_width)),
        tail=bool(_pick(ns, fc, "tail", base.tail)),
        refine_domain=bool(_pick(ns, fc, "refine_domain", base.refine_domain)),
    )


def _cache(ns, fc) -> Cache | None:
    root = _pick(ns, fc, "cache_dir", default_cache_dir())
    return Cache(root) if root else None


def _outdir(ns, fc) -> str:
    out = _pick(ns, fc, "out", ".")
    os.makedirs(out, exist_ok=True)
    return out


def _report_cache(cache: Cache | None) -> None:
    if cache is not None:
        print(f"cache: {cache.hits} hit(s), {cache.misses} miss(es) at {cache.root}")


def cmd_dim(ns, fc) -> int:
    z = _pick(ns, fc, "tau", None)
    if z is None:
        print("dim: --tau is required", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(z, str):
        z = parse_complex(z)
    par = validate_parameter(z.real, z.imag)
    config = _solver_config(ns, fc)
    cache = _cache(ns, fc)
    out = _outdir(ns, fc)
    bracket = dimension_bracket(par, config, cache=cache)
    echo = outputs.config_echo(
        config, "dim", tau=[par.u, par.v], out=out,
        cache_dir=str(cache.root) if cache else None,
    )
    outputs.write_ladder_csv(os.path.join(out, "dim_ladder.csv"), par, bracket.rungs, echo)
    outputs.write_bracket_json(os.path.join(out, "dim.json"), bracket, echo)
    for r in bracket.rungs:
        state = f"skipped: {r.note}" if r.skipped else f"{r.seconds:.2f}s"
        print(f"  rung N={r.N:<4d} n={r.n}  [{r.h_lo:.6f}, {r.h_hi:.6f}]  {state}")
    flags = ",".join(bracket.flags) if bracket.flags else "-"
    print(
        f"h({par.u:g}+{par.v:g}i) in [{bracket.h_lo:.6f}, {bracket.h_hi:.6f}]"
        f"  width {bracket.width:.6f}  flags {flags}"
    )
    _report_cache(cache)
    print(f"wrote {out}/dim_ladder.csv, {out}/dim.json")
    return EXIT_OK if bracket.converged else EXIT_UNCONVERGED


def cmd_pressure(ns, fc) -> int:
    z = _pick(ns, fc, "tau", None)
    if z is None:
        print("pressure: --tau is required", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(z, str):
        z = parse_complex(z)
    par = validate_parameter(z.real, z.imag)
    ts = tuple(_pick(ns, fc, "t", (1.0, 1.25, 1.5, 1.75, 2.0)))
    if len(ts) == 0:
        print("pressure: empty t grid", file=sys.stderr)
        return EXIT_USAGE
    if any(t < 0.0 or t > 3.0 for t in ts):
        print(f"pressure: t grid must lie in [0, 3], got {ts}", file=sys.stderr)
        return EXIT_USAGE
    N = int(_pick(ns, fc, "N_single", 20))
    n = int(_pick(ns, fc, "n_single", 2))
    budget = int(float(_pick(ns, fc, "budget", 10**8)))
    out = _outdir(ns, fc)
    ev = RungEvaluator(par, N, n, budget, refine_domain=False)
    rows = [ev.bracket(t) for t in ts]
    echo = outputs.config_echo(
        None, "pressure", tau=[par.u, par.v], t=list(ts), N=N, n=n,
        budget=budget, out=out,
    )
    outputs.write_pressure_csv(
        os.path.join(out, "pressure.csv"),
        ts, [r.P_lo for r in rows], [r.P_hi for r in rows], echo,
    )
    for r in rows:
        hi = "inf" if math.isinf(r.P_hi) else f"{r.P_hi:.6f}"
        print(f"  t={r.t:<6g} P in [{r.P_lo:.6f}, {hi}]")
    print(f"wrote {out}/pressure.csv")
    return EXIT_OK


def cmd_limitset(ns, fc) -> int:
    z = _pick(ns, fc, "tau", None)
    if z is None:
        print("limitset: --tau is required", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(z, str):
        z = parse_complex(z)
    par = validate_parameter(z.real, z.imag)
    N = int(_pick(ns, fc, "N_single", 20))
    n = int(_pick(ns, fc, "n_single", 3))
    count = _pick(ns, fc, "random", None)
    seed = int(_pick(ns, fc, "seed", 0))
    budget = int(float(_pick(ns, fc, "budget", 10**8)))
    out = _outdir(ns, fc)
    cloud = generate_points(
        par, N, n, count=None if count is None else int(count),
        seed=seed, budget=budget,
    )
    echo = outputs.config_echo(
        None, "limitset", tau=[par.u, par.v], N=N, n=n,
        random=None if count is None else int(count), seed=seed,
        budget=budget, out=out,
    )
    outputs.write_points_csv(os.path.join(out, "points.csv"), cloud, echo)
    outputs.write_points_ccf1(os.path.join(out, "points.ccf1"), cloud.points)
    doc = {
        "artifact": "limit_set_cloud",
        "config": echo,
        "count": len(cloud.points),
        "method": cloud.method,
        "error_bound": cloud.error_bound,
        "max_word_sup": cloud.max_word_sup,
    }
    print(
        f"{len(cloud.points)} points at level n={n} ({cloud.method}),"
        f" position error <= {cloud.error_bound:.3e}"
    )
    if _pick(ns, fc, "boxdim", False):
        scales = default_scales(cloud)
        fit = box_counting_dim(cloud.points, scales)
        outputs.write_boxcount_csv(os.path.join(out, "boxcount.csv"), fit, echo)
        doc["box_dim_slope"] = fit.slope
        doc["box_dim_r_squared"] = fit.r_squared
        print(f"box-counting slope {fit.slope:.4f} (r^2 = {fit.r_squared:.5f})")
    outputs._atomic_write_text(
        os.path.join(out, "limitset.json"),
        json.dumps(doc, sort_keys=True, indent=2) + "\n",
    )
    if _pick(ns, fc, "svg", False):
        title = f"limit set sample, tau = {par.u:g}+{par.v:g}i, N = {N}, n = {n}"
        outputs.write_scatter_svg(
            os.path.join(out, "points.svg"), cloud.points, echo, title
        )
    print(f"wrote {out}/points.csv, {out}/points.ccf1, {out}/limitset.json")
    return EXIT_OK


def cmd_sweep(ns, fc) -> int:
    region = _pick(ns, fc, "region", None)
    if region is None:
        print("sweep: --region is required", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(region, str):
        region = parse_region(region)
    u0, u1, v0, v1 = (float(x) for x in region)
    step = float(_pick(ns, fc, "step", 0.25))
    config = _solver_config(ns, fc)
    cache = _cache(ns, fc)
    jobs = int(_pick(ns, fc, "jobs", 1))
    out = _outdir(ns, fc)
    grid = sweep_grid(u0, u1, v0, v1, step, config, cache=cache, jobs=jobs)
    echo = outputs.config_echo(
        config, "sweep", region=[u0, u1, v0, v1], step=step, jobs=jobs,
        out=out, cache_dir=str(cache.root) if cache else None,
    )
    outputs.write_sweep_csv(os.path.join(out, "sweep.csv"), grid, echo)
    outputs.write_sweep_json(os.path.join(out, "sweep.json"), grid, echo)
    if _pick(ns, fc, "svg", False):
        outputs.write_sweep_svg(os.path.join(out, "sweep.svg"), grid, echo)
    nu, nv = grid.shape
    print(f"swept {nu}x{nv} = {nu * nv} cells in {grid.seconds:.1f}s")
    _report_cache(cache)
    print(f"wrote {out}/sweep.csv, {out}/sweep.json")
    if not _pick(ns, fc, "checks", False):
        return EXIT_OK
    reports = [continuity_check(grid)]
    try:
        reports.append(boundary_max_check(grid))
    except ValueError as e:
        print(f"boundary check skipped: {e}")
    reports.append(non_constancy_check(grid, config=config, cache=cache))
    ok = True
    for rep in reports:
        path = os.path.join(out, f"check_{rep.check}.json")
        outputs.write_report_json(path, rep, echo)
        print(f"{rep.check}: {'pass' if rep.passed else 'FAIL'} ({path})")
        ok = ok and rep.passed
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(ns, fc) -> int:
    z = _pick(ns, fc, "tau", None)
    if z is None:
        print("verify: --tau is required", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(z, str):
        z = parse_complex(z)
    par = validate_parameter(z.real, z.imag)
    N = int(_pick(ns, fc, "N_single", 30))
    samples = int(_pick(ns, fc, "samples", 4000))
    seed = int(_pick(ns, fc, "seed", 0))
    out = _outdir(ns, fc)
    geo = verify_geometry(par, N, samples, seed)
    xinf = verify_x_infinity(par)
    theta = theta_diagnostic(par, p_max=8)
    sections = {
        "contraction_and_separation": {
            "records": [list(r) for r in geo.records()],
            "passed": geo.passed,
        },
        "truncation_remainder": {
            "Ns": list(xinf.Ns),
            "s_values": list(xinf.s_values),
            "passed": xinf.passed,
        },
        "divergence_exponent": {
            "partial_sums": list(theta.partial_sums),
            "tail_just_above_one": theta.tail_at_105,
            "passed": theta.passed,
        },
    }
    passed = geo.passed and xinf.passed and theta.passed
    echo = outputs.config_echo(
        None, "verify", tau=[par.u, par.v], N=N, samples=samples, seed=seed, out=out
    )
    doc = {
        "artifact": "verify_report",
        "config": echo,
        "sections": sections,
        "passed": passed,
    }
    outputs._atomic_write_text(
        os.path.join(out, "verify.json"), json.dumps(doc, sort_keys=True, indent=2) + "\n"
    )
    for name, sec in sections.items():
        print(f"  {name}: {'pass' if sec['passed'] else 'FAIL'}")
    print(f"verify: {'pass' if passed else 'FAIL'} ({out}/verify.json)")
    return EXIT_OK if passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ccfdim",
        description="certified Hausdorff dimension brackets for complex "
        "continued fraction limit sets",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, tau=True):
        if tau:
            p.add_argument("--tau", type=parse_complex, default=None,
                           help="parameter as a+bi, e.g. 0+1i")
        p.add_argument("--config", default=None, help="JSON file with flag defaults")
        p.add_argument("--out", default=None, help="output directory (default .)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--budget", type=float, default=None,
                       help="word budget per rung (default 1e8)")

    def solver_flags(p):
        p.add_argument("--N", type=parse_int_list, default=None,
                       help="truncation schedule, e.g. 10,20,40")
        p.add_argument("--n", type=parse_int_list, default=None,
                       help="word length schedule, e.g. 1,2,2")
        p.add_argument("--tol", type=float, default=None,
                       help="bisection tolerance (default 1e-3)")
        p.add_argument("--target-width", dest="target_width", type=float, default=None)
        p.add_argument("--no-tail", dest="tail", action="store_const", const=False,
                       default=None, help="bracket the finite subsystem F(N) only")
        p.add_argument("--cache-dir", dest="cache_dir", default=None,
                       help="rung cache directory (or set CCFDIM_CACHE_DIR)")

    p = sub.add_parser("dim", help="certified dimension bracket at one tau")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("pressure", help="two-sided pressure curve at one tau")
    common(p)
    p.add_argument("--t", type=parse_float_list, default=None,
                   help="comma-separated t grid inside [0,3]")
    p.add_argument("--N", dest="N_single", type=int, default=None)
    p.add_argument("--n", dest="n_single", type=int, default=None)
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("limitset", help="sample the limit set at finite depth")
    common(p)
    p.add_argument("--N", dest="N_single", type=int, default=None)
    p.add_argument("--n", dest="n_single", type=int, default=None)
    p.add_argument("--random", type=int, default=None,
                   help="sample this many random words instead of enumerating")
    p.add_argument("--boxdim", action="store_const", const=True, default=None,
                   help="also fit a box-counting slope")
    p.add_argument("--svg", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_limitset)

    p = sub.add_parser("sweep", help="dimension brackets over a parameter region")
    common(p, tau=False)
    solver_flags(p)
    p.add_argument("--region", type=parse_region, default=None,
                   help="u0,u1,v0,v1 rectangle inside A0")
    p.add_argument("--step", type=float, default=None, help="lattice step (default 0.25)")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default 1)")
    p.add_argument("--svg", action="store_const", const=True, default=None)
    p.add_argument("--checks", action="store_const", const=True, default=None,
                   help="run continuity/boundary/non-constancy checks on the grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="structural checks at one tau")
    common(p)
    p.add_argument("--N", dest="N_single", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    return top


def _glue_negative_values(argv: list) -> list:
    """argparse reads `--tau -1+1i` as a flag named -1+1i; rewrite such
    pairs to --tau=-1+1i so invalid parameters reach the domain check."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--tau" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(a + "=" + argv[i + 1])
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    ns = build_parser().parse_args(_glue_negative_values(argv))
    fc = {}
    config_path = getattr(ns, "config", None)
    if config_path:
        try:
            with open(config_path) as f:
                fc = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            print(f"bad config file {config_path}: {e}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return ns.func(ns, fc)
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as e:
        print(f"internal check failure: {e}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as e:
        print(f"filesystem error: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
