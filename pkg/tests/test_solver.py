"""Bisection, rung solving, ladders, and the certified intersection."""

import math
from dataclasses import asdict

import pytest

from ccfdim.cache import Cache
from ccfdim.pressure import BudgetError
from ccfdim.solver import (
    T_FLOOR,
    DimensionBracket,
    SignChangeError,
    SolverConfig,
    bisect_zero,
    dimension_bracket,
    refine_ladder,
    solve_rung,
)
from ccfdim.system import Parameter

TAU_I = Parameter(0.0, 1.0)


def test_bisect_linear_root():
    # f(t) = log 2 - t log 2 has its zero exactly at t = 1
    f = lambda t: math.log(2.0) * (1.0 - t)
    res = bisect_zero(f, 0.5, 1.75, 1e-9)
    assert res.hi - res.lo <= 1e-9
    assert res.lo <= 1.0 <= res.hi + 1e-9
    assert f(res.lo) > 0                    # certified side by default
    assert res.evals >= 2 + math.ceil(math.log2(1.25 / 1e-9))


def test_bisect_certified_side_on_exact_zero():
    f = lambda t: 1.0 - t                   # midpoint of [0, 2] lands on 0
    lo_side = bisect_zero(f, 0.0, 2.0, 1e-6, certify="lo")
    assert f(lo_side.lo) > 0 and lo_side.lo < 1.0 <= lo_side.hi
    hi_side = bisect_zero(f, 0.0, 2.0, 1e-6, certify="hi")
    assert f(hi_side.hi) < 0 and hi_side.hi > 1.0 >= hi_side.lo


def test_bisect_rejects_bad_arguments():
    f = lambda t: 1.0 - t
    with pytest.raises(SignChangeError):
        bisect_zero(f, 2.0, 3.0, 1e-6)      # f(a) already negative
    with pytest.raises(SignChangeError):
        bisect_zero(lambda t: t + 1.0, 0.0, 2.0, 1e-6)
    with pytest.raises(ValueError):
        bisect_zero(f, 0.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        bisect_zero(f, 0.0, 2.0, 1e-6, certify="mid")


def test_single_letter_subsystem_degenerates():
    # one contraction alone has dimension 0; both bisections clamp
    rung = solve_rung(TAU_I, 1, 1, tail=False, refine_domain=False)
    assert rung.h_lo == 0.0
    assert rung.h_hi == T_FLOOR
    assert "degenerate" in rung.flags and "lo-floor" in rung.flags


def test_tiny_full_system_clamps_lower_to_one():
    # F(1) plus the tail cover: the lower pressure never turns positive,
    # and the trivial bound h > 1 (theta = 1) is used instead of 0
    rung = solve_rung(TAU_I, 1, 1, tail=True, refine_domain=False)
    assert rung.h_lo == 1.0
    assert "lo-floor" in rung.flags
    assert rung.h_hi > rung.h_lo


def test_schedule_zip_and_broadcast():
    assert SolverConfig(N_schedule=(10, 20), n_schedule=(1, 2)).rungs() == [
        (10, 1),
        (20, 2),
    ]
    assert SolverConfig(N_schedule=(10,), n_schedule=(1, 2, 3)).rungs() == [
        (10, 1),
        (10, 2),
        (10, 3),
    ]
    assert SolverConfig(N_schedule=(10, 20), n_schedule=(2,)).rungs() == [
        (10, 2),
        (20, 2),
    ]
    with pytest.raises(ValueError):
        SolverConfig(N_schedule=(10, 20), n_schedule=(1, 2, 3)).rungs()


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(N_schedule=())
    with pytest.raises(ValueError):
        SolverConfig(N_schedule=(0,))
    with pytest.raises(ValueError):
        SolverConfig(n_schedule=(1.5,))
    with pytest.raises(ValueError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(budget=0)


SMALL = dict(N_schedule=(5, 8), n_schedule=(1, 2), tol=1e-3)


def test_ladder_monotone_and_intersected():
    cfg = SolverConfig(N_schedule=(5, 10, 20), n_schedule=(2,), tol=1e-3)
    rungs = refine_ladder(TAU_I, cfg)
    los = [r.h_lo for r in rungs]
    assert los == sorted(los)               # lower bounds grow with N
    br = dimension_bracket(TAU_I, cfg)
    assert br.h_lo == max(los)
    assert br.h_hi == min(r.h_hi for r in rungs)
    assert 1.0 < br.h_lo <= br.h_hi < 2.0


def test_refined_domain_sharpens_lower_bound():
    plain = solve_rung(TAU_I, 10, 2, refine_domain=False)
    sharp = solve_rung(TAU_I, 10, 2, refine_domain=True)
    assert "refined-domain" in sharp.flags
    assert sharp.h_lo >= plain.h_lo
    assert sharp.h_hi == plain.h_hi         # sup side is untouched


def test_bracket_reproducible_bitwise():
    a = dimension_bracket(TAU_I, SolverConfig(**SMALL))
    b = dimension_bracket(TAU_I, SolverConfig(**SMALL))
    assert (a.h_lo, a.h_hi) == (b.h_lo, b.h_hi)
    for ra, rb in zip(a.rungs, b.rungs):
        da, db = asdict(ra), asdict(rb)
        da.pop("seconds"), db.pop("seconds")
        assert da == db


def test_cache_round_trip_preserves_numbers(tmp_path):
    cache = Cache(tmp_path)
    first = dimension_bracket(TAU_I, SolverConfig(**SMALL), cache=cache)
    assert cache.misses >= 2 and cache.hits == 0
    again = dimension_bracket(TAU_I, SolverConfig(**SMALL), cache=cache)
    assert cache.hits == 2                  # both rungs served from disk
    assert [asdict(r) for r in again.rungs] == [asdict(r) for r in first.rungs]
    # a different tolerance is a different key, not a near-hit
    dimension_bracket(TAU_I, SolverConfig(N_schedule=(5, 8), n_schedule=(1, 2), tol=2e-3), cache=cache)
    assert cache.hits == 2


def test_budget_skips_are_reported():
    cfg = SolverConfig(N_schedule=(5, 60), n_schedule=(1, 3), budget=10**6)
    br = dimension_bracket(TAU_I, cfg)
    assert [r.skipped for r in br.rungs] == [False, True]
    assert "skipped-rungs" in br.flags
    assert br.rungs[1].note != ""
    with pytest.raises(BudgetError):
        dimension_bracket(TAU_I, SolverConfig(N_schedule=(60,), n_schedule=(3,), budget=10**6))


def test_convergence_flag_tracks_target():
    wide = dimension_bracket(TAU_I, SolverConfig(N_schedule=(5,), n_schedule=(1,), target_width=1e-4))
    assert not wide.converged and "unconverged" in wide.flags
    ok = dimension_bracket(TAU_I, SolverConfig(**SMALL, target_width=0.5))
    assert ok.converged and "unconverged" not in ok.flags
    assert ok.midpoint == pytest.approx(0.5 * (ok.h_lo + ok.h_hi))
