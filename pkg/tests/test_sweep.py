"""Grid sweeps and the structural checks on synthetic and tiny real data."""

import numpy as np
import pytest

from ccfdim.solver import DimensionBracket, SolverConfig
from ccfdim.sweep import (
    SweepGrid,
    asymptotic_check,
    boundary_max_check,
    continuity_check,
    non_constancy_check,
    subharmonic_check,
    sweep_grid,
)
from ccfdim.system import DomainError, Parameter

TINY = SolverConfig(N_schedule=(5,), n_schedule=(1,), refine_domain=False)


def fake_bracket(u, v, lo, hi):
    return DimensionBracket(
        par=Parameter(u, v),
        h_lo=lo,
        h_hi=hi,
        rungs=[],
        seconds=0.0,
        flags=[],
        target_width=0.05,
    )


def fake_grid(u0, u1, v0, v1, step, mid_fn, width=0.01):
    us = [u0 + i * step for i in range(int(round((u1 - u0) / step)) + 1)]
    vs = [v0 + j * step for j in range(int(round((v1 - v0) / step)) + 1)]
    rows = [
        [fake_bracket(u, v, mid_fn(u, v) - width / 2, mid_fn(u, v) + width / 2) for v in vs]
        for u in us
    ]
    return SweepGrid(u0, u1, v0, v1, step, us, vs, rows)


def test_sweep_lattice_shape_and_cells():
    grid = sweep_grid(0.0, 1.0, 1.0, 2.0, 0.5, TINY)
    assert grid.shape == (3, 3)
    cells = list(grid.cells())
    assert len(cells) == 9
    assert (cells[0][2], cells[0][3]) == (0.0, 1.0)
    assert (cells[-1][2], cells[-1][3]) == (1.0, 2.0)
    for _, _, _, _, br in cells:
        assert 1.0 <= br.h_lo <= br.h_hi <= 2.0
    # the acceptance region at step 0.5 is a 5x5 lattice
    assert len(sweep_grid(0.0, 2.0, 1.0, 3.0, 0.5, TINY).us) == 5


def test_sweep_validates_before_computing():
    with pytest.raises(DomainError):
        sweep_grid(-0.5, 0.5, 1.0, 2.0, 0.5, TINY)
    with pytest.raises(DomainError):
        sweep_grid(0.0, 1.0, 0.5, 2.0, 0.5, TINY)
    with pytest.raises(ValueError):
        sweep_grid(0.0, 1.0, 1.0, 2.0, 0.0, TINY)
    with pytest.raises(ValueError):
        sweep_grid(1.0, 0.0, 1.0, 2.0, 0.5, TINY)
    with pytest.raises(ValueError):
        sweep_grid(0.0, 1.0, 1.0, 2.0, 0.5, TINY, jobs=0)


def test_sweep_jobs_do_not_change_results():
    one = sweep_grid(0.0, 0.5, 1.0, 1.5, 0.25, TINY, jobs=1)
    two = sweep_grid(0.0, 0.5, 1.0, 1.5, 0.25, TINY, jobs=2)
    for (*_, ba), (*_, bb) in zip(one.cells(), two.cells()):
        assert (ba.h_lo, ba.h_hi) == (bb.h_lo, bb.h_hi)


def test_continuity_passes_on_smooth_field():
    grid = fake_grid(0.0, 1.0, 1.0, 2.0, 0.25, lambda u, v: 1.5 - 0.02 * u - 0.02 * v)
    rep = continuity_check(grid)
    assert rep.passed
    assert rep.entries[0].name.startswith("max jump")


def test_continuity_flags_a_jump():
    def mid(u, v):
        return 1.8 if (u, v) == (0.5, 1.5) else 1.3

    rep = continuity_check(fake_grid(0.0, 1.0, 1.0, 2.0, 0.25, mid), slack=0.1)
    assert not rep.passed
    assert any("(0.5,1.5)" in e.name for e in rep.failures)
    # slack absorbs the same jump if widths are large
    wide = fake_grid(0.0, 1.0, 1.0, 2.0, 0.25, mid, width=0.3)
    assert continuity_check(wide, slack=0.1).passed


def test_subharmonic_mean_value_on_fakes():
    harmonic = lambda p: fake_bracket(p.u, p.v, p.u - 0.001, p.u + 0.001)
    rep = subharmonic_check(Parameter(1.0, 2.0), 0.5, 8, bracket_fn=harmonic)
    assert rep.passed

    def spiked(p):
        mid = 1.9 if (p.u, p.v) == (1.0, 2.0) else 1.2
        return fake_bracket(p.u, p.v, mid - 0.001, mid + 0.001)

    rep = subharmonic_check(Parameter(1.0, 2.0), 0.5, 8, bracket_fn=spiked)
    assert not rep.passed


def test_subharmonic_argument_validation():
    with pytest.raises(ValueError):
        subharmonic_check(Parameter(1.0, 2.0), 0.5, 7, bracket_fn=lambda p: None)
    with pytest.raises(ValueError):
        subharmonic_check(Parameter(1.0, 2.0), 0.0, 8, bracket_fn=lambda p: None)
    with pytest.raises(DomainError):
        # circle dips below v = 1
        subharmonic_check(Parameter(1.0, 1.2), 0.5, 8, bracket_fn=lambda p: None)
    with pytest.raises(DomainError):
        subharmonic_check(Parameter(0.3, 2.0), 0.5, 8, bracket_fn=lambda p: None)


def test_boundary_max_pass_fail_inconclusive():
    # decreasing away from the (u=0, v=1) corner: argmax on the boundary
    rep = boundary_max_check(
        fake_grid(0.0, 1.0, 1.0, 2.0, 0.5, lambda u, v: 1.8 - 0.1 * u - 0.1 * v)
    )
    assert rep.passed and rep.entries[0].status == "pass"

    def interior_spike(u, v):
        return 1.9 if (u, v) == (0.5, 1.5) else 1.2

    rep = boundary_max_check(fake_grid(0.0, 1.0, 1.0, 2.0, 0.5, interior_spike))
    assert not rep.passed                   # certified above every boundary cell

    def shallow_spike(u, v):
        return 1.205 if (u, v) == (0.5, 1.5) else 1.2

    rep = boundary_max_check(
        fake_grid(0.0, 1.0, 1.0, 2.0, 0.5, shallow_spike, width=0.05)
    )
    assert rep.entries[0].status == "inconclusive"
    assert rep.passed                       # inconclusive is not a failure

    with pytest.raises(ValueError):
        boundary_max_check(
            fake_grid(0.5, 1.0, 1.5, 2.0, 0.25, lambda u, v: 1.5)
        )


def test_asymptotic_argument_validation():
    with pytest.raises(ValueError):
        asymptotic_check(1 + 1j, (10.0, 10.0))
    with pytest.raises(ValueError):
        asymptotic_check(1 + 1j, (30.0,))
    with pytest.raises(ValueError):
        asymptotic_check(0j, (10.0, 20.0))


def test_non_constancy_detects_disjoint_pair():
    grid = fake_grid(0.0, 0.5, 1.0, 1.5, 0.25, lambda u, v: 1.3 + 0.4 * u, width=0.02)
    rep = non_constancy_check(grid, escalate=False)
    assert rep.passed
    assert "margin" in rep.entries[0].details


def test_non_constancy_fails_flat_grid_without_escalation():
    grid = fake_grid(0.0, 0.5, 1.0, 1.5, 0.25, lambda u, v: 1.4, width=0.1)
    rep = non_constancy_check(grid, escalate=False)
    assert not rep.passed
    assert "escalation disabled" in rep.entries[0].inequality
