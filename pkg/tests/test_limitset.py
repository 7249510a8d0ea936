"""Point clouds, closure structure, tail radii, and box-counting fits."""

import math

import numpy as np
import pytest

from ccfdim.limitset import (
    BoxCountResult,
    DegenerateFitError,
    PointCloud,
    box_counting_dim,
    closure_count,
    closure_points,
    default_scales,
    generate_points,
    tail_image_radius,
    verify_x_infinity,
)
from ccfdim.pressure import BudgetError
from ccfdim.system import Parameter

TAU_I = Parameter(0.0, 1.0)


def test_single_word_hand_value():
    # phi_{1+i}(1/2) = 1/(3/2 + i) = 6/13 - 4i/13
    cloud = generate_points(TAU_I, 1, 1)
    assert len(cloud.points) == 1
    assert cloud.points[0] == pytest.approx(6 / 13 - 4j / 13, abs=1e-15)
    assert cloud.method == "exhaustive" and cloud.seed is None


def test_exhaustive_enumeration_count_and_bounds():
    cloud = generate_points(TAU_I, 3, 2)
    assert len(cloud.points) == 81
    assert np.abs(cloud.points - 0.5).max() <= 0.5 + 1e-9
    # uniform contraction: sup|phi_w'| <= (worst letter sup)^n < 0.6^n
    assert cloud.error_bound <= 0.6**2
    deep = generate_points(TAU_I, 2, 6)
    assert deep.error_bound <= 0.6**6


def test_random_clouds_are_seeded():
    a = generate_points(TAU_I, 20, 4, count=2000, seed=5)
    b = generate_points(TAU_I, 20, 4, count=2000, seed=5)
    c = generate_points(TAU_I, 20, 4, count=2000, seed=6)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)
    assert a.method == "random" and a.seed == 5
    assert np.abs(a.points - 0.5).max() <= 0.5 + 1e-9


def test_generation_argument_errors():
    with pytest.raises(ValueError):
        generate_points(TAU_I, 3, 0)
    with pytest.raises(ValueError):
        generate_points(TAU_I, 3, 2, count=0)
    with pytest.raises(BudgetError):
        generate_points(TAU_I, 10, 5, budget=10**6)


def closure_bfs(par, N, max_len):
    # direct breadth-first orbit of 0, the oracle for closure_points
    letters = [m + n * par.tau for m in range(1, N + 1) for n in range(1, N + 1)]
    frontier = [0.0 + 0.0j]
    out = [0.0 + 0.0j]
    for _ in range(max_len):
        frontier = [1.0 / (z + b) for z in frontier for b in letters]
        out.extend(frontier)
    return np.array(out)


def test_closure_points_match_bfs_oracle():
    pts = closure_points(TAU_I, 3, 2)
    assert len(pts) == closure_count(3, 2) == 1 + 9 + 81
    oracle = closure_bfs(TAU_I, 3, 2)
    assert len(oracle) == len(pts)
    # same multiset up to float noise
    key = np.lexsort((pts.imag.round(12), pts.real.round(12)))
    okey = np.lexsort((oracle.imag.round(12), oracle.real.round(12)))
    assert np.allclose(pts[key], oracle[okey], atol=1e-12)
    # contains 0 and every first-level image 1/b
    assert 0.0 in pts
    for b in (1 + 1j, 2 + 3j):
        assert np.min(np.abs(pts - 1.0 / (0.5 * 0 + b))) < 1e-12


def test_closure_points_validation():
    with pytest.raises(ValueError):
        closure_points(TAU_I, 3, 0)


def test_tail_image_radius_hand_values():
    # N=1, tau=i: nearest outside letter is 1 + 2i, |1.5 + 2i| = 2.5
    assert tail_image_radius(TAU_I, 1) == pytest.approx(0.5, abs=1e-14)
    s100 = tail_image_radius(TAU_I, 100)
    assert s100 == pytest.approx(1.0 / (math.hypot(1.5, 101.0) - 0.5), rel=1e-12)
    assert s100 == pytest.approx(0.009949, abs=1e-6)


def test_x_infinity_report():
    rep = verify_x_infinity(TAU_I)
    assert rep.Ns == [1, 10, 100, 1000]
    assert rep.strictly_decreasing and rep.vanishes and rep.passed
    assert rep.s_values[-1] < 1.1e-3
    with pytest.raises(ValueError):
        verify_x_infinity(TAU_I, Ns=(10, 10))
    with pytest.raises(ValueError):
        verify_x_infinity(TAU_I, Ns=(5,))


def synthetic_cloud(points, n=8):
    return PointCloud(
        points=np.asarray(points),
        par=TAU_I,
        N=1,
        n=n,
        method="synthetic",
        seed=None,
        max_word_sup=0.0,
    )


def test_box_dim_recovers_segment_and_square():
    rng = np.random.default_rng(11)
    seg = rng.random(200_000) + 0.33j
    res = box_counting_dim(seg, np.geomspace(2e-3, 0.25, 8))
    assert res.slope == pytest.approx(1.0, abs=0.1)
    assert res.r_squared > 0.99
    square = rng.random(200_000) + 1j * rng.random(200_000)
    res2 = box_counting_dim(square, np.geomspace(5e-2, 0.5, 8))
    assert res2.slope == pytest.approx(2.0, abs=0.1)


def test_box_dim_validation_and_degenerate():
    pts = np.full(2000, 0.25 + 0.25j)
    with pytest.raises(DegenerateFitError):
        box_counting_dim(pts, np.geomspace(1e-3, 0.25, 6))
    with pytest.raises(ValueError):
        box_counting_dim(pts[:10], np.geomspace(1e-3, 0.25, 6))
    with pytest.raises(ValueError):
        box_counting_dim(pts, np.array([0.25]))
    with pytest.raises(ValueError):
        box_counting_dim(pts, np.array([0.0, 0.5]))
    with pytest.raises(ValueError):
        box_counting_dim(pts, np.array([0.5, 2.0]))


def test_default_scales_respect_error_floor():
    cloud = generate_points(TAU_I, 3, 6, count=50_000, seed=1)
    scales = default_scales(cloud)
    assert len(scales) == 8
    assert scales.max() == pytest.approx(0.25)
    assert scales.min() >= 4.0 * cloud.error_bound - 1e-15
    res = box_counting_dim(cloud.points, scales)
    assert 0.5 < res.slope < 2.0            # sane, not certified
