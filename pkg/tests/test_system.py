"""Parameter domain, letter grids, and the invariant-disk refinement."""

import numpy as np
import pytest

from ccfdim.geometry import DOMAIN, mobius_deriv_bounds, letter_map
from ccfdim.system import (
    DomainError,
    Parameter,
    apply_letter,
    certify_invariant,
    invariant_disk,
    letter_disk_images,
    letter_grid,
    letter_norm_logs,
    ratio_constants,
    sample_domain,
    validate_parameter,
    verify_geometry,
)


def test_parameter_validation():
    assert validate_parameter(0.0, 1.0).tau == 1j          # corner of A0 is legal
    assert validate_parameter(2.5, 3.0).interior
    assert not validate_parameter(0.0, 2.0).interior
    for u, v in ((-0.1, 1.5), (1.0, 0.999), (-3.0, 0.0)):
        with pytest.raises(DomainError):
            validate_parameter(u, v)
    with pytest.raises(DomainError):
        validate_parameter(float("nan"), 2.0)


def test_letter_grid_values():
    par = Parameter(0.5, 2.0)
    b = letter_grid(par, 3)
    assert len(b) == 9
    want = {complex(m) + complex(n) * par.tau for m in (1, 2, 3) for n in (1, 2, 3)}
    assert set(np.round(b, 12)) == {complex(round(w.real, 12), round(w.imag, 12)) for w in want}


def test_letter_norm_logs_match_matrix_bounds():
    par = Parameter(0.0, 1.0)
    b = letter_grid(par, 4)
    inf_logs, sup_logs = letter_norm_logs(par, 4)
    for k in (0, 5, 15):
        db = mobius_deriv_bounds(letter_map(complex(b[k])))
        assert np.exp(sup_logs[k]) == pytest.approx(db.sup_norm, rel=1e-12)
        assert np.exp(inf_logs[k]) == pytest.approx(db.inf_norm, rel=1e-12)


def test_ratio_constants_bound_samples():
    # C1 <= |z' + b(tau_k)|^2 / |z + b(tau)|^2 <= C2 for z, z' in X and
    # parameters with |u - u_k| <= 1, |v - v_k| <= v/3; sample all of it
    rng = np.random.default_rng(7)
    for u, v in ((1.0, 1.0), (0.0, 1.0), (2.0, 3.0)):
        par = Parameter(u, v)
        c1, c2 = ratio_constants(par)
        assert 0.0 < c1 < 1.0 < c2
        z = sample_domain(200, seed=1)
        zp = sample_domain(200, seed=2)
        for _ in range(25):
            uk = u + rng.uniform(-1.0, 1.0)
            vk = v + rng.uniform(-v / 3.0, v / 3.0)
            if uk < 0.0 or vk < 1.0:
                continue
            for m, n in ((1, 1), (1, 9), (5, 3), (17, 25)):
                ratio = (
                    np.abs(zp + (m + n * complex(uk, vk))) ** 2
                    / np.abs(z + (m + n * par.tau)) ** 2
                )
                assert ratio.min() >= c1 - 1e-12
                assert ratio.max() <= c2 + 1e-12


def test_sample_domain_inside_x():
    z = sample_domain(500, seed=4)
    assert len(z) == 505                   # five extreme points appended
    assert np.abs(z - 0.5).max() <= 0.5 + 1e-12
    assert 0.0 in z and 1.0 in z and 0.5 + 0.5j in z
    # deterministic under the seed
    assert np.array_equal(z, sample_domain(500, seed=4))


def test_verify_geometry_passes_on_lattice_parameters():
    for tau in (1j, 1 + 1j, 2 + 3j):
        rep = verify_geometry(Parameter(tau.real, tau.imag), N=6, sample_count=800)
        assert rep.passed, rep.failures
        assert rep.osc_min_gap >= 1.0 - 1e-9


def test_verify_geometry_needs_two_samples():
    with pytest.raises(ValueError):
        verify_geometry(Parameter(0.0, 1.0), N=3, sample_count=1)


def test_apply_letter_hand_value():
    # phi_{1+i}(1/2) = 1/(3/2 + i) = (3/2 - i) / (13/4) = 6/13 - 4i/13
    got = apply_letter(1 + 1j, 0.5 + 0j)
    assert got == pytest.approx(6.0 / 13.0 - 4.0j / 13.0, abs=1e-15)


def test_letter_disk_images_contained_in_x():
    par = Parameter(0.0, 1.0)
    b = letter_grid(par, 8)
    cs, rs = letter_disk_images(b, DOMAIN)
    # image disks must sit inside X: |center - 1/2| + radius <= 1/2
    assert (np.abs(cs - 0.5) + rs).max() <= 0.5 + 1e-12


def test_invariant_disk_certified_and_smaller_than_x():
    for tau in (1j, 0.25 + 1j, 1 + 2j, 2 + 3j):
        par = Parameter(tau.real, tau.imag)
        disk = invariant_disk(par)
        assert disk.radius < DOMAIN.radius
        assert certify_invariant(disk, par, 400)
        # containment in X is not required for soundness, but the hull of
        # image disks happens to live there; catch drift if it ever leaves
        assert abs(disk.center - 0.5) <= 0.5 + disk.radius


def test_invariant_disk_image_containment_explicit():
    par = Parameter(0.0, 1.0)
    disk = invariant_disk(par)
    b = letter_grid(par, 50)
    cs, rs = letter_disk_images(b, disk)
    assert (np.abs(cs - disk.center) + rs).max() <= disk.radius + 1e-12


def test_certify_rejects_too_small_disk():
    from ccfdim.geometry import Disk

    par = Parameter(0.0, 1.0)
    tiny = Disk(0.4 + 0j, 1e-3)
    assert not certify_invariant(tiny, par, 10)
