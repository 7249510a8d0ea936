"""Moebius maps as normalized 2x2 complex matrices, with exact derivative
extrema over a closed disk.

A map (a, b; c, d) acts as z -> (a z + b) / (c z + d).  Its derivative is
det / (c z + d)^2, so |phi'| on a disk D is extremal where |c z + d| is,
i.e. at the nearest / farthest point of D from the pole -d/c.  Both extrema
therefore have closed forms in the pole-to-center distance, no sampling.

Compositions renormalize by the largest entry magnitude; this keeps entries
in [0, 1] for arbitrarily long words while representing the same map.

One caveat: det here is recomputed as a*d - b*c from the normalized entries,
which cancels catastrophically once the true determinant falls below the
float noise of the entry products (word lengths beyond roughly 15).  These
helpers are meant for letter-level bounds and short verification words; the
power-sum pipeline tracks log-determinants alongside the matrices instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class PoleInDomainError(ValueError):
    """The map's pole meets the evaluation disk; derivative unbounded there."""


class DegenerateMapError(ValueError):
    """Matrix determinant vanished (numeric exhaustion or bad input)."""


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return abs(z - self.center) <= self.radius + tol


# the system domain: X = closed disk of center 1/2, radius 1/2
DOMAIN = Disk(0.5 + 0.0j, 0.5)


def disk_min_max_distance(p: complex, disk: Disk) -> tuple[float, float]:
    """Extremal distances from point p to the closed disk."""
    d = abs(p - disk.center)
    return max(d - disk.radius, 0.0), d + disk.radius


@dataclass(frozen=True)
class Mobius:
    a: complex
    b: complex
    c: complex
    d: complex

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def normalized(self) -> "Mobius":
        s = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if s == 0.0:
            raise DegenerateMapError("zero matrix")
        return Mobius(self.a / s, self.b / s, self.c / s, self.d / s)

    def pole(self) -> complex:
        if self.c == 0:
            raise ZeroDivisionError("affine map has no finite pole")
        return -self.d / self.c


IDENTITY = Mobius(1.0 + 0j, 0j, 0j, 1.0 + 0j)


def letter_map(b: complex) -> Mobius:
    """phi_b(z) = 1/(z+b) as a matrix: rows (0,1), (1,b)."""
    return Mobius(0j, 1.0 + 0j, 1.0 + 0j, b)


def mobius_compose(m1: Mobius, m2: Mobius) -> Mobius:
    out = Mobius(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    ).normalized()
    if out.det == 0:
        raise DegenerateMapError("composition determinant underflowed to zero")
    return out


def mobius_apply(m: Mobius, z: complex) -> complex:
    den = m.c * z + m.d
    if den == 0:
        raise PoleInDomainError(f"evaluation at the pole of {m}")
    return (m.a * z + m.b) / den


@dataclass(frozen=True)
class DerivBounds:
    inf_norm: float
    sup_norm: float

    def __post_init__(self):
        if not (0 < self.inf_norm <= self.sup_norm):
            raise ValueError(f"need 0 < inf <= sup, got {self}")


def mobius_deriv_bounds(m: Mobius, disk: Disk = DOMAIN) -> DerivBounds:
    """Exact extrema of |phi'| over the disk.

    |phi'(z)| = |det| / |c z + d|^2 = |det| / (|c| |z - pole|)^2, so the
    extrema come from the extremal pole distances.  Affine maps (c = 0)
    have constant derivative a/d, magnitude |det|/|d|^2.
    """
    adet = abs(m.det)
    if adet == 0:
        raise DegenerateMapError("zero determinant")
    if m.c == 0:
        val = adet / abs(m.d) ** 2
        return DerivBounds(val, val)
    dmin, dmax = disk_min_max_distance(m.pole(), disk)
    if dmin <= 0:
        raise PoleInDomainError(
            f"pole {m.pole()} inside evaluation disk {disk}; invalid word"
        )
    ac = abs(m.c)
    return DerivBounds(adet / (ac * dmax) ** 2, adet / (ac * dmin) ** 2)


def word_map(bs: list[complex]) -> Mobius:
    """Composition phi_{b1} o phi_{b2} o ... o phi_{bk}, normalized."""
    m = IDENTITY
    for b in bs:
        m = mobius_compose(m, letter_map(b))
    return m


def word_deriv_logs(m: Mobius, disk: Disk = DOMAIN) -> tuple[float, float]:
    """(log inf, log sup) of |phi'| over the disk, safe for tiny norms."""
    adet = abs(m.det)
    if adet == 0:
        raise DegenerateMapError("zero determinant")
    if m.c == 0:
        v = math.log(adet) - 2.0 * math.log(abs(m.d))
        return v, v
    dmin, dmax = disk_min_max_distance(m.pole(), disk)
    if dmin <= 0:
        raise PoleInDomainError(f"pole {m.pole()} inside {disk}")
    lc = math.log(abs(m.c))
    ldet = math.log(adet)
    return ldet - 2.0 * (lc + math.log(dmax)), ldet - 2.0 * (lc + math.log(dmin))
