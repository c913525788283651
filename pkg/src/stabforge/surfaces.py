"""Exact central-charge arithmetic for products of two curves.

The charge on the surface is the degree-two twisted integral of the Chern
character, expanded in the ring R[D1, D2]/(D1^2, D2^2).  The headline fact,
checked both as a polynomial identity and numerically, is that it factors
(up to sign) into the two curve charges -deg + (b + i h) rank.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from .errors import ZeroClass
from .p1 import GeometricStab, phase_p1
from .lattice import Generator, line, POINT

__all__ = [
    "SurfaceChargeData",
    "SurfaceClass",
    "charge_bh",
    "factor_charge",
    "external_surface_class",
    "product_identity_residual",
    "product_decomposition_check",
    "surface_phase",
    "geom_product",
    "GeomProductResult",
    "PhaseWindowCheck",
    "elliptic_product_charge",
    "elliptic_factor_stable",
]


@dataclass(frozen=True)
class SurfaceChargeData:
    """B-field and polarisation coefficients along the two fiber divisors."""

    b1: float
    b2: float
    h1: float
    h2: float

    def __post_init__(self):
        if not (self.h1 > 0 and self.h2 > 0):
            raise ValueError("polarisation coefficients must be positive")

    @property
    def w1(self) -> complex:
        return self.b1 + 1j * self.h1

    @property
    def w2(self) -> complex:
        return self.b2 + 1j * self.h2


@dataclass(frozen=True)
class SurfaceClass:
    """Rank, first Chern coefficients along (D1, D2), and the degree-4 piece.

    ``ch2`` may be a Fraction so the identity checks can run exactly.
    The line bundle O(k1, k2) is (1, (k1, k2), k1*k2).
    """

    rank: int
    c1: tuple[int, int]
    ch2: Fraction | int | float

    @staticmethod
    def line_bundle(k1: int, k2: int) -> "SurfaceClass":
        return SurfaceClass(1, (k1, k2), k1 * k2)

    @staticmethod
    def point() -> "SurfaceClass":
        return SurfaceClass(0, (0, 0), 1)


def charge_bh(d: SurfaceChargeData, cls: SurfaceClass):
    """Twisted Chern-character charge: minus the top coefficient of
    exp(-(B + iH)) * ch(cls) in R[D1, D2]/(D1^2, D2^2)."""
    w1, w2 = d.w1, d.w2
    a, b = cls.c1
    return -(cls.rank * w1 * w2 - w1 * b - w2 * a + cls.ch2)


def factor_charge(b: float, h: float, rank: int, degree: int) -> complex:
    """Curve-side charge -deg + (b + i h) rank."""
    return -degree + (b + 1j * h) * rank


def external_surface_class(r1: int, d1: int, r2: int, d2: int) -> SurfaceClass:
    """Class of the external product of two curve classes (rank, degree).

    ch(E1 x E2) = (r1 + d1 D1)(r2 + d2 D2); the first-factor degree rides on
    D1 and the second on D2, so the pushed-forward curve O_x x O(l) is
    (0, (1, 0), l) and O(l) x O_x is (0, (0, 1), l).
    """
    return SurfaceClass(r1 * r2, (d1 * r2, r1 * d2), d1 * d2)


def product_identity_residual() -> sp.Expr:
    """Symbolic residual of the factorisation identity; zero iff it holds.

    Expands charge_bh(external class) + Z1 * Z2 as a polynomial in the rank,
    degree, B-field, and polarisation symbols.
    """
    r1, d1, r2, d2, b1, b2, h1, h2 = sp.symbols("r1 d1 r2 d2 b1 b2 h1 h2", real=True)
    i = sp.I
    w1, w2 = b1 + i * h1, b2 + i * h2
    rank = r1 * r2
    c1a, c1b = d1 * r2, r1 * d2
    ch2 = d1 * d2
    lhs = -(rank * w1 * w2 - w1 * c1b - w2 * c1a + ch2)
    z1 = -d1 + w1 * r1
    z2 = -d2 + w2 * r2
    return sp.expand(lhs + z1 * z2)


def product_decomposition_check(
    n_samples: int = 1000, rng=None, tol: float = 1e-12
) -> tuple[bool, float, tuple | None]:
    """Numeric spot check of charge_bh(E1 x E2) = -Z1(E1) Z2(E2).

    Samples include torsion factors (rank 0, degree 1).  Returns the overall
    verdict, the worst relative error, and a witness sample on failure.
    """
    import numpy as np

    rng = np.random.default_rng(rng)
    worst = 0.0
    witness = None
    ok = True
    for _ in range(n_samples):
        b1, b2 = rng.uniform(-3, 3, size=2)
        h1, h2 = rng.uniform(0.1, 3, size=2)
        r1, r2 = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        d1, d2 = int(rng.integers(-5, 6)), int(rng.integers(-5, 6))
        if r1 == 0 and d1 == 0:
            d1 = 1
        if r2 == 0 and d2 == 0:
            d2 = 1
        d = SurfaceChargeData(b1, b2, h1, h2)
        lhs = charge_bh(d, external_surface_class(r1, d1, r2, d2))
        rhs = -factor_charge(b1, h1, r1, d1) * factor_charge(b2, h2, r2, d2)
        scale = max(abs(lhs), abs(rhs), 1e-30)
        rel = abs(lhs - rhs) / scale
        if rel > worst:
            worst = rel
            if rel > tol:
                ok = False
                witness = (b1, b2, h1, h2, r1, d1, r2, d2)
    return ok, worst, witness


def surface_phase(d: SurfaceChargeData, cls: SurfaceClass, twist: complex = 0j) -> float:
    """Phase of a class under the twisted surface charge.

    The untwisted branch follows the geometric heart: skyscrapers at exactly
    one, torsion classes in (0, 1), line bundles in (-1, 1).
    """
    z = charge_bh(d, cls)
    if cls.rank == 0 and cls.c1 == (0, 0):
        base = 1.0
    elif cls.rank == 0:
        base = cmath.phase(z) / math.pi  # in (0, 1) for effective torsion classes
    else:
        # principal branch lands in (-1, 1) for line bundles
        base = cmath.phase(z) / math.pi
    return base + twist.imag / math.pi


@dataclass(frozen=True)
class PhaseWindowCheck:
    family: str
    params: tuple
    factor_sum: float
    surface_value: float
    window: tuple[float, float]
    in_window: bool
    matches: bool


@dataclass(frozen=True)
class GeomProductResult:
    data: SurfaceChargeData
    twist: complex
    checks: tuple[PhaseWindowCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.in_window and c.matches for c in self.checks)


def geom_product(
    s1: GeometricStab,
    s2: GeometricStab,
    *,
    degrees: tuple[int, int] = (-3, 3),
    angle_tol: float = 1e-10,
) -> GeomProductResult:
    """Surface data for two geometric factors, with phase bookkeeping.

    Returns B = (Re tau_1, Re tau_2), H = (Im tau_1, Im tau_2), twist
    c1 + c2 + i*pi, and window checks for the four stable families: line
    bundles, the two torsion families, and skyscrapers.
    """
    d = SurfaceChargeData(s1.tau.real, s2.tau.real, s1.tau.imag, s2.tau.imag)
    twist = s1.c + s2.c + 1j * math.pi
    base = (s1.c.imag + s2.c.imag) / math.pi
    lo, hi = degrees
    checks = []

    def add(family, params, factor_sum, surface_value, window):
        checks.append(
            PhaseWindowCheck(
                family,
                params,
                factor_sum,
                surface_value,
                window,
                window[0] < factor_sum < window[1]
                if family != "skyscraper"
                else True,
                abs(factor_sum - surface_value) <= angle_tol,
            )
        )

    for k1 in range(lo, hi + 1):
        for k2 in range(lo, hi + 1):
            fsum = phase_p1(s1, Generator((line(k1),))) + phase_p1(
                s2, Generator((line(k2),))
            )
            sval = surface_phase(d, SurfaceClass.line_bundle(k1, k2), twist)
            add("line-bundle", (k1, k2), fsum, sval, (base, base + 2.0))

    for k in range(lo, hi + 1):
        fsum = phase_p1(s1, Generator((line(k),))) + phase_p1(s2, Generator((POINT,)))
        sval = surface_phase(d, external_surface_class(1, k, 0, 1), twist)
        add("torsion-1", (k,), fsum, sval, (base + 1.0, base + 2.0))

        fsum = phase_p1(s1, Generator((POINT,))) + phase_p1(s2, Generator((line(k),)))
        sval = surface_phase(d, external_surface_class(0, 1, 1, k), twist)
        add("torsion-2", (k,), fsum, sval, (base + 1.0, base + 2.0))

    fsum = phase_p1(s1, Generator((POINT,))) + phase_p1(s2, Generator((POINT,)))
    sval = surface_phase(d, SurfaceClass.point(), twist)
    add("skyscraper", (), fsum, sval, (base + 2.0, base + 2.0))

    return GeomProductResult(d, twist, tuple(checks))


def elliptic_product_charge(
    tau1: complex, c1: complex, tau2: complex, c2: complex, cls1, cls2
) -> complex:
    """Twisted product charge for a pair of curve classes on two elliptic curves."""
    r1, d1 = cls1
    r2, d2 = cls2
    return (
        cmath.exp(c1 + c2 + 1j * math.pi)
        * (-1.0)
        * (-d1 + tau1 * r1)
        * (-d2 + tau2 * r2)
    )


def elliptic_factor_stable(r: int, d: int) -> bool:
    """Stability predicate for an elliptic-curve class: coprime rank and degree."""
    if r == 0 and d == 0:
        raise ZeroClass("the zero class has no stability predicate")
    return math.gcd(abs(r), abs(d)) == 1
