"""Stability data on the derived category of one projective line.

Two families: geometric data (an upper-half-plane parameter plus a twist,
under which every line bundle and the skyscraper are stable) and algebraic
data (two adjacent line bundles O(k), O(k+1) stable, with a phase gap of at
least one).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NotStable, RearrangementBlocked, UnsupportedObject
from .lattice import (
    POINT,
    FactorClass,
    FormalObject,
    Generator,
    hom_degrees,
    line,
)

__all__ = [
    "GeometricStab",
    "AlgebraicStab",
    "StabP1",
    "is_geometric",
    "central_charge_p1",
    "stable_objects_p1",
    "phase_p1",
    "hn_p1",
    "generator_factor_class",
    "DEFAULT_WINDOW",
]

DEFAULT_WINDOW = (-8, 8)


@dataclass(frozen=True)
class GeometricStab:
    """Geometric datum: charge -deg + tau*rank, twisted by exp(c)."""

    tau: complex
    c: complex = 0j

    def __post_init__(self):
        if not self.tau.imag > 0:
            raise ValueError("tau must lie in the open upper half plane")


@dataclass(frozen=True)
class AlgebraicStab:
    """Algebraic datum around the pair O(k), O(k+1).

    O(k) has phase psi and charge modulus m0; O(k+1) has phase psi + phi and
    modulus m1.  Membership in the algebraic chamber requires phi >= 1, but
    the type accepts any phi > 0 so counterexample scenarios can be built;
    every constructive operation revalidates.
    """

    k: int
    psi: float
    phi: float
    m0: float = 1.0
    m1: float = 1.0

    def __post_init__(self):
        if self.phi <= 0:
            raise ValueError("phi must be positive")
        if self.m0 <= 0 or self.m1 <= 0:
            raise ValueError("charge moduli must be positive")


StabP1 = GeometricStab | AlgebraicStab


def is_geometric(s: StabP1) -> bool:
    return isinstance(s, GeometricStab)


def generator_factor_class(g: Generator) -> FactorClass:
    if g.n != 1:
        raise ValueError("expected a single-factor generator")
    r, d = (0, 1) if g.symbols[0].is_point else (1, g.symbols[0].degree)
    sign = (-1) ** (g.shift % 2)
    return FactorClass(sign * r, sign * d)


def central_charge_p1(s: StabP1, cls: FactorClass) -> complex:
    """Central charge of a rank/degree class."""
    if is_geometric(s):
        return cmath.exp(s.c) * (-cls.degree + s.tau * cls.rank)
    z0 = s.m0 * cmath.exp(1j * math.pi * s.psi)
    z1 = s.m1 * cmath.exp(1j * math.pi * (s.psi + s.phi))
    r, d = cls.rank, cls.degree
    # unique additive extension of Z(O(k)) = z0, Z(O(k+1)) = z1
    return (r * (s.k + 1) - d) * z0 + (d - r * s.k) * z1


def stable_objects_p1(s: StabP1, window: tuple[int, int] = DEFAULT_WINDOW) -> list[Generator]:
    """Stable generators at shift zero; the geometric list is window-local."""
    if is_geometric(s):
        lo, hi = window
        gens = [Generator((line(m),)) for m in range(lo, hi + 1)]
        gens.append(Generator((POINT,)))
        return gens
    return [Generator((line(s.k),)), Generator((line(s.k + 1),))]


def phase_p1(s: StabP1, g: Generator) -> float:
    """Phase of a stable generator, including its shift."""
    if g.n != 1:
        raise ValueError("expected a single-factor generator")
    sym = g.symbols[0]
    if is_geometric(s):
        base = s.c.imag / math.pi
        if sym.is_point:
            return base + 1.0 + g.shift
        # arg(tau - m) lies in (0, pi), pinning the phase to the open unit
        # interval above the twist, below the skyscraper
        return base + cmath.phase(s.tau - sym.degree) / math.pi + g.shift
    if sym.is_point:
        raise NotStable("the skyscraper is not stable for algebraic data")
    if sym.degree == s.k:
        return s.psi + g.shift
    if sym.degree == s.k + 1:
        return s.psi + s.phi + g.shift
    raise NotStable(f"O({sym.degree}) is not stable for algebraic data at k={s.k}")


def _validate_algebraic_object(s: AlgebraicStab, obj: FormalObject) -> None:
    for g in obj.filtration:
        sym = g.symbols[0]
        if sym.is_point or sym.degree not in (s.k, s.k + 1):
            raise UnsupportedObject(
                f"subquotient {g} is outside the algebraic generator pair "
                f"O({s.k}), O({s.k + 1})"
            )


def hn_p1(
    s: StabP1, obj: FormalObject, *, tol: float = 1e-9
) -> list[tuple[float, list[Generator]]]:
    """Harder-Narasimhan filtration of a formal object on one factor.

    Every object here is a direct sum of its shifted stable subquotients, so
    the filtration is the phase-sorted grouping.  The one-directional Hom
    vanishing between the resulting parts is verified and a failure raises
    ``RearrangementBlocked`` (it would signal a bug, not a bad input).
    """
    if not obj.filtration:
        return []
    if not is_geometric(s):
        _validate_algebraic_object(s, obj)
    tagged = sorted(
        ((phase_p1(s, g), g) for g in obj.filtration), key=lambda t: -t[0]
    )
    parts: list[tuple[float, list[Generator]]] = []
    for ph, g in tagged:
        if parts and abs(parts[-1][0] - ph) <= tol:
            parts[-1][1].append(g)
        else:
            parts.append((ph, [g]))
    for i, (ph_hi, gens_hi) in enumerate(parts):
        for ph_lo, gens_lo in parts[i + 1 :]:
            for ghi in gens_hi:
                for glo in gens_lo:
                    if hom_degrees(ghi, glo).get(0, 0):
                        raise RearrangementBlocked(
                            f"Hom^0({ghi}, {glo}) != 0 across phases "
                            f"{ph_hi} > {ph_lo}",
                            witness=(ghi, glo),
                        )
    return parts
