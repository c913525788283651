"""Product-type stability data on powers of the projective line.

The constructive half builds the shifted line-bundle collection of the pure
algebraic case and the window-local generator sets of the mixed case (one
geometric factor).  The verification half runs the checkable consequences:
extension-exceptionality, one-directional Hom vanishing, Harder-Narasimhan
rearrangement with extension certificates, gluing vanishing across the last
algebraic factor, the support bound, and factor recovery from stable data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import reduce
from itertools import product as iproduct

import numpy as np

from .errors import (
    InconsistentData,
    InvalidPhaseStep,
    NotAdmissible,
    NotStable,
    RearrangementBlocked,
    SupportViolated,
    UnsupportedObject,
)
from .lattice import (
    POINT,
    FactorClass,
    FormalObject,
    Generator,
    KClass,
    all_bit_vectors,
    bits_leq,
    hom_degrees,
    k_class,
    line,
    symbol_class,
)
from .p1 import (
    DEFAULT_WINDOW,
    AlgebraicStab,
    GeometricStab,
    StabP1,
    central_charge_p1,
    is_geometric,
    phase_p1,
    stable_objects_p1,
)

__all__ = [
    "ProductStab",
    "ShiftTable",
    "PureAlgebraicCollection",
    "ExtExceptionalResult",
    "GluingCheckResult",
    "AxiomCheck",
    "AxiomReport",
    "admissible",
    "heart_shift",
    "build_pure_algebraic",
    "pure_algebraic_product",
    "ext_exceptional_check",
    "stable_generators",
    "product_charge",
    "product_phase",
    "hn_product",
    "gluing_vanishing_check",
    "factor_support_constant",
    "support_constant",
    "sup_norm",
    "recover_factors",
    "verify_axioms",
]


def admissible(factors) -> bool:
    """True iff at most one factor is geometric."""
    return sum(1 for f in factors if is_geometric(f)) <= 1


def heart_shift(phase: float) -> int:
    """The integer shift placing a phase in the half-open interval (0, 1]."""
    return -math.ceil(phase - 1.0)


@dataclass(frozen=True)
class ProductStab:
    """Admissible tuple of factor data plus a global twist."""

    factors: tuple[StabP1, ...]
    twist: complex = 0j

    def __post_init__(self):
        if not self.factors:
            raise ValueError("need at least one factor")
        if not admissible(self.factors):
            raise NotAdmissible("at most one factor may be geometric")

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def geo_index(self) -> int | None:
        for i, f in enumerate(self.factors):
            if is_geometric(f):
                return i
        return None

    @property
    def is_pure_algebraic(self) -> bool:
        return self.geo_index is None

    @property
    def base_ks(self) -> tuple[int | None, ...]:
        return tuple(None if is_geometric(f) else f.k for f in self.factors)


@dataclass(frozen=True)
class ShiftTable:
    """Heart-normalising shifts for phases affine in the multi-index."""

    base_phase: float
    steps: tuple[float, ...]

    def phase(self, bits: tuple[int, ...]) -> float:
        return self.base_phase + sum(b * s for b, s in zip(bits, self.steps))

    def shift(self, bits: tuple[int, ...]) -> int:
        return heart_shift(self.phase(bits))

    def entries(self) -> dict[tuple[int, ...], int]:
        n = len(self.steps)
        return {bits: self.shift(bits) for bits in all_bit_vectors(n)}


@dataclass(frozen=True)
class PureAlgebraicCollection:
    """Output of the pure algebraic construction: the shifted collection."""

    table: ShiftTable
    order: tuple[tuple[int, ...], ...]
    generators: tuple[Generator, ...]
    masses: dict
    ks: tuple[int, ...]

    def stable_datum(self, bits: tuple[int, ...]) -> tuple[float, float]:
        """Unshifted phase and charge modulus of the indexed line bundle."""
        return self.table.phase(bits), self.masses[bits]


def build_pure_algebraic(
    base_phase: float,
    steps: tuple[float, ...],
    masses=None,
    ks: tuple[int, ...] | None = None,
    *,
    check_steps: bool = True,
) -> PureAlgebraicCollection:
    """Shifted line-bundle collection for phase data affine in the multi-index.

    ``masses`` maps multi-indices to positive charge moduli (defaults to 1).
    ``check_steps=False`` skips the step validation so that counterexample
    collections can be built and then shown to fail ``ext_exceptional_check``.
    """
    n = len(steps)
    if ks is None:
        ks = (0,) * n
    if check_steps:
        for i, s in enumerate(steps):
            if s < 1.0:
                raise InvalidPhaseStep(f"phase step {i} is {s} < 1")
    if masses is None:
        masses = {bits: 1.0 for bits in all_bit_vectors(n)}
    for bits, m in masses.items():
        if m <= 0:
            raise ValueError(f"mass at {bits} must be positive, got {m}")
    table = ShiftTable(base_phase, tuple(float(s) for s in steps))
    order = tuple(all_bit_vectors(n))
    gens = tuple(
        Generator(tuple(line(k + b) for k, b in zip(ks, bits)), table.shift(bits))
        for bits in order
    )
    return PureAlgebraicCollection(table, order, gens, dict(masses), tuple(ks))


def pure_algebraic_product(factors, twist: complex = 0j) -> ProductStab:
    """Convenience constructor; validates that every factor is algebraic."""
    for f in factors:
        if is_geometric(f):
            raise NotAdmissible("pure algebraic product cannot contain a geometric factor")
    return ProductStab(tuple(factors), twist)


@dataclass(frozen=True)
class ExtExceptionalResult:
    ok: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def ext_exceptional_check(generators, order=None) -> ExtExceptionalResult:
    """Check that distinct members admit no morphisms in degrees <= 0.

    Each member must also be exceptional (one-dimensional endomorphisms in
    degree zero only).  On failure the witness is ``(g_i, g_j, degree)``.
    """
    gens = list(generators) if order is None else [generators[i] for i in order]
    for g in gens:
        if hom_degrees(g, g) != {0: 1}:
            return ExtExceptionalResult(False, (g, g, 0))
    for i, gi in enumerate(gens):
        for j, gj in enumerate(gens):
            if i == j:
                continue
            bad = [d for d, v in hom_degrees(gi, gj).items() if d <= 0 and v > 0]
            if bad:
                return ExtExceptionalResult(False, (gi, gj, min(bad)))
    return ExtExceptionalResult(True)


def _factor_phase(f: StabP1, sym) -> float:
    return phase_p1(f, Generator((sym,)))


def _raw_generators(ps: ProductStab, window=DEFAULT_WINDOW) -> list[Generator]:
    """Generator set with heart-normalising shifts, without step validation."""
    per_factor = []
    for f in ps.factors:
        if is_geometric(f):
            lo, hi = window
            per_factor.append([line(m) for m in range(lo, hi + 1)] + [POINT])
        else:
            per_factor.append([line(f.k), line(f.k + 1)])
    out = []
    twist_shift = ps.twist.imag / math.pi
    for combo in iproduct(*per_factor):
        phase = sum(_factor_phase(f, s) for f, s in zip(ps.factors, combo))
        phase += twist_shift
        out.append(Generator(tuple(combo), heart_shift(phase)))
    return out


def stable_generators(ps: ProductStab, window=DEFAULT_WINDOW) -> list[Generator]:
    """Stable generators of the product, shifted into the (0, 1] heart window.

    In the pure algebraic case these are the 2^n line bundles; with one
    geometric factor the geometric slot runs over the window degrees and the
    skyscraper.  The geometric list is window-local.
    """
    for i, f in enumerate(ps.factors):
        if not is_geometric(f) and f.phi < 1.0:
            raise InvalidPhaseStep(f"factor {i} has phase step {f.phi} < 1")
    return _raw_generators(ps, window)


def product_charge(ps: ProductStab, cls: KClass) -> complex:
    """Additive extension of the multiplicative charge, via the tensor structure."""
    if cls.n != ps.n:
        raise ValueError("class and product have different numbers of factors")
    functionals = [
        np.array(
            [
                central_charge_p1(f, FactorClass(1, 0)),
                central_charge_p1(f, FactorClass(0, 1)),
            ],
            dtype=complex,
        )
        for f in ps.factors
    ]
    w = reduce(np.kron, functionals)
    return cmath.exp(ps.twist) * complex(np.dot(w, cls.as_array()))


def product_phase(ps: ProductStab, g: Generator) -> float:
    """Sum of factor phases, plus the twist contribution and the shift."""
    if g.n != ps.n:
        raise ValueError("generator and product have different numbers of factors")
    total = sum(_factor_phase(f, s) for f, s in zip(ps.factors, g.symbols))
    return total + ps.twist.imag / math.pi + g.shift


def _validate_product_object(ps: ProductStab, obj: FormalObject) -> None:
    for g in obj.filtration:
        if g.n != ps.n:
            raise UnsupportedObject(f"{g} has the wrong number of factors")
        for f, sym in zip(ps.factors, g.symbols):
            if is_geometric(f):
                continue
            if sym.is_point or sym.degree not in (f.k, f.k + 1):
                raise UnsupportedObject(
                    f"{g} has a non-stable symbol in an algebraic slot"
                )


def hn_product(
    ps: ProductStab, obj: FormalObject, *, tol: float = 1e-9
) -> list[tuple[float, list[Generator]]]:
    """Rearrange a filtration into non-increasing phases and group equals.

    Adjacent subquotients with ascending phases are swapped only after the
    blocking extension space is checked to vanish; a nonvanishing space
    raises ``RearrangementBlocked``, since then the filtration data does not
    determine the Harder-Narasimhan filtration.  For pure algebraic products
    the certificate always holds and the error cannot fire on valid input.
    """
    gens = list(obj.filtration)
    if not gens:
        return []
    _validate_product_object(ps, obj)
    phases = [product_phase(ps, g) for g in gens]
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(gens) - 1):
            if phases[i] < phases[i + 1] - tol:
                upper, lower = gens[i + 1], gens[i]
                if hom_degrees(upper, lower).get(1, 0):
                    raise RearrangementBlocked(
                        f"Ext^1({upper}, {lower}) != 0 blocks the swap needed for "
                        f"phases {phases[i]:.6g} < {phases[i + 1]:.6g}",
                        witness=(upper, lower),
                    )
                gens[i], gens[i + 1] = gens[i + 1], gens[i]
                phases[i], phases[i + 1] = phases[i + 1], phases[i]
                swapped = True
    parts: list[tuple[float, list[Generator]]] = []
    for ph, g in zip(phases, gens):
        if parts and abs(parts[-1][0] - ph) <= tol:
            parts[-1][1].append(g)
        else:
            parts.append((ph, [g]))
    return parts


@dataclass(frozen=True)
class GluingCheckResult:
    ok: bool
    witnesses: tuple
    pairs_checked: int

    def __bool__(self) -> bool:
        return self.ok


def gluing_vanishing_check(
    ps: ProductStab,
    degrees: tuple[int, int] = (-4, 4),
    *,
    force_last_step: float | None = None,
) -> GluingCheckResult:
    """Vanishing of Hom^{<=0} across the semiorthogonal gluing boundary.

    The product is split along its last algebraic factor (geometric factor
    first, matching the inductive construction); generators of the two glued
    hearts are paired and checked.  ``force_last_step`` overrides the last
    phase step so that the inequality chain can be broken on purpose; a
    witness is ``(star0, star1, J, J', degree)``.
    """
    if ps.geo_index is None:
        raise NotAdmissible("gluing check requires exactly one geometric factor")
    if ps.n == 1:
        return GluingCheckResult(True, (), 0)
    geo = ps.factors[ps.geo_index]
    algs = [ps.factors[i] for i in range(ps.n) if i != ps.geo_index]
    last, middle = algs[-1], algs[:-1]
    phi_last = last.phi if force_last_step is None else force_last_step
    twist_shift = ps.twist.imag / math.pi

    lo, hi = degrees
    stars = [line(m) for m in range(lo, hi + 1)] + [POINT]
    mids = all_bit_vectors(len(middle))

    def mid_symbols(bits):
        return tuple(line(f.k + b) for f, b in zip(middle, bits))

    def mid_phase(bits):
        return sum(_factor_phase(f, line(f.k + b)) for f, b in zip(middle, bits))

    side = []
    for i, last_phase in ((0, last.psi), (1, last.psi + phi_last)):
        gens = []
        for star in stars:
            for bits in mids:
                total = _factor_phase(geo, star) + mid_phase(bits) + last_phase + twist_shift
                gens.append(
                    (
                        star,
                        bits,
                        Generator(
                            (star,) + mid_symbols(bits) + (line(last.k + i),),
                            heart_shift(total),
                        ),
                    )
                )
        side.append(gens)

    witnesses = []
    pairs = 0
    for star0, j0, g0 in side[0]:
        for star1, j1, g1 in side[1]:
            pairs += 1
            bad = [d for d, v in hom_degrees(g0, g1).items() if d <= 0 and v > 0]
            if bad:
                witnesses.append((str(star0), str(star1), j0, j1, min(bad)))
    return GluingCheckResult(not witnesses, tuple(witnesses), pairs)


def sup_norm(cls) -> float:
    if isinstance(cls, FactorClass):
        return max(abs(cls.rank), abs(cls.degree))
    return max(abs(c) for c in cls.coords)


def factor_support_constant(s: StabP1, window=DEFAULT_WINDOW) -> float:
    """min |Z| / ||class|| over the factor's stable classes (window-local)."""
    best = math.inf
    for g in stable_objects_p1(s, window):
        cls = symbol_class(g.symbols[0])
        best = min(best, abs(central_charge_p1(s, cls)) / sup_norm(cls))
    return best


def support_constant(
    ps: ProductStab,
    window=DEFAULT_WINDOW,
    factor_constants=None,
    *,
    verify: bool = True,
    slack: float = 1e-9,
) -> float:
    """Product of the factor constants, valid for the sup norm on the lattice.

    The sup norm is multiplicative under the tensor structure, so no extra
    compatibility factor appears.  With ``verify`` the bound is checked on
    every window generator and a violation raises ``SupportViolated``.
    """
    if factor_constants is None:
        factor_constants = [factor_support_constant(f, window) for f in ps.factors]
    c = math.exp(ps.twist.real) * math.prod(factor_constants)
    if verify:
        for g in stable_generators(ps, window):
            cls = k_class(g)
            z = product_charge(ps, cls)
            if abs(z) < c * sup_norm(cls) * (1.0 - slack):
                raise SupportViolated(
                    f"|Z({g})| = {abs(z)} < C * norm = {c * sup_norm(cls)}",
                    witness=g,
                )
    return c


def recover_factors(data: dict, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Read factor steps and mass ratios off the stable line-bundle data.

    ``data`` maps each multi-index to ``(phase, charge modulus)``.  The
    indices with a single nonzero entry determine everything; the remaining
    entries are consistency checks (phases and log-moduli must be affine in
    the index, else ``InconsistentData``).
    """
    n = len(next(iter(data)))
    zero = (0,) * n
    if zero not in data:
        raise InconsistentData("missing the zero multi-index")
    phi0, m0 = data[zero]
    steps, ratios = [], []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(n))
        if e not in data:
            raise InconsistentData(f"missing unit multi-index {e}")
        ph, m = data[e]
        steps.append(ph - phi0)
        ratios.append(m / m0)
    for bits, (ph, m) in data.items():
        pred_phase = phi0 + sum(b * s for b, s in zip(bits, steps))
        pred_log = math.log(m0) + sum(
            b * math.log(r) for b, r in zip(bits, ratios)
        )
        if abs(ph - pred_phase) > tol or abs(math.log(m) - pred_log) > tol:
            raise InconsistentData(f"stable data is not affine at index {bits}")
    return list(zip(steps, ratios))


@dataclass(frozen=True)
class AxiomCheck:
    axiom: str
    name: str
    passed: bool
    detail: str = ""
    witness: object | None = None


@dataclass
class AxiomReport:
    checks: list[AxiomCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[AxiomCheck]:
        return [c for c in self.checks if not c.passed]

    def by_axiom(self, axiom: str) -> list[AxiomCheck]:
        return [c for c in self.checks if c.axiom == axiom]


def _wrap_angle(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def verify_axioms(
    ps: ProductStab,
    window=DEFAULT_WINDOW,
    *,
    rng=None,
    n_filtrations: int = 5,
    max_length: int = 5,
    angle_tol: float = 1e-10,
    max_pairs: int = 400,
) -> AxiomReport:
    """Run the five stability axioms on the window generator set.

    Failures become report entries, never exceptions, so invalid phase data
    can be fed in deliberately and diagnosed.
    """
    rng = np.random.default_rng(rng)
    report = AxiomReport()
    gens = _raw_generators(ps, window)
    phases = [product_phase(ps, g) for g in gens]
    classes = [k_class(g) for g in gens]
    charges = [product_charge(ps, c) for c in classes]

    # (i) charge/phase alignment on generators
    worst = 0.0
    witness = None
    for g, ph, z in zip(gens, phases, charges):
        if abs(z) == 0.0:
            worst = math.inf
            witness = g
            break
        err = abs(_wrap_angle(cmath.phase(z) - math.pi * ph))
        if err > worst:
            worst, witness = err, g
    report.checks.append(
        AxiomCheck(
            "i",
            "charge-phase alignment",
            worst <= angle_tol,
            f"max angle error {worst:.3e}",
            None if worst <= angle_tol else witness,
        )
    )

    # (ii) shift compatibility
    ok = True
    witness = None
    for g, ph, z in zip(gens, phases, charges):
        g1 = g.shifted(1)
        if abs(product_phase(ps, g1) - (ph + 1.0)) > 1e-12:
            ok, witness = False, g
            break
        if abs(product_charge(ps, k_class(g1)) + z) > 1e-12 * (1.0 + abs(z)):
            ok, witness = False, g
            break
    report.checks.append(AxiomCheck("ii", "shift compatibility", ok, witness=witness))

    # (iii) Hom^0 vanishing from higher to lower phase
    pair_indices = [
        (i, j)
        for i in range(len(gens))
        for j in range(len(gens))
        if phases[i] > phases[j] + 1e-9
    ]
    if len(pair_indices) > max_pairs:
        keep = rng.choice(len(pair_indices), size=max_pairs, replace=False)
        pair_indices = [pair_indices[k] for k in sorted(keep)]
    ok = True
    witness = None
    for i, j in pair_indices:
        if hom_degrees(gens[i], gens[j]).get(0, 0):
            ok, witness = False, (gens[i], gens[j])
            break
    report.checks.append(
        AxiomCheck(
            "iii",
            "one-directional Hom vanishing",
            ok,
            f"{len(pair_indices)} pairs",
            witness,
        )
    )

    # (iv) Harder-Narasimhan rearrangement on random heart filtrations
    # (a single global shift keeps the subquotients inside one shifted heart;
    # independent shifts could encode a cone of the identity, whose filtration
    # data does not determine the object)
    ok = True
    witness = None
    detail = []
    for _ in range(n_filtrations):
        length = int(rng.integers(1, max_length + 1))
        picks = rng.integers(0, len(gens), size=length)
        shift = int(rng.integers(-1, 2))
        filt = FormalObject(tuple(gens[p].shifted(shift) for p in picks))
        try:
            parts = hn_product(ps, filt)
        except RearrangementBlocked as exc:
            upper, lower = exc.witness
            certified = hom_degrees(upper, lower).get(1, 0) > 0
            if ps.is_pure_algebraic or not certified:
                ok, witness = False, exc.witness
                break
            detail.append("blocked(certified)")
            continue
        part_phases = [ph for ph, _ in parts]
        if any(
            part_phases[i] <= part_phases[i + 1] + 1e-12
            for i in range(len(part_phases) - 1)
        ):
            ok, witness = False, filt
            break
        got = sorted(str(g) for _, gs in parts for g in gs)
        want = sorted(str(g) for g in filt.filtration)
        if got != want:
            ok, witness = False, filt
            break
        detail.append("sorted")
    report.checks.append(
        AxiomCheck(
            "iv",
            "Harder-Narasimhan rearrangement",
            ok,
            ",".join(detail),
            witness,
        )
    )

    # (v) support property, on the same raw generator set
    c = math.exp(ps.twist.real) * math.prod(
        factor_support_constant(f, window) for f in ps.factors
    )
    violations = [
        g
        for g, cls, z in zip(gens, classes, charges)
        if abs(z) < c * sup_norm(cls) * (1.0 - 1e-9)
    ]
    report.checks.append(
        AxiomCheck(
            "v",
            "support property",
            not violations,
            f"C={c:.6g}",
            violations[0] if violations else None,
        )
    )

    # extension-exceptionality of the shifted collection (pure algebraic only)
    if ps.is_pure_algebraic:
        res = ext_exceptional_check(gens)
        report.checks.append(
            AxiomCheck(
                "heart",
                "ext-exceptional collection",
                res.ok,
                witness=res.witness,
            )
        )
    return report
