import cmath
import math

import numpy as np
import pytest

from stabforge import (
    AlgebraicStab,
    FormalObject,
    GeometricStab,
    InconsistentData,
    InvalidPhaseStep,
    NotAdmissible,
    ProductStab,
    RearrangementBlocked,
    SupportViolated,
    UnsupportedObject,
    admissible,
    build_pure_algebraic,
    central_charge_p1,
    ext_exceptional_check,
    external_product,
    gluing_vanishing_check,
    heart_shift,
    hn_product,
    k_class,
    line_bundle,
    product_charge,
    product_phase,
    pure_algebraic_product,
    recover_factors,
    stable_generators,
    stable_objects_p1,
    sup_norm,
    support_constant,
    symbol_class,
    verify_axioms,
)
from stabforge.lattice import FactorClass, decomposable_class

from conftest import random_algebraic, random_geometric
from oracles import certified_swap_groupings, parts_key


def test_admissible_examples():
    a = AlgebraicStab(0, 0.0, 1.5)
    g = GeometricStab(1j)
    assert admissible([a, a, a])
    assert admissible([g, a])
    assert not admissible([g, g, a])
    with pytest.raises(NotAdmissible):
        ProductStab((g, g))
    with pytest.raises(NotAdmissible):
        pure_algebraic_product((g, a))


def test_shift_table_examples():
    col = build_pure_algebraic(0.5, (1.0,))
    assert col.table.shift((0,)) == 0
    assert col.table.shift((1,)) == -1

    col = build_pure_algebraic(1.0, (1.0, 1.0))
    assert col.table.shift((0, 0)) == 0
    assert col.table.phase((0, 0)) + col.table.shift((0, 0)) == 1.0

    col = build_pure_algebraic(0.3, (1.2, 1.4))
    assert col.table.entries() == {(0, 0): 0, (1, 0): -1, (0, 1): -1, (1, 1): -2}


def test_heart_shift_places_phase_in_unit_window():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-7, 7, size=200):
        assert 0.0 < x + heart_shift(x) <= 1.0
    assert heart_shift(1.0) == 0


def test_build_validates_steps_and_masses():
    with pytest.raises(InvalidPhaseStep):
        build_pure_algebraic(0.0, (0.9, 1.5))
    build_pure_algebraic(0.0, (0.9, 1.5), check_steps=False)
    with pytest.raises(ValueError):
        build_pure_algebraic(0.0, (1.5,), masses={(0,): 1.0, (1,): -2.0})


def test_built_collection_is_ext_exceptional():
    rng = np.random.default_rng(1)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        col = build_pure_algebraic(
            float(rng.uniform(-2, 2)),
            tuple(float(s) for s in rng.uniform(1, 3, size=n)),
            ks=tuple(int(k) for k in rng.integers(-3, 4, size=n)),
        )
        assert ext_exceptional_check(col.generators).ok


def test_unshifted_pair_fails_with_witness():
    res = ext_exceptional_check([line_bundle(0), line_bundle(1)])
    assert not res.ok
    gi, gj, degree = res.witness
    assert (str(gi), str(gj), degree) == ("O(0)[0]", "O(1)[0]", 0)


def test_small_step_forced_through_shift_table_fails():
    # with a step below one, a base phase near zero puts both bundles in the
    # same heart window and a degree-zero morphism survives the shifts
    col = build_pure_algebraic(0.005, (0.5,), check_steps=False)
    res = ext_exceptional_check(col.generators)
    assert not res.ok
    assert res.witness[2] == 0


def test_stable_generators_pure_algebraic():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(0, 0.3, 1.4)))
    gens = stable_generators(ps)
    assert len(gens) == 4
    assert sorted(str(g) for g in gens) == [
        "O(0,0)[0]",
        "O(0,1)[-1]",
        "O(1,0)[-1]",
        "O(1,1)[-2]",
    ]


def test_stable_generators_counts_are_two_to_the_n(pure_algebraic_tuples):
    for ps in pure_algebraic_tuples[:40]:
        assert len(stable_generators(ps)) == 2**ps.n


def test_stable_generators_mixed_window():
    ps = ProductStab((GeometricStab(1j), AlgebraicStab(2, 0.1, 1.3)))
    gens = stable_generators(ps, (0, 0))
    names = sorted(str(g) for g in gens)
    assert len(gens) == 4
    assert any("O(pt," in n for n in names)
    assert any("O(0,2)" in n for n in names)


def test_stable_generators_single_geometric_factor_reduces_to_p1():
    geo = GeometricStab(0.3 + 1.1j)
    ps = ProductStab((geo,))
    got = [g.symbols[0] for g in stable_generators(ps, (-2, 2))]
    want = [g.symbols[0] for g in stable_objects_p1(geo, (-2, 2))]
    assert got == want


def test_stable_generators_rejects_invalid_steps():
    ps = ProductStab((AlgebraicStab(0, 0.0, 0.7),))
    with pytest.raises(InvalidPhaseStep):
        stable_generators(ps)


def test_product_charge_multiplicative_on_decomposables():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        factors = []
        geo_slot = int(rng.integers(0, n + 1))
        for i in range(n):
            factors.append(
                random_geometric(rng) if i == geo_slot else random_algebraic(rng)
            )
        ps = ProductStab(tuple(factors), twist=complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))
        classes = [
            FactorClass(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
            for _ in range(n)
        ]
        want = cmath.exp(ps.twist)
        for f, cls in zip(ps.factors, classes):
            want *= central_charge_p1(f, cls)
        got = product_charge(ps, decomposable_class(classes))
        assert abs(got - want) <= 1e-12 * (1 + abs(want))


def test_product_charge_additive_and_zero():
    rng = np.random.default_rng(6)
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(-1, 0.4, 1.8)))
    from stabforge import KClass

    assert product_charge(ps, KClass.zero(2)) == 0
    for _ in range(30):
        c1 = decomposable_class(
            [FactorClass(int(rng.integers(-2, 3)), int(rng.integers(-2, 3))) for _ in range(2)]
        )
        c2 = decomposable_class(
            [FactorClass(int(rng.integers(-2, 3)), int(rng.integers(-2, 3))) for _ in range(2)]
        )
        assert abs(
            product_charge(ps, c1 + c2)
            - product_charge(ps, c1)
            - product_charge(ps, c2)
        ) < 1e-12 * (1 + abs(product_charge(ps, c1)))


def test_product_phase_examples():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(0, 0.3, 1.4)))
    g = line_bundle(1, 1)
    assert product_phase(ps, g) == pytest.approx((0.1 + 1.2) + (0.3 + 1.4))
    assert product_phase(ps, g.shifted(3)) == pytest.approx(product_phase(ps, g) + 3)
    mixed = ProductStab((GeometricStab(1j), AlgebraicStab(0, 0.3, 1.4)))
    g = line_bundle(0, 0)
    assert product_phase(ps=mixed, g=g) == pytest.approx(0.5 + 0.3)


def test_product_phase_alignment_with_charge():
    rng = np.random.default_rng(8)
    for _ in range(10):
        ps = ProductStab(
            (random_geometric(rng), random_algebraic(rng)),
            twist=complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
        )
        for g in stable_generators(ps, (-2, 2)):
            z = product_charge(ps, k_class(g))
            diff = cmath.phase(z) - math.pi * product_phase(ps, g)
            wrapped = (diff + math.pi) % (2 * math.pi) - math.pi
            assert abs(wrapped) < 1e-10


def test_hn_product_swap_example():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(0, 0.3, 1.4)))
    gens = {str(g): g for g in stable_generators(ps)}
    low, high = gens["O(0,0)[0]"], gens["O(1,1)[-2]"]
    parts = hn_product(ps, FormalObject((low, high)))
    assert parts_key(parts) == (
        (1.0, ("O(1,1)[-2]",)),
        (0.4, ("O(0,0)[0]",)),
    )


def test_hn_product_single_and_grouping():
    ps = ProductStab((AlgebraicStab(0, 0.25, 1.0),))
    g = stable_generators(ps)[0]
    assert hn_product(ps, FormalObject((g,))) == [(product_phase(ps, g), [g])]
    four = FormalObject((g, g, g, g))
    parts = hn_product(ps, four)
    assert len(parts) == 1 and len(parts[0][1]) == 4


def test_hn_product_validates_subquotients():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(0, 0.3, 1.4)))
    with pytest.raises(UnsupportedObject):
        hn_product(ps, FormalObject((line_bundle(5, 0),)))


def test_hn_product_agrees_with_certified_swap_oracle_pure():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.6), AlgebraicStab(1, -0.2, 1.1)))
    gens = stable_generators(ps)
    rng = np.random.default_rng(12)
    for _ in range(60):
        size = int(rng.integers(1, 6))
        filt = tuple(gens[i] for i in rng.integers(0, len(gens), size=size))
        want = certified_swap_groupings(ps, filt)
        parts = hn_product(ps, FormalObject(filt))
        assert want == {parts_key(parts)}


def test_hn_product_blocked_matches_oracle_mixed():
    ps = ProductStab((GeometricStab(1j), AlgebraicStab(0, 0.1, 1.2)))
    gens = stable_generators(ps, (-2, 2))
    rng = np.random.default_rng(23)
    blocked = solved = 0
    for _ in range(80):
        size = int(rng.integers(2, 6))
        filt = tuple(gens[i] for i in rng.integers(0, len(gens), size=size))
        want = certified_swap_groupings(ps, filt)
        try:
            parts = hn_product(ps, FormalObject(filt))
            solved += 1
            assert want == {parts_key(parts)}
        except RearrangementBlocked:
            blocked += 1
            assert want == set()
    assert solved > 0 and blocked > 0


def test_gluing_check_passes_for_admissible_mixed(mixed_tuples):
    for ps in mixed_tuples[:10]:
        res = gluing_vanishing_check(ps, (-3, 3))
        assert res.ok and res.pairs_checked > 0


def test_gluing_check_fails_with_forced_small_step():
    ps = ProductStab((GeometricStab(1j), AlgebraicStab(0, 0.1, 1.2)))
    res = gluing_vanishing_check(ps, (-4, 4), force_last_step=0.5)
    assert not res.ok
    star0, star1, j0, j1, degree = res.witnesses[0]
    assert degree <= 0


def test_gluing_check_requires_geometric_factor_and_degenerate_case():
    pure = ProductStab((AlgebraicStab(0, 0.1, 1.2),))
    with pytest.raises(NotAdmissible):
        gluing_vanishing_check(pure)
    single = ProductStab((GeometricStab(1j),))
    res = gluing_vanishing_check(single)
    assert res.ok and res.pairs_checked == 0


def test_support_constant_single_algebraic_matches_direct_minimum():
    s = AlgebraicStab(3, 0.2, 1.4, 1.0, 1.0)
    ps = ProductStab((s,))
    c = support_constant(ps)
    direct = min(
        abs(central_charge_p1(s, symbol_class(g.symbols[0])))
        / sup_norm(symbol_class(g.symbols[0]))
        for g in stable_objects_p1(s)
    )
    assert c == pytest.approx(direct)


def test_support_constant_scales_with_masses():
    base = ProductStab((AlgebraicStab(0, 0.1, 1.3, 1.0, 2.0),))
    scaled = ProductStab((AlgebraicStab(0, 0.1, 1.3, 3.0, 6.0),))
    assert support_constant(scaled) == pytest.approx(3 * support_constant(base))


def test_support_verified_on_product_generators():
    rng = np.random.default_rng(31)
    ps = ProductStab((random_algebraic(rng), random_algebraic(rng)))
    c = support_constant(ps)
    for g in stable_generators(ps):
        cls = k_class(g)
        assert abs(product_charge(ps, cls)) >= c * sup_norm(cls) * (1 - 1e-9)


def test_recover_factors_round_trip_and_symmetry():
    col = build_pure_algebraic(0.3, (1.2, 1.4))
    data = {b: col.stable_datum(b) for b in col.order}
    got = recover_factors(data)
    assert got[0] == pytest.approx((1.2, 1.0))
    assert got[1] == pytest.approx((1.4, 1.0))

    sym = build_pure_algebraic(-0.7, (1.5, 1.5), masses={b: 2.0 for b in col.order})
    data = {b: sym.stable_datum(b) for b in sym.order}
    steps = recover_factors(data)
    assert steps[0] == pytest.approx(steps[1])


def test_recover_factors_detects_defect():
    col = build_pure_algebraic(0.3, (1.2, 1.4))
    data = {b: col.stable_datum(b) for b in col.order}
    ph, m = data[(1, 1)]
    data[(1, 1)] = (ph + 1e-3, m)
    with pytest.raises(InconsistentData):
        recover_factors(data)


def test_verify_axioms_pure_algebraic_passes():
    ps = ProductStab((AlgebraicStab(0, 0.1, 1.2), AlgebraicStab(0, 0.3, 1.4)))
    report = verify_axioms(ps, rng=0)
    assert report.ok, report.failures()


def test_verify_axioms_single_geometric_passes():
    ps = ProductStab((GeometricStab(0.4 + 1.6j, 0.1 - 0.2j),), twist=0.3j)
    report = verify_axioms(ps, (-4, 4), rng=1)
    assert report.ok, report.failures()


def test_verify_axioms_flags_small_step():
    # base phase chosen so both heart windows collide: the collection is not
    # extension-exceptional and the report must say so
    ps = ProductStab((AlgebraicStab(0, 0.02, 0.9),))
    report = verify_axioms(ps, rng=2)
    assert not report.ok
    assert any(c.axiom == "heart" and not c.passed for c in report.checks)
