import cmath
import math

import mpmath
import numpy as np
import pytest

from stabforge import (
    CycleSpec,
    LGModel,
    TrackingLost,
    bessel_term_sum,
    circle_charge,
    circle_closed_form,
    monodromy_probe,
    product_charge_numeric,
    saddle_point_estimate,
    superpotential,
    tensor_quadrature_2d,
    trace_thimble,
)


@pytest.mark.parametrize("k", [-4, -1, 0, 1, 3, 6])
@pytest.mark.parametrize("q", [1.0, 0.3 + 0.8j, cmath.exp(1 + 1j)])
def test_series_matches_arbitrary_precision_bessel(k, q):
    got = bessel_term_sum(k, q)
    root = complex(mpmath.sqrt(q))
    want = complex(mpmath.besseli(k, 2 * root)) * root ** (-k)
    assert abs(got - want) <= 1e-13 * (1 + abs(want))


def test_circle_charge_against_series_at_origin():
    m = LGModel((0j,), 0j)
    got = circle_charge(m)
    want = 2j * math.pi * float(mpmath.besseli(0, 2))
    assert abs(got - want) / abs(want) < 1e-12


def test_circle_charge_contour_independence():
    m = LGModel((0.5 + 0.5j,), 0.1j)
    base = circle_charge(m, 2, 1.0)
    for r in (0.2, 0.7, 3.0, 5.0):
        assert abs(circle_charge(m, 2, r) - base) / abs(base) < 1e-10


def test_circle_charge_twist_scaling():
    a = 0.3 + 0.1j
    plain = circle_charge(LGModel((a,), 0j), 1)
    twisted = circle_charge(LGModel((a,), 0.7 - 0.2j), 1)
    assert abs(twisted - cmath.exp(0.7 - 0.2j) * plain) < 1e-12 * abs(twisted)


def test_bessel_recurrence_via_three_quadratures():
    a = 0.4 + 0.9j
    m = LGModel((a,), 0j)
    q = cmath.exp(a)
    root = cmath.sqrt(q)
    x = 2 * root

    def bessel_from_quadrature(k):
        return circle_charge(m, k) * root**k / (2j * math.pi)

    for k in range(-3, 4):
        low = bessel_from_quadrature(k - 1)
        high = bessel_from_quadrature(k + 1)
        mid = bessel_from_quadrature(k)
        scale = max(abs(low), abs(high), abs(mid))
        assert abs((low - high) - (2 * k / x) * mid) / scale < 1e-9


def test_thimble_monotone_and_classified():
    for a in (0j, 1 + 0.3j):
        m = LGModel((a,), 0j)
        for sign in (1, -1):
            res = trace_thimble(m, sign)
            assert set(res.ends) == {"zero-puncture", "left-infinity"}
            assert res.im_drift <= 1e-8
            assert res.tail_bound < 1e-10 * (1 + abs(res.integral))


def test_degenerate_thimble_realises_circle_plus_lower_thimble():
    m = LGModel((0j,), 0j)
    plus = trace_thimble(m, 1)
    minus = trace_thimble(m, -1)
    assert plus.collided and not minus.collided
    assert abs(minus.integral - 2 * float(mpmath.besselk(0, 2))) < 1e-9
    circle = circle_charge(m)
    rel = abs(circle - (plus.integral - minus.integral)) / abs(circle)
    assert rel < 1e-8


@pytest.mark.parametrize("a", [0j, 0.5 + 0j, 1 + 0.3j])
def test_homology_relation_matched_sign(a):
    m = LGModel((a,), 0j)
    circle = circle_charge(m)
    plus = trace_thimble(m, 1)
    minus = trace_thimble(m, -1)
    diff = plus.integral - minus.integral
    rel = min(abs(circle - diff), abs(circle + diff)) / abs(circle)
    assert rel < 1e-6
    assert plus.im_drift <= 1e-8 and minus.im_drift <= 1e-8


def test_saddle_point_asymptotics_at_large_parameter():
    m = LGModel((math.log(25) + 0j,), 0j)
    res = trace_thimble(m, 1)
    est = saddle_point_estimate(m, 1)
    rel = min(abs(res.integral - est), abs(res.integral + est)) / abs(est)
    assert rel < 0.05


def test_thimble_integral_reacts_to_twist_exactly():
    m0 = LGModel((0.2 + 0.4j,), 0j)
    m1 = LGModel((0.2 + 0.4j,), 0.3 - 0.8j)
    z0 = trace_thimble(m0, 1).integral
    z1 = trace_thimble(m1, 1).integral
    assert abs(z1 - cmath.exp(0.3 - 0.8j) * z0) < 1e-9 * abs(z1)


def test_superpotential_critical_values():
    q = cmath.exp(0.7 - 0.2j)
    s = cmath.sqrt(q)
    assert superpotential(s, q) == pytest.approx(2 * s)
    assert superpotential(-s, q) == pytest.approx(-2 * s)


def test_product_charge_two_circles_squares_the_factor():
    m = LGModel((0j, 0j), 0j)
    got = product_charge_numeric(m, (0, 0), (CycleSpec("circle"), CycleSpec("circle")))
    factor = circle_closed_form(LGModel((0j,)), 0)
    assert abs(got - factor**2) / abs(factor**2) < 1e-10


def test_product_charge_twist_scaling():
    m0 = LGModel((0j, 0.5 + 0j), 0j)
    m1 = LGModel((0j, 0.5 + 0j), 1.1 + 0.4j)
    specs = (CycleSpec("circle"), CycleSpec("circle"))
    z0 = product_charge_numeric(m0, (1, 0), specs)
    z1 = product_charge_numeric(m1, (1, 0), specs)
    assert abs(z1 - cmath.exp(1.1 + 0.4j) * z0) < 1e-12 * abs(z1)


def test_tensor_quadrature_matches_factored_value_circle_thimble():
    m = LGModel((0j, 1 + 0.3j), 0.2j)
    specs = (CycleSpec("circle"), CycleSpec("thimble"))
    factored = product_charge_numeric(m, (0, 0), specs, verify_fubini=False)
    tensor = tensor_quadrature_2d(m, specs[0], specs[1])
    assert abs(tensor - factored) / abs(factored) < 1e-8


def test_monodromy_swaps_and_double_loop_restores():
    for a0 in (0j, 0.7j):
        rep = monodromy_probe(LGModel((a0,)), steps=64)
        assert rep.swapped
        assert rep.circle_return_error < 1e-8
        rep2 = monodromy_probe(LGModel((a0,)), steps=64, loops=2, trace_thimbles=False)
        assert not rep2.swapped
        assert rep2.circle_return_error < 1e-8


def test_monodromy_reports_thimbles_through_tracked_saddles():
    rep = monodromy_probe(LGModel((0.7j,)), steps=48)
    assert rep.thimble_before is not None and rep.thimble_after is not None
    # after a swap the tracked saddle's thimble is the other starting thimble
    assert rep.thimble_after[0] == pytest.approx(rep.thimble_before[1])


def test_monodromy_tracking_lost_with_too_few_steps():
    with pytest.raises(TrackingLost):
        monodromy_probe(LGModel((0j,)), steps=2, trace_thimbles=False)
