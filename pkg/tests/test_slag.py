import cmath
import math

import numpy as np
import pytest

from stabforge import (
    SLagProblem,
    find_closed_slag,
    omega_density,
    product_phase_check,
    trace_slag,
)


def test_real_axis_is_invariant_for_real_data():
    path = trace_slag(SLagProblem(a=0j, c=0j, phase=0.0, seed=1.0 + 0j))
    assert np.max(np.abs(path.z.imag)) == 0.0
    assert path.phase_drift < 1e-8


def test_phase_drift_and_mass_identity():
    rng = np.random.default_rng(3)
    for _ in range(8):
        problem = SLagProblem(
            a=complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
            c=complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
            phase=float(rng.uniform(0, 1)),
            seed=complex(rng.uniform(0.3, 3), rng.uniform(-1, 1)),
            max_extent=8.0,
        )
        path = trace_slag(problem)
        assert path.phase_drift <= 1e-6
        mass_err = abs(abs(path.omega_integral) - path.mass) / path.mass
        assert mass_err <= 1e-8
        # the full integral also points along the requested ray
        angle = abs(
            cmath.phase(
                path.omega_integral * cmath.exp(-1j * math.pi * problem.phase)
            )
        )
        assert angle <= 1e-6


def test_omega_segment_quadrature_is_independent_of_parametrisation():
    problem = SLagProblem(a=0.5 + 0j, c=0j, phase=0.25, seed=1.5 + 0j, max_extent=6.0)
    path = trace_slag(problem)
    target = path.mass * cmath.exp(1j * math.pi * problem.phase)
    assert abs(path.omega_integral - target) <= 1e-7 * path.mass


def test_reversal_symmetry():
    base = SLagProblem(a=0.3 + 0j, c=0.1 + 0j, phase=0.25, seed=1.2 + 0.4j, max_extent=4.0)
    flipped = SLagProblem(a=0.3 + 0j, c=0.1 + 0j, phase=1.25, seed=1.2 + 0.4j, max_extent=4.0)
    p1 = trace_slag(base)
    p2 = trace_slag(flipped)
    # same point set with reversed orientation: compare endpoints
    assert abs(p1.z[0] - p2.z[-1]) < 1e-7
    assert abs(p1.z[-1] - p2.z[0]) < 1e-7
    assert p1.mass == pytest.approx(p2.mass)


def test_conjugation_symmetry_for_real_data():
    up = trace_slag(SLagProblem(a=0.4 + 0j, c=0.2 + 0j, phase=0.0, seed=1 + 0.7j, max_extent=5.0))
    down = trace_slag(SLagProblem(a=0.4 + 0j, c=0.2 + 0j, phase=0.0, seed=1 - 0.7j, max_extent=5.0))
    assert np.max(np.abs(up.z - np.conj(down.z))) < 1e-8


def test_end_classification_reaches_both_punctures():
    # from a negative seed at phase 0 the flow runs to the left puncture
    # forward and into the zero puncture backward
    path = trace_slag(
        SLagProblem(a=0j, c=0j, phase=0.0, seed=-0.5 + 0j, max_extent=50.0,
                    max_arclength=200.0)
    )
    assert path.ends == ("zero-puncture", "left-infinity")
    assert path.phase_drift <= 1e-6


def test_escaping_classification_for_growing_superpotential():
    path = trace_slag(SLagProblem(a=0j, c=0j, phase=0.0, seed=1.0 + 0j))
    assert path.ends == ("truncated", "truncated") or "escaping" in path.ends


def test_closed_orbit_at_phase_one_half():
    search = find_closed_slag(0j, 0j, 0.5, ray=(0.8, 1.2), n_seeds=5, delta=1e-6)
    assert search.found is not None
    orbit = search.found
    assert orbit.closed
    assert orbit.return_distance <= 1e-6
    # the orbit is the unit circle; its mass is the circle integral modulus
    import mpmath

    assert orbit.mass == pytest.approx(2 * math.pi * float(mpmath.besseli(0, 2)), rel=1e-8)
    assert abs(cmath.phase(orbit.omega_integral) - math.pi * 0.5) < 1e-6
    angle_err = abs(
        (orbit.omega_integral * cmath.exp(-1j * math.pi * 0.5)).imag
    ) / abs(orbit.omega_integral)
    assert angle_err < 1e-6


def test_scan_reports_distances_and_delta_monotonicity():
    search = find_closed_slag(0j, 0j, 0.5, ray=(0.6, 1.4), n_seeds=9, delta=1e-6)
    distances = [d for _, d in search.scan if d is not None]
    assert distances
    finds_tight = {s for s, d in search.scan if d is not None and d <= 1e-9}
    finds_loose = {s for s, d in search.scan if d is not None and d <= 1e-6}
    assert finds_tight <= finds_loose


def test_product_phase_check_passes_and_detects_corruption():
    paths = [
        trace_slag(SLagProblem(a=0j, c=0j, phase=0.3, seed=1.0 + 0.2j, max_extent=5.0)),
        trace_slag(SLagProblem(a=0.5 + 0j, c=0j, phase=0.4, seed=1.5 + 0j, max_extent=5.0)),
    ]
    res = product_phase_check(paths, rng=0)
    assert res.ok
    assert res.max_angle_error <= 0.7 + 1e-9  # phases add to 0.7

    three = paths + [
        trace_slag(SLagProblem(a=0j, c=0j, phase=1.3, seed=0.8 + 0j, max_extent=5.0))
    ]
    res3 = product_phase_check(three, rng=1)
    assert res3.ok

    corrupted = trace_slag(
        SLagProblem(a=0j, c=0j, phase=0.3, seed=1.0 + 0.2j, max_extent=5.0)
    )
    corrupted.tangent = corrupted.tangent * cmath.exp(0.05j)
    res_bad = product_phase_check([corrupted, paths[1]], rng=0)
    assert not res_bad.ok
    assert res_bad.witness is not None


def test_phase_shift_by_one_shifts_product_phase():
    p1 = trace_slag(SLagProblem(a=0j, c=0j, phase=0.3, seed=1.0 + 0j, max_extent=4.0))
    p2 = trace_slag(SLagProblem(a=0j, c=0j, phase=1.3, seed=1.0 + 0j, max_extent=4.0))
    v1 = omega_density(p1.z[10], 0j, 0j) * p1.tangent[10]
    v2 = omega_density(p2.z[10], 0j, 0j) * p2.tangent[10]
    assert cmath.phase(v2 / v1) == pytest.approx(math.pi, abs=1e-6)


def test_problem_validation():
    with pytest.raises(ValueError):
        SLagProblem(a=0j, c=0j, phase=0.0, seed=0j)
    with pytest.raises(ValueError):
        SLagProblem(a=0j, c=0j, phase=0.0, seed=1.0 + 0j, rtol=-1.0)
