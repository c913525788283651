"""Contour quadrature and steepest descent for exp(z + c + q/z) dz/z.

The compact cycle is handled by the periodic trapezoid rule (spectrally
accurate on circles) and cross-checked against the entire series

    sum_j q^j / (j! (j+k)!)  =  q^(-k/2) I_k(2 sqrt q),

which is this module's primary oracle.  Thimbles are traced with the
parametrisation W(z(t)) = W(saddle) - t, so the imaginary part of W is
conserved exactly along the true flow and Re W decreases linearly.  The
integral along a traced path is evaluated on the sample polyline; since the
integrand is analytic on the punctured plane, straight chords between
samples give the exact cycle integral up to per-chord quadrature error.

At real positive q the two critical values share their imaginary part and
the descending flow from the higher saddle runs into the lower one (a
Stokes-degenerate configuration; the acceptance points a = 0, 1/2 sit on
it).  The tracer continues through the lower saddle by a right turn onto
its descending directions, which realises the chain

    thimble(+) = compact circle + thimble(-)

exactly, so the homology relation holds with the matched sign.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from .errors import (
    FlowSingular,
    NonMonotone,
    QuadratureNotConverged,
    TrackingLost,
)

__all__ = [
    "LGModel",
    "ThimbleResult",
    "MonodromyReport",
    "CycleSpec",
    "bessel_term_sum",
    "circle_closed_form",
    "circle_charge",
    "trace_thimble",
    "saddle_point_estimate",
    "product_charge_numeric",
    "tensor_quadrature_2d",
    "monodromy_probe",
    "superpotential",
]


@dataclass(frozen=True)
class LGModel:
    """Exponential-of-superpotential data: one coefficient per factor plus a twist."""

    a: tuple[complex, ...]
    c: complex = 0j

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def q(self) -> tuple[complex, ...]:
        return tuple(cmath.exp(ai) for ai in self.a)

    def factor(self, i: int) -> "LGModel":
        return LGModel((self.a[i],), 0j)

    def saddles(self, i: int = 0) -> tuple[complex, complex]:
        s = cmath.sqrt(self.q[i])
        return s, -s


def superpotential(z, q):
    return z + q / z


def bessel_term_sum(k: int, q: complex) -> complex:
    """sum_j q^j / (j! (j+k)!), an entire function of q.

    Equals q^(-k/2) I_k(2 sqrt q) on any branch; the combination is
    single-valued.  Terms are accumulated until they stop contributing.
    """
    k = int(k)
    j0 = max(0, -k)
    term = q**j0 / (math.factorial(j0) * math.factorial(j0 + k))
    total = term
    j = j0
    tail_guard = j0 + 10 + int(2.0 * abs(q) ** 0.5)
    while True:
        j += 1
        term *= q / (j * (j + k))
        total += term
        if j > tail_guard and abs(term) <= 1e-18 * (abs(total) + 1e-300):
            return total


def circle_closed_form(model: LGModel, k: int = 0) -> complex:
    """Closed form of the compact-cycle integral via the series oracle."""
    if model.n != 1:
        raise ValueError("closed form is per factor")
    return 2j * math.pi * cmath.exp(model.c) * bessel_term_sum(k, model.q[0])


def circle_charge(
    model: LGModel,
    k: int = 0,
    radius: float = 1.0,
    *,
    tol: float = 1e-12,
    start_nodes: int = 64,
    max_nodes: int = 1 << 19,
) -> complex:
    """Periodic-trapezoid quadrature of the weighted compact-cycle integral.

    Integrates exp(z + c + q/z) z^(-k) dz/z over |z| = radius, doubling the
    node count until two consecutive values agree.
    """
    if model.n != 1:
        raise ValueError("circle_charge is per factor")
    if not radius > 0:
        raise ValueError("radius must be positive")
    q = model.q[0]

    def value(nodes: int) -> complex:
        theta = np.arange(nodes) * (2.0 * math.pi / nodes)
        z = radius * np.exp(1j * theta)
        f = np.exp(z + q / z) * z ** (-k)
        return 1j * (2.0 * math.pi / nodes) * complex(f.sum())

    prev = value(start_nodes)
    nodes = 2 * start_nodes
    while nodes <= max_nodes:
        cur = value(nodes)
        if abs(cur - prev) <= tol * (abs(cur) + 1e-30):
            return cmath.exp(model.c) * cur
        prev = cur
        nodes *= 2
    raise QuadratureNotConverged(
        f"circle quadrature did not stabilise below {max_nodes} nodes"
    )


# ---------------------------------------------------------------------------
# Thimbles


@dataclass
class ThimbleResult:
    saddle: complex
    sign: int
    weight: int
    path: np.ndarray
    t_path: np.ndarray
    integral: complex
    im_drift: float
    tail_bound: float
    ends: tuple[str, str]
    collided: bool


def _w(z, q):
    return z + q / z


def _wp(z, q):
    return 1.0 - q / z**2


def _newton_to_level(z: complex, q: complex, target: complex) -> complex:
    for _ in range(8):
        step = (_w(z, q) - target) / _wp(z, q)
        z = z - step
        if abs(step) < 1e-15 * (1.0 + abs(z)):
            break
    return z


def _descent_dirs(saddle: complex) -> tuple[complex, complex]:
    # W''(s) = 2/s at a saddle of z + q/z; descent needs W'' e^{2ia} < 0
    wpp = 2.0 / saddle
    alpha = (math.pi - cmath.phase(wpp)) / 2.0
    e = cmath.exp(1j * alpha)
    return e, -e


def _ode_segment(q, z_start, t_start, t_end, rtol, n_out):
    def rhs(t, y):
        z = complex(y[0], y[1])
        v = -1.0 / _wp(z, q)
        return [v.real, v.imag]

    t_eval = np.linspace(t_start, t_end, n_out)
    sol = solve_ivp(
        rhs,
        (t_start, t_end),
        [z_start.real, z_start.imag],
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise FlowSingular(f"descent integration failed: {sol.message}")
    return sol.t, sol.y[0] + 1j * sol.y[1]


def _classify_end(z: complex, q: complex) -> str:
    pole = q / z
    if abs(z) >= abs(pole):
        return "left-infinity" if z.real < 0 else "unclassified"
    return "zero-puncture" if pole.real < 0 else "unclassified"


def _integrate_polyline(zs: np.ndarray, f, order: int) -> complex:
    nodes, weights = leggauss(order)
    z0, z1 = zs[:-1], zs[1:]
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(pts)
    return complex(np.sum(half * (vals @ weights)))


def trace_thimble(
    model: LGModel,
    sign: int = 1,
    *,
    weight: int = 0,
    cutoff: float = 40.0,
    rtol: float = 1e-12,
    n_samples: int = 700,
    quad_tol: float = 1e-9,
) -> ThimbleResult:
    """Trace both descending branches from a saddle and integrate along them.

    The path is oriented from the zero-puncture end to the left-infinity end
    when the ends classify; the reported integral is of
    exp(z + c + q/z) z^(-weight) dz/z along it.
    """
    if model.n != 1:
        raise ValueError("trace_thimble is per factor")
    q = model.q[0]
    s = sign * cmath.sqrt(q)
    other = -s
    w0 = 2.0 * s
    wpp = 2.0 / s
    dirs = _descent_dirs(s)
    degenerate = abs(s.imag) <= 1e-12 * abs(s) and s.real > 0
    t_collision = 4.0 * s.real if degenerate else None

    t0 = 1e-7 * (1.0 + abs(w0))

    def run_branch(direction: complex):
        z_start = s + direction * cmath.sqrt(2.0 * t0 / abs(wpp))
        z_start = _newton_to_level(z_start, q, w0 - t0)
        ts = [np.array([0.0])]
        zs = [np.array([s])]
        collided = False
        if degenerate and t0 < t_collision < cutoff:
            dc = max(1e-8 * (1.0 + abs(w0)), 1e-10)
            n1 = max(int(n_samples * t_collision / cutoff), 60)
            seg_t, seg_z = _ode_segment(q, z_start, t0, t_collision - dc, rtol, n1)
            ts.append(seg_t)
            zs.append(seg_z)
            z_in = seg_z[-1]
            d_in = -1.0 / _wp(z_in, q)
            d_in /= abs(d_in)
            right = d_in * (-1j)
            cand = _descent_dirs(other)
            d_out = max(cand, key=lambda e: (e.conjugate() * right).real)
            ts.append(np.array([t_collision]))
            zs.append(np.array([other]))
            wpp_o = 2.0 / other
            z_resume = other + d_out * cmath.sqrt(2.0 * dc / abs(wpp_o))
            z_resume = _newton_to_level(z_resume, q, _w(other, q) - dc)
            n2 = max(n_samples - n1, 60)
            seg_t, seg_z = _ode_segment(
                q, z_resume, t_collision + dc, cutoff, rtol, n2
            )
            ts.append(seg_t)
            zs.append(seg_z)
            collided = True
        else:
            seg_t, seg_z = _ode_segment(q, z_start, t0, cutoff, rtol, n_samples)
            ts.append(seg_t)
            zs.append(seg_z)
        return np.concatenate(ts), np.concatenate(zs), collided

    t_a, z_a, col_a = run_branch(dirs[1])
    t_b, z_b, col_b = run_branch(dirs[0])

    guard = 1e-6 * math.sqrt(abs(q))
    for zarr in (z_a, z_b):
        if np.min(np.abs(zarr)) < guard:
            raise FlowSingular("descent path entered the guard radius around z = 0")

    for tarr, zarr in ((t_a, z_a), (t_b, z_b)):
        re_w = np.real(_w(zarr, q))
        if np.any(np.diff(re_w) > 1e-9 * (1.0 + abs(w0))):
            raise NonMonotone("Re W increased along a descent branch")

    end_a = _classify_end(z_a[-1], q)
    end_b = _classify_end(z_b[-1], q)
    if end_a == "left-infinity" and end_b == "zero-puncture":
        z_a, z_b = z_b, z_a
        t_a, t_b = t_b, t_a
        end_a, end_b = end_b, end_a

    path = np.concatenate([z_a[::-1], z_b[1:]])
    t_path = np.concatenate([-t_a[::-1], t_b[1:]])

    def integrand(z):
        return np.exp(z + q / z + model.c) * z ** (-weight) / z

    val10 = _integrate_polyline(path, integrand, 10)
    val20 = _integrate_polyline(path, integrand, 20)
    floor = abs(cmath.exp(w0 + model.c)) * 1e-30 + 1e-300
    if abs(val20 - val10) > quad_tol * (abs(val20) + floor):
        val40 = _integrate_polyline(path, integrand, 40)
        if abs(val40 - val20) > quad_tol * (abs(val40) + floor):
            raise QuadratureNotConverged("polyline quadrature did not stabilise")
        val20 = val40

    im_w = np.imag(_w(path, q))
    im_drift = float(np.max(np.abs(im_w - w0.imag)))

    dens_a = abs(integrand(np.array([z_a[-1]]))[0] / _wp(z_a[-1], q)) * math.exp(
        cutoff - (w0 + model.c).real
    )
    dens_b = abs(integrand(np.array([z_b[-1]]))[0] / _wp(z_b[-1], q)) * math.exp(
        cutoff - (w0 + model.c).real
    )
    tail = 2.0 * math.exp((w0 + model.c).real - cutoff) * (dens_a + dens_b)

    return ThimbleResult(
        saddle=s,
        sign=sign,
        weight=weight,
        path=path,
        t_path=t_path,
        integral=val20,
        im_drift=im_drift,
        tail_bound=tail,
        ends=(end_a, end_b),
        collided=col_a or col_b,
    )


def saddle_point_estimate(model: LGModel, sign: int = 1) -> complex:
    """Leading Gaussian approximation of the thimble integral.

    exp(W(s) + c) * e^{i alpha} / s * sqrt(2 pi / |W''(s)|), with alpha the
    principal descent direction; accurate to O(1/sqrt q) for large |q|.
    """
    q = model.q[0]
    s = sign * cmath.sqrt(q)
    wpp = 2.0 / s
    alpha = (math.pi - cmath.phase(wpp)) / 2.0
    return (
        cmath.exp(2.0 * s + model.c)
        * cmath.exp(1j * alpha)
        / s
        * math.sqrt(2.0 * math.pi / abs(wpp))
    )


# ---------------------------------------------------------------------------
# Products and monodromy


@dataclass(frozen=True)
class CycleSpec:
    """Per-factor integration cycle: a circle of given radius, or a thimble."""

    kind: str
    weight: int = 0
    radius: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if self.kind not in ("circle", "thimble"):
            raise ValueError("cycle kind must be 'circle' or 'thimble'")


def _factor_integral(a_i: complex, spec: CycleSpec) -> complex:
    piece = LGModel((a_i,), 0j)
    if spec.kind == "circle":
        return circle_charge(piece, k=spec.weight, radius=spec.radius)
    return trace_thimble(piece, sign=spec.sign, weight=spec.weight).integral


def _cycle_nodes(a_i: complex, spec: CycleSpec, order: int = 8):
    """Nodes z_j and complex weights u_j with sum u_j g(z_j) ~ int g(z) z^{-k} dz/z."""
    if spec.kind == "circle":
        nodes = 2048
        theta = np.arange(nodes) * (2.0 * math.pi / nodes)
        z = spec.radius * np.exp(1j * theta)
        u = 1j * (2.0 * math.pi / nodes) * z ** (-spec.weight)
        return z, u
    piece = LGModel((a_i,), 0j)
    res = trace_thimble(piece, sign=spec.sign, weight=0, n_samples=400)
    gl_nodes, gl_w = leggauss(order)
    z0, z1 = res.path[:-1], res.path[1:]
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    z = (mid[:, None] + half[:, None] * gl_nodes[None, :]).ravel()
    u = (half[:, None] * gl_w[None, :]).ravel() * z ** (-spec.weight) / z
    return z, u


def product_charge_numeric(
    model: LGModel,
    weights: tuple[int, ...],
    cycles: tuple[CycleSpec, ...],
    *,
    fubini_tol: float = 1e-8,
    verify_fubini: bool | None = None,
) -> complex:
    """Product of per-factor cycle integrals, times the twist factor.

    For two circle factors a direct tensor-product quadrature of the joint
    integrand is compared against the factored value (the Fubini check).
    """
    if not (len(weights) == len(cycles) == model.n):
        raise ValueError("need one weight and one cycle per factor")
    cycles = tuple(
        CycleSpec(c.kind, k, c.radius, c.sign) for c, k in zip(cycles, weights)
    )
    factors = [_factor_integral(model.a[i], cycles[i]) for i in range(model.n)]
    value = cmath.exp(model.c) * math.prod(factors[1:], start=factors[0])
    if verify_fubini is None:
        verify_fubini = model.n == 2 and all(c.kind == "circle" for c in cycles)
    if verify_fubini:
        if model.n != 2:
            raise ValueError("the Fubini check is implemented for two factors")
        tensor = tensor_quadrature_2d(model, cycles[0], cycles[1])
        if abs(tensor - value) > fubini_tol * (abs(value) + 1e-30):
            raise QuadratureNotConverged(
                f"tensor quadrature {tensor} disagrees with the factored value {value}"
            )
    return value


def tensor_quadrature_2d(
    model: LGModel, spec1: CycleSpec, spec2: CycleSpec, *, chunk: int = 64
) -> complex:
    """Direct two-dimensional quadrature of the joint integrand over a product cycle."""
    if model.n != 2:
        raise ValueError("tensor quadrature needs a two-factor model")
    q1, q2 = model.q
    z1, u1 = _cycle_nodes(model.a[0], spec1)
    z2, u2 = _cycle_nodes(model.a[1], spec2)
    inner2 = z2 + q2 / z2
    total = 0j
    for start in range(0, len(z1), chunk):
        zb = z1[start : start + chunk]
        ub = u1[start : start + chunk]
        joint = np.exp(zb[:, None] + q1 / zb[:, None] + inner2[None, :])
        total += complex(np.sum(ub[:, None] * u2[None, :] * joint))
    return cmath.exp(model.c) * total


@dataclass
class MonodromyReport:
    loops: int
    steps: int
    track: np.ndarray
    swapped: bool
    circle_values: np.ndarray
    circle_return_error: float
    thimble_before: tuple[complex, complex] | None
    thimble_after: tuple[complex, complex] | None


def monodromy_probe(
    model: LGModel,
    steps: int = 64,
    *,
    loops: int = 1,
    radius: float = 1.0,
    weight: int = 0,
    trace_thimbles: bool = True,
) -> MonodromyReport:
    """Continue the saddles along a full shift of the exponent by 2 pi i.

    Reports the induced permutation of the two saddles (a swap for one loop),
    the compact-cycle integral along the way (single-valued, so it must
    return to its starting value), and the thimble integrals at the endpoint
    saddle positions.  No identification beyond the swap is asserted.
    """
    if model.n != 1:
        raise ValueError("monodromy probe is per factor")
    a0 = model.a[0]
    s_prev = cmath.sqrt(cmath.exp(a0))
    track = [s_prev]
    circle_vals = []
    total = steps * loops
    for j in range(total + 1):
        t = j / steps
        aj = a0 + 2j * math.pi * t
        qj = cmath.exp(aj)
        root = cmath.sqrt(qj)
        cand = (root, -root)
        s_new = min(cand, key=lambda r: abs(r - s_prev))
        if j > 0:
            sep = abs(cand[0] - cand[1])
            if abs(s_new - s_prev) > 0.5 * sep:
                raise TrackingLost(
                    f"saddle moved {abs(s_new - s_prev):.3g} against separation {sep:.3g}"
                )
            track.append(s_new)
        s_prev = s_new
        circle_vals.append(circle_charge(LGModel((aj,), model.c), weight, radius))
    track_arr = np.array(track)
    swapped = abs(track_arr[-1] + track_arr[0]) < abs(track_arr[-1] - track_arr[0])
    circle_arr = np.array(circle_vals)
    ret_err = abs(circle_arr[-1] - circle_arr[0]) / (abs(circle_arr[0]) + 1e-300)

    before = after = None
    if trace_thimbles:
        piece = LGModel((a0,), model.c)
        before = (
            trace_thimble(piece, 1).integral,
            trace_thimble(piece, -1).integral,
        )
        end_sign = 1 if abs(track_arr[-1] - track_arr[0]) < abs(
            track_arr[-1] + track_arr[0]
        ) else -1
        after = (
            trace_thimble(piece, end_sign).integral,
            trace_thimble(piece, -end_sign).integral,
        )
    return MonodromyReport(
        loops=loops,
        steps=steps,
        track=track_arr,
        swapped=swapped,
        circle_values=circle_arr,
        circle_return_error=float(ret_err),
        thimble_before=before,
        thimble_after=after,
    )
