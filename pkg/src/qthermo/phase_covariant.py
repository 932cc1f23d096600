"""Phase-covariant qubit dynamics.

Master equation

    L_t[rho] = -i[w(t) sz/2, rho] + g_z(t)(sz rho sz - rho)
               + g_+(t) D[s_+] rho + g_-(t) D[s_-] rho

with ``D[L] rho = L rho L^+ - {L^+ L, rho}/2``.  The Bloch vector obeys

    vx' = -w vy + mu2 vx,   vy' = w vx + mu2 vy,   vz' = mu1 (vz - vz*)

where ``mu1 = -(g_+ + g_-)``, ``mu2 = -(g_+ + g_-)/2 - 2 g_z`` and
``vz* = (g_+ - g_-)/(g_+ + g_-)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import (
    ComplexRoot,
    DegenerateDenominator,
    DegenerateFixedPoint,
    NotAState,
    OutOfDomain,
    QuadratureFailure,
)
from .generators import GeneratorSpec
from .schedules import PiecewisePolynomial, Segment, as_schedule
from .states import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, _atanh_ratio

#: fixed-point z component of the counterexample, (0.2 - 0.8)/(0.2 + 0.8)
COUNTEREXAMPLE_VZ_STAR = -0.6


@dataclass(frozen=True)
class PhaseCovariantRates:
    gamma_plus: object
    gamma_minus: object
    gamma_z: object
    omega_r: object = 0.0

    def __post_init__(self):
        for name in ("gamma_plus", "gamma_minus", "gamma_z", "omega_r"):
            object.__setattr__(self, name, as_schedule(getattr(self, name)))

    def at(self, t):
        """``(g_+, g_-, g_z, w)`` at time ``t``."""
        return self.gamma_plus(t), self.gamma_minus(t), self.gamma_z(t), self.omega_r(t)

    def eigenvalue_real_parts(self, t):
        """``(mu1, mu2)``: real parts of the nonzero generator eigenvalues."""
        gp, gm, gz, _ = self.at(t)
        return -(gp + gm), -0.5 * (gp + gm) - 2.0 * gz

    def breakpoints(self) -> list[float]:
        pts = set()
        for f in (self.gamma_plus, self.gamma_minus, self.gamma_z, self.omega_r):
            if isinstance(f, PiecewisePolynomial):
                pts.update(b for b in f.breakpoints if math.isfinite(b))
        return sorted(pts)


def counterexample_rates() -> PhaseCovariantRates:
    """Constant g_+ = 0.2, g_- = 0.8, w = 0 and a dephasing rate that switches
    on linearly between t = 1 and t = 2 and saturates at -0.22."""
    gamma_z = PiecewisePolynomial(
        [
            Segment(0.0, 1.0, (0.0,)),
            Segment(1.0, 2.0, (0.22, -0.22)),
            Segment(2.0, math.inf, (-0.22,)),
        ]
    )
    return PhaseCovariantRates(0.2, 0.8, gamma_z, 0.0)


def make_generator(rates: PhaseCovariantRates) -> GeneratorSpec:
    w = rates.omega_r
    return GeneratorSpec(
        2,
        hamiltonian=((0.5 * SIGMA_Z, w),),
        channels=((SIGMA_Z, rates.gamma_z), (SIGMA_PLUS, rates.gamma_plus), (SIGMA_MINUS, rates.gamma_minus)),
        name="phase-covariant",
    )


class DecayFunctions(NamedTuple):
    lam: float
    lam_z: float
    t_z: float
    omega: float


def _integral(f, t):
    if isinstance(f, PiecewisePolynomial):
        return f.integral(t)
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim:
        return np.vectorize(lambda x: _integral(f, float(x)))(t_arr)
    val, err = integrate.quad(f, 0.0, float(t_arr), epsabs=1e-13, epsrel=1e-12, limit=200)
    if err > 1e-10:
        raise QuadratureFailure(f"quadrature error estimate {err:.2e}")
    return val


def _is_constant(f) -> bool:
    return isinstance(f, PiecewisePolynomial) and all(
        len(s.coeffs) == 1 and s.coeffs[0] == f.segments[0].coeffs[0] for s in f.segments
    )


def _t_z(rates: PhaseCovariantRates, t: float) -> float:
    gp, gm = rates.gamma_plus, rates.gamma_minus
    if t == 0.0:
        return 0.0
    if _is_constant(gp) and _is_constant(gm):
        a, b = gp(0.0), gm(0.0)
        s = a + b
        if s == 0.0:
            return (a - b) * t
        return (a - b) / s * -math.expm1(-s * t)

    def total(x):
        return _integral(gp, x) + _integral(gm, x)

    g_t = total(t)
    pts = [p for p in rates.breakpoints() if 0.0 < p < t]
    val, err = integrate.quad(
        lambda s: (gp(s) - gm(s)) * math.exp(total(s) - g_t),
        0.0,
        t,
        points=pts or None,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    if err > 1e-10:
        raise QuadratureFailure(f"quadrature error estimate {err:.2e}")
    return val


def decay_functions(rates: PhaseCovariantRates, t) -> DecayFunctions:
    """``lambda``, ``lambda_z``, ``t_z`` and the rotation angle at time(s) ``t >= 0``.

    Integrals of piecewise-polynomial rates are exact; ``t_z`` uses a closed
    form for constant ``g_+, g_-`` and adaptive quadrature (abs tol 1e-13)
    otherwise.  Array input returns arrays.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("decay functions are defined for t >= 0")
    gp = _integral(rates.gamma_plus, t_arr)
    gm = _integral(rates.gamma_minus, t_arr)
    gz = _integral(rates.gamma_z, t_arr)
    omega = _integral(rates.omega_r, t_arr)
    lam = np.exp(-0.5 * (gp + gm) - 2.0 * gz)
    lam_z = np.exp(-(gp + gm))
    if t_arr.ndim == 0:
        t_z = _t_z(rates, float(t_arr))
        return DecayFunctions(float(lam), float(lam_z), float(t_z), float(omega))
    t_z = np.array([_t_z(rates, float(x)) for x in t_arr.ravel()]).reshape(t_arr.shape)
    return DecayFunctions(lam, lam_z, t_z, omega)


def propagate_bloch(rates: PhaseCovariantRates, v0, t) -> np.ndarray:
    """Closed-form Bloch vector at time ``t``.

    ``v0`` has shape ``(..., 3)``; with an array ``t`` the time axis is
    prepended to the result.
    """
    v0 = np.asarray(v0, dtype=float)
    df = decay_functions(rates, t)
    lam, lam_z, t_z, om = (np.asarray(x)[(...,) + (None,) * (v0.ndim - 1)] for x in df)
    c, s = np.cos(om), np.sin(om)
    vx = lam * (v0[..., 0] * c - v0[..., 1] * s)
    vy = lam * (v0[..., 0] * s + v0[..., 1] * c)
    vz = v0[..., 2] * lam_z + t_z
    return np.stack(np.broadcast_arrays(vx, vy, vz), axis=-1)


def bloch_velocity(rates: PhaseCovariantRates, t: float, v) -> np.ndarray:
    """Right-hand side of the Bloch equations at time ``t``."""
    v = np.asarray(v, dtype=float)
    gp, gm, gz, w = rates.at(t)
    mu1 = -(gp + gm)
    mu2 = -0.5 * (gp + gm) - 2.0 * gz
    vx, vy, vz = v[..., 0], v[..., 1], v[..., 2]
    return np.stack([-w * vy + mu2 * vx, w * vx + mu2 * vy, mu1 * vz + gp - gm], axis=-1)


def ifp_bloch(rates: PhaseCovariantRates, t: float) -> np.ndarray:
    gp, gm, _, _ = rates.at(t)
    s = gp + gm
    if s == 0.0:
        raise DegenerateFixedPoint("g_+ + g_- = 0: every diagonal state is fixed")
    v = np.array([0.0, 0.0, (gp - gm) / s])
    if abs(v[2]) > 1.0:
        raise NotAState("g_+ and g_- have opposite signs; the fixed point lies outside the Bloch ball")
    return v


class PDivConditions(NamedTuple):
    cond1: bool
    cond2: bool
    values: tuple

    @property
    def pdiv(self) -> bool:
        return self.cond1 and self.cond2


def pdiv_conditions(rates: PhaseCovariantRates, t: float) -> PDivConditions:
    """P-divisibility of a phase-covariant map at time ``t``:
    ``g_+ >= 0, g_- >= 0`` and ``sqrt(g_+ g_-) + 2 g_z >= 0``."""
    gp, gm, gz, _ = rates.at(t)
    if gp * gm < 0:
        raise ComplexRoot("g_+ g_- < 0")
    k = math.sqrt(gp * gm) + 2.0 * gz
    return PDivConditions(gp >= 0 and gm >= 0, k >= 0, (gp, gm, k))


def pdiv_onset(rates: PhaseCovariantRates, t_lo: float, t_hi: float, xtol: float = 1e-12) -> float:
    """Root of ``sqrt(g_+ g_-) + 2 g_z`` in ``[t_lo, t_hi]`` (brentq)."""
    from scipy.optimize import brentq

    return brentq(lambda t: pdiv_conditions(rates, t).values[2], t_lo, t_hi, xtol=xtol)


def cp_conditions(rates: PhaseCovariantRates, t):
    """``(f1, f2)``; the map up to ``t`` is CP iff both are <= 0."""
    lam, lam_z, t_z, _ = decay_functions(rates, t)
    f1 = np.abs(lam_z) + np.abs(t_z) - 1.0
    f2 = 4.0 * lam**2 + t_z**2 - (1.0 + lam_z) ** 2
    return f1, f2


def appendix_c_bounds(rates: PhaseCovariantRates, t):
    """Vertex ``x0`` and maximum ``P0`` of the parabola bounding ``|v(t)|^2``.

    ``P(x) = (lz^2 - l^2) x^2 + 2 lz tz x + tz^2 + l^2`` bounds ``|v(t)|^2``
    over initial states with ``v_z(0) = x``.  At ``t = 0`` the analytic limits
    are returned: ``x0 -> (g_+ - g_-)/(g_+ + g_- - 4 g_z)`` and ``P0 -> 1``.
    """
    t_arr = np.asarray(t, dtype=float)
    _, lam_z, t_z, _ = decay_functions(rates, t_arr)
    # lambda^2 - lambda_z^2 = lambda_z^2 expm1(2 log(lambda/lambda_z)) avoids cancellation at small t
    log_ratio = 0.5 * (_integral(rates.gamma_plus, t_arr) + _integral(rates.gamma_minus, t_arr)) - 2.0 * _integral(
        rates.gamma_z, t_arr
    )
    lam2 = lam_z**2 * np.exp(2.0 * log_ratio)
    denom = np.asarray(lam_z**2 * np.expm1(2.0 * log_ratio), dtype=float)
    zero = t_arr == 0.0
    if np.any(~zero & (np.abs(denom) < 1e-13)):
        raise DegenerateDenominator("lambda^2 == lambda_z^2 at t > 0")
    gp, gm, gz, _ = rates.at(0.0)
    x0_lim = (gp - gm) / (gp + gm - 4.0 * gz)
    safe = np.where(zero, 1.0, denom)
    x0 = np.where(zero, x0_lim, lam_z * t_z / safe)
    p0 = np.where(zero, 1.0, lam_z**2 * t_z**2 / safe + t_z**2 + lam2)
    if t_arr.ndim == 0:
        return float(x0), float(p0)
    return x0, p0


class Region(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


def region_classify(v, v_star) -> Region:
    """Bloch-ball region used in the positivity argument (``vz* < 0``).

    A: vz >= 0; B: vz <= vz*; C: vz* < vz < 0 with |v| <= |vz*|; D otherwise.
    """
    v = np.asarray(v, dtype=float)
    vzs = float(np.asarray(v_star)[2])
    if not vzs < 0:
        raise OutOfDomain("region classification assumes vz* < 0")
    vz = v[2]
    if vz >= 0:
        return Region.A
    if vz <= vzs:
        return Region.B
    if np.linalg.norm(v) <= abs(vzs):
        return Region.C
    return Region.D


#: rounded coefficients (slope, intercept) of the certified region-D bound
REGION_D_COEFFS = {"early": (1.05, 0.88), "late": (1.21, 0.73)}


def region_d_lower_bound(v_z: float, interval: str, vz_star: float = COUNTEREXAMPLE_VZ_STAR) -> float:
    """Lower bound ``(vz - vz*)(a vz + b)`` on the entropy production in region D.

    ``interval`` is ``"early"`` for ``1 < t <= 1.5`` and ``"late"`` for ``t > 1.5``.
    """
    if interval not in REGION_D_COEFFS:
        raise ValueError("interval must be 'early' or 'late'")
    if not vz_star <= v_z < 0.0:
        raise OutOfDomain(f"v_z = {v_z} outside [{vz_star}, 0)")
    a, b = REGION_D_COEFFS[interval]
    return (v_z - vz_star) * (a * v_z + b)


def region_d_bound_coefficients(mu1: float, mu2_max: float, v_max: float, vz_star: float):
    """Unrounded ``(slope, intercept)`` of the region-D bound for given extremes.

    The bound reads ``(vz - vz*) (slope vz + intercept)`` with
    ``slope = -mu1 f(v_max) + mu2_max f(|vz*|)`` and
    ``intercept = f(|vz*|) (mu2_max + mu1) vz*``, ``f(x) = arctanh(x)/x``.
    """
    f_max = float(_atanh_ratio(v_max))
    f_star = float(_atanh_ratio(abs(vz_star)))
    return -mu1 * f_max + mu2_max * f_star, f_star * (mu2_max + mu1) * vz_star


def epr_bloch_closed_form(rates: PhaseCovariantRates, t: float, v) -> np.ndarray:
    """Entropy production rate written through ``|v|``, ``v_z`` and ``mu1, mu2``.

    The rotation term never contributes, so any ``w`` is allowed; needs ``|v| < 1``.
    """
    v = np.asarray(v, dtype=float)
    mu1, mu2 = rates.eigenvalue_real_parts(t)
    vzs = ifp_bloch(rates, t)[2]
    n = np.linalg.norm(v, axis=-1)
    vz = v[..., 2]
    f = _atanh_ratio(n)
    fs = float(_atanh_ratio(abs(vzs)))
    return -mu2 * f * (n**2 - vz**2) - mu1 * (vz - vzs) * (f * vz - fs * vzs)


def random_unital_rates(rng: np.random.Generator, t_end: float = 5.0, n_knots: int = 6) -> PhaseCovariantRates:
    """Piecewise-linear unital schedule ``g_+ = g_-`` with sign changes allowed."""
    knots = np.linspace(0.0, t_end, n_knots)
    g = rng.uniform(-0.4, 1.0, n_knots)
    gz = rng.uniform(-0.6, 0.4, n_knots)
    w = rng.uniform(-1.0, 1.0)
    sched = PiecewisePolynomial.linear_interpolant(knots, g)
    return PhaseCovariantRates(sched, sched, PiecewisePolynomial.linear_interpolant(knots, gz), w)
