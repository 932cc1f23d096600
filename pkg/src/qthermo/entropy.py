"""Entropy production rates relative to the instantaneous fixed point.

The rate for a state ``rho`` under ``L_t`` with fixed point ``rho*`` is

    sigma = -Tr{ L_t[rho] (log rho - log rho*) }

and splits into the entropy change ``-Tr{L_t[rho] log rho}`` plus the flow
``Tr{L_t[rho] log rho*}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    EpsilonUnderflow,
    GridTooCoarse,
    NoPositiveEigenvalue,
    NotAState,
    RankDeficient,
    StaleFixedPoint,
    SupportViolation,
)
from .generators import (
    GeneratorSpec,
    PDivVerdict,
    apply_generator,
    build_superop,
    kossakowski_matrix,
    kossakowski_scan,
    spectral_decompose,
)
from .states import (
    EIGEN_FLOOR,
    dagger,
    hermitian_part,
    matrix_log,
    r_vector,
    relative_entropy,
)

STALE_TOL = 1e-8


@dataclass(frozen=True)
class EprSample:
    t: float
    sigma: float
    dS: float
    flow: float
    region: str | None = None


class ClausiusSplit(NamedTuple):
    dS: float
    flow: float


def _full_rank(rho: np.ndarray, what: str, floor: float = EIGEN_FLOOR) -> np.ndarray:
    rho = hermitian_part(np.asarray(rho, dtype=complex))
    pmin = np.linalg.eigvalsh(rho)[..., 0]
    if np.any(pmin <= floor):
        raise SupportViolation(f"{what} is not full rank (smallest eigenvalue {np.min(pmin):.2e})")
    return rho


def _fixed_point(gen: GeneratorSpec, t: float, ifp) -> np.ndarray:
    if ifp is None:
        sd = spectral_decompose(build_superop(gen, t))
        if not sd.ifp_is_state:
            raise NotAState(f"instantaneous fixed point at t={t} is not a state")
        ifp = sd.ifp_matrix
    ifp = _full_rank(ifp, "fixed point")
    if np.linalg.norm(apply_generator(gen, t, ifp)) > STALE_TOL:
        raise StaleFixedPoint(f"supplied fixed point is not stationary at t={t}")
    return ifp


def _split(l_rho, rho, log_ifp):
    """Entropy change and flow for stacked ``rho``; returns arrays."""
    log_rho = matrix_log(rho)
    ds = -np.real(np.einsum("...ij,...ji->...", l_rho, log_rho))
    flow = np.real(np.einsum("...ij,...ji->...", l_rho, log_ifp))
    return ds, flow


def clausius_split(gen: GeneratorSpec, t: float, rho: np.ndarray, ifp: np.ndarray | None = None) -> ClausiusSplit:
    rho = _full_rank(rho, "state")
    ifp = _fixed_point(gen, t, ifp)
    ds, flow = _split(apply_generator(gen, t, rho), rho, matrix_log(ifp))
    return ClausiusSplit(float(ds), float(flow))


def epr_general(gen: GeneratorSpec, t: float, rho: np.ndarray, ifp: np.ndarray | None = None) -> float:
    """Entropy production rate of ``rho`` at time ``t``.

    If ``ifp`` is omitted the fixed point is taken from the spectral
    decomposition of ``L_t``.

    Raises
    ------
    SupportViolation
        ``rho`` or the fixed point is rank deficient.
    StaleFixedPoint
        ``||L_t[ifp]|| > 1e-8``.
    """
    ds, flow = clausius_split(gen, t, rho, ifp)
    return ds + flow


def epr_qubit(v, v_star, v_dot) -> np.ndarray | float:
    """Bloch-vector form ``-(r(v) - r(v*)) . dv/dt``; broadcasts over leading axes."""
    r = r_vector(v)
    rs = r_vector(v_star)
    out = -np.sum((r - rs) * np.asarray(v_dot, dtype=float), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def epr_many(gen: GeneratorSpec, t: float, rhos: np.ndarray, ifp: np.ndarray) -> np.ndarray:
    """Vectorized ``epr_general`` for a stack of full-rank states sharing one fixed point."""
    rhos = _full_rank(rhos, "state")
    ds, flow = _split(apply_generator(gen, t, rhos), rhos, matrix_log(ifp))
    return ds + flow


class TotalEntropy(NamedTuple):
    integral: float
    relative_entropy_route: float


def total_entropy_production(traj, tol: float = 1e-3) -> TotalEntropy:
    """Total entropy produced over a trajectory, evaluated two ways.

    ``integral`` is the trapezoidal integral of the rate samples;
    ``relative_entropy_route`` is
    ``D(rho(0)||rho*(0)) - D(rho(t)||rho*(t)) - int Tr{rho d/ds log rho*} ds``
    with the derivative of ``log rho*`` from finite differences.

    Raises GridTooCoarse when the two differ by more than ``tol``.
    """
    if traj.sigma is None or traj.ifps is None:
        raise ValueError("trajectory was integrated without entropy production samples")
    t = np.asarray(traj.tgrid)
    if t.size < 3:
        raise GridTooCoarse("need at least three samples")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise GridTooCoarse("time grid must be uniform")
    sigma = np.asarray(traj.sigma)
    if sigma.ndim != 1:
        raise ValueError("total_entropy_production expects a single trajectory")
    integral = float(np.trapezoid(sigma, t))

    log_ifp = matrix_log(traj.ifps)
    dlog = np.gradient(log_ifp, t, axis=0)
    drift = np.real(np.einsum("kij,kji->k", traj.states, dlog))
    route = (
        relative_entropy(traj.states[0], traj.ifps[0])
        - relative_entropy(traj.states[-1], traj.ifps[-1])
        - float(np.trapezoid(drift, t))
    )
    if abs(route - integral) > tol:
        raise GridTooCoarse(f"routes disagree: {integral:.6g} vs {route:.6g}")
    return TotalEntropy(integral, route)


@dataclass(frozen=True)
class WitnessResult:
    found_negative: bool
    state: np.ndarray
    sigma: float
    eigenvalue: complex
    epsilon: float


def eigensign_witness(
    gen: GeneratorSpec,
    t: float,
    epsilon: float = 1e-2,
    eps_floor: float = 1e-8,
    tol: float = 1e-10,
) -> WitnessResult:
    """Build a state near the fixed point whose entropy production is negative.

    For every eigenvalue with positive real part the Hermitian combinations
    ``X = s + s^+`` and ``Y = i (s - s^+)`` of its eigenmatrix ``s`` are tried
    as perturbations ``rho* + eps X``; ``eps`` starts at ``epsilon`` and is
    halved until the matrix is a full-rank state with negative rate.

    Raises
    ------
    NoPositiveEigenvalue
        Every eigenvalue has real part <= ``tol``.
    EpsilonUnderflow
        ``eps`` fell below ``eps_floor`` without producing a witness.
    """
    sd = spectral_decompose(build_superop(gen, t))
    if not sd.ifp_is_state:
        raise NotAState(f"fixed point at t={t} is not a state")
    ifp = _full_rank(sd.ifp_matrix, "fixed point")
    order = np.argsort(-sd.eigenvalues.real)
    positive = [k for k in order if sd.eigenvalues[k].real > tol]
    if not positive:
        raise NoPositiveEigenvalue(f"max Re(lambda) = {sd.eigenvalues.real.max():.3e} at t={t}")
    log_ifp = matrix_log(ifp)
    for k in positive:
        s = sd.eigenmatrices[k]
        directions = []
        for x in (s + dagger(s), 1j * (s - dagger(s))):
            x = hermitian_part(x)
            x = x - np.trace(x) / gen.dim * np.eye(gen.dim)
            nrm = np.linalg.norm(x)
            if nrm > 1e-8:
                directions.append(x / nrm)
        eps = epsilon
        while eps >= eps_floor:
            for x in directions:
                rho = ifp + eps * x
                if np.linalg.eigvalsh(rho)[0] <= EIGEN_FLOOR:
                    continue
                ds, flow = _split(apply_generator(gen, t, rho), rho, log_ifp)
                sigma = float(ds + flow)
                if sigma < 0:
                    return WitnessResult(True, rho, sigma, complex(sd.eigenvalues[k]), eps)
            eps *= 0.5
    raise EpsilonUnderflow(f"no witness found down to eps = {eps_floor}")


def default_log_eps_schedule() -> np.ndarray:
    """``log(eps)`` for eps = 1e-2 ... 1e-10 and then far beyond double precision.

    Probe states are parametrized by ``log(eps)`` so the objective can follow
    its ``c log(eps)`` growth past the point where ``eps`` itself underflows.
    """
    decades = np.array([2, 4, 6, 8, 10, 20, 50, 100, 300, 1000, 3000, 10000, 30000, 100000], dtype=float)
    return -math.log(10.0) * decades


@dataclass(frozen=True)
class MapEprVerdict:
    """Outcome of probing the map entropy production at one instant.

    ``objective_trace`` lists ``(log_eps, objective)`` along the witness
    probe; ``infimum`` is 0 when the data are consistent with
    P-divisibility and ``-inf`` when divergence was detected.
    """

    pdiv_consistent: bool
    divergent: bool
    objective_trace: list
    infimum: float
    min_probe: float
    kossakowski: PDivVerdict
    eta_confirmed: bool | None = None
    extra_traces: dict = field(default_factory=dict)


def probe_populations(d: int, log_eps: float, n: int, m: int, eta: float):
    """Populations and their logarithms for the boundary-approaching probe state."""
    eps = math.exp(log_eps)
    p = np.full(d, eta / (d - 2) if d > 2 else 0.0)
    logp = np.log(np.where(p > 0, p, 1.0))
    rest = eta if d > 2 else 0.0
    p[n] = 1.0 - eps - rest
    logp[n] = math.log1p(-(eps + rest))
    p[m] = eps
    logp[m] = log_eps
    return p, logp


def map_objective(superop, basis: np.ndarray, p: np.ndarray, logp: np.ndarray, log_ifp: np.ndarray) -> float:
    """``-Tr{L[rho_A](log rho_A - log rho*)}`` for ``rho_A`` diagonal in ``basis``.

    ``logp`` is supplied separately so populations may be far below the
    smallest double.
    """
    km = kossakowski_matrix(superop, basis)
    entropy_term = float(np.einsum("i,j,ji->", p, logp, km))
    rho_a = (basis * p) @ basis.conj().T
    flow = float(np.real(np.trace(superop.act(rho_a) @ log_ifp)))
    return -(entropy_term - flow)


def _diverges(log_eps: np.ndarray, values: np.ndarray, threshold: float) -> bool:
    if values[-1] >= threshold:
        return False
    tail = slice(len(values) // 2, None)
    lv, vv = log_eps[tail], values[tail]
    if np.any(np.diff(vv) >= 0):
        return False
    slope, intercept = np.polyfit(lv, vv, 1)
    if slope <= 0:
        return False
    resid = np.max(np.abs(vv - (slope * lv + intercept)))
    return bool(resid <= 1e-3 * (np.ptp(vv) + 1.0))


def sigma_map_probe(
    gen: GeneratorSpec,
    t: float,
    basis_search: int = 200,
    eps_schedule: Sequence[float] | None = None,
    eta: float = 1e-4,
    seed: int = 0,
    threshold: float = -50.0,
    tol: float = 1e-8,
) -> MapEprVerdict:
    """Binary probe of ``min_rho -Tr{L_t[rho](log rho - log rho*)}``.

    The fixed point always gives 0.  Further probes are states diagonal in
    the bases returned by a Kossakowski scan, with populations
    ``1 - eps - eta`` on ``n``, ``eps`` on ``m`` and ``eta/(d-2)`` elsewhere;
    ``eps_schedule`` holds ``log(eps)`` values (see
    :func:`default_log_eps_schedule`).  The instant is reported divergent when
    the witness probe falls below ``threshold`` while still decreasing
    linearly in ``log(eps)``.
    """
    log_eps = default_log_eps_schedule() if eps_schedule is None else np.asarray(eps_schedule, dtype=float)
    m_op = build_superop(gen, t)
    sd = spectral_decompose(m_op)
    if not sd.ifp_is_state:
        raise NotAState(f"fixed point at t={t} is not a state")
    ifp = _full_rank(sd.ifp_matrix, "fixed point")
    log_ifp = matrix_log(ifp)
    d = gen.dim
    verdict = kossakowski_scan(gen, t, n_bases=basis_search, seed=seed)
    u, n0, m0 = verdict.witness_basis

    def trace(n, m, eta_):
        vals = []
        for le in log_eps:
            p, logp = probe_populations(d, float(le), n, m, eta_)
            vals.append(map_objective(m_op, u, p, logp, log_ifp))
        return np.array(vals)

    witness_vals = trace(n0, m0, eta)
    all_vals = [witness_vals]
    extra = {}
    for n in range(d):
        for m in range(d):
            if n != m and (n, m) != (n0, m0):
                vals = trace(n, m, eta)
                extra[(n, m)] = list(zip(log_eps.tolist(), vals.tolist()))
                all_vals.append(vals)
    min_probe = min(0.0, float(min(v.min() for v in all_vals)))
    divergent = _diverges(log_eps, witness_vals, threshold)
    eta_confirmed = None
    if d > 2:
        eta_confirmed = _diverges(log_eps, trace(n0, m0, eta / 10.0), threshold) == divergent
    pdiv_consistent = (not divergent) and min_probe >= -tol
    infimum = -math.inf if divergent else (0.0 if pdiv_consistent else min_probe)
    return MapEprVerdict(
        pdiv_consistent,
        divergent,
        list(zip(log_eps.tolist(), witness_vals.tolist())),
        infimum,
        min_probe,
        verdict,
        eta_confirmed,
        extra,
    )


def fisher_product(rho: np.ndarray, a: np.ndarray, b: np.ndarray, floor: float = EIGEN_FLOOR) -> float:
    """Quantum Fisher (Bogoliubov-Kubo-Mori) scalar product ``K_rho(A, B)``.

    In the eigenbasis of ``rho`` it reads ``sum_ij A_ji B_ij c_ij`` with
    ``c_ij = (log p_i - log p_j)/(p_i - p_j)`` and ``c_ii = 1/p_i``.
    """
    p, u = np.linalg.eigh(hermitian_part(np.asarray(rho, dtype=complex)))
    if p[0] <= floor:
        raise RankDeficient("Fisher product needs a full-rank reference state")
    a_e = u.conj().T @ a @ u
    b_e = u.conj().T @ b @ u
    pi, pj = p[:, None], p[None, :]
    x = (pi - pj) / pj
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    c = np.where(small, (1.0 - 0.5 * x + x * x / 3.0) / pj, np.log1p(safe) / (safe * pj))
    return float(np.real(np.sum(a_e.T * b_e * c)))


def _perturbed(rho, x, eps):
    sigma = hermitian_part(rho + eps * x)
    if np.linalg.eigvalsh(sigma)[0] < -1e-12:
        raise NotAState("rho + eps X is not positive semidefinite")
    return sigma


def expansion_residual(rho: np.ndarray, x: np.ndarray, eps: float) -> float:
    """``|D(rho + eps X || rho) - eps^2 K_rho(X, X) / 2|``, third order in ``eps``."""
    if eps == 0:
        return 0.0
    shifted = _perturbed(rho, x, eps)
    return abs(relative_entropy(shifted, rho) - 0.5 * eps**2 * fisher_product(rho, x, x))


def relative_entropy_asymmetry(rho: np.ndarray, x: np.ndarray, eps: float) -> float:
    """``|D(rho + eps X || rho) - D(rho || rho + eps X)|``."""
    if eps == 0:
        return 0.0
    shifted = _perturbed(rho, x, eps)
    return abs(relative_entropy(shifted, rho) - relative_entropy(rho, shifted))
