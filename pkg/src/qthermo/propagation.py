"""Fixed-step time evolution of master equations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import StepRejected
from .generators import GeneratorSpec, build_superop, spectral_decompose, unvec, vec
from .states import EIGEN_FLOOR, check_state, hermitian_part, matrix_log

TRACE_DRIFT_TOL = 1e-8


@dataclass
class Trajectory:
    """States on a uniform grid, optionally with fixed points and rates.

    ``states`` has shape ``(n_t, *batch, d, d)``; ``sigma``, ``dS`` and
    ``flow`` have shape ``(n_t, *batch)`` and hold NaN where the rate is
    undefined (fixed point not a state, or a rank-deficient state).
    """

    tgrid: np.ndarray
    states: np.ndarray
    ifps: np.ndarray | None = None
    sigma: np.ndarray | None = None
    dS: np.ndarray | None = None
    flow: np.ndarray | None = None

    @property
    def dt(self) -> float:
        return float(self.tgrid[1] - self.tgrid[0])

    def epr_samples(self):
        from .entropy import EprSample

        if self.sigma is None:
            raise ValueError("trajectory carries no entropy production")
        if self.sigma.ndim != 1:
            raise ValueError("epr_samples is defined for single trajectories")
        return [
            EprSample(float(t), float(s), float(a), float(b))
            for t, s, a, b in zip(self.tgrid, self.sigma, self.dS, self.flow)
        ]


def uniform_grid(t_end: float, dt: float) -> np.ndarray:
    if dt <= 0 or t_end <= 0:
        raise ValueError("t_end and dt must be positive")
    n = int(round(t_end / dt))
    if abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"dt = {dt} does not divide t_end = {t_end}")
    return np.linspace(0.0, t_end, n + 1)


def rk4_vec(gen: GeneratorSpec, x0: np.ndarray, tgrid: np.ndarray, physical: bool = True) -> np.ndarray:
    """Classical RK4 on stacked operators ``x0`` of shape ``(*batch, d, d)``.

    With ``physical`` each step re-symmetrizes and renormalizes the trace;
    a trace change above 1e-8 in a single step raises StepRejected.
    """
    d = gen.dim
    x = vec(np.asarray(x0, dtype=complex))
    out = np.empty((len(tgrid),) + x.shape, dtype=complex)
    out[0] = x
    diag = np.arange(d) * (d + 1)
    superop = _SuperopCache(gen)
    for k in range(len(tgrid) - 1):
        t, h = tgrid[k], tgrid[k + 1] - tgrid[k]
        m0, mh, m1 = superop(t), superop(t + 0.5 * h), superop(t + h)
        k1 = x @ m0.T
        k2 = (x + 0.5 * h * k1) @ mh.T
        k3 = (x + 0.5 * h * k2) @ mh.T
        k4 = (x + h * k3) @ m1.T
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if physical:
            tr = x[..., diag].sum(axis=-1)
            if np.max(np.abs(tr - 1.0)) > TRACE_DRIFT_TOL:
                raise StepRejected(f"trace drift {np.max(np.abs(tr - 1.0)):.2e} at t={t + h:.6g}")
            rho = hermitian_part(unvec(x, d))
            x = vec(rho / tr.real[..., None, None])
        out[k + 1] = x
    return unvec(out, d)


class _SuperopCache:
    def __init__(self, gen):
        self.gen = gen
        self.cache = {}

    def __call__(self, t):
        key = float(t)
        m = self.cache.get(key)
        if m is None:
            m = build_superop(self.gen, key).matrix
            if len(self.cache) > 4:
                self.cache.clear()
            self.cache[key] = m
        return m


def integrate(
    gen: GeneratorSpec,
    rho0: np.ndarray,
    t_end: float,
    dt: float,
    with_epr: bool = False,
) -> Trajectory:
    """Integrate ``d rho/dt = L_t[rho]`` with fixed-step RK4.

    ``rho0`` may be a single state or a stack ``(n, d, d)``.  With
    ``with_epr`` the fixed point and the entropy production are evaluated at
    every grid point.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    for r in rho0.reshape((-1,) + rho0.shape[-2:]):
        check_state(r)
    tgrid = uniform_grid(t_end, dt)
    states = rk4_vec(gen, rho0, tgrid)
    traj = Trajectory(tgrid, states)
    if with_epr:
        attach_epr(gen, traj)
    return traj


def attach_epr(gen: GeneratorSpec, traj: Trajectory) -> Trajectory:
    """Fill ``ifps``, ``sigma``, ``dS`` and ``flow`` on ``traj`` in place."""
    from .entropy import _split

    d = gen.dim
    batch = traj.states.shape[1:-2]
    ifps = np.full((len(traj.tgrid), d, d), np.nan, dtype=complex)
    ds = np.full((len(traj.tgrid),) + batch, np.nan)
    flow = np.full_like(ds, np.nan)
    for k, t in enumerate(traj.tgrid):
        m = build_superop(gen, t)
        sd = spectral_decompose(m)
        if not sd.ifp_is_state or np.linalg.eigvalsh(sd.ifp_matrix)[0] <= EIGEN_FLOOR:
            continue
        ifps[k] = sd.ifp_matrix
        rho = traj.states[k]
        ok = np.linalg.eigvalsh(rho)[..., 0] > EIGEN_FLOOR
        a, b = _split(m.act(rho), rho, matrix_log(sd.ifp_matrix))
        ds[k] = np.where(ok, a, np.nan)
        flow[k] = np.where(ok, b, np.nan)
    traj.ifps, traj.dS, traj.flow = ifps, ds, flow
    traj.sigma = ds + flow
    return traj


def instantaneous_map_step(gen: GeneratorSpec, t: float, rho: np.ndarray, tau: float) -> np.ndarray:
    """Apply ``exp(tau L_t)`` (generator frozen at ``t``) to ``rho``."""
    m = build_superop(gen, t)
    return unvec(expm(tau * m.matrix) @ vec(np.asarray(rho, dtype=complex)), gen.dim)


def propagator(gen: GeneratorSpec, t_end: float, dt: float) -> np.ndarray:
    """Superoperator matrix of the dynamical map ``Phi_{t_end}`` (column stacking)."""
    d = gen.dim
    basis = np.eye(d * d, dtype=complex).reshape(d * d, d, d).transpose(0, 2, 1)
    final = rk4_vec(gen, basis, uniform_grid(t_end, dt), physical=False)[-1]
    return vec(final).T
