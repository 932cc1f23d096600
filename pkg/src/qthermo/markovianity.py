"""Information backflow between pairs of states.

The distinguishability of ``rho1`` (prior ``p1``) and ``rho2`` (prior
``1 - p1``) is the trace norm of the Helstrom matrix ``p1 rho1 - p2 rho2``.
Any temporal increase signals a flow of information back into the system.
The measure returned here maximizes the integrated increase over a finite
sample of pairs and priors, so it is a lower bound on the supremum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridTooCoarse
from .generators import GeneratorSpec, kossakowski_scan, unvec, vec
from .phase_covariant import PhaseCovariantRates, make_generator, propagate_bloch
from .propagation import propagator, rk4_vec
from .states import bloch_to_state, check_state, hermitian_part, random_state, random_unitary


@dataclass(frozen=True)
class FlowSample:
    t: float
    distance: float
    derivative: float


def _check_grid(tgrid) -> np.ndarray:
    t = np.asarray(tgrid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise GridTooCoarse("need a one-dimensional grid with at least three points")
    steps = np.diff(t)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise GridTooCoarse("time grid must be uniform and increasing")
    return t


def _evolve(dynamics, rhos: np.ndarray, t: np.ndarray) -> np.ndarray:
    """States at every grid time, shape ``(n_t, n, d, d)``; grid must start at 0."""
    if t[0] != 0.0:
        raise ValueError("time grid must start at t = 0")
    if isinstance(dynamics, PhaseCovariantRates):
        v0 = np.real(np.einsum("kij,nji->nk", _paulis(), rhos))
        return bloch_to_state(propagate_bloch(dynamics, v0, t))
    return rk4_vec(dynamics, rhos, t)


def _paulis():
    from .states import PAULIS

    return PAULIS


def _helstrom_norms(states: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``||p1 rho1(t) - p2 rho2(t)||`` for states ``(n_t, 2, d, d)`` and priors ``(n_w,)``."""
    delta = weights[None, :, None, None] * states[:, None, 0] - (1.0 - weights)[None, :, None, None] * states[:, None, 1]
    return np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(delta))), axis=-1)


def information_flow(dynamics, pair, tgrid) -> list[FlowSample]:
    """Helstrom norm along the evolved pair and its central-difference derivative.

    ``dynamics`` is a :class:`GeneratorSpec` (integrated with RK4 on the
    grid) or :class:`PhaseCovariantRates` (closed-form Bloch propagation).
    ``pair`` is ``(rho1, rho2, p1)``.
    """
    rho1, rho2, p1 = pair
    t = _check_grid(tgrid)
    rhos = np.stack([check_state(rho1), check_state(rho2)])
    states = _evolve(dynamics, rhos, t)
    dist = _helstrom_norms(states, np.array([float(p1)]))[:, 0]
    deriv = np.gradient(dist, t)
    return [FlowSample(float(a), float(b), float(c)) for a, b, c in zip(t, dist, deriv)]


def positive_part_integral(t: np.ndarray, deriv: np.ndarray) -> float:
    """Trapezoidal integral of ``max(deriv, 0)``, splitting cells at sign changes."""
    total = 0.0
    for k in range(len(t) - 1):
        a, b = deriv[k], deriv[k + 1]
        h = t[k + 1] - t[k]
        if a >= 0 and b >= 0:
            total += 0.5 * h * (a + b)
        elif a > 0 > b:
            total += 0.5 * a * h * a / (a - b)
        elif b > 0 > a:
            total += 0.5 * b * h * b / (b - a)
    return total


def _random_pair(d: int, rng: np.random.Generator):
    """Nearly orthogonal pure-ish states: antipodal directions slightly mixed."""
    u = random_unitary(d, rng)
    mix = rng.uniform(0.0, 0.2)
    r1 = (1 - mix) * np.outer(u[:, 0], u[:, 0].conj()) + mix * np.eye(d) / d
    r2 = (1 - mix) * np.outer(u[:, 1], u[:, 1].conj()) + mix * np.eye(d) / d
    if rng.uniform() < 0.3:
        r2 = random_state(d, rng)
    return r1, r2


def _witness_pairs(gen: GeneratorSpec, tgrid: np.ndarray, n_times: int, seed: int, weight: float = 0.9):
    """Pairs whose Helstrom matrix at a target time is ``w|n><n| - (1-w)|m><m|``.

    ``(n, m)`` comes from a Kossakowski scan at the target time; the initial
    Helstrom matrix is obtained by inverting the dynamical map and split into
    its positive and negative parts.
    """
    pairs = []
    d = gen.dim
    dt = tgrid[1] - tgrid[0]
    targets = np.linspace(tgrid[0], tgrid[-1], n_times + 2)[1:-1]
    for t_star in targets:
        t_star = tgrid[np.argmin(np.abs(tgrid - t_star))]
        verdict = kossakowski_scan(gen, t_star, n_bases=50, seed=seed)
        if verdict.pdiv or t_star <= 0:
            continue
        u, n, m = verdict.witness_basis
        target = weight * np.outer(u[:, n], u[:, n].conj()) - (1 - weight) * np.outer(u[:, m], u[:, m].conj())
        phi = propagator(gen, float(t_star), float(dt))
        if np.linalg.cond(phi) > 1e12:
            continue  # map (nearly) non-invertible at this instant
        delta0 = hermitian_part(unvec(np.linalg.solve(phi, vec(target)), d))
        p, w = np.linalg.eigh(delta0)
        pos, neg = p.clip(min=0), (-p).clip(min=0)
        if pos.sum() <= 0 or neg.sum() <= 0:
            continue
        scale = pos.sum() + neg.sum()
        rho1 = (w * (pos / pos.sum())) @ w.conj().T
        rho2 = (w * (neg / neg.sum())) @ w.conj().T
        pairs.append((hermitian_part(rho1), hermitian_part(rho2), float(pos.sum() / scale)))
    return pairs


def nonmarkov_measure(
    dynamics,
    n_pairs: int,
    n_weights: int,
    tgrid: Sequence[float],
    seed: int = 0,
    n_witness_times: int = 6,
    return_best: bool = False,
):
    """Sampled lower bound on the total information backflow.

    Random pairs are drawn from a seeded stream, so enlarging ``n_pairs``
    only adds candidates and never lowers the result.  Priors run over
    ``n_weights`` values in ``[0.1, 0.9]`` (only ``1/2`` when
    ``n_weights == 1``).  For generators that violate the Kossakowski
    condition somewhere on the grid, extra pairs are seeded from the
    violating basis at ``n_witness_times`` target times.
    """
    if n_pairs < 1 or n_weights < 1:
        raise ValueError("n_pairs and n_weights must be positive")
    t = _check_grid(tgrid)
    gen = make_generator(dynamics) if isinstance(dynamics, PhaseCovariantRates) else dynamics
    d = gen.dim
    weights = np.array([0.5]) if n_weights == 1 else np.linspace(0.1, 0.9, n_weights)
    rng = np.random.default_rng(seed)
    candidates = [(r1, r2, None) for r1, r2 in (_random_pair(d, rng) for _ in range(n_pairs))]
    if n_witness_times:
        candidates += [(r1, r2, p1) for r1, r2, p1 in _witness_pairs(gen, t, n_witness_times, seed)]
    best, best_info = 0.0, None
    for r1, r2, p1 in candidates:
        states = _evolve(dynamics, np.stack([r1, r2]), t)
        w = weights if p1 is None else np.array([p1])
        norms = _helstrom_norms(states, w)
        deriv = np.gradient(norms, t, axis=0)
        for j in range(len(w)):
            val = positive_part_integral(t, deriv[:, j])
            if val > best:
                best, best_info = val, (r1, r2, float(w[j]))
    if return_best:
        return best, best_info
    return best
