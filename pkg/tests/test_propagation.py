import numpy as np
import pytest

from qthermo.errors import StepRejected
from qthermo.generators import GeneratorSpec, apply_generator, instantaneous_fixed_point, random_generator
from qthermo.phase_covariant import counterexample_rates, make_generator, propagate_bloch
from qthermo.propagation import (
    Trajectory,
    attach_epr,
    instantaneous_map_step,
    integrate,
    propagator,
    rk4_vec,
    uniform_grid,
)
from qthermo.states import SIGMA_Z, bloch_to_state, random_state, state_to_bloch

CE = counterexample_rates()
GEN = make_generator(CE)


def test_uniform_grid():
    g = uniform_grid(5.0, 0.1)
    assert len(g) == 51 and g[-1] == 5.0
    with pytest.raises(ValueError):
        uniform_grid(5.0, 0.3)


def test_zero_generator_is_constant():
    gen = GeneratorSpec(2, channels=((SIGMA_Z, 0.0),))
    rho = random_state(2, np.random.default_rng(0))
    traj = integrate(gen, rho, 1.0, 0.1)
    assert np.allclose(traj.states, rho, atol=1e-15)


def test_matches_closed_form():
    rng = np.random.default_rng(1)
    v0 = rng.normal(size=(5, 3))
    v0 *= 0.9 / np.linalg.norm(v0, axis=1, keepdims=True)
    traj = integrate(GEN, bloch_to_state(v0), 5.0, 1e-3)
    ref = propagate_bloch(CE, v0, traj.tgrid)
    assert np.max(np.abs(state_to_bloch(traj.states) - ref)) < 1e-7


def test_fourth_order_convergence():
    v0 = np.array([0.5, 0.2, 0.4])
    ends = [state_to_bloch(integrate(GEN, bloch_to_state(v0), 5.0, dt).states[-1]) for dt in (0.1, 0.05, 0.025)]
    e1 = np.linalg.norm(ends[0] - ends[2])
    e2 = np.linalg.norm(ends[1] - ends[2])
    assert e1 / e2 >= 14


def test_trace_hermiticity_and_ball():
    rng = np.random.default_rng(2)
    v0 = rng.normal(size=(20, 3))
    v0 /= np.linalg.norm(v0, axis=1, keepdims=True)
    traj = integrate(GEN, bloch_to_state(0.999 * v0), 5.0, 1e-2)
    tr = np.trace(traj.states, axis1=-2, axis2=-1)
    assert np.max(np.abs(tr - 1)) < 1e-10
    assert np.all(traj.states == np.swapaxes(traj.states.conj(), -1, -2))
    assert np.linalg.norm(state_to_bloch(traj.states), axis=-1).max() <= 1 + 1e-9


def test_step_rejected_for_leaky_generator():
    # RK4 conserves the trace of any trace-destroying generator, so the guard can
    # only fire for a corrupted one: overwrite the cached dissipator block
    rho = random_state(2, np.random.default_rng(0))
    leaky = GeneratorSpec(2, channels=((SIGMA_Z, 1.0),))
    object.__setattr__(leaky, "_diss_blocks", (np.diag([-9.0, 0, 0, 0]).astype(complex),))
    with pytest.raises(StepRejected):
        rk4_vec(leaky, rho, np.linspace(0, 1.0, 3))


def test_attach_epr_and_samples():
    traj = integrate(GEN, bloch_to_state([0.3, 0, 0.1]), 1.0, 0.1, with_epr=True)
    assert np.allclose(traj.sigma, traj.dS + traj.flow)
    samples = traj.epr_samples()
    assert len(samples) == 11 and samples[0].t == 0.0
    assert all(abs(s.sigma - (s.dS + s.flow)) < 1e-9 for s in samples)
    # boundary states give NaN instead of an error
    edge = attach_epr(GEN, Trajectory(traj.tgrid, np.repeat(bloch_to_state([0, 0, 1])[None], 11, axis=0)))
    assert np.all(np.isnan(edge.sigma))


def test_instantaneous_map_step():
    rng = np.random.default_rng(3)
    rho = random_state(2, rng)
    assert np.allclose(instantaneous_map_step(GEN, 1.5, rho, 0.0), rho)
    ifp = instantaneous_fixed_point(GEN, 1.5)
    assert np.allclose(instantaneous_map_step(GEN, 1.5, ifp, 2.7), ifp, atol=1e-10)
    lr = apply_generator(GEN, 1.5, rho)
    errs = [np.linalg.norm((instantaneous_map_step(GEN, 1.5, rho, tau) - rho) / tau - lr) for tau in (1e-3, 1e-4)]
    assert errs[1] < errs[0] and 8 < errs[0] / errs[1] < 12


def test_propagator_is_the_dynamical_map():
    rng = np.random.default_rng(4)
    gen = random_generator(2, rng)
    phi = propagator(gen, 1.0, 1e-3)
    rho = random_state(2, rng)
    direct = integrate(gen, rho, 1.0, 1e-3).states[-1]
    out = (phi @ rho.T.reshape(-1)).reshape(2, 2).T
    assert np.allclose(out, direct, atol=1e-12)
