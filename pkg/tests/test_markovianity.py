import numpy as np
import pytest

from qthermo.errors import GridTooCoarse
from qthermo.generators import random_generator
from qthermo.markovianity import _witness_pairs, information_flow, nonmarkov_measure, positive_part_integral
from qthermo.phase_covariant import (
    PhaseCovariantRates,
    counterexample_rates,
    make_generator,
    pdiv_onset,
    propagate_bloch,
)
from qthermo.propagation import uniform_grid
from qthermo.states import bloch_to_state, random_state, state_to_bloch, trace_distance

CE = counterexample_rates()
GRID = uniform_grid(5.0, 0.01)


def test_identical_states_have_constant_distance():
    rho = random_state(2, np.random.default_rng(0))
    flow = information_flow(CE, (rho, rho, 0.7), GRID)
    assert np.allclose([s.distance for s in flow], 0.4)
    assert np.allclose([s.derivative for s in flow], 0.0, atol=1e-12)


def test_pdiv_dynamics_never_gain_distinguishability():
    rng = np.random.default_rng(1)
    gen = random_generator(2, rng)
    for _ in range(10):
        pair = (random_state(2, rng), random_state(2, rng), 0.5)
        assert max(s.derivative for s in information_flow(gen, pair, GRID[:101])) <= 1e-8
    rates = PhaseCovariantRates(0.2, 0.8, 0.1)
    pair = (bloch_to_state([0.9, 0, 0]), bloch_to_state([-0.9, 0, 0]), 0.5)
    assert max(s.derivative for s in information_flow(rates, pair, GRID)) <= 1e-8


def test_backflow_after_onset():
    _, (r1, r2, p1) = nonmarkov_measure(CE, 5, 5, GRID, return_best=True)
    flow = information_flow(CE, (r1, r2, p1), GRID)
    onset = pdiv_onset(CE, 1.0, 2.0)
    pos = [s for s in flow if s.derivative > 1e-10]
    assert pos and all(s.t > onset - 0.02 for s in pos)


def test_generator_and_rates_routes_agree():
    rng = np.random.default_rng(5)
    pair = (random_state(2, rng), random_state(2, rng), 0.3)
    a = information_flow(CE, pair, GRID[:201])
    b = information_flow(make_generator(CE), pair, GRID[:201])
    assert np.allclose([s.distance for s in a], [s.distance for s in b], atol=1e-9)


def test_derivative_is_central_difference():
    rng = np.random.default_rng(6)
    pair = (random_state(2, rng), random_state(2, rng), 0.5)
    flow = information_flow(CE, pair, GRID)
    d = np.array([s.distance for s in flow])
    k = 100
    assert np.isclose(flow[k].derivative, (d[k + 1] - d[k - 1]) / 0.02)


def test_grid_checks():
    rho = random_state(2, np.random.default_rng(0))
    with pytest.raises(GridTooCoarse):
        information_flow(CE, (rho, rho, 0.5), [0.0, 0.1])
    with pytest.raises(GridTooCoarse):
        information_flow(CE, (rho, rho, 0.5), [0.0, 0.1, 0.3])


def test_positive_part_integral():
    t = np.linspace(0, 1, 11)
    assert positive_part_integral(t, -np.ones(11)) == 0.0
    assert np.isclose(positive_part_integral(t, np.ones(11)), 1.0)
    # linear derivative crossing zero at 0.5: integral of max(2t - 1, 0) = 0.25
    assert np.isclose(positive_part_integral(t, 2 * t - 1), 0.25)
    t = np.linspace(0, 1, 4)
    assert np.isclose(positive_part_integral(t, 2 * t - 1), 0.25)


def test_measure_values():
    assert nonmarkov_measure(CE, 20, 5, GRID) > 0
    assert nonmarkov_measure(PhaseCovariantRates(0.2, 0.8, 0.0), 20, 5, GRID) <= 1e-8
    gen = random_generator(3, np.random.default_rng(2))
    assert nonmarkov_measure(gen, 5, 3, GRID[:101]) <= 1e-8
    with pytest.raises(ValueError):
        nonmarkov_measure(CE, 0, 1, GRID)


def test_measure_monotone_in_samples():
    vals = [nonmarkov_measure(CE, n, 3, GRID, n_witness_times=0) for n in (5, 10, 20)]
    assert vals[0] <= vals[1] <= vals[2]
    with_witness = [nonmarkov_measure(CE, n, 3, GRID) for n in (5, 10)]
    assert with_witness[0] <= with_witness[1]


def test_half_prior_integrand_is_trace_distance_derivative():
    rng = np.random.default_rng(8)
    r1, r2 = random_state(2, rng), random_state(2, rng)
    flow = information_flow(CE, (r1, r2, 0.5), GRID[:51])
    v1 = propagate_bloch(CE, state_to_bloch(r1), GRID[:51])
    v2 = propagate_bloch(CE, state_to_bloch(r2), GRID[:51])
    td = [trace_distance(bloch_to_state(a), bloch_to_state(b)) for a, b in zip(v1, v2)]
    assert np.allclose([s.distance for s in flow], td, atol=1e-12)


def test_witness_pairs_skip_non_invertible_maps():
    # strong dephasing plus amplitude damping drives the propagator to rank one;
    # negative dephasing keeps the Kossakowski condition violated
    rates = PhaseCovariantRates(0.0, 40.0, -0.05)
    assert _witness_pairs(make_generator(rates), uniform_grid(5.0, 0.01), 3, 0) == []
