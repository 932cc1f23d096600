import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bloch_ode, counterexample_gz
from qthermo.entropy import epr_qubit
from qthermo.errors import ComplexRoot, DegenerateFixedPoint, NotAState, OutOfDomain
from qthermo.phase_covariant import (
    PhaseCovariantRates,
    Region,
    appendix_c_bounds,
    bloch_velocity,
    counterexample_rates,
    cp_conditions,
    decay_functions,
    epr_bloch_closed_form,
    ifp_bloch,
    make_generator,
    pdiv_conditions,
    pdiv_onset,
    propagate_bloch,
    region_classify,
    region_d_bound_coefficients,
    region_d_lower_bound,
)
from qthermo.propagation import integrate
from qthermo.states import bloch_to_state, state_to_bloch

CE = counterexample_rates()


def test_counterexample_schedule():
    assert CE.gamma_z(0.5) == 0.0
    assert np.isclose(CE.gamma_z(1.5), -0.11)
    assert np.isclose(CE.gamma_z(3.0), -0.22)
    mu1, mu2 = CE.eigenvalue_real_parts(np.linspace(0, 5, 501))
    assert np.all(mu1 == -1.0)
    assert np.isclose(mu2.min(), -0.5) and np.isclose(mu2.max(), -0.06)


def test_decay_functions_closed_forms():
    t = np.linspace(0, 1, 11)
    df = decay_functions(CE, t)
    assert np.allclose(df.lam, np.exp(-0.5 * t), atol=1e-12)
    assert np.allclose(df.lam_z, np.exp(-t), atol=1e-12)
    assert np.allclose(df.t_z, -0.6 * (1 - np.exp(-t)), atol=1e-12)
    assert tuple(decay_functions(CE, 0.0)) == (1.0, 1.0, 0.0, 0.0)
    assert np.isclose(decay_functions(CE, 1.5).lam, np.exp(0.22 - 0.94 * 1.5 + 0.22 * 1.5**2), atol=1e-12)
    # t_z for a time-dependent g_+ against direct quadrature of its definition
    from scipy.integrate import quad

    rates = PhaseCovariantRates(CE.gamma_z.__class__.linear_interpolant([0, 2], [0.1, 0.5]), 0.3, 0.0)
    t_end = 1.7
    G = lambda s: rates.gamma_plus.integral(s) + 0.3 * s  # noqa: E731
    ref, _ = quad(lambda s: np.exp(-(G(t_end) - G(s))) * (rates.gamma_plus(s) - 0.3), 0, t_end, epsabs=1e-13)
    assert abs(decay_functions(rates, t_end).t_z - ref) < 1e-10


def test_propagate_bloch_examples():
    v = propagate_bloch(CE, [0, 0, -0.6], np.linspace(0, 5, 11))
    assert np.allclose(v, [0, 0, -0.6], atol=1e-14)
    assert np.allclose(propagate_bloch(CE, [1, 0, 0], 1.0), [np.exp(-0.5), 0, -0.6 * (1 - np.exp(-1))], atol=1e-12)


def test_propagate_bloch_matches_ode_oracle():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 5, 251)
    for _ in range(50):
        v0 = rng.normal(size=3)
        v0 *= rng.uniform() / np.linalg.norm(v0)
        ref = bloch_ode(lambda s: 0.2, lambda s: 0.8, counterexample_gz, lambda s: 0.0, v0, t)
        assert np.max(np.abs(propagate_bloch(CE, v0, t) - ref)) < 1e-7


def test_rotation_direction_matches_equations_of_motion():
    rates = PhaseCovariantRates(0.1, 0.3, 0.05, 1.3)
    v0 = np.array([0.4, -0.2, 0.1])
    t = np.linspace(0, 3, 61)
    ref = bloch_ode(lambda s: 0.1, lambda s: 0.3, lambda s: 0.05, lambda s: 1.3, v0, t, breaks=())
    assert np.max(np.abs(propagate_bloch(rates, v0, t) - ref)) < 1e-9
    # the velocity field is the derivative of the closed-form solution
    h = 1e-5
    fd = (propagate_bloch(rates, v0, 1.0 + h) - propagate_bloch(rates, v0, 1.0 - h)) / (2 * h)
    assert np.allclose(fd, bloch_velocity(rates, 1.0, propagate_bloch(rates, v0, 1.0)), atol=1e-8)


def test_ifp_bloch():
    assert np.allclose(ifp_bloch(CE, 2.0), [0, 0, -0.6])
    assert np.allclose(ifp_bloch(PhaseCovariantRates(0.3, 0.3, 0.1), 0.0), 0)
    assert np.allclose(ifp_bloch(PhaseCovariantRates(0.8, 0.2, 0.0), 0.0), [0, 0, 0.6])
    with pytest.raises(DegenerateFixedPoint):
        ifp_bloch(PhaseCovariantRates(0.0, 0.0, 1.0), 0.0)
    with pytest.raises(NotAState):
        ifp_bloch(PhaseCovariantRates(0.5, -0.2, 0.0), 0.0)


def test_pdiv_conditions():
    c = pdiv_conditions(CE, 0.5)
    assert c.cond1 and c.cond2 and np.isclose(c.values[2], 0.4)
    c = pdiv_conditions(CE, 2.5)
    assert c.cond1 and not c.cond2 and np.isclose(c.values[2], -0.04)
    assert abs(pdiv_onset(CE, 1.0, 2.0) - (1 + 0.4 / 0.44)) < 1e-10
    with pytest.raises(ComplexRoot):
        pdiv_conditions(PhaseCovariantRates(0.5, -0.2, 0.0), 0.0)


def test_cp_conditions():
    f1, f2 = cp_conditions(CE, 0.0)
    assert f1 == 0.0 and f2 == 0.0
    t = np.linspace(0, 5, 500)
    f1, f2 = cp_conditions(CE, t)
    assert f1.max() <= 1e-12 and f2.max() <= 1e-12
    bad = PhaseCovariantRates(0.2, 0.8, -0.3)
    _, f2 = cp_conditions(bad, np.array([0.01, 0.05, 0.1]))
    assert np.all(f2 > 0)


def test_contraction_bounds():
    x0, p0 = appendix_c_bounds(CE, 0.0)
    assert np.isclose(x0, -0.6) and p0 == 1.0
    x0, p0 = appendix_c_bounds(CE, 1e-7)
    assert abs(x0 + 0.6) < 1e-6 and abs(p0 - 1) < 1e-6
    t = np.linspace(0.001, 5, 5000)
    x0, p0 = appendix_c_bounds(CE, t)
    assert x0.min() >= -0.6 - 1e-9 and x0.max() <= 0
    assert p0[t > 1].max() < 0.64 and p0[t > 1.5].max() < 0.5329


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(0.01, 5))
def test_norm_bounded_by_sqrt_p0(x, y, z, t):
    v0 = np.array([x, y, z])
    n = np.linalg.norm(v0)
    if n > 1:
        v0 /= n
    _, p0 = appendix_c_bounds(CE, t)
    assert np.linalg.norm(propagate_bloch(CE, v0, t)) <= np.sqrt(p0) + 1e-9


def test_region_classify_examples_and_ties():
    vs = [0, 0, -0.6]
    assert region_classify([0, 0, 0.5], vs) is Region.A
    assert region_classify([0, 0, -0.8], vs) is Region.B
    assert region_classify([0.7, 0, -0.3], vs) is Region.D
    assert region_classify([0.2, 0, -0.3], vs) is Region.C
    assert region_classify([0.9, 0, 0.0], vs) is Region.A
    assert region_classify([0.5, 0, -0.6], vs) is Region.B
    with pytest.raises(OutOfDomain):
        region_classify([0, 0, 0], [0, 0, 0.3])


def test_region_d_lower_bound():
    assert region_d_lower_bound(-0.6, "early") == 0.0
    assert region_d_lower_bound(-0.6, "late") == 0.0
    assert np.isclose(region_d_lower_bound(-0.3, "early"), 0.1695)
    assert np.isclose(region_d_lower_bound(-0.3, "late"), 0.1101)
    for vz in np.linspace(-0.6, -1e-6, 50):
        assert region_d_lower_bound(vz, "early") >= 0 and region_d_lower_bound(vz, "late") >= 0
    with pytest.raises(OutOfDomain):
        region_d_lower_bound(0.1, "early")
    with pytest.raises(OutOfDomain):
        region_d_lower_bound(-0.7, "late")


def test_region_d_coefficients_round_conservatively():
    # early: mu2 <= -0.5 + 0.22 * 0.5 * 2 ... the largest mu2 on (1, 1.5] is -0.28, |v| <= 0.8
    early = region_d_bound_coefficients(-1.0, -0.28, 0.8, -0.6)
    late = region_d_bound_coefficients(-1.0, -0.06, 0.73, -0.6)
    assert early[0] <= 1.05 + 1e-2 and early[1] >= 0.88
    assert late[0] <= 1.21 and late[1] >= 0.73
    # rounded bound is below the unrounded one over the domain
    for vz in np.linspace(-0.6, 0, 31):
        assert (vz + 0.6) * (1.05 * vz + 0.88) <= (vz + 0.6) * (early[0] * vz + early[1]) + 1e-12
        assert (vz + 0.6) * (1.21 * vz + 0.73) <= (vz + 0.6) * (late[0] * vz + late[1]) + 1e-12


def test_closed_form_epr_agrees_with_r_vector_form():
    rng = np.random.default_rng(3)
    rates = PhaseCovariantRates(0.2, 0.8, -0.1, 0.7)
    v = rng.normal(size=(200, 3))
    v *= 0.99 * rng.uniform(size=(200, 1)) / np.linalg.norm(v, axis=1, keepdims=True)
    a = epr_bloch_closed_form(rates, 0.0, v)
    b = epr_qubit(v, ifp_bloch(rates, 0.0), bloch_velocity(rates, 0.0, v))
    assert np.allclose(a, b, atol=1e-12)


def test_rotation_direction_matches_master_equation():
    # independent route: integrate the density matrix under the full generator
    rates = PhaseCovariantRates(0.1, 0.3, 0.05, 1.3)
    v0 = np.array([0.4, -0.2, 0.1])
    traj = integrate(make_generator(rates), bloch_to_state(v0), 2.0, 1e-3)
    assert np.max(np.abs(state_to_bloch(traj.states) - propagate_bloch(rates, v0, traj.tgrid))) < 1e-10
