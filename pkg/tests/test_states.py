import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qthermo.errors import (
    BlochOutOfBall,
    BoundaryState,
    DimensionMismatch,
    NonHermitianInput,
    NotAState,
    SupportViolation,
    WrongDimension,
)
from qthermo.states import (
    SIGMA_X,
    SIGMA_Z,
    bloch_to_state,
    check_state,
    helstrom_norm,
    matrix_log,
    r_vector,
    random_state,
    relative_entropy,
    state_to_bloch,
    trace_distance,
)

seeds = st.integers(0, 2**32 - 1)
KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)


def test_matrix_log_examples():
    assert np.allclose(matrix_log(np.eye(2) / 2), -np.log(2) * np.eye(2), atol=1e-15)
    assert np.allclose(matrix_log(np.diag([0.75, 0.25])), np.diag(np.log([0.75, 0.25])), atol=1e-15)


def test_matrix_log_floor_and_hermiticity():
    out = matrix_log(KET0)
    assert np.isclose(out[1, 1].real, np.log(1e-14))
    with pytest.raises(NonHermitianInput):
        matrix_log(np.array([[0.5, 1.0], [0.0, 0.5]]))


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_exp_log_round_trip(seed, d):
    rho = random_state(d, np.random.default_rng(seed))
    assert np.allclose(expm(matrix_log(rho)), rho, atol=1e-10)


def test_relative_entropy_examples():
    rng = np.random.default_rng(3)
    rho = random_state(3, rng)
    assert abs(relative_entropy(rho, rho)) < 1e-12
    assert np.isclose(relative_entropy(KET0, np.eye(2) / 2), np.log(2), atol=1e-12)
    with pytest.raises(SupportViolation):
        relative_entropy(KET0, KET1)


def test_relative_entropy_allows_contained_support():
    # rho1 pure inside the support of a rank-2 qutrit rho2
    rho2 = np.diag([0.5, 0.5, 0.0]).astype(complex)
    rho1 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    assert np.isclose(relative_entropy(rho1, rho2), np.log(2))


def test_relative_entropy_nonnegative_on_random_pairs():
    rng = np.random.default_rng(11)
    vals = []
    for k in range(1000):
        d = 2 if k % 2 else 3
        a, b = random_state(d, rng), random_state(d, rng)
        vals.append(relative_entropy(a, b))
    vals = np.array(vals)
    assert vals.min() > 1e-8  # distinct Ginibre states are never equal


def test_trace_distance_examples():
    rho = random_state(2, np.random.default_rng(1))
    assert trace_distance(rho, rho) < 1e-15
    assert np.isclose(trace_distance(KET0, KET1), 1.0)
    assert np.isclose(trace_distance(np.eye(2) / 2, KET0), 0.5)
    with pytest.raises(DimensionMismatch):
        trace_distance(KET0, np.eye(3) / 3)


def test_helstrom_examples():
    rho = random_state(2, np.random.default_rng(2))
    assert np.isclose(helstrom_norm(KET0, KET1, 0.5), 1.0)
    assert np.isclose(helstrom_norm(rho, KET1, 1.0), 1.0)
    assert np.isclose(helstrom_norm(rho, rho, 0.7), 0.4)
    with pytest.raises(DimensionMismatch):
        helstrom_norm(KET0, np.eye(3) / 3, 0.5)


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_helstrom_half_equals_trace_distance(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_state(d, rng), random_state(d, rng)
    assert abs(helstrom_norm(a, b, 0.5) - trace_distance(a, b)) < 1e-12


def test_bloch_examples():
    assert np.allclose(bloch_to_state([0, 0, 0]), np.eye(2) / 2)
    assert np.allclose(bloch_to_state([0, 0, 1]), KET0)
    v = np.array([0.6, 0.0, -0.3])
    assert np.allclose(state_to_bloch(bloch_to_state(v)), v, atol=1e-14)
    assert np.allclose(bloch_to_state(v), 0.5 * (np.eye(2) + 0.6 * SIGMA_X - 0.3 * SIGMA_Z))
    with pytest.raises(BlochOutOfBall):
        bloch_to_state([0.8, 0.8, 0.0])
    with pytest.raises(WrongDimension):
        state_to_bloch(np.eye(3) / 3)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-1, 1),
    st.floats(-1, 1),
    st.floats(-1, 1),
)
def test_bloch_round_trip(x, y, z):
    v = np.array([x, y, z])
    n = np.linalg.norm(v)
    if n > 1:
        v = v / n
    assert np.allclose(state_to_bloch(bloch_to_state(v)), v, atol=1e-14, rtol=0)


def test_r_vector_examples():
    assert np.allclose(r_vector([0, 0, 0]), 0.0)
    assert np.allclose(r_vector([0, 0, -0.6]), [0, 0, -np.log(2)], atol=1e-15)
    with pytest.raises(BoundaryState):
        r_vector([0, 0, 0.999999999999])
    # tiny vectors use the removable limit arctanh(x)/x -> 1
    assert np.allclose(r_vector([1e-12, 0, 0]), [1e-12, 0, 0], rtol=1e-12)


def test_check_state_rejects_bad_matrices():
    with pytest.raises(NotAState):
        check_state(np.diag([0.7, 0.7]))
    with pytest.raises(NotAState):
        check_state(np.diag([1.2, -0.2]))
    with pytest.raises(NonHermitianInput):
        check_state(np.array([[0.5, 0.1], [0.2, 0.5]]))


def test_random_state_is_valid():
    rng = np.random.default_rng(0)
    for d in (2, 3, 5):
        check_state(random_state(d, rng))
    low = random_state(4, rng, rank=1)
    assert np.sum(np.linalg.eigvalsh(low) > 1e-12) == 1
