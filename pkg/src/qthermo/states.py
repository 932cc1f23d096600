"""Density matrices, Bloch parametrization and distances between states.

States are plain complex ``numpy`` arrays of shape ``(d, d)``.  Validation is
explicit (:func:`check_state`) rather than hidden in a wrapper class, so the
functions here compose with the batched arrays used by the integrators.

All logarithms are natural, entropies are in nats.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    BlochOutOfBall,
    BoundaryState,
    DimensionMismatch,
    NonHermitianInput,
    NotAState,
    SupportViolation,
    WrongDimension,
)

#: eigenvalues below this are treated as exact zeros (rank deficiency)
EIGEN_FLOOR = 1e-14

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: raising operator |0><1|; |0> is the +1 eigenvector of sigma_z
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


def dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(np.conj(a), -1, -2)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def _square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def check_state(rho: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a density matrix.

    Raises NonHermitianInput or NotAState when an invariant fails.
    """
    rho = _square(rho)
    if not is_hermitian(rho):
        raise NonHermitianInput("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NotAState(f"trace is {tr.real:.3e}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -psd_tol:
        raise NotAState("density matrix has a negative eigenvalue")
    return rho


def is_state(rho: np.ndarray, psd_tol: float = PSD_TOL) -> bool:
    try:
        check_state(rho, psd_tol)
    except (NotAState, NonHermitianInput, DimensionMismatch):
        return False
    return True


def matrix_log(rho: np.ndarray, floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Logarithm of a positive Hermitian matrix with eigenvalues clamped at ``floor``.

    Accepts stacked matrices of shape ``(..., d, d)``.
    """
    rho = np.asarray(rho, dtype=complex)
    if floor <= 0:
        raise ValueError("floor must be positive")
    if not is_hermitian(rho):
        raise NonHermitianInput("matrix_log needs a Hermitian argument")
    p, u = np.linalg.eigh(hermitian_part(rho))
    logp = np.log(np.maximum(p, floor))
    return (u * logp[..., None, :]) @ dagger(u)


def von_neumann_entropy(rho: np.ndarray) -> float:
    p = np.linalg.eigvalsh(hermitian_part(_square(rho)))
    p = p[p > EIGEN_FLOOR]
    return float(-np.sum(p * np.log(p)))


def relative_entropy(rho1: np.ndarray, rho2: np.ndarray, floor: float = EIGEN_FLOOR) -> float:
    """Quantum relative entropy ``Tr rho1 (log rho1 - log rho2)`` in nats.

    Raises
    ------
    SupportViolation
        If ``rho2`` has an eigenvalue below ``floor`` in a direction where
        ``rho1`` has weight above ``floor``. The divergence is reported
        instead of returning a huge but finite number.
    """
    rho1, rho2 = _square(rho1), _square(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    if not (is_hermitian(rho1) and is_hermitian(rho2)):
        raise NonHermitianInput("relative_entropy needs Hermitian arguments")
    p, _ = np.linalg.eigh(hermitian_part(rho1))
    q, v = np.linalg.eigh(hermitian_part(rho2))
    # weight of rho1 along each eigenvector of rho2
    weights = np.real(np.einsum("ij,ik,kj->j", v.conj(), rho1, v))
    null = q < floor
    if np.any(weights[null] > floor):
        raise SupportViolation("support of rho1 is not contained in the support of rho2")
    pos = p > floor
    s1 = float(np.sum(p[pos] * np.log(p[pos])))
    cross = float(np.sum(weights[~null] * np.log(q[~null])))
    return s1 - cross


def trace_norm(a: np.ndarray) -> float:
    a = _square(a)
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(a)))))


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    rho1, rho2 = _square(rho1), _square(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    return 0.5 * trace_norm(rho1 - rho2)


def helstrom_norm(rho1: np.ndarray, rho2: np.ndarray, p1: float) -> float:
    """Trace norm of the Helstrom matrix ``p1 rho1 - (1 - p1) rho2``.

    With ``p1 = 0.5`` this equals the trace distance, which already carries the
    factor one half.
    """
    rho1, rho2 = _square(rho1), _square(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    if not 0.0 <= p1 <= 1.0:
        raise ValueError("p1 must lie in [0, 1]")
    return trace_norm(p1 * rho1 - (1.0 - p1) * rho2)


def bloch_to_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise WrongDimension("Bloch vectors have three components")
    if np.any(np.linalg.norm(v, axis=-1) > 1.0 + 1e-12):
        raise BlochOutOfBall("|v| > 1")
    return 0.5 * (IDENTITY2 + np.tensordot(v, PAULIS, axes=([-1], [0])))


def state_to_bloch(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2, 2):
        raise WrongDimension("Bloch vectors exist for qubits only")
    return np.real(np.einsum("kij,...ji->...k", PAULIS, rho))


def r_vector(v, boundary_tol: float = 1e-12) -> np.ndarray:
    """Exponent vector ``r`` with ``rho = exp(r . sigma) / Z``.

    ``r = arctanh(|v|) v / |v|`` with the removable singularity ``r(0) = 0``.
    Works on stacked vectors of shape ``(..., 3)``.
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1)
    if np.any(n >= 1.0 - boundary_tol):
        raise BoundaryState("arctanh diverges on the Bloch sphere")
    return v * _atanh_ratio(n)[..., None]


def _atanh_ratio(x):
    """arctanh(x)/x, equal to 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-6
    safe = np.where(small, 0.5, x)
    # series arctanh(x)/x = 1 + x^2/3 + x^4/5 + ...
    return np.where(small, 1.0 + x * x / 3.0, np.arctanh(safe) / safe)


def random_state(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble density matrix ``G G^dagger / Tr``, full rank almost surely."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return hermitian_part(rho / np.trace(rho).real)


def random_hermitian(dim: int, rng: np.random.Generator, traceless: bool = False) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = hermitian_part(g)
    if traceless:
        h = h - np.trace(h) / dim * np.eye(dim)
    return h


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
