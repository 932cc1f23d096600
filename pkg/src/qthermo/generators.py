"""Time-local generators in GKSL form and their superoperator matrices.

Convention
----------
Operators are vectorized by column stacking, ``vec(X) = X.T.reshape(-1)``, so
``vec(A X B) = (B^T kron A) vec(X)``.  Every superoperator matrix in the
package uses this convention.

A generator acts as

    L_t[X] = -i [H(t), X] + sum_k gamma_k(t) (L_k X L_k^+ - 1/2 {L_k^+ L_k, X})

with ``H(t) = sum_j f_j(t) H_j``.  Rates may be negative; nothing here
assumes complete positivity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np

from .errors import DefectiveGenerator, DimensionMismatch, NonUniqueIFP
from .schedules import as_schedule
from .states import hermitian_part, is_hermitian, random_hermitian, random_state, random_unitary

NULL_REL_TOL = 1e-9
IFP_TRACE_TOL = 1e-12
NOT_A_STATE_TOL = 1e-9
DEFECTIVE_COND = 1e12


def vec(x: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization; accepts stacks ``(..., d, d)``."""
    x = np.asarray(x)
    return np.swapaxes(x, -1, -2).reshape(x.shape[:-2] + (-1,))


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[-1])))
    return np.swapaxes(v.reshape(v.shape[:-1] + (dim, dim)), -1, -2)


@dataclass(frozen=True)
class GeneratorSpec:
    """GKSL-form generator with time-dependent coefficients.

    ``hamiltonian`` is a sequence of ``(H_j, f_j)`` terms and ``channels`` a
    sequence of ``(L_k, gamma_k)`` pairs; the coefficients are callables of
    time (numbers are promoted to constant schedules).
    """

    dim: int
    hamiltonian: tuple = ()
    channels: tuple = ()
    name: str = ""

    def __post_init__(self):
        d = self.dim
        ham = []
        for h, f in self.hamiltonian:
            h = np.array(h, dtype=complex)
            if h.shape != (d, d):
                raise DimensionMismatch(f"Hamiltonian term has shape {h.shape}, expected {(d, d)}")
            if not is_hermitian(h):
                raise ValueError("Hamiltonian terms must be Hermitian")
            h.setflags(write=False)
            ham.append((h, as_schedule(f)))
        chans = []
        for op, rate in self.channels:
            op = np.array(op, dtype=complex)
            if op.shape != (d, d):
                raise DimensionMismatch(f"jump operator has shape {op.shape}, expected {(d, d)}")
            op.setflags(write=False)
            chans.append((op, as_schedule(rate)))
        object.__setattr__(self, "hamiltonian", tuple(ham))
        object.__setattr__(self, "channels", tuple(chans))
        # superoperator blocks of every term, combined with the coefficients in build_superop
        eye = np.eye(d)
        object.__setattr__(self, "_ham_blocks", tuple(-1j * (np.kron(eye, h) - np.kron(h.T, eye)) for h, _ in ham))
        blocks = []
        for op, _ in chans:
            ld = op.conj().T @ op
            blocks.append(np.kron(op.conj(), op) - 0.5 * np.kron(eye, ld) - 0.5 * np.kron(ld.T, eye))
        object.__setattr__(self, "_diss_blocks", tuple(blocks))

    def hamiltonian_at(self, t: float) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for hj, f in self.hamiltonian:
            h += f(t) * hj
        return h

    def rates_at(self, t: float) -> np.ndarray:
        return np.array([float(rate(t)) for _, rate in self.channels])


@dataclass(frozen=True)
class SuperopMatrix:
    matrix: np.ndarray
    t: float

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def act(self, x: np.ndarray) -> np.ndarray:
        return unvec(vec(x) @ self.matrix.T, self.dim)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigensystem of ``L_t``.

    ``ifp`` is the trace-one fixed point, or ``None`` when the Hermitian
    null vector is not positive semidefinite (``ifp_is_state`` is then False
    and ``ifp_matrix`` still holds the trace-one Hermitian null vector).
    """

    t: float
    eigenvalues: np.ndarray
    eigenmatrices: np.ndarray
    ifp_matrix: np.ndarray
    ifp_is_state: bool
    null_index: int
    condition: float = field(default=np.nan)

    @property
    def ifp(self) -> np.ndarray | None:
        return self.ifp_matrix if self.ifp_is_state else None

    @property
    def ifp_bloch(self) -> np.ndarray | None:
        if self.ifp_matrix.shape != (2, 2):
            return None
        from .states import state_to_bloch

        return state_to_bloch(self.ifp_matrix)


def build_superop(gen: GeneratorSpec, t: float) -> SuperopMatrix:
    d = gen.dim
    m = np.zeros((d * d, d * d), dtype=complex)
    for block, (_, f) in zip(gen._ham_blocks, gen.hamiltonian):
        m += f(t) * block
    for block, (_, rate) in zip(gen._diss_blocks, gen.channels):
        g = float(rate(t))
        if g != 0.0:
            m += g * block
    return SuperopMatrix(m, float(t))


def apply_generator(gen: GeneratorSpec, t: float, x: np.ndarray) -> np.ndarray:
    """Direct GKSL evaluation of ``L_t[X]``; ``X`` may be stacked ``(..., d, d)``."""
    x = np.asarray(x, dtype=complex)
    if x.shape[-2:] != (gen.dim, gen.dim):
        raise DimensionMismatch(f"operator shape {x.shape[-2:]} does not match dim {gen.dim}")
    h = gen.hamiltonian_at(t)
    out = -1j * (h @ x - x @ h)
    for op, rate in gen.channels:
        g = float(rate(t))
        if g == 0.0:
            continue
        od = op.conj().T
        ld = od @ op
        out = out + g * (op @ x @ od - 0.5 * (ld @ x + x @ ld))
    return out


def apply_adjoint(gen: GeneratorSpec, t: float, a: np.ndarray) -> np.ndarray:
    """Heisenberg-picture generator ``L_t^+[A]`` from the GKSL data."""
    a = np.asarray(a, dtype=complex)
    h = gen.hamiltonian_at(t)
    out = 1j * (h @ a - a @ h)
    for op, rate in gen.channels:
        g = float(rate(t))
        od = op.conj().T
        ld = od @ op
        out = out + g * (od @ a @ op - 0.5 * (ld @ a + a @ ld))
    return out


def spectral_decompose(m: SuperopMatrix) -> SpectralDecomposition:
    """Full eigensystem and instantaneous fixed point of a superoperator.

    Raises
    ------
    DefectiveGenerator
        Eigenvector matrix condition number above 1e12.
    NonUniqueIFP
        Null space of dimension other than one, or a null vector with
        vanishing trace.
    """
    d = m.dim
    lam, vecs = np.linalg.eig(m.matrix)
    cond = float(np.linalg.cond(vecs))
    if not np.isfinite(cond) or cond > DEFECTIVE_COND:
        raise DefectiveGenerator(f"eigenvector matrix condition number {cond:.3e}")
    scale = np.max(np.abs(lam))
    null = np.flatnonzero(np.abs(lam) <= NULL_REL_TOL * scale) if scale > 0 else np.arange(lam.size)
    if null.size != 1:
        raise NonUniqueIFP(f"null space has dimension {null.size}")
    k = int(null[0])
    mats = unvec(vecs.T, d)
    mats = mats / np.linalg.norm(mats, axis=(1, 2))[:, None, None]
    x = mats[k]
    tr = np.trace(x)
    if abs(tr) < IFP_TRACE_TOL:
        raise NonUniqueIFP("null vector is traceless")
    ifp = hermitian_part(x / tr)
    is_state = bool(np.linalg.eigvalsh(ifp)[0] >= -NOT_A_STATE_TOL)
    lam = lam.copy()
    lam[k] = 0.0
    return SpectralDecomposition(m.t, lam, mats, ifp, is_state, k, cond)


def instantaneous_fixed_point(gen: GeneratorSpec, t: float) -> np.ndarray:
    """Trace-one fixed point of ``L_t``; raises NotAState if it is not positive."""
    from .errors import NotAState

    sd = spectral_decompose(build_superop(gen, t))
    if not sd.ifp_is_state:
        raise NotAState(f"fixed point at t={t} is not a state")
    return sd.ifp_matrix


def adjoint_check(
    gen: GeneratorSpec,
    t: float,
    superop: SuperopMatrix | None = None,
    n_pairs: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
) -> bool:
    """Check the duality ``Tr{A L[rho]} = Tr{L^+[A] rho}`` and ``L^+[1] = 0``.

    The forward action comes from ``superop`` (default: built from ``gen``)
    while the adjoint is evaluated independently from the GKSL data, so a
    corrupted matrix fails the check.
    """
    m = build_superop(gen, t) if superop is None else superop
    d = gen.dim
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(m.matrix))))
    # identity must be annihilated by the adjoint of the matrix itself
    adj_identity = unvec(m.matrix.conj().T @ vec(np.eye(d)), d)
    if np.max(np.abs(adj_identity)) > tol * scale:
        return False
    if np.max(np.abs(apply_adjoint(gen, t, np.eye(d)))) > tol * scale:
        return False
    for _ in range(n_pairs):
        a = random_hermitian(d, rng)
        rho = random_state(d, rng)
        lhs = np.trace(a @ m.act(rho))
        rhs = np.trace(apply_adjoint(gen, t, a) @ rho)
        if abs(lhs - rhs) > tol * scale * max(1.0, np.linalg.norm(a)):
            return False
    return True


@dataclass(frozen=True)
class PDivVerdict:
    """Outcome of a Kossakowski scan.

    ``witness_basis`` is ``(U, n, m)``: the columns of ``U`` form the basis
    and ``<m|L(|n><n|)|m>`` is the most negative element found.
    """

    pdiv: bool
    worst_value: float
    witness_basis: tuple | None


def kossakowski_matrix(m: SuperopMatrix, basis: np.ndarray) -> np.ndarray:
    """``K[j, i] = <j| L(|i><i|) |j>`` for the columns of ``basis``."""
    d = m.dim
    projectors = np.einsum("ai,bi->iab", basis, basis.conj())
    images = unvec(vec(projectors) @ m.matrix.T, d)
    return np.real(np.einsum("aj,iab,bj->ji", basis.conj(), images, basis))


def kossakowski_scan(
    gen: GeneratorSpec,
    t: float,
    n_bases: int = 200,
    seed: int = 0,
    refine: bool = True,
    tol: float = 1e-10,
) -> PDivVerdict:
    """Randomized test of the Kossakowski condition at time ``t``.

    Samples ``n_bases`` Haar-random orthonormal bases plus the computational
    basis and reports the minimum off-diagonal element. A negative value is a
    certificate of non-P-divisibility; a nonnegative one is only evidence.
    With ``refine`` the worst basis is polished by local minimization, which
    can only lower the reported minimum.
    """
    if n_bases < 1:
        raise ValueError("n_bases must be at least 1")
    m = build_superop(gen, t)
    d = gen.dim
    rng = np.random.default_rng(seed)
    offdiag = ~np.eye(d, dtype=bool)
    best = (np.inf, None)
    for k in range(n_bases + 1):
        u = np.eye(d, dtype=complex) if k == 0 else random_unitary(d, rng)
        km = kossakowski_matrix(m, u)
        km_off = np.where(offdiag, km, np.inf)
        j, i = np.unravel_index(np.argmin(km_off), km.shape)
        if km_off[j, i] < best[0]:
            best = (float(km_off[j, i]), (u, int(i), int(j)))
    if refine:
        best = _refine_basis(m, best)
    value, witness = best
    return PDivVerdict(bool(value >= -tol), value, witness)


def _refine_basis(m: SuperopMatrix, best):
    from scipy.linalg import expm
    from scipy.optimize import minimize

    value, (u0, n, mm) = best
    d = m.dim
    iu = np.triu_indices(d, 1)

    def unitary(params):
        h = np.zeros((d, d), dtype=complex)
        nd = len(iu[0])
        h[iu] = params[:nd] + 1j * params[nd : 2 * nd]
        h = h + h.conj().T + np.diag(params[2 * nd :])
        return u0 @ expm(1j * h)

    def element(params):
        return kossakowski_matrix(m, unitary(params))[mm, n]

    x0 = np.zeros(d * d)
    res = minimize(element, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    if res.fun < value:
        return float(res.fun), (unitary(res.x), n, mm)
    return best


def random_generator(
    dim: int,
    rng: np.random.Generator,
    n_channels: int | None = None,
    rate_range: tuple[float, float] = (0.0, 1.0),
    hamiltonian: bool = True,
) -> GeneratorSpec:
    """Time-independent generator with Ginibre jump operators and uniform rates."""
    n_channels = dim * dim - 1 if n_channels is None else n_channels
    chans = []
    for _ in range(n_channels):
        op = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2 * dim)
        chans.append((op, float(rng.uniform(*rate_range))))
    ham = ((random_hermitian(dim, rng) / dim, 1.0),) if hamiltonian else ()
    return GeneratorSpec(dim, ham, tuple(chans), name="random")

