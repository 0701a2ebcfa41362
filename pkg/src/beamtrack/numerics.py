"""Dense linear-algebra kernels used throughout beamtrack.

Conventions fixed here and relied on everywhere else:

* matrices are numpy arrays, C-contiguous, indexed ``[row, col]``;
* ``vec`` is **column-major** (Fortran order), so the identity
  ``vec(A X B) = (B^T kron A) vec(X)`` holds with ``numpy.kron``;
* a complex matrix ``G`` maps to the real stacked block matrix
  ``[[Re G, -Im G], [Im G, Re G]]`` acting on ``[Re h; Im h]`` vectors.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    IndefiniteMatrix,
    NotSymmetric,
    SingularB,
    ZeroMatrix,
)

__all__ = [
    "KroneckerFactorDims",
    "vec",
    "unvec",
    "matrix_sqrt_psd",
    "generalized_eig_sym",
    "kron_rearrange",
    "rank_one_factor",
    "complex_to_real_stacked",
]


@dataclass(frozen=True)
class KroneckerFactorDims:
    """Shapes of the two factors of a Kronecker product ``B kron C``.

    ``B`` is m1 x n1 (left factor), ``C`` is m2 x n2 (right factor), so the
    product is (m1*m2) x (n1*n2).
    """

    m1: int
    n1: int
    m2: int
    n2: int

    def __post_init__(self):
        if min(self.m1, self.n1, self.m2, self.n2) < 1:
            raise DimensionMismatch(f"factor dims must be positive, got {self}")

    @property
    def product_shape(self) -> tuple[int, int]:
        return (self.m1 * self.m2, self.n1 * self.n2)


def vec(A: np.ndarray) -> np.ndarray:
    """Column-major vectorization of a matrix."""
    return np.asarray(A).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a vector to rows x cols, column-major."""
    v = np.asarray(v)
    if v.size != rows * cols:
        raise DimensionMismatch(f"cannot unvec length {v.size} to {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def _check_square(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def _check_symmetric(M: np.ndarray, name: str, tol: float = 1e-10) -> np.ndarray:
    """Validate symmetry to ``tol`` (relative to entry magnitude) and return
    the symmetrized matrix."""
    M = _check_square(M, name)
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 0.0)
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > tol * scale:
        raise NotSymmetric(f"{name} asymmetry {asym:.3e} exceeds tolerance")
    return 0.5 * (M + M.T)


def matrix_sqrt_psd(R: np.ndarray) -> np.ndarray:
    """Square root ``S`` of a symmetric PSD matrix with ``S @ S.T == R``.

    Uses a (lower) Cholesky factor when ``R`` is numerically positive
    definite and falls back to a symmetric eigendecomposition otherwise,
    clamping round-off-negative eigenvalues to zero.  The fallback returns
    ``V @ diag(sqrt(w))``, which is a valid (non-triangular) square root.

    Raises:
        NotSymmetric: asymmetry beyond 1e-10 (relative).
        IndefiniteMatrix: an eigenvalue below -1e-12 * max(1, ||R||_F).
    """
    R = _check_symmetric(R, "R")
    if R.size == 0:
        return R.copy()
    try:
        return np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        pass
    w, V = np.linalg.eigh(R)
    # Eigenvalues of a PSD matrix can come out slightly negative at the
    # scale of eps * ||R||; only fail on genuinely indefinite input.
    floor = -1e-12 * max(1.0, float(np.linalg.norm(R)))
    if w[0] < floor:
        raise IndefiniteMatrix(f"minimum eigenvalue {w[0]:.3e} below {floor:.3e}")
    return V * np.sqrt(np.clip(w, 0.0, None))


def generalized_eig_sym(
    A: np.ndarray, B: np.ndarray, n_top: int
) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenpairs of the symmetric-definite pencil ``A v = lambda B v``.

    Solved by Cholesky whitening: with ``B = L L^T``, the standard symmetric
    problem on ``L^-1 A L^-T`` is solved and eigenvectors are mapped back by
    ``L^-T``.  The back-transformed vectors are B-orthonormal; they are then
    rescaled to unit 2-norm on output.

    Args:
        A: symmetric PSD matrix.
        B: symmetric PD matrix of the same dimension.
        n_top: number of leading eigenpairs to return.

    Returns:
        ``(eigvals, eigvecs)`` with eigenvalues in descending order and
        eigenvectors in the matching columns, each of unit 2-norm.

    Raises:
        SingularB: ``B`` is not positive definite (min eigenvalue <= 1e-12,
            relative to its norm).
        DimensionMismatch: shapes disagree or ``n_top`` is out of range.
    """
    A = _check_symmetric(A, "A")
    B = _check_symmetric(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"A {A.shape} and B {B.shape} differ")
    n = A.shape[0]
    if not 1 <= n_top <= n:
        raise DimensionMismatch(f"n_top={n_top} out of range for dimension {n}")
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        raise SingularB("B is not positive definite") from None
    # Guard against a technically-factorable but numerically singular B.
    diag = np.diag(L)
    if diag.min() ** 2 <= 1e-12 * max(1.0, diag.max() ** 2):
        raise SingularB("B is numerically singular")
    # C = L^-1 A L^-T, kept explicitly symmetric.
    C = scipy.linalg.solve_triangular(L, A, lower=True)
    C = scipy.linalg.solve_triangular(L, C.T, lower=True)
    C = 0.5 * (C + C.T)
    w, U = np.linalg.eigh(C)
    order = np.argsort(w)[::-1][:n_top]
    w = w[order]
    V = scipy.linalg.solve_triangular(L.T, U[:, order], lower=False)
    V = V / np.linalg.norm(V, axis=0)
    return w, V


def kron_rearrange(V: np.ndarray, dims) -> np.ndarray:
    """Rearrange ``V`` so Kronecker structure becomes an outer product.

    For ``V`` of shape (m1*m2) x (n1*n2) viewed as an m1 x n1 grid of
    m2 x n2 blocks, row ``i + m1*j`` of the result is the vectorized
    (column-major) block ``(i, j)``.  This is the rearrangement for which

        ``||V - B kron C||_F == ||R - vec(B) vec(C)^T||_F``

    holds for every B (m1 x n1) and C (m2 x n2), turning nearest-Kronecker
    approximation into nearest-rank-one approximation.  It is a permutation
    of entries, hence a linear bijection; the inverse is
    ``kron_rearrange(R.T, (n2, n1, m2, m1)).T``.
    """
    if not isinstance(dims, KroneckerFactorDims):
        dims = KroneckerFactorDims(*dims)
    V = np.asarray(V)
    if V.shape != dims.product_shape:
        raise DimensionMismatch(
            f"V has shape {V.shape}, expected {dims.product_shape} for {dims}"
        )
    m1, n1, m2, n2 = dims.m1, dims.n1, dims.m2, dims.n2
    T = V.reshape(m1, m2, n1, n2)
    # rows ordered (i + m1*j), cols ordered (p + m2*q)
    return T.transpose(2, 0, 3, 1).reshape(m1 * n1, m2 * n2)


def rank_one_factor(R: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Best rank-one factorization ``R ~ s * u @ v.conj().T``.

    Returns the dominant singular triplet ``(u, s, v)`` with ``u`` and ``v``
    of unit 2-norm and ``s = sigma_1(R)``, so ``s * outer(u, conj(v))`` is the
    Frobenius-nearest rank-one matrix to ``R``.

    Raises:
        ZeroMatrix: ``R`` has no nonzero entry.
    """
    R = np.asarray(R)
    if R.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {R.shape}")
    if not np.any(R):
        raise ZeroMatrix("cannot factor the zero matrix")
    U, s, Vh = np.linalg.svd(R, full_matrices=False)
    return U[:, 0], float(s[0]), Vh[0, :].conj()


def complex_to_real_stacked(G: np.ndarray) -> np.ndarray:
    """Real 2r x 2c representation of a complex r x c matrix.

    ``[[Re G, -Im G], [Im G, Re G]]`` acting on stacked ``[Re h; Im h]``
    vectors reproduces the complex product ``G @ h`` in stacked form.  On
    square matrices the map is a ring homomorphism.
    """
    G = np.asarray(G)
    if G.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {G.shape}")
    Re, Im = G.real, G.imag
    return np.block([[Re, -Im], [Im, Re]])
