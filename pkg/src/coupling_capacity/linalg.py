"""Dense complex linear algebra for operators on C^n, C^m and C^n (x) C^m.

Matrices are plain :class:`numpy.ndarray` objects.  Tensor indices follow a
single global convention: the basis vector e_i (x) f_k of C^n (x) C^m sits at
position ``i * m + k``, which is exactly what :func:`numpy.kron` produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SolverFailure, ValidationError

HERMITIAN_TOL = 1e-10
PROJECTION_TOL = 1e-8


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order and the matching unitary of eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


# ---------------------------------------------------------------------------
# validation


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    return A


def hermitian(H, tol: float = HERMITIAN_TOL, name: str = "operator") -> np.ndarray:
    """Check that ``H`` is Hermitian and return its exact Hermitian part.

    The check is ``max|H - H^*| <= tol * max(1, max|H|)``.
    """
    A = as_matrix(H, name)
    if A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 0.0)
    dev = float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0
    if dev > tol * scale:
        raise ValidationError(f"{name} is not Hermitian (deviation {dev:.3e})")
    return (A + A.conj().T) / 2


def projection(P, tol: float = PROJECTION_TOL, name: str = "projection") -> np.ndarray:
    """Validate an orthogonal projection: Hermitian, ``||P^2 - P||_F <= tol``."""
    A = hermitian(P, name=name)
    err = np.linalg.norm(A @ A - A)
    if err > tol:
        raise ValidationError(f"{name} is not idempotent (||P^2 - P|| = {err:.3e})")
    return A


def is_projection(P, tol: float = PROJECTION_TOL) -> bool:
    try:
        projection(P, tol)
    except ValidationError:
        return False
    return True


def min_eigenvalue(H) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    A = np.asarray(H, dtype=complex)
    return float(np.linalg.eigvalsh((A + A.conj().T) / 2)[0])


def is_psd(H, tol: float = 1e-9) -> bool:
    return min_eigenvalue(H) >= -tol


def loewner_leq(A, B, tol: float = 1e-9) -> bool:
    """``A <= B`` in the positive semidefinite order, up to ``tol``."""
    return min_eigenvalue(np.asarray(B) - np.asarray(A)) >= -tol


# ---------------------------------------------------------------------------
# eigen- and singular value decompositions


def _jacobi_rotation(A, V, p, q):
    b = A[p, q]
    absb = abs(b)
    if absb == 0.0:
        return
    phase = b / absb
    a, d = A[p, p].real, A[q, q].real
    theta = (d - a) / (2.0 * absb)
    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
    g_pp, g_pq = c, s
    g_qp, g_qq = -s * np.conj(phase), c * np.conj(phase)
    col_p, col_q = A[:, p].copy(), A[:, q].copy()
    A[:, p] = col_p * g_pp + col_q * g_qp
    A[:, q] = col_p * g_pq + col_q * g_qq
    row_p, row_q = A[p, :].copy(), A[q, :].copy()
    A[p, :] = np.conj(g_pp) * row_p + np.conj(g_qp) * row_q
    A[q, :] = np.conj(g_pq) * row_p + np.conj(g_qq) * row_q
    A[p, q] = A[q, p] = 0.0
    A[p, p] = A[p, p].real
    A[q, q] = A[q, q].real
    vp, vq = V[:, p].copy(), V[:, q].copy()
    V[:, p] = vp * g_pp + vq * g_qp
    V[:, q] = vp * g_pq + vq * g_qq


def _off_diagonal_norm(A):
    return float(np.linalg.norm(A - np.diag(np.diag(A))))


def jacobi_eigh(H, tol: float = 1e-13, max_sweeps: int = 60) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Sweeps over all pairs ``(p, q)`` until the off-diagonal Frobenius norm
    drops below ``tol * ||H||_F``.

    Raises
    ------
    SolverFailure
        If the threshold is not met within ``max_sweeps`` sweeps.
    """
    A = hermitian(H).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    target = tol * max(np.linalg.norm(A), np.finfo(float).tiny)
    off = _off_diagonal_norm(A)
    sweeps = 0
    while off > target:
        if sweeps == max_sweeps:
            raise SolverFailure(
                f"Jacobi eigensolver did not converge after {max_sweeps} sweeps "
                f"(off-diagonal norm {off:.3e})",
                residual=off,
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotation(A, V, p, q)
        sweeps += 1
        off = _off_diagonal_norm(A)
    w = np.diag(A).real
    order = np.argsort(w)[::-1]
    return EigenDecomposition(w[order], V[:, order])


def hermitian_eigen(H, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method="lapack"`` uses :func:`numpy.linalg.eigh`; ``method="jacobi"``
    uses the self-contained :func:`jacobi_eigh`.
    """
    if method == "jacobi":
        return jacobi_eigh(H)
    if method != "lapack":
        raise ValueError(f"unknown eigen method {method!r}")
    A = hermitian(H)
    w, V = np.linalg.eigh(A)
    return EigenDecomposition(w[::-1].copy(), V[:, ::-1].copy())


def svd(M):
    """Full SVD ``M = U diag(s) V^*`` with ``s`` descending.

    Returns ``(U, s, V)`` -- note ``V`` itself, not its adjoint.
    """
    A = as_matrix(M)
    U, s, Vh = np.linalg.svd(A)
    return U, s, Vh.conj().T


# ---------------------------------------------------------------------------
# tensor bookkeeping


def kron(A, B) -> np.ndarray:
    """Kronecker product; ``(A (x) B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


def _check_bipartite(T, n, m):
    A = np.asarray(T, dtype=complex)
    if A.shape != (n * m, n * m):
        raise ValidationError(f"operator of shape {A.shape} is not on C^{n} (x) C^{m}")
    return A


def partial_trace_b(T, n: int, m: int) -> np.ndarray:
    """Trace out the second factor: ``Tr(Tr_B(T) a) = Tr(T (a (x) I))``."""
    A = _check_bipartite(T, n, m)
    return np.einsum("ikjk->ij", A.reshape(n, m, n, m))


def partial_trace_a(T, n: int, m: int) -> np.ndarray:
    """Trace out the first factor: ``Tr(Tr_A(T) b) = Tr(T (I (x) b))``."""
    A = _check_bipartite(T, n, m)
    return np.einsum("kikj->ij", A.reshape(n, m, n, m))


def block(T, n: int, m: int, i: int, j: int) -> np.ndarray:
    """The ``(i, j)`` block of size ``m x m`` of an operator on C^n (x) C^m."""
    return np.asarray(T)[i * m:(i + 1) * m, j * m:(j + 1) * m]


# ---------------------------------------------------------------------------
# cones and projection lattice


def psd_project(H) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm (negative eigenvalues clamped)."""
    A = np.asarray(H, dtype=complex)
    A = (A + A.conj().T) / 2
    w, V = np.linalg.eigh(A)
    np.maximum(w, 0.0, out=w)
    X = (V * w) @ V.conj().T
    return (X + X.conj().T) / 2


def proj_join(p, q) -> np.ndarray:
    """The join ``(p (x) 1) v (1 (x) q)``, computed as ``1 - p^perp (x) q^perp``."""
    P = projection(p, name="p")
    Q = projection(q, name="q")
    n, m = P.shape[0], Q.shape[0]
    return np.eye(n * m) - np.kron(np.eye(n) - P, np.eye(m) - Q)


def range_projection(T, tol: float | None = None) -> np.ndarray:
    """Spectral projection of a PSD operator onto eigenvalues above ``tol``.

    The default threshold is ``1e-8 * lambda_max``.
    """
    w, V = np.linalg.eigh(hermitian(T))
    if tol is None:
        tol = 1e-8 * max(float(w[-1]), 0.0)
    cols = V[:, w > tol]
    return cols @ cols.conj().T


def rank(H, tol: float = 1e-8) -> int:
    w = np.linalg.eigvalsh(hermitian(H))
    return int(np.sum(w > tol))


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^d given by a matrix whose columns are orthonormal."""

    basis: np.ndarray

    def __post_init__(self):
        B = as_matrix(self.basis, "basis")
        err = np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))) if B.size else 0.0
        if err > 1e-10:
            raise ValidationError(f"basis columns are not orthonormal (error {err:.3e})")
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors, tol: float = 1e-10) -> Subspace:
        """Orthonormalise the given vectors (as rows or a single vector) and drop dependencies."""
        V = np.atleast_2d(np.asarray(vectors, dtype=complex)).T
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
        return cls(U[:, :r])

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def vector_projection(xi) -> np.ndarray:
    """The rank-one projection ``xi xi^*`` onto a (normalised) vector."""
    v = np.asarray(xi, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
