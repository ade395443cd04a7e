"""Measured matrix algebras, couplings and the Choi correspondence.

Densities here use the *unnormalised* trace: a state on M_n is a PSD matrix
``rho`` with ``Tr(rho) = 1`` and acts as ``a -> Tr(rho a)``.  The
normalised-trace density of the same state (the matrix ``A`` with
``tr_n(A a) = phi(a)``) is ``n * rho``; for a coupling density ``D`` on
C^n (x) C^m it is ``n * m * D``.  Values of states, and therefore all
capacities, do not depend on the convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError, ValidationError
from .linalg import hermitian, min_eigenvalue, partial_trace_a, partial_trace_b

DENSITY_TOL = 1e-9
MARGINAL_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class MeasuredAlgebra:
    """The matrix algebra M_n together with a state given by its density matrix."""

    density: np.ndarray

    def __post_init__(self):
        rho = hermitian(self.density, name="density")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > DENSITY_TOL:
            raise ValidationError(f"density must have trace 1, got {tr:.12g}")
        lam = min_eigenvalue(rho)
        if lam < -DENSITY_TOL:
            raise ValidationError(f"density is not positive (min eigenvalue {lam:.3e})")
        object.__setattr__(self, "density", rho)

    @classmethod
    def trace(cls, n: int) -> MeasuredAlgebra:
        """M_n with its normalised trace."""
        return cls(np.eye(n, dtype=complex) / n)

    @classmethod
    def vector_state(cls, xi) -> MeasuredAlgebra:
        v = np.asarray(xi, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def diagonal(cls, p) -> MeasuredAlgebra:
        return cls(np.diag(np.asarray(p, dtype=float)).astype(complex))

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    def __call__(self, a) -> float:
        """The value of the state on a Hermitian element."""
        return float(np.trace(self.density @ np.asarray(a)).real)

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.density - np.eye(self.dim) / self.dim)) <= tol)

    def is_faithful(self, tol: float = 1e-12) -> bool:
        return min_eigenvalue(self.density) > tol


def product_density(left: MeasuredAlgebra, right: MeasuredAlgebra) -> np.ndarray:
    return np.kron(left.density, right.density)


class CouplingCheck(NamedTuple):
    ok: bool
    min_eigenvalue: float
    left_residual: float
    right_residual: float


def is_coupling(D, left: MeasuredAlgebra, right: MeasuredAlgebra,
                tol: float = MARGINAL_TOL) -> CouplingCheck:
    """Is ``D`` PSD with marginals ``left.density`` and ``right.density``?

    Residuals are entrywise maxima of the marginal differences.
    """
    n, m = left.dim, right.dim
    D = np.asarray(D, dtype=complex)
    if D.shape != (n * m, n * m):
        raise ValidationError(f"density of shape {D.shape} does not match {n} x {m}")
    lam = min_eigenvalue(D)
    r_left = float(np.max(np.abs(partial_trace_b(D, n, m) - left.density)))
    r_right = float(np.max(np.abs(partial_trace_a(D, n, m) - right.density)))
    ok = lam >= -tol and r_left <= tol and r_right <= tol
    return CouplingCheck(bool(ok), lam, r_left, r_right)


@dataclass(frozen=True, eq=False)
class Coupling:
    """A state on M_n (x) M_m whose marginals are the states of ``left`` and ``right``."""

    left: MeasuredAlgebra
    right: MeasuredAlgebra
    density: np.ndarray
    tol: float = MARGINAL_TOL

    def __post_init__(self):
        D = hermitian(self.density, tol=1e-8, name="coupling density")
        check = is_coupling(D, self.left, self.right, self.tol)
        if not check.ok:
            raise ValidationError(
                "not a coupling: min eigenvalue {:.3e}, marginal residuals {:.3e}, {:.3e}".format(
                    check.min_eigenvalue, check.left_residual, check.right_residual))
        object.__setattr__(self, "density", D)

    @classmethod
    def product(cls, left: MeasuredAlgebra, right: MeasuredAlgebra) -> Coupling:
        return cls(left, right, product_density(left, right))

    @property
    def dims(self) -> tuple[int, int]:
        return self.left.dim, self.right.dim

    def __call__(self, T) -> float:
        return float(np.trace(self.density @ np.asarray(T)).real)

    def normalized_density(self) -> np.ndarray:
        """Density with respect to the normalised trace on M_nm (``n m D``)."""
        n, m = self.dims
        return n * m * self.density


def complete_subcoupling(D, left: MeasuredAlgebra, right: MeasuredAlgebra,
                         tol: float = MARGINAL_TOL) -> Coupling:
    """Enlarge a sub-coupling to a coupling that dominates it.

    If ``Tr_B(D) <= rho_left`` and ``Tr_A(D) <= rho_right`` then, with the
    deficits ``phi' = rho_left - Tr_B(D)`` and ``psi' = rho_right - Tr_A(D)``,
    ``D + phi' (x) psi' / (1 - Tr D)`` has exactly the required marginals.
    """
    n, m = left.dim, right.dim
    D = hermitian(D, tol=1e-8, name="sub-coupling density")
    if D.shape != (n * m, n * m):
        raise ValidationError(f"density of shape {D.shape} does not match {n} x {m}")
    if min_eigenvalue(D) < -tol:
        raise PreconditionError("sub-coupling density is not positive")
    phi_def = left.density - partial_trace_b(D, n, m)
    psi_def = right.density - partial_trace_a(D, n, m)
    if min_eigenvalue(phi_def) < -tol or min_eigenvalue(psi_def) < -tol:
        raise PreconditionError("marginals of the input exceed the prescribed states")
    mass = 1.0 - np.trace(D).real
    if mass <= tol:
        return Coupling(left, right, D, tol)
    return Coupling(left, right, D + np.kron(phi_def, psi_def) / mass, tol)


# ---------------------------------------------------------------------------
# Choi matrices


@dataclass(frozen=True, eq=False)
class ChoiMap:
    """A linear map M_in -> M_out stored through its values on matrix units.

    ``blocks[i, j]`` is the image of the matrix unit ``eps_ij``; the assembled
    ``(in_dim * out_dim)``-square matrix is the Choi matrix.
    """

    blocks: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.blocks, dtype=complex)
        if B.ndim != 4 or B.shape[0] != B.shape[1] or B.shape[2] != B.shape[3]:
            raise ValidationError(f"blocks must have shape (n, n, m, m), got {B.shape}")
        object.__setattr__(self, "blocks", B)

    @classmethod
    def from_matrix(cls, C, in_dim: int, out_dim: int) -> ChoiMap:
        C = np.asarray(C, dtype=complex)
        if C.shape != (in_dim * out_dim,) * 2:
            raise ValidationError(f"Choi matrix of shape {C.shape} does not match {in_dim} -> {out_dim}")
        return cls(C.reshape(in_dim, out_dim, in_dim, out_dim).transpose(0, 2, 1, 3))

    @classmethod
    def from_function(cls, f, in_dim: int) -> ChoiMap:
        units = np.eye(in_dim * in_dim).reshape(in_dim * in_dim, in_dim, in_dim)
        images = [np.asarray(f(E), dtype=complex) for E in units]
        out = images[0].shape[0]
        return cls(np.array(images).reshape(in_dim, in_dim, out, out))

    @classmethod
    def unitary_conjugation(cls, U) -> ChoiMap:
        U = np.asarray(U, dtype=complex)
        return cls.from_function(lambda x: U @ x @ U.conj().T, U.shape[1])

    @property
    def in_dim(self) -> int:
        return self.blocks.shape[0]

    @property
    def out_dim(self) -> int:
        return self.blocks.shape[2]

    def matrix(self) -> np.ndarray:
        n, m = self.in_dim, self.out_dim
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m)

    def __call__(self, x) -> np.ndarray:
        return np.einsum("ij,ijkl->kl", np.asarray(x, dtype=complex), self.blocks)

    def scaled(self, c: float) -> ChoiMap:
        return ChoiMap(c * self.blocks)

    def unital_residual(self) -> float:
        """``max |Phi(I) - I|``."""
        return float(np.max(np.abs(self(np.eye(self.in_dim)) - np.eye(self.out_dim))))

    def trace_residual(self) -> float:
        """Deviation from ``tr_out(Phi(x)) = tr_in(x)`` (normalised traces) on matrix units."""
        traces = np.einsum("ijkk->ij", self.blocks) / self.out_dim
        return float(np.max(np.abs(traces - np.eye(self.in_dim) / self.in_dim)))

    def cp_residual(self) -> float:
        """Negative part of the smallest Choi-matrix eigenvalue (0 for completely positive maps)."""
        return max(0.0, -min_eigenvalue(self.matrix()))

    def adjoint(self) -> ChoiMap:
        """Adjoint with respect to the normalised trace pairings on M_in and M_out."""
        n, m = self.in_dim, self.out_dim
        # tr_n(x Phi'(y)) = tr_m(Phi(x) y)  =>  Phi'(y)_{ji} = (n/m) Tr(B_ij y)
        return ChoiMap.from_function(
            lambda y: (n / m) * np.einsum("ijkl,lk->ji", self.blocks, y), m)


def _require_uniform(left: MeasuredAlgebra, right: MeasuredAlgebra):
    if not (left.is_uniform(1e-10) and right.is_uniform(1e-10)):
        raise PreconditionError("the Choi correspondence is only stated for normalised-trace marginals")


def choi_of_coupling(c: Coupling) -> ChoiMap:
    """The map ``Phi`` with ``Phi(eps_ij) = (n m D)_{ij}``.

    For a coupling of the normalised traces, ``Phi / n`` is unital and
    trace preserving.
    """
    _require_uniform(c.left, c.right)
    n, m = c.dims
    return ChoiMap.from_matrix(n * m * c.density, n, m)


def coupling_of_choi(phi: ChoiMap, tol: float = MARGINAL_TOL) -> Coupling:
    """Inverse of :func:`choi_of_coupling`.

    Raises
    ------
    PreconditionError
        If ``phi / n`` is not unital and trace preserving, or the Choi matrix is not PSD.
    """
    n, m = phi.in_dim, phi.out_dim
    channel = phi.scaled(1.0 / n)
    u, t, c = channel.unital_residual(), channel.trace_residual(), phi.cp_residual()
    if u > tol or t > tol or c > tol:
        raise PreconditionError(
            f"Phi/n is not a unital trace-preserving CP map "
            f"(unital {u:.3e}, trace {t:.3e}, positivity {c:.3e})")
    return Coupling(MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m),
                    phi.matrix() / (n * m), tol)


def channel_of_coupling(c: Coupling) -> ChoiMap:
    """The unital channel M_m -> M_n dual to ``Phi / n`` for a trace coupling.

    It satisfies ``<Psi^(n)(T) zeta, zeta> = Tr(D T)`` with ``zeta`` the
    canonical maximally entangled vector of C^n (x) C^n.
    """
    n, _ = c.dims
    return choi_of_coupling(c).scaled(1.0 / n).adjoint()


def apply_choi_blockwise(phi: ChoiMap, T) -> np.ndarray:
    """The ampliation ``id_k (x) Phi`` applied to an operator on C^k (x) C^in."""
    T = np.asarray(T, dtype=complex)
    d = phi.in_dim
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] % d:
        raise ValidationError(f"operator of shape {T.shape} has no {d}-block structure")
    k = T.shape[0] // d
    out = np.einsum("aibj,ijkl->akbl", T.reshape(k, d, k, d), phi.blocks)
    return out.reshape(k * phi.out_dim, k * phi.out_dim)


def bistochastic_check(D, n: int, tol: float = 1e-9) -> bool:
    """Is the diagonal coupling density ``D`` on D_n (x) D_n bistochastic after scaling by ``n``?"""
    D = np.asarray(D, dtype=complex)
    if D.shape != (n * n, n * n):
        raise ValidationError(f"density of shape {D.shape} is not on C^{n} (x) C^{n}")
    if np.max(np.abs(D - np.diag(np.diag(D)))) > tol:
        raise ValidationError("density is not diagonal")
    grid = n * np.diag(D).real.reshape(n, n)
    return bool(np.all(grid >= -tol)
                and np.all(np.abs(grid.sum(axis=0) - 1) <= tol)
                and np.all(np.abs(grid.sum(axis=1) - 1) <= tol))
