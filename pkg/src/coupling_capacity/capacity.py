"""Public capacity API: alpha, beta, their gap, the parameter w, the channel
form of alpha and Strassen-type support feasibility.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import PreconditionError, ValidationError
from .linalg import Subspace, min_eigenvalue, projection
from .model import ChoiMap, Coupling, MeasuredAlgebra, apply_choi_blockwise
from .sampling import haar_unitary, maximally_entangled_vector
from .sdp import SolverOptions, SolverOutcome, hermitian_basis, solve_alpha, solve_beta

DECISION_TOL = 1e-6
CHANNEL_TOL = 1e-7


class Kind(enum.Enum):
    ALPHA = "Alpha"
    BETA = "Beta"
    W = "W"


@dataclass(frozen=True, eq=False)
class CapacityResult:
    """A capacity value with whatever evidence backs it.

    ``witness`` is an optimal coupling (alpha), ``certificate`` an optimal
    covering pair ``(a, b)`` (beta, and alpha's dual).  ``gap`` is the
    certified covering price minus the coupling value for the same solve.
    """

    kind: Kind
    value: float
    witness: Coupling | None = None
    certificate: tuple[np.ndarray, np.ndarray] | None = None
    gap: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.diagnostics.get("status", "Converged") == "Converged"


def _diagnostics(out: SolverOutcome) -> dict:
    return {
        "status": out.status.value,
        "method": out.method,
        "iterations": out.iterations,
        "primal_residual": out.primal_residual,
        "dual_residual": out.dual_residual,
        "certified_bound": out.certified_bound,
        **out.history,
    }


def alpha(T, left: MeasuredAlgebra, right: MeasuredAlgebra,
          opts: SolverOptions | None = None) -> CapacityResult:
    """The coupling capacity ``max{Tr(T D) : D a coupling of left and right}``."""
    out = solve_alpha(T, left, right, opts)
    diag = _diagnostics(out)
    witness = None
    if out.converged:
        try:
            witness = Coupling(left, right, out.primal)
        except ValidationError as exc:
            diag["witness_error"] = str(exc)
    return CapacityResult(Kind.ALPHA, out.value, witness, (out.dual_a, out.dual_b), out.gap, diag)


def beta(T, left: MeasuredAlgebra, right: MeasuredAlgebra,
         opts: SolverOptions | None = None, method: str = "auto") -> CapacityResult:
    """The dual capacity ``min{phi(a) + psi(b) : a, b >= 0, a (x) I + I (x) b >= T}``."""
    out = solve_beta(T, left, right, opts, method)
    return CapacityResult(Kind.BETA, out.value, None, (out.dual_a, out.dual_b), out.gap, _diagnostics(out))


def duality_gap(T, left: MeasuredAlgebra, right: MeasuredAlgebra,
                opts: SolverOptions | None = None) -> float:
    """``beta - alpha`` from two separate solves."""
    return beta(T, left, right, opts).value - alpha(T, left, right, opts).value


def _range_first_basis(e):
    w, V = np.linalg.eigh(e)
    return V[:, ::-1], int(round(np.trace(e).real))


def product_projection_coupling(e, f) -> Coupling:
    """A coupling of the normalised traces attaining ``min{k/n, l/m}`` on ``e (x) f``.

    With ``e_1..e_n`` a basis starting with the range of ``e`` (rank ``k``),
    ``f_1..f_m`` likewise for ``f`` (rank ``l``), and ``k/n <= l/m``, the
    diagonal density ``sum pi(i, j) e_i e_i* (x) f_j f_j*`` uses

    * ``pi = 1/(n l)`` on ``i <= k, j <= l`` and 0 on ``i <= k, j > l``,
    * ``pi = (l/m - k/n) / (l (n - k))`` on ``i > k, j <= l``,
    * ``pi = 1/(m (n - k))`` on ``i > k, j > l``.

    The other case is the mirror image.
    """
    e = projection(e, name="e")
    f = projection(f, name="f")
    n, m = e.shape[0], f.shape[0]
    Be, k = _range_first_basis(e)
    Bf, l = _range_first_basis(f)
    left, right = MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m)
    if k == 0 or l == 0:
        return Coupling.product(left, right)

    def weights(n, k, m, l):
        pi = np.zeros((n, m))
        pi[:k, :l] = 1 / (n * l)
        if k < n:
            pi[k:, :l] = (l / m - k / n) / (l * (n - k))
            pi[k:, l:] = 1 / (m * (n - k))
        return pi

    pi = weights(n, k, m, l) if k * m <= l * n else weights(m, l, n, k).T
    D = sum(pi[i, j] * np.kron(np.outer(Be[:, i], Be[:, i].conj()), np.outer(Bf[:, j], Bf[:, j].conj()))
            for i in range(n) for j in range(m) if pi[i, j] != 0)
    return Coupling(left, right, D)


# ---------------------------------------------------------------------------
# the parameter w


def _top_schmidt_squared(xi, n: int, m: int):
    v = np.asarray(xi, dtype=complex).ravel()
    if v.shape != (n * m,):
        raise ValidationError(f"vector of length {v.size} is not in C^{n} (x) C^{m}")
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise ValidationError(f"vector must have unit norm, got {np.linalg.norm(v):.12g}")
    return np.linalg.svd(v.reshape(n, m), compute_uv=False) ** 2


def w_scalar_program(weights, n: int, m: int) -> float:
    """Minimise ``(1/n) sum mu + (1/m) sum nu`` over ``mu, nu >= 0`` with
    ``sum_i weights_i (mu_i + nu_i) >= 1``.

    ``weights`` are the squared Schmidt coefficients; ``mu`` has length
    ``n <= m`` and ``nu`` length ``m``, with ``nu_j`` for ``j > n``
    unconstrained by the covering condition.
    """
    k = len(weights)
    cost = np.concatenate([np.full(n, 1.0 / n), np.full(m, 1.0 / m)])
    row = np.zeros(n + m)
    row[:k] = weights
    row[n:n + k] = weights
    res = linprog(cost, A_ub=-row[None, :], b_ub=[-1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"scalar program failed: {res.message}")
    return float(res.fun)


def w_of_vector(xi, n: int, m: int) -> CapacityResult:
    """``w(xi) = 1 / (max(n, m) * lambda_1^2)`` for normalised-trace marginals.

    The closed form is cross-checked against a direct solve of the scalar
    program it comes from; the difference is in ``diagnostics``.
    """
    weights = _top_schmidt_squared(xi, n, m)
    lo, hi = min(n, m), max(n, m)
    value = 1.0 / (hi * weights[0])
    direct = w_scalar_program(weights, lo, hi)
    return CapacityResult(Kind.W, value, diagnostics={
        "direct": direct, "direct_error": abs(direct - value), "top_schmidt_squared": float(weights[0]),
    })


# ---------------------------------------------------------------------------
# channel form of alpha


def alpha_channel_form(T, channel: ChoiMap, tol: float = CHANNEL_TOL) -> float:
    """``<(id (x) Psi)(T) zeta, zeta>`` for a unital trace-preserving CP map ``Psi: M_m -> M_n``.

    ``zeta = (1/sqrt(n)) sum_i e_i (x) e_i`` in the canonical basis.  For
    every such ``Psi`` this is the value of some trace coupling on ``T``,
    hence a lower bound for alpha with normalised-trace marginals.
    """
    n, m = channel.out_dim, channel.in_dim
    T = np.asarray(T, dtype=complex)
    if T.shape != (n * m, n * m):
        raise ValidationError(f"T has shape {T.shape}, expected {(n * m, n * m)}")
    residuals = channel.unital_residual(), channel.trace_residual(), channel.cp_residual()
    if max(residuals) > tol:
        raise PreconditionError(
            "map is not a unital trace-preserving CP map (unital {:.3e}, trace {:.3e}, positivity {:.3e})"
            .format(*residuals))
    zeta = maximally_entangled_vector(n)
    return float(np.vdot(zeta, apply_choi_blockwise(channel, T) @ zeta).real)


def _conjugation_value(T, U, zeta):
    n = U.shape[0]
    W = np.kron(np.eye(n), U)
    v = W.conj().T @ zeta
    return float(np.vdot(v, T @ v).real)


def alpha_unitary_search(T, n: int, restarts: int = 8, seed: int = 0,
                         step_tol: float = 1e-9) -> float:
    """Best value of the channel form over unitary conjugations ``y -> U y U*``.

    Each restart begins at a Haar-random unitary and does a coordinate
    search ``U <- U exp(i s G)`` over an orthonormal basis ``G`` of Hermitian
    generators, halving ``s`` whenever no coordinate improves.  The result
    is a lower bound for alpha with normalised-trace marginals (``n = m``).
    """
    T = np.asarray(T, dtype=complex)
    if T.shape != (n * n, n * n):
        raise ValidationError(f"T has shape {T.shape}, expected {(n * n, n * n)}")
    rng = np.random.default_rng(seed)
    zeta = maximally_entangled_vector(n)
    moves = []
    for G in hermitian_basis(n):
        w, V = np.linalg.eigh(G)
        moves.append((w, V))

    def rotation(w, V, s):
        return (V * np.exp(1j * s * w)) @ V.conj().T

    best = -np.inf
    for _ in range(restarts):
        U = haar_unitary(rng, n)
        f = _conjugation_value(T, U, zeta)
        s = 0.5
        while s > step_tol:
            improved = False
            for w, V in moves:
                for sign in (1.0, -1.0):
                    Un = U @ rotation(w, V, sign * s)
                    fn = _conjugation_value(T, Un, zeta)
                    if fn > f:
                        U, f, improved = Un, fn, True
                        break
            if not improved:
                s /= 2
        best = max(best, f)
    return best


# ---------------------------------------------------------------------------
# Strassen-type feasibility


@dataclass(frozen=True, eq=False)
class StrassenVerdict:
    """Is there a coupling supported in the subspace ``X``?

    When feasible, ``witness`` is such a coupling.  Otherwise
    ``certificate = (a1, a2)`` satisfies ``I - E_X >= a1 (x) I - I (x) a2``
    while ``phi(a1) - psi(a2) = margin > 0``, which no supported coupling
    allows.
    """

    feasible: bool
    alpha_value: float
    witness: Coupling | None = None
    certificate: tuple[np.ndarray, np.ndarray] | None = None
    margin: float = 0.0
    support_residual: float = np.nan
    indeterminate: bool = False
    diagnostics: dict = field(default_factory=dict)


def strassen_decide(X: Subspace, left: MeasuredAlgebra, right: MeasuredAlgebra,
                    opts: SolverOptions | None = None,
                    decision_tol: float = DECISION_TOL) -> StrassenVerdict:
    """Decide whether some coupling of ``left`` and ``right`` has support in ``X``.

    Feasible exactly when the coupling capacity of the projection onto ``X``
    is at least ``1 - decision_tol``.  Values within ``10 * decision_tol``
    below that threshold are reported as infeasible with ``indeterminate``
    set, since solver accuracy cannot separate them from 1.
    """
    n, m = left.dim, right.dim
    if X.ambient_dim != n * m:
        raise ValidationError(f"subspace lives in dimension {X.ambient_dim}, expected {n * m}")
    E = X.projection()
    a_res = alpha(E, left, right, opts)
    diag = {"alpha": a_res.diagnostics}
    if a_res.value >= 1 - decision_tol:
        Q = np.eye(n * m) - E
        D = a_res.witness.density if a_res.witness is not None else None
        residual = float(np.linalg.norm(Q @ D @ Q, 2)) if D is not None else np.nan
        return StrassenVerdict(True, a_res.value, a_res.witness, support_residual=residual,
                               indeterminate=a_res.value < 1 - decision_tol / 10, diagnostics=diag)
    b_res = beta(E, left, right, opts)
    diag["beta"] = b_res.diagnostics
    a, b = b_res.certificate
    a1 = np.eye(n) - a
    a2 = b
    slack = (np.eye(n * m) - E) - (np.kron(a1, np.eye(m)) - np.kron(np.eye(n), a2))
    diag["certificate_min_eigenvalue"] = min_eigenvalue(slack)
    margin = left(a1) - right(a2)
    return StrassenVerdict(False, a_res.value, None, (a1, a2), margin,
                           indeterminate=a_res.value >= 1 - 10 * decision_tol, diagnostics=diag)
