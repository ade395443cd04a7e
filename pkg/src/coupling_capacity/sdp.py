"""Solvers for the two capacity programs.

The coupling program (maximise ``Tr(T D)`` over densities with prescribed
marginals) and the covering program (minimise ``Tr(rho1 a) + Tr(rho2 b)``
over ``a, b >= 0`` with ``a (x) I + I (x) b >= T``) are each solved by their
own ADMM iteration.  Both alternate an exact Euclidean projection onto an
affine set with a projection onto a product of PSD cones.  Convergence is
sped up with type-II Anderson acceleration on the fixed-point map plus
residual balancing of the penalty; a safeguard falls back to the plain step
whenever an accelerated point does not decrease the fixed-point residual.

ADMM slows down badly on the covering program when a state has tiny
eigenvalues, so if it has not converged within ``covering_admm_budget``
iterations the covering program is finished by a log-barrier
interior-point method instead.  States with a kernel are handled by
compressing everything to the supports first: every coupling lives on
``supp(rho1) (x) supp(rho2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .linalg import hermitian, kron, min_eigenvalue, partial_trace_a, partial_trace_b, psd_project
from .model import MeasuredAlgebra


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs shared by both solvers.

    ``penalty`` is the initial ADMM step parameter; it is rebalanced every
    ``balance_every`` iterations when the primal and dual residuals differ by
    more than a factor of ten.  ``anderson_memory = 0`` disables acceleration.
    ``seed`` drives the single randomised restart attempted when the default
    start of the coupling solver runs out of iterations.  The covering
    solver switches to the barrier method after ``covering_admm_budget``
    ADMM iterations and stops that method once the barrier duality measure
    ``nm / t`` is below ``barrier_gap``.
    """

    max_iterations: int = 50000
    residual_tol: float = 1e-8
    penalty: float = 1.0
    seed: int = 0
    over_relaxation: float = 1.6
    anderson_memory: int = 10
    balance_every: int = 100
    restart_on_stall: bool = True
    covering_admm_budget: int = 3000
    barrier_gap: float = 1e-10

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValidationError("residual_tol must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")
        if not 1.0 <= self.over_relaxation < 2.0:
            raise ValidationError("over_relaxation must lie in [1, 2)")
        if self.penalty <= 0:
            raise ValidationError("penalty must be positive")


@dataclass(frozen=True, eq=False)
class SolverOutcome:
    """Result of one solve.

    For the coupling program ``primal`` is the affine-feasible iterate and
    ``(dual_a, dual_b)`` the PSD covering pair recovered from the marginal
    multipliers.  For the covering program ``(dual_a, dual_b)`` is the
    optimiser and ``primal`` the PSD sub-coupling recovered from the cone
    multiplier.  ``gap`` is (covering objective) - (coupling objective) at
    the returned pair.  ``certified_bound`` is the covering objective after
    shifting ``dual_a`` by the negative part of the smallest eigenvalue of
    ``a (x) I + I (x) b - T``, hence a rigorous upper bound for alpha.
    """

    value: float
    primal: np.ndarray
    dual_a: np.ndarray
    dual_b: np.ndarray
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    status: Status
    certified_bound: float = np.nan
    penalty: float = np.nan
    method: str = "admm"
    history: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


# ---------------------------------------------------------------------------
# validation and small helpers


def _check_problem(T, left: MeasuredAlgebra, right: MeasuredAlgebra, tol: float = 1e-9):
    n, m = left.dim, right.dim
    T = hermitian(T, name="T")
    if T.shape != (n * m, n * m):
        raise ValidationError(f"T has shape {T.shape}, expected {(n * m, n * m)}")
    w = np.linalg.eigvalsh(T)
    if w[0] < -tol or w[-1] > 1 + tol:
        raise ValidationError(
            f"T must satisfy 0 <= T <= I (eigenvalues in [{w[0]:.3e}, {w[-1]:.6g}])")
    return T, n, m


def _pack(*mats) -> np.ndarray:
    return np.concatenate([M.ravel().view(float) for M in mats])


def _unpack(x: np.ndarray, sizes) -> list[np.ndarray]:
    out, offset = [], 0
    for s in sizes:
        k = 2 * s * s
        out.append(x[offset:offset + k].copy().view(complex).reshape(s, s))
        offset += k
    return out


def _covering_slack(a, b, T):
    n, m = a.shape[0], b.shape[0]
    return kron(a, np.eye(m)) + kron(np.eye(n), b) - T


def certify_covering(a, b, T, left: MeasuredAlgebra, right: MeasuredAlgebra):
    """Turn a near-feasible covering pair into an exactly feasible PSD one.

    First moves a multiple of the identity from ``a`` to ``b`` so that the
    smallest eigenvalue of ``a`` is zero (this leaves ``a (x) I + I (x) b``
    and the objective unchanged), then clamps both to the PSD cone and adds
    the remaining deficit ``max(0, -lambda_min(a (x) I + I (x) b - T))`` to
    ``a``.  Returns ``(a', b', phi(a') + psi(b'))``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a = (a + a.conj().T) / 2
    b = (b + b.conj().T) / 2
    shift = float(np.linalg.eigvalsh(a)[0])
    a = psd_project(a - shift * np.eye(a.shape[0]))
    b = psd_project(b + shift * np.eye(b.shape[0]))
    deficit = max(0.0, -min_eigenvalue(_covering_slack(a, b, T)))
    a = a + deficit * np.eye(a.shape[0])
    return a, b, left(a) + right(b)


class Anderson:
    """Type-II Anderson acceleration with a sliding window of ``memory`` differences."""

    def __init__(self, memory: int):
        self.memory = memory
        self.reset()

    def reset(self):
        self._x: list[np.ndarray] = []
        self._g: list[np.ndarray] = []

    def step(self, x: np.ndarray, fx: np.ndarray) -> np.ndarray:
        g = fx - x
        self._x.append(x)
        self._g.append(g)
        if len(self._x) > self.memory + 1:
            self._x.pop(0)
            self._g.pop(0)
        if len(self._x) < 2:
            return fx
        dG = np.diff(np.array(self._g), axis=0).T
        dX = np.diff(np.array(self._x), axis=0).T
        coef, *_ = np.linalg.lstsq(dG, g, rcond=None)
        return fx - (dX + dG) @ coef


def _run_admm(step, x0, rho, opts: SolverOptions, rescale, max_iterations: int):
    """Drive a fixed-point map ``step(x, rho)`` to convergence.

    ``step`` returns ``(fx, info)`` with ``info`` holding the residuals
    ``rp``, ``rd`` and the objective gap.  ``rescale(x, factor)`` rescales
    the scaled multipliers when the penalty is multiplied by ``factor``.
    """
    acc = Anderson(opts.anderson_memory) if opts.anderson_memory > 0 else None
    x = x0
    accepted = (np.inf, None)
    candidate = False
    info = None
    k = 0
    for k in range(1, max_iterations + 1):
        fx, info = step(x, rho)
        r = float(np.linalg.norm(fx - x))
        if candidate and r > accepted[0]:
            # the accelerated point made things worse: restart from the last plain step
            acc.reset()
            x = accepted[1]
            candidate = False
            continue
        accepted = (r, fx)
        rp, rd = info["rp"], info["rd"]
        if rp < opts.residual_tol and rd < opts.residual_tol and abs(info["gap"]) < opts.residual_tol:
            return info, k, rho, True
        if k % opts.balance_every == 0 and (rp > 10 * rd or rd > 10 * rp):
            factor = 2.0 if rp > 10 * rd else 0.5
            rho *= factor
            x = rescale(fx, factor)
            if acc is not None:
                acc.reset()
            candidate = False
            accepted = (np.inf, None)
            continue
        if acc is not None:
            x = acc.step(x, fx)
            candidate = True
        else:
            x = fx
    return info, k, rho, False


# ---------------------------------------------------------------------------
# the coupling program


def affine_project(D, left: MeasuredAlgebra, right: MeasuredAlgebra, return_multipliers: bool = False):
    """Frobenius projection onto ``{X Hermitian : Tr_B X = rho1, Tr_A X = rho2}``.

    With ``C(X) = (Tr_B X, Tr_A X)`` and ``C*(a, b) = a (x) I + I (x) b`` the
    projection is ``X - C*(a, b)`` where ``(a, b)`` solves
    ``C C*(a, b) = C(X) - (rho1, rho2)``, i.e. ``m a + Tr(b) I = r_a`` and
    ``Tr(a) I + n b = r_b``.  The system is singular along ``(t I, -t I)``;
    the gauge is fixed by taking ``a = r_a / m``, a valid particular
    solution because ``Tr(r_a) = Tr(r_b)``.
    """
    n, m = left.dim, right.dim
    X = np.asarray(D, dtype=complex)
    X = (X + X.conj().T) / 2
    ra = partial_trace_b(X, n, m) - left.density
    rb = partial_trace_a(X, n, m) - right.density
    a = ra / m
    b = (rb - (np.trace(ra) / m) * np.eye(m)) / n
    P = X - np.kron(a, np.eye(m)) - np.kron(np.eye(n), b)
    if return_multipliers:
        return P, a, b
    return P


def _alpha_attempt(T, left, right, opts: SolverOptions, Z0, max_iterations: int):
    n, m = left.dim, right.dim
    N = n * m
    relax = opts.over_relaxation
    r1, r2 = left.density, right.density
    state = {}

    def step(x, rho):
        Z, U = _unpack(x, (N, N))
        D, a, b = affine_project(Z - U + T / rho, left, right, return_multipliers=True)
        Dh = relax * D + (1 - relax) * Z
        Zn = psd_project(Dh + U)
        Un = U + Dh - Zn
        gap = rho * (np.trace(r1 @ a) + np.trace(r2 @ b)).real - np.trace(T @ D).real
        info = {
            "rp": float(np.linalg.norm(D - Zn)),
            "rd": float(rho * np.linalg.norm(Zn - Z)),
            "gap": float(gap),
        }
        state.update(D=D, a=rho * a, b=rho * b)
        return _pack(Zn, Un), info

    def rescale(x, factor):
        Z, U = _unpack(x, (N, N))
        return _pack(Z, U / factor)

    x0 = _pack(Z0, np.zeros((N, N), dtype=complex))
    info, k, rho, ok = _run_admm(step, x0, opts.penalty, opts, rescale, max_iterations)
    return state, info, k, rho, ok


def _solve_alpha_core(T, left, right, opts: SolverOptions) -> SolverOutcome:
    n, m = left.dim, right.dim
    N = n * m
    state, info, k, rho, ok = _alpha_attempt(
        T, left, right, opts, np.kron(left.density, right.density), opts.max_iterations)
    iterations = k
    if not ok and opts.restart_on_stall:
        rng = np.random.default_rng(opts.seed)
        G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        Z0 = psd_project(affine_project(G @ G.conj().T / N, left, right))
        state2, info2, k2, rho2, ok2 = _alpha_attempt(T, left, right, opts, Z0, opts.max_iterations)
        iterations += k2
        if ok2 or info2["rp"] + info2["rd"] < info["rp"] + info["rd"]:
            state, info, rho, ok = state2, info2, rho2, ok2
    a, b, bound = certify_covering(state["a"], state["b"], T, left, right)
    D = state["D"]
    value = float(np.trace(T @ D).real)
    return SolverOutcome(
        value=value, primal=D, dual_a=a, dual_b=b,
        primal_residual=info["rp"], dual_residual=info["rd"],
        gap=float(bound - value), iterations=iterations,
        status=Status.CONVERGED if ok else Status.MAX_ITERATIONS,
        certified_bound=bound, penalty=rho, method="admm",
    )


# ---------------------------------------------------------------------------
# the covering program


def _covering_affine(a0, b0, S0, T, n, m):
    """Project ``(a0, b0, S0)`` onto ``{(a, b, S) : S = a (x) I + I (x) b - T}``.

    The normal equations reduce to a 2x2 system for ``(Tr a, Tr b)``.
    """
    W = T + S0
    ra = a0 + partial_trace_b(W, n, m)
    rb = b0 + partial_trace_a(W, n, m)
    ra = (ra + ra.conj().T) / 2
    rb = (rb + rb.conj().T) / 2
    M = np.array([[1.0 + m, n], [m, 1.0 + n]])
    ta, tb = np.linalg.solve(M, np.array([np.trace(ra).real, np.trace(rb).real]))
    a = (ra - tb * np.eye(n)) / (1 + m)
    b = (rb - ta * np.eye(m)) / (1 + n)
    return a, b, _covering_slack(a, b, T)


def _beta_admm(T, left, right, opts: SolverOptions, max_iterations: int):
    n, m = left.dim, right.dim
    N = n * m
    sizes = (n, m, N, n, m, N)
    relax = opts.over_relaxation
    r1, r2 = left.density, right.density
    state = {}

    def step(x, rho):
        za, zb, zS, ua, ub, uS = _unpack(x, sizes)
        a, b, S = _covering_affine(za - ua - r1 / rho, zb - ub - r2 / rho, zS - uS, T, n, m)
        ah = relax * a + (1 - relax) * za
        bh = relax * b + (1 - relax) * zb
        Sh = relax * S + (1 - relax) * zS
        na, nb, nS = psd_project(ah + ua), psd_project(bh + ub), psd_project(Sh + uS)
        ua, ub, uS = ua + ah - na, ub + bh - nb, uS + Sh - nS
        D = -rho * uS
        value = (np.trace(r1 @ a) + np.trace(r2 @ b)).real
        rp = np.sqrt(np.linalg.norm(a - na) ** 2 + np.linalg.norm(b - nb) ** 2 + np.linalg.norm(S - nS) ** 2)
        rd = rho * np.sqrt(np.linalg.norm(na - za) ** 2 + np.linalg.norm(nb - zb) ** 2
                           + np.linalg.norm(nS - zS) ** 2)
        info = {"rp": float(rp), "rd": float(rd), "gap": float(value - np.trace(T @ D).real)}
        state.update(a=na, b=nb, D=(D + D.conj().T) / 2)
        return _pack(na, nb, nS, ua, ub, uS), info

    def rescale(x, factor):
        parts = _unpack(x, sizes)
        return _pack(*parts[:3], *(u / factor for u in parts[3:]))

    a0 = np.eye(n, dtype=complex)
    b0 = np.zeros((m, m), dtype=complex)
    x0 = _pack(a0, b0, _covering_slack(a0, b0, T), np.zeros((n, n), complex),
               np.zeros((m, m), complex), np.zeros((N, N), complex))
    info, k, rho, ok = _run_admm(step, x0, opts.penalty, opts, rescale, max_iterations)
    return state, info, k, rho, ok


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal basis (Frobenius inner product) of the real space of n x n Hermitian matrices."""
    basis = []
    for j in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[j, j] = 1.0
        basis.append(E)
    for j in range(n):
        for k in range(j + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[j, k] = E[k, j] = 1 / np.sqrt(2)
            basis.append(E)
            F = np.zeros((n, n), dtype=complex)
            F[j, k], F[k, j] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            basis.append(F)
    return np.array(basis)


def _beta_barrier(T, left, right, gap_tol: float, growth: float = 10.0,
                  centering_tol: float = 1e-3, max_newton: int = 60):
    """Path-following log-barrier method for the covering program.

    Minimises ``t (phi(a) + psi(b)) - log det(a (x) I + I (x) b - T)`` by
    damped Newton steps for increasing ``t``.  The constraints ``a, b >= 0``
    are dropped because they are implied up to the identity gauge
    ``(a + s I, b - s I)``; that gauge is fixed by removing ``b_00`` from
    the variables.  At a central point ``D = S^{-1} / t`` has exactly the
    prescribed marginals, and the objective exceeds the optimum by at most
    ``nm / t``.
    """
    n, m = left.dim, right.dim
    N = n * m
    Ba = hermitian_basis(n)
    Bb = hermitian_basis(m)[1:]
    A = np.concatenate([np.array([np.kron(B, np.eye(m)) for B in Ba]),
                        np.array([np.kron(np.eye(n), B) for B in Bb])])
    A_flat = A.reshape(len(A), -1)
    c = np.concatenate([[left(B) for B in Ba], [right(B) for B in Bb]])
    x = np.zeros(len(A))
    x[:n] = 2.0  # a = 2 I, b = 0: the slack 2 I - T is at least I
    t = 1.0
    newton = 0
    stalled = False
    while True:
        for _ in range(max_newton):
            S = np.tensordot(x, A, 1) - T
            Li = np.linalg.inv(np.linalg.cholesky(S))
            S_inv = Li.conj().T @ Li
            g = t * c - (A_flat @ S_inv.T.ravel()).real
            M = (Li @ A @ Li.conj().T).reshape(len(A), -1)
            H = (M.conj() @ M.T).real
            dx = -np.linalg.solve(H, g)
            lam = float(np.sqrt(max(-g @ dx, 0.0)))
            newton += 1
            step = 1.0 / (1.0 + lam) if lam > 0.25 else 1.0
            while True:
                try:
                    np.linalg.cholesky(np.tensordot(x + step * dx, A, 1) - T)
                    break
                except np.linalg.LinAlgError:
                    step /= 2
            x = x + step * dx
            if lam < centering_tol:
                break
        else:
            stalled = True
        if N / t < gap_tol:
            break
        t *= growth
    S = np.tensordot(x, A, 1) - T
    D = np.linalg.inv(S) / t
    a = np.tensordot(x[:len(Ba)], Ba, 1)
    b = np.tensordot(x[len(Ba):], Bb, 1)
    return a, b, (D + D.conj().T) / 2, newton, N / t, not stalled


def _solve_beta_core(T, left, right, opts: SolverOptions, method: str) -> SolverOutcome:
    if method not in ("auto", "admm", "barrier"):
        raise ValueError(f"unknown covering method {method!r}")
    iterations = 0
    if method in ("auto", "admm"):
        budget = opts.max_iterations if method == "admm" else min(opts.max_iterations, opts.covering_admm_budget)
        state, info, k, rho, ok = _beta_admm(T, left, right, opts, budget)
        iterations = k
        if ok or method == "admm":
            a, b, bound = certify_covering(state["a"], state["b"], T, left, right)
            D = psd_project(state["D"])
            return SolverOutcome(
                value=bound, primal=D, dual_a=a, dual_b=b,
                primal_residual=info["rp"], dual_residual=info["rd"],
                gap=float(bound - np.trace(T @ D).real), iterations=iterations,
                status=Status.CONVERGED if ok else Status.MAX_ITERATIONS,
                certified_bound=bound, penalty=rho, method="admm",
            )
    a, b, D, newton, measure, centred = _beta_barrier(T, left, right, opts.barrier_gap)
    a, b, bound = certify_covering(a, b, T, left, right)
    marginal = max(float(np.max(np.abs(partial_trace_b(D, left.dim, right.dim) - left.density))),
                   float(np.max(np.abs(partial_trace_a(D, left.dim, right.dim) - right.density))))
    return SolverOutcome(
        value=bound, primal=D, dual_a=a, dual_b=b,
        primal_residual=0.0, dual_residual=measure,
        gap=float(bound - np.trace(T @ D).real), iterations=iterations + newton,
        status=Status.CONVERGED if centred else Status.MAX_ITERATIONS,
        certified_bound=bound, method="barrier" if iterations == 0 else "admm+barrier",
        history={"newton_steps": newton, "marginal_residual": marginal},
    )


# ---------------------------------------------------------------------------
# support reduction for states with a kernel


class _Reduction(NamedTuple):
    T: np.ndarray
    left: MeasuredAlgebra
    right: MeasuredAlgebra
    V1: np.ndarray
    V2: np.ndarray


def _support_frame(rho, tol: float):
    w, V = np.linalg.eigh(rho)
    return V[:, w > tol]


def _reduce(T, left, right, tol: float = 1e-12) -> _Reduction | None:
    V1 = _support_frame(left.density, tol)
    V2 = _support_frame(right.density, tol)
    if V1.shape[1] == left.dim and V2.shape[1] == right.dim:
        return None

    def compress(rho, V):
        r = V.conj().T @ rho @ V
        return MeasuredAlgebra(r / np.trace(r).real)

    V = np.kron(V1, V2)
    return _Reduction(V.conj().T @ T @ V, compress(left.density, V1), compress(right.density, V2), V1, V2)


def _lift_covering(a, b, red: _Reduction, T, left, right):
    """Extend a covering pair of the compressed problem to the full space.

    Off the supports the pair is set to ``K`` times the identity, which the
    states do not see; ``K`` is chosen from a geometric grid to minimise the
    certified objective.
    """
    P1 = np.eye(left.dim) - red.V1 @ red.V1.conj().T
    P2 = np.eye(right.dim) - red.V2 @ red.V2.conj().T
    a0 = red.V1 @ a @ red.V1.conj().T
    b0 = red.V2 @ b @ red.V2.conj().T
    best = None
    for K in 10.0 ** np.arange(0, 11):
        cand = certify_covering(a0 + K * P1, b0 + K * P2, T, left, right)
        if best is None or cand[2] < best[2]:
            best = cand
    return best


def _lift(out: SolverOutcome, red: _Reduction, T, left, right, value_from_primal: bool) -> SolverOutcome:
    V = np.kron(red.V1, red.V2)
    D = V @ out.primal @ V.conj().T
    a, b, bound = _lift_covering(out.dual_a, out.dual_b, red, T, left, right)
    value = float(np.trace(T @ D).real) if value_from_primal else bound
    return replace(out, value=value, primal=D, dual_a=a, dual_b=b, certified_bound=bound,
                   gap=float(bound - np.trace(T @ D).real),
                   history={**out.history, "reduced_dims": (red.V1.shape[1], red.V2.shape[1])})


# ---------------------------------------------------------------------------
# public entry points


def solve_alpha(T, left: MeasuredAlgebra, right: MeasuredAlgebra,
                opts: SolverOptions | None = None) -> SolverOutcome:
    """Maximise ``Tr(T D)`` over couplings ``D`` of ``left`` and ``right``.

    Starts from the product coupling.  The covering certificate is the ADMM
    multiplier of the marginal constraints, made exactly feasible by
    :func:`certify_covering`; its price is ``certified_bound``.
    """
    opts = opts or SolverOptions()
    T, n, m = _check_problem(T, left, right)
    red = _reduce(T, left, right)
    if red is None:
        return _solve_alpha_core(T, left, right, opts)
    out = _solve_alpha_core(red.T, red.left, red.right, opts)
    return _lift(out, red, T, left, right, value_from_primal=True)


def solve_beta(T, left: MeasuredAlgebra, right: MeasuredAlgebra,
               opts: SolverOptions | None = None, method: str = "auto") -> SolverOutcome:
    """Minimise ``phi(a) + psi(b)`` over PSD ``a, b`` with ``a (x) I + I (x) b >= T``.

    ``method`` is ``"admm"``, ``"barrier"`` or ``"auto"`` (ADMM, then the
    barrier method if ADMM has not converged within the budget).  The
    reported value is certified: the returned pair is exactly feasible up to
    rounding, so ``value`` is an upper bound for alpha.
    """
    opts = opts or SolverOptions()
    T, n, m = _check_problem(T, left, right)
    red = _reduce(T, left, right)
    if red is None:
        return _solve_beta_core(T, left, right, opts, method)
    out = _solve_beta_core(red.T, red.left, red.right, opts, method)
    return _lift(out, red, T, left, right, value_from_primal=False)


def with_options(opts: SolverOptions | None, **changes) -> SolverOptions:
    """Copy of ``opts`` (or the defaults) with some fields replaced."""
    return replace(opts or SolverOptions(), **changes)
