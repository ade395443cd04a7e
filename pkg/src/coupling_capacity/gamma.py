"""The projective coupling capacity gamma.

``gamma(E) = min{phi(p) + psi(q) : E <= (p (x) 1) v (1 (x) q)}`` over pairs
of projections.  Exact values are available for product projections and
for rank-one projections in 2 x 2; a threshold sweep turns a covering pair
commuting with ``E`` into a projection pair; everything else gets a
certified interval ``[beta, upper]`` from a randomised subspace search.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .capacity import beta as beta_capacity
from .errors import PreconditionError, ValidationError
from .linalg import (is_projection, min_eigenvalue, partial_trace_a, partial_trace_b, proj_join,
                     projection, range_projection)
from .model import MeasuredAlgebra
from .sdp import SolverOptions

FEASIBILITY_TOL = 1e-7
SCHMIDT_TOL = 1e-8
COMMUTE_TOL = 1e-6


class Method(enum.Enum):
    EXACT_PRODUCT = "ExactProduct"
    EXACT_2X2_RANK_ONE = "Exact2x2RankOne"
    COMMUTING_SWEEP = "CommutingSweep"
    RANDOM_SEARCH = "RandomSearch"


@dataclass(frozen=True, eq=False)
class GammaResult:
    """Bounds for gamma with the projection pair attaining ``upper``."""

    lower: float
    upper: float
    method: Method
    exact: float | None = None
    optimizer: tuple[np.ndarray, np.ndarray] | None = None
    diagnostics: dict = field(default_factory=dict)


def cover_residual(E, p, q) -> float:
    """``||(p^perp (x) q^perp) E||_F``; zero exactly when ``E <= (p (x) 1) v (1 (x) q)``."""
    n, m = p.shape[0], q.shape[0]
    F = np.kron(np.eye(n) - p, np.eye(m) - q)
    return float(np.linalg.norm(F @ E))


def join_slack(E, p, q) -> float:
    """Smallest eigenvalue of ``(p (x) 1) v (1 (x) q) - E``."""
    return min_eigenvalue(proj_join(p, q) - E)


def _beta_lower(E, left, right, opts, lower):
    if lower is not None:
        return float(lower), {}
    res = beta_capacity(E, left, right, opts)
    return res.value, {"beta": res.diagnostics}


# ---------------------------------------------------------------------------
# exact families


def gamma_product(e, f, left: MeasuredAlgebra, right: MeasuredAlgebra,
                  opts: SolverOptions | None = None, lower: float | None = None) -> GammaResult:
    """``gamma(e (x) f) = min{phi(e), psi(f)}``, attained by ``(e, 0)`` or ``(0, f)``."""
    e = projection(e, name="e")
    f = projection(f, name="f")
    n, m = left.dim, right.dim
    if e.shape != (n, n) or f.shape != (m, m):
        raise ValidationError("projection sizes do not match the algebras")
    pe, qf = left(e), right(f)
    if pe <= qf:
        value, opt = pe, (e, np.zeros((m, m), dtype=complex))
    else:
        value, opt = qf, (np.zeros((n, n), dtype=complex), f)
    lo, diag = _beta_lower(np.kron(e, f), left, right, opts, lower)
    return GammaResult(lo, value, Method.EXACT_PRODUCT, value, opt, diag)


def gamma_rank_one_2x2(xi, opts: SolverOptions | None = None, lower: float | None = None,
                       schmidt_tol: float = SCHMIDT_TOL) -> GammaResult:
    """gamma of the projection onto ``xi`` in ``C^2 (x) C^2`` with normalised traces.

    It is 1 when ``xi`` is entangled and 1/2 when ``xi`` is separable.
    """
    v = np.asarray(xi, dtype=complex).ravel()
    if v.shape != (4,):
        raise ValidationError("expected a vector in C^2 (x) C^2")
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise ValidationError("vector must have unit norm")
    U, s, Vh = np.linalg.svd(v.reshape(2, 2))
    tr2 = MeasuredAlgebra.trace(2)
    E = np.outer(v, v.conj())
    if s[1] > schmidt_tol:
        value, opt = 1.0, (np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex))
    else:
        e = np.outer(U[:, 0], U[:, 0].conj())
        value, opt = 0.5, (e, np.zeros((2, 2), dtype=complex))
    lo, diag = _beta_lower(E, tr2, tr2, opts, lower)
    diag["schmidt"] = s
    return GammaResult(lo, value, Method.EXACT_2X2_RANK_ONE, value, opt, diag)


# ---------------------------------------------------------------------------
# threshold sweep


def _commutator_norm(E, X):
    return float(np.linalg.norm(E @ X - X @ E))


def gamma_commuting_sweep(E, a, b, left: MeasuredAlgebra, right: MeasuredAlgebra,
                          lower: float | None = None, opts: SolverOptions | None = None,
                          commute_tol: float = COMMUTE_TOL) -> GammaResult:
    """Turn a covering pair ``(a, b)`` commuting with ``E`` into a projection pair.

    With spectral decompositions ``a = sum lambda_i p_i``, ``b = sum mu_j q_j``
    (eigenvalues clamped to [0, 1]) put ``c_i = 1 - lambda_i`` and
    ``d_j = 1 - mu_j``.  For a threshold ``t`` the projections
    ``p_t = sum{p_i : c_i > t}`` and ``q_t = sum{q_j : d_j > 1 - t}`` satisfy
    ``p_t (x) q_t <= 1 - E``, so ``(1 - p_t, 1 - q_t)`` covers ``E``.  The
    price ``2 - phi(p_t) - psi(q_t)`` is piecewise constant in ``t``; every
    piece is tried and the cheapest pair that passes the cover check wins.
    Its price is at most ``phi(a) + psi(b)``.
    """
    E = projection(E, name="E")
    n, m = left.dim, right.dim
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    A, B = np.kron(a, np.eye(m)), np.kron(np.eye(n), b)
    comm = max(_commutator_norm(E, A), _commutator_norm(E, B))
    if comm > commute_tol:
        raise PreconditionError(f"covering pair does not commute with E (commutator norm {comm:.3e})")
    lam, P = np.linalg.eigh((a + a.conj().T) / 2)
    mu, Q = np.linalg.eigh((b + b.conj().T) / 2)
    c = 1 - np.clip(lam, 0, 1)
    d = 1 - np.clip(mu, 0, 1)
    thresholds = sorted({0.0, *c.tolist(), *(1 - d).tolist()})
    # each piece of the step function is represented by its left end and a point just inside it
    probes = sorted({t for s in thresholds for t in (s, min(1.0, s + 1e-12))} | {1.0})
    best = (1.0, np.eye(n, dtype=complex), np.zeros((m, m), dtype=complex), None)
    for t in probes:
        pt = P[:, c > t] @ P[:, c > t].conj().T
        qt = Q[:, d > 1 - t] @ Q[:, d > 1 - t].conj().T
        p, q = np.eye(n) - pt, np.eye(m) - qt
        price = left(p) + right(q)
        if price < best[0] - 1e-12 and cover_residual(E, p, q) <= FEASIBILITY_TOL:
            best = (price, p.astype(complex), q.astype(complex), t)
    lo, diag = _beta_lower(E, left, right, opts, lower)
    diag.update(commutator=comm, threshold=best[3], covering_price=left(a) + right(b))
    return GammaResult(lo, best[0], Method.COMMUTING_SWEEP, None, (best[1], best[2]), diag)


# ---------------------------------------------------------------------------
# randomised search


def _bottom(M, k):
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return V[:, :k]


def _alternating_fit(E, n, m, du, dv, rng, max_iter=200, tol=1e-12):
    """Minimise ``Tr(E (P_U (x) P_V))`` over ``du``- and ``dv``-dimensional subspaces."""
    G = rng.standard_normal((m, dv)) + 1j * rng.standard_normal((m, dv))
    V, _ = np.linalg.qr(G)
    E4 = E.reshape(n, m, n, m)
    prev = np.inf
    U = None
    val = np.inf
    for _ in range(max_iter):
        PV = V @ V.conj().T
        MV = np.einsum("ikjl,lk->ij", E4, PV)
        U = _bottom(MV, du)
        PU = U @ U.conj().T
        NU = np.einsum("ikjl,ji->kl", E4, PU)
        V = _bottom(NU, dv)
        PV = V @ V.conj().T
        val = float(np.trace(E @ np.kron(PU, PV)).real)
        if prev - val < tol:
            break
        prev = val
    return U, V, max(val, 0.0)


def gamma_search(E, left: MeasuredAlgebra, right: MeasuredAlgebra, restarts: int = 32, seed: int = 0,
                 lower: float | None = None, opts: SolverOptions | None = None) -> GammaResult:
    """Certified upper bound for gamma of a projection by searching over co-ranks.

    ``p^perp`` and ``q^perp`` of dimensions ``(du, dv)`` give a cover exactly
    when ``Tr(E (p^perp (x) q^perp)) = 0``.  Co-rank pairs are visited in
    order of their best conceivable price (the ``n - du`` smallest
    eigenvalues of ``rho1`` plus the ``m - dv`` smallest of ``rho2``), ties
    going to the smaller ``du + dv``.  For each pair the trace is minimised
    by alternating eigenvector updates from ``restarts`` seeded random
    starts; residual ``sqrt(Tr(...)) <= 1e-7`` counts as a cover.
    """
    E = projection(E, name="E")
    n, m = left.dim, right.dim
    if E.shape != (n * m, n * m):
        raise ValidationError("E does not match the algebras")
    kernel = n * m - int(round(np.trace(E).real))
    w1 = np.sort(np.linalg.eigvalsh(left.density))
    w2 = np.sort(np.linalg.eigvalsh(right.density))

    def best_case(du, dv):
        return float(np.sum(w1[:n - du]) + np.sum(w2[:m - dv]))

    pairs = [(du, dv) for du, dv in itertools.product(range(1, n + 1), range(1, m + 1)) if du * dv <= kernel]
    pairs.sort(key=lambda pr: (best_case(*pr), pr[0] + pr[1], pr))
    upper, opt, tried = 1.0, (np.eye(n, dtype=complex), np.zeros((m, m), dtype=complex)), []
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    for du, dv in pairs:
        if best_case(du, dv) >= upper - 1e-12:
            break
        found = None
        for ss in seeds:
            U, V, val = _alternating_fit(E, n, m, du, dv, np.random.default_rng(ss))
            if np.sqrt(val) <= FEASIBILITY_TOL:
                p = np.eye(n) - U @ U.conj().T
                q = np.eye(m) - V @ V.conj().T
                price = left(p) + right(q)
                if found is None or price < found[0] - 1e-12:
                    found = (price, p, q)
        tried.append((du, dv, found is not None))
        if found is not None and found[0] < upper:
            upper, opt = found[0], (found[1], found[2])
    lo, diag = _beta_lower(E, left, right, opts, lower)
    diag["pairs_tried"] = tried
    return GammaResult(lo, upper, Method.RANDOM_SEARCH, None, opt, diag)


# ---------------------------------------------------------------------------
# dispatcher


def _product_factors(E, n, m, tol=1e-8):
    e = range_projection(partial_trace_b(E, n, m))
    f = range_projection(partial_trace_a(E, n, m))
    if np.linalg.norm(E - np.kron(e, f)) <= tol:
        return e, f
    return None


def gamma_bounds(T, left: MeasuredAlgebra, right: MeasuredAlgebra, restarts: int = 32, seed: int = 0,
          opts: SolverOptions | None = None) -> GammaResult:
    """gamma of a positive contraction, through its range projection.

    Product projections and rank-one projections in 2 x 2 with normalised
    traces get exact values.  Otherwise beta is solved; if its optimiser
    commutes with ``E`` the threshold sweep runs, and the randomised search
    always runs; the smaller upper bound is reported.
    """
    n, m = left.dim, right.dim
    T = np.asarray(T, dtype=complex)
    E = T if is_projection(T) else range_projection(T)
    E = projection(E, name="E")
    factors = _product_factors(E, n, m)
    if factors is not None:
        return gamma_product(*factors, left, right, opts)
    if (n, m) == (2, 2) and left.is_uniform() and right.is_uniform() and round(np.trace(E).real) == 1:
        w, V = np.linalg.eigh(E)
        return gamma_rank_one_2x2(V[:, -1], opts)
    b_res = beta_capacity(E, left, right, opts)
    lower = b_res.value
    a, b = b_res.certificate
    search = gamma_search(E, left, right, restarts, seed, lower=lower)
    try:
        sweep = gamma_commuting_sweep(E, a, b, left, right, lower=lower)
    except PreconditionError:
        sweep = None
    result = search if sweep is None or search.upper <= sweep.upper else sweep
    result.diagnostics["beta"] = b_res.diagnostics
    return result
