"""Worked values with closed forms, run as a regression suite.

Each case computes one number and compares it with a known value.  A
failing or raising case is recorded and the suite carries on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import capacity, entangle, gamma
from .linalg import Subspace, partial_trace_b, vector_projection
from .model import ChoiMap, MeasuredAlgebra, coupling_of_choi, is_coupling, apply_choi_blockwise
from .sampling import haar_unitary, maximally_entangled_vector, schmidt_vector
from .sdp import SolverOptions

SEED = 20240611


@dataclass(frozen=True)
class Case:
    name: str
    expected: float
    tol: float
    compute: Callable[[SolverOptions], float]


@dataclass(frozen=True)
class CaseResult:
    name: str
    expected: float
    observed: float | None
    delta: float | None
    passed: bool
    error: str | None = None


def xi_t(t: float) -> np.ndarray:
    """``t e_1 (x) e_1 + sqrt(1 - t^2) e_2 (x) e_2`` in C^2 (x) C^2."""
    return np.array([t, 0.0, 0.0, np.sqrt(1 - t * t)], dtype=complex)


def closed_form_alpha_xi_t(t: float) -> float:
    return 0.5 + t * np.sqrt(1 - t * t)


def vector_state_pair():
    """Both algebras M_2 with the vector state of ``(1, 1)/sqrt 2``, and ``E = p (x) p``, ``p = e_1 e_1*``."""
    omega = MeasuredAlgebra.vector_state(np.array([1.0, 1.0]) / np.sqrt(2))
    p = np.diag([1.0, 0.0]).astype(complex)
    return np.kron(p, p), omega, p


def rank_projection(n: int, k: int) -> np.ndarray:
    return np.diag([1.0] * k + [0.0] * (n - k)).astype(complex)


def _tr(n):
    return MeasuredAlgebra.trace(n)


def _alpha(T, n, m, opts):
    return capacity.alpha(T, _tr(n), _tr(m), opts).value


def _beta(T, n, m, opts):
    return capacity.beta(T, _tr(n), _tr(m), opts).value


def _partial_trace_schmidt(opts):
    rng = np.random.default_rng(SEED)
    U, V = haar_unitary(rng, 2), haar_unitary(rng, 2)
    lam = np.array([0.8, 0.6])
    xi = schmidt_vector(lam, U, V)
    expected = U @ np.diag(lam ** 2) @ U.conj().T
    return float(np.max(np.abs(partial_trace_b(vector_projection(xi), 2, 2) - expected)))


def _choi_identity(opts):
    n = 2
    c = coupling_of_choi(ChoiMap.from_function(lambda x: n * x, n))
    zeta = maximally_entangled_vector(n)
    return float(np.max(np.abs(c.density - vector_projection(zeta))))


def _choi_conjugation(opts):
    n = 3
    U = haar_unitary(np.random.default_rng(SEED), n)
    c = coupling_of_choi(ChoiMap.unitary_conjugation(U).scaled(n))
    v = sum(np.kron(np.eye(n)[i], U[:, i]) for i in range(n)) / np.sqrt(n)
    return float(np.max(np.abs(c.density - vector_projection(v))))


def _ampliated_conjugation(opts):
    rng = np.random.default_rng(SEED)
    U = haar_unitary(rng, 2)
    xi = schmidt_vector([0.8, 0.6], haar_unitary(rng, 2), haar_unitary(rng, 2))
    out = apply_choi_blockwise(ChoiMap.unitary_conjugation(U), vector_projection(xi))
    return float(np.max(np.abs(out - vector_projection(np.kron(np.eye(2), U) @ xi))))


def _aligned_conjugation(opts):
    rng = np.random.default_rng(SEED)
    n = 3
    lam = np.array([0.7, 0.6, np.sqrt(1 - 0.49 - 0.36)])
    A, B = haar_unitary(rng, n), haar_unitary(rng, n)
    xi = schmidt_vector(lam, A, B)
    # U b_i = conj(a_i) lines (I (x) U) xi up with the frame of zeta
    U = A.conj() @ B.conj().T
    return capacity.alpha_channel_form(vector_projection(xi), ChoiMap.unitary_conjugation(U))


def _strassen_margin(opts):
    X = Subspace.span([np.kron([1, 0], [1, 0])])
    v = capacity.strassen_decide(X, _tr(2), _tr(2), opts)
    return v.margin if not v.feasible else float("nan")


def _strassen_feasible(opts):
    X = Subspace.span([maximally_entangled_vector(2)])
    return float(capacity.strassen_decide(X, _tr(2), _tr(2), opts).feasible)


def _sweep_endpoints(n):
    def run(opts):
        pts = entangle.capacity_sweep(n, 2, opts)
        return abs(pts[0][1] - 1 / n) + abs(pts[1][1] - 1)
    return run


def _sweep_closed_form(opts):
    worst = 0.0
    for s, a in entangle.capacity_sweep(2, 11, opts):
        t = np.sqrt(1 - s / 2)
        worst = max(worst, abs(a - closed_form_alpha_xi_t(t)))
    return worst


def _min_projection(E):
    def run(opts):
        return float(entangle.alpha_min_projection_check(E, 2, opts))
    return run


def cases() -> list[Case]:
    E_pp, omega, p = vector_state_pair()
    e3, f3 = rank_projection(3, 1), rank_projection(3, 2)
    zeta2, zeta3 = maximally_entangled_vector(2), maximally_entangled_vector(3)
    sep23 = np.kron([1, 0], [0, 1, 0]).astype(complex)
    sep22 = np.kron([1, 0], [0, 1]).astype(complex)
    P = vector_projection
    out = [
        Case("partial_trace_rank_one_schmidt_residual", 0.0, 1e-12, _partial_trace_schmidt),
        Case("maximally_entangled_projection_is_trace_coupling", 1.0, 0.0,
             lambda o: float(is_coupling(P(zeta2), _tr(2), _tr(2)).ok)),
        Case("choi_identity_map_gives_maximally_entangled_coupling", 0.0, 1e-12, _choi_identity),
        Case("choi_unitary_conjugation_gives_rotated_maximally_entangled", 0.0, 1e-12, _choi_conjugation),
        Case("ampliated_conjugation_of_rank_one", 0.0, 1e-12, _ampliated_conjugation),
        Case("alpha_maximally_entangled_2x2", 1.0, 1e-6, lambda o: _alpha(P(zeta2), 2, 2, o)),
        Case("alpha_separable_2x3", 1 / 3, 1e-6, lambda o: _alpha(P(sep23), 2, 3, o)),
        Case("alpha_xi_t_0.8", 0.98, 1e-6, lambda o: _alpha(P(xi_t(0.8)), 2, 2, o)),
        Case("alpha_product_projection_vector_states", 0.25, 1e-6,
             lambda o: capacity.alpha(E_pp, omega, omega, o).value),
        Case("beta_product_projection_vector_states", 0.25, 1e-6,
             lambda o: capacity.beta(E_pp, omega, omega, o).value),
        Case("alpha_product_ranks_1_2_in_3x3", 1 / 3, 1e-6, lambda o: _alpha(np.kron(e3, f3), 3, 3, o)),
        Case("beta_product_ranks_1_2_in_3x3", 1 / 3, 1e-6, lambda o: _beta(np.kron(e3, f3), 3, 3, o)),
        Case("w_separable_2x3", 1 / 3, 1e-9, lambda o: capacity.w_of_vector(sep23, 2, 3).value),
        Case("w_xi_t_0.9", 1 / (2 * 0.81), 1e-9, lambda o: capacity.w_of_vector(xi_t(0.9), 2, 2).value),
        Case("w_xi_t_0.9_direct_program", 1 / (2 * 0.81), 1e-9,
             lambda o: capacity.w_of_vector(xi_t(0.9), 2, 2).diagnostics["direct"]),
        Case("channel_form_aligned_conjugation_3x3", (0.7 + 0.6 + np.sqrt(0.15)) ** 2 / 3, 1e-12,
             _aligned_conjugation),
        Case("unitary_search_schmidt_0.8_0.6", 0.98, 1e-6,
             lambda o: capacity.alpha_unitary_search(P(xi_t(0.8)), 2, seed=SEED)),
        Case("unitary_search_maximally_entangled_2x2", 1.0, 1e-6,
             lambda o: capacity.alpha_unitary_search(P(zeta2), 2, seed=SEED)),
        Case("strassen_maximally_entangled_line_feasible", 1.0, 0.0, _strassen_feasible),
        Case("strassen_product_line_certificate_margin", 0.5, 1e-5, _strassen_margin),
        Case("gamma_product_ranks_1_2_in_3x3", 1 / 3, 1e-12,
             lambda o: gamma.gamma_product(e3, f3, _tr(3), _tr(3), o).exact),
        Case("gamma_product_projection_vector_states", 0.5, 1e-12,
             lambda o: gamma.gamma_product(p, p, omega, omega, o).exact),
        Case("gamma_rank_one_2x2_maximally_entangled", 1.0, 0.0,
             lambda o: gamma.gamma_rank_one_2x2(zeta2, o).exact),
        Case("gamma_rank_one_2x2_separable", 0.5, 0.0, lambda o: gamma.gamma_rank_one_2x2(sep22, o).exact),
        Case("gamma_rank_one_2x2_xi_t_0.9", 1.0, 0.0, lambda o: gamma.gamma_rank_one_2x2(xi_t(0.9), o).exact),
        Case("gamma_search_separable_2x2", 0.5, 1e-7,
             lambda o: gamma.gamma_search(P(sep22), _tr(2), _tr(2), seed=SEED, opts=o).upper),
        Case("gamma_search_entangled_2x2", 1.0, 1e-7,
             lambda o: gamma.gamma_search(P(xi_t(0.9)), _tr(2), _tr(2), seed=SEED, opts=o).upper),
        Case("classify_separable_2x3_alpha", 1 / 3, 1e-5, lambda o: entangle.classify(sep23, 2, 3, o).alpha_value),
        Case("classify_maximally_entangled_3x3_alpha", 1.0, 1e-5,
             lambda o: entangle.classify(zeta3, 3, 3, o).alpha_value),
        Case("classify_xi_t_0.9_alpha", closed_form_alpha_xi_t(0.9), 1e-5,
             lambda o: entangle.classify(xi_t(0.9), 2, 2, o).alpha_value),
        Case("rank_one_lower_separable_2x2", 0.5, 1e-12, lambda o: entangle.alpha_rank_one_lower(sep22, 2)),
        Case("rank_one_lower_maximally_entangled_3x3", 1.0, 1e-12,
             lambda o: entangle.alpha_rank_one_lower(zeta3, 3)),
        Case("rank_one_lower_xi_t_0.8", 0.98, 1e-12, lambda o: entangle.alpha_rank_one_lower(xi_t(0.8), 2)),
        Case("capacity_sweep_endpoints_n2", 0.0, 1e-5, _sweep_endpoints(2)),
        Case("capacity_sweep_endpoints_n3", 0.0, 1e-5, _sweep_endpoints(3)),
        Case("capacity_sweep_closed_form_n2", 0.0, 1e-5, _sweep_closed_form),
        Case("minimum_projection_check_identity_tensor_rank_one", 1.0, 0.0,
             _min_projection(np.kron(np.eye(2), np.diag([1.0, 0.0])))),
        Case("minimum_projection_check_entangled_vector", 1.0, 0.0, _min_projection(P(xi_t(0.9)))),
    ]
    for t in (0.71, 0.75, 0.8, 0.9, 0.95, 1.0):
        out.append(Case(f"alpha_xi_t_{t}", closed_form_alpha_xi_t(t), 1e-5,
                        lambda o, t=t: _alpha(P(xi_t(t)), 2, 2, o)))
        out.append(Case(f"w_xi_t_{t}", 1 / (2 * t * t), 1e-9,
                        lambda o, t=t: capacity.w_of_vector(xi_t(t), 2, 2).value))
    return out


def run(opts: SolverOptions | None = None, selected: list[str] | None = None) -> list[CaseResult]:
    results = []
    for case in cases():
        if selected is not None and case.name not in selected:
            continue
        try:
            observed = float(case.compute(opts))
        except Exception as exc:  # a failing case must not stop the suite
            results.append(CaseResult(case.name, case.expected, None, None, False, f"{type(exc).__name__}: {exc}"))
            continue
        delta = abs(observed - case.expected)
        results.append(CaseResult(case.name, case.expected, observed, delta, bool(delta <= case.tol)))
    return results
