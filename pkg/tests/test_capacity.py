import numpy as np
import pytest

from coupling_capacity.capacity import (Kind, alpha, alpha_channel_form, alpha_unitary_search, beta, duality_gap,
                                        product_projection_coupling, strassen_decide, w_of_vector,
                                        w_scalar_program)
from coupling_capacity.errors import PreconditionError, ValidationError
from coupling_capacity.linalg import Subspace, min_eigenvalue, vector_projection
from coupling_capacity.model import ChoiMap, MeasuredAlgebra, channel_of_coupling, is_coupling
from coupling_capacity.sampling import (haar_unitary, maximally_entangled_vector, random_density,
                                        random_maximally_entangled_vector, random_projection,
                                        random_psd_contraction, random_separable_vector, random_unit_vector,
                                        schmidt_vector)

TR2 = MeasuredAlgebra.trace(2)


def xi_t(t):
    return np.array([t, 0, 0, np.sqrt(1 - t * t)], dtype=complex)


def test_alpha_identity():
    res = alpha(np.eye(4), TR2, TR2)
    assert res.kind is Kind.ALPHA
    assert abs(res.value - 1) <= 1e-8
    assert res.witness is not None


def test_beta_identity():
    res = beta(np.eye(4), TR2, TR2)
    assert res.kind is Kind.BETA
    assert abs(res.value - 1) <= 1e-8
    a, b = res.certificate
    assert min_eigenvalue(np.kron(a, np.eye(2)) + np.kron(np.eye(2), b) - np.eye(4)) >= -1e-9


def test_product_ranks_1_2_in_3x3():
    tr3 = MeasuredAlgebra.trace(3)
    E = np.kron(np.diag([1.0, 0, 0]), np.diag([1.0, 1.0, 0]))
    assert abs(alpha(E, tr3, tr3).value - 1 / 3) <= 1e-6
    assert abs(beta(E, tr3, tr3).value - 1 / 3) <= 1e-6


def test_product_projection_vector_states():
    omega = MeasuredAlgebra.vector_state(np.array([1.0, 1.0]) / np.sqrt(2))
    p = np.diag([1.0, 0.0])
    assert abs(alpha(np.kron(p, p), omega, omega).value - 0.25) <= 1e-6
    assert abs(beta(np.kron(p, p), omega, omega).value - 0.25) <= 1e-6


def test_witness_is_optimal_coupling(rng):
    left, right = MeasuredAlgebra(random_density(rng, 2)), MeasuredAlgebra(random_density(rng, 3))
    T = random_psd_contraction(rng, 6)
    res = alpha(T, left, right)
    assert is_coupling(res.witness.density, left, right).ok
    assert abs(res.witness(T) - res.value) <= 1e-9


def test_values_in_unit_interval(rng):
    for _ in range(10):
        left, right = MeasuredAlgebra(random_density(rng, 2)), MeasuredAlgebra(random_density(rng, 2))
        T = random_psd_contraction(rng, 4, rank=rng.integers(1, 5))
        for res in (alpha(T, left, right), beta(T, left, right)):
            assert -1e-9 <= res.value <= 1 + 1e-9


def test_duality_gap_identity():
    assert abs(duality_gap(np.eye(4), TR2, TR2)) <= 1e-8


def test_duality_gap_batch(rng):
    gaps = []
    for _ in range(20):
        left, right = MeasuredAlgebra(random_density(rng, 2)), MeasuredAlgebra(random_density(rng, 2))
        gaps.append(duality_gap(random_psd_contraction(rng, 4), left, right))
    assert max(abs(g) for g in gaps) <= 1e-6


def test_w_separable():
    res = w_of_vector(np.kron([1, 0], [0, 0, 1]), 2, 3)
    assert res.kind is Kind.W
    assert abs(res.value - 1 / 3) <= 1e-12


def test_w_xi_t():
    res = w_of_vector(xi_t(0.9), 2, 2)
    assert abs(res.value - 1 / (2 * 0.81)) <= 1e-12
    assert res.diagnostics["direct_error"] <= 1e-9


def test_w_maximally_entangled():
    for n in (2, 3, 4):
        assert abs(w_of_vector(maximally_entangled_vector(n), n, n).value - 1) <= 1e-12


def test_w_rejects_non_unit():
    with pytest.raises(ValidationError):
        w_of_vector(np.array([1.0, 1.0, 0, 0]), 2, 2)


def test_w_closed_form_matches_program(rng):
    for _ in range(30):
        n, m = sorted(rng.integers(1, 5, size=2))
        xi = random_unit_vector(rng, n * m)
        res = w_of_vector(xi, n, m)
        assert res.diagnostics["direct_error"] <= 1e-9
        assert res.value >= 1 / m - 1e-12


def test_w_at_lower_bound_only_for_separable(rng):
    xi = random_separable_vector(rng, 2, 3)
    assert abs(w_of_vector(xi, 2, 3).value - 1 / 3) <= 1e-9
    xi = random_unit_vector(rng, 6)
    assert w_of_vector(xi, 2, 3).value > 1 / 3 + 1e-6


def test_w_below_beta(rng):
    for _ in range(10):
        n, m = (2, 2) if rng.random() < 0.5 else (2, 3)
        xi = random_unit_vector(rng, n * m)
        b = beta(vector_projection(xi), MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m)).value
        assert w_of_vector(xi, n, m).value <= b + 1e-6


def test_w_scalar_program_trivial():
    assert abs(w_scalar_program([1.0], 1, 2) - 0.5) <= 1e-12


def test_channel_form_identity_channel():
    zeta = maximally_entangled_vector(3)
    assert abs(alpha_channel_form(vector_projection(zeta), ChoiMap.from_function(lambda x: x, 3)) - 1) <= 1e-12


def test_channel_form_aligned_conjugation(rng):
    n = 3
    lam = np.sqrt(rng.dirichlet(np.ones(n)))
    A, B = haar_unitary(rng, n), haar_unitary(rng, n)
    xi = schmidt_vector(lam, A, B)
    U = A.conj() @ B.conj().T
    value = alpha_channel_form(vector_projection(xi), ChoiMap.unitary_conjugation(U))
    assert abs(value - lam.sum() ** 2 / n) <= 1e-12


def test_channel_form_rejects_non_unital():
    with pytest.raises(PreconditionError):
        alpha_channel_form(np.eye(4), ChoiMap.from_function(lambda x: 2 * x, 2))


def test_channel_form_is_lower_bound(rng):
    tr = MeasuredAlgebra.trace(2)
    for _ in range(5):
        T = random_psd_contraction(rng, 4)
        a = alpha(T, tr, tr)
        U = haar_unitary(rng, 2)
        assert alpha_channel_form(T, ChoiMap.unitary_conjugation(U)) <= a.value + 1e-6
        # the channel of the optimal coupling attains alpha
        assert abs(alpha_channel_form(T, channel_of_coupling(a.witness)) - a.value) <= 1e-6


def test_unitary_search_examples():
    assert abs(alpha_unitary_search(vector_projection(xi_t(0.8)), 2) - 0.98) <= 1e-6
    assert abs(alpha_unitary_search(vector_projection(maximally_entangled_vector(2)), 2) - 1) <= 1e-6


def test_unitary_search_exact_for_qubits(rng):
    for _ in range(5):
        E = vector_projection(random_unit_vector(rng, 4))
        assert abs(alpha_unitary_search(E, 2, seed=1) - alpha(E, TR2, TR2).value) <= 1e-5


def test_unitary_search_lower_bound_n3(rng):
    tr3 = MeasuredAlgebra.trace(3)
    for _ in range(3):
        E = vector_projection(random_unit_vector(rng, 9))
        assert alpha_unitary_search(E, 3, restarts=2) <= alpha(E, tr3, tr3).value + 1e-6


def test_strassen_maximally_entangled_line():
    zeta = maximally_entangled_vector(2)
    v = strassen_decide(Subspace.span([zeta]), TR2, TR2)
    assert v.feasible
    assert v.support_residual <= 1e-6
    assert np.max(np.abs(v.witness.density - vector_projection(zeta))) <= 1e-6


def test_strassen_product_line():
    v = strassen_decide(Subspace.span([np.kron([1, 0], [1, 0])]), TR2, TR2)
    assert not v.feasible
    assert abs(v.alpha_value - 0.5) <= 1e-6
    a1, a2 = v.certificate
    E_perp = np.eye(4) - vector_projection(np.kron([1, 0], [1, 0]))
    assert min_eigenvalue(E_perp - (np.kron(a1, np.eye(2)) - np.kron(np.eye(2), a2))) >= -1e-6
    assert v.margin >= 0.5 - 1e-5


def test_strassen_whole_space():
    v = strassen_decide(Subspace(np.eye(4)), TR2, TR2)
    assert v.feasible and v.support_residual <= 1e-6


def test_strassen_margin_matches_alpha(rng):
    for _ in range(5):
        X = Subspace.span([random_unit_vector(rng, 4)])
        v = strassen_decide(X, TR2, TR2)
        if not v.feasible:
            assert v.margin >= 1 - v.alpha_value - 1e-6
            assert v.diagnostics["certificate_min_eigenvalue"] >= -1e-6


def test_strassen_feasible_for_random_maximally_entangled(rng):
    for _ in range(5):
        X = Subspace.span([random_maximally_entangled_vector(rng, 2), random_unit_vector(rng, 4)])
        v = strassen_decide(X, TR2, TR2)
        assert v.feasible and v.support_residual <= 1e-6


def test_product_projection_coupling(rng):
    for n in range(1, 5):
        for m in range(1, 5):
            k, l = rng.integers(0, n + 1), rng.integers(0, m + 1)
            e, f = random_projection(rng, n, k), random_projection(rng, m, l)
            c = product_projection_coupling(e, f)
            assert is_coupling(c.density, MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m), 1e-12).ok
            assert abs(c(np.kron(e, f)) - min(k / n, l / m)) <= 1e-12


def test_continuity_spot_check(rng):
    for _ in range(10):
        rho1, rho2 = random_density(rng, 2, 0.05), random_density(rng, 2, 0.05)
        T = random_psd_contraction(rng, 4)
        base = alpha(T, MeasuredAlgebra(rho1), MeasuredAlgebra(rho2)).value
        d = random_density(rng, 2)
        moved = MeasuredAlgebra((1 - 5e-4) * rho1 + 5e-4 * d)
        assert abs(alpha(T, moved, MeasuredAlgebra(rho2)).value - base) <= 0.1
