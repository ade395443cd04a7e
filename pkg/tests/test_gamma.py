import numpy as np
import pytest

from coupling_capacity.capacity import beta
from coupling_capacity.classical import ClassicalInstance, diag_embed, ot_gamma
from coupling_capacity.errors import PreconditionError, ValidationError
from coupling_capacity.gamma import (Method, cover_residual, gamma_bounds, gamma_commuting_sweep, gamma_product,
                                     gamma_rank_one_2x2, gamma_search, join_slack)
from coupling_capacity.linalg import vector_projection
from coupling_capacity.model import MeasuredAlgebra
from coupling_capacity.sampling import (maximally_entangled_vector, random_density, random_projection,
                                        random_separable_vector, random_unit_vector)

TR2 = MeasuredAlgebra.trace(2)


def tr(n):
    return MeasuredAlgebra.trace(n)


def check_optimizer(res, E, left, right):
    p, q = res.optimizer
    assert join_slack(E, p, q) >= -1e-7
    assert abs(left(p) + right(q) - res.upper) <= 1e-9


def vector_state_instance():
    omega = MeasuredAlgebra.vector_state(np.array([1.0, 1.0]) / np.sqrt(2))
    p = np.diag([1.0, 0.0])
    return np.kron(p, p), omega, p


def test_cover_residual_product():
    e = np.diag([1.0, 0.0])
    E = np.kron(e, e)
    assert cover_residual(E, e, np.zeros((2, 2))) == 0
    assert cover_residual(E, np.zeros((2, 2)), np.zeros((2, 2))) > 0.5


def test_product_examples(rng):
    e, f = np.diag([1.0, 0, 0]), np.diag([1.0, 1.0, 0])
    res = gamma_product(e, f, tr(3), tr(3))
    assert res.method is Method.EXACT_PRODUCT
    assert abs(res.exact - 1 / 3) <= 1e-12
    check_optimizer(res, np.kron(e, f), tr(3), tr(3))
    f = random_projection(rng, 3, 2)
    res = gamma_product(np.eye(2), f, tr(2), tr(3))
    assert abs(res.exact - 2 / 3) <= 1e-12


def test_product_vector_states_strict():
    E, omega, p = vector_state_instance()
    res = gamma_product(p, p, omega, omega)
    assert abs(res.exact - 0.5) <= 1e-12
    assert abs(res.lower - 0.25) <= 1e-6


def test_product_rejects_non_projection():
    with pytest.raises(ValidationError):
        gamma_product(np.diag([0.5, 0]), np.eye(2), TR2, TR2)


def test_rank_one_2x2_examples():
    assert gamma_rank_one_2x2(maximally_entangled_vector(2)).exact == 1.0
    assert gamma_rank_one_2x2(np.kron([1, 0], [0, 1])).exact == 0.5
    res = gamma_rank_one_2x2(np.array([0.9, 0, 0, np.sqrt(0.19)]))
    assert res.exact == 1.0
    assert res.lower <= res.upper + 1e-6
    check_optimizer(res, vector_projection([0.9, 0, 0, np.sqrt(0.19)]), TR2, TR2)


def test_sweep_trivial_cases():
    e, f = np.diag([1.0, 0.0]), np.diag([1.0, 0.0])
    res = gamma_commuting_sweep(np.kron(e, f), e, np.zeros((2, 2)), TR2, TR2, lower=0.5)
    assert abs(res.upper - 0.5) <= 1e-12
    assert np.allclose(res.optimizer[0], e) and np.allclose(res.optimizer[1], 0)
    res = gamma_commuting_sweep(np.eye(4), np.eye(2), np.zeros((2, 2)), TR2, TR2, lower=1.0)
    assert abs(res.upper - 1) <= 1e-12


def test_sweep_rejects_non_commuting():
    E = vector_projection(maximally_entangled_vector(2))
    with pytest.raises(PreconditionError):
        gamma_commuting_sweep(E, np.diag([1.0, 0.0]), np.zeros((2, 2)), TR2, TR2, lower=0.5)


def test_sweep_matches_classical_cover(rng):
    checked = 0
    for _ in range(40):
        S = (rng.random((2, 2)) < 0.6).astype(float)
        if not S.any():
            continue
        mu, nu = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
        inst = ClassicalInstance(mu, nu, S)
        E, left, right = diag_embed(inst)
        b = beta(E, left, right)
        a_opt, b_opt = b.certificate
        try:
            res = gamma_commuting_sweep(E, a_opt, b_opt, left, right, lower=b.value)
        except PreconditionError:
            continue
        assert abs(res.upper - ot_gamma(inst)[0]) <= 1e-6
        assert res.upper <= b.value + 1e-6
        check_optimizer(res, E, left, right)
        checked += 1
    assert checked >= 20


def test_search_rank_one_2x2(rng):
    for _ in range(5):
        sep = random_separable_vector(rng, 2, 2)
        res = gamma_search(vector_projection(sep), TR2, TR2, restarts=8)
        assert abs(res.upper - 0.5) <= 1e-7
        check_optimizer(res, vector_projection(sep), TR2, TR2)
        ent = random_unit_vector(rng, 4)
        assert abs(gamma_search(vector_projection(ent), TR2, TR2, restarts=8).upper - 1) <= 1e-7


def test_search_products(rng):
    for _ in range(12):
        n, m = rng.integers(1, 5, size=2)
        k, l = rng.integers(1, n + 1), rng.integers(1, m + 1)
        e, f = random_projection(rng, n, k), random_projection(rng, m, l)
        E = np.kron(e, f)
        res = gamma_search(E, tr(n), tr(m), restarts=8, lower=0.0)
        assert abs(res.upper - min(k / n, l / m)) <= 1e-7
        check_optimizer(res, E, tr(n), tr(m))


def test_search_is_deterministic(rng):
    E = random_projection(rng, 9, 4)
    a = gamma_search(E, tr(3), tr(3), restarts=4, seed=5, lower=0.0)
    b = gamma_search(E, tr(3), tr(3), restarts=4, seed=5, lower=0.0)
    assert a.upper == b.upper


def test_bounds_dispatch():
    E, omega, p = vector_state_instance()
    assert gamma_bounds(E, omega, omega).method is Method.EXACT_PRODUCT
    xi = np.array([0.9, 0, 0, np.sqrt(0.19)])
    assert gamma_bounds(vector_projection(xi), TR2, TR2).method is Method.EXACT_2X2_RANK_ONE


def test_bounds_zero_operator():
    res = gamma_bounds(np.zeros((4, 4)), TR2, TR2)
    assert res.upper == 0


def test_strict_inequality_every_path():
    E, omega, p = vector_state_instance()
    b = beta(E, omega, omega).value
    assert abs(b - 0.25) <= 1e-6
    assert abs(gamma_product(p, p, omega, omega).upper - 0.5) <= 1e-12
    assert abs(gamma_search(E, omega, omega, lower=b).upper - 0.5) <= 1e-7
    assert abs(gamma_bounds(E, omega, omega).upper - 0.5) <= 1e-12


def test_sandwich_random(rng):
    for _ in range(8):
        n, m = (2, 2) if rng.random() < 0.5 else (2, 3)
        left = MeasuredAlgebra(random_density(rng, n, 0.05))
        right = MeasuredAlgebra(random_density(rng, m, 0.05))
        E = random_projection(rng, n * m, rng.integers(1, n * m))
        res = gamma_bounds(E, left, right, restarts=8)
        assert res.lower <= res.upper + 1e-6
        assert res.upper <= 1 + 1e-9
        check_optimizer(res, E, left, right)
        if res.exact is not None:
            assert res.lower - 1e-6 <= res.exact <= res.upper + 1e-9
