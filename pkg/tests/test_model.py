import numpy as np
import pytest

from coupling_capacity.errors import PreconditionError, ValidationError
from coupling_capacity.linalg import min_eigenvalue, vector_projection
from coupling_capacity.model import (ChoiMap, Coupling, MeasuredAlgebra, apply_choi_blockwise, bistochastic_check,
                                     channel_of_coupling, choi_of_coupling, complete_subcoupling, coupling_of_choi,
                                     is_coupling)
from coupling_capacity.sampling import (haar_unitary, maximally_entangled_vector, random_density,
                                        random_maximally_entangled_vector, random_psd_contraction,
                                        random_subcoupling)


def random_coupling(rng, left, right):
    return complete_subcoupling(random_subcoupling(rng, left, right), left, right)


def test_measured_algebra_validation():
    with pytest.raises(ValidationError):
        MeasuredAlgebra(np.eye(2))
    with pytest.raises(ValidationError):
        MeasuredAlgebra(np.diag([1.5, -0.5]))
    tr = MeasuredAlgebra.trace(3)
    assert tr.is_uniform() and tr.is_faithful()
    assert np.isclose(tr(np.eye(3)), 1)
    assert not MeasuredAlgebra.vector_state([1, 0]).is_faithful()


def test_product_coupling(rng):
    left, right = MeasuredAlgebra(random_density(rng, 2)), MeasuredAlgebra(random_density(rng, 3))
    c = Coupling.product(left, right)
    assert c.dims == (2, 3)
    assert is_coupling(c.density, left, right).ok


def test_maximally_entangled_is_trace_coupling():
    tr = MeasuredAlgebra.trace(2)
    assert is_coupling(vector_projection(maximally_entangled_vector(2)), tr, tr).ok


def test_wrong_marginals_rejected():
    tr2, tr3 = MeasuredAlgebra.trace(2), MeasuredAlgebra.trace(3)
    D = np.kron(np.diag([1.0, 0.0]), np.eye(3) / 3)
    assert not is_coupling(D, tr2, tr3).ok
    with pytest.raises(ValidationError):
        Coupling(tr2, tr3, D)


def test_normalized_density():
    tr = MeasuredAlgebra.trace(2)
    c = Coupling.product(tr, tr)
    assert np.allclose(c.normalized_density(), np.eye(4))


def test_bistochastic_diagonal_coupling(rng):
    n = 3
    perms = [np.eye(n)[list(p)] for p in ([0, 1, 2], [1, 2, 0], [2, 0, 1])]
    w = rng.dirichlet(np.ones(3))
    B = sum(wi * P for wi, P in zip(w, perms))
    D = np.diag(B.ravel() / n).astype(complex)
    tr = MeasuredAlgebra.trace(n)
    assert is_coupling(D, tr, tr).ok
    assert bistochastic_check(D, n)
    assert not bistochastic_check(np.diag([1.0] + [0.0] * 8), 3)


def test_subcoupling_completion_domination(rng):
    for _ in range(50):
        n, m = rng.integers(1, 4, size=2)
        left = MeasuredAlgebra(random_density(rng, n, 0.02))
        right = MeasuredAlgebra(random_density(rng, m, 0.02))
        D = random_subcoupling(rng, left, right, fill=rng.uniform(0.1, 1.0))
        c = complete_subcoupling(D, left, right)
        assert is_coupling(c.density, left, right, 1e-9).ok
        assert min_eigenvalue(c.density - D) >= -1e-12


def test_subcoupling_completion_rejects_excess():
    tr = MeasuredAlgebra.trace(2)
    with pytest.raises(PreconditionError):
        complete_subcoupling(np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])), tr, tr)


def test_choi_matrix_roundtrip(rng):
    C = random_psd_contraction(rng, 6)
    phi = ChoiMap.from_matrix(C, 2, 3)
    assert np.allclose(phi.matrix(), C)
    assert phi.in_dim == 2 and phi.out_dim == 3
    x = rng.standard_normal((2, 2))
    assert np.allclose(phi(x), sum(x[i, j] * phi.blocks[i, j] for i in range(2) for j in range(2)))


def test_identity_channel_coupling():
    n = 2
    c = coupling_of_choi(ChoiMap.from_function(lambda x: n * x, n))
    assert np.max(np.abs(c.density - vector_projection(maximally_entangled_vector(n)))) <= 1e-12


def test_unitary_conjugation_coupling(rng):
    n = 3
    U = haar_unitary(rng, n)
    c = coupling_of_choi(ChoiMap.unitary_conjugation(U).scaled(n))
    v = sum(np.kron(np.eye(n)[i], U[:, i]) for i in range(n)) / np.sqrt(n)
    assert np.max(np.abs(c.density - vector_projection(v))) <= 1e-12


def test_conjugation_ampliation(rng):
    U = haar_unitary(rng, 2)
    xi = random_maximally_entangled_vector(rng, 2)
    out = apply_choi_blockwise(ChoiMap.unitary_conjugation(U), vector_projection(xi))
    assert np.max(np.abs(out - vector_projection(np.kron(np.eye(2), U) @ xi))) <= 1e-12


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_choi_correspondence(rng, n, m):
    left, right = MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m)
    for _ in range(10):
        c = random_coupling(rng, left, right)
        phi = choi_of_coupling(c)
        channel = phi.scaled(1 / n)
        assert channel.unital_residual() <= 1e-7
        assert channel.trace_residual() <= 1e-7
        assert phi.cp_residual() <= 1e-10
        back = coupling_of_choi(phi)
        assert np.max(np.abs(back.density - c.density)) <= 1e-10


def test_choi_of_coupling_needs_traces(rng):
    left = MeasuredAlgebra(random_density(rng, 2, 0.1))
    c = Coupling.product(left, MeasuredAlgebra.trace(2))
    with pytest.raises(PreconditionError):
        choi_of_coupling(c)


def test_coupling_of_choi_rejects_non_unital():
    with pytest.raises(PreconditionError):
        coupling_of_choi(ChoiMap.from_function(lambda x: 3 * x, 2))


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2)])
def test_channel_form_reproduces_coupling_value(rng, n, m):
    left, right = MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m)
    zeta = maximally_entangled_vector(n)
    for _ in range(5):
        c = random_coupling(rng, left, right)
        psi = channel_of_coupling(c)
        assert psi.in_dim == m and psi.out_dim == n
        assert psi.unital_residual() <= 1e-9 and psi.trace_residual() <= 1e-9 and psi.cp_residual() <= 1e-9
        T = random_psd_contraction(rng, n * m)
        value = np.vdot(zeta, apply_choi_blockwise(psi, T) @ zeta).real
        assert abs(value - c(T)) <= 1e-10
