import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupling_capacity.errors import ValidationError
from coupling_capacity.linalg import (Subspace, hermitian, hermitian_eigen, is_projection, jacobi_eigh, kron,
                                      min_eigenvalue, partial_trace_a, partial_trace_b, proj_join, projection,
                                      psd_project, range_projection, rank, svd)
from coupling_capacity.sampling import (haar_unitary, random_density, random_projection, random_psd_contraction,
                                        schmidt_vector)


def random_hermitian(rng, n):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (G + G.conj().T) / 2


def test_hermitian_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian(np.array([[0, 1], [0, 0]]))


def test_hermitian_symmetrises_small_drift():
    H = np.array([[1, 1 + 1e-12], [1, 2]])
    out = hermitian(H)
    assert np.array_equal(out, out.conj().T)


def test_projection_invariant():
    with pytest.raises(ValidationError):
        projection(np.diag([1.0, 0.5]))
    assert is_projection(np.diag([1.0, 0.0]))


def test_eigen_identity():
    ed = hermitian_eigen(np.eye(3))
    assert np.allclose(ed.eigenvalues, 1)


def test_eigen_diagonal():
    for method in ("lapack", "jacobi"):
        ed = hermitian_eigen(np.diag([-1.0, 2.0]), method=method)
        assert np.allclose(ed.eigenvalues, [2, -1])
        assert np.allclose(np.abs(ed.eigenvectors), [[0, 1], [1, 0]])


@pytest.mark.parametrize("n", [1, 2, 4, 9, 16, 36, 81])
def test_eigen_reconstruction(rng, n):
    H = random_hermitian(rng, n)
    for method in ("lapack", "jacobi"):
        w, V = hermitian_eigen(H, method=method)
        assert np.all(np.diff(w) <= 0)
        assert np.linalg.norm(H - (V * w) @ V.conj().T) <= 1e-9 * n
        assert np.linalg.norm(V.conj().T @ V - np.eye(n)) <= 1e-9 * n


def test_jacobi_matches_lapack_eigenvalues(rng):
    for n in (3, 5, 8):
        H = random_hermitian(rng, n)
        assert np.allclose(jacobi_eigh(H).eigenvalues, hermitian_eigen(H).eigenvalues, atol=1e-10)


def test_svd_rank_one(rng):
    f = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    e = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    U, s, V = svd(np.outer(f, e.conj()))
    assert np.isclose(s[0], np.linalg.norm(f) * np.linalg.norm(e))
    assert np.allclose(s[1:], 0)


def test_svd_identity():
    assert np.allclose(svd(np.eye(4))[1], 1)


@pytest.mark.parametrize("shape", [(2, 3), (3, 2), (5, 5), (9, 4)])
def test_svd_reconstruction(rng, shape):
    M = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    U, s, V = svd(M)
    S = np.zeros(shape)
    S[:len(s), :len(s)] = np.diag(s)
    assert np.linalg.norm(M - U @ S @ V.conj().T) <= 1e-9
    assert np.all(np.diff(s) <= 0)


def test_kron_matrix_units():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    e11, e22 = np.diag([1, 0]), np.diag([0, 1])
    K = kron(e11, e22)
    assert K[1, 1] == 1 and K.sum() == 1


def test_kron_mixed_product(rng):
    A, B, C, D = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
    assert np.max(np.abs(kron(A, B) @ kron(C, D) - kron(A @ C, B @ D))) <= 1e-12


def test_kron_index_convention(rng):
    A, B = rng.standard_normal((2, 2)), rng.standard_normal((3, 3))
    K = kron(A, B)
    for i, j, k, l in np.ndindex(2, 2, 3, 3):
        assert K[i * 3 + k, j * 3 + l] == A[i, j] * B[k, l]


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2), (3, 4)])
def test_partial_trace_defining_identity(rng, n, m):
    T = random_hermitian(rng, n * m)
    TB, TA = partial_trace_b(T, n, m), partial_trace_a(T, n, m)
    for i, j in np.ndindex(n, n):
        a = np.zeros((n, n))
        a[i, j] = 1
        assert abs(np.trace(TB @ a) - np.trace(T @ np.kron(a, np.eye(m)))) <= 1e-12
    for i, j in np.ndindex(m, m):
        b = np.zeros((m, m))
        b[i, j] = 1
        assert abs(np.trace(TA @ b) - np.trace(T @ np.kron(np.eye(n), b))) <= 1e-12


def test_partial_trace_of_product(rng):
    rho, tau = random_density(rng, 2), random_density(rng, 3)
    assert np.allclose(partial_trace_b(np.kron(rho, tau), 2, 3), rho)
    assert np.allclose(partial_trace_a(np.kron(rho, tau), 2, 3), tau)
    assert np.allclose(partial_trace_a(np.eye(6), 2, 3), 2 * np.eye(3))


def test_partial_trace_of_rank_one_schmidt(rng):
    U, V = haar_unitary(rng, 3), haar_unitary(rng, 3)
    lam = np.sqrt([0.5, 0.3, 0.2])
    xi = schmidt_vector(lam, U, V)
    expected = U @ np.diag(lam ** 2) @ U.conj().T
    assert np.max(np.abs(partial_trace_b(np.outer(xi, xi.conj()), 3, 3) - expected)) <= 1e-12


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValidationError):
        partial_trace_b(np.eye(5), 2, 3)


def test_psd_project_examples(rng):
    P = random_psd_contraction(rng, 4)
    assert np.max(np.abs(psd_project(P) - P)) <= 1e-10
    assert np.allclose(psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]))


def test_psd_project_is_nearest(rng):
    H = random_hermitian(rng, 5)
    X = psd_project(H)
    d = np.linalg.norm(H - X)
    for _ in range(200):
        Y = psd_project(X + 0.1 * random_hermitian(rng, 5))
        assert np.linalg.norm(H - Y) >= d - 1e-12


def test_psd_project_idempotent_and_nonexpansive(rng):
    for _ in range(50):
        A, B = random_hermitian(rng, 4), random_hermitian(rng, 4)
        PA, PB = psd_project(A), psd_project(B)
        assert np.max(np.abs(psd_project(PA) - PA)) <= 1e-10
        assert np.linalg.norm(PA - PB) <= np.linalg.norm(A - B) + 1e-12


def test_proj_join_examples(rng):
    assert np.allclose(proj_join(np.zeros((2, 2)), np.zeros((3, 3))), 0)
    q = random_projection(rng, 3, 1)
    assert np.allclose(proj_join(np.eye(2), q), np.eye(6))


def test_proj_join_rank(rng):
    for _ in range(30):
        n, m = rng.integers(1, 5, size=2)
        k, l = rng.integers(0, n + 1), rng.integers(0, m + 1)
        J = proj_join(random_projection(rng, n, k), random_projection(rng, m, l))
        assert is_projection(J)
        assert rank(J) == n * m - (n - k) * (m - l)


def test_range_projection_examples(rng):
    P = random_projection(rng, 4, 2)
    assert np.allclose(range_projection(P), P, atol=1e-10)
    assert np.allclose(range_projection(np.diag([0.5, 0.0])), np.diag([1.0, 0.0]))
    T = random_psd_contraction(rng, 6, rank=3)
    E = range_projection(T)
    assert np.max(np.abs(E @ T - T)) <= 1e-8 * 6


def test_subspace_validation():
    with pytest.raises(ValidationError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))
    X = Subspace.span([[1, 0, 0, 0], [1, 1, 0, 0], [2, 1, 0, 0]])
    assert X.dim == 2 and X.ambient_dim == 4


def _commuting_pair(rng, n, m):
    p = random_projection(rng, n, rng.integers(0, n + 1))
    q = random_projection(rng, m, rng.integers(0, m + 1))
    return np.kron(p, np.eye(m)), np.kron(np.eye(n), q), p, q


def test_sum_and_join_domination_agree(rng):
    # T <= P + Q  iff  T <= P v Q, for commuting P = p (x) 1 and Q = 1 (x) q
    agree = 0
    for trial in range(60):
        n, m = 2, 2
        P, Q, p, q = _commuting_pair(rng, n, m)
        J = proj_join(p, q)
        if trial % 2:
            # a contraction below the join, so both sides hold
            T = J @ random_psd_contraction(rng, n * m) @ J
        else:
            T = random_psd_contraction(rng, n * m, rank=1)
        lhs = min_eigenvalue(P + Q - T) >= -1e-9
        rhs = min_eigenvalue(J - T) >= -1e-9
        assert lhs == rhs
        agree += lhs
    assert agree >= 30


def test_scaled_domination_implies_order(rng):
    # r P <= Q for projections with r > 0 forces P <= Q
    for _ in range(60):
        d = 4
        Q = random_projection(rng, d, rng.integers(1, d + 1))
        w, V = np.linalg.eigh(Q)
        rangeQ = V[:, w > 0.5]
        k = rng.integers(0, rangeQ.shape[1] + 1)
        C = np.linalg.qr(rng.standard_normal((rangeQ.shape[1], rangeQ.shape[1])))[0][:, :k]
        P = rangeQ @ C @ C.T @ rangeQ.conj().T
        r = rng.uniform(0.01, 1)
        assert min_eigenvalue(Q - r * P) >= -1e-9
        assert min_eigenvalue(Q - P) >= -1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
def test_eigen_reconstruction_property(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    w, V = hermitian_eigen(H, method="jacobi")
    assert np.linalg.norm(H - (V * w) @ V.conj().T) <= 1e-9 * n
