"""Seeded random instances: unitaries, states, contractions, projections, vectors.

Every function takes an explicit :class:`numpy.random.Generator`; nothing
touches global random state.
"""

from __future__ import annotations

import numpy as np

from .linalg import partial_trace_a, partial_trace_b


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix with phase correction."""
    Q, R = np.linalg.qr(_ginibre(rng, n, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_density(rng: np.random.Generator, n: int, min_eigenvalue: float = 0.0) -> np.ndarray:
    """Random trace-one density matrix; ``min_eigenvalue > 0`` keeps it faithful."""
    G = _ginibre(rng, n, n)
    R = G @ G.conj().T
    R = R / np.trace(R).real
    if min_eigenvalue > 0:
        R = (1 - n * min_eigenvalue) * R + min_eigenvalue * np.eye(n)
    return (R + R.conj().T) / 2


def random_psd_contraction(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix scaled so that its largest eigenvalue is one."""
    G = _ginibre(rng, dim, rank or dim)
    R = G @ G.conj().T
    R = R / np.linalg.eigvalsh(R)[-1]
    return (R + R.conj().T) / 2


def random_projection(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    Q = haar_unitary(rng, dim)[:, :rank]
    return Q @ Q.conj().T


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_separable_vector(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    return np.kron(random_unit_vector(rng, n), random_unit_vector(rng, m))


def maximally_entangled_vector(n: int, U=None) -> np.ndarray:
    """``(1/sqrt(n)) sum_i U e_i (x) e_i``, with ``U = I`` by default."""
    U = np.eye(n) if U is None else np.asarray(U)
    return sum(np.kron(U[:, i], np.eye(n)[i]) for i in range(n)) / np.sqrt(n)


def random_maximally_entangled_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    """Maximally entangled vector with Haar-random frames on both sides."""
    return np.kron(np.eye(n), haar_unitary(rng, n)) @ maximally_entangled_vector(n, haar_unitary(rng, n))


def schmidt_vector(coefficients, U=None, V=None) -> np.ndarray:
    """``sum_i c_i U e_i (x) V e_i`` for given coefficients and (default identity) frames."""
    c = np.asarray(coefficients, dtype=float)
    k = len(c)
    U = np.eye(k) if U is None else np.asarray(U)
    V = np.eye(k) if V is None else np.asarray(V)
    return sum(c[i] * np.kron(U[:, i], V[:, i]) for i in range(k))


def random_subcoupling(rng: np.random.Generator, left, right, fill: float = 0.9) -> np.ndarray:
    """A random PSD density whose marginals stay below the states of ``left`` and ``right``."""
    n, m = left.dim, right.dim
    R = random_density(rng, n * m)
    lo = min(np.linalg.eigvalsh(left.density)[0] / np.linalg.eigvalsh(partial_trace_b(R, n, m))[-1],
             np.linalg.eigvalsh(right.density)[0] / np.linalg.eigvalsh(partial_trace_a(R, n, m))[-1])
    return fill * lo * R
