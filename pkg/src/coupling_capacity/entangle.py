"""Schmidt decompositions and capacity-based classification of vector states.

A unit vector ``xi`` in ``C^n (x) C^m`` is reshaped to the ``n x m`` matrix
``S`` with ``S[i, k] = xi[i*m + k]``; its singular value decomposition gives
``xi = sum_i lambda_i e_i (x) f_i``.  With normalised-trace marginals and
``n <= m``, ``xi`` is separable exactly when ``alpha(xi xi*) = 1/m``, and for
``n = m`` it is maximally entangled exactly when ``alpha(xi xi*) = 1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .capacity import alpha
from .errors import InconsistencyError, PreconditionError, ValidationError
from .linalg import partial_trace_a, partial_trace_b, projection, rank
from .model import MeasuredAlgebra
from .sdp import SolverOptions

SCHMIDT_TOL = 1e-8
ALPHA_TOL = 1e-5
UNIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``xi = sum_i coefficients[i] * left_frame[:, i] (x) right_frame[:, i]``."""

    coefficients: np.ndarray
    left_frame: np.ndarray
    right_frame: np.ndarray

    @property
    def schmidt_rank(self) -> int:
        return int(np.sum(self.coefficients > SCHMIDT_TOL))

    def vector(self) -> np.ndarray:
        return sum(c * np.kron(self.left_frame[:, i], self.right_frame[:, i])
                   for i, c in enumerate(self.coefficients))


def schmidt(xi, n: int, m: int) -> SchmidtDecomposition:
    """Schmidt decomposition of a unit vector in ``C^n (x) C^m``.

    Returns ``min(n, m)`` descending coefficients.  Either order of ``n`` and
    ``m`` is accepted; the reshape is always ``n x m``.
    """
    v = np.asarray(xi, dtype=complex).ravel()
    if v.size != n * m:
        raise ValidationError(f"vector of length {v.size} is not in C^{n} (x) C^{m}")
    norm = np.linalg.norm(v)
    if abs(norm - 1) > UNIT_TOL:
        raise ValidationError(f"vector must have unit norm, got {norm:.12g}")
    U, s, Vh = np.linalg.svd(v.reshape(n, m), full_matrices=False)
    return SchmidtDecomposition(s, U, Vh.T)


class EntanglementClass(enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    MAXIMALLY_ENTANGLED = "MaximallyEntangled"


@dataclass(frozen=True, eq=False)
class EntanglementVerdict:
    kind: EntanglementClass
    alpha_value: float
    schmidt: SchmidtDecomposition
    diagnostics: dict = field(default_factory=dict)


def _schmidt_class(sd: SchmidtDecomposition, tol: float) -> EntanglementClass:
    c = sd.coefficients
    if len(c) < 2 or c[1] <= tol:
        return EntanglementClass.SEPARABLE
    if np.all(np.abs(c - 1 / np.sqrt(len(c))) <= tol):
        return EntanglementClass.MAXIMALLY_ENTANGLED
    return EntanglementClass.ENTANGLED


def classify(xi, n: int, m: int, opts: SolverOptions | None = None,
             schmidt_tol: float = SCHMIDT_TOL, alpha_tol: float = ALPHA_TOL) -> EntanglementVerdict:
    """Classify ``xi`` twice, from its Schmidt data and from ``alpha(xi xi*)``.

    The capacity route uses normalised traces: separable iff ``alpha`` is
    within ``alpha_tol`` of ``1/max(n, m)``, maximally entangled iff ``alpha``
    is within ``alpha_tol`` of 1.  The second test only separates classes
    when ``n == m``; for ``n != m`` a Schmidt-maximal vector has
    ``alpha < 1`` and is reported from its Schmidt data alone.

    Raises
    ------
    InconsistencyError
        If the two routes disagree.
    """
    sd = schmidt(xi, n, m)
    by_schmidt = _schmidt_class(sd, schmidt_tol)
    v = np.asarray(xi, dtype=complex).ravel()
    res = alpha(np.outer(v, v.conj()), MeasuredAlgebra.trace(n), MeasuredAlgebra.trace(m), opts)
    a = res.value
    if abs(a - 1 / max(n, m)) <= alpha_tol:
        by_alpha = EntanglementClass.SEPARABLE
    elif n == m and abs(a - 1) <= alpha_tol:
        by_alpha = EntanglementClass.MAXIMALLY_ENTANGLED
    else:
        by_alpha = EntanglementClass.ENTANGLED
    agrees = by_alpha == by_schmidt or (
        n != m and by_schmidt is EntanglementClass.MAXIMALLY_ENTANGLED
        and by_alpha is EntanglementClass.ENTANGLED)
    if not agrees:
        raise InconsistencyError(
            f"Schmidt data say {by_schmidt.value} (coefficients {np.round(sd.coefficients, 10)}) "
            f"but alpha = {a:.10g} says {by_alpha.value}")
    return EntanglementVerdict(by_schmidt, a, sd, {"by_alpha": by_alpha.value, "alpha": res.diagnostics})


def alpha_rank_one_lower(xi, n: int, m: int | None = None) -> float:
    """``(1/n) (sum_i lambda_i)^2``, a lower bound for ``alpha(xi xi*)`` in ``C^n (x) C^n``.

    It is the channel-form value of the unitary conjugation aligning the two
    Schmidt frames; for ``n = 2`` it equals alpha.
    """
    m = n if m is None else m
    if m != n:
        raise PreconditionError("the rank-one bound needs n == m")
    return float(np.sum(schmidt(xi, n, n).coefficients) ** 2 / n)


def sweep_vector(n: int, s: float) -> np.ndarray:
    """Point ``s`` in [0, 1] of the path from ``e_1 (x) e_1`` to ``zeta``.

    Squared Schmidt coefficients interpolate linearly from ``(1, 0, ..., 0)``
    to ``(1/n, ..., 1/n)``; the frames are canonical.  For ``n = 2`` this is
    ``sqrt((1+u)/2) e_1 (x) e_1 + sqrt((1-u)/2) e_2 (x) e_2`` with ``u = 1 - s``.
    """
    start = np.zeros(n)
    start[0] = 1.0
    sq = (1 - s) * start + s * np.full(n, 1.0 / n)
    return sum(np.sqrt(sq[i]) * np.kron(np.eye(n)[i], np.eye(n)[i]) for i in range(n)).astype(complex)


def capacity_sweep(n: int, steps: int, opts: SolverOptions | None = None) -> list[tuple[float, float]]:
    """``alpha`` of ``E_{eta_s}`` along :func:`sweep_vector` at ``steps`` equispaced ``s``."""
    if n < 2:
        raise PreconditionError("the sweep needs n >= 2")
    if steps < 2:
        raise ValidationError("need at least two steps")
    tr = MeasuredAlgebra.trace(n)
    out = []
    for s in np.linspace(0.0, 1.0, steps):
        v = sweep_vector(n, s)
        out.append((float(s), alpha(np.outer(v, v.conj()), tr, tr, opts).value))
    return out


def rank_one_factor(E, n: int, m: int) -> str | None:
    """``"right"`` if ``E = E' (x) ee*``, ``"left"`` if ``E = ee* (x) E'``, else None.

    ``E`` lives under ``I (x) ff*`` exactly when its range lies in
    ``C^n (x) f``, i.e. when ``Tr_A(E)`` has rank one; a projection with that
    property is then ``E' (x) ff*`` with ``E' = Tr_B(E)``.
    """
    E = projection(E, name="E")
    if rank(partial_trace_a(E, n, m)) == 1:
        return "right"
    if rank(partial_trace_b(E, n, m)) == 1:
        return "left"
    return None


def alpha_min_projection_check(E, n: int, opts: SolverOptions | None = None,
                               tol: float = ALPHA_TOL) -> bool:
    """Check ``alpha(E) = 1/n  <=>  E`` has a rank-one tensor factor, for a projection on ``C^n (x) C^n``.

    Both sides are evaluated independently (normalised traces); the return
    value says whether they agree.
    """
    E = projection(E, name="E")
    if not np.any(E):
        raise PreconditionError("E must be non-zero")
    tr = MeasuredAlgebra.trace(n)
    at_minimum = alpha(E, tr, tr, opts).value <= 1 / n + tol
    return at_minimum == (rank_one_factor(E, n, n) is not None)


def _det_form(B1, B2):
    return (B1[0, 0] * B2[1, 1] + B2[0, 0] * B1[1, 1] - B1[0, 1] * B2[1, 0] - B2[0, 1] * B1[1, 0]) / 2


def maximally_entangled_in_range(E, tol: float = 1e-9) -> tuple[bool, np.ndarray | None, float]:
    """Does the range of a projection on ``C^2 (x) C^2`` contain a maximally entangled vector?

    A unit vector with reshape ``S`` is maximally entangled iff
    ``|det S| = 1/2`` (and ``|det S| <= 1/2`` always).  On the range with
    orthonormal basis ``u_k``, ``det S(sum c_k u_k) = c^T Q c`` for a complex
    symmetric ``Q``, and ``max |c^T Q c|`` over unit ``c`` is the largest
    singular value of ``Q`` (Takagi).  Returns the verdict, a maximising
    vector, and that largest singular value.
    """
    E = projection(E, name="E")
    if E.shape != (4, 4):
        raise PreconditionError("this check is for C^2 (x) C^2 only")
    w, V = np.linalg.eigh(E)
    basis = V[:, w > 0.5]
    k = basis.shape[1]
    if k == 0:
        return False, None, 0.0
    mats = [basis[:, i].reshape(2, 2) for i in range(k)]
    Q = np.array([[_det_form(mats[i], mats[j]) for j in range(k)] for i in range(k)])
    U, s, Vh = np.linalg.svd(Q)
    v, u = Vh[0].conj(), U[:, 0]
    best, c_best = -1.0, None
    for c in (v + u.conj(), 1j * (v - u.conj()), v):
        if np.linalg.norm(c) > 1e-8:
            c = c / np.linalg.norm(c)
            val = abs(c @ Q @ c)
            if val > best:
                best, c_best = val, c
    xi = basis @ c_best
    return bool(s[0] >= 0.5 - tol), xi, float(s[0])
