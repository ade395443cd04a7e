"""Finite commutative case: transport plans, potentials, matchings and covers.

On finite sets ``X = {0..n-1}``, ``Y = {0..m-1}`` with probability vectors
``mu``, ``nu`` and a cost ``c: X x Y -> [0, 1]``:

* alpha is the optimal transport value ``max sum plan * c`` over plans with
  marginals ``mu`` and ``nu`` (solved here as a min-cost flow),
* beta is the potential problem ``min mu.a + nu.b`` with ``a_i + b_j >= c_ij``
  and ``a, b >= 0`` (solved with an LP),
* gamma, for a 0/1 cost (a relation ``kappa``), is the cheapest cover
  ``mu(A) + nu(B)`` with ``kappa`` inside ``(A x Y) u (X x B)`` (solved as a
  minimum cut).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import PreconditionError, SolverFailure, ValidationError
from .model import MeasuredAlgebra

PROBABILITY_TOL = 1e-12
FLOW_EPS = 1e-15


@dataclass(frozen=True, eq=False)
class ClassicalInstance:
    mu: np.ndarray
    nu: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).ravel()
        nu = np.asarray(self.nu, dtype=float).ravel()
        cost = np.asarray(self.cost, dtype=float)
        for name, v in (("mu", mu), ("nu", nu)):
            if np.any(v < 0) or abs(v.sum() - 1) > PROBABILITY_TOL:
                raise ValidationError(f"{name} must be a probability vector")
        if cost.shape != (mu.size, nu.size):
            raise ValidationError(f"cost has shape {cost.shape}, expected {(mu.size, nu.size)}")
        if np.any(cost < 0) or np.any(cost > 1):
            raise ValidationError("cost entries must lie in [0, 1]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "cost", cost)

    @classmethod
    def uniform(cls, cost) -> ClassicalInstance:
        cost = np.asarray(cost, dtype=float)
        n, m = cost.shape
        return cls(np.full(n, 1.0 / n), np.full(m, 1.0 / m), cost)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape

    def is_binary(self) -> bool:
        return bool(np.all((self.cost == 0) | (self.cost == 1)))


@dataclass(frozen=True, eq=False)
class TransportPlan:
    plan: np.ndarray
    value: float

    def marginal_residual(self, inst: ClassicalInstance) -> float:
        return float(max(np.max(np.abs(self.plan.sum(axis=1) - inst.mu)),
                         np.max(np.abs(self.plan.sum(axis=0) - inst.nu))))


# ---------------------------------------------------------------------------
# alpha: successive shortest paths


class _Network:
    """Residual network with float capacities; edges stored in parallel lists."""

    def __init__(self, size: int):
        self.size = size
        self.adj: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list[float] = []
        self.cost: list[float] = []

    def add(self, u: int, v: int, cap: float, cost: float = 0.0) -> int:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)
        self.cost.append(-cost)
        return len(self.to) - 2

    def shortest_path(self, s: int):
        """Bellman-Ford from ``s`` over edges with positive residual capacity."""
        dist = [np.inf] * self.size
        via = [-1] * self.size
        dist[s] = 0.0
        for _ in range(self.size):
            changed = False
            for u in range(self.size):
                if dist[u] == np.inf:
                    continue
                for e in self.adj[u]:
                    if self.cap[e] > FLOW_EPS and dist[u] + self.cost[e] < dist[self.to[e]] - 1e-15:
                        dist[self.to[e]] = dist[u] + self.cost[e]
                        via[self.to[e]] = e
                        changed = True
            if not changed:
                break
        return dist, via

    def bfs_path(self, s: int, t: int):
        via = [-1] * self.size
        seen = [False] * self.size
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if not seen[v] and self.cap[e] > FLOW_EPS:
                    seen[v] = True
                    via[v] = e
                    if v == t:
                        return via, seen
                    queue.append(v)
        return None, seen

    def augment(self, via, s: int, t: int, limit: float = np.inf) -> float:
        path = []
        v = t
        while v != s:
            e = via[v]
            path.append(e)
            v = self.to[e ^ 1]
        push = min(limit, min(self.cap[e] for e in path))
        for e in path:
            self.cap[e] -= push
            self.cap[e ^ 1] += push
        return push


def ot_alpha(inst: ClassicalInstance) -> tuple[float, TransportPlan]:
    """Optimal transport value ``max sum_ij plan_ij cost_ij`` with marginals ``mu``, ``nu``.

    Min-cost flow of one unit from a source through ``X`` (capacities
    ``mu``) and ``Y`` (capacities ``nu``) to a sink, with edge cost
    ``-cost_ij`` on ``x_i -> y_j``, by successive shortest augmenting paths.
    """
    n, m = inst.shape
    s, t = n + m, n + m + 1
    net = _Network(n + m + 2)
    for i in range(n):
        net.add(s, i, inst.mu[i])
    for j in range(m):
        net.add(n + j, t, inst.nu[j])
    middle = {}
    for i in range(n):
        for j in range(m):
            middle[i, j] = net.add(i, n + j, np.inf, -inst.cost[i, j])
    sent = 0.0
    while sent < 1.0 - 1e-14:
        dist, via = net.shortest_path(s)
        if dist[t] == np.inf:
            break
        pushed = net.augment(via, s, t, 1.0 - sent)
        if pushed <= FLOW_EPS:
            break
        sent += pushed
    if sent < 1.0 - 1e-9:
        raise SolverFailure(f"transport flow stalled at {sent:.12g}", residual=1.0 - sent)
    plan = np.zeros((n, m))
    for (i, j), e in middle.items():
        plan[i, j] = net.cap[e ^ 1]
    return float(np.sum(plan * inst.cost)), TransportPlan(plan, float(np.sum(plan * inst.cost)))


# ---------------------------------------------------------------------------
# beta: potentials by linear programming


def ot_beta(inst: ClassicalInstance) -> tuple[float, np.ndarray, np.ndarray]:
    """``min mu.a + nu.b`` over ``a, b >= 0`` with ``a_i + b_j >= cost_ij``."""
    n, m = inst.shape
    rows = np.zeros((n * m, n + m))
    for i in range(n):
        for j in range(m):
            rows[i * m + j, i] = -1.0
            rows[i * m + j, n + j] = -1.0
    res = linprog(np.concatenate([inst.mu, inst.nu]), A_ub=rows, b_ub=-inst.cost.ravel(),
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise SolverFailure(f"potential LP failed: {res.message}")
    return float(res.fun), res.x[:n], res.x[n:]


# ---------------------------------------------------------------------------
# gamma: weighted vertex cover by minimum cut


def ot_gamma(inst: ClassicalInstance) -> tuple[float, list[int], list[int]]:
    """Cheapest ``mu(A) + nu(B)`` with every pair of the relation in ``(A x Y) u (X x B)``.

    Max-flow (shortest augmenting paths) on source -> x_i (capacity
    ``mu_i``), x_i -> y_j (infinite, for each related pair), y_j -> sink
    (capacity ``nu_j``).  With ``R`` the set reachable from the source in
    the final residual network, ``A = X \\ R`` and ``B = Y n R``.
    """
    if not inst.is_binary():
        raise PreconditionError("gamma of a relation needs a 0/1 cost")
    n, m = inst.shape
    s, t = n + m, n + m + 1
    net = _Network(n + m + 2)
    for i in range(n):
        net.add(s, i, inst.mu[i])
    for j in range(m):
        net.add(n + j, t, inst.nu[j])
    for i in range(n):
        for j in range(m):
            if inst.cost[i, j] == 1:
                net.add(i, n + j, np.inf)
    while True:
        via, seen = net.bfs_path(s, t)
        if via is None:
            break
        if net.augment(via, s, t) <= FLOW_EPS:
            break
    A = [i for i in range(n) if not seen[i]]
    B = [j for j in range(m) if seen[n + j]]
    return float(inst.mu[A].sum() + inst.nu[B].sum()), A, B


def matching_value(support, n: int | None = None) -> float:
    """Size of a maximum matching in the bipartite relation, divided by ``n``.

    Kuhn's augmenting-path algorithm; ``n`` defaults to the number of rows.
    """
    S = np.asarray(support).astype(bool)
    rows, cols = S.shape
    n = rows if n is None else n
    owner = [-1] * cols

    def try_row(i, visited):
        for j in range(cols):
            if S[i, j] and not visited[j]:
                visited[j] = True
                if owner[j] == -1 or try_row(owner[j], visited):
                    owner[j] = i
                    return True
        return False

    size = sum(try_row(i, [False] * cols) for i in range(rows))
    return size / n


def diag_embed(inst: ClassicalInstance) -> tuple[np.ndarray, MeasuredAlgebra, MeasuredAlgebra]:
    """Diagonal operator ``sum_ij cost_ij e_ii (x) e_jj`` with diagonal states ``mu``, ``nu``."""
    T = np.diag(inst.cost.ravel()).astype(complex)
    return T, MeasuredAlgebra.diagonal(inst.mu), MeasuredAlgebra.diagonal(inst.nu)
