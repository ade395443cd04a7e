"""Tour of the package: capacities, gamma bounds, entanglement, classical limit.

Run with ``python demos/walkthrough.py``.  Every number printed is computed
on the spot; the comments say what it should be.
"""

import numpy as np

from coupling_capacity import (ClassicalInstance, MeasuredAlgebra, alpha, beta, capacity_sweep, classify, diag_embed,
                               gamma_bounds, matching_value, ot_alpha, ot_gamma, strassen_decide, w_of_vector)
from coupling_capacity.linalg import Subspace
from coupling_capacity.sampling import maximally_entangled_vector, random_density, random_psd_contraction


def section(title):
    print(f"\n== {title}")


def main():
    rng = np.random.default_rng(7)
    tr2 = MeasuredAlgebra.trace(2)

    section("alpha and beta coincide")
    left, right = MeasuredAlgebra(random_density(rng, 3, 0.05)), MeasuredAlgebra(random_density(rng, 2, 0.05))
    T = random_psd_contraction(rng, 6)
    a, b = alpha(T, left, right), beta(T, left, right)
    print(f"alpha = {a.value:.9f}  beta = {b.value:.9f}  gap = {b.value - a.value:.1e}")

    section("gamma can sit strictly above beta")
    omega = MeasuredAlgebra.vector_state(np.array([1.0, 1.0]) / np.sqrt(2))
    p = np.diag([1.0, 0.0])
    g = gamma_bounds(np.kron(p, p), omega, omega)
    print(f"beta = {g.lower:.6f}  gamma = {g.upper:.6f}  via {g.method.value}")  # 1/4 and 1/2

    section("entanglement seen by alpha")
    for t in (1.0, 0.9, 1 / np.sqrt(2)):
        xi = np.array([t, 0, 0, np.sqrt(1 - t * t)])
        v = classify(xi, 2, 2)
        w = w_of_vector(xi, 2, 2).value
        print(f"t = {t:.4f}: alpha = {v.alpha_value:.6f}  w = {w:.6f}  {v.kind.value}")
    print("sweep from product to maximally entangled (3x3):")
    for s, val in capacity_sweep(3, 5):
        print(f"  s = {s:.2f}  alpha = {val:.6f}")  # 1/3 up to 1

    section("couplings supported in a subspace")
    for name, vec in (("maximally entangled line", maximally_entangled_vector(2)),
                      ("product line", np.kron([1.0, 0.0], [1.0, 0.0]))):
        v = strassen_decide(Subspace.span([vec]), tr2, tr2)
        extra = f"residual {v.support_residual:.1e}" if v.feasible else f"margin {v.margin:.6f}"
        print(f"{name}: feasible = {v.feasible}  {extra}")

    section("classical limit")
    S = (rng.random((5, 5)) < 0.35).astype(float)
    inst = ClassicalInstance.uniform(S)
    T, mu, nu = diag_embed(inst)
    print(f"matching/n = {matching_value(S):.6f}  transport = {ot_alpha(inst)[0]:.6f}  "
          f"cover = {ot_gamma(inst)[0]:.6f}  quantum alpha = {alpha(T, mu, nu).value:.6f}")


if __name__ == "__main__":
    main()
