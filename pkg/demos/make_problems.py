"""Write the JSON problem files used by the CLI walkthrough."""

import json
from pathlib import Path

import numpy as np

from coupling_capacity.cli import encode_array
from coupling_capacity.sampling import maximally_entangled_vector, random_density, random_psd_contraction

HERE = Path(__file__).parent / "problems"


def write(name, data):
    (HERE / name).write_text(json.dumps(data, indent=1) + "\n")


def main():
    HERE.mkdir(exist_ok=True)
    zeta = maximally_entangled_vector(2)
    write("maximally_entangled_2x2.json", {"n": 2, "m": 2, "phi": "trace", "psi": "trace",
                                           "vector": encode_array(zeta)})
    write("separable_2x3.json", {"n": 2, "m": 3, "phi": "trace", "psi": "trace",
                                 "vector": encode_array(np.kron([1, 0], [0, 1, 0]))})
    write("identity_2x2.json", {"n": 2, "m": 2, "T": encode_array(np.eye(4))})
    omega = np.full((2, 2), 0.5)
    p = np.diag([1.0, 0.0])
    write("product_projection_vector_states.json", {"n": 2, "m": 2, "phi": encode_array(omega),
                                                    "psi": encode_array(omega), "T": encode_array(np.kron(p, p))})
    t = 0.9
    write("entangled_xi_t_0.9.json", {"n": 2, "m": 2, "vector": encode_array([t, 0, 0, np.sqrt(1 - t * t)])})
    rng = np.random.default_rng(7)
    write("random_faithful_3x3.json", {"n": 3, "m": 3,
                                       "phi": encode_array(random_density(rng, 3, 0.05)),
                                       "psi": encode_array(random_density(rng, 3, 0.05)),
                                       "T": encode_array(random_psd_contraction(rng, 9))})
    Q = np.linalg.qr(rng.standard_normal((9, 4)) + 1j * rng.standard_normal((9, 4)))[0]
    write("random_subspace_3x3.json", {"n": 3, "m": 3, "subspace": encode_array(Q.T)})
    write("maximally_entangled_line.json", {"n": 2, "m": 2, "subspace": encode_array([zeta])})
    write("product_line.json", {"n": 2, "m": 2, "subspace": encode_array([np.kron([1, 0], [1, 0])])})
    write("whole_space_2x2.json", {"n": 2, "m": 2, "subspace": encode_array(np.eye(4))})
    write("classical_partial_diagonal.json", {"classical": {"mu": [1 / 3] * 3, "nu": [1 / 3] * 3,
                                                            "cost": [[1, 0, 0], [0, 1, 0], [0, 0, 0]]}})
    write("classical_empty.json", {"classical": {"mu": [0.5, 0.5], "nu": [0.25, 0.75],
                                                 "cost": [[0, 0], [0, 0]]}})
    write("classical_full.json", {"classical": {"mu": [0.2, 0.8], "nu": [0.6, 0.4],
                                                "cost": [[1, 1], [1, 1]]}})


if __name__ == "__main__":
    main()
