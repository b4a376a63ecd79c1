"""Regenerate the CLI fixture bundles: python3 tests/fixtures/make_fixtures.py"""

import os

import numpy as np

from gamma_dilation import generators
from gamma_dilation.io import MatrixBundle, tuple_bundle, write_atomic, write_bundle, dumps_json, bundle_to_dict

HERE = os.path.dirname(os.path.abspath(__file__))


def put(name, bundle):
    write_bundle(os.path.join(HERE, name), bundle)


def main():
    put("diag_interior.json", tuple_bundle(generators.diagonal_model("gamma333", 4, 7)))
    put("diag_interior_312.json", tuple_bundle(generators.diagonal_model("gamma312", 3, 7)))
    put("scalar_point.json", tuple_bundle(generators.diagonal_model("gamma333", 1, 3)))
    put("scalar_point_312.json", tuple_bundle(generators.diagonal_model("gamma312", 1, 3)))
    put("unitary_312.json", tuple_bundle(generators.unitary_model("gamma312", 3, 1)))
    tup, _ = generators.mixture("gamma333", 2, 3, 11)
    put("mixture.json", tuple_bundle(tup))
    tup, _ = generators.mixture("gamma312", 1, 2, 12)
    put("mixture_312.json", tuple_bundle(tup))

    z = np.zeros((2, 2))
    mats = {f"T{i}": z for i in range(1, 8)}
    mats["T1"] = 2 * np.eye(2)
    put("norm_violation.json", MatrixBundle("gamma333", mats, {"note": "T1 = 2I"}))
    mats = {f"T{i}": z for i in range(1, 8)}
    mats["T1"] = np.array([[0, 0.5], [0, 0]])
    mats["T2"] = np.array([[0, 0], [0.5, 0]])
    put("noncommuting.json", MatrixBundle("gamma333", mats, {"note": "T1 T2 != T2 T1"}))

    put("diag_A.json", MatrixBundle("single", {"M": np.diag([0.8, -0.5, 0.3j])},
                                    {"note": "mu = max |a_ii| = 0.8"}))
    rng = np.random.default_rng(5)
    put("matrix_3x3.json", MatrixBundle("single", {"M": 0.3 * (rng.standard_normal((3, 3))
                                                             + 1j * rng.standard_normal((3, 3)))}))

    # diagonal coefficient families keep diag(z^2, 1) invariant
    F = generators.f_family_333(2, 21, rotate=False)
    mats = {f"F{i + 1}": F[i] for i in range(6)}
    mats.update(Theta0=np.diag([0.0, 1.0]), Theta1=np.zeros((2, 2)), Theta2=np.diag([1.0, 0.0]))
    put("fset333.json", MatrixBundle("fset333", mats, {"seed": 21}))
    G = generators.g_family_312(2, 22)
    mats = dict(zip(("G1", "G2", "Gt1", "Gt2"), G))
    mats.update(Theta0=np.zeros((2, 2)), Theta1=np.eye(2))
    put("fset312.json", MatrixBundle("fset312", mats, {"seed": 22}))

    text = dumps_json(bundle_to_dict(tuple_bundle(generators.diagonal_model("gamma333", 2, 9))))
    write_atomic(os.path.join(HERE, "truncated.json"), text[: len(text) // 2])
    write_atomic(os.path.join(HERE, "bad_family.json"),
                 '{"format_version": "gamma-bundle/1", "family": "tetra9", "matrices": {}}\n')


if __name__ == "__main__":
    main()
