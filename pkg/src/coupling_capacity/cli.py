"""Command-line front end.

Problem files are JSON objects::

    {"n": 2, "m": 2, "phi": "trace", "psi": [[...], ...],
     "T": [[...], ...]}            # or "vector": [...], "subspace": [[...], ...],
                                   # or "classical": {"mu": [...], "nu": [...], "cost": [[...]]}

Complex entries are ``[re, im]`` pairs (plain numbers are read as real);
matrices are row-major nested arrays; ``"trace"`` stands for ``I/dim``.
A ``vector`` means ``T = xi xi*``; a ``subspace`` lists basis vectors and
means ``T`` is the projection onto their span.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
4 regression failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import capacity, classical, entangle, gamma, regression
from .errors import PreconditionError, SolverFailure, ValidationError
from .linalg import Subspace, vector_projection
from .model import MeasuredAlgebra
from .sdp import SolverOptions

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_REGRESSION = 0, 2, 3, 4


class ProblemError(ValidationError):
    pass


# ---------------------------------------------------------------------------
# encoding


def encode_array(a) -> list:
    """Nested lists with every entry as ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_array(x) for x in a]


def _decode_entry(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ProblemError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                                   for v in x):
        return complex(x[0], x[1])
    raise ProblemError(f"{where}: expected a number or [re, im], got {x!r}")


def decode_array(obj, ndim: int, where: str = "value") -> np.ndarray:
    """Inverse of :func:`encode_array` for an array of known rank."""
    if ndim == 0:
        return np.asarray(_decode_entry(obj, where))
    if not isinstance(obj, list) or not obj:
        raise ProblemError(f"{where}: expected a non-empty array")
    parts = [decode_array(x, ndim - 1, f"{where}[{i}]") for i, x in enumerate(obj)]
    if len({p.shape for p in parts}) != 1:
        raise ProblemError(f"{where}: ragged array")
    return np.array(parts)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return encode_array(x)
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if hasattr(x, "value") and not isinstance(x, (int, float, str)):
        return x.value
    return x


# ---------------------------------------------------------------------------
# problem files


def _state(obj, dim: int, key: str) -> MeasuredAlgebra:
    if obj == "trace":
        return MeasuredAlgebra.trace(dim)
    rho = decode_array(obj, 2, key)
    if rho.shape != (dim, dim):
        raise ProblemError(f"{key}: expected a {dim} x {dim} matrix, got {rho.shape}")
    try:
        return MeasuredAlgebra(rho)
    except ValidationError as exc:
        raise ProblemError(f"{key}: {exc}") from None


class Problem:
    """A parsed problem file."""

    def __init__(self, data: dict, source: str = "<input>"):
        if not isinstance(data, dict):
            raise ProblemError(f"{source}: top level must be an object")
        self.data = data
        self.source = source
        if "classical" in data:
            block = data["classical"]
            try:
                self.classical = classical.ClassicalInstance(
                    np.asarray(block["mu"], dtype=float), np.asarray(block["nu"], dtype=float),
                    np.asarray(block["cost"], dtype=float))
            except (KeyError, TypeError, ValueError) as exc:
                raise ProblemError(f"{source}: classical block: {exc}") from None
            return
        self.classical = None
        try:
            self.n, self.m = int(data["n"]), int(data["m"])
        except (KeyError, TypeError, ValueError):
            raise ProblemError(f"{source}: integer fields 'n' and 'm' are required") from None
        if self.n < 1 or self.m < 1:
            raise ProblemError(f"{source}: dimensions must be positive")
        self.left = _state(data.get("phi", "trace"), self.n, "phi")
        self.right = _state(data.get("psi", "trace"), self.m, "psi")
        d = self.n * self.m
        self.vector = self.subspace = None
        kinds = [k for k in ("T", "vector", "subspace") if k in data]
        if len(kinds) != 1:
            raise ProblemError(f"{source}: exactly one of 'T', 'vector', 'subspace' is required")
        if "T" in data:
            self.T = decode_array(data["T"], 2, "T")
            if self.T.shape != (d, d):
                raise ProblemError(f"T: expected a {d} x {d} matrix, got {self.T.shape}")
        elif "vector" in data:
            v = decode_array(data["vector"], 1, "vector")
            if v.shape != (d,):
                raise ProblemError(f"vector: expected length {d}, got {v.size}")
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise ProblemError(f"vector: must have unit norm, got {np.linalg.norm(v):.12g}")
            self.vector = v
            self.T = vector_projection(v)
        else:
            B = decode_array(data["subspace"], 2, "subspace")
            if B.shape[1] != d:
                raise ProblemError(f"subspace: basis vectors must have length {d}")
            self.subspace = Subspace.span(B)
            self.T = self.subspace.projection()

    @classmethod
    def load(cls, path: str) -> Problem:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ProblemError(f"{path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        return cls(data, path)

    def require_quantum(self):
        if self.classical is not None:
            raise ProblemError(f"{self.source}: this command needs a quantum problem, not a classical block")


# ---------------------------------------------------------------------------
# commands


def _options(args) -> SolverOptions:
    kw = {"seed": args.seed}
    if args.tol is not None:
        kw["residual_tol"] = args.tol
    if args.max_iters is not None:
        kw["max_iterations"] = args.max_iters
    return SolverOptions(**kw)


def _tolerances(opts: SolverOptions) -> dict:
    return {"residual_tol": opts.residual_tol, "max_iterations": opts.max_iterations,
            "decision_tol": capacity.DECISION_TOL, "feasibility_tol": gamma.FEASIBILITY_TOL,
            "schmidt_tol": entangle.SCHMIDT_TOL}


def _capacity_block(res: capacity.CapacityResult, emit: bool) -> dict:
    d = res.diagnostics
    out = {"value": res.value, "status": d.get("status"), "method": d.get("method"),
           "iterations": d.get("iterations"),
           "residuals": {"primal": d.get("primal_residual"), "dual": d.get("dual_residual")},
           "gap": res.gap}
    if emit:
        if res.witness is not None:
            out["witness"] = encode_array(res.witness.density)
        if res.certificate is not None and res.certificate[0] is not None:
            out["certificate"] = {"a": encode_array(res.certificate[0]), "b": encode_array(res.certificate[1])}
    return out


def cmd_alpha(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    res = capacity.alpha(prob.T, prob.left, prob.right, opts)
    return _capacity_block(res, args.emit_witness), EXIT_OK if res.converged else EXIT_SOLVER


def cmd_beta(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    res = capacity.beta(prob.T, prob.left, prob.right, opts)
    return _capacity_block(res, args.emit_witness), EXIT_OK if res.converged else EXIT_SOLVER


def cmd_gap(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    a = capacity.alpha(prob.T, prob.left, prob.right, opts)
    b = capacity.beta(prob.T, prob.left, prob.right, opts)
    out = {"alpha": _capacity_block(a, args.emit_witness), "beta": _capacity_block(b, args.emit_witness),
           "value": b.value - a.value}
    return out, EXIT_OK if a.converged and b.converged else EXIT_SOLVER


def cmd_gamma(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    res = gamma.gamma_bounds(prob.T, prob.left, prob.right, restarts=args.restarts, seed=args.seed, opts=opts)
    out = {"lower": res.lower, "upper": res.upper, "exact": res.exact, "method": res.method.value}
    if "pairs_tried" in res.diagnostics:
        out["pairs_tried"] = res.diagnostics["pairs_tried"]
    if args.emit_witness and res.optimizer is not None:
        out["optimizer"] = {"p": encode_array(res.optimizer[0]), "q": encode_array(res.optimizer[1])}
    return out, EXIT_OK


def cmd_strassen(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    X = prob.subspace
    if X is None:
        if prob.vector is not None:
            X = Subspace.span([prob.vector])
        else:
            raise ProblemError(f"{prob.source}: strassen needs a 'subspace' or 'vector'")
    v = capacity.strassen_decide(X, prob.left, prob.right, opts)
    out = {"feasible": v.feasible, "alpha": v.alpha_value, "indeterminate": v.indeterminate}
    if v.feasible:
        out["support_residual"] = v.support_residual
        if v.witness is not None:
            out["witness"] = encode_array(v.witness.density)
    else:
        out["margin"] = v.margin
        out["certificate_min_eigenvalue"] = v.diagnostics.get("certificate_min_eigenvalue")
        out["certificate"] = {"a1": encode_array(v.certificate[0]), "a2": encode_array(v.certificate[1])}
    return out, EXIT_OK


def cmd_classical(prob: Problem, opts, args) -> tuple[dict, int]:
    inst = prob.classical
    if inst is None:
        raise ProblemError(f"{prob.source}: classical needs a 'classical' block")
    a, plan = classical.ot_alpha(inst)
    b, pa, pb = classical.ot_beta(inst)
    out = {"alpha": a, "beta": b, "plan": plan.plan, "potentials": {"a": pa, "b": pb}}
    if inst.is_binary():
        g, A, B = classical.ot_gamma(inst)
        out["gamma"] = g
        out["cover"] = {"A": A, "B": B}
    return out, EXIT_OK


def cmd_schmidt(prob: Problem, opts, args) -> tuple[dict, int]:
    prob.require_quantum()
    if prob.vector is None:
        raise ProblemError(f"{prob.source}: schmidt needs a 'vector'")
    sd = entangle.schmidt(prob.vector, prob.n, prob.m)
    return {"coefficients": sd.coefficients, "left_frame": encode_array(sd.left_frame),
            "right_frame": encode_array(sd.right_frame), "schmidt_rank": sd.schmidt_rank}, EXIT_OK


def cmd_paper_examples(opts, args) -> tuple[dict, int]:
    results = regression.run(opts)
    cases = [{"name": r.name, "expected": r.expected, "observed": r.observed, "delta": r.delta,
              "passed": r.passed, **({"error": r.error} if r.error else {})} for r in results]
    failed = [r.name for r in results if not r.passed]
    return ({"cases": cases, "passed": len(results) - len(failed), "failed": failed},
            EXIT_REGRESSION if failed else EXIT_OK)


COMMANDS = {
    "alpha": cmd_alpha, "beta": cmd_beta, "gap": cmd_gap, "gamma": cmd_gamma,
    "strassen": cmd_strassen, "classical": cmd_classical, "schmidt": cmd_schmidt,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="solver residual tolerance")
    common.add_argument("--max-iters", type=int, default=None, help="solver iteration budget")
    common.add_argument("--restarts", type=int, default=32, help="random restarts for the gamma search")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--emit-witness", action="store_true", help="include witnesses and certificates")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    parser = argparse.ArgumentParser(prog="coupling-capacity",
                                     description="Coupling capacities of positive operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("problem", help="JSON problem file")
    sub.add_parser("paper-examples", parents=[common], help="run the regression suite of worked values")
    return parser


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=False)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = {"command": args.command}
    try:
        opts = _options(args)
        report["tolerances"] = _tolerances(opts)
        report["seed"] = args.seed
        if args.command == "paper-examples":
            body, code = cmd_paper_examples(opts, args)
        else:
            report["input"] = args.problem
            body, code = COMMANDS[args.command](Problem.load(args.problem), opts, args)
    except (ValidationError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    report.update(body)
    report["wall_time"] = time.perf_counter() - start
    text = dumps(report)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
