"""JSON-in / JSON-out command line front end.

Exit codes: 0 success, 1 domain error or malformed input, 2 enumeration
budget exhausted, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .bounds import ct_bound, dag_flow_bound, explicit_flow_bound
from .capacity import CapacityInstance, SchurFactor, capacity_optimize
from .flows import DEFAULT_BUDGET, BudgetExceeded, Dag, DomainError
from .verify import SUITES, run_suite
from .verma import VermaInstance, decompose_J, verma_bound, verma_explicit_bound

EXIT_OK, EXIT_DOMAIN, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _field(obj, name, where="input"):
    if not isinstance(obj, dict):
        raise InputError(f"{where} must be a JSON object")
    if name not in obj:
        raise InputError(f"missing field '{name}' in {where}")
    return obj[name]


def _int_list(value, name):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise InputError(f"field '{name}' must be a list of integers")
    return value


def _graph(obj) -> Dag:
    g = _field(obj, "graph")
    n = _field(g, "n", "graph")
    edges = _field(g, "edges", "graph")
    if not isinstance(n, int) or not isinstance(edges, list):
        raise InputError("field 'graph' must hold an integer 'n' and a list 'edges'")
    for e in edges:
        _int_list(e, "graph.edges")
        if len(e) != 2:
            raise InputError("each entry of 'graph.edges' must be a [tail, head] pair")
    return Dag(n, tuple(tuple(e) for e in edges))


def _vector(obj, *names):
    for name in names:
        if name in obj:
            v = obj[name]
            if isinstance(v, dict):
                v = _field(v, "values", name)
            return _int_list(v, name)
    raise InputError(f"missing field '{names[0]}' in input")


def _number(v, where):
    if isinstance(v, bool):
        raise InputError(f"{where} must be a number")
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return int(v) if v.is_integer() else v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            pass
    raise InputError(f"{where} must be a number or a 'p/q' string")


def _flow(path):
    """Flow file: {"flow": [[tail, head, value], ...]}."""
    obj = _load(path)
    entries = _field(obj, "flow", "flow file")
    flow = {}
    for e in entries:
        if not isinstance(e, list) or len(e) != 3:
            raise InputError("each entry of 'flow' must be [tail, head, value]")
        flow[(int(e[0]), int(e[1]))] = _number(e[2], "flow value")
    return flow


def _load(path):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno}") from None


def weight_to_exponent(n, J, lam, weight):
    """Convenience translation used by ``verma`` when ``weight`` is given.

    mu_exponent = weight - shift, where shift_i = lam_{i_{t+1}} on the block
    [i_t + 1, i_{t+1}] containing i.  Under schur_vars=extended this makes the
    coefficient the dimension of the weight space; under as_stated it is only
    the series coefficient.
    """
    runs, comp = decompose_J(n, J)
    cuts = comp + [n + 1]
    shift = [0] * (n + 1)
    for run, top in zip(runs, cuts):
        for i in run + (top,):
            shift[i - 1] = lam[top - 1]
    return [w - s for w, s in zip(weight, shift)]


def _verma_instance(obj, args) -> VermaInstance:
    n = _field(obj, "n")
    J = _int_list(_field(obj, "J"), "J")
    lam = _int_list(_field(obj, "lambda"), "lambda")
    if "mu_exponent" in obj:
        mu = _int_list(obj["mu_exponent"], "mu_exponent")
    elif "weight" in obj:
        mu = weight_to_exponent(n, J, lam, _int_list(obj["weight"], "weight"))
    else:
        raise InputError("missing field 'mu_exponent' in input")
    mode = args.schur_vars or obj.get("schur_vars", "as_stated")
    return VermaInstance(n, frozenset(J), tuple(lam), tuple(mu), mode, bool(obj.get("strict", False)))


def cmd_flows(args):
    obj = _load(args.input)
    g = _graph(obj)
    N = _vector(obj, "netflow", "target")
    if args.flow:
        return explicit_flow_bound(g, N, _flow(args.flow)).to_json()
    return dag_flow_bound(g, N, with_exact=args.exact, tol=args.tol, budget=args.budget).to_json()


def cmd_ct(args):
    obj = _load(args.input)
    alpha = _int_list(_field(obj, "alpha"), "alpha")
    beta = _int_list(_field(obj, "beta"), "beta")
    return ct_bound(alpha, beta, with_exact=args.exact, tol=args.tol).to_json()


def cmd_verma(args):
    obj = _load(args.input)
    inst = _verma_instance(obj, args)
    if args.flow:
        nu = _int_list(_field(obj, "nu"), "nu")
        return verma_explicit_bound(inst, nu, _flow(args.flow), args.factor_range).to_json()
    return verma_bound(inst, with_exact=args.exact, factor_range=args.factor_range,
                       tol=args.tol, budget=args.budget).to_json()


def cmd_capacity(args):
    obj = _load(args.input)
    g = _graph(obj)
    alpha = _vector(obj, "target", "netflow")
    parts = []
    for k, p in enumerate(obj.get("schur_parts", [])):
        where = f"schur_parts[{k}]"
        parts.append(SchurFactor(tuple(_int_list(_field(p, "partition", where), "partition")),
                                 tuple(_int_list(_field(p, "variables", where), "variables"))))
    return capacity_optimize(CapacityInstance(g, tuple(alpha), tuple(parts)), tol=args.tol).to_json()


def cmd_verify(args):
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(name, seed=args.seed) for name in names]
    for r in results:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'} ({r.checked} checks, "
              f"{r.failure_count} failures, {r.elapsed:.1f}s)", file=sys.stderr)
    out = {"passed": all(r.passed for r in results), "suites": [r.to_json() for r in results]}
    return out, (EXIT_OK if out["passed"] else EXIT_VERIFY)


COMMANDS = {"flows": cmd_flows, "ct": cmd_ct, "verma": cmd_verma, "capacity": cmd_capacity, "verify": cmd_verify}


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


class _Parser(argparse.ArgumentParser):
    """Usage errors become JSON errors with exit code 1 (2 means budget)."""

    def error(self, message):
        _error("usage", message, EXIT_DOMAIN)
        sys.exit(EXIT_DOMAIN)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dlbounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", default="-", help="input JSON file, '-' for stdin")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=_positive(float), default=1e-9, help="gradient-norm tolerance")
        p.add_argument("--budget", type=_positive(int), default=DEFAULT_BUDGET,
                       help="node limit for exact enumeration")
        if name in ("flows", "ct", "verma"):
            p.add_argument("--exact", action="store_true", help="attach the exact count")
        if name in ("flows", "verma"):
            p.add_argument("--flow", help="flow JSON file for the explicit-flow bound")
        if name == "verma":
            p.add_argument("--schur-vars", choices=["as_stated", "extended"], default=None)
            p.add_argument("--factor-range", choices=["proof", "stated"], default="proof")
        if name == "verify":
            p.add_argument("--suite", default="all", choices=sorted(SUITES) + ["all"])
    return parser


def _emit(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _error(code, message, status):
    _emit({"error": {"code": code, "message": message}})
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        return _error("budget-exhausted", str(exc), EXIT_BUDGET)
    except InputError as exc:
        return _error("malformed-input", str(exc), EXIT_DOMAIN)
    except (DomainError, ValueError, TypeError, KeyError) as exc:
        return _error("domain-error", str(exc), EXIT_DOMAIN)
    status = EXIT_OK
    if isinstance(out, tuple):
        out, status = out
    _emit(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
