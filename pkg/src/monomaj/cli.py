"""``monomaj`` command line: every construction, exact JSON (or CSV) on stdout.

Exit status is 0 on success, 1 when a construction rejects its input (the
error class name goes to stderr) and 2 for usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from . import __version__
from . import serialize as ser
from .errors import MonomajError, RepresentationError
from .kernels import (
    DEFAULT_MAX_CELLS,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    apply,
    calderon_factorize,
    certify,
    dmitriev_factorize,
    majorant_S,
)
from .stepfn import (
    L1,
    LINF,
    Lambda,
    PiecewiseLinear,
    Tilde,
    is_nonincreasing,
    k_dominance_witness,
    k_profile,
    majorant,
    norm,
    rearrangement,
)
from .stochastic import (
    block_partition,
    hlp_construct,
    hlp_monotone_substoch,
    is_doubly_stochastic,
    is_monotone_matrix,
    is_substochastic,
    matvec,
    pushing_mass_trace,
)
from .vectors import first_prefix_violation, majorizes, submajorizes, vector

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Malformed input document or unsupported option combination."""


# --- input helpers -------------------------------------------------------------------


def _load_input(spec: Optional[str]) -> Dict[str, Any]:
    if spec is None:
        return {}
    try:
        if spec == "-":
            text = sys.stdin.read()
        elif spec.lstrip().startswith(("{", "[")):
            text = spec
        else:
            text = Path(spec).read_text()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read --input: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("--input must be a JSON object")
    return data


def _field(data: Dict[str, Any], key: str):
    if key not in data:
        raise UsageError(f"input is missing {key!r}")
    return data[key]


def _vec(data, key):
    return vector(ser.vector_from_json(_field(data, key)))


def _step(data, key):
    try:
        return ser.stepfn_from_json(_field(data, key))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed step function {key!r}") from exc


def _gauge(data) -> PiecewiseLinear:
    if "phi" not in data:
        return PiecewiseLinear.linear(1)
    return ser.pl_from_json(data["phi"])


def _space(data):
    name = data.get("space", "TildeL1")
    table = {
        "L1": lambda: L1,
        "TildeL1": lambda: Tilde(L1),
        "Lambda": lambda: Lambda(_gauge(data)),
        "TildeLambda": lambda: Tilde(Lambda(_gauge(data))),
    }
    if name not in table:
        raise UsageError(f"unknown space {name!r}; choose from {sorted(table)}")
    return table[name]()


# --- subcommands ------------------------------------------------------------------------
# Each returns (json_result, csv_rows or None).

Result = Tuple[Dict[str, Any], Optional[List[List[str]]]]


def cmd_majorize(data, args) -> Result:
    a, b = _vec(data, "a"), _vec(data, "b")
    k = first_prefix_violation(a, b)
    return {
        "submajorizes": submajorizes(a, b),
        "majorizes": majorizes(a, b),
        "first_violation": k,
    }, None


def cmd_hlp(data, args) -> Result:
    a, b = _vec(data, "a"), _vec(data, "b")
    kind = data.get("kind", "auto")
    if kind == "auto":
        kind = "ds" if majorizes(a, b) else "substoch"
    if kind == "ds":
        built = hlp_construct(a, b)
        m, extra = built.matrix, {"head_reductions": built.head_reductions}
    elif kind == "substoch":
        m, extra = hlp_monotone_substoch(a, b), {}
    else:
        raise UsageError("kind must be auto, ds or substoch")
    result = {
        "kind": kind,
        "matrix": ser.matrix_to_json(m),
        "image": ser.vector_to_json(matvec(m, a)),
        "doubly_stochastic": is_doubly_stochastic(m),
        "substochastic": is_substochastic(m),
        "monotone": is_monotone_matrix(m),
        **extra,
    }
    return result, ser.matrix_to_json(m)


def cmd_blocks(data, args) -> Result:
    plan = block_partition(_vec(data, "a"), _vec(data, "b"))
    return {"blocks": ser.blocks_to_json(plan)}, [[str(b.end), ser.rat(b.delta)] for b in plan]


def cmd_pushmass(data, args) -> Result:
    steps = pushing_mass_trace(_vec(data, "f"), _vec(data, "g"))
    rows = [ser.vector_to_json(s) for s in steps]
    return {"reconstructed_rule": True, "count": len(steps), "steps": rows}, rows


def cmd_tilde(data, args) -> Result:
    f = _step(data, "f")
    return {
        "majorant": ser.stepfn_to_json(majorant(f)),
        "rearrangement": ser.stepfn_to_json(rearrangement(f)),
        "nonincreasing": is_nonincreasing(f),
        "norms": {
            "L1": ser.rat(norm(f, L1)),
            "Linf": ser.rat(norm(f, LINF)),
            "TildeL1": ser.rat(norm(f, Tilde(L1))),
        },
    }, None


def cmd_kfun(data, args) -> Result:
    f = _step(data, "f")
    space = _space(data)
    prof = k_profile(f, space)
    result: Dict[str, Any] = {"space": data.get("space", "TildeL1"), "profile": ser.pl_to_json(prof)}
    if "t" in data:
        result["values"] = [[ser.rat(t), ser.rat(prof(t))] for t in ser.vector_from_json(data["t"])]
    if "g" in data:
        w = k_dominance_witness(f, _step(data, "g"), space)
        result["dominates"] = w is None
        result["witness"] = None if w is None else ser.rat(w)
    rows = [[ser.rat(t), ser.rat(v)] for t, v in prof.nodes]
    return result, [["t", "K"]] + rows


def cmd_mapstotilde(data, args) -> Result:
    f = _step(data, "f")
    chain, q_eff = majorant_S(f, args.q)
    v = chain.primitives[2].symbol
    bound = q_eff * max(1, norm(v, LINF))
    cert = certify(chain, samples=args.samples, seed=args.seed, ltilde_certified=bound)
    return {
        "chain": ser.chain_to_json(chain),
        "q_eff": ser.rat(q_eff),
        "image": ser.stepfn_to_json(apply(chain, f)),
        "certificate": ser.certificate_to_json(cert),
    }, None


def cmd_factorize(data, args) -> Result:
    f, g = _step(data, "f"), _step(data, "g")
    chain, cert = calderon_factorize(
        f, g, args.q, max_cells=args.max_cells, samples=args.samples, seed=args.seed
    )
    replay = apply(chain, f)
    return {
        "chain": ser.chain_to_json(chain),
        "replay": ser.stepfn_to_json(replay),
        "replay_matches": replay == g,
        "certificate": ser.certificate_to_json(cert),
    }, None


def cmd_dmitriev(data, args) -> Result:
    f, g = _step(data, "f"), _step(data, "g")
    chain = dmitriev_factorize(f, g, _gauge(data), max_cells=args.max_cells)
    replay = apply(chain, f)
    cert = certify(chain, samples=args.samples, seed=args.seed)
    return {
        "chain": ser.chain_to_json(chain),
        "replay": ser.stepfn_to_json(replay),
        "replay_matches": replay == g,
        "certificate": ser.certificate_to_json(cert),
    }, None


def cmd_certify(data, args) -> Result:
    try:
        chain = ser.chain_from_json(_field(data, "chain"), data.get("name", "chain"))
    except (KeyError, TypeError) as exc:
        raise UsageError("malformed chain") from exc
    cert = certify(chain, samples=args.samples, seed=args.seed)
    return {"certificate": ser.certificate_to_json(cert)}, None


def _load_fixtures() -> List[Dict[str, Any]]:
    text = resources.files("monomaj").joinpath("data/worked_examples.json").read_text()
    return json.loads(text)["fixtures"]


def run_fixture(fx: Dict[str, Any]) -> Tuple[bool, str]:
    """Check one shipped fixture; returns (passed, detail)."""
    kind = fx["kind"]
    try:
        if kind == "pushmass":
            steps = [list(s) for s in pushing_mass_trace(_vec(fx, "f"), _vec(fx, "g"))]
            if "steps" in fx:
                want = [list(ser.vector_from_json(s)) for s in fx["steps"]]
                return steps == want, f"{len(steps)} steps"
            want = [list(ser.vector_from_json(s)) for s in fx["prefix"]]
            ok = steps[: len(want)] == want and len(steps) == fx["count"]
            return ok, f"{len(steps)} steps"
        if kind == "majorize":
            got = majorizes(_vec(fx, "a"), _vec(fx, "b"))
            return got == fx["majorizes"], f"majorizes={got}"
        if kind == "hlp":
            a, b = _vec(fx, "a"), _vec(fx, "b")
            built = hlp_construct(a, b)
            ok = matvec(built.matrix, a) == b and is_monotone_matrix(built.matrix)
            if "head_reductions" in fx:
                ok &= built.head_reductions == fx["head_reductions"]
            if "max_head_reductions" in fx:
                ok &= built.head_reductions <= fx["max_head_reductions"]
            if "matrix" in fx:
                ok &= built.matrix == ser.matrix_from_json(fx["matrix"])
            return ok, f"{built.head_reductions} head reductions"
    except MonomajError as exc:
        return False, f"{type(exc).__name__}: {exc}"
    return False, f"unknown fixture kind {kind!r}"


def cmd_selftest(data, args) -> Result:
    report = []
    for fx in _load_fixtures():
        ok, detail = run_fixture(fx)
        report.append({"name": fx["name"], "passed": ok, "detail": detail})
    rows = [[r["name"], "PASS" if r["passed"] else "FAIL", r["detail"]] for r in report]
    return {"passed": all(r["passed"] for r in report), "fixtures": report}, rows


COMMANDS: Dict[str, Tuple[Callable[..., Result], str]] = {
    "majorize": (cmd_majorize, "majorization relations between vectors a and b"),
    "hlp": (cmd_hlp, "monotone doubly stochastic or substochastic A with A a = b"),
    "blocks": (cmd_blocks, "block partition used by the substochastic construction"),
    "pushmass": (cmd_pushmass, "pushing-mass comparison trace (reconstructed rule)"),
    "tilde": (cmd_tilde, "majorant, rearrangement and norms of a step function"),
    "kfun": (cmd_kfun, "K-functional profile and optional dominance check"),
    "mapstotilde": (cmd_mapstotilde, "operator chain sending f to its majorant"),
    "factorize": (cmd_factorize, "couple operator H with H f = g"),
    "dmitriev": (cmd_dmitriev, "monotone S = T D with S f = g for Lorentz data"),
    "certify": (cmd_certify, "norm bounds and flags for a serialized chain"),
    "selftest": (cmd_selftest, "check the shipped worked-example fixtures"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="JSON file, '-' for stdin, or an inline JSON object")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    common.add_argument("--q", type=str, default="2", help="band ratio q > 1 (rational)")
    common.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)

    parser = argparse.ArgumentParser(prog="monomaj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"monomaj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _header(args) -> Dict[str, Any]:
    return {
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "max_cells": args.max_cells,
        "samples": args.samples,
        "q": ser.rat(args.q),
    }


def _render(args, result: Dict[str, Any], rows: Optional[List[List[str]]]) -> str:
    header = _header(args)
    if args.format == "json":
        return json.dumps({"header": header, "result": result}, indent=2, ensure_ascii=False)
    if rows is None:
        raise UsageError(f"--format csv is not available for {args.command}")
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().rstrip("\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.q = ser.parse_rat(args.q)
        data = _load_input(args.input)
        handler, _ = COMMANDS[args.command]
        result, rows = handler(data, args)
        text = _render(args, result, rows)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"monomaj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RepresentationError as exc:
        print(f"monomaj: error: RepresentationError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MonomajError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(text)
    if args.command == "selftest" and not result["passed"]:
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
