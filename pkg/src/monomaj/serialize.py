"""JSON encoding. Rationals travel as canonical ``"p/q"`` strings, never floats."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, List

from .errors import RepresentationError
from .kernels import (
    CoupleCertificate,
    KernelOp,
    LTildeSample,
    Multiply,
    OperatorChain,
    PCKernel,
    SignFlip,
)
from .stepfn import INF, PiecewiseLinear, StepFunction
from .stochastic import Block, BlockPlan


def rat(x) -> str:
    """Canonical string: ``"p/q"`` in lowest terms with ``q > 0``; ``"inf"`` for infinity."""
    if x == INF:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s):
    if isinstance(s, float):
        if s == INF:
            return INF
        raise RepresentationError("floats are not accepted; use \"p/q\" strings")
    if isinstance(s, str) and s.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    try:
        return Fraction(s)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise RepresentationError(f"not a rational: {s!r}") from exc


def vector_to_json(v) -> List[str]:
    return [rat(x) for x in v]


def vector_from_json(data) -> tuple:
    return tuple(parse_rat(x) for x in data)


def matrix_to_json(m) -> List[List[str]]:
    return [vector_to_json(row) for row in m]


def matrix_from_json(data):
    return tuple(vector_from_json(row) for row in data)


def blocks_to_json(plan: BlockPlan) -> List[Dict[str, Any]]:
    return [{"end": b.end, "delta": rat(b.delta)} for b in plan]


def blocks_from_json(data) -> BlockPlan:
    return tuple(Block(int(item["end"]), parse_rat(item["delta"])) for item in data)


def stepfn_to_json(f: StepFunction) -> Dict[str, Any]:
    return {"breaks": vector_to_json(f.breaks), "values": vector_to_json(f.values), "tail": rat(f.tail)}


def stepfn_from_json(data) -> StepFunction:
    """Accepts ``{breaks, values, tail}`` or the shorthand ``{pieces: [[a, b, v], ...], tail}``."""
    if "pieces" in data:
        pieces = [tuple(parse_rat(x) for x in p) for p in data["pieces"]]
        return StepFunction.from_pieces(pieces, parse_rat(data.get("tail", "0")))
    return StepFunction(
        vector_from_json(data["breaks"]),
        vector_from_json(data["values"]),
        parse_rat(data.get("tail", "0")),
    )


def pl_to_json(p: PiecewiseLinear) -> Dict[str, Any]:
    return {"nodes": [[rat(t), rat(v)] for t, v in p.nodes], "final_slope": rat(p.final_slope)}


def pl_from_json(data) -> PiecewiseLinear:
    return PiecewiseLinear(
        tuple((parse_rat(t), parse_rat(v)) for t, v in data["nodes"]),
        parse_rat(data.get("final_slope", "0")),
    )


def kernel_to_json(k: PCKernel) -> Dict[str, Any]:
    return {
        "xbreaks": vector_to_json(k.xbreaks),
        "ybreaks": vector_to_json(k.ybreaks),
        "cells": matrix_to_json(k.cells),
    }


def kernel_from_json(data) -> PCKernel:
    return PCKernel(
        vector_from_json(data["xbreaks"]),
        vector_from_json(data["ybreaks"]),
        matrix_from_json(data["cells"]),
    )


def chain_to_json(chain: OperatorChain) -> List[Dict[str, Any]]:
    out = []
    for p in chain.primitives:
        if isinstance(p, KernelOp):
            out.append({"kind": "kernel", "kernel": kernel_to_json(p.kernel)})
        elif isinstance(p, Multiply):
            out.append({"kind": "multiply", "symbol": stepfn_to_json(p.symbol)})
        else:
            out.append({"kind": "signflip", "pattern": stepfn_to_json(p.pattern)})
    return out


def chain_from_json(data, name: str = "chain") -> OperatorChain:
    prims = []
    for item in data:
        kind = item.get("kind")
        if kind == "kernel":
            prims.append(KernelOp(kernel_from_json(item["kernel"])))
        elif kind == "multiply":
            prims.append(Multiply(stepfn_from_json(item["symbol"])))
        elif kind == "signflip":
            prims.append(SignFlip(stepfn_from_json(item["pattern"])))
        else:
            raise RepresentationError(f"unknown primitive kind {kind!r}")
    return OperatorChain(tuple(prims), name)


def certificate_to_json(c: CoupleCertificate) -> Dict[str, Any]:
    sample = None
    if c.ltilde_sample is not None:
        s = c.ltilde_sample
        sample = {"bound": rat(s.bound), "n": s.n, "seed": s.seed}
    return {
        "operator": c.operator,
        "l1_bound": rat(c.l1_bound),
        "linf_bound": rat(c.linf_bound),
        "substochastic": c.substochastic,
        "monotone": c.monotone,
        "ltilde_sample": sample,
        "ltilde_certified": None if c.ltilde_certified is None else rat(c.ltilde_certified),
    }


def certificate_from_json(data) -> CoupleCertificate:
    s = data.get("ltilde_sample")
    sample = None if s is None else LTildeSample(parse_rat(s["bound"]), s["n"], s["seed"])
    cert = data.get("ltilde_certified")
    return CoupleCertificate(
        data["operator"],
        parse_rat(data["l1_bound"]),
        parse_rat(data["linf_bound"]),
        data["substochastic"],
        data["monotone"],
        sample,
        None if cert is None else parse_rat(cert),
    )
