"""Random generators and brute-force oracles shared by the test modules.

The oracles deliberately avoid the library's own algorithms: majorants are
suffix maxima over raw pieces, integrals are sums over pieces, rearrangements
sort (value, length) pairs.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import reduce
from math import lcm

from hypothesis import strategies as st

from monomaj.kernels import PCKernel, UniformGrid, flatten_HBG
from monomaj.stepfn import INF, PiecewiseLinear, StepFunction
from monomaj.stochastic import identity, matvec

F = Fraction


# --- vectors and matrices ------------------------------------------------------------------


def rand_fraction(rng: random.Random, lo=0, hi=5, den=6) -> Fraction:
    d = rng.randint(1, den)
    return F(rng.randint(lo * d, hi * d), d)


def rand_nonincreasing(rng: random.Random, n: int, hi=5) -> tuple:
    return tuple(sorted((rand_fraction(rng, 0, hi) for _ in range(n)), reverse=True))


def averaging_matrix(sizes) -> tuple:
    """Block-diagonal matrix averaging consecutive blocks of the given sizes."""
    n = sum(sizes)
    rows = [[F(0)] * n for _ in range(n)]
    start = 0
    for s in sizes:
        for i in range(start, start + s):
            for j in range(start, start + s):
                rows[i][j] = F(1, s)
        start += s
    return tuple(tuple(r) for r in rows)


def rand_composition(rng: random.Random, n: int) -> list:
    cuts = sorted(rng.sample(range(1, n), rng.randint(0, n - 1))) if n > 1 else []
    edges = [0] + cuts + [n]
    return [b - a for a, b in zip(edges, edges[1:])]


def rand_monotone_ds(rng: random.Random, n: int, terms: int = 3) -> tuple:
    """Convex combination of the identity and block-averaging matrices."""
    mats = [identity(n)] + [averaging_matrix(rand_composition(rng, n)) for _ in range(terms)]
    weights = [F(rng.randint(0, 4)) for _ in mats]
    if sum(weights) == 0:
        weights[0] = F(1)
    total = sum(weights)
    return tuple(
        tuple(sum(w * m[i][j] for w, m in zip(weights, mats)) / total for j in range(n))
        for i in range(n)
    )


def rand_monotone_substoch(rng: random.Random, n: int) -> tuple:
    """``diag(delta) · M`` with ``delta`` nonincreasing in ``[0, 1]``."""
    m = rand_monotone_ds(rng, n)
    delta = sorted((F(rng.randint(0, 4), 4) for _ in range(n)), reverse=True)
    return tuple(tuple(delta[i] * x for x in m[i]) for i in range(n))


def apply_matrix(m, a):
    return matvec(m, a)


# --- step functions ---------------------------------------------------------------------


def rand_step(rng: random.Random, *, pieces=5, extent=4, den=4, signed=True, tail=None) -> StepFunction:
    """Random step function with breaks on the ``1/den`` grid inside ``[0, extent]``."""
    slots = extent * den
    k = rng.randint(1, min(pieces, slots))
    pts = sorted(rng.sample(range(1, slots + 1), k))
    breaks = [F(0)] + [F(p, den) for p in pts]
    lo = -4 if signed else 0
    values = [rand_fraction(rng, lo, 4, 3) for _ in pts]
    if tail is None:
        tail = F(0) if rng.random() < 0.7 else rand_fraction(rng, lo, 2, 2)
    return StepFunction(breaks, values, tail)


def rand_nonincreasing_step(rng: random.Random, **kw) -> StepFunction:
    f = rand_step(rng, signed=False, tail=F(0), **kw)
    vals = sorted(f.values, reverse=True)
    return StepFunction(f.breaks, vals, F(0))


def raw_pieces(f: StepFunction):
    return list(zip(f.breaks, f.breaks[1:], f.values))


def oracle_majorant(f: StepFunction) -> StepFunction:
    vals = [abs(v) for v in f.values]
    out = []
    running = abs(f.tail)
    for v in reversed(vals):
        running = max(running, v)
        out.append(running)
    return StepFunction(f.breaks, list(reversed(out)), abs(f.tail))


def sampled_majorant(f: StepFunction, t) -> Fraction:
    """``ess sup_{s >= t} |f(s)|`` from the left end and midpoint of every piece."""
    probes = [t] + [x for x in f.breaks if x >= t]
    probes += [(a + b) / 2 for a, b in zip(f.breaks, f.breaks[1:]) if b > t]
    return max([abs(f(s)) for s in probes] + [abs(f.tail)])


def oracle_integral(f: StepFunction, t=INF):
    total = F(0)
    for a, b, v in raw_pieces(f):
        if t != INF:
            b = min(b, t)
        if b > a:
            total += (b - a) * v
    last = f.breaks[-1]
    if f.tail != 0:
        if t == INF:
            return INF if f.tail > 0 else -INF
        if t > last:
            total += (t - last) * f.tail
    return total


def oracle_rearrangement_pairs(f: StepFunction):
    """Sorted (|value|, length) pairs of the finite part, merged by value, above ``|tail|``."""
    acc = {}
    for a, b, v in raw_pieces(f):
        if abs(v) > abs(f.tail):
            acc[abs(v)] = acc.get(abs(v), 0) + (b - a)
    return sorted(acc.items(), reverse=True)


def oracle_l1_profile(f: StepFunction, t) -> Fraction:
    """``∫_0^t f*`` by walking the sorted pieces."""
    total, used = F(0), F(0)
    for v, length in oracle_rearrangement_pairs(f):
        take = min(length, t - used)
        if take <= 0:
            break
        total += take * v
        used += take
    if used < t:
        total += (t - used) * abs(f.tail)
    return total


def denominators_lcm(f: StepFunction) -> int:
    return reduce(lcm, (F(b).denominator for b in f.breaks), 1)


# --- kernels ----------------------------------------------------------------------------


def rand_monotone_kernel(rng: random.Random, d: Fraction, n: int, *, substochastic=True) -> PCKernel:
    m = rand_monotone_substoch(rng, n) if substochastic else rand_monotone_ds(rng, n)
    k = flatten_HBG(UniformGrid(d, n), m)
    if substochastic:
        return k
    c = rand_fraction(rng, 0, 3, 2) + F(1, 2)
    return PCKernel(k.xbreaks, k.ybreaks, [[c * x for x in row] for row in k.cells])


GAUGES = (
    PiecewiseLinear.linear(1),
    PiecewiseLinear(((F(0), F(0)), (F(1), F(2))), F(1)),
    PiecewiseLinear(((F(0), F(0)), (F(1), F(1)), (F(2), F(3, 2))), F(1, 4)),
    PiecewiseLinear(((F(0), F(0)), (F(1, 2), F(3, 2))), F(1, 2)),
    PiecewiseLinear(((F(0), F(0)), (F(1), F(3)), (F(3), F(4))), F(1, 3)),
)


def profile_ratio_min(big: PiecewiseLinear, small: PiecewiseLinear) -> Fraction:
    """``inf_{t>0} big(t) / small(t)`` for concave piecewise-linear profiles with ``small`` > 0 on ``t > 0``.

    Both are linear between consecutive joint breakpoints, so the ratio is
    monotone there; candidates are the breakpoints and the limits at 0 and ∞.
    """
    ts = sorted({t for t, _ in big.nodes} | {t for t, _ in small.nodes} - {F(0)})
    ts = [t for t in ts if t > 0]
    cands = [big(t) / small(t) for t in ts]
    first = min([t for t in ts] + [F(1)])
    cands.append(big(first / 2) / small(first / 2))
    if small.final_slope > 0:
        cands.append(big.final_slope / small.final_slope)
    return min(cands)


# --- hypothesis strategies ------------------------------------------------------------------

fractions_small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
fractions_nonneg = st.fractions(min_value=0, max_value=5, max_denominator=6)


@st.composite
def step_functions(draw, signed=True, tails=True, max_pieces=5):
    n = draw(st.integers(1, max_pieces))
    widths = draw(st.lists(st.fractions(min_value=F(1, 4), max_value=2, max_denominator=4), min_size=n, max_size=n))
    vals_st = fractions_small if signed else fractions_nonneg
    values = draw(st.lists(vals_st, min_size=n, max_size=n))
    tail = draw(vals_st) if tails and draw(st.booleans()) else F(0)
    breaks = [F(0)]
    for w in widths:
        breaks.append(breaks[-1] + w)
    return StepFunction(breaks, values, tail)
