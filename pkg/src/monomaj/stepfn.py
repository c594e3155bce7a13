"""Step functions on [0, ∞), nonincreasing majorants and K-functional profiles.

A :class:`StepFunction` has finitely many rational breakpoints and a constant
tail. Everything is exact: norms return a :class:`~fractions.Fraction` or
``math.inf``, and K-functional profiles are exact continuous piecewise-linear
functions (:class:`PiecewiseLinear`).

Spaces are named by small values: ``L1``, ``LINF``, ``Lambda(phi)`` for the
Lorentz space with gauge ``phi`` and ``Tilde(X)`` for ``{f : majorant(f) ∈ X}``.
A K-functional couple is always ``(X, L∞)`` and is named by ``X``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Sequence, Tuple, Union

from .errors import GaugeError, ParameterError, RepresentationError

INF = math.inf
ZERO = Fraction(0)
ONE = Fraction(1)

Number = Union[Fraction, float]  # float only ever means +inf


def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


# --- step functions ---------------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """``values[i]`` on ``[breaks[i], breaks[i+1])`` and ``tail`` on ``[breaks[-1], ∞)``.

    ``breaks[0]`` must be 0. The stored form is canonical: equal neighbours are
    merged and the last finite piece differs from the tail, so two functions
    that agree a.e. compare equal.
    """

    breaks: Tuple[Fraction, ...] = (ZERO,)
    values: Tuple[Fraction, ...] = ()
    tail: Fraction = ZERO

    def __post_init__(self):
        breaks = tuple(map(_frac, self.breaks))
        values = tuple(map(_frac, self.values))
        tail = _frac(self.tail)
        if not breaks or breaks[0] != 0:
            raise RepresentationError("breakpoints must start at 0")
        if len(breaks) != len(values) + 1:
            raise RepresentationError("need exactly one more breakpoint than finite values")
        if any(s >= t for s, t in zip(breaks, breaks[1:])):
            raise RepresentationError("breakpoints must be strictly increasing")
        cb, cv = [breaks[0]], []
        for t, v in zip(breaks[1:], values):
            if cv and cv[-1] == v:
                cb[-1] = t
            else:
                cv.append(v)
                cb.append(t)
        while cv and cv[-1] == tail:
            cv.pop()
            cb.pop()
        object.__setattr__(self, "breaks", tuple(cb))
        object.__setattr__(self, "values", tuple(cv))
        object.__setattr__(self, "tail", tail)

    # construction helpers

    @classmethod
    def constant(cls, c) -> "StepFunction":
        return cls((ZERO,), (), c)

    @classmethod
    def from_pieces(cls, pieces: Iterable[Tuple], tail=0) -> "StepFunction":
        """Sum of ``value * indicator[start, end)`` over pieces, plus ``tail`` beyond the last end.

        Pieces may overlap (values add) and need not cover [0, end); gaps are 0.
        """
        pieces = [(Fraction(a), Fraction(b), Fraction(v)) for a, b, v in pieces]
        out = cls.constant(0)
        for a, b, v in pieces:
            out = out + indicator(a, b, v)
        end = max((b for _, b, _ in pieces), default=ZERO)
        if tail:
            out = out + indicator(end, INF, tail)
        return out

    # evaluation and structure

    @property
    def last_break(self) -> Fraction:
        return self.breaks[-1]

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        if t < 0:
            raise ValueError("step functions live on [0, ∞)")
        i = bisect_right(self.breaks, t) - 1
        return self.values[i] if i < len(self.values) else self.tail

    def pieces(self) -> Iterator[Tuple[Fraction, Fraction, Fraction]]:
        """Finite pieces ``(start, end, value)``; the tail is not included."""
        return zip(self.breaks, self.breaks[1:], self.values)

    def is_zero(self) -> bool:
        return not self.values and self.tail == 0

    def map(self, fn: Callable[[Fraction], Fraction]) -> "StepFunction":
        return StepFunction(self.breaks, [fn(v) for v in self.values], fn(self.tail))

    def on_grid(self, grid: Sequence[Fraction]) -> List[Fraction]:
        """Values on each cell ``[grid[i], grid[i+1])``; ``grid`` must refine ``breaks``."""
        return [self(t) for t in grid[:-1]]

    def integral(self, a=0, b=INF) -> Number:
        """Exact ``∫_a^b f``; ``b`` may be ``inf``."""
        a = Fraction(a)
        if b != INF:
            b = Fraction(b)
            if b <= a:
                return ZERO
        total = ZERO
        for s, t, v in self.pieces():
            lo, hi = max(s, a), t if b == INF else min(t, b)
            if hi > lo:
                total += v * (hi - lo)
        lo = max(self.last_break, a)
        if b == INF:
            if self.tail != 0:
                return INF if self.tail > 0 else -INF
        elif b > lo:
            total += self.tail * (b - lo)
        return total

    def le(self, other: "StepFunction") -> bool:
        """Pointwise (a.e.) ``self <= other``."""
        return all(x <= y for x, y in _aligned(self, other)[1])

    # arithmetic

    def _combine(self, other: "StepFunction", op) -> "StepFunction":
        grid, pairs = _aligned(self, other)
        finite = pairs[:-1]
        return StepFunction(grid, [op(x, y) for x, y in finite], op(*pairs[-1]))

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return self.map(lambda v: v + Fraction(other))
        return self._combine(other, lambda x, y: x + y)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, StepFunction):
            c = Fraction(other)
            return self.map(lambda v: c * v)
        return self._combine(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __abs__(self):
        return self.map(abs)


def _aligned(f: StepFunction, g: StepFunction):
    """Common refinement: (grid, [(f, g) per cell] + [(f.tail, g.tail)])."""
    grid = sorted(set(f.breaks) | set(g.breaks))
    pairs = [(f(t), g(t)) for t in grid[:-1]]
    # the last grid cell [grid[-1], ∞) is the tail of both
    pairs.append((f.tail, g.tail))
    return grid, pairs


def indicator(a, b, value=1) -> StepFunction:
    """``value * χ_[a, b)``; ``b`` may be ``inf``."""
    a, value = Fraction(a), Fraction(value)
    if a < 0:
        raise ValueError("interval must lie in [0, ∞)")
    if b == INF:
        if a == 0:
            return StepFunction.constant(value)
        return StepFunction((ZERO, a), (ZERO,), value)
    b = Fraction(b)
    if b <= a:
        return StepFunction.constant(0)
    if a == 0:
        return StepFunction((ZERO, b), (value,), ZERO)
    return StepFunction((ZERO, a, b), (ZERO, value), ZERO)


def positive_part(f: StepFunction, a=0) -> StepFunction:
    """``(f - a)_+``."""
    a = Fraction(a)
    return f.map(lambda v: max(v - a, ZERO))


# --- majorant, rearrangement, monotonicity ----------------------------------------------


def majorant(f: StepFunction) -> StepFunction:
    """Nonincreasing majorant ``t ↦ ess sup_{s >= t} |f(s)|``."""
    running = abs(f.tail)
    out = []
    for v in reversed(f.values):
        running = max(running, abs(v))
        out.append(running)
    out.reverse()
    return StepFunction(f.breaks, out, abs(f.tail))


def rearrangement(f: StepFunction) -> StepFunction:
    """Nonincreasing rearrangement ``f*``.

    With a nonzero tail ``τ`` the distribution function is infinite below
    ``|τ|``, so levels at or below ``|τ|`` disappear and ``f*`` has tail ``|τ|``.
    """
    floor = abs(f.tail)
    levels = {}
    for s, t, v in f.pieces():
        if abs(v) > floor:
            levels[abs(v)] = levels.get(abs(v), ZERO) + (t - s)
    breaks, values, t = [ZERO], [], ZERO
    for v in sorted(levels, reverse=True):
        t += levels[v]
        breaks.append(t)
        values.append(v)
    return StepFunction(breaks, values, floor)


def is_nonincreasing(f: StepFunction) -> bool:
    chain = list(f.values) + [f.tail]
    return chain[-1] >= 0 and all(x >= y for x, y in zip(chain, chain[1:]))


def p_convexify(f: StepFunction, p: int) -> StepFunction:
    """``|f|^p`` for an integer ``p >= 1``."""
    if isinstance(p, bool) or not isinstance(p, int) or p < 1:
        raise ParameterError(f"p must be an integer >= 1, got {p!r}")
    return f.map(lambda v: abs(v) ** p)


# --- piecewise-linear functions and gauges ---------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, ∞).

    ``nodes`` are ``(t, value)`` pairs with strictly increasing ``t`` starting at
    0; the function continues with ``final_slope`` after the last node. Collinear
    interior nodes are dropped so equality is semantic.
    """

    nodes: Tuple[Tuple[Fraction, Fraction], ...]
    final_slope: Fraction = ZERO

    def __post_init__(self):
        nodes = [(Fraction(t), Fraction(v)) for t, v in self.nodes]
        slope = Fraction(self.final_slope)
        if not nodes or nodes[0][0] != 0:
            raise RepresentationError("piecewise-linear nodes must start at t = 0")
        if any(s >= t for (s, _), (t, _) in zip(nodes, nodes[1:])):
            raise RepresentationError("node abscissae must be strictly increasing")
        kept = [nodes[0]]
        for i in range(1, len(nodes)):
            t, v = nodes[i]
            s_in = (v - kept[-1][1]) / (t - kept[-1][0])
            if i + 1 < len(nodes):
                t2, v2 = nodes[i + 1]
                s_out = (v2 - v) / (t2 - t)
            else:
                s_out = slope
            if s_in != s_out:
                kept.append((t, v))
        object.__setattr__(self, "nodes", tuple(kept))
        object.__setattr__(self, "final_slope", slope)

    @classmethod
    def linear(cls, slope=1) -> "PiecewiseLinear":
        return cls(((ZERO, ZERO),), slope)

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        ts = [n[0] for n in self.nodes]
        i = bisect_right(ts, t) - 1
        if i < 0:
            raise ValueError("defined on [0, ∞) only")
        t0, v0 = self.nodes[i]
        slope = self.slopes()[i]
        return v0 + slope * (t - t0)

    def slopes(self) -> List[Fraction]:
        """Slope of each segment, the last entry being ``final_slope``."""
        out = [(v2 - v1) / (t2 - t1) for (t1, v1), (t2, v2) in zip(self.nodes, self.nodes[1:])]
        out.append(self.final_slope)
        return out

    def breakpoints(self) -> List[Fraction]:
        return [t for t, _ in self.nodes]

    def is_concave(self) -> bool:
        s = self.slopes()
        return all(x >= y for x, y in zip(s, s[1:]))

    def is_nondecreasing(self) -> bool:
        return all(x >= 0 for x in self.slopes())

    def inverse(self, y) -> Fraction:
        """``t`` with ``self(t) = y`` for a strictly increasing function."""
        y = Fraction(y)
        slopes = self.slopes()
        if any(s <= 0 for s in slopes):
            raise GaugeError("inverse needs a strictly increasing function")
        if y < self.nodes[0][1]:
            raise GaugeError(f"{y} is below the range")
        for i, (t0, v0) in enumerate(self.nodes):
            nxt = self.nodes[i + 1][1] if i + 1 < len(self.nodes) else None
            if nxt is None or y <= nxt:
                return t0 + (y - v0) / slopes[i]
        raise AssertionError("unreachable")


def validate_gauge(phi: PiecewiseLinear) -> PiecewiseLinear:
    """Check ``phi(0) = 0``, strictly increasing, concave, ``phi(∞) = ∞``."""
    if phi.nodes[0][1] != 0:
        raise GaugeError("gauge must vanish at 0")
    slopes = phi.slopes()
    if any(s <= 0 for s in slopes):
        raise GaugeError("gauge must be strictly increasing with positive final slope")
    if not phi.is_concave():
        raise GaugeError("gauge must be concave")
    return phi


# --- spaces and norms -----------------------------------------------------------------


L1 = "L1"
LINF = "Linf"


@dataclass(frozen=True)
class Lambda:
    """Lorentz space ``Λ_φ`` with norm ``∫ f* dφ``."""

    phi: PiecewiseLinear

    def __post_init__(self):
        validate_gauge(self.phi)


@dataclass(frozen=True)
class Tilde:
    """``X̃ = {f : majorant(f) ∈ X}`` with ``‖f‖ = ‖majorant(f)‖_X``."""

    inner: object


def _lorentz_integral(h: StepFunction, phi: PiecewiseLinear) -> Number:
    """``∫ h dφ`` for nonnegative nonincreasing ``h``."""
    if h.tail != 0:
        return INF
    return sum((v * (phi(t) - phi(s)) for s, t, v in h.pieces()), ZERO)


def norm(f: StepFunction, space) -> Number:
    """Exact norm of ``f`` in ``space`` (``math.inf`` when not finite)."""
    if space == L1:
        return abs(f).integral()
    if space == LINF:
        return max([abs(f.tail)] + [abs(v) for v in f.values])
    if isinstance(space, Lambda):
        return _lorentz_integral(rearrangement(f), space.phi)
    if isinstance(space, Tilde):
        return norm(majorant(f), space.inner)
    raise ParameterError(f"unknown space {space!r}")


# --- K-functional ------------------------------------------------------------------------


def cumulative(h: StepFunction) -> PiecewiseLinear:
    """``t ↦ ∫_0^t h`` as an exact piecewise-linear function."""
    nodes, acc = [(ZERO, ZERO)], ZERO
    for s, t, v in h.pieces():
        acc += v * (t - s)
        nodes.append((t, acc))
    return PiecewiseLinear(nodes, h.tail)


def _level_candidates(h: StepFunction) -> List[Fraction]:
    """Levels at which the K-functional objective can have a kink (h nonincreasing)."""
    cands = {v for v in h.values if v >= h.tail}
    cands.add(h.tail)
    return sorted(cands, reverse=True)


def _lower_envelope(lines: List[Tuple[Fraction, Fraction]]) -> PiecewiseLinear:
    """Exact ``t ↦ min_i (intercept_i + slope_i * t)`` on ``t >= 0``."""
    lines = sorted(set(lines), key=lambda l: (l[0], l[1]))
    cur_c, cur_s = lines[0]  # smallest intercept, then smallest slope among ties
    t = ZERO
    nodes = [(ZERO, cur_c)]
    while True:
        best = None
        for c, s in lines:
            if s >= cur_s:
                continue
            cross = (c - cur_c) / (cur_s - s)
            if cross < t:
                cross = t
            if best is None or cross < best[0] or (cross == best[0] and s < best[2]):
                best = (cross, c, s)
        if best is None:
            return PiecewiseLinear(nodes, cur_s)
        t, cur_c, cur_s = best
        value = cur_c + cur_s * t
        if t != nodes[-1][0]:
            nodes.append((t, value))


def _k_profile_of_nonincreasing(h: StepFunction, space) -> PiecewiseLinear:
    if space == L1:
        return cumulative(h)
    if isinstance(space, Lambda):
        lines = []
        for a in _level_candidates(h):
            lines.append((_lorentz_integral(positive_part(h, a), space.phi), a))
        return _lower_envelope(lines)
    raise ParameterError(f"K-functional for ({space!r}, L∞) is not supported")


def k_profile(f: StepFunction, space) -> PiecewiseLinear:
    """Profile ``t ↦ K(t, f; X, L∞)`` where ``X`` is ``space``.

    ``L1`` integrates ``f*``; ``Tilde(X)`` uses ``K(t, f; X̃, L∞) = K(t, f̃; X, L∞)``;
    ``Lambda(phi)`` minimises ``‖(f* - a)_+‖ + a t`` over the finitely many kink
    levels and returns the lower envelope of the resulting lines.
    """
    if isinstance(space, Tilde):
        return k_profile(majorant(f), space.inner)
    return _k_profile_of_nonincreasing(rearrangement(f), space)


def k_via_inf(f: StepFunction, t, space) -> Fraction:
    """``min_{a >= 0} ‖(f̃ - a)_+‖_X + a t``, i.e. ``K(t, f; X̃, L∞)``, for ``X`` in {L1, Λ_φ}."""
    t = Fraction(t)
    if t <= 0:
        raise ParameterError("t must be positive")
    if not (space == L1 or isinstance(space, Lambda)):
        raise ParameterError(f"unsupported space {space!r}")
    ft = majorant(f)
    best = None
    for a in _level_candidates(ft):
        value = norm(positive_part(ft, a), space) + a * t
        if best is None or value < best:
            best = value
    return best


def profile_dominance_witness(big: PiecewiseLinear, small: PiecewiseLinear):
    """Some ``t`` with ``small(t) > big(t)``, or ``None`` if ``small <= big`` everywhere."""
    ts = sorted(set(big.breakpoints()) | set(small.breakpoints()))
    for t in ts:
        if small(t) > big(t):
            return t
    if small.final_slope > big.final_slope:
        last = ts[-1]
        gap = big(last) - small(last)
        return last + 1 + gap / (small.final_slope - big.final_slope)
    return None


def k_dominance_witness(f: StepFunction, g: StepFunction, space):
    """Witness ``t`` for ``K(t, g) > K(t, f)`` in the couple ``(space, L∞)``, else ``None``."""
    return profile_dominance_witness(k_profile(f, space), k_profile(g, space))


def k_dominates(f: StepFunction, g: StepFunction, space) -> bool:
    """True iff ``K(t, g; X, L∞) <= K(t, f; X, L∞)`` for all ``t > 0``."""
    return k_dominance_witness(f, g, space) is None


def submajorizes_fn(f: StepFunction, g: StepFunction) -> bool:
    """Continuous submajorization ``g ≺ f``: ``∫_0^t g* <= ∫_0^t f*`` for all t."""
    return k_dominates(f, g, L1)
