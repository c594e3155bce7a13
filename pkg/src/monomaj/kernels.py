"""Piecewise-constant integral kernels and the operator constructions built from them.

Operators act on :class:`~monomaj.stepfn.StepFunction` values exactly. The
main constructions are

* :func:`simple_calderon_T`: a substochastic monotone ``T`` with ``T f = g``
  for nonincreasing ``g ≺ f``, assembled as averaging ∘ matrix ∘ averaging;
* :func:`majorant_S`: a chain ``M_v ∘ S ∘ sign(f)`` sending ``f`` to its
  nonincreasing majorant, with ``‖v‖_∞ <= q``;
* :func:`calderon_factorize`: ``H = W ∘ T ∘ (M_v S sign f)`` with ``H f = g``
  whenever ``K(t, g; L̃¹, L∞) <= K(t, f; L̃¹, L∞)``;
* :func:`dmitriev_D` / :func:`dmitriev_factorize`: the analogous map from
  ``(Λ_φ, L∞)`` into ``(L¹, L∞)``.

Chains list their primitives in application order (first applied first).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (
    DegenerateInputError,
    GridTooFineError,
    KDominanceError,
    MajorizationError,
    MonotonicityError,
    ParameterError,
    PreconditionError,
    RepresentationError,
    SupportError,
)
from .stepfn import (
    INF,
    L1,
    LINF,
    Lambda,
    PiecewiseLinear,
    StepFunction,
    Tilde,
    indicator,
    is_nonincreasing,
    k_profile,
    majorant,
    norm,
    profile_dominance_witness,
    submajorizes_fn,
    validate_gauge,
)
from .stochastic import RMatrix, hlp_monotone_substoch
from .vectors import RVector, first_prefix_violation

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_MAX_CELLS = 10**6
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 0


# --- kernels -----------------------------------------------------------------------


@dataclass(frozen=True)
class PCKernel:
    """``k(x, y) = cells[i][j]`` on ``[xbreaks[i], xbreaks[i+1]) × [ybreaks[j], ybreaks[j+1])``.

    The kernel vanishes outside the grid. ``xbreaks[-1]`` may be ``inf``, in
    which case the last row of cells covers an unbounded output interval.
    """

    xbreaks: Tuple
    ybreaks: Tuple[Fraction, ...]
    cells: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        xb = tuple(INF if x == INF else Fraction(x) for x in self.xbreaks)
        yb = tuple(Fraction(y) for y in self.ybreaks)
        cells = tuple(tuple(Fraction(c) for c in row) for row in self.cells)
        for name, br in (("x", xb), ("y", yb)):
            if len(br) < 2 or br[0] != 0 or any(s >= t for s, t in zip(br, br[1:])):
                raise RepresentationError(f"{name}-breakpoints must start at 0 and increase")
        if INF in xb[:-1]:
            raise RepresentationError("only the last x-breakpoint may be infinite")
        if len(cells) != len(xb) - 1 or any(len(row) != len(yb) - 1 for row in cells):
            raise RepresentationError("cell array does not match the grid")
        object.__setattr__(self, "xbreaks", xb)
        object.__setattr__(self, "ybreaks", yb)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def zero(cls) -> "PCKernel":
        return cls((ZERO, ONE), (ZERO, ONE), ((ZERO,),))

    @property
    def x_unbounded(self) -> bool:
        return self.xbreaks[-1] == INF

    def dx(self) -> List:
        return [INF if t == INF else t - s for s, t in zip(self.xbreaks, self.xbreaks[1:])]

    def dy(self) -> List[Fraction]:
        return [t - s for s, t in zip(self.ybreaks, self.ybreaks[1:])]

    def row_integrals(self) -> List[Fraction]:
        dy = self.dy()
        return [sum((abs(c) * w for c, w in zip(row, dy)), ZERO) for row in self.cells]

    def column_integrals(self) -> List:
        dx = self.dx()
        out = []
        for j in range(len(self.ybreaks) - 1):
            total = ZERO
            for i, w in enumerate(dx):
                c = abs(self.cells[i][j])
                if c == 0:
                    continue
                if w == INF:
                    total = INF
                    break
                total += c * w
            out.append(total)
        return out

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for row in self.cells for c in row)


def _cell_masses(f: StepFunction, ys: Sequence[Fraction]) -> List[Fraction]:
    """``∫ f`` over each cell ``[ys[j], ys[j+1])`` in one sweep."""
    cuts = sorted(set(ys) | {t for t in f.breaks if t < ys[-1]})
    masses = [ZERO] * (len(ys) - 1)
    j = 0
    for s, t in zip(cuts, cuts[1:]):
        while ys[j + 1] <= s:
            j += 1
        masses[j] += f(s) * (t - s)
    return masses


def apply_kernel(k: PCKernel, f: StepFunction) -> StepFunction:
    """``(K f)(x) = ∫ k(x, y) f(y) dy``."""
    masses = _cell_masses(f, k.ybreaks)
    rows = [sum((c * m for c, m in zip(row, masses)), ZERO) for row in k.cells]
    if k.x_unbounded:
        return StepFunction(k.xbreaks[:-1], rows[:-1], rows[-1])
    return StepFunction(k.xbreaks, rows, ZERO)


def kernel_norms(k: PCKernel) -> Tuple:
    """``(‖K‖_{L¹→L¹}, ‖K‖_{L∞→L∞})`` = (max column integral, max row integral) of ``|k|``."""
    return max(k.column_integrals()), max(k.row_integrals())


def is_monotone_kernel(k: PCKernel) -> bool:
    """``k >= 0`` and every cumulative row integral ``x ↦ ∫_0^Y k(x, y) dy`` is nonincreasing.

    Checking ``Y`` at the y-grid points is complete for piecewise-constant
    kernels; these are the images of the indicators ``χ_[0, Y)``.
    """
    if not k.is_nonnegative():
        return False
    dy = k.dy()
    prev = None
    for row in k.cells:
        acc, cum = ZERO, []
        for c, w in zip(row, dy):
            acc += c * w
            cum.append(acc)
        if prev is not None and any(x < y for x, y in zip(prev, cum)):
            return False
        prev = cum
    return True


def _refine_cells(k: PCKernel, xgrid: Sequence, ygrid: Sequence) -> List[List[Fraction]]:
    def locate(br, t):
        for i in range(len(br) - 1):
            if br[i] <= t < br[i + 1]:
                return i
        return None

    out = []
    for x in xgrid[:-1]:
        i = locate(k.xbreaks, x)
        row = []
        for y in ygrid[:-1]:
            j = locate(k.ybreaks, y)
            row.append(ZERO if i is None or j is None else k.cells[i][j])
        out.append(row)
    return out


def combine_kernels(weighted: Sequence[Tuple[Fraction, PCKernel]]) -> PCKernel:
    """Linear combination ``Σ w_i K_i`` on the common refinement of the grids."""
    xs = sorted({x for _, k in weighted for x in k.xbreaks})
    ys = sorted({y for _, k in weighted for y in k.ybreaks})
    total = [[ZERO] * (len(ys) - 1) for _ in range(len(xs) - 1)]
    for w, k in weighted:
        w = Fraction(w)
        for i, row in enumerate(_refine_cells(k, xs, ys)):
            for j, c in enumerate(row):
                total[i][j] += w * c
    return PCKernel(xs, ys, total)


# --- uniform grids: G, H and their sandwich ---------------------------------------------


@dataclass(frozen=True)
class UniformGrid:
    """Cells ``A_k = [(k-1) d, k d)`` for ``k = 1..n``."""

    d: Fraction
    n: int

    def __post_init__(self):
        object.__setattr__(self, "d", Fraction(self.d))
        if self.d <= 0 or self.n < 1:
            raise ParameterError("grid needs d > 0 and n >= 1")

    @property
    def points(self) -> List[Fraction]:
        return [k * self.d for k in range(self.n + 1)]


def averaging_G(grid: UniformGrid, f: StepFunction) -> RVector:
    """Cell averages ``(1/d) ∫_{A_k} f``."""
    pts = grid.points
    return tuple(f.integral(s, t) / grid.d for s, t in zip(pts, pts[1:]))


def expand_H(grid: UniformGrid, v: Sequence) -> StepFunction:
    """``Σ v_k χ_{A_k}``."""
    if len(v) != grid.n:
        raise ParameterError(f"vector length {len(v)} does not match {grid.n} cells")
    return StepFunction(grid.points, v, ZERO)


def flatten_HBG(grid: UniformGrid, b: RMatrix) -> PCKernel:
    """Kernel of ``H ∘ B ∘ G``: ``Σ_ij B_ij χ_{A_i}(x) χ_{A_j}(y) / d``."""
    if len(b) != grid.n:
        raise ParameterError("matrix size does not match the grid")
    pts = grid.points
    return PCKernel(pts, pts, [[x / grid.d for x in row] for row in b])


def uniform_grid_for(g: StepFunction, max_cells: int = DEFAULT_MAX_CELLS) -> UniformGrid:
    """Coarsest ``1/L`` grid (``L`` the lcm of breakpoint denominators) carrying ``g``.

    ``g`` must have bounded support. ``max_cells`` caps the number of kernel
    cells ``n²`` of the resulting sandwich kernel.
    """
    if g.tail != 0:
        raise SupportError("function must vanish eventually (zero tail)")
    if g.is_zero():
        return UniformGrid(ONE, 1)
    denom = reduce(lcm, (t.denominator for t in g.breaks), 1)
    d = Fraction(1, denom)
    n = g.last_break / d
    assert n.denominator == 1
    n = int(n)
    if n * n > max_cells:
        raise GridTooFineError(f"grid needs {n} cells ({n * n} kernel cells > {max_cells})")
    return UniformGrid(d, n)


# --- operator chains ----------------------------------------------------------------------


@dataclass(frozen=True)
class KernelOp:
    kernel: PCKernel

    def apply(self, f: StepFunction) -> StepFunction:
        return apply_kernel(self.kernel, f)


@dataclass(frozen=True)
class Multiply:
    symbol: StepFunction

    def apply(self, f: StepFunction) -> StepFunction:
        return self.symbol * f


@dataclass(frozen=True)
class SignFlip:
    pattern: StepFunction

    def __post_init__(self):
        p = self.pattern
        if any(abs(v) != 1 for v in p.values) or abs(p.tail) != 1:
            raise RepresentationError("sign pattern must take values ±1")

    def apply(self, f: StepFunction) -> StepFunction:
        return self.pattern * f


Primitive = Union[KernelOp, Multiply, SignFlip]


@dataclass(frozen=True)
class OperatorChain:
    primitives: Tuple[Primitive, ...]
    name: str = "chain"

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))

    def then(self, *more: Primitive, name: Optional[str] = None) -> "OperatorChain":
        return OperatorChain(self.primitives + tuple(more), name or self.name)

    def kernels(self) -> List[PCKernel]:
        return [p.kernel for p in self.primitives if isinstance(p, KernelOp)]


def apply(op, f: StepFunction) -> StepFunction:
    """Apply a kernel, a primitive or a chain to ``f``."""
    if isinstance(op, PCKernel):
        return apply_kernel(op, f)
    if isinstance(op, OperatorChain):
        for p in op.primitives:
            f = p.apply(f)
        return f
    return op.apply(f)


def sign_pattern(f: StepFunction) -> StepFunction:
    """``sign(f)`` with the convention ``sign(0) = 1``."""
    return f.map(lambda v: -ONE if v < 0 else ONE)


# --- certificates ----------------------------------------------------------------------


@dataclass(frozen=True)
class LTildeSample:
    """Largest observed ``‖Oh‖_{L̃¹} / ‖h‖_{L̃¹}`` over ``n`` seeded random ``h``."""

    bound: object
    n: int
    seed: int


@dataclass(frozen=True)
class CoupleCertificate:
    operator: str
    l1_bound: object
    linf_bound: object
    substochastic: bool
    monotone: bool
    ltilde_sample: Optional[LTildeSample] = None
    ltilde_certified: Optional[Fraction] = None


def _sup_abs(h: StepFunction):
    return norm(h, LINF)


def _mul(x, y):
    if x == 0 or y == 0:
        return ZERO
    return x * y


def _positive_nonincreasing(h: StepFunction) -> bool:
    return is_nonincreasing(h)


def _grid_extent(op) -> Fraction:
    pts = [ZERO]
    prims = op.primitives if isinstance(op, OperatorChain) else (op,)
    for p in prims:
        if isinstance(p, (PCKernel, KernelOp)):
            k = p if isinstance(p, PCKernel) else p.kernel
            pts += [t for t in k.xbreaks if t != INF] + list(k.ybreaks)
        else:
            sym = p.symbol if isinstance(p, Multiply) else p.pattern
            pts += list(sym.breaks)
    return max(pts)


def _sample_points(op) -> List[Fraction]:
    pts = set()
    prims = op.primitives if isinstance(op, OperatorChain) else (op,)
    for p in prims:
        if isinstance(p, (PCKernel, KernelOp)):
            k = p if isinstance(p, PCKernel) else p.kernel
            pts.update(t for t in k.xbreaks if t != INF)
            pts.update(k.ybreaks)
    return sorted(pts)


def random_step_function(
    rng: random.Random,
    extent,
    *,
    anchors: Sequence[Fraction] = (),
    max_pieces: int = 6,
    signed: bool = True,
    tail=0,
) -> StepFunction:
    """Random step function supported in ``[0, extent]`` (plus ``tail``).

    Breakpoints mix ``anchors`` (e.g. an operator's grid points) with random
    rationals so samples hit the cells an operator actually reads.
    """
    extent = Fraction(extent)
    count = rng.randint(1, max_pieces)
    pts = set()
    anchors = list(anchors)
    for _ in range(count):
        if anchors and rng.random() < 0.5:
            pts.add(rng.choice(anchors))
        else:
            pts.add(extent * Fraction(rng.randint(1, 48), 48))
    pts = sorted(p for p in pts if p > 0)
    if not pts:
        pts = [extent]
    breaks = [ZERO] + pts
    lo = -5 if signed else 0
    values = [Fraction(rng.randint(lo, 5), rng.randint(1, 4)) for _ in pts]
    return StepFunction(breaks, values, tail)


def sample_ltilde_ratio(op, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> LTildeSample:
    """Seeded estimate of ``sup ‖Oh‖_{L̃¹} / ‖h‖_{L̃¹}`` over random step ``h``."""
    rng = random.Random(seed)
    extent = _grid_extent(op) + 1
    anchors = _sample_points(op)
    worst = ZERO
    tilde_l1 = Tilde(L1)
    for _ in range(samples):
        h = random_step_function(rng, extent, anchors=anchors)
        denom = norm(h, tilde_l1)
        if denom == 0:
            continue
        ratio = norm(apply(op, h), tilde_l1)
        ratio = INF if ratio == INF else ratio / denom
        worst = max(worst, ratio)
    return LTildeSample(worst, samples, seed)


def certify(
    op,
    *,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    ltilde_certified: Optional[Fraction] = None,
) -> CoupleCertificate:
    """Exact L¹ and L∞ bounds of a chain (products of per-primitive norms) plus flags.

    ``substochastic`` means positive with both bounds ``<= 1``; ``monotone`` is
    the sufficient condition that every kernel is monotone, every multiplier is
    nonnegative and nonincreasing, and every sign pattern is trivial.
    """
    if isinstance(op, PCKernel):
        op = OperatorChain((KernelOp(op),), "kernel")
    elif not isinstance(op, OperatorChain):
        op = OperatorChain((op,), type(op).__name__)
    l1 = linf = ONE
    positive = monotone = True
    for p in op.primitives:
        if isinstance(p, KernelOp):
            a, b = kernel_norms(p.kernel)
            l1, linf = _mul(l1, a), _mul(linf, b)
            positive &= p.kernel.is_nonnegative()
            monotone &= is_monotone_kernel(p.kernel)
        else:
            sym = p.symbol if isinstance(p, Multiply) else p.pattern
            s = _sup_abs(sym)
            l1, linf = _mul(l1, s), _mul(linf, s)
            nonneg = all(v >= 0 for v in sym.values) and sym.tail >= 0
            positive &= nonneg
            monotone &= _positive_nonincreasing(sym)
    substochastic = positive and l1 <= 1 and linf <= 1
    sample = sample_ltilde_ratio(op, samples, seed) if samples else None
    return CoupleCertificate(op.name, l1, linf, substochastic, monotone, sample, ltilde_certified)


# --- Calderón's construction for simple g -------------------------------------------


def _require_nonincreasing_nonneg(name: str, h: StepFunction) -> None:
    if not is_nonincreasing(h):
        raise MonotonicityError(f"{name} must be nonnegative and nonincreasing")


def simple_calderon_T(
    f: StepFunction, g: StepFunction, *, max_cells: int = DEFAULT_MAX_CELLS
) -> PCKernel:
    """Substochastic monotone kernel ``T`` with ``T f = g``.

    ``f, g`` nonnegative nonincreasing, ``g`` of bounded support and ``g ≺ f``.
    On the uniform grid carrying ``g`` the cell averages satisfy
    ``G g ≺ G f``; a monotone substochastic matrix ``B`` with ``B G f = G g``
    gives ``T = H B G``.
    """
    _require_nonincreasing_nonneg("f", f)
    _require_nonincreasing_nonneg("g", g)
    if g.tail != 0:
        raise SupportError("g must have bounded support")
    if not submajorizes_fn(f, g):
        raise MajorizationError("g is not submajorized by f")
    grid = uniform_grid_for(g, max_cells)
    gf, gg = averaging_G(grid, f), averaging_G(grid, g)
    bad = first_prefix_violation(gf, gg)
    if bad is not None:  # cannot happen when g ≺ f; kept as a guard
        raise MajorizationError("averaged g is not submajorized", index=bad)
    b = hlp_monotone_substoch(gf, gg, max_dim=grid.n)
    return flatten_HBG(grid, b)


# --- the majorant operator ------------------------------------------------------------


@dataclass(frozen=True)
class Band:
    """``A_n = [start, end)`` where ``f̃`` takes values in ``(q^e, q^(e+1)]``."""

    exponent: int
    start: Fraction
    end: object  # Fraction or INF
    level: Fraction  # f̃ just left of ``end`` (the tail value for the unbounded band)
    selector: Tuple[Fraction, Fraction]  # the averaging set B_n = [lo, hi)


def _band_exponent(v: Fraction, q: Fraction) -> int:
    """Integer ``e`` with ``q^e < v <= q^(e+1)``."""
    e = math.floor(math.log(v) / math.log(q)) if v > 0 else 0
    while q**e >= v:
        e -= 1
    while q ** (e + 1) < v:
        e += 1
    return e


def majorant_bands(f: StepFunction, q, horizon=0) -> List[Band]:
    """Level bands of ``f̃`` and the set ``B_n`` averaged on each.

    For a bounded band, ``f̃`` drops below the band at ``end``, so ``|f|``
    equals the band's lowest level on a final stretch ``P`` ending at ``end``;
    ``B_n = P ∩ A_n``. For the unbounded band (nonzero tail) ``B`` is a unit
    interval inside the tail, starting no earlier than ``horizon``.
    """
    q = Fraction(q)
    ft = majorant(f)
    pieces = [(s, t, v) for s, t, v in ft.pieces() if v > 0]
    if ft.tail > 0:
        pieces.append((ft.last_break, INF, ft.tail))
    groups: List[Tuple[int, List[Tuple]]] = []
    for piece in pieces:
        e = _band_exponent(piece[2], q)
        if groups and groups[-1][0] == e:
            groups[-1][1].append(piece)
        else:
            groups.append((e, [piece]))
    bands = []
    fabs = abs(f)
    for e, members in groups:
        start, end, level = members[0][0], members[-1][1], members[-1][2]
        if end == INF:
            lo = max(f.last_break, Fraction(horizon))
            selector = (lo, lo + 1)
        else:
            lo = end
            for s, t, v in reversed(list(fabs.pieces())):
                if t > end:
                    continue
                if t == lo and v == level:
                    lo = s
                else:
                    break
            assert lo < end, "the level must be attained just left of the band end"
            selector = (max(lo, start), end)
        bands.append(Band(e, start, end, level, selector))
    return bands


def majorant_S(f: StepFunction, q, *, horizon=0) -> Tuple[OperatorChain, Fraction]:
    """Chain ``M_v ∘ S ∘ sign(f)`` with ``apply(chain, f) = majorant(f)``.

    ``S h = Σ_n avg_{B_n}(h) χ_{A_n}`` has ``‖S‖_{L∞→L∞} = 1`` and, band by
    band, ``∫_{A_n} (Sh)~ <= ∫_{A_n} h̃`` because each ``B_n`` is the right end
    of ``A_n``; hence the returned inflation ``q_eff`` is 1. The multiplier
    ``v = f̃ / level`` on each band has ``‖v‖_∞ <= q``.

    When ``f̃`` has a nonzero limit at infinity the unbounded band averages a
    unit interval starting at ``max(last break, horizon)``; the L̃¹ bound then
    holds for ``S h`` restricted to ``[0, horizon]``.
    """
    q = Fraction(q)
    if q <= 1:
        raise ParameterError("q must exceed 1")
    if f.is_zero():
        raise DegenerateInputError("the majorant operator is undefined for f = 0")
    bands = majorant_bands(f, q, horizon)
    ft = majorant(f)

    xbreaks = [b.start for b in bands] + [bands[-1].end]
    ys = sorted({y for b in bands for y in b.selector})
    cells = []
    for b in bands:
        lo, hi = b.selector
        w = 1 / (hi - lo)
        cells.append([w if lo <= y0 and y1 <= hi else ZERO for y0, y1 in zip(ys, ys[1:])])
    if ys[0] != 0:
        ys = [ZERO] + ys
        cells = [[ZERO] + row for row in cells]
    kernel = PCKernel(xbreaks, ys, cells)

    v = StepFunction.constant(0)
    for b in bands:
        v = v + indicator(b.start, b.end, 1) * ft * (1 / b.level)
    chain = OperatorChain(
        (SignFlip(sign_pattern(f)), KernelOp(kernel), Multiply(v)), name="majorant_S"
    )
    return chain, ONE


# --- the full factorization ---------------------------------------------------------------


def _quotient(g: StepFunction, gt: StepFunction) -> StepFunction:
    """``g / g̃`` with ``0/0 = 0``."""
    grid = sorted(set(g.breaks) | set(gt.breaks))
    vals = [ZERO if gt(t) == 0 else g(t) / gt(t) for t in grid[:-1]]
    tail = ZERO if gt.tail == 0 else g.tail / gt.tail
    return StepFunction(grid, vals, tail)


def calderon_factorize(
    f: StepFunction,
    g: StepFunction,
    q=2,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> Tuple[OperatorChain, CoupleCertificate]:
    """Operator ``H`` on ``(L̃¹, L∞)`` with ``H f = g``.

    ``H = W ∘ T ∘ (M_v S sign f)``: the majorant chain takes ``f`` to ``f̃``,
    :func:`simple_calderon_T` takes ``f̃`` to ``g̃`` and ``W`` multiplies by
    ``g / g̃``. Requires ``g̃`` of bounded support and
    ``∫_0^t g̃ <= ∫_0^t f̃`` for all ``t``.

    Raises:
        SupportError: ``g`` does not vanish eventually.
        KDominanceError: domination fails; ``witness`` holds a failing ``t``.
    """
    q = Fraction(q)
    gt = majorant(g)
    if gt.tail != 0:
        raise SupportError("g must vanish eventually")
    witness = profile_dominance_witness(k_profile(f, Tilde(L1)), k_profile(g, Tilde(L1)))
    if witness is not None:
        raise KDominanceError(f"K(t, g) > K(t, f) at t = {witness}", witness=witness)
    if f.is_zero():
        chain = OperatorChain((KernelOp(PCKernel.zero()),), name="calderon_H")
        return chain, certify(chain, samples=samples, seed=seed, ltilde_certified=ZERO)

    grid = uniform_grid_for(gt, max_cells)
    horizon = grid.n * grid.d
    s_chain, q_eff = majorant_S(f, q, horizon=horizon)
    t_kernel = simple_calderon_T(majorant(f), gt, max_cells=max_cells)
    w = _quotient(g, gt)
    chain = OperatorChain(
        s_chain.primitives + (KernelOp(t_kernel), Multiply(w)), name="calderon_H"
    )
    out = apply(chain, f)
    if out != g:  # pragma: no cover - would be a bug in the construction
        raise AssertionError("factorization failed to reproduce g")
    v = s_chain.primitives[2].symbol
    bound = q_eff * max(ONE, norm(v, LINF))
    return chain, certify(chain, samples=samples, seed=seed, ltilde_certified=bound)


# --- Lorentz to L¹ ----------------------------------------------------------------------


def dmitriev_D(phi: PiecewiseLinear, d, n: int) -> PCKernel:
    """``D h = Σ_k (1/d) ∫_{φ⁻¹((k-1)d)}^{φ⁻¹(kd)} h dφ · χ_{[(k-1)d, kd)}``.

    Positive and monotone, with ``‖Dh‖_{L¹} <= ‖h‖_{Λ_φ}`` and ``‖Dh‖_∞ <= ‖h‖_∞``.
    """
    validate_gauge(phi)
    d = Fraction(d)
    if d <= 0 or n < 1:
        raise ParameterError("need d > 0 and n >= 1")
    cuts = [phi.inverse(k * d) for k in range(n + 1)]
    ys = sorted(set(cuts) | {t for t in phi.breakpoints() if t < cuts[-1]})
    cells = []
    for k in range(n):
        lo, hi = cuts[k], cuts[k + 1]
        row = []
        for y0, y1 in zip(ys, ys[1:]):
            if lo <= y0 and y1 <= hi:
                row.append((phi(y1) - phi(y0)) / (y1 - y0) / d)
            else:
                row.append(ZERO)
        cells.append(row)
    return PCKernel([k * d for k in range(n + 1)], ys, cells)


def dmitriev_factorize(
    f: StepFunction,
    g: StepFunction,
    phi: PiecewiseLinear,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> OperatorChain:
    """Monotone ``S = T ∘ D`` with ``S f = g`` for ``K(t, g; L¹, L∞) <= K(t, f; Λ_φ, L∞)``.

    ``D`` pushes ``f`` onto the grid of ``g``; then ``g ≺ D f`` and
    :func:`simple_calderon_T` finishes.
    """
    validate_gauge(phi)
    _require_nonincreasing_nonneg("f", f)
    _require_nonincreasing_nonneg("g", g)
    if g.tail != 0:
        raise SupportError("g must have bounded support")
    witness = profile_dominance_witness(k_profile(f, Lambda(phi)), k_profile(g, L1))
    if witness is not None:
        raise KDominanceError(f"K(t, g) > K(t, f) at t = {witness}", witness=witness)
    grid = uniform_grid_for(g, max_cells)
    dk = dmitriev_D(phi, grid.d, grid.n)
    df = apply_kernel(dk, f)
    if not submajorizes_fn(df, g):  # guaranteed by domination; kept as a guard
        raise PreconditionError("g is not submajorized by D f")
    tk = simple_calderon_T(df, g, max_cells=max_cells)
    return OperatorChain((KernelOp(dk), KernelOp(tk)), name="dmitriev_S")


# --- monotone operators on tilde spaces ------------------------------------------------------


def monotone_lemma_check(k: PCKernel, f: StepFunction, *, require_monotone: bool = True) -> bool:
    """Pointwise ``majorant(K f) <= K(majorant(f))``.

    Holds for every monotone kernel; pass ``require_monotone=False`` to probe
    kernels that are not (the inequality can then fail).
    """
    if require_monotone and not is_monotone_kernel(k):
        raise MonotonicityError("kernel is not monotone")
    return majorant(apply_kernel(k, f)).le(apply_kernel(k, majorant(f)))
