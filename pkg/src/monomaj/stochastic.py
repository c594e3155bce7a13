"""Doubly stochastic, substochastic and monotone matrices.

The constructive part builds, for nonincreasing ``0 <= b ⪯ a``, a doubly
stochastic monotone ``A`` with ``A a = b`` by repeated head reductions, and
for ``b ≺ a`` a block-diagonal substochastic monotone matrix. A reconstructed
"pushing mass" trace is included for comparison only; it is not used by any
certified construction.

Matrices are tuples of row tuples of :class:`~fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Iterable, List, NamedTuple, Sequence, Tuple

from .errors import (
    DimensionError,
    InfeasibleHeadError,
    MajorizationError,
    NonterminationError,
    PreconditionError,
)
from .vectors import RVector, first_prefix_violation, is_nonincreasing, vector

RMatrix = Tuple[Tuple[Fraction, ...], ...]

DEFAULT_MAX_DIM = 512

ZERO = Fraction(0)
ONE = Fraction(1)


def matrix(rows: Iterable[Iterable]) -> RMatrix:
    out = tuple(tuple(Fraction(x) for x in row) for row in rows)
    if not out or any(len(row) != len(out) for row in out):
        raise DimensionError("matrices must be square and nonempty")
    return out


def identity(n: int) -> RMatrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))


def zeros(n: int) -> RMatrix:
    return tuple((ZERO,) * n for _ in range(n))


def matvec(m: RMatrix, a: Sequence) -> RVector:
    if len(m) != len(a):
        raise DimensionError(f"matrix of size {len(m)} applied to vector of length {len(a)}")
    return tuple(sum((x * y for x, y in zip(row, a)), ZERO) for row in m)


def matmul(m1: RMatrix, m2: RMatrix) -> RMatrix:
    if len(m1) != len(m2):
        raise DimensionError("size mismatch")
    cols = list(zip(*m2))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), ZERO) for col in cols) for row in m1)


def scale(c, m: RMatrix) -> RMatrix:
    c = Fraction(c)
    return tuple(tuple(c * x for x in row) for row in m)


def block_diag(blocks: Sequence[RMatrix]) -> RMatrix:
    n = sum(len(b) for b in blocks)
    rows: List[Tuple[Fraction, ...]] = []
    offset = 0
    for b in blocks:
        k = len(b)
        for row in b:
            rows.append((ZERO,) * offset + tuple(row) + (ZERO,) * (n - offset - k))
        offset += k
    return tuple(rows)


# --- predicates ---------------------------------------------------------------


def _sums(m: RMatrix):
    return [sum(row, ZERO) for row in m], [sum(col, ZERO) for col in zip(*m)]


def is_doubly_stochastic(m: RMatrix) -> bool:
    if any(x < 0 for row in m for x in row):
        return False
    rows, cols = _sums(m)
    return all(s == 1 for s in rows) and all(s == 1 for s in cols)


def is_substochastic(m: RMatrix) -> bool:
    if any(x < 0 for row in m for x in row):
        return False
    rows, cols = _sums(m)
    return all(s <= 1 for s in rows) and all(s <= 1 for s in cols)


def is_monotone_matrix(m: RMatrix) -> bool:
    """Row-prefix criterion: every prefix sum of row i dominates that of row i+1."""
    if any(x < 0 for row in m for x in row):
        return False
    prefixes = [list(accumulate(row)) for row in m]
    return all(
        x >= y for upper, lower in zip(prefixes, prefixes[1:]) for x, y in zip(upper, lower)
    )


# --- head reduction -------------------------------------------------------------


def _head_parameters(a: RVector, b1: Fraction) -> Tuple[int, Fraction]:
    """Return (k, gamma) for the head reduction of nonincreasing ``a`` towards ``b1``."""
    if b1 >= a[0]:
        raise PreconditionError(f"head value {b1} must be < a_1 = {a[0]}")
    if b1 < 0:
        raise PreconditionError("head value must be nonnegative")
    total = ZERO
    for k, x in enumerate(a, start=1):
        prev_total = total
        total += x
        if total <= k * b1:
            # k >= 2 because a_1 > b1
            c = prev_total / (k - 1)
            gamma = (b1 - x) / (c - x)
            return k, gamma
    raise InfeasibleHeadError(
        f"mean of a is {total / len(a)} > {b1}: no block length reaches the head value"
    )


def head_matrix(n: int, k: int, gamma: Fraction) -> RMatrix:
    """The n x n doubly stochastic monotone matrix of a head reduction with block k."""
    w = gamma / (k - 1)
    r = 1 - gamma
    sigma = 1 - (k - 1) * r
    rows = []
    for i in range(n):
        if i < k - 1:
            row = [w] * (k - 1) + [r] + [ZERO] * (n - k)
        elif i == k - 1:
            row = [r] * (k - 1) + [sigma] + [ZERO] * (n - k)
        else:
            row = [ZERO] * n
            row[i] = ONE
        rows.append(tuple(row))
    return tuple(rows)


def hlp_reduce_head(a: Iterable, b1) -> Tuple[int, Fraction, RMatrix]:
    """One head reduction: a monotone doubly stochastic ``A'`` with ``[A'a]_1 = b1``.

    ``k`` is the first index whose prefix mean of ``a`` drops to ``b1`` or below;
    ``gamma`` solves ``gamma * mean(a[:k-1]) + (1 - gamma) * a_k = b1``.

    Raises:
        PreconditionError: ``b1 >= a_1``.
        InfeasibleHeadError: the overall mean of ``a`` exceeds ``b1``.
    """
    a = vector(a)
    b1 = Fraction(b1)
    k, gamma = _head_parameters(a, b1)
    return k, gamma, head_matrix(len(a), k, gamma)


def _apply_head_in_place(rows: List[List[Fraction]], s: int, k: int, gamma: Fraction) -> None:
    """Left-multiply rows[s:s+k] by the k x k head block (other rows untouched)."""
    w = gamma / (k - 1)
    r = 1 - gamma
    sigma = 1 - (k - 1) * r
    last = rows[s + k - 1]
    summed = [sum(col, ZERO) for col in zip(*rows[s : s + k - 1])]
    upper = [w * x + r * y for x, y in zip(summed, last)]
    rows[s + k - 1] = [r * x + sigma * y for x, y in zip(summed, last)]
    for i in range(s, s + k - 1):
        rows[i] = list(upper)


def _check_pair(a: RVector, b: RVector) -> None:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    for name, v in (("a", a), ("b", b)):
        if any(x < 0 for x in v):
            raise PreconditionError(f"{name} must be nonnegative")
        if not is_nonincreasing(v):
            raise PreconditionError(f"{name} must be nonincreasing")


@dataclass(frozen=True)
class HLPConstruction:
    """A doubly stochastic monotone matrix together with how it was obtained."""

    matrix: RMatrix
    head_reductions: int


def hlp_construct(a: Iterable, b: Iterable, *, max_dim: int = DEFAULT_MAX_DIM) -> HLPConstruction:
    """Build ``A`` with ``A a = b`` for nonincreasing ``0 <= b ⪯ a``.

    Walks the coordinates left to right. Where the current image already agrees
    with ``b`` the coordinate is frozen; otherwise one head reduction on the
    remaining tail sets it, and the reduction is composed on the left.
    """
    a, b = vector(a), vector(b)
    _check_pair(a, b)
    n = len(a)
    if n > max_dim:
        raise DimensionError(f"dimension {n} exceeds cap {max_dim}")
    bad = first_prefix_violation(a, b)
    if bad is None and sum(a) != sum(b):
        bad = n
    if bad is not None:
        raise MajorizationError(f"b is not majorized by a (prefix {bad})", index=bad)

    rows = [list(row) for row in identity(n)]
    current = [[x] for x in a]  # column vector, updated with the same row operations
    reductions = 0
    for s in range(n):
        if current[s][0] == b[s]:
            continue
        k, gamma = _head_parameters(tuple(x[0] for x in current[s:]), b[s])
        _apply_head_in_place(rows, s, k, gamma)
        _apply_head_in_place(current, s, k, gamma)
        reductions += 1
    result = tuple(tuple(row) for row in rows)
    assert tuple(x[0] for x in current) == b
    return HLPConstruction(result, reductions)


def hlp_monotone_ds(a: Iterable, b: Iterable, *, max_dim: int = DEFAULT_MAX_DIM) -> RMatrix:
    """Doubly stochastic monotone ``A`` with ``A a = b`` (requires ``b ⪯ a``)."""
    return hlp_construct(a, b, max_dim=max_dim).matrix


# --- substochastic case -----------------------------------------------------------


class Block(NamedTuple):
    end: int  # 1-based inclusive end index i_j
    delta: Fraction


BlockPlan = Tuple[Block, ...]


def block_partition(a: Iterable, b: Iterable) -> BlockPlan:
    """Split ``(0, n]`` into blocks on which ``b ⪯ delta_j * a`` holds exactly.

    Each block starting after ``i`` takes ``delta`` as the largest window ratio
    ``sum(b[i:k]) / sum(a[i:k])`` and ends at the largest ``k`` attaining it.
    A suffix where ``a`` vanishes becomes a final block with ``delta = 0``.
    """
    a, b = vector(a), vector(b)
    _check_pair(a, b)
    n = len(a)
    bad = first_prefix_violation(a, b)
    if bad is not None:
        raise MajorizationError(f"b is not submajorized by a (prefix {bad})", index=bad)
    plan: List[Block] = []
    start = 0
    while start < n:
        if a[start] == 0:
            if any(b[start:]):
                raise MajorizationError(
                    f"b has mass where a vanishes (from index {start + 1})", index=start + 1
                )
            plan.append(Block(n, ZERO))
            break
        best, end = None, start
        sa = sb = ZERO
        for k in range(start, n):
            sa += a[k]
            sb += b[k]
            ratio = sb / sa
            if best is None or ratio >= best:
                best, end = ratio, k + 1
        if best > 1:
            raise MajorizationError("window ratio exceeds 1", index=end)
        plan.append(Block(end, best))
        start = end
    return tuple(plan)


def hlp_monotone_substoch(a: Iterable, b: Iterable, *, max_dim: int = DEFAULT_MAX_DIM) -> RMatrix:
    """Substochastic monotone ``A`` with ``A a = b`` for nonincreasing ``0 <= b ≺ a``."""
    a, b = vector(a), vector(b)
    if len(a) > max_dim:
        raise DimensionError(f"dimension {len(a)} exceeds cap {max_dim}")
    plan = block_partition(a, b)
    blocks = []
    start = 0
    for end, delta in plan:
        size = end - start
        if delta == 0:
            blocks.append(zeros(size))
        else:
            inner = hlp_monotone_ds([delta * x for x in a[start:end]], b[start:end], max_dim=max_dim)
            blocks.append(scale(delta, inner))
        start = end
    return block_diag(blocks)


# --- pushing mass (reconstructed, comparison only) --------------------------------


def pushing_mass_trace(f: Iterable, g: Iterable, *, max_steps: int | None = None) -> List[RVector]:
    """Reconstructed "pushing mass" sequence from ``g`` down to ``f``.

    Step rule: at the first index ``j`` where the current vector ``c`` differs
    from ``f``, take the maximal constant block ``c[j..m]``, lower it to
    ``max(f_j, mean(c[j..m+1]))`` and hand the released mass to ``c[m+1]``. If
    the block reaches the last coordinate the released mass is dropped. Stops
    when ``c == f`` or when no step applies (``c_j < f_j``).

    The rule is inferred from two reference traces; it is a benchmark for
    counting steps, not a certified construction.
    """
    f, g = vector(f), vector(g)
    _check_pair(g, f)
    bad = first_prefix_violation(g, f)
    if bad is not None:
        raise MajorizationError(f"f is not submajorized by g (prefix {bad})", index=bad)
    n = len(f)
    cap = max_steps if max_steps is not None else 4 * n * n + 16
    c = list(g)
    steps: List[RVector] = []
    while True:
        j = next((i for i in range(n) if c[i] != f[i]), None)
        if j is None or c[j] < f[j]:
            return steps
        if len(steps) >= cap:
            raise NonterminationError(f"pushing mass exceeded {cap} steps")
        m = j
        while m + 1 < n and c[m + 1] == c[j]:
            m += 1
        width = m - j + 1
        if m + 1 < n:
            window = sum(c[j : m + 2], ZERO)
            v = max(f[j], window / (width + 1))
            c[j : m + 1] = [v] * width
            c[m + 1] = window - v * width
        else:
            c[j:] = [f[j]] * width
        steps.append(tuple(c))
