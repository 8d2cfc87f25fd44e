"""Density machinery: binary entropy, binomial tail sums, and arithmetic replicas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import exp2_cmp
from .signatures import (
    DEFAULT_CAP,
    EmbeddingWitness,
    binomial_prefix_sum,
    empty_witness,
    extract_replica,
    levels_of,
    mask_of,
    signature_set,
)
from .tree import TreeSubset

INV_ENTROPY_TOL = 1e-12
FLOAT_MARGIN = 1e-9


def binary_entropy(eps: float) -> float:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"entropy argument must lie in [0, 1], got {eps}")
    if eps in (0.0, 1.0):
        return 0.0
    return -eps * math.log2(eps) - (1.0 - eps) * math.log2(1.0 - eps)


def inv_entropy(delta: float) -> float:
    """The unique ``eps`` in ``(0, 1/2]`` with ``binary_entropy(eps) == delta``, by bisection."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"inverse entropy needs delta in (0, 1], got {delta}")
    if delta == 1.0:
        # h is flat enough near 1/2 that floats round h(1/2 - 1e-9) up to 1
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > INV_ENTROPY_TOL:
        mid = (lo + hi) / 2
        if binary_entropy(mid) < delta:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class ChernoffResult:
    n: int
    d: int
    total: int
    bound_log2: float
    holds: bool


def chernoff_check(n: int, eps: float) -> ChernoffResult:
    """Compare ``sum(C(n, i) for i < ceil(eps*n))`` with ``2**(h(eps)*n)``.

    The sum is exact. The comparison uses floating point when the margin is
    clear and falls back to an exact test against the float exponent otherwise.
    """
    if n < 1 or not 0.0 < eps < 0.5:
        raise ValueError("need n >= 1 and 0 < eps < 1/2")
    d = math.ceil(eps * n)
    total = binomial_prefix_sum(n, d)
    bound = binary_entropy(eps) * n
    margin = bound - math.log2(total)
    if abs(margin) > FLOAT_MARGIN * max(1.0, bound):
        holds = margin > 0
    else:
        holds = exp2_cmp(Fraction(bound), total) > 0
    return ChernoffResult(n, d, total, bound, holds)


@dataclass(frozen=True)
class ArithmeticProgression:
    a: int
    b: int
    length: int

    def terms(self) -> list[int]:
        return [self.a + i * self.b for i in range(self.length)]

    @property
    def mask(self) -> int:
        return mask_of(self.terms())


def longest_ap(levels) -> ArithmeticProgression:
    """Longest arithmetic progression inside a set of integers.

    Ties go to the smallest difference, then the smallest start.
    """
    xs = sorted(set(levels))
    if not xs:
        raise ValueError("longest_ap needs a nonempty set")
    best = ArithmeticProgression(xs[0], 0, 1)
    # run[j][b]: length of the longest progression with difference b ending at xs[j]
    run: list[dict[int, int]] = [dict() for _ in xs]
    for j, xj in enumerate(xs):
        for i in range(j):
            b = xj - xs[i]
            length = run[i].get(b, 1) + 1
            run[j][b] = length
            cand = ArithmeticProgression(xj - (length - 1) * b, b, length)
            if (-length, b, cand.a) < (-best.length, best.b, best.a):
                best = cand
    return best


def find_ap(levels, length: int) -> ArithmeticProgression | None:
    """An ``length``-term progression inside ``levels`` (smallest difference, then start)."""
    if length < 1:
        raise ValueError("length must be positive")
    xs = sorted(set(levels))
    present = set(xs)
    if length == 1:
        return ArithmeticProgression(xs[0], 0, 1) if xs else None
    span = xs[-1] - xs[0] if xs else 0
    for b in range(1, span // (length - 1) + 1):
        for a in xs:
            if all(a + i * b in present for i in range(1, length)):
                return ArithmeticProgression(a, b, length)
    return None


def restrict_replica(w: EmbeddingWitness, sub: int) -> EmbeddingWitness:
    """Restrict a regular embedding to the sub-signature ``sub``.

    Keeps the T_d levels occupying ``sub``. Each kept vertex's left/right
    child is replaced by the leftmost descendant of its left/right child on
    the next kept level, so distinct child subtrees are preserved.
    """
    if sub & ~w.signature:
        raise ValueError(f"{levels_of(sub)} is not a subset of {levels_of(w.signature)}")
    if sub == 0:
        return empty_witness(w.n)
    source_levels = levels_of(w.signature)
    kept = [source_levels.index(l) for l in levels_of(sub)]
    m = len(kept)
    chosen = [0] * ((1 << m) - 1)  # T_m vertex -> T_d vertex
    chosen[0] = 1 << kept[0]
    for y in range(1, 1 << (m - 1)):
        j = y.bit_length() - 1
        x = chosen[y - 1]
        gap = kept[j + 1] - kept[j] - 1
        chosen[2 * y - 1] = (2 * x) << gap
        chosen[2 * y] = (2 * x + 1) << gap
    mapping = tuple(w.image(x) for x in chosen)
    return EmbeddingWitness(m, w.n, mapping, sub)


def arithmetic_replica(H: TreeSubset, l: int, cap: int = DEFAULT_CAP) -> EmbeddingWitness | None:
    """A replica of T_l in ``H`` whose levels form an arithmetic progression.

    Scans ``S(H)`` from the largest signatures down, takes the first one that
    contains an ``l``-term progression, extracts a witness for it and restricts
    that witness to the progression.
    """
    if l < 1:
        raise ValueError("l must be positive")
    family = signature_set(H, cap)
    for sigma in family.by_decreasing_size():
        if sigma.bit_count() < l:
            break
        ap = find_ap(levels_of(sigma), l)
        if ap is not None:
            return restrict_replica(extract_replica(H, sigma, cap), ap.mask)
    return None


def theorem_b_depth(n: int, delta: float) -> int:
    """Replica depth ``floor(h^{-1}(delta) * n)`` guaranteed for sets of weight ``delta * n``."""
    return math.floor(inv_entropy(delta) * n)
