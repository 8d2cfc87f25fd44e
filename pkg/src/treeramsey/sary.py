"""s-ary trees T_{n,s}, weighted signature counts, and the reduction from
general bounded-arity trees to subsets of the binary tree T_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb
from pathlib import Path

import numpy as np

from .exact import pow_cmp
from .signatures import EmbeddingWitness, SignatureFamily, _reverse_table
from .tree import ResourceLimitError, TreeSubset, set_weight

STORAGE_CAP = 1 << 22


class TreeValidationError(ValueError):
    pass


def _level_start(s: int, l: int) -> int:
    return (s**l - 1) // (s - 1)


@dataclass(frozen=True)
class SaryTreeSubset:
    """Subset of T_{n,s}; vertices are 0-based with children ``s*v + 1 .. s*v + s``."""

    n: int
    s: int
    bits: int = 0

    def __post_init__(self) -> None:
        if self.s < 2 or self.n < 0:
            raise ValueError("need s >= 2 and n >= 0")
        if self.s**self.n > STORAGE_CAP:
            raise ResourceLimitError(f"s**n = {self.s}**{self.n} exceeds {STORAGE_CAP}")
        if self.bits < 0 or self.bits >> self.size:
            raise ValueError("bitset has members outside the tree")

    @property
    def size(self) -> int:
        return _level_start(self.s, self.n)

    @classmethod
    def from_mask(cls, n: int, s: int, mask: np.ndarray) -> SaryTreeSubset:
        packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little").tobytes()
        return cls(n, s, int.from_bytes(packed, "little"))

    @classmethod
    def full(cls, n: int, s: int) -> SaryTreeSubset:
        return cls(n, s, (1 << _level_start(s, n)) - 1)

    @classmethod
    def random(cls, n: int, s: int, p: float, gen: np.random.Generator) -> SaryTreeSubset:
        return cls.from_mask(n, s, gen.random(_level_start(s, n)) < p)

    @cached_property
    def mask(self) -> np.ndarray:
        raw = self.bits.to_bytes((self.size + 7) // 8, "little")
        out = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: self.size]
        return out.astype(bool)

    def __contains__(self, v: int) -> bool:
        return v >= 0 and bool((self.bits >> v) & 1)

    def level_of(self, v: int) -> int:
        l = 0
        while _level_start(self.s, l + 1) <= v:
            l += 1
        return l


def sary_weight(H: SaryTreeSubset) -> Fraction:
    total = Fraction(0)
    for l in range(H.n):
        lo, hi = _level_start(H.s, l), _level_start(H.s, l + 1)
        count = int(np.count_nonzero(H.mask[lo:hi]))
        total += Fraction(count, H.s**l)
    return total


def sary_signature_set(H: SaryTreeSubset) -> SignatureFamily:
    """Signatures of regular s-ary embeddings into ``H``.

    At a member vertex on level ``lam`` a signature ``sigma`` lifts to
    ``sigma + {lam}`` when every one of the ``s`` child subtrees realises it.
    Uses the same reversed-level indicator layout as the binary DP.
    """
    n, s = H.n, H.s
    if n == 0:
        return SignatureFamily(0, frozenset([0]))
    member = H.mask
    below = np.ones((s**n, 1), dtype=bool)
    for lam in range(n - 1, -1, -1):
        grouped = below.reshape(s**lam, s, -1)
        inh = member[_level_start(s, lam) : _level_start(s, lam + 1), None]
        below = np.concatenate([grouped.any(axis=1), grouped.all(axis=1) & inh], axis=1)
    hits = np.flatnonzero(below[0])
    return SignatureFamily(n, frozenset(_reverse_table(n)[hits].tolist()))


def weighted_signature_count(S: SignatureFamily, s: int) -> Fraction:
    """Exact ``sum((s - 1) ** -|sigma|)`` over the family."""
    if s < 2:
        raise ValueError("s must be at least 2")
    return sum((Fraction(1, (s - 1) ** m.bit_count()) for m in S.masks), Fraction(0))


def theorem1prime_rhs(n: int, d: int, s: int) -> Fraction:
    return sum((Fraction(comb(n, i), (s - 1) ** i) for i in range(d)), Fraction(0))


def theorem1prime_check(n: int, d: int, s: int, w: Fraction) -> bool:
    """Exact test of ``(s/(s-1))**w > sum(C(n, i) / (s-1)**i for i < d)``."""
    if d < 1 or s < 2:
        raise ValueError("need d >= 1 and s >= 2")
    return pow_cmp(Fraction(s, s - 1), Fraction(w), theorem1prime_rhs(n, d, s)) > 0


# --- general trees ---------------------------------------------------------


@dataclass(frozen=True)
class GeneralTree:
    """Rooted tree in breadth-first order; vertex 0 is the root.

    ``n`` is the depth in the T_n sense: levels run ``0 .. n-1`` and every
    leaf sits on level ``n - 1``.
    """

    s: int
    n: int
    children: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.s < 1 or self.n < 1:
            raise TreeValidationError("need s >= 1 and n >= 1")
        if not self.children:
            raise TreeValidationError("tree has no vertices")
        seen = [False] * len(self.children)
        seen[0] = True
        for v, kids in enumerate(self.children):
            if len(kids) > self.s:
                raise TreeValidationError(f"vertex {v} has {len(kids)} > {self.s} children")
            for c in kids:
                if not 0 < c < len(self.children) or seen[c] or c <= v:
                    raise TreeValidationError(f"bad child {c} of vertex {v}")
                seen[c] = True
        if not all(seen):
            raise TreeValidationError("some vertices are unreachable")
        for v, l in enumerate(self.levels):
            if not self.children[v] and l != self.n - 1:
                raise TreeValidationError(f"leaf {v} is on level {l}, expected {self.n - 1}")
            if l > self.n - 1:
                raise TreeValidationError(f"vertex {v} is below level {self.n - 1}")

    @cached_property
    def parents(self) -> list[int]:
        parent = [-1] * len(self.children)
        for v, kids in enumerate(self.children):
            for c in kids:
                parent[c] = v
        return parent

    @cached_property
    def levels(self) -> list[int]:
        level = [0] * len(self.children)
        for v, kids in enumerate(self.children):
            for c in kids:
                level[c] = level[v] + 1
        return level

    @cached_property
    def leaf_counts(self) -> list[int]:
        counts = [0] * len(self.children)
        for v in range(len(self.children) - 1, -1, -1):
            kids = self.children[v]
            counts[v] = sum(counts[c] for c in kids) if kids else 1
        return counts

    @property
    def leaf_count(self) -> int:
        return self.leaf_counts[0]

    def ancestor_at(self, v: int, level: int) -> int:
        while self.levels[v] > level:
            v = self.parents[v]
        return v

    def to_text(self) -> str:
        lines = [f"s={self.s} n={self.n}"]
        lines += [f"{v}: " + " ".join(map(str, kids)) for v, kids in enumerate(self.children)]
        return "\n".join(line.rstrip() for line in lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> GeneralTree:
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        try:
            head = dict(part.split("=") for part in lines[0].split())
            s, n = int(head["s"]), int(head["n"])
            children = []
            for expected, ln in enumerate(lines[1:]):
                idx, _, rest = ln.partition(":")
                if int(idx) != expected:
                    raise ValueError(f"vertex lines must be in order, got {idx}")
                children.append(tuple(int(t) for t in rest.replace(",", " ").split()))
        except (KeyError, IndexError, ValueError) as exc:
            raise TreeValidationError(f"malformed tree file: {exc}") from None
        return cls(s, n, tuple(children))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> GeneralTree:
        return cls.from_text(Path(path).read_text())


def tree_from_levels(s: int, n: int, child_counts) -> GeneralTree:
    """Build a breadth-first tree from per-vertex child counts (consumed in order)."""
    counts = iter(child_counts)
    children: list[tuple[int, ...]] = []
    frontier, levels, next_id = [0], {0: 0}, 1
    while frontier:
        new_frontier = []
        for v in frontier:
            k = next(counts) if levels[v] < n - 1 else 0
            kids = tuple(range(next_id, next_id + k))
            next_id += k
            children.append(kids)
            for c in kids:
                levels[c] = levels[v] + 1
            new_frontier.extend(kids)
        frontier = new_frontier
    return GeneralTree(s, n, tuple(children))


def random_general_tree(s: int, n: int, gen: np.random.Generator) -> GeneralTree:
    """Random tree with 1..s children (uniform) at every internal vertex."""
    budget = [int(x) for x in gen.integers(1, s + 1, size=_level_start(s, n))]
    return tree_from_levels(s, n, budget)


def full_tree(s: int, n: int) -> GeneralTree:
    return tree_from_levels(s, n, [s] * _level_start(s, n))


@dataclass(frozen=True)
class GMapResult:
    g: tuple[int, ...]  # g[v - 1] is the image of heap vertex v of T_n
    H: TreeSubset

    def image(self, v: int) -> int:
        return self.g[v - 1]


def gmap_build(T: GeneralTree) -> GMapResult:
    """Level-preserving map from T_n into ``T`` that follows the two heaviest children.

    The two children of a heap vertex go to the two children of its image with
    the most leaf descendants (ties to the smaller index; the left child takes
    the smaller index of the pair), or both to the only child. ``H`` holds the
    heap vertices whose image has zero or at least two children.
    """
    n = T.n
    leaves = T.leaf_counts
    follow = []
    for kids in T.children:
        if len(kids) >= 2:
            top = sorted(kids, key=lambda c: (-leaves[c], c))[:2]
            follow.append(tuple(sorted(top)))
        elif kids:
            follow.append((kids[0], kids[0]))
        else:
            follow.append(())
    g = [0] * ((1 << n) - 1)
    for v in range(2, 1 << n):
        g[v - 1] = follow[g[v // 2 - 1]][v & 1]
    member = np.array([len(T.children[u]) != 1 for u in g], dtype=bool)
    return GMapResult(tuple(g), TreeSubset.from_mask(member))


def leafbound_check(T: GeneralTree, result: GMapResult, s: int) -> bool:
    """Exact test of ``leaves(T) <= s ** (w(H) - 1)``."""
    w = set_weight(result.H).fraction
    return pow_cmp(Fraction(s), w - 1, T.leaf_count) >= 0


def leafbound_slack(T: GeneralTree, result: GMapResult, s: int) -> float:
    """``(w(H) - 1) * log2(s) - log2(leaves)``; negative means the bound fails."""
    return (float(set_weight(result.H).fraction) - 1) * np.log2(s) - np.log2(T.leaf_count)


@dataclass(frozen=True)
class GeneralEmbedding:
    d: int
    mapping: tuple[int, ...]  # mapping[x - 1] is a vertex of the general tree


def transport(w: EmbeddingWitness, result: GMapResult) -> GeneralEmbedding:
    return GeneralEmbedding(w.d, tuple(result.image(v) for v in w.mapping))


def is_general_embedding(T: GeneralTree, e: GeneralEmbedding) -> bool:
    """Regular-embedding test of a heap-indexed T_d map into a general tree."""
    if len(e.mapping) != (1 << e.d) - 1:
        return False
    if any(not 0 <= u < len(T.children) for u in e.mapping):
        return False
    for j in range(e.d):
        if len({T.levels[e.mapping[x - 1]] for x in range(1 << j, 1 << (j + 1))}) != 1:
            return False
    for x in range(1, 1 << max(e.d - 1, 0)):
        fx, fy, fz = e.mapping[x - 1], e.mapping[2 * x - 1], e.mapping[2 * x]
        lam = T.levels[fx]
        if T.levels[fy] <= lam or T.levels[fz] <= lam:
            return False
        if T.ancestor_at(fy, lam) != fx or T.ancestor_at(fz, lam) != fx:
            return False
        if T.ancestor_at(fy, lam + 1) == T.ancestor_at(fz, lam + 1):
            return False
    return True
