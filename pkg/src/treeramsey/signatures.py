"""Signature families S(H) and regular embeddings of T_d into a vertex set H.

A signature is an integer bitmask over levels (bit ``l`` set means level ``l``
is occupied). ``S(H)`` collects the signatures of all regular embeddings of
every T_d, d >= 0, into ``H``. It obeys the subtree recursion

    S(H) = S(H') | S(H'')                                   if root not in H
    S(H) = S(H') | S(H'') | {s + {root level} : s in S(H') & S(H'')}  otherwise

with ``S(empty) = {empty}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Iterator

import numpy as np

from .exact import exp2_exceeds
from .tree import (
    DyadicWeight,
    InvalidVertexError,
    ResourceLimitError,
    TreeSubset,
    ancestor_at,
    is_descendant,
    vertex_level,
)

DEFAULT_CAP = 20


class NoWitnessError(LookupError):
    pass


class InvalidEmbeddingError(ValueError):
    pass


def mask_of(levels) -> int:
    m = 0
    for l in levels:
        m |= 1 << l
    return m


def levels_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class SignatureFamily:
    n: int
    masks: frozenset[int]

    def __contains__(self, mask: int) -> bool:
        return mask in self.masks

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.masks))

    def __le__(self, other: SignatureFamily) -> bool:
        return self.masks <= other.masks

    def max_size(self) -> int:
        return max(m.bit_count() for m in self.masks)

    def of_size(self, d: int) -> list[int]:
        return sorted(m for m in self.masks if m.bit_count() == d)

    def by_decreasing_size(self) -> list[int]:
        return sorted(self.masks, key=lambda m: (-m.bit_count(), m))

    def as_array(self) -> np.ndarray:
        """Sorted ``uint64`` array of the masks."""
        return np.array(sorted(self.masks), dtype=np.uint64)


# --- dense DP -------------------------------------------------------------
#
# For a vertex at level lam the family lives on levels lam..n-1. Indexing a
# family by the *reversed* mask (level l -> bit n-1-l) makes every subtree use
# the same coordinates: a child's indicator vector of length L is a prefix of
# the parent's of length 2L, and adding the parent's level is a shift by L.
# A whole tree level is then one boolean array of shape (2**lam, 2**(n-lam)).


@lru_cache(maxsize=32)
def _reverse_table(n: int) -> np.ndarray:
    r = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(r)
    for i in range(n):
        out |= ((r >> i) & 1) << (n - 1 - i)
    out.flags.writeable = False
    return out


def _reverse_mask(mask: int, n: int) -> int:
    r = 0
    for l in levels_of(mask):
        r |= 1 << (n - 1 - l)
    return r


def _dense_tables(H: TreeSubset, keep: bool) -> list[np.ndarray]:
    n = H.depth
    member = H.mask
    below = np.ones((1 << n, 1), dtype=bool)
    tables: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    for lam in range(n - 1, -1, -1):
        left, right = below[0::2], below[1::2]
        inh = member[(1 << lam) - 1 : (1 << (lam + 1)) - 1, None]
        below = np.concatenate([left | right, left & right & inh], axis=1)
        if keep:
            tables[lam] = below
    if not keep:
        tables = [below]
    return tables


def _check_cap(H: TreeSubset, cap: int) -> None:
    if H.depth > cap:
        raise ResourceLimitError(f"signature families are capped at depth {cap}, got {H.depth}")


def _dense_root(H: TreeSubset, cap: int) -> np.ndarray:
    _check_cap(H, cap)
    if H.depth == 0:
        return np.ones(1, dtype=bool)
    return _dense_tables(H, keep=False)[0][0]


def signature_count(H: TreeSubset, cap: int = DEFAULT_CAP) -> int:
    return int(np.count_nonzero(_dense_root(H, cap)))


def _sets_recursion(H: TreeSubset) -> frozenset[int]:
    n = H.depth
    empty = frozenset([0])

    def rec(v: int) -> frozenset[int]:
        lam = vertex_level(v)
        if lam >= n:
            return empty
        left, right = rec(2 * v), rec(2 * v + 1)
        out = left | right
        if v in H:
            out |= {s | (1 << lam) for s in left & right}
        return out

    return rec(1) if n else empty


def _sorted_recursion(H: TreeSubset) -> np.ndarray:
    n = H.depth
    member = H.mask
    families = [np.zeros(1, dtype=np.uint64)] * (1 << n)
    for lam in range(n - 1, -1, -1):
        bit = np.uint64(1 << lam)
        level = []
        for i in range(1 << lam):
            left, right = families[2 * i], families[2 * i + 1]
            out = np.union1d(left, right)
            if member[(1 << lam) - 1 + i]:
                out = np.union1d(out, np.intersect1d(left, right, assume_unique=True) | bit)
            level.append(out)
        families = level
    return families[0]


def signature_set(H: TreeSubset, cap: int = DEFAULT_CAP, method: str = "dense") -> SignatureFamily:
    """Exact ``S(H)`` in global level coordinates.

    ``method`` selects the evaluation strategy of the same recursion:
    ``"dense"`` (vectorised indicator arrays, the default), ``"sets"``
    (hash-sets of masks, one subtree at a time) or ``"sorted"`` (sorted
    ``uint64`` arrays with merge-style union and intersection).
    """
    _check_cap(H, cap)
    if method == "dense":
        hits = np.flatnonzero(_dense_root(H, cap))
        masks = frozenset(_reverse_table(H.depth)[hits].tolist())
    elif method == "sets":
        masks = _sets_recursion(H)
    elif method == "sorted":
        masks = frozenset(int(m) for m in _sorted_recursion(H))
    else:
        raise ValueError(f"unknown method {method!r}")
    return SignatureFamily(H.depth, masks)


def max_replica_depth(H: TreeSubset, cap: int = DEFAULT_CAP) -> int:
    root = _dense_root(H, cap)
    return max(int(r).bit_count() for r in np.flatnonzero(root))


# --- witnesses ------------------------------------------------------------


@dataclass(frozen=True)
class EmbeddingWitness:
    """A regular embedding: ``mapping[x - 1]`` is the image of T_d vertex ``x``."""

    d: int
    n: int
    mapping: tuple[int, ...]
    signature: int

    def image(self, x: int) -> int:
        return self.mapping[x - 1]

    def to_text(self) -> str:
        lines = [f"d={self.d} n={self.n}"]
        lines += [f"{x} -> {v}" for x, v in enumerate(self.mapping, start=1)]
        lines.append("signature=" + ",".join(map(str, levels_of(self.signature))))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> EmbeddingWitness:
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        try:
            head = dict(part.split("=") for part in lines[0].split())
            d, n = int(head["d"]), int(head["n"])
            mapping = []
            for expected, ln in enumerate(lines[1:-1], start=1):
                src, dst = (int(t) for t in ln.split("->"))
                if src != expected:
                    raise ValueError(f"source ids must be in heap order, got {src}")
                mapping.append(dst)
            tail = lines[-1]
            if not tail.startswith("signature="):
                raise ValueError("missing signature line")
            body = tail[len("signature="):]
            sig = mask_of(int(t) for t in body.split(",")) if body else 0
        except (KeyError, IndexError, ValueError) as exc:
            raise ValueError(f"malformed witness file: {exc}") from None
        if len(mapping) != (1 << d) - 1:
            raise ValueError(f"expected {(1 << d) - 1} map lines, got {len(mapping)}")
        return cls(d, n, tuple(mapping), sig)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> EmbeddingWitness:
        return cls.from_text(Path(path).read_text())


def empty_witness(n: int) -> EmbeddingWitness:
    return EmbeddingWitness(0, n, (), 0)


def validate_embedding(w: EmbeddingWitness, H: TreeSubset | None = None) -> None:
    """Raise ``InvalidEmbeddingError`` unless ``w`` is a regular embedding into ``H``.

    Checks the definition directly: same-level vertices share an image level,
    and the two children of every vertex land below distinct children of its
    image.
    """
    if len(w.mapping) != (1 << w.d) - 1:
        raise InvalidEmbeddingError("mapping length does not match d")
    for x, v in enumerate(w.mapping, start=1):
        if not 1 <= v < (1 << w.n):
            raise InvalidEmbeddingError(f"image {v} of {x} is outside T_{w.n}")
        if H is not None and v not in H:
            raise InvalidEmbeddingError(f"image {v} of {x} is not in H")
    levels = []
    for j in range(w.d):
        image_levels = {vertex_level(w.image(x)) for x in range(1 << j, 1 << (j + 1))}
        if len(image_levels) != 1:
            raise InvalidEmbeddingError(f"T_d level {j} maps to levels {sorted(image_levels)}")
        levels.append(image_levels.pop())
    for x in range(1, 1 << max(w.d - 1, 0)):
        fx, fy, fz = w.image(x), w.image(2 * x), w.image(2 * x + 1)
        lam = vertex_level(fx)
        for fc in (fy, fz):
            if vertex_level(fc) <= lam or not is_descendant(fc, fx):
                raise InvalidEmbeddingError(f"{fc} is not a proper descendant of {fx}")
        if ancestor_at(fy, lam + 1) == ancestor_at(fz, lam + 1):
            raise InvalidEmbeddingError(f"children of {x} share a child subtree of {fx}")
    if mask_of(levels) != w.signature or w.signature.bit_count() != w.d:
        raise InvalidEmbeddingError("signature does not match the image levels")


def is_regular_embedding(w: EmbeddingWitness, H: TreeSubset | None = None) -> bool:
    try:
        validate_embedding(w, H)
    except (InvalidEmbeddingError, InvalidVertexError):
        return False
    return True


def extract_replica(H: TreeSubset, target: int, cap: int = DEFAULT_CAP) -> EmbeddingWitness:
    """Build a regular embedding into ``H`` whose signature is ``target``.

    Walks down from the root: a vertex on the lowest remaining target level
    becomes an image and both child subtrees receive the rest of the target;
    above that level the walk follows the left child whenever its subtree can
    realise the target.
    """
    _check_cap(H, cap)
    n = H.depth
    if target < 0 or target >> n:
        raise NoWitnessError(f"signature {levels_of(target)} uses levels outside T_{n}")
    if target == 0:
        return empty_witness(n)
    tables = _dense_tables(H, keep=True)

    def realisable(v: int, sigma: int) -> bool:
        lam = vertex_level(v)
        return bool(tables[lam][v - (1 << lam), _reverse_mask(sigma, n)])

    if not realisable(1, target):
        raise NoWitnessError(f"signature {levels_of(target)} is not in S(H)")
    d = target.bit_count()
    mapping = [0] * ((1 << d) - 1)
    stack = [(1, target, 1)]
    while stack:
        v, sigma, src = stack.pop()
        if sigma == 0:
            continue
        low = sigma & -sigma
        if vertex_level(v) == low.bit_length() - 1:
            mapping[src - 1] = v
            rest = sigma ^ low
            stack.append((2 * v + 1, rest, 2 * src + 1))
            stack.append((2 * v, rest, 2 * src))
        else:
            child = 2 * v if realisable(2 * v, sigma) else 2 * v + 1
            stack.append((child, sigma, src))
    return EmbeddingWitness(d, n, tuple(mapping), target)


def binomial_prefix_sum(n: int, d: int) -> int:
    return sum(comb(n, i) for i in range(d))


def theorem1_check(n: int, d: int, w: DyadicWeight) -> bool:
    """Exact test of ``2**w > sum(C(n, i) for i < d)``; true guarantees a T_d replica."""
    if d < 1:
        raise ValueError("d must be positive")
    return exp2_exceeds(w.fraction, binomial_prefix_sum(n, d))


def contains_replica(H: TreeSubset, d: int, cap: int = DEFAULT_CAP) -> EmbeddingWitness | None:
    if d < 0:
        raise ValueError("d must be non-negative")
    if d == 0:
        return empty_witness(H.depth)
    family = signature_set(H, cap)
    candidates = family.of_size(d)
    if not candidates:
        return None
    return extract_replica(H, candidates[0], cap)
