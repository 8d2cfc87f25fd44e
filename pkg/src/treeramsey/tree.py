"""Complete binary trees T_n: heap-indexed vertices, subsets and exact weights.

Vertices are 1-based heap indices: the root is 1 and the children of ``v``
are ``2v`` and ``2v + 1``. The bits of ``v`` below its leading one spell the
root-to-``v`` path (0 = left, 1 = right). T_n has levels ``0 .. n-1`` and
``2**n - 1`` vertices; T_0 is the empty tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

MAX_DEPTH = 25


class InvalidVertexError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds a configured size cap."""


def check_depth(n: int, cap: int = MAX_DEPTH) -> None:
    if n < 0:
        raise ValueError(f"depth must be non-negative, got {n}")
    if n > cap:
        raise ResourceLimitError(f"depth {n} exceeds cap {cap}")


def vertex_level(v: int) -> int:
    if v < 1:
        raise InvalidVertexError(f"vertex ids start at 1, got {v}")
    return v.bit_length() - 1


def _check_vertex(v: int, n: int) -> None:
    if not 1 <= v < (1 << n):
        raise InvalidVertexError(f"vertex {v} is not in T_{n}")


@dataclass(frozen=True)
class Neighbors:
    children: tuple[int, int] | None
    parent: int | None
    is_leaf: bool


def navigate(v: int, n: int) -> Neighbors:
    _check_vertex(v, n)
    leaf = vertex_level(v) == n - 1
    return Neighbors(
        children=None if leaf else (2 * v, 2 * v + 1),
        parent=v // 2 if v > 1 else None,
        is_leaf=leaf,
    )


def is_descendant(u: int, v: int) -> bool:
    """True when ``u`` lies in the subtree rooted at ``v`` (``u == v`` included)."""
    if u < 1 or v < 1:
        raise InvalidVertexError("vertex ids start at 1")
    shift = u.bit_length() - v.bit_length()
    return shift >= 0 and (u >> shift) == v


def ancestor_at(u: int, level: int) -> int:
    shift = vertex_level(u) - level
    if shift < 0:
        raise InvalidVertexError(f"vertex {u} is above level {level}")
    return u >> shift


def branch(leaf: int, n: int) -> list[int]:
    _check_vertex(leaf, n)
    if vertex_level(leaf) != n - 1:
        raise InvalidVertexError(f"vertex {leaf} is not a leaf of T_{n}")
    return [leaf >> s for s in range(n - 1, -1, -1)]


def level_range(level: int) -> range:
    return range(1 << level, 1 << (level + 1))


@dataclass(frozen=True, order=True)
class DyadicWeight:
    """Exact value ``numerator / 2**log2_denominator``, kept in lowest terms."""

    numerator: int
    log2_denominator: int = 0

    def __post_init__(self) -> None:
        num, k = self.numerator, self.log2_denominator
        if num < 0 or k < 0:
            raise ValueError("dyadic weights are non-negative")
        while k > 0 and num % 2 == 0:
            num //= 2
            k -= 1
        if num == 0:
            k = 0
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log2_denominator", k)

    @classmethod
    def from_fraction(cls, value: Fraction | int) -> DyadicWeight:
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.log2_denominator)

    def __float__(self) -> float:
        return float(self.fraction)

    def __add__(self, other: DyadicWeight) -> DyadicWeight:
        return DyadicWeight.from_fraction(self.fraction + other.fraction)

    def __str__(self) -> str:
        if self.log2_denominator == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.log2_denominator}"


@dataclass(frozen=True)
class TreeSubset:
    """A vertex set ``H`` of T_n stored as an integer bitset (bit ``v-1`` is vertex ``v``)."""

    depth: int
    bits: int = 0

    def __post_init__(self) -> None:
        check_depth(self.depth)
        if self.bits < 0 or self.bits >> self.size:
            raise InvalidVertexError(f"bitset has members outside T_{self.depth}")

    @property
    def size(self) -> int:
        return (1 << self.depth) - 1

    @classmethod
    def from_vertices(cls, n: int, vertices: Iterable[int]) -> TreeSubset:
        bits = 0
        for v in vertices:
            _check_vertex(v, n)
            bits |= 1 << (v - 1)
        return cls(n, bits)

    @classmethod
    def full(cls, n: int) -> TreeSubset:
        return cls(n, (1 << ((1 << n) - 1)) - 1)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> TreeSubset:
        """Build from a boolean array indexed by ``v - 1``."""
        mask = np.asarray(mask, dtype=bool)
        n = (len(mask) + 1).bit_length() - 1
        if len(mask) != (1 << n) - 1:
            raise ValueError(f"mask length {len(mask)} is not 2**n - 1")
        packed = np.packbits(mask, bitorder="little").tobytes()
        return cls(n, int.from_bytes(packed, "little"))

    @classmethod
    def levels(cls, n: int, levels: Iterable[int]) -> TreeSubset:
        return cls.from_vertices(n, (v for l in levels for v in level_range(l)))

    @classmethod
    def random(cls, n: int, p: float, gen: np.random.Generator) -> TreeSubset:
        return cls.from_mask(gen.random((1 << n) - 1) < p)

    @cached_property
    def mask(self) -> np.ndarray:
        """Read-only boolean membership array indexed by ``v - 1``."""
        raw = self.bits.to_bytes((self.size + 7) // 8, "little")
        out = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        out = out[: self.size].astype(bool)
        out.flags.writeable = False
        return out

    def __contains__(self, v: int) -> bool:
        return v >= 1 and bool((self.bits >> (v - 1)) & 1)

    def __iter__(self):
        return (int(i) + 1 for i in np.flatnonzero(self.mask))

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __le__(self, other: TreeSubset) -> bool:
        return self.depth == other.depth and self.bits & ~other.bits == 0

    def __and__(self, other: TreeSubset) -> TreeSubset:
        return TreeSubset(self.depth, self.bits & other.bits)

    def __or__(self, other: TreeSubset) -> TreeSubset:
        return TreeSubset(self.depth, self.bits | other.bits)

    def level_counts(self) -> list[int]:
        counts = []
        for l in range(self.depth):
            lo = (1 << l) - 1
            counts.append(((self.bits >> lo) & ((1 << (1 << l)) - 1)).bit_count())
        return counts

    def subtree(self, root: int) -> TreeSubset:
        """The part of ``H`` below ``root``, re-indexed as a subset of T_{n - level(root)}."""
        _check_vertex(root, self.depth)
        lam = vertex_level(root)
        m = self.depth - lam
        bits = 0
        for j in range(m):
            first = (root << j) - 1
            chunk = (self.bits >> first) & ((1 << (1 << j)) - 1)
            bits |= chunk << ((1 << j) - 1)
        return TreeSubset(m, bits)

    def restrict_to_subtree(self, root: int) -> TreeSubset:
        """``H`` intersected with the subtree of ``root``, still in T_n coordinates."""
        keep = 0
        lam = vertex_level(root)
        for j in range(self.depth - lam):
            first = (root << j) - 1
            keep |= ((1 << (1 << j)) - 1) << first
        return TreeSubset(self.depth, self.bits & keep)

    def to_text(self) -> str:
        return f"n={self.depth}\n{self.bits:x}\n"

    @classmethod
    def from_text(cls, text: str) -> TreeSubset:
        lines = [ln.strip() for ln in text.strip().splitlines()]
        if len(lines) != 2 or not lines[0].startswith("n="):
            raise ValueError("subset file must be 'n=<depth>' followed by a hex bitset")
        try:
            n = int(lines[0][2:])
            bits = int(lines[1], 16)
        except ValueError as exc:
            raise ValueError(f"malformed subset file: {exc}") from None
        return cls(n, bits)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> TreeSubset:
        return cls.from_text(Path(path).read_text())


def set_weight(H: TreeSubset) -> DyadicWeight:
    """Exact ``sum(2**-level(v) for v in H)``."""
    n = H.depth
    if n == 0:
        return DyadicWeight(0)
    num = sum(c << (n - 1 - l) for l, c in enumerate(H.level_counts()))
    return DyadicWeight(num, n - 1)
