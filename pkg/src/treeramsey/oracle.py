"""Brute-force regular-embedding search, straight from the definition.

Used as an independent check on the signature DP; only practical for tiny
trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .signatures import EmbeddingWitness, mask_of
from .tree import ResourceLimitError, TreeSubset, ancestor_at, level_range, vertex_level

ORACLE_MAX_N = 6
ORACLE_MAX_D = 4


@dataclass
class OracleResult:
    witnesses: list[EmbeddingWitness]
    signatures: frozenset[int]

    @property
    def max_depth(self) -> int:
        return max(s.bit_count() for s in self.signatures)


def _below(v: int, level: int) -> range:
    shift = level - vertex_level(v)
    return range(v << shift, (v + 1) << shift)


def _embeddings_on(H: TreeSubset, levels: tuple[int, ...]):
    d = len(levels)
    mapping = [0] * ((1 << d) - 1)

    def assign(x: int):
        if x == len(mapping) + 1:
            yield tuple(mapping)
            return
        j = x.bit_length() - 1
        if x == 1:
            candidates = level_range(levels[0])
        else:
            fp = mapping[x // 2 - 1]
            candidates = _below(fp, levels[j])
        for v in candidates:
            if v not in H or (x > 1 and v == mapping[x // 2 - 1]):
                continue
            if x > 1 and x % 2 == 1:
                fp = mapping[x // 2 - 1]
                lam = vertex_level(fp)
                if ancestor_at(v, lam + 1) == ancestor_at(mapping[x - 2], lam + 1):
                    continue
            mapping[x - 1] = v
            yield from assign(x + 1)

    yield from assign(1)


def oracle_enumerate(H: TreeSubset, d: int) -> OracleResult:
    """Every regular embedding of T_d into ``H``, choosing the level set first."""
    if H.depth > ORACLE_MAX_N or d > ORACLE_MAX_D:
        raise ResourceLimitError(f"oracle is limited to n <= {ORACLE_MAX_N}, d <= {ORACLE_MAX_D}")
    if d < 0:
        raise ValueError("d must be non-negative")
    witnesses = []
    for levels in combinations(range(H.depth), d):
        for mapping in _embeddings_on(H, levels):
            witnesses.append(EmbeddingWitness(d, H.depth, mapping, mask_of(levels)))
    return OracleResult(witnesses, frozenset(w.signature for w in witnesses))


def _realises(H: TreeSubset, v: int, levels: tuple[int, ...], j: int) -> bool:
    # v already sits on levels[j] and is in H; can T_{d-j} hang below it?
    if j == len(levels) - 1:
        return True
    nxt = levels[j + 1]
    return all(
        any(a in H and _realises(H, a, levels, j + 1) for a in _below(child, nxt))
        for child in (2 * v, 2 * v + 1)
    )


def oracle_signature_set(H: TreeSubset) -> frozenset[int]:
    """All signatures of ``H``, by testing each level set with plain backtracking."""
    if H.depth > ORACLE_MAX_N:
        raise ResourceLimitError(f"oracle is limited to n <= {ORACLE_MAX_N}")
    found = {0}
    for d in range(1, H.depth + 1):
        for levels in combinations(range(H.depth), d):
            if any(v in H and _realises(H, v, levels, 0) for v in level_range(levels[0])):
                found.add(mask_of(levels))
    return frozenset(found)
