from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from treeramsey.exact import pow_cmp
from treeramsey.sary import (
    GeneralEmbedding,
    GeneralTree,
    SaryTreeSubset,
    TreeValidationError,
    full_tree,
    gmap_build,
    is_general_embedding,
    leafbound_check,
    leafbound_slack,
    random_general_tree,
    sary_signature_set,
    sary_weight,
    theorem1prime_check,
    transport,
    tree_from_levels,
    weighted_signature_count,
)
from treeramsey.signatures import (
    SignatureFamily,
    contains_replica,
    mask_of,
    signature_set,
    theorem1_check,
)
from treeramsey.tree import DyadicWeight, ResourceLimitError, TreeSubset, set_weight


def start(s, l):
    return (s**l - 1) // (s - 1)


def brute_sary_signatures(H: SaryTreeSubset) -> frozenset:
    """Level-set by level-set existence search, following the definition."""
    s, n = H.s, H.n

    def level(v):
        return next(l for l in range(n + 1) if start(s, l + 1) > v)

    def below(v, target):
        lo, hi = v, v
        for _ in range(target - level(v)):
            lo, hi = s * lo + 1, s * hi + s
        return range(lo, hi + 1)

    def realises(v, levels, j):
        if j == len(levels) - 1:
            return True
        return all(
            any(a in H and realises(a, levels, j + 1) for a in below(c, levels[j + 1]))
            for c in range(s * v + 1, s * v + s + 1)
        )

    found = {0}
    for d in range(1, n + 1):
        for levels in combinations(range(n), d):
            first = range(start(s, levels[0]), start(s, levels[0] + 1))
            if any(v in H and realises(v, levels, 0) for v in first):
                found.add(mask_of(levels))
    return frozenset(found)


def test_sary_weight_examples():
    for s in (2, 3, 5):
        assert sary_weight(SaryTreeSubset(3, s, 1)) == 1
    assert sary_weight(SaryTreeSubset.full(3, 3)) == 3
    assert sary_weight(SaryTreeSubset(3, 3, 1 << 4)) == Fraction(1, 9)


def test_sary_subset_validation():
    with pytest.raises(ValueError):
        SaryTreeSubset(2, 1)
    with pytest.raises(ValueError):
        SaryTreeSubset(2, 3, 1 << 4)
    with pytest.raises(ResourceLimitError):
        SaryTreeSubset(12, 4)


def test_sary_signature_examples():
    assert sary_signature_set(SaryTreeSubset(3, 3)).masks == {0}
    assert sary_signature_set(SaryTreeSubset.full(2, 3)).masks == {0, 1, 2, 3}
    # the root needs all three children before it can host T_{2,3}
    H = SaryTreeSubset(2, 3, 0b1111 ^ 0b0010)
    assert sary_signature_set(H).masks == {0, 1, 2}


@pytest.mark.parametrize("s,n", [(3, 2), (3, 3), (3, 4), (4, 3), (5, 3)])
def test_sary_signatures_match_brute_force(s, n):
    gen = np.random.default_rng([s, n])
    for _ in range(60):
        H = SaryTreeSubset.random(n, s, gen.random(), gen)
        assert sary_signature_set(H).masks == brute_sary_signatures(H)


def test_binary_case_reduces_to_signature_set():
    gen = np.random.default_rng(2)
    for n in range(1, 9):
        for _ in range(30):
            H = SaryTreeSubset.random(n, 2, gen.random(), gen)
            heap = TreeSubset(n, H.bits)  # 0-based s=2 indexing equals heap index - 1
            assert sary_signature_set(H).masks == signature_set(heap).masks
            assert sary_weight(H) == set_weight(heap).fraction


def test_weighted_count_examples():
    S = SignatureFamily(2, frozenset({0, 1, 2, 3}))
    assert weighted_signature_count(SignatureFamily(2, frozenset({0})), 3) == 1
    assert weighted_signature_count(S, 3) == Fraction(9, 4)
    assert weighted_signature_count(S, 2) == 4
    with pytest.raises(ValueError):
        weighted_signature_count(S, 1)


def test_theorem1prime_examples():
    assert theorem1prime_check(2, 2, 3, Fraction(2))
    assert not theorem1prime_check(2, 2, 3, Fraction(1))
    for n in range(1, 9):
        for d in range(1, n + 1):
            for num in range(0, 8 * n + 1, 3):
                w = Fraction(num, 8)
                assert theorem1prime_check(n, d, 2, w) == theorem1_check(n, d, DyadicWeight.from_fraction(w))


@pytest.mark.parametrize("s", [2, 3, 4])
def test_lemma3_prime_chain(s):
    gen = np.random.default_rng(s)
    for n in range(1, 8 if s < 4 else 7):
        for _ in range(25):
            H = SaryTreeSubset.random(n, s, gen.random(), gen)
            S = sary_signature_set(H)
            weighted = weighted_signature_count(S, s)
            assert len(S) >= weighted
            assert pow_cmp(Fraction(s, s - 1), sary_weight(H), weighted) <= 0


def test_theorem1prime_soundness_exhaustive_n2():
    s, n = 3, 2
    for bits in range(1 << start(s, n)):
        H = SaryTreeSubset(n, s, bits)
        S = sary_signature_set(H)
        for d in (1, 2):
            if theorem1prime_check(n, d, s, sary_weight(H)):
                assert S.max_size() >= d


# --- general trees and the g-map --------------------------------------------


def path_tree(n):
    return GeneralTree(3, n, tuple((v + 1,) for v in range(n - 1)) + ((),))


def lopsided_tree():
    """Root with a full binary depth-5 subtree on one side and a bare path on the other."""
    counts = [2, 2, 1]  # root, then left child (full side) and right child (path)
    counts += [2, 2, 1]  # level 2
    counts += [2] * 4 + [1]  # level 3
    counts += [2] * 8 + [1]  # level 4
    return tree_from_levels(2, 6, counts)


def test_full_binary_tree_is_tight():
    for n in range(1, 8):
        T = full_tree(2, n)
        result = gmap_build(T)
        assert result.H == TreeSubset.full(n)
        assert set_weight(result.H).fraction == n
        assert T.leaf_count == 2 ** (n - 1)
        assert leafbound_check(T, result, 2)
        assert leafbound_slack(T, result, 2) == pytest.approx(0.0)


def test_path_tree():
    T = path_tree(5)
    result = gmap_build(T)
    assert set(result.g) == set(range(5))
    assert list(result.H) == list(range(16, 32))
    assert set_weight(result.H).fraction == 1
    assert leafbound_check(T, result, 3)


def test_full_sary_trees_meet_the_bound():
    for s in (2, 3, 4):
        for n in range(1, 6):
            T = full_tree(s, n)
            result = gmap_build(T)
            assert result.H == TreeSubset.full(n)
            assert T.leaf_count == s ** (n - 1) and leafbound_check(T, result, s)


def test_gmap_preserves_levels_and_definition_of_H():
    gen = np.random.default_rng(4)
    for _ in range(100):
        T = random_general_tree(3, 6, gen)
        result = gmap_build(T)
        assert result.g[0] == 0
        for v in range(1, 64):
            u = result.image(v)
            assert T.levels[u] == v.bit_length() - 1
            assert (v in result.H) == (len(T.children[u]) != 1)
            if v > 1:
                assert T.parents[u] == result.image(v // 2)


def test_gmap_tie_breaking():
    # root has three children with equal leaf counts: heap 2 -> child 1, heap 3 -> child 2
    T = tree_from_levels(3, 2, [3])
    assert gmap_build(T).g == (0, 1, 2)
    # a heavier later child wins the second slot but still goes to the left by index order
    T = tree_from_levels(3, 3, [3, 1, 1, 2])
    assert gmap_build(T).g[:3] == (0, 1, 3)


def test_transport_produces_embeddings():
    gen = np.random.default_rng(6)
    checked = 0
    for _ in range(150):
        T = random_general_tree(3, 7, gen)
        result = gmap_build(T)
        for d in range(1, signature_set(result.H).max_size() + 1):
            w = contains_replica(result.H, d)
            assert is_general_embedding(T, transport(w, result))
            checked += 1
    assert checked > 150


def test_general_embedding_rejects_collapsed_children():
    T = tree_from_levels(2, 3, [2, 1, 2])
    result = gmap_build(T)
    # heap vertex 2 maps to a single-child vertex, so its two children collide
    collapsed = (result.image(2), result.image(4), result.image(5))
    assert not is_general_embedding(T, GeneralEmbedding(2, collapsed))
    # both leaves under the same child of the root
    assert not is_general_embedding(T, GeneralEmbedding(2, (0, result.image(6), result.image(7))))
    assert is_general_embedding(T, GeneralEmbedding(2, (0, result.image(4), result.image(6))))


def test_leaf_bound_fails_on_a_lopsided_tree():
    # 16 leaves on the full side plus one on the path, while w(H) = 1 + 5/2 + 1/2 = 4.
    T = lopsided_tree()
    result = gmap_build(T)
    assert T.leaf_count == 17
    assert set_weight(result.H).fraction == 4
    assert not leafbound_check(T, result, 2)
    assert leafbound_slack(T, result, 2) < 0


def test_leaf_bound_fails_already_at_depth_three():
    # root -> (vertex with two leaves, vertex with one leaf): 3 leaves against 2**1.5
    T = tree_from_levels(2, 3, [2, 2, 1])
    result = gmap_build(T)
    assert T.leaf_count == 3 and set_weight(result.H).fraction == Fraction(5, 2)
    assert not leafbound_check(T, result, 2)


def test_general_tree_text_round_trip(tmp_path):
    T = random_general_tree(3, 5, np.random.default_rng(0))
    path = tmp_path / "tree.txt"
    T.save(path)
    assert GeneralTree.load(path) == T
    assert path.read_text().splitlines()[0] == "s=3 n=5"


@pytest.mark.parametrize(
    "text",
    [
        "s=2 n=3\n0: 1 2 3\n1:\n2:\n3:\n",  # arity violation
        "s=2 n=3\n0: 1 2\n1:\n2: 3\n3:\n",  # leaf 1 above the last level
        "s=2 n=2\n0: 1\n1: 2\n2:\n",  # vertex below the last level
        "s=2 n=2\n0: 1\n1:\n2:\n",  # unreachable vertex
        "s=2 n=2\n0: 1\n2:\n",  # out-of-order lines
        "n=2\n0:\n",  # missing arity
    ],
)
def test_malformed_trees_are_rejected(text):
    with pytest.raises(TreeValidationError):
        GeneralTree.from_text(text)
