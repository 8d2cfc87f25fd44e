import csv
import io
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from treeramsey.coloring import (
    Coloring,
    Decision,
    FitTrace,
    Rng,
    SplitCoins,
    _split_eager,
    _split_lazy,
    _split_lazy_scalar,
    audit_smallest_color,
    band_subtree,
    block_coloring,
    find_mono_replica,
    find_t2free_coloring,
    lemma6_k,
    level_coloring,
    martingale_trace,
    mc_lemma6,
    random_fit_branch,
    random_split_coloring,
)
from treeramsey.oracle import oracle_enumerate
from treeramsey.signatures import is_regular_embedding
from treeramsey.tree import ResourceLimitError


def test_single_vertex():
    assert random_split_coloring(1, Rng(5)).colors.tolist() == [1]


@pytest.mark.parametrize("seed", range(20))
def test_two_levels(seed):
    c = random_split_coloring(2, Rng(seed))
    assert c[1] == 1
    assert sorted([c[2], c[3]]) == [1, 2]


@pytest.mark.parametrize("n", range(2, 9))
def test_no_monochromatic_t2(n):
    for t in range(60):
        assert find_mono_replica(random_split_coloring(n, Rng(n).split(t)), 2) is None


def test_deterministic_and_split_streams_differ():
    a = random_split_coloring(9, Rng(42))
    assert a == random_split_coloring(9, Rng(42))
    assert a != random_split_coloring(9, Rng(42).split(1))
    assert Rng(3).derive_seed(4) == Rng(3).derive_seed(4) != Rng(3).derive_seed(5)


@pytest.mark.parametrize("n", range(1, 11))
def test_evaluation_paths_agree(n):
    offsets, total = SplitCoins.layout(n)
    for t in range(5):
        bits = np.random.default_rng([n, t]).integers(0, 2, size=total, dtype=np.uint8)
        eager = _split_eager(n, bits, offsets)
        assert np.array_equal(_split_lazy(n, bits, offsets), eager)
        assert np.array_equal(_split_lazy_scalar(n, bits.tolist(), offsets), eager)
    assert random_split_coloring(n, Rng(9), eager=True) == random_split_coloring(n, Rng(9))


@pytest.mark.parametrize("n", [1, 3, 6, 9])
def test_audit_smallest_color(n):
    c = random_split_coloring(n, Rng(7), record=True)
    assert audit_smallest_color(c)
    tampered = c.colors.copy()
    tampered[-1] += 1
    assert not audit_smallest_color(Coloring(n, tampered, c.coins))


def test_assigned_color_never_forbidden_at_assignment():
    # colours are bounded by one plus the number of ancestors
    c = random_split_coloring(12, Rng(1))
    levels = np.floor(np.log2(np.arange(1, len(c.colors) + 1))).astype(int)
    assert np.all(c.colors <= levels + 1)


def test_depth_cap():
    with pytest.raises(ResourceLimitError):
        random_split_coloring(26, Rng(0))


def test_coloring_text_round_trip():
    c = random_split_coloring(5, Rng(2))
    assert Coloring.from_text(c.to_text()) == c
    with pytest.raises(ValueError):
        Coloring.from_text("n=2\n1 2")
    with pytest.raises(ValueError):
        Coloring.from_text("n=1\n0")


# --- random fit ---------------------------------------------------------------


def test_random_fit_first_vertex():
    colors, trace = random_fit_branch(1, Rng(0))
    assert colors == [1]
    assert trace.decisions == (Decision(0, 1, 1.0, True),)


def test_random_fit_second_vertex_is_a_fair_coin():
    gen = np.random.default_rng(0)
    second = Counter(random_fit_branch(2, gen)[0][1] for _ in range(4000))
    assert set(second) == {1, 2}
    assert stats.binomtest(second[1], 4000, 0.5).pvalue > 0.001


@pytest.mark.parametrize("n", [1, 5, 16])
def test_random_fit_accepts_exactly_n_times(n):
    gen = np.random.default_rng(n)
    for _ in range(50):
        colors, trace = random_fit_branch(n, gen)
        assert len(colors) == n
        assert sum(d.accepted for d in trace.decisions) == n
        per_position = Counter(d.position for d in trace.decisions if d.accepted)
        assert all(per_position[p] == 1 for p in range(n))


def test_martingale_single_vertex():
    _, trace = random_fit_branch(1, Rng(3))
    assert martingale_trace(trace) == ([0.0], 0.0)


def test_martingale_increments_bounded_and_acceptances_sum():
    gen = np.random.default_rng(5)
    for _ in range(200):
        _, trace = random_fit_branch(16, gen)
        xs, final = martingale_trace(trace)
        steps = np.diff([0.0] + xs)
        assert np.all(steps > -1) and np.all(steps <= 1)
        assert final == pytest.approx(sum(d.p for d in trace.decisions) - 16)


def test_martingale_rejects_malformed_traces():
    bad = [
        FitTrace(2, (Decision(0, 1, 1.0, True),)),
        FitTrace(1, (Decision(0, 1, 1.0, True), Decision(0, 2, 1.0, True))),
        FitTrace(2, (Decision(0, 1, 1.0, False), Decision(1, 1, 1.0, True))),
        FitTrace(1, (Decision(0, 1, 0.0, True),)),
    ]
    for trace in bad:
        with pytest.raises(ValueError):
            martingale_trace(trace)


def test_martingale_mean_is_zero():
    gen = np.random.default_rng(8)
    finals = np.array([martingale_trace(random_fit_branch(16, gen)[1])[1] for _ in range(3000)])
    se = finals.std(ddof=1) / np.sqrt(len(finals))
    assert abs(finals.mean()) < 3 * se


def test_fit_and_split_agree_on_a_branch_small_sample():
    from treeramsey.experiments import fit_branch_samples, split_branch_samples, two_sample_chi2

    split = split_branch_samples(4, 13, 4000, Rng(1))
    fit = fit_branch_samples(4, 4000, Rng(2))
    for pos in range(4):
        assert two_sample_chi2([s[pos] for s in split], [f[pos] for f in fit]) > 0.001


# --- Lemma 6 Monte Carlo ---------------------------------------------------------


def test_lemma6_k():
    assert lemma6_k(16) == 24
    assert lemma6_k(8) == 16


def test_mc_lemma6_preconditions():
    with pytest.raises(ValueError):
        mc_lemma6(16, 0, Rng(0))
    with pytest.raises(ValueError):
        mc_lemma6(7, 10, Rng(0))


def test_mc_lemma6_csv_and_reproducibility():
    a = mc_lemma6(8, 200, Rng(4))
    b = mc_lemma6(8, 200, Rng(4))
    assert a.to_csv() == b.to_csv()
    rows = list(csv.reader(io.StringIO(a.to_csv())))
    assert rows[0] == ["seed", "n", "k", "max_color", "exceeded"]
    assert len(rows) == 202 and rows[-1][0] == "summary"
    assert sum(a.histogram.values()) == 200
    assert a.exceeded == 0 and 0 < a.exceed_upper < 0.05
    # each row replays on its own
    seed, n, _, top, _ = (int(x) for x in rows[1])
    assert max(random_fit_branch(n, Rng(seed))[0]) == top


# --- replicas and constructions ---------------------------------------------------


def test_all_one_coloring_has_replica():
    c = Coloring(4, np.ones(15, dtype=int))
    color, w = find_mono_replica(c, 4)
    assert color == 1 and w.d == 4


def test_level_parity_coloring():
    c = level_coloring(4, lambda l: l % 2 + 1)
    color, w = find_mono_replica(c, 2)
    assert color == 1 and w.signature == 0b0101
    assert is_regular_embedding(w, c.color_class(1))


def test_block_coloring_d2_is_identity():
    base = random_split_coloring(5, Rng(1))
    assert block_coloring(base, 2) == base


def test_block_coloring_of_single_vertex():
    base = Coloring(1, np.array([1]))
    assert block_coloring(base, 4) == Coloring(3, np.ones(7, dtype=int))


@pytest.mark.parametrize("seed", range(4))
def test_block_coloring_bands_copy_base(seed):
    base = random_split_coloring(3, Rng(seed))
    big = block_coloring(base, 4)
    assert big.n == 9
    for band in range(3):
        for root in range(1 << (3 * band), 1 << (3 * band + 1)):
            assert band_subtree(big, root, 3) == base


@pytest.mark.parametrize("n_prime", [2, 3])
def test_block_coloring_lifts_t2_freeness(n_prime):
    for seed in range(6):
        base = random_split_coloring(n_prime, Rng(seed))
        big = block_coloring(base, 3)
        assert find_mono_replica(big, 3) is None
        # independent check by exhaustive enumeration in each colour class
        for color in np.unique(big.colors):
            assert oracle_enumerate(big.color_class(int(color)), 3).witnesses == []


def test_block_coloring_lifts_t2_freeness_n4():
    for seed in range(4):
        assert find_mono_replica(block_coloring(random_split_coloring(4, Rng(seed)), 3), 3) is None


def test_find_t2free_coloring_examples():
    c = find_t2free_coloring(8, 16, Rng(0), attempts=10)
    assert c is not None and c.max_color() <= 16
    assert find_mono_replica(c, 2) is None
    assert find_t2free_coloring(4, 1, Rng(0), attempts=100) is None
    single = find_t2free_coloring(1, 1, Rng(0), attempts=1)
    assert single.colors.tolist() == [1]
    with pytest.raises(ValueError):
        find_t2free_coloring(3, 3, Rng(0), attempts=0)
