"""Verification runs and tables shared by the CLI, the scripts and the acceptance tests."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats
from scipy.special import gammaln, logsumexp

from .coloring import Rng, find_mono_replica, find_t2free_coloring, random_fit_branch, random_split_coloring
from .exact import exp2_cmp, exp2_exceeds
from .oracle import oracle_signature_set
from .sary import gmap_build, is_general_embedding, leafbound_check, random_general_tree, transport
from .signatures import (
    binomial_prefix_sum,
    contains_replica,
    is_regular_embedding,
    signature_count,
    signature_set,
    theorem1_check,
)
from .tree import TreeSubset, branch, set_weight


def random_subset(n: int, gen: np.random.Generator) -> TreeSubset:
    """Subset with a uniformly drawn inclusion probability, so weights spread over ``[0, n]``."""
    return TreeSubset.random(n, gen.random(), gen)


@dataclass
class CheckReport:
    name: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, good: bool, detail=None) -> None:
        self.total += 1
        if good:
            self.passed += 1
        elif len(self.failures) < 20:
            self.failures.append(detail)

    def verdict(self) -> str:
        return f"{self.name} {'OK' if self.ok else 'FAIL'} {self.passed}/{self.total}"


def lemma3_holds(H: TreeSubset) -> bool:
    """``|S(H)| >= 2**w(H)``, compared exactly."""
    return exp2_cmp(set_weight(H).fraction, signature_count(H)) <= 0


def verify_lemma3(n: int, trials: int, rng: Rng, report: CheckReport | None = None) -> CheckReport:
    report = report or CheckReport("LEMMA3")
    gen = rng.generator()
    for _ in range(trials):
        H = random_subset(n, gen)
        report.record(lemma3_holds(H), H)
    return report


def verify_lemma3_exhaustive(n: int, report: CheckReport | None = None) -> CheckReport:
    report = report or CheckReport("LEMMA3")
    for bits in range(1 << ((1 << n) - 1)):
        H = TreeSubset(n, bits)
        report.record(lemma3_holds(H), H)
    return report


def verify_theorem1(n: int, d: int, trials: int, rng: Rng, report: CheckReport | None = None) -> CheckReport:
    """Whenever the weight threshold holds, a validated T_d witness must exist.

    Only subsets that pass the threshold count towards the report.
    """
    report = report or CheckReport("THEOREM1")
    gen = rng.generator()
    for _ in range(trials):
        H = random_subset(n, gen)
        if not theorem1_check(n, d, set_weight(H)):
            continue
        w = contains_replica(H, d)
        report.record(w is not None and w.d == d and is_regular_embedding(w, H), H)
    return report


def verify_oracle(H: TreeSubset) -> bool:
    return signature_set(H).masks == oracle_signature_set(H)


def verify_lemma4(n: int, trials: int, rng: Rng, report: CheckReport | None = None) -> CheckReport:
    report = report or CheckReport("LEMMA4")
    for t in range(trials):
        coloring = random_split_coloring(n, rng.split(n, t))
        report.record(find_mono_replica(coloring, 2) is None, (n, t))
    return report


def verify_leafbound(s: int, n: int, trials: int, rng: Rng) -> tuple[CheckReport, CheckReport]:
    """Leaf-count bound and witness transport over random general trees."""
    bound = CheckReport("LEAFBOUND")
    moved = CheckReport("TRANSPORT")
    gen = rng.generator()
    for _ in range(trials):
        T = random_general_tree(s, n, gen)
        result = gmap_build(T)
        bound.record(leafbound_check(T, result, s), T)
        family = signature_set(result.H)
        d = family.max_size()
        if d >= 2:
            w = contains_replica(result.H, d)
            moved.record(is_general_embedding(T, transport(w, result)), T)
    return bound, moved


# --- branch distributions -------------------------------------------------


def split_branch_samples(n: int, leaf: int, trials: int, rng: Rng) -> list[tuple[int, ...]]:
    path = [v - 1 for v in branch(leaf, n)]
    return [tuple(random_split_coloring(n, rng.split(t)).colors[path].tolist()) for t in range(trials)]


def fit_branch_samples(n: int, trials: int, rng: Rng) -> list[tuple[int, ...]]:
    gen = rng.generator()
    return [tuple(random_fit_branch(n, gen)[0]) for _ in range(trials)]


def two_sample_chi2(a: list, b: list, min_expected: float = 5.0) -> float:
    """p-value of a chi-square homogeneity test; sparse categories are pooled."""
    ca, cb = Counter(a), Counter(b)
    keys = sorted(set(ca) | set(cb))
    total_a, total_b = len(a), len(b)
    share = total_a / (total_a + total_b)
    rows, pool_a, pool_b = [], 0, 0
    for key in keys:
        x, y = ca[key], cb[key]
        if (x + y) * min(share, 1 - share) < min_expected:
            pool_a += x
            pool_b += y
        else:
            rows.append((x, y))
    if pool_a + pool_b:
        rows.append((pool_a, pool_b))
    if len(rows) < 2:
        return 1.0
    return float(stats.chi2_contingency(np.array(rows).T, correction=False)[1])


# --- Theorem 2 tables -------------------------------------------------------


def least_sufficient_n(d: int, k: int, limit: int | None = None) -> int:
    """Least ``n`` with ``2**(n/k) > sum(C(n, i) for i < d)``.

    Floating point screens out values that are clearly short of the threshold;
    everything within ``1e-6`` of it or above is decided exactly.
    """
    limit = limit or max(64, 2 * math.ceil(5 * d * k * math.log2(max(k, 2))))
    ns = np.arange(1, limit + 1)
    i = np.arange(d)[:, None]
    log_terms = gammaln(ns + 1) - gammaln(i + 1) - gammaln(np.maximum(ns - i, 0) + 1)
    log_terms = np.where(i <= ns, log_terms, -np.inf)
    margin = ns / k - logsumexp(log_terms, axis=0) / math.log(2)
    for n in ns[margin > -1e-6].tolist():
        if exp2_exceeds(Fraction(n, k), binomial_prefix_sum(n, d)):
            return n
    raise ValueError(f"no sufficient n up to {limit} for d={d}, k={k}")


def upper_bound_5dk(d: int, k: int) -> int:
    return math.ceil(5 * d * k * math.log2(k))


def t2free_depth(k: int, rng: Rng, cap: int = 12, attempts: int = 64) -> int:
    """Largest ``n' <= cap`` (scanning upward) with a T_2-free random split colouring in ``k`` colours."""
    best = 0
    for n in range(1, cap + 1):
        if find_t2free_coloring(n, k, rng.split(k, n), attempts) is None:
            break
        best = n
    return best


@dataclass(frozen=True)
class GridRow:
    d: int
    k: int
    n_sufficient: int
    upper_5dk: int
    n_prime: int
    n_construction: int

    @property
    def consistent(self) -> bool:
        return self.n_sufficient <= self.upper_5dk and self.n_construction < self.n_sufficient


def theorem2_grid(d_range, k_range, rng: Rng, n_prime_cap: int = 12, attempts: int = 64) -> list[GridRow]:
    d_range, k_range = list(d_range), list(k_range)
    if max(d_range) > 10 or max(k_range) > 64 or min(d_range) < 2 or min(k_range) < 2:
        raise ValueError("grid is limited to 2 <= d <= 10 and 2 <= k <= 64")
    n_prime = {k: t2free_depth(k, rng, n_prime_cap, attempts) for k in k_range}
    rows = []
    for d in d_range:
        for k in k_range:
            rows.append(GridRow(d, k, least_sufficient_n(d, k), upper_bound_5dk(d, k),
                                n_prime[k], (d - 1) * n_prime[k]))
    return rows


def grid_csv(rows: list[GridRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["d", "k", "n_sufficient", "upper_5dk", "n_prime", "n_construction"])
    for r in rows:
        out.writerow([r.d, r.k, r.n_sufficient, r.upper_5dk, r.n_prime, r.n_construction])
    return buf.getvalue()
