"""Random split colourings of T_n, the random fit branch process and their diagnostics."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .signatures import DEFAULT_CAP, EmbeddingWitness, contains_replica
from .tree import MAX_DEPTH, TreeSubset, check_depth, level_range, vertex_level

DEFAULT_ATTEMPTS = 64
# below this depth the per-vertex Python loop beats numpy's per-call overhead
SCALAR_MAX_DEPTH = 8


@dataclass(frozen=True)
class Rng:
    """Seeded, splittable random stream. ``split`` derives an independent child."""

    seed: int
    key: tuple[int, ...] = ()

    def split(self, *key: int) -> Rng:
        return Rng(self.seed, self.key + tuple(key))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def derive_seed(self, *key: int) -> int:
        """A plain 64-bit seed for the child stream ``key``, for logging and replay."""
        words = np.random.SeedSequence(self.seed, spawn_key=self.key + key).generate_state(2)
        return int(words[0]) | (int(words[1]) << 32)


@dataclass(frozen=True)
class SplitCoins:
    """Every coin of one random split run.

    The coin of vertex ``x`` (level ``lam``) for a deeper level ``l`` is
    ``bits[offset(lam, l) + x - 2**lam]``: 0 forbids the colour of ``x`` on the
    level-``l`` descendants of its left child, 1 on those of its right child.
    """

    n: int
    bits: np.ndarray = field(repr=False)

    @staticmethod
    def layout(n: int) -> tuple[dict[tuple[int, int], int], int]:
        offsets, pos = {}, 0
        for lam in range(n - 1):
            for l in range(lam + 1, n):
                offsets[lam, l] = pos
                pos += 1 << lam
        return offsets, pos

    def coin(self, x: int, l: int) -> int:
        lam = vertex_level(x)
        offsets, _ = self.layout(self.n)
        return int(self.bits[offsets[lam, l] + x - (1 << lam)])


@dataclass(frozen=True, eq=False)
class Coloring:
    n: int
    colors: np.ndarray  # colors[v - 1] is the colour of vertex v
    coins: SplitCoins | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        colors = np.array(self.colors, dtype=np.int64)
        if len(colors) != (1 << self.n) - 1:
            raise ValueError(f"expected {(1 << self.n) - 1} colours, got {len(colors)}")
        if len(colors) and colors.min() < 1:
            raise ValueError("colours are positive integers")
        colors.flags.writeable = False
        object.__setattr__(self, "colors", colors)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Coloring) and self.n == other.n and np.array_equal(self.colors, other.colors)

    def __getitem__(self, v: int) -> int:
        return int(self.colors[v - 1])

    def max_color(self) -> int:
        return int(self.colors.max()) if len(self.colors) else 0

    def color_class(self, c: int) -> TreeSubset:
        return TreeSubset.from_mask(self.colors == c)

    def to_text(self) -> str:
        return f"n={self.n}\n" + " ".join(map(str, self.colors.tolist())) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Coloring:
        lines = text.strip().splitlines()
        if not lines or not lines[0].startswith("n="):
            raise ValueError("colouring file must start with 'n=<depth>'")
        try:
            n = int(lines[0][2:])
            colors = [int(t) for t in " ".join(lines[1:]).split()]
        except ValueError as exc:
            raise ValueError(f"malformed colouring file: {exc}") from None
        return cls(n, np.array(colors, dtype=np.int64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> Coloring:
        return cls.from_text(Path(path).read_text())


def _smallest_missing(forbidden: np.ndarray) -> np.ndarray:
    lowest_zero = ~forbidden & (forbidden + np.uint64(1))
    return np.log2(lowest_zero.astype(np.float64)).astype(np.int64) + 1


def random_split_coloring(n: int, rng: Rng, record: bool = False, eager: bool = False) -> Coloring:
    """Colour T_n breadth first with the smallest colour not yet forbidden.

    After ``x`` at level ``lam`` takes colour ``c``, each deeper level ``l``
    gets a fair coin deciding whether ``c`` is forbidden on the level-``l``
    descendants of the left or of the right child of ``x``.

    The default evaluation reconstructs each vertex's forbidden set from its
    ancestors' coins one level at a time. ``eager=True`` instead pushes every
    forbidden colour into explicit per-vertex sets; both consume the same coins
    and produce the same colouring.
    """
    check_depth(n, MAX_DEPTH)
    if n < 1:
        raise ValueError("depth must be at least 1")
    offsets, total = SplitCoins.layout(n)
    bits = rng.generator().integers(0, 2, size=total, dtype=np.uint8)
    if eager:
        colors = _split_eager(n, bits, offsets)
    elif n <= SCALAR_MAX_DEPTH:
        colors = _split_lazy_scalar(n, bits.tolist(), offsets)
    else:
        colors = _split_lazy(n, bits, offsets)
    return Coloring(n, colors[1:], SplitCoins(n, bits) if record else None)


def _split_lazy(n: int, bits: np.ndarray, offsets: dict) -> np.ndarray:
    colors = np.zeros(1 << n, dtype=np.int64)
    for l in range(n):
        y = np.arange(1 << l, 1 << (l + 1), dtype=np.int64)
        forbidden = np.zeros(len(y), dtype=np.uint64)
        for lam in range(l):
            anc = y >> (l - lam)
            side = (y >> (l - lam - 1)) & 1
            coin = bits[offsets[lam, l] + anc - (1 << lam)]
            bit = np.left_shift(np.uint64(1), (colors[anc] - 1).astype(np.uint64))
            forbidden |= np.where(coin == side, bit, np.uint64(0))
        colors[y] = _smallest_missing(forbidden)
    return colors


def _split_lazy_scalar(n: int, bits: list[int], offsets: dict) -> np.ndarray:
    colors = [0] * (1 << n)
    for l in range(n):
        starts = [offsets[lam, l] - (1 << lam) for lam in range(l)]
        for y in range(1 << l, 1 << (l + 1)):
            forbidden = 0
            for lam in range(l):
                anc = y >> (l - lam)
                if bits[starts[lam] + anc] == (y >> (l - lam - 1)) & 1:
                    forbidden |= 1 << (colors[anc] - 1)
            colors[y] = (~forbidden & (forbidden + 1)).bit_length()
    return np.array(colors, dtype=np.int64)


def _split_eager(n: int, bits: np.ndarray, offsets: dict) -> np.ndarray:
    colors = np.zeros(1 << n, dtype=np.int64)
    forbidden: list[set[int]] = [set() for _ in range(1 << n)]
    for v in range(1, 1 << n):
        c = 1
        while c in forbidden[v]:
            c += 1
        colors[v] = c
        lam = vertex_level(v)
        for l in range(lam + 1, n):
            child = 2 * v + int(bits[offsets[lam, l] + v - (1 << lam)])
            shift = l - lam - 1
            for u in range(child << shift, (child + 1) << shift):
                forbidden[u].add(c)
    return colors


def audit_smallest_color(coloring: Coloring) -> bool:
    """Replay the recorded coins and confirm each vertex got its smallest permitted colour."""
    if coloring.coins is None:
        raise ValueError("colouring was produced without record=True")
    coins = coloring.coins
    for y in range(1, 1 << coloring.n):
        l = vertex_level(y)
        forbidden = set()
        for lam in range(l):
            anc = y >> (l - lam)
            side = (y >> (l - lam - 1)) & 1
            if coins.coin(anc, l) == side:
                forbidden.add(coloring[anc])
        c = coloring[y]
        if c in forbidden or any(c2 not in forbidden for c2 in range(1, c)):
            return False
    return True


# --- random fit -------------------------------------------------------------


@dataclass(frozen=True)
class Decision:
    position: int
    color: int
    p: float  # acceptance probability 2**-m, exact in binary floating point
    accepted: bool


@dataclass(frozen=True)
class FitTrace:
    n: int
    decisions: tuple[Decision, ...]


def random_fit_branch(n: int, rng: Rng | np.random.Generator) -> tuple[list[int], FitTrace]:
    """Colour a branch of ``n`` vertices root first.

    Colours 1, 2, ... are offered in turn; colour ``c`` is accepted with
    probability ``2**-m`` where ``m`` counts earlier vertices coloured ``c``.
    """
    if n < 1:
        raise ValueError("branch length must be positive")
    gen = rng.generator() if isinstance(rng, Rng) else rng
    uses: Counter[int] = Counter()
    colors: list[int] = []
    decisions: list[Decision] = []
    for pos in range(n):
        c = 1
        while True:
            m = uses[c]
            p = math.ldexp(1.0, -m)
            accepted = m == 0 or gen.random() < p
            decisions.append(Decision(pos, c, p, accepted))
            if accepted:
                break
            c += 1
        uses[c] += 1
        colors.append(c)
    return colors, FitTrace(n, tuple(decisions))


def martingale_trace(trace: FitTrace) -> tuple[list[float], float]:
    """The process X_j = X_{j-1} + p_j - [choice j accepted], X_0 = 0.

    Returns ``(X_1 .. X_J, X_J)``; every difference lies in ``(-1, 1]``.
    """
    pos, accepted_here = 0, False
    acceptances = 0
    x = 0.0
    xs = []
    for dec in trace.decisions:
        if dec.position != pos:
            if not accepted_here or dec.position != pos + 1:
                raise ValueError("trace positions must advance one vertex at a time after an acceptance")
            pos, accepted_here = dec.position, False
        elif accepted_here:
            raise ValueError(f"position {pos} has a decision after its acceptance")
        if not 0 < dec.p <= 1:
            raise ValueError(f"acceptance probability {dec.p} out of range")
        x += dec.p - (1.0 if dec.accepted else 0.0)
        xs.append(x)
        if dec.accepted:
            accepted_here = True
            acceptances += 1
    if acceptances != trace.n or (trace.decisions and not accepted_here):
        raise ValueError(f"expected {trace.n} acceptances, got {acceptances}")
    return xs, (xs[-1] if xs else 0.0)


def lemma6_k(n: int) -> int:
    return 2 * math.floor(3 * n / math.log2(n))


@dataclass
class Lemma6Stats:
    n: int
    k: int
    trials: int
    histogram: dict[int, int]
    exceeded: int
    exceed_upper: float  # one-sided Clopper-Pearson upper bound
    martingale_mean: float
    martingale_stderr: float
    rows: list[tuple[int, int, int, int, int]] = field(repr=False, default_factory=list)

    @property
    def exceed_fraction(self) -> float:
        return self.exceeded / self.trials

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["seed", "n", "k", "max_color", "exceeded"])
        out.writerows(self.rows)
        out.writerow(["summary", self.n, self.k, max(self.histogram), self.exceeded])
        return buf.getvalue()


def mc_lemma6(n: int, trials: int, rng: Rng, confidence: float = 0.99) -> Lemma6Stats:
    """Monte Carlo over random fit branches: max colour used against ``k = 2*floor(3n/log2 n)``."""
    if n < 8:
        raise ValueError("the bound is stated for n >= 8")
    if trials < 1:
        raise ValueError("trials must be positive")
    k = lemma6_k(n)
    hist: Counter[int] = Counter()
    rows = []
    finals = np.empty(trials)
    exceeded = 0
    for t in range(trials):
        seed = rng.derive_seed(t)
        colors, trace = random_fit_branch(n, Rng(seed))
        top = max(colors)
        hist[top] += 1
        over = int(top > k)
        exceeded += over
        finals[t] = martingale_trace(trace)[1]
        rows.append((seed, n, k, top, over))
    upper = 1.0 if exceeded == trials else float(stats.beta.ppf(confidence, exceeded + 1, trials - exceeded))
    stderr = float(finals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return Lemma6Stats(n, k, trials, dict(sorted(hist.items())), exceeded, upper,
                       float(finals.mean()), stderr, rows)


# --- monochromatic replicas and constructions ------------------------------


def find_mono_replica(coloring: Coloring, d: int, cap: int = DEFAULT_CAP) -> tuple[int, EmbeddingWitness] | None:
    for c in np.unique(coloring.colors).tolist():
        w = contains_replica(coloring.color_class(c), d, cap)
        if w is not None:
            return c, w
    return None


def block_coloring(base: Coloring, d: int) -> Coloring:
    """Tile T_{(d-1)n'} with copies of a colouring of T_{n'}, band by band."""
    if d < 2:
        raise ValueError("d must be at least 2")
    step = base.n
    n = (d - 1) * step
    check_depth(n, MAX_DEPTH)
    colors = np.empty((1 << n) - 1, dtype=np.int64)
    for l in range(n):
        local = l % step
        v = np.arange(1 << l, 1 << (l + 1), dtype=np.int64)
        local_id = (1 << local) | (v & ((1 << local) - 1))
        colors[v - 1] = base.colors[local_id - 1]
    return Coloring(n, colors)


def band_subtree(coloring: Coloring, root: int, height: int) -> Coloring:
    """The colouring restricted to ``height`` levels below ``root``, re-indexed from 1."""
    colors = []
    for j in range(height):
        colors.extend(coloring.colors[(root << j) - 1 : ((root + 1) << j) - 1].tolist())
    return Coloring(height, np.array(colors))


def find_t2free_coloring(n: int, k: int, rng: Rng, attempts: int = DEFAULT_ATTEMPTS) -> Coloring | None:
    """First random split colouring of T_n using at most ``k`` colours, if any within budget."""
    if attempts < 1:
        raise ValueError("attempts must be positive")
    for a in range(attempts):
        coloring = random_split_coloring(n, rng.split(a))
        if coloring.max_color() <= k:
            return coloring
    return None


def level_coloring(n: int, color_of_level) -> Coloring:
    colors = np.concatenate([[color_of_level(l)] * len(level_range(l)) for l in range(n)]) if n else []
    return Coloring(n, np.array(colors, dtype=np.int64))
