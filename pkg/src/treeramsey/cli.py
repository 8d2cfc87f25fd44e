"""Command line front end: ``treeramsey <command> [options]``.

Every command prints one verdict line on stdout (uppercase keyword first).
Exit status: 0 for any answer (including ``NONE``), 1 when a ``verify-*``
command finds a violation, 2 for usage or input errors, 3 when a size cap is
hit.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import coloring as col
from . import density, experiments, oracle, sary, signatures
from .tree import InvalidVertexError, ResourceLimitError, TreeSubset, set_weight

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    n: int | None = None
    d: int | None = None
    k: int | None = None
    s: int | None = None
    l: int | None = None
    p: float | None = None
    delta: float | None = None
    epsilon: float | None = None
    seed: int | None = None
    trials: int | None = None
    attempts: int = col.DEFAULT_ATTEMPTS
    levels: str | None = None
    weight: str | None = None
    d_max: int = 10
    k_max: int = 64
    subset_file: str | None = None
    coloring_file: str | None = None
    tree_file: str | None = None
    out: str | None = None
    csv: str | None = None
    eager: bool = False

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> ExperimentConfig:
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(ns).items() if k in names})

    def need(self, *names: str):
        missing = [f"--{n.replace('_', '-')}" for n in names if getattr(self, n) is None]
        if missing:
            raise UsageError(f"{self.command} requires {', '.join(missing)}")
        values = tuple(getattr(self, n) for n in names)
        return values[0] if len(values) == 1 else values

    def rng(self) -> col.Rng:
        return col.Rng(self.need("seed"))


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _subset(cfg: ExperimentConfig) -> TreeSubset:
    return TreeSubset.load(cfg.need("subset_file"))


def _levels(text: str) -> int:
    return signatures.mask_of(int(t) for t in text.split(",") if t.strip())


def _positive(cfg: ExperimentConfig, *names: str) -> None:
    for name in names:
        value = getattr(cfg, name)
        if value is not None and value < 1:
            raise UsageError(f"--{name} must be positive")


def cmd_weight(cfg):
    w = set_weight(_subset(cfg))
    return f"WEIGHT {w} ({float(w):.6f})"


def cmd_signatures(cfg):
    family = signatures.signature_set(_subset(cfg))
    listing = "\n".join(",".join(map(str, signatures.levels_of(m))) for m in family.by_decreasing_size())
    _write(cfg.out, listing + "\n")
    return f"SIGNATURES count={len(family)} max_depth={family.max_size()}"


def cmd_max_depth(cfg):
    return f"MAX_DEPTH {signatures.max_replica_depth(_subset(cfg))}"


def cmd_extract(cfg):
    H = _subset(cfg)
    target = _levels(cfg.need("levels"))
    try:
        w = signatures.extract_replica(H, target)
    except signatures.NoWitnessError:
        return "NONE"
    _write(cfg.out, w.to_text())
    return f"WITNESS d={w.d} signature={cfg.levels}"


def cmd_random_subset(cfg):
    n, p = cfg.need("n", "p")
    H = TreeSubset.random(n, p, cfg.rng().generator())
    _write(cfg.out, H.to_text())
    return f"SUBSET n={n} size={len(H)} weight={set_weight(H)}"


def cmd_random_split(cfg):
    c = col.random_split_coloring(cfg.need("n"), cfg.rng(), eager=cfg.eager)
    _write(cfg.out, c.to_text())
    return f"COLORING n={c.n} max_color={c.max_color()}"


def cmd_random_fit(cfg):
    colors, trace = col.random_fit_branch(cfg.need("n"), cfg.rng())
    _, final = col.martingale_trace(trace)
    return f"BRANCH colors={','.join(map(str, colors))} choices={len(trace.decisions)} X_final={final:.6f}"


def cmd_mono_replica(cfg):
    c = col.Coloring.load(cfg.need("coloring_file"))
    hit = col.find_mono_replica(c, cfg.need("d"))
    if hit is None:
        return "NONE"
    color, w = hit
    _write(cfg.out, w.to_text())
    return f"MONO_REPLICA color={color} d={w.d} signature={','.join(map(str, signatures.levels_of(w.signature)))}"


def cmd_t2free(cfg):
    n, k = cfg.need("n", "k")
    c = col.find_t2free_coloring(n, k, cfg.rng(), cfg.attempts)
    if c is None:
        return "NONE"
    _write(cfg.out, c.to_text())
    return f"T2FREE n={n} max_color={c.max_color()}"


def cmd_block_color(cfg):
    base = col.Coloring.load(cfg.need("coloring_file"))
    c = col.block_coloring(base, cfg.need("d"))
    _write(cfg.out, c.to_text())
    return f"BLOCK n={c.n} max_color={c.max_color()}"


def cmd_mc_lemma6(cfg):
    n, trials = cfg.need("n", "trials")
    st = col.mc_lemma6(n, trials, cfg.rng())
    _write(cfg.csv, st.to_csv())
    return (f"LEMMA6 n={n} k={st.k} exceeded={st.exceeded}/{trials} upper={st.exceed_upper:.3g} "
            f"X_mean={st.martingale_mean:.4f} X_se={st.martingale_stderr:.4f}")


def cmd_entropy(cfg):
    if cfg.epsilon is not None:
        return f"ENTROPY h={density.binary_entropy(cfg.epsilon):.12f}"
    if cfg.delta is not None:
        return f"INV_ENTROPY eps={density.inv_entropy(cfg.delta):.12f}"
    raise UsageError("entropy requires --epsilon or --delta")


def cmd_chernoff(cfg):
    r = density.chernoff_check(*cfg.need("n", "epsilon"))
    word = "HOLDS" if r.holds else "FAILS"
    return f"CHERNOFF {word} n={r.n} d={r.d} log2_sum={np.log2(float(r.total)):.6f} bound={r.bound_log2:.6f}"


def cmd_arith_replica(cfg):
    H = _subset(cfg)
    l = cfg.need("l")
    if cfg.delta is not None:
        w = set_weight(H)
        print(f"# w(H)={float(w):.6f} delta*n={cfg.delta * H.depth:.6f} "
              f"replica depth floor(h^-1(delta)n)={density.theorem_b_depth(H.depth, cfg.delta)}",
              file=sys.stderr)
    w = density.arithmetic_replica(H, l)
    if w is None:
        return "NONE"
    _write(cfg.out, w.to_text())
    ap = density.longest_ap(signatures.levels_of(w.signature))
    return f"ARITHMETIC_REPLICA a={ap.a} b={ap.b} l={w.d}"


def _sary_subset(cfg) -> sary.SaryTreeSubset:
    n, s, p = cfg.need("n", "s", "p")
    return sary.SaryTreeSubset.random(n, s, p, cfg.rng().generator())


def cmd_sary_weight(cfg):
    return f"SARY_WEIGHT {sary.sary_weight(_sary_subset(cfg))}"


def cmd_sary_signatures(cfg):
    H = _sary_subset(cfg)
    fam = sary.sary_signature_set(H)
    wsum = sary.weighted_signature_count(fam, H.s)
    return f"SARY_SIGNATURES count={len(fam)} weighted={wsum} max_depth={fam.max_size()}"


def cmd_sary_check(cfg):
    n, d, s, w = cfg.need("n", "d", "s", "weight")
    verdict = sary.theorem1prime_check(n, d, s, Fraction(w))
    return f"THEOREM1PRIME {'TRUE' if verdict else 'FALSE'} n={n} d={d} s={s} w={w}"


def cmd_random_tree(cfg):
    s, n = cfg.need("s", "n")
    T = sary.random_general_tree(s, n, cfg.rng().generator())
    _write(cfg.out, T.to_text())
    return f"TREE s={s} n={n} vertices={len(T.children)} leaves={T.leaf_count}"


def cmd_gmap(cfg):
    T = sary.GeneralTree.load(cfg.need("tree_file"))
    result = sary.gmap_build(T)
    _write(cfg.out, result.H.to_text())
    ok = sary.leafbound_check(T, result, T.s)
    return f"GMAP leaves={T.leaf_count} weight={set_weight(result.H)} leafbound={'OK' if ok else 'VIOLATED'}"


def cmd_theorem2_grid(cfg):
    rows = experiments.theorem2_grid(range(2, cfg.d_max + 1), range(2, cfg.k_max + 1), cfg.rng())
    _write(cfg.csv, experiments.grid_csv(rows))
    bad = sum(not r.consistent for r in rows)
    return f"THEOREM2 {'OK' if not bad else 'FAIL'} {len(rows) - bad}/{len(rows)}"


def cmd_oracle(cfg):
    res = oracle.oracle_enumerate(_subset(cfg), cfg.need("d"))
    sigs = ";".join(",".join(map(str, signatures.levels_of(m))) for m in sorted(res.signatures))
    return f"ORACLE embeddings={len(res.witnesses)} signatures={sigs or '-'}"


def _verdict(report) -> tuple[str, int]:
    return report.verdict(), EXIT_OK if report.ok else EXIT_FAILED


def cmd_verify_lemma3(cfg):
    return _verdict(experiments.verify_lemma3(*cfg.need("n", "trials"), cfg.rng()))


def cmd_verify_theorem1(cfg):
    return _verdict(experiments.verify_theorem1(*cfg.need("n", "d", "trials"), cfg.rng()))


def cmd_verify_lemma4(cfg):
    return _verdict(experiments.verify_lemma4(*cfg.need("n", "trials"), cfg.rng()))


def cmd_verify_oracle(cfg):
    n, trials = cfg.need("n", "trials")
    gen = cfg.rng().generator()
    report = experiments.CheckReport("ORACLE")
    for _ in range(trials):
        H = experiments.random_subset(n, gen)
        report.record(experiments.verify_oracle(H), H)
    return _verdict(report)


def cmd_verify_leafbound(cfg):
    bound, moved = experiments.verify_leafbound(*cfg.need("s", "n", "trials"), cfg.rng())
    ok = bound.ok and moved.ok
    return f"{bound.verdict()} {moved.verdict()}", EXIT_OK if ok else EXIT_FAILED


COMMANDS = {
    "weight": (cmd_weight, ["subset_file"]),
    "signatures": (cmd_signatures, ["subset_file", "out"]),
    "max-depth": (cmd_max_depth, ["subset_file"]),
    "extract": (cmd_extract, ["subset_file", "levels", "out"]),
    "random-subset": (cmd_random_subset, ["n", "p", "seed", "out"]),
    "random-split": (cmd_random_split, ["n", "seed", "out", "eager"]),
    "random-fit": (cmd_random_fit, ["n", "seed"]),
    "mono-replica": (cmd_mono_replica, ["coloring_file", "d", "out"]),
    "t2free": (cmd_t2free, ["n", "k", "seed", "attempts", "out"]),
    "block-color": (cmd_block_color, ["coloring_file", "d", "out"]),
    "mc-lemma6": (cmd_mc_lemma6, ["n", "trials", "seed", "csv"]),
    "entropy": (cmd_entropy, ["epsilon", "delta"]),
    "chernoff": (cmd_chernoff, ["n", "epsilon"]),
    "arith-replica": (cmd_arith_replica, ["subset_file", "l", "delta", "out"]),
    "sary-weight": (cmd_sary_weight, ["n", "s", "p", "seed"]),
    "sary-signatures": (cmd_sary_signatures, ["n", "s", "p", "seed"]),
    "sary-check": (cmd_sary_check, ["n", "d", "s", "weight"]),
    "random-tree": (cmd_random_tree, ["s", "n", "seed", "out"]),
    "gmap": (cmd_gmap, ["tree_file", "out"]),
    "theorem2-grid": (cmd_theorem2_grid, ["d_max", "k_max", "seed", "csv"]),
    "oracle": (cmd_oracle, ["subset_file", "d"]),
    "verify-lemma3": (cmd_verify_lemma3, ["n", "trials", "seed"]),
    "verify-theorem1": (cmd_verify_theorem1, ["n", "d", "trials", "seed"]),
    "verify-lemma4": (cmd_verify_lemma4, ["n", "trials", "seed"]),
    "verify-oracle": (cmd_verify_oracle, ["n", "trials", "seed"]),
    "verify-leafbound": (cmd_verify_leafbound, ["s", "n", "trials", "seed"]),
}

OPTIONS = {
    "n": dict(type=int, help="tree depth / branch length"),
    "d": dict(type=int, help="depth of the embedded tree T_d"),
    "k": dict(type=int, help="number of colours"),
    "s": dict(type=int, help="arity"),
    "l": dict(type=int, help="length of the arithmetic progression"),
    "p": dict(type=float, help="inclusion probability for random subsets"),
    "delta": dict(type=float),
    "epsilon": dict(type=float),
    "seed": dict(type=int, help="required by every randomised command"),
    "trials": dict(type=int),
    "attempts": dict(type=int, default=col.DEFAULT_ATTEMPTS),
    "levels": dict(help="comma-separated signature levels, e.g. 0,2"),
    "weight": dict(help="exact rational weight, e.g. 3/2"),
    "d_max": dict(type=int, default=10),
    "k_max": dict(type=int, default=64),
    "subset_file": dict(),
    "coloring_file": dict(),
    "tree_file": dict(),
    "out": dict(help="write the artifact (witness, colouring, ...) here"),
    "csv": dict(help="write CSV output here"),
    "eager": dict(action="store_true", help="materialise forbidden lists eagerly"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeramsey", description="Ramsey theory for binary trees: experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, opts) in COMMANDS.items():
        sp = sub.add_parser(name, help=(func.__doc__ or "").strip() or None)
        for opt in opts:
            sp.add_argument("--" + opt.replace("_", "-"), dest=opt, **OPTIONS[opt])
    return parser


def run_pipeline(cfg: ExperimentConfig) -> int:
    func, _ = COMMANDS[cfg.command]
    try:
        _positive(cfg, "n", "trials", "attempts", "k", "l")
        result = func(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"RESOURCE_LIMIT {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, InvalidVertexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    line, status = result if isinstance(result, tuple) else (result, EXIT_OK)
    print(line)
    return status


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    return run_pipeline(ExperimentConfig.from_namespace(ns))


if __name__ == "__main__":
    sys.exit(main())
