"""Command-line interface: gen, explore, batch, label, eval, sweep."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__, io, kernels
from .evaluation import LabelMap, batch_label, entropy, label_with_model, mutual_information, sweep
from .explorer import Policy, explore
from .generative import GenConfig, sample_world
from .topic_model import Hyperparams

PRNG = "numpy.random.PCG64"


_OUTPUTS = {"func", "command", "out", "truth", "out_path", "out_model", "out_labels"}


def _provenance(command: str, args: argparse.Namespace) -> list:
    """Resolved config lines; input files by base name, outputs omitted."""
    cfg = {"command": command, "rostexplore": __version__,
           "prng": f"{PRNG}/numpy-{np.__version__}"}
    for k, v in sorted(vars(args).items()):
        if k in _OUTPUTS:
            continue
        if k in ("world", "model", "a", "b") and v:
            v = [os.path.basename(x) for x in v] if isinstance(v, list) else os.path.basename(v)
        cfg[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    return io.format_config(cfg)


def _hyper(args, V: int) -> Hyperparams:
    return Hyperparams(K=args.topics, V=V, alpha=args.alpha, beta=args.beta,
                       delta=args.delta, tau=args.tau)


def _add_hyper(p, topics_required=True):
    p.add_argument("-K", "--topics", type=int, required=topics_required, default=None,
                   help="number of topics (K)")
    p.add_argument("--alpha", type=float, default=0.1,
                   help="Dirichlet concentration of neighborhood topic mixtures (α)")
    p.add_argument("--beta", type=float, default=0.1,
                   help="Dirichlet concentration of topic word distributions (β)")
    p.add_argument("--delta", type=int, default=1,
                   help="neighborhood radius in cells for the topic prior (δ)")
    p.add_argument("--tau", type=float, default=0.5,
                   help="probability of refining the newest observation (τ)")


def _int_list(s: str) -> list:
    return [int(x) for x in s.split(",") if x]


def _str_list(s: str) -> list:
    return [x for x in s.split(",") if x]


# -- subcommands ----------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = GenConfig(width=args.width, height=args.height, K=args.topics, V=args.vocab,
                    alpha=args.alpha, beta=args.beta, delta=args.delta,
                    words_per_cell=args.words_per_cell, seed=args.seed)
    sw = sample_world(cfg)
    meta = _provenance("gen", args)
    io.save_wordmap(args.out, sw.world, meta)
    if args.truth:
        truth = LabelMap(cfg.width, cfg.height, sw.world.truth_labels)
        io.save_labelmap(args.truth, truth, K=cfg.K, comments=meta)
    print(f"wrote {args.out}" + (f" and {args.truth}" if args.truth else ""))
    return 0


def cmd_explore(args) -> int:
    world, _ = io.load_wordmap(args.world)
    hyper = _hyper(args, world.vocab_size)
    path, model = explore(world, args.policy, args.steps, hyper,
                          refine_budget=args.refine_budget, seed=args.seed,
                          topic_samples=args.topic_samples)
    meta = _provenance("explore", args)
    if args.out_path:
        io.save_path(args.out_path, path, meta)
    if args.out_model:
        io.save_model(args.out_model, model, meta)
    if args.out_labels:
        zp = label_with_model(world, model, hyper, iterations=args.label_iterations, seed=args.seed)
        io.save_labelmap(args.out_labels, zp, K=hyper.K, comments=meta)
    print(f"explored {len(path)} steps, {model.total_words} words, "
          f"{int((path.visit_counts > 0).sum())} distinct cells")
    return 0


def cmd_batch(args) -> int:
    world, _ = io.load_wordmap(args.world)
    hyper = _hyper(args, world.vocab_size)
    labels, model = batch_label(world, hyper, iterations=args.iterations, seed=args.seed)
    meta = _provenance("batch", args)
    io.save_labelmap(args.out_labels, labels, K=hyper.K, comments=meta)
    if args.out_model:
        io.save_model(args.out_model, model, meta)
    print(f"wrote {args.out_labels}")
    return 0


def cmd_label(args) -> int:
    world, _ = io.load_wordmap(args.world)
    snap, _ = io.load_model(args.model)
    if snap.hyper.V != world.vocab_size:
        raise ValueError(f"model vocabulary {snap.hyper.V} != world vocabulary {world.vocab_size}")
    labels = label_with_model(world, snap, iterations=args.iterations, seed=args.seed)
    io.save_labelmap(args.out_labels, labels, K=snap.hyper.K, comments=_provenance("label", args))
    print(f"wrote {args.out_labels}")
    return 0


def cmd_eval(args) -> int:
    a, _, _ = io.load_labelmap(args.a)
    b, _, _ = io.load_labelmap(args.b)
    mi = mutual_information(a, b)
    ha, hb = entropy(a), entropy(b)
    print(f"MI(a;b) = {mi!r} bits")
    print(f"H(a)    = {ha!r} bits")
    print(f"H(b)    = {hb!r} bits")
    print(f"mi_bits={mi!r} h_a_bits={ha!r} h_b_bits={hb!r}")
    return 0


def cmd_sweep(args) -> int:
    worlds = []
    if args.world:
        if len(args.truth or []) != len(args.world):
            raise ValueError("give one --truth label map per --world")
        for wpath, tpath in zip(args.world, args.truth):
            world, _ = io.load_wordmap(wpath)
            truth, _, _ = io.load_labelmap(tpath)
            if (truth.width, truth.height) != (world.width, world.height):
                raise ValueError(f"{tpath} does not match {wpath} in size")
            world.truth_labels = truth.labels
            worlds.append((os.path.basename(wpath), world))
    for i in range(args.gen_worlds):
        cfg = GenConfig(width=args.gen_width, height=args.gen_height, K=args.gen_topics,
                        V=args.gen_vocab, alpha=args.gen_alpha, beta=args.gen_beta,
                        delta=args.gen_delta, words_per_cell=args.gen_words_per_cell,
                        seed=args.seed + i)
        worlds.append((f"gen{i}", sample_world(cfg).world))
    if not worlds:
        raise ValueError("no worlds: pass --world/--truth or --gen-worlds")
    V = {w.vocab_size for _, w in worlds}
    if len(V) != 1:
        raise ValueError("all worlds must share one vocabulary size")
    hyper = _hyper(args, V.pop())
    policies = [Policy.parse(p) for p in args.policies]
    rows = sweep(worlds, policies, args.lengths, args.restarts, hyper, seed=args.seed,
                 refine_budget=args.refine_budget, label_iterations=args.label_iterations,
                 batch_iterations=args.batch_iterations, topic_samples=args.topic_samples,
                 workers=args.workers)
    text = io.dumps_results(rows, _provenance("sweep", args), wall_clock=not args.no_wall_clock)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rostexplore", description=__doc__)
    ap.add_argument("--backend", choices=sorted(kernels.BACKENDS),
                    help="kernel implementation (default: compiled when built)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a synthetic world and its truth labels")
    p.add_argument("--width", type=int, default=32, help="world width in cells (W)")
    p.add_argument("--height", type=int, default=32, help="world height in cells (H)")
    p.add_argument("-K", "--topics", type=int, default=4, help="generating topics (K)")
    p.add_argument("--vocab", type=int, default=200, help="vocabulary size (V)")
    p.add_argument("--alpha", type=float, default=0.01, help="label clustering concentration (α)")
    p.add_argument("--beta", type=float, default=0.1, help="topic word concentration (β)")
    p.add_argument("--delta", type=int, default=1, help="neighborhood radius (δ)")
    p.add_argument("--words-per-cell", type=int, default=50, help="tokens per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="word map output file")
    p.add_argument("--truth", help="truth label map output file (PGM)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("explore", help="run one curiosity-driven exploration episode")
    p.add_argument("--world", required=True, help="word map file")
    p.add_argument("--policy", default="topic",
                   help="random | coverage | word | topic")
    p.add_argument("--steps", type=int, default=64, help="path length in steps")
    _add_hyper(p)
    p.add_argument("--refine-budget", type=int, default=200,
                   help="refinement steps per simulation step")
    p.add_argument("--topic-samples", type=int, default=1,
                   help="label draws per token for topic perplexity")
    p.add_argument("--label-iterations", type=int, default=50,
                   help="sweeps when labeling the map with the learned model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-path", help="path CSV (t,x,y)")
    p.add_argument("--out-model", help="model snapshot file")
    p.add_argument("--out-labels", help="map labels from the learned model (PGM)")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("batch", help="label the whole map with batch Gibbs sampling")
    p.add_argument("--world", required=True)
    _add_hyper(p)
    p.add_argument("--iterations", type=int, default=500, help="full Gibbs sweeps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-model")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("label", help="label a map with a frozen model snapshot")
    p.add_argument("--world", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="mutual information and entropies of two label maps")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="policies x path lengths x restarts experiment")
    p.add_argument("--world", action="append", help="word map (repeatable)")
    p.add_argument("--truth", action="append", help="truth PGM for each --world")
    p.add_argument("--gen-worlds", type=int, default=0, help="also generate this many worlds")
    p.add_argument("--gen-width", type=int, default=64)
    p.add_argument("--gen-height", type=int, default=64)
    p.add_argument("--gen-topics", type=int, default=8)
    p.add_argument("--gen-vocab", type=int, default=200)
    p.add_argument("--gen-alpha", type=float, default=0.01)
    p.add_argument("--gen-beta", type=float, default=0.1)
    p.add_argument("--gen-delta", type=int, default=3)
    p.add_argument("--gen-words-per-cell", type=int, default=20)
    p.add_argument("--policies", type=_str_list, default=["random", "coverage", "word", "topic"],
                   help="comma-separated policy names")
    p.add_argument("--lengths", type=_int_list, default=[64], help="comma-separated path lengths")
    p.add_argument("--restarts", type=int, default=20, help="random restarts per case")
    _add_hyper(p)
    p.add_argument("--refine-budget", type=int, default=200)
    p.add_argument("--topic-samples", type=int, default=1)
    p.add_argument("--label-iterations", type=int, default=50)
    p.add_argument("--batch-iterations", type=int, default=500)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-wall-clock", action="store_true",
                   help="write wall_ms as 0 for byte-reproducible output")
    p.add_argument("--out", default="-", help="results CSV (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.backend:
        kernels.use(args.backend)
    backend = args.backend
    del args.backend, args.verbose
    try:
        return args.func(args)
    except (ValueError, IndexError, OSError) as exc:
        print(f"rostexplore {args.command}: error: {exc}", file=sys.stderr)
        return 2
    finally:
        if backend:
            kernels.use("compiled" if "compiled" in kernels.BACKENDS else "python")


if __name__ == "__main__":
    sys.exit(main())
