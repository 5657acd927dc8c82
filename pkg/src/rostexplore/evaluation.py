"""Map labeling with batch and frozen models, MI scoring, and experiment sweeps."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .explorer import Policy, explore
from .grid import GridWorld
from .topic_model import Hyperparams, TopicModel

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["world_id", "policy", "length", "restart_seed",
                  "mi_vs_truth_bits", "mi_vs_batch_bits", "h_truth_bits", "wall_ms"]


@dataclass
class LabelMap:
    width: int
    height: int
    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.labels.size != self.width * self.height:
            raise ValueError("label count must equal width * height")
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("labels must be >= 0")

    def __eq__(self, other):
        return (isinstance(other, LabelMap) and self.width == other.width
                and self.height == other.height and np.array_equal(self.labels, other.labels))


def _entropy_from_counts(counts) -> float:
    # sorted so the result depends only on the multiset of counts
    c = np.sort(np.asarray(counts, dtype=np.float64).ravel())
    c = c[c > 0]
    n = c.sum()
    if n == 0:
        return 0.0
    p = c / n
    return float(-np.sum(p * np.log2(p)))


def _as_labels(a) -> np.ndarray:
    return a.labels if isinstance(a, LabelMap) else np.asarray(a, dtype=np.int64).ravel()


def entropy(a) -> float:
    """Shannon entropy (bits) of the label histogram."""
    _, counts = np.unique(_as_labels(a), return_counts=True)
    return _entropy_from_counts(counts)


def mutual_information(a, b) -> float:
    """Mutual information (bits) between two labelings of the same cells.

    Computed as H(a) + H(b) - H(a, b) over count multisets, which makes
    MI(x, x) == H(x), symmetry and relabeling invariance exact in floating point.
    """
    if isinstance(a, LabelMap) and isinstance(b, LabelMap):
        if (a.width, a.height) != (b.width, b.height):
            raise ValueError("label maps differ in dimensions")
    la, lb = _as_labels(a), _as_labels(b)
    if la.shape != lb.shape:
        raise ValueError("label maps differ in size")
    if la.size == 0:
        return 0.0
    _, ca = np.unique(la, return_counts=True)
    _, cb = np.unique(lb, return_counts=True)
    _, cab = np.unique(np.stack([la, lb]), axis=1, return_counts=True)
    ha, hb = _entropy_from_counts(ca), _entropy_from_counts(cb)
    mi = ha + hb - _entropy_from_counts(cab)
    return float(min(max(mi, 0.0), ha, hb))


def _world_model(world: GridWorld, hyper: Hyperparams, nwk=None, clamped=False) -> TopicModel:
    if hyper.V != world.vocab_size:
        raise ValueError(f"hyper.V={hyper.V} but world vocabulary is {world.vocab_size}")
    model = TopicModel(hyper, world.width, world.height, nwk=nwk, clamped=clamped)
    for i, toks in enumerate(world.cells):
        model._append(world.coord(i), toks)
    return model


def batch_label(world: GridWorld, hyper: Hyperparams, iterations: int = 500, seed: int = 0):
    """Gibbs-label the whole map with random access to every cell.

    The first sweep seeds labels sequentially from the conditional; later
    sweeps resample every token. Returns (modal LabelMap, model).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    model = _world_model(world, hyper)
    model.sweep(np.random.default_rng(seed), iterations)
    return LabelMap(world.width, world.height, model.modal_labels()), model


def label_with_model(world: GridWorld, frozen, hyper: Hyperparams | None = None,
                     iterations: int = 50, seed: int = 0) -> LabelMap:
    """Label every cell using ``frozen``'s topic-word counts, held fixed.

    ``frozen`` is a TopicModel or ModelSnapshot; it is never modified.
    """
    hyper = frozen.hyper if hyper is None else hyper
    if frozen.nwk.shape != (hyper.K, hyper.V):
        raise ValueError(f"model is K x V = {frozen.nwk.shape}, hyper expects {(hyper.K, hyper.V)}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    model = _world_model(world, hyper, nwk=frozen.nwk, clamped=True)
    model.sweep(np.random.default_rng(seed), iterations)
    return LabelMap(world.width, world.height, model.modal_labels())


def _derived_seed(*parts) -> int:
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def restart_seed(seed: int, world_index: int, restart: int) -> int:
    return _derived_seed(seed, world_index, 0, restart)


def batch_seed(seed: int, world_index: int) -> int:
    return _derived_seed(seed, world_index, 1)


def _run_one(args):
    (world_id, world, truth, batch_map, policy, length, rseed,
     hyper, refine_budget, label_iterations, topic_samples) = args
    t0 = time.perf_counter()
    row = {"world_id": world_id, "policy": Policy.parse(policy).value, "length": length,
           "restart_seed": rseed, "h_truth_bits": entropy(truth)}
    try:
        _, model = explore(world, policy, length, hyper, refine_budget=refine_budget,
                           seed=rseed, topic_samples=topic_samples)
        zp = label_with_model(world, model, hyper, iterations=label_iterations, seed=rseed)
        row["mi_vs_truth_bits"] = mutual_information(zp, truth)
        row["mi_vs_batch_bits"] = mutual_information(zp, batch_map)
    except Exception as exc:  # recorded per row, sweep continues
        log.warning("run %s failed: %s", row, exc)
        row["mi_vs_truth_bits"] = math.nan
        row["mi_vs_batch_bits"] = math.nan
    row["wall_ms"] = (time.perf_counter() - t0) * 1e3
    return row


def sweep(worlds, policies, lengths, restarts: int, hyper: Hyperparams, seed: int = 0,
          refine_budget: int = 200, label_iterations: int = 50,
          batch_iterations: int = 500, topic_samples: int = 1, workers: int = 1) -> list:
    """Explore every (world, policy, length, restart) and score the learned map.

    ``worlds`` holds GridWorlds with truth labels, or ``(world_id, world)``
    pairs. A restart's seed depends only on (seed, world, restart), so all
    policies and lengths start from the same cell. Rows come back sorted by
    (world_id, policy, length, restart_seed) whatever the worker count.
    """
    items = [w if isinstance(w, tuple) else (i, w) for i, w in enumerate(worlds)]
    tasks = []
    for wi, (world_id, world) in enumerate(items):
        if world.truth_labels is None:
            raise ValueError(f"world {world_id} has no truth labels")
        truth = LabelMap(world.width, world.height, world.truth_labels)
        batch_map, _ = batch_label(world, hyper, batch_iterations,
                                   seed=batch_seed(seed, wi))
        for policy in policies:
            for length in lengths:
                for r in range(restarts):
                    tasks.append((world_id, world, truth, batch_map, policy, int(length),
                                  restart_seed(seed, wi, r), hyper, refine_budget,
                                  label_iterations, topic_samples))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_run_one, tasks))
    else:
        rows = [_run_one(t) for t in tasks]
    rows.sort(key=lambda r: (str(r["world_id"]), r["policy"], r["length"], r["restart_seed"]))
    return rows
