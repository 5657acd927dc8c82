"""Synthetic terrain worlds drawn from the spatial topic prior."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .grid import GridWorld, neighborhood_table


@dataclass(frozen=True)
class GenConfig:
    width: int = 32
    height: int = 32
    K: int = 4
    V: int = 200
    alpha: float = 0.01
    beta: float = 0.1
    delta: int = 1
    words_per_cell: int = 50
    seed: int = 0

    def __post_init__(self):
        if min(self.width, self.height, self.K, self.V, self.words_per_cell) < 1:
            raise ValueError("sizes, K, V and words_per_cell must be >= 1")
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be > 0")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)


def sample_dirichlet(dim: int, concentration: float, rng: np.random.Generator) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not concentration > 0:
        raise ValueError("concentration must be > 0")
    if dim == 1:
        return np.ones(1)
    p = rng.dirichlet(np.full(dim, float(concentration)))
    return p / p.sum()


@dataclass
class SampledWorld:
    world: GridWorld
    phi: np.ndarray
    token_labels: list  # per-cell arrays of generating topics

    def __iter__(self):
        # allows ``world, phi = sample_world(cfg)``
        return iter((self.world, self.phi))


def sample_world(cfg: GenConfig) -> SampledWorld:
    """Draw a world: topic emissions, then spatially clustered labels by a
    sequential Polya urn over cells in random order, then words.

    Each label slot in cell ``c`` picks topic ``k`` with weight
    ``(labels already placed in neighborhood(c, delta) with topic k) + alpha``.
    The cell's truth label is its most frequent generating topic.
    """
    rng = np.random.default_rng(cfg.seed)
    n = cfg.width * cfg.height
    per = cfg.words_per_cell
    phi = np.stack([sample_dirichlet(cfg.V, cfg.beta, rng) for _ in range(cfg.K)])

    ptr, idx = neighborhood_table(cfg.width, cfg.height, cfg.delta)
    order = rng.permutation(n).astype(np.int64)
    hist = np.zeros((n, cfg.K), dtype=np.int64)
    labels = np.zeros(n * per, dtype=np.int32)
    u = rng.random(n * per)
    kernels.polya_cells(order, per, hist, labels, ptr, idx, float(cfg.alpha), u)

    words = np.zeros(n * per, dtype=np.int32)
    for k in range(cfg.K):
        sel = labels == k
        words[sel] = rng.choice(cfg.V, size=int(sel.sum()), p=phi[k])

    world = GridWorld(
        cfg.width, cfg.height, cfg.V,
        cells=list(words.reshape(n, per)),
        truth_labels=hist.argmax(axis=1),
    )
    return SampledWorld(world, phi, list(labels.reshape(n, per)))


def _block_hists(token_labels, width: int, height: int, K: int, radius: int = 1):
    """Topic histograms pooled over each cell's (2r+1)^2 block."""
    n = width * height
    hist = np.zeros((n, K), dtype=np.int64)
    for i, labs in enumerate(token_labels):
        hist[i] = np.bincount(np.asarray(labs), minlength=K)
    ptr, idx = neighborhood_table(width, height, radius)
    return np.add.reduceat(hist[idx], ptr[:-1], axis=0)


def neighborhood_entropy(sampled: SampledWorld, K: int, radius: int = 1) -> float:
    """Mean Shannon entropy (nats) of the token-label mix in each cell's block."""
    w = sampled.world
    pooled = _block_hists(sampled.token_labels, w.width, w.height, K, radius).astype(float)
    p = pooled / pooled.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log(p), 0.0).sum(axis=1)
    return float(h.mean())


def block_mixing(sampled: SampledWorld, K: int, radius: int = 1) -> float:
    """Mean number of distinct generating topics present in each cell's block."""
    w = sampled.world
    pooled = _block_hists(sampled.token_labels, w.width, w.height, K, radius)
    return float((pooled > 0).sum(axis=1).mean())
