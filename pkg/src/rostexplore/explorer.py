"""Curiosity-driven path planning on the grid."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .grid import CellCoord, GridWorld
from .topic_model import Hyperparams, TopicModel


class Policy(str, enum.Enum):
    RANDOM_WALK = "random"
    STOCHASTIC_COVERAGE = "coverage"
    WORD_PERPLEXITY = "word"
    TOPIC_PERPLEXITY = "topic"

    @classmethod
    def parse(cls, name) -> "Policy":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "random": cls.RANDOM_WALK, "random_walk": cls.RANDOM_WALK, "randomwalk": cls.RANDOM_WALK,
            "coverage": cls.STOCHASTIC_COVERAGE, "stochastic_coverage": cls.STOCHASTIC_COVERAGE,
            "stochasticcoverage": cls.STOCHASTIC_COVERAGE,
            "word": cls.WORD_PERPLEXITY, "word_perplexity": cls.WORD_PERPLEXITY,
            "wordperplexity": cls.WORD_PERPLEXITY,
            "topic": cls.TOPIC_PERPLEXITY, "topic_perplexity": cls.TOPIC_PERPLEXITY,
            "topicperplexity": cls.TOPIC_PERPLEXITY,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown policy {name!r}") from None


@dataclass
class Path:
    width: int
    height: int
    steps: list = field(default_factory=list)
    visit_counts: np.ndarray = None

    def __post_init__(self):
        if self.visit_counts is None:
            self.visit_counts = np.zeros(self.width * self.height, dtype=np.int64)

    def add(self, c) -> int:
        t = len(self.steps) + 1
        c = CellCoord(int(c[0]), int(c[1]))
        self.steps.append((t, c))
        self.visit_counts[c.y * self.width + c.x] += 1
        return t

    @property
    def cells(self) -> list:
        return [c for _, c in self.steps]

    def __len__(self):
        return len(self.steps)

    def potential(self, g) -> float:
        """Repulsion of ``g`` from visited cells: sum n_j / (|g - c_j|^2 + 1).

        1.0 before anything has been visited.
        """
        visited = np.flatnonzero(self.visit_counts)
        if visited.size == 0:
            return 1.0
        xs = visited % self.width
        ys = visited // self.width
        d2 = (xs - g[0]) ** 2 + (ys - g[1]) ** 2
        return float(np.sum(self.visit_counts[visited] / (d2 + 1.0)))


def step_weights(policy, path: Path, model: TopicModel, world: GridWorld, current,
                 rng: np.random.Generator, topic_samples: int = 1):
    """Candidate next cells and their unnormalized selection weights."""
    policy = Policy.parse(policy)
    candidates = world.movement_neighbors(current)
    if not candidates:
        raise ValueError("current cell has no movement neighbors")
    if policy is Policy.RANDOM_WALK:
        return candidates, np.ones(len(candidates))
    w = np.empty(len(candidates))
    for i, g in enumerate(candidates):
        if policy is Policy.STOCHASTIC_COVERAGE:
            score = 1.0
        elif policy is Policy.WORD_PERPLEXITY:
            score = model.word_perplexity(world.tokens(g))
        else:
            score = model.topic_perplexity(g, world.tokens(g), rng, samples=topic_samples)
        w[i] = score / path.potential(g)
    return candidates, w


def choose_step(candidates, weights, rng: np.random.Generator) -> CellCoord:
    """Pick a candidate with probability proportional to its weight."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(candidates),):
        raise ValueError("one weight per candidate required")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and non-negative")
    cdf = np.cumsum(w)
    if cdf[-1] <= 0:
        cdf = np.arange(1.0, len(w) + 1.0)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return candidates[min(i, len(candidates) - 1)]


def explore(world: GridWorld, policy, steps: int, hyper: Hyperparams,
            refine_budget: int = 200, seed: int = 0, start=None,
            topic_samples: int = 1):
    """Run one exploration episode.

    Per step: observe the current cell's words, run ``refine_budget``
    refinement steps, then score the 4-neighbors and move. The start cell is
    the first draw from the seeded generator unless given, so runs that share
    a seed share a start across policies.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if hyper.V != world.vocab_size:
        raise ValueError(f"hyper.V={hyper.V} but world vocabulary is {world.vocab_size}")
    policy = Policy.parse(policy)
    rng = np.random.default_rng(seed)
    first = int(rng.integers(world.n_cells))
    current = world.coord(first) if start is None else CellCoord(int(start[0]), int(start[1]))
    if not world.in_bounds(current):
        raise IndexError(f"start {tuple(current)} out of bounds")

    model = TopicModel(hyper, world.width, world.height)
    path = Path(world.width, world.height)
    for s in range(steps):
        path.add(current)
        model.observe(current, world.tokens(current), rng)
        if refine_budget > 0:
            model.refine(refine_budget, rng)
        if s + 1 < steps:
            cands, w = step_weights(policy, path, model, world, current, rng, topic_samples)
            current = choose_step(cands, w, rng)
    return path, model
