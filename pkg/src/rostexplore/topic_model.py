"""Realtime online spatial topic model.

Collapsed Gibbs sampling where a word's topic prior is pooled over the
topic counts of its cell's spatial neighborhood, plus the budgeted
refinement schedule that keeps labels current while observations stream in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import neighborhood_table


@dataclass(frozen=True)
class Hyperparams:
    K: int
    V: int
    alpha: float = 0.1
    beta: float = 0.1
    delta: int = 1
    tau: float = 0.5

    def __post_init__(self):
        if self.K < 1 or self.V < 1:
            raise ValueError("K and V must be >= 1")
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be > 0")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must lie in (0, 1]")


def phi_from_counts(nwk: np.ndarray, beta: float) -> np.ndarray:
    V = nwk.shape[1]
    return (nwk + beta) / (nwk.sum(axis=1, keepdims=True) + V * beta)


@dataclass
class ModelSnapshot:
    """Topic-word counts and hyperparameters; what a model file stores."""

    hyper: Hyperparams
    nwk: np.ndarray

    def phi(self) -> np.ndarray:
        return phi_from_counts(self.nwk, self.hyper.beta)


def age_proportional(r: np.ndarray) -> np.ndarray:
    """Map ``r`` uniform on ``[0, T(T+1)/2)`` to ``j`` with ``P(j) = j / sum(1..T)``.

    ``j`` is the smallest integer with ``j(j+1)/2 > r``.
    """
    r = np.asarray(r, dtype=np.int64)
    m = np.floor((np.sqrt(8.0 * r + 1.0) - 1.0) / 2.0).astype(np.int64)
    # float sqrt may be off by one for large r
    m -= (m * (m + 1) // 2 > r)
    m += ((m + 1) * (m + 2) // 2 <= r)
    return m + 1


class TopicModel:
    """Sufficient statistics of the spatial collapsed sampler over a W x H grid.

    Each call to :meth:`observe` stores one timestamped observation (a cell and
    its tokens). Revisiting a cell adds a new observation; all observations at
    a cell share that cell's topic histogram.

    With ``clamped=True`` the topic-word counts are held fixed: sampling only
    moves the per-cell histograms and assignments. This is how a frozen model
    labels a map.
    """

    def __init__(self, hyper: Hyperparams, width: int, height: int,
                 nwk: np.ndarray | None = None, clamped: bool = False):
        self.hyper = hyper
        self.width = int(width)
        self.height = int(height)
        K, V = hyper.K, hyper.V
        if nwk is None:
            self.nwk = np.zeros((K, V), dtype=np.int64)
        else:
            nwk = np.array(nwk, dtype=np.int64)
            if nwk.shape != (K, V):
                raise ValueError(f"nwk shape {nwk.shape} != (K, V) = {(K, V)}")
            self.nwk = nwk
        self.nk = self.nwk.sum(axis=1)
        self.clamped = clamped
        self.hist = np.zeros((self.width * self.height, K), dtype=np.int64)
        self.nbr_ptr, self.nbr_idx = neighborhood_table(self.width, self.height, hyper.delta)

        self._tokens = np.zeros(64, dtype=np.int32)
        self._z = np.zeros(64, dtype=np.int32)
        self._obs_start = np.zeros(65, dtype=np.int64)
        self._obs_cell = np.zeros(64, dtype=np.int64)
        self.n_tokens = 0
        self.T = 0
        self.path_log: list = []

    # -- storage ---------------------------------------------------------

    @property
    def total_words(self) -> int:
        return self.n_tokens

    @property
    def tokens(self) -> np.ndarray:
        return self._tokens[:self.n_tokens]

    @property
    def assignments(self) -> np.ndarray:
        return self._z[:self.n_tokens]

    def _cell_index(self, c) -> int:
        x, y = int(c[0]), int(c[1])
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"cell {(x, y)} outside {self.width}x{self.height} grid")
        return y * self.width + x

    def _append(self, c, tokens) -> int:
        toks = np.asarray(tokens, dtype=np.int32).ravel()
        if toks.size and (toks.min() < 0 or toks.max() >= self.hyper.V):
            raise ValueError("token id out of range [0, V)")
        cell = self._cell_index(c)
        need = self.n_tokens + toks.size
        if need > self._tokens.size:
            cap = max(need, 2 * self._tokens.size)
            self._tokens = np.resize(self._tokens, cap)
            self._z = np.resize(self._z, cap)
        if self.T + 1 >= self._obs_cell.size:
            cap = 2 * self._obs_cell.size
            self._obs_cell = np.resize(self._obs_cell, cap)
            self._obs_start = np.resize(self._obs_start, cap + 1)
        self._tokens[self.n_tokens:need] = toks
        self._z[self.n_tokens:need] = -1
        self._obs_cell[self.T] = cell
        self.n_tokens = need
        self.T += 1
        self._obs_start[self.T] = need
        self.path_log.append((self.T, (int(c[0]), int(c[1]))))
        return self.T

    def observation(self, t: int):
        """(cell coord, tokens, assignments) of the observation at timestamp ``t``."""
        self._check_t(t)
        s, e = self._obs_start[t - 1], self._obs_start[t]
        return self.path_log[t - 1][1], self._tokens[s:e], self._z[s:e]

    def assign(self, t: int, labels) -> None:
        """Overwrite the labels of observation ``t``, keeping all counts consistent."""
        self._check_t(t)
        s, e = self._obs_start[t - 1], self._obs_start[t]
        labels = np.asarray(labels, dtype=np.int32).ravel()
        if labels.size != e - s:
            raise ValueError("one label per token required")
        if labels.size and (labels.min() < 0 or labels.max() >= self.hyper.K):
            raise ValueError("label out of range [0, K)")
        c = self._obs_cell[t - 1]
        toks = self._tokens[s:e]
        for old_or_new, sign in ((self._z[s:e], -1), (labels, 1)):
            live = old_or_new >= 0
            np.add.at(self.hist[c], old_or_new[live], sign)
            if not self.clamped:
                np.add.at(self.nwk, (old_or_new[live], toks[live]), sign)
                np.add.at(self.nk, old_or_new[live], sign)
        self._z[s:e] = labels

    def _check_t(self, t):
        if not 1 <= t <= self.T:
            raise IndexError(f"timestamp {t} outside [1, {self.T}]")

    def _gibbs(self, obs_ids: np.ndarray, rng: np.random.Generator) -> None:
        obs_ids = np.ascontiguousarray(obs_ids, dtype=np.int64)
        sizes = self._obs_start[obs_ids + 1] - self._obs_start[obs_ids]
        u = rng.random(int(sizes.sum()))
        kernels.gibbs_obs(obs_ids, self._obs_start, self._obs_cell, self._tokens,
                          self._z, self.nwk, self.nk, self.hist,
                          self.nbr_ptr, self.nbr_idx,
                          float(self.hyper.alpha), float(self.hyper.beta), u,
                          not self.clamped)

    # -- sampler ---------------------------------------------------------

    def neighborhood_counts(self, c) -> np.ndarray:
        i = self._cell_index(c)
        return self.hist[self.nbr_idx[self.nbr_ptr[i]:self.nbr_ptr[i + 1]]].sum(axis=0)

    def conditional(self, v: int, c, exclude=None) -> np.ndarray:
        """Posterior topic distribution for word ``v`` placed in cell ``c``.

        ``exclude`` is a token handle ``(t, i)``: the ``i``-th token of the
        observation at timestamp ``t``; its counts are left out.
        """
        K, V = self.hyper.K, self.hyper.V
        alpha, beta = self.hyper.alpha, self.hyper.beta
        if not 0 <= v < V:
            raise ValueError(f"word id {v} outside [0, {V})")
        nw = self.nwk[:, v].copy()
        nk = self.nk.copy()
        ng = self.neighborhood_counts(c)
        if exclude is not None:
            t, i = exclude
            self._check_t(t)
            s, e = self._obs_start[t - 1], self._obs_start[t]
            if not 0 <= i < e - s:
                raise IndexError(f"token {i} not in observation {t}")
            k0 = int(self._z[s + i])
            if k0 < 0:
                raise ValueError("token has no topic assignment yet")
            if not self.clamped:
                nk[k0] -= 1
                if self._tokens[s + i] == v:
                    nw[k0] -= 1
            cell = self._obs_cell[t - 1]
            ci = self._cell_index(c)
            if cell in self.nbr_idx[self.nbr_ptr[ci]:self.nbr_ptr[ci + 1]]:
                ng[k0] -= 1
        p = (nw + beta) / (nk + V * beta) * (ng + alpha) / (ng.sum() + K * alpha)
        return p / p.sum()

    def observe(self, c, tokens, rng: np.random.Generator) -> int:
        """Add an observation and seed its labels by sequential conditional draws."""
        t = self._append(c, tokens)
        self._gibbs(np.array([t - 1]), rng)
        return t

    def refine_cell(self, t: int, rng: np.random.Generator) -> None:
        self._check_t(t)
        self._gibbs(np.array([t - 1]), rng)

    def refine_targets(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` refinement timestamps: newest with prob. tau, else age-proportional."""
        if self.T < 1:
            raise RuntimeError("no observations to refine")
        T = self.T
        newest = rng.random(n) < self.hyper.tau
        older = age_proportional(rng.integers(0, T * (T + 1) // 2, size=n))
        return np.where(newest, T, older)

    def refine(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Run ``n`` refinement steps; returns the refined timestamps."""
        targets = self.refine_targets(n, rng)
        self._gibbs(targets - 1, rng)
        return targets

    def refine_step(self, rng: np.random.Generator) -> int:
        return int(self.refine(1, rng)[0])

    def sweep(self, rng: np.random.Generator, iterations: int = 1) -> None:
        """Full sweeps over every stored observation in timestamp order."""
        order = np.arange(self.T, dtype=np.int64)
        for _ in range(iterations):
            self._gibbs(order, rng)

    # -- queries ---------------------------------------------------------

    def phi(self) -> np.ndarray:
        V, beta = self.hyper.V, self.hyper.beta
        return (self.nwk + beta) / (self.nk[:, None] + V * beta)

    def path_topic_dist(self) -> np.ndarray:
        """Topic proportions over all labels observed so far, alpha-smoothed."""
        K, alpha = self.hyper.K, self.hyper.alpha
        m = np.bincount(self.assignments[self.assignments >= 0], minlength=K)
        return (m + alpha) / (m.sum() + K * alpha)

    def word_perplexity(self, tokens) -> float:
        toks = np.asarray(tokens, dtype=np.int64).ravel()
        if toks.size == 0:
            return 1.0
        pw = self.path_topic_dist() @ self.phi()[:, toks]
        return float(np.exp(-np.mean(np.log(pw))))

    def topic_perplexity(self, c, tokens, rng: np.random.Generator, samples: int = 1) -> float:
        """Perplexity of temporary labels drawn for ``tokens`` at ``c``.

        Labels are drawn independently from the current conditional; the model
        is not modified. ``samples`` draws per token are averaged in log space.
        """
        toks = np.asarray(tokens, dtype=np.int64).ravel()
        if toks.size == 0:
            return 1.0
        alpha, beta, V = self.hyper.alpha, self.hyper.beta, self.hyper.V
        ng = self.neighborhood_counts(c)
        p = ((self.nwk[:, toks] + beta) / (self.nk + V * beta)[:, None]
             * (ng + alpha)[:, None])
        cdf = np.cumsum(p, axis=0)
        x = rng.random((samples, toks.size)) * cdf[-1]
        z = np.minimum((cdf[None, :, :] <= x[:, None, :]).sum(axis=1), self.hyper.K - 1)
        logp = np.log(self.path_topic_dist())[z]
        return float(np.exp(-logp.mean()))

    def modal_labels(self) -> np.ndarray:
        """Most frequent topic per cell (lowest id on ties; 0 for empty cells)."""
        return self.hist.argmax(axis=1)

    def snapshot(self) -> ModelSnapshot:
        return ModelSnapshot(self.hyper, self.nwk.copy())

    def check_invariants(self) -> None:
        z = self.assignments
        assert (z >= 0).all()
        assert (self.hist >= 0).all()
        cells = np.repeat(self._obs_cell[:self.T], np.diff(self._obs_start[:self.T + 1]))
        hist = np.zeros_like(self.hist)
        np.add.at(hist, (cells, z), 1)
        assert np.array_equal(hist, self.hist)
        if not self.clamped:
            assert np.array_equal(self.nk, self.nwk.sum(axis=1))
            nwk = np.zeros_like(self.nwk)
            np.add.at(nwk, (z, self.tokens), 1)
            assert np.array_equal(nwk, self.nwk)
