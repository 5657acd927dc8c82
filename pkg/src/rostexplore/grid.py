"""Grid decomposition of the world: cells, connectivity, neighborhoods, word storage."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np


class CellCoord(NamedTuple):
    x: int
    y: int


def distance_sq(a: Sequence[int], b: Sequence[int]) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return float(dx * dx + dy * dy)


@lru_cache(maxsize=64)
def neighborhood_table(width: int, height: int, delta: int):
    """CSR table of Chebyshev neighborhoods for every cell, row-major.

    Returns ``(ptr, idx)``; the neighbors of cell ``i`` are
    ``idx[ptr[i]:ptr[i + 1]]``, sorted ascending and including ``i`` itself.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    ptr = np.zeros(width * height + 1, dtype=np.int64)
    chunks = []
    for y in range(height):
        ys = np.arange(max(0, y - delta), min(height, y + delta + 1))
        for x in range(width):
            xs = np.arange(max(0, x - delta), min(width, x + delta + 1))
            ids = (ys[:, None] * width + xs[None, :]).ravel()
            i = y * width + x
            ptr[i + 1] = ptr[i] + ids.size
            chunks.append(ids)
    idx = np.concatenate(chunks).astype(np.int64) if chunks else np.zeros(0, np.int64)
    ptr.flags.writeable = False
    idx.flags.writeable = False
    return ptr, idx


@dataclass
class GridWorld:
    """W x H lattice of cells, each holding a list of word ids.

    ``cells`` is row-major: cell ``(x, y)`` lives at index ``y * width + x``.
    """

    width: int
    height: int
    vocab_size: int
    cells: list = field(default_factory=list)
    truth_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("world must have at least one cell")
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be >= 1")
        n = self.width * self.height
        if not self.cells:
            self.cells = [np.zeros(0, dtype=np.int32) for _ in range(n)]
        if len(self.cells) != n:
            raise ValueError(f"expected {n} cells, got {len(self.cells)}")
        self.cells = [np.asarray(c, dtype=np.int32) for c in self.cells]
        for toks in self.cells:
            if toks.size and (toks.min() < 0 or toks.max() >= self.vocab_size):
                raise ValueError("token id out of range [0, V)")
        if self.truth_labels is not None:
            self.truth_labels = np.asarray(self.truth_labels, dtype=np.int64)
            if self.truth_labels.shape != (n,):
                raise ValueError("truth_labels must have one entry per cell")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def in_bounds(self, c) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def _check(self, c):
        if not self.in_bounds(c):
            raise IndexError(f"cell {tuple(c)} outside {self.width}x{self.height} world")

    def index(self, c) -> int:
        self._check(c)
        return int(c[1]) * self.width + int(c[0])

    def coord(self, i: int) -> CellCoord:
        return CellCoord(int(i) % self.width, int(i) // self.width)

    def tokens(self, c) -> np.ndarray:
        return self.cells[self.index(c)]

    def movement_neighbors(self, c) -> list:
        """4-connected in-bounds neighbors of ``c`` (never ``c`` itself)."""
        self._check(c)
        x, y = int(c[0]), int(c[1])
        out = []
        for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < self.width and 0 <= ny < self.height:
                out.append(CellCoord(nx, ny))
        return out

    def neighborhood(self, c, delta: int) -> set:
        """All in-bounds cells within Chebyshev distance ``delta`` of ``c``."""
        self._check(c)
        if delta < 0:
            raise ValueError("delta must be >= 0")
        x, y = int(c[0]), int(c[1])
        return {
            CellCoord(nx, ny)
            for ny in range(max(0, y - delta), min(self.height, y + delta + 1))
            for nx in range(max(0, x - delta), min(self.width, x + delta + 1))
        }

    @property
    def total_tokens(self) -> int:
        return int(sum(c.size for c in self.cells))
