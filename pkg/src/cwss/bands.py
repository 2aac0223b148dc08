"""Frequency band allocation: contiguous band index sets with usage categories."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class Category(str, Enum):
    """Usage class of an allocated frequency band.

    C1: always occupied, fully used.
    C2: sometimes occupied, fully used when active.
    C3: sometimes occupied, only partially used when active.
    """

    C1 = "C1"
    C2 = "C2"
    C3 = "C3"


@dataclass(frozen=True)
class BandPlan:
    """Partition of a discrete spectrum of length ``n`` into contiguous bands.

    ``edges`` holds the 0-based start of every band plus the final ``n``:
    band ``k`` covers indices ``edges[k] .. edges[k+1]-1``.  Strictly
    increasing edges guarantee that the bands are non-empty and partition
    ``{0, ..., n-1}`` exactly.  ``categories[k]`` tags band ``k``.
    """

    n: int
    edges: tuple[int, ...]
    categories: tuple[Category, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"spectrum length must be positive, got {self.n}")
        if len(self.edges) < 2 or self.edges[0] != 0 or self.edges[-1] != self.n:
            raise ValueError("edges must run from 0 to n inclusive")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError("edges must be strictly increasing (empty band?)")
        if len(self.categories) != len(self.edges) - 1:
            raise ValueError(
                f"got {len(self.categories)} categories for {len(self.edges) - 1} bands"
            )
        object.__setattr__(
            self, "categories", tuple(Category(c) for c in self.categories)
        )

    @property
    def k(self) -> int:
        """Number of bands."""
        return len(self.categories)

    @cached_property
    def starts(self) -> np.ndarray:
        """Band start indices, shape (k,)."""
        return np.asarray(self.edges[:-1], dtype=np.intp)

    @cached_property
    def _band_lookup(self) -> np.ndarray:
        lut = np.empty(self.n, dtype=np.intp)
        for band, (a, b) in enumerate(zip(self.edges, self.edges[1:])):
            lut[a:b] = band
        return lut

    def size(self, band: int) -> int:
        return self.edges[band + 1] - self.edges[band]

    def indices(self, band: int) -> np.ndarray:
        """0-based spectrum indices of one band."""
        return np.arange(self.edges[band], self.edges[band + 1], dtype=np.intp)

    def band_of(self, index: int) -> int:
        """Band containing a spectrum index."""
        return int(self._band_lookup[index])

    def bands_in(self, category: Category) -> tuple[int, ...]:
        cat = Category(category)
        return tuple(k for k, c in enumerate(self.categories) if c is cat)

    def category_members(self, category: Category) -> np.ndarray:
        """All spectrum indices belonging to bands of one category."""
        bands = self.bands_in(category)
        if not bands:
            return np.empty(0, dtype=np.intp)
        return np.concatenate([self.indices(k) for k in bands])

    def boundaries(self) -> tuple[int, ...]:
        """1-based inclusive right end of bands 1..k-1 (the serialized form)."""
        return tuple(self.edges[1:-1])

    @classmethod
    def from_boundaries(cls, n, boundaries, categories) -> "BandPlan":
        """Build from 1-based inclusive band ends, the on-disk representation."""
        edges = (0, *map(int, boundaries), int(n))
        return cls(n=int(n), edges=edges, categories=tuple(categories))

    @classmethod
    def from_sizes(cls, sized_categories) -> "BandPlan":
        """Build from an ordered sequence of (band_size, category) pairs."""
        edges = [0]
        cats = []
        for size, cat in sized_categories:
            if int(size) < 1:
                raise ValueError(f"band size must be positive, got {size}")
            edges.append(edges[-1] + int(size))
            cats.append(Category(cat))
        return cls(n=edges[-1], edges=tuple(edges), categories=tuple(cats))


def default_band_plan() -> BandPlan:
    """Reference 200-bin allocation with 41 bands.

    Two C1 bands of sizes 2 and 3 (5 bins), 33 C2 bands of 5 bins each
    (165 bins) and 6 C3 bands of 5 bins each (30 bins).  After the C1 block
    the C2 and C3 bands alternate until C3 runs out; the remaining C2 bands
    fill the rest.  Only the set structure matters downstream, positions are
    a convention.
    """
    sized = [(2, Category.C1), (3, Category.C1)]
    for _ in range(6):
        sized.append((5, Category.C2))
        sized.append((5, Category.C3))
    sized.extend((5, Category.C2) for _ in range(27))
    return BandPlan.from_sizes(sized)
