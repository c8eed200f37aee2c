"""Basis of the 0-, 1- and 2-excitation sectors of an N-site spin-1/2 chain.

The conserved-magnetization dynamics used throughout this package never
leaves the span of the vacuum, the N single-flip states and the N(N-1)/2
ordered two-flip states, so this module fixes one deterministic ordering of
those states and provides the index arithmetic everything else relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BasisIndex:
    """A single basis element: the vacuum, one excited site, or a site pair.

    Sites are 1-based; pair sites are strictly ordered ``i < j``.
    """

    kind: str  # "vacuum" | "single" | "pair"
    sites: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "vacuum":
            if self.sites:
                raise ValueError("vacuum carries no sites")
        elif self.kind == "single":
            if len(self.sites) != 1 or self.sites[0] < 1:
                raise ValueError(f"bad single-excitation sites {self.sites}")
        elif self.kind == "pair":
            if len(self.sites) != 2 or not (1 <= self.sites[0] < self.sites[1]):
                raise ValueError(f"pair sites must be ordered, got {self.sites}")
        else:
            raise ValueError(f"unknown basis element kind {self.kind!r}")

    @classmethod
    def vacuum(cls) -> "BasisIndex":
        return cls("vacuum")

    @classmethod
    def single(cls, site: int) -> "BasisIndex":
        return cls("single", (site,))

    @classmethod
    def pair(cls, i: int, j: int) -> "BasisIndex":
        return cls("pair", (i, j))


@dataclass(frozen=True)
class Basis:
    """Ordered excitation basis: vacuum, singles by site, pairs lexicographic.

    The global ordering is position 0 for the vacuum, positions 1..N for the
    single excitations, and positions N+1.. for the pairs in lexicographic
    (i, j) order.  Immutable; safe to share between threads.
    """

    n_sites: int
    pair_i: np.ndarray = field(repr=False)  # 0-based first sites, lex order
    pair_j: np.ndarray = field(repr=False)  # 0-based second sites

    @property
    def dim_one(self) -> int:
        return self.n_sites

    @property
    def dim_two(self) -> int:
        return self.n_sites * (self.n_sites - 1) // 2

    @property
    def dim_total(self) -> int:
        return 1 + self.dim_one + self.dim_two

    def pair_offset(self, i: int, j: int) -> int:
        return pair_offset(self, i, j)

    def pair_at(self, offset: int) -> tuple[int, int]:
        return pair_at(self, offset)

    def element(self, index: int) -> BasisIndex:
        """Basis element at a global (whole-basis) position."""
        if index == 0:
            return BasisIndex.vacuum()
        if index <= self.n_sites:
            return BasisIndex.single(index)
        if index < self.dim_total:
            return BasisIndex.pair(*self.pair_at(index - 1 - self.n_sites))
        raise IndexError(f"basis index {index} out of range 0..{self.dim_total - 1}")

    def global_index(self, element: BasisIndex) -> int:
        """Inverse of :meth:`element`."""
        if element.kind == "vacuum":
            return 0
        if element.kind == "single":
            site = element.sites[0]
            if site > self.n_sites:
                raise IndexError(f"site {site} beyond chain of {self.n_sites}")
            return site
        return 1 + self.n_sites + self.pair_offset(*element.sites)


def build_basis(n_sites: int) -> Basis:
    """Build the excitation basis of an ``n_sites`` chain.

    The total dimension is (N^2 + N + 2) / 2.  Requires ``n_sites >= 2``.
    """
    if n_sites < 2:
        raise ValueError(f"need at least 2 sites, got {n_sites}")
    pi, pj = np.triu_indices(n_sites, k=1)  # row-major == lexicographic
    return Basis(n_sites=n_sites, pair_i=pi, pair_j=pj)


def pair_offset(basis: Basis, i: int, j: int) -> int:
    """Zero-based position of the pair (i, j), 1-based sites with i < j."""
    n = basis.n_sites
    if not (1 <= i < j <= n):
        raise IndexError(f"pair ({i}, {j}) invalid for chain of {n} sites")
    return (i - 1) * n - i * (i + 1) // 2 + j - 1


def pair_at(basis: Basis, offset: int) -> tuple[int, int]:
    """The 1-based ordered site pair stored at a two-excitation offset."""
    if not (0 <= offset < basis.dim_two):
        raise IndexError(f"pair offset {offset} out of range 0..{basis.dim_two - 1}")
    return int(basis.pair_i[offset]) + 1, int(basis.pair_j[offset]) + 1
