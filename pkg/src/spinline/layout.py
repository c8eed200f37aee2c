"""Chain topologies and their Hamiltonian blocks in the excitation basis.

All lines are open nearest-neighbor XY chains.  A bond of strength D
contributes a hopping element D/2 between the basis states that differ by
moving one excitation across that bond; the bulk strength is 1 in
dimensionless time.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .basis import Basis, build_basis


class Topology(str, enum.Enum):
    SINGLE_CHANNEL = "single_channel"
    ASYMMETRIC = "asymmetric"
    SYMMETRIC = "symmetric"
    MINIMAL5 = "minimal5"


@dataclass(frozen=True)
class CouplingLayout:
    """A weighted open chain with designated sender and receiver sites.

    ``bonds`` holds (i, i+1, strength) triples, 1-based, one per
    nearest-neighbor link.  ``sender1_sites`` / ``sender2_sites`` list each
    two-qubit sender's sites in the order their superposition amplitudes
    apply (outermost site first for sender 2).
    """

    n_sites: int
    bonds: tuple[tuple[int, int, float], ...]
    receiver_site: int
    sender1_sites: tuple[int, int]
    sender2_sites: tuple[int, int]
    topology: Topology
    n1: int
    deltas: tuple[float | None, float | None, float | None]

    def __post_init__(self):
        n = self.n_sites
        if len(self.bonds) != n - 1:
            raise ValueError(f"expected {n - 1} bonds, got {len(self.bonds)}")
        for k, (i, j, w) in enumerate(self.bonds):
            if (i, j) != (k + 1, k + 2):
                raise ValueError(f"bond {k} is ({i},{j}), not nearest-neighbor")
            if not np.isfinite(w):
                raise ValueError(f"bond ({i},{j}) has non-finite strength {w}")
        for s in (self.receiver_site, *self.sender1_sites, *self.sender2_sites):
            if not (1 <= s <= n):
                raise ValueError(f"site {s} outside chain of {n} sites")

    def bond_strength(self, i: int, j: int) -> float:
        """Strength of the bond between adjacent sites i and j (any order)."""
        lo, hi = min(i, j), max(i, j)
        if hi != lo + 1 or not (1 <= lo < self.n_sites):
            raise ValueError(f"({i},{j}) is not a nearest-neighbor bond")
        return self.bonds[lo - 1][2]

    def strength_array(self) -> np.ndarray:
        return np.array([w for _, _, w in self.bonds])

    def fingerprint(self) -> str:
        """Content hash used to key propagator caches."""
        doc = layout_to_json(self)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class HamiltonianBlocks:
    """Dense symmetric one- and two-excitation blocks of the XY Hamiltonian."""

    h1: np.ndarray  # (N, N)
    h2: np.ndarray  # (d2, d2)
    fingerprint: str


def _weights(n_sites: int) -> list[float]:
    return [1.0] * (n_sites - 1)


def _make(weights, receiver, s1, s2, topology, n1, deltas) -> CouplingLayout:
    bonds = tuple((k + 1, k + 2, float(w)) for k, w in enumerate(weights))
    return CouplingLayout(
        n_sites=len(weights) + 1,
        bonds=bonds,
        receiver_site=receiver,
        sender1_sites=s1,
        sender2_sites=s2,
        topology=topology,
        n1=n1,
        deltas=deltas,
    )


def layout_asymmetric(n1: int, delta1: float, delta2: float, delta3: float) -> CouplingLayout:
    """Two n1-site channels joined end to end; the receiver is the last node
    of the first channel.  delta1/delta2 sit on the two outermost bond pairs
    of each channel and delta3 on the inter-channel link."""
    if n1 < 6:
        raise ValueError(f"asymmetric line needs n1 >= 6, got {n1}")
    w = _weights(2 * n1)
    for left in (1, n1 - 1, n1 + 1, 2 * n1 - 1):
        w[left - 1] = delta1
    for left in (2, n1 - 2, n1 + 2, 2 * n1 - 2):
        w[left - 1] = delta2
    w[n1 - 1] = delta3
    return _make(w, n1, (1, 2), (2 * n1, 2 * n1 - 1),
                 Topology.ASYMMETRIC, n1, (delta1, delta2, delta3))


def layout_symmetric(n1: int, delta1: float, delta2: float, delta3: float) -> CouplingLayout:
    """Two n1-site channels with the receiver inserted between them
    (2*n1 + 1 sites total); delta3 sits on both links to the receiver."""
    if n1 < 6:
        raise ValueError(f"symmetric line needs n1 >= 6, got {n1}")
    w = _weights(2 * n1 + 1)
    for left in (1, n1 - 1, n1 + 2, 2 * n1):
        w[left - 1] = delta1
    for left in (2, n1 - 2, n1 + 3, 2 * n1 - 1):
        w[left - 1] = delta2
    w[n1 - 1] = delta3
    w[n1] = delta3
    return _make(w, n1 + 1, (1, 2), (2 * n1 + 1, 2 * n1),
                 Topology.SYMMETRIC, n1, (delta1, delta2, delta3))


def layout_minimal5(delta3: float) -> CouplingLayout:
    """The 5-site line: both senders couple straight to the central receiver
    through delta3 bonds, outer bonds at unit strength."""
    if not delta3 > 0:
        raise ValueError(f"delta3 must be positive, got {delta3}")
    w = [1.0, delta3, delta3, 1.0]
    return _make(w, 3, (1, 2), (5, 4), Topology.MINIMAL5, 2, (None, None, delta3))


def layout_single_channel(n1: int, delta1: float, delta2: float) -> CouplingLayout:
    """One n1-site channel with two adjusted bond pairs at each end; used as
    the building block when optimizing end-to-end transfer."""
    if n1 < 6:
        raise ValueError(f"channel needs n1 >= 6, got {n1}")
    w = _weights(n1)
    w[0] = w[n1 - 2] = delta1
    w[1] = w[n1 - 3] = delta2
    return _make(w, n1, (1, 2), (n1, n1 - 1),
                 Topology.SINGLE_CHANNEL, n1, (delta1, delta2, None))


def assemble_blocks(layout: CouplingLayout, basis: Basis) -> HamiltonianBlocks:
    """Hamiltonian blocks of the layout in the excitation basis.

    One-excitation block: h1[i, j] = strength(i, j)/2 on bonds, zero
    elsewhere.  Two-excitation block: pairs differing in exactly one site
    couple with strength/2 of the bond joining the differing sites.  Both
    blocks are exactly symmetric; sectors never mix.
    """
    n = layout.n_sites
    if basis.n_sites != n:
        raise ValueError(f"basis is for {basis.n_sites} sites, layout has {n}")
    h1 = np.zeros((n, n))
    for i, j, w in layout.bonds:
        h1[i - 1, j - 1] = h1[j - 1, i - 1] = w / 2.0

    d2 = basis.dim_two
    h2 = np.zeros((d2, d2))
    for i, j, w in layout.bonds:
        for k in range(1, n + 1):
            if k == i or k == j:
                continue
            p = basis.pair_offset(min(k, i), max(k, i))
            q = basis.pair_offset(min(k, j), max(k, j))
            h2[p, q] = h2[q, p] = w / 2.0
    return HamiltonianBlocks(h1=h1, h2=h2, fingerprint=layout.fingerprint())


def layout_to_json(layout: CouplingLayout) -> dict:
    """Portable JSON document for a layout."""
    return {
        "topology": layout.topology.value,
        "n1": layout.n1,
        "deltas": list(layout.deltas),
        "bonds": [[i, j, w] for i, j, w in layout.bonds],
        "receiver": layout.receiver_site,
        "senders": [list(layout.sender1_sites), list(layout.sender2_sites)],
    }


def layout_from_json(doc: dict) -> CouplingLayout:
    deltas = doc["deltas"]
    return CouplingLayout(
        n_sites=len(doc["bonds"]) + 1,
        bonds=tuple((int(i), int(j), float(w)) for i, j, w in doc["bonds"]),
        receiver_site=int(doc["receiver"]),
        sender1_sites=tuple(int(s) for s in doc["senders"][0]),
        sender2_sites=tuple(int(s) for s in doc["senders"][1]),
        topology=Topology(doc["topology"]),
        n1=int(doc["n1"]),
        deltas=tuple(None if d is None else float(d) for d in deltas),
    )


@dataclass(frozen=True)
class Preset:
    """A named channel-parameter set with its readout time."""

    name: str
    topology: Topology
    n1: int
    delta1: float | None
    delta2: float | None
    delta3: float
    t0: float

    def build(self) -> CouplingLayout:
        if self.topology is Topology.MINIMAL5:
            return layout_minimal5(self.delta3)
        if self.topology is Topology.ASYMMETRIC:
            return layout_asymmetric(self.n1, self.delta1, self.delta2, self.delta3)
        if self.topology is Topology.SYMMETRIC:
            return layout_symmetric(self.n1, self.delta1, self.delta2, self.delta3)
        raise ValueError(f"preset topology {self.topology} has no builder")


PRESETS: dict[str, Preset] = {
    "asym-n20": Preset("asym-n20", Topology.ASYMMETRIC, 20, 0.550, 0.817, 0.28, 28.0),
    "asym-n60": Preset("asym-n60", Topology.ASYMMETRIC, 60, 0.414, 0.720, 0.20, 72.45),
    "sym-n20": Preset("sym-n20", Topology.SYMMETRIC, 20, 0.550, 0.817, 0.318, 29.190),
    "minimal5": Preset("minimal5", Topology.MINIMAL5, 2, None, None, 0.707, 4.443),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None
