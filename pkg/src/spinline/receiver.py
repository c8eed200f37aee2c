"""Sender parametrization, initial product states, and the receiver's
reduced density matrix with its eigen-decomposition.

A two-qubit sender holds a normalized superposition of its ground state and
its two one-excitation states,

    a0 = sin(alpha1 pi/2),
    a1 = cos(alpha1 pi/2) cos(alpha2 pi/2) exp(2 pi i phi1),
    a2 = cos(alpha1 pi/2) sin(alpha2 pi/2) exp(2 pi i phi2),

with all four angles in [0, 1].  The receiver's 2x2 state is factorized as
U diag(lam, 1-lam) U+ where the unitary U is parametrized by (beta1, beta2);
the two valid (lam, beta1, beta2) representations are related by
``swap_branch`` and selected by a :class:`BranchPolicy`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .basis import Basis
from .evolution import (
    BlockPropagator,
    StateVector,
    propagator_columns,
    zero_state,
)
from .layout import CouplingLayout

#: Placeholder for a sender resting in its ground state.
GROUND = None

_DEGENERACY_TOL = 1e-14


def _sin_half(x: float) -> float:
    # sin(pi x / 2), exact at the endpoints so that alpha = 0, 1 produce
    # exact zeros (a sender with alpha1 = 1 must equal the ground state)
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    return math.sin(0.5 * math.pi * x)


def _cos_half(x: float) -> float:
    if x == 0.0:
        return 1.0
    if x == 1.0:
        return 0.0
    return math.cos(0.5 * math.pi * x)


def _phase(phi: float) -> complex:
    return 1.0 + 0.0j if phi == 0.0 else cmath.exp(2j * math.pi * phi)


@dataclass(frozen=True)
class SenderAngles:
    """The (alpha1, alpha2, phi1, phi2) parametrization of one sender."""

    alpha1: float
    alpha2: float
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "phi1", "phi2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


def sender_amplitudes(angles: SenderAngles | None) -> tuple[complex, complex, complex]:
    """Amplitudes (a0, a1, a2) of one sender; ``None`` means ground state."""
    if angles is None:
        return 1.0 + 0.0j, 0.0 + 0.0j, 0.0 + 0.0j
    return _raw_amplitudes(angles.alpha1, angles.alpha2, angles.phi1, angles.phi2)


def _raw_amplitudes(alpha1, alpha2, phi1, phi2):
    a0 = complex(_sin_half(alpha1))
    c1 = _cos_half(alpha1)
    a1 = c1 * _cos_half(alpha2) * _phase(phi1)
    a2 = c1 * _sin_half(alpha2) * _phase(phi2)
    return a0, a1, a2


class Scenario(str, enum.Enum):
    IS10 = "IS10"  # sender 2 grounded, phi11 = 0, phi12 free
    IS01 = "IS01"  # sender 1 grounded, all sender-2 phases zero
    IS11 = "IS11"  # both senders active, all phases zero
    IS1 = "IS1"    # sender 1 is the input, sender 2 pinned to its outer site
    IS2 = "IS2"    # sender 1 pinned to (|0> + |1>)/sqrt(2), sender 2 input
    IS3 = "IS3"    # both senders share the same angles


@dataclass(frozen=True)
class InitialStateSpec:
    """Initial states of both senders, optionally tagged with a scenario."""

    sender1: SenderAngles | None
    sender2: SenderAngles | None
    scenario: Scenario | None = None

    def __post_init__(self):
        tag = self.scenario
        if tag is None:
            return
        s1, s2 = self.sender1, self.sender2
        ok = True
        if tag is Scenario.IS10:
            ok = s2 is None and s1 is not None and s1.phi1 == 0.0
        elif tag is Scenario.IS01:
            ok = s1 is None and s2 is not None and s2.phi1 == 0.0 and s2.phi2 == 0.0
        elif tag is Scenario.IS11:
            ok = (s1 is not None and s2 is not None
                  and s1.phi1 == s1.phi2 == s2.phi1 == s2.phi2 == 0.0)
        elif tag is Scenario.IS1:
            ok = (s1 is not None and s1.phi1 == s1.phi2 == 0.0
                  and s2 == SenderAngles(0.0, 0.0))
        elif tag is Scenario.IS2:
            ok = (s1 == SenderAngles(0.5, 0.0)
                  and s2 is not None and s2.phi1 == s2.phi2 == 0.0)
        elif tag is Scenario.IS3:
            ok = (s1 is not None and s2 is not None
                  and s1.alpha1 == s2.alpha1 and s1.alpha2 == s2.alpha2
                  and s1.phi1 == s1.phi2 == s2.phi1 == s2.phi2 == 0.0)
        if not ok:
            raise ValueError(f"sender angles violate the {tag.value} constraints")


def assemble_initial(spec: InitialStateSpec, layout: CouplingLayout,
                     basis: Basis) -> StateVector:
    """Expand the tensor-product initial state over the excitation basis.

    At most nine amplitudes are nonzero: the vacuum, one-excitation terms on
    the four sender sites, and the four cross pairs.
    """
    if basis.n_sites != layout.n_sites:
        raise ValueError("basis and layout disagree on the chain length")
    s1a, s1b = layout.sender1_sites
    s2a, s2b = layout.sender2_sites
    sites = {s1a, s1b, s2a, s2b}
    if len(sites) != 4 or layout.receiver_site in sites:
        raise ValueError("sender sites overlap each other or the receiver")

    a10, a11, a12 = sender_amplitudes(spec.sender1)
    a20, a21, a22 = sender_amplitudes(spec.sender2)

    state = zero_state(basis)
    state.c0 = a10 * a20
    state.singles[s1a - 1] = a11 * a20
    state.singles[s1b - 1] = a12 * a20
    state.singles[s2a - 1] = a10 * a21
    state.singles[s2b - 1] = a10 * a22
    for s1_site, amp1 in ((s1a, a11), (s1b, a12)):
        for s2_site, amp2 in ((s2a, a21), (s2b, a22)):
            off = basis.pair_offset(min(s1_site, s2_site), max(s1_site, s2_site))
            state.pairs[off] = amp1 * amp2
    return state


def reduce_to_receiver(state: StateVector, receiver_site: int,
                       basis: Basis) -> np.ndarray:
    """Receiver's 2x2 density matrix in its (ground, excited) basis."""
    norm = state.norm()
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-6")
    n = basis.n_sites
    if not 1 <= receiver_site <= n:
        raise ValueError(f"receiver site {receiver_site} outside 1..{n}")
    r = receiver_site - 1
    pair_idx = np.array([
        basis.pair_offset(min(k + 1, receiver_site), max(k + 1, receiver_site))
        for k in range(n) if k != r
    ], dtype=int)
    others = np.array([k for k in range(n) if k != r], dtype=int)
    paired = state.pairs[pair_idx]
    rho11 = float(abs(state.singles[r]) ** 2 + np.sum(np.abs(paired) ** 2))
    rho01 = (state.c0 * np.conj(state.singles[r])
             + np.sum(state.singles[others] * np.conj(paired)))
    return np.array([[1.0 - rho11, rho01], [np.conj(rho01), rho11]])


class BranchPolicy(str, enum.Enum):
    """Which of the two equivalent (lam, beta1, beta2) branches is reported."""

    LARGER_FIRST = "larger"      # lam is the larger eigenvalue
    GROUND_ANCHORED = "ground"   # first eigenvector has the larger ground overlap
    EXCITED_ANCHORED = "excited"  # first eigenvector has the larger excited overlap


@dataclass(frozen=True)
class ReceiverState:
    """A receiver density matrix plus its branch-resolved decomposition."""

    rho: np.ndarray
    lam: float
    beta1: float
    beta2: float
    policy: BranchPolicy

    def triple(self) -> tuple[float, float, float]:
        return self.lam, self.beta1, self.beta2


def compose_receiver(lam: float, beta1: float, beta2: float) -> np.ndarray:
    """Rebuild the 2x2 density matrix U diag(lam, 1-lam) U+ from its angles."""
    c = _cos_half(beta1)
    s = _sin_half(beta1)
    ph = _phase(beta2)
    u = np.array([[c, -np.conj(ph) * s], [ph * s, c]])
    return (u * np.array([lam, 1.0 - lam])) @ u.conj().T


def _angles_from_vector(vec: np.ndarray) -> tuple[float, float]:
    """(beta1, beta2) of an eigenvector, upper entry made real nonnegative."""
    v0, v1 = complex(vec[0]), complex(vec[1])
    m0 = abs(v0)
    if m0 > 0.0:
        g = v0.conjugate() / m0
        v0, v1 = m0, v1 * g
    beta1 = 2.0 / math.pi * math.atan2(abs(v1), m0)
    if abs(v1) == 0.0 or m0 == 0.0:
        return beta1, 0.0
    return beta1, cmath.phase(v1) / (2.0 * math.pi) % 1.0


def decompose_receiver(rho: np.ndarray,
                       policy: BranchPolicy = BranchPolicy.LARGER_FIRST) -> ReceiverState:
    """Extract (lam, beta1, beta2) from a 2x2 density matrix.

    Branch selection: LARGER_FIRST puts the larger eigenvalue in lam (an
    exact tie is broken toward beta1 <= 1/2); GROUND_ANCHORED (resp.
    EXCITED_ANCHORED) leads with the eigenvector of larger ground (excited)
    overlap, falling back to LARGER_FIRST on an exact overlap tie.  For a
    degenerate matrix or beta1 in {0, 1} the phase beta2 is fixed to 0.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-6:
        raise ValueError("density matrix is not Hermitian within 1e-6")
    tr = float(rho.trace().real)
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {tr} deviates from 1 beyond 1e-6")
    herm = 0.5 * (rho + rho.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    if vals[0] < -1e-6:
        raise ValueError(f"density matrix has negative eigenvalue {vals[0]}")
    vals = np.clip(vals, 0.0, 1.0)
    lo, hi = (vals[0], vecs[:, 0]), (vals[1], vecs[:, 1])
    degenerate = abs(vals[1] - vals[0]) <= _DEGENERACY_TOL

    if policy is BranchPolicy.LARGER_FIRST:
        first = hi
        if degenerate:
            b1_hi = _angles_from_vector(hi[1])[0]
            b1_lo = _angles_from_vector(lo[1])[0]
            first = hi if b1_hi <= b1_lo else lo
    elif policy is BranchPolicy.GROUND_ANCHORED:
        # overlap tie falls back to the larger eigenvalue
        first = lo if abs(lo[1][0]) - abs(hi[1][0]) > _DEGENERACY_TOL else hi
    elif policy is BranchPolicy.EXCITED_ANCHORED:
        first = lo if abs(lo[1][1]) - abs(hi[1][1]) > _DEGENERACY_TOL else hi
    else:
        raise ValueError(f"unknown branch policy {policy!r}")

    lam = float(first[0])
    beta1, beta2 = _angles_from_vector(first[1])
    if degenerate:
        beta2 = 0.0
    return ReceiverState(rho=rho, lam=lam, beta1=beta1, beta2=beta2, policy=policy)


def swap_branch(lam: float, beta1: float, beta2: float) -> tuple[float, float, float]:
    """The other valid representation of the same density matrix; an involution."""
    return 1.0 - lam, 1.0 - beta1, (beta2 + 0.5) % 1.0


class ReceiverMap:
    """Sender angles -> receiver state at one fixed readout time.

    Precomputes the few propagator entries a product initial state can ever
    reach, so each evaluation costs O(N) instead of a sector-sized matrix
    product.  The two-excitation slice is built only when a state actually
    populates pairs.  Instances are immutable after first use and safe to
    share across threads.
    """

    def __init__(self, layout: CouplingLayout, basis: Basis,
                 prop: BlockPropagator, t: float):
        if basis.n_sites != layout.n_sites or prop.n_sites != layout.n_sites:
            raise ValueError("layout, basis and propagator sizes disagree")
        self.layout = layout
        self.basis = basis
        self.prop = prop
        self.t = float(t)
        s1a, s1b = layout.sender1_sites
        s2a, s2b = layout.sender2_sites
        r = layout.receiver_site
        if len({s1a, s1b, s2a, s2b}) != 4 or r in {s1a, s1b, s2a, s2b}:
            raise ValueError("sender sites overlap each other or the receiver")
        self._r = r - 1
        cols = np.array([s1a - 1, s1b - 1, s2a - 1, s2b - 1])
        self._u1 = propagator_columns(prop.eigvals1, prop.eigvecs1, self.t, cols)
        self._others = np.array([k for k in range(layout.n_sites) if k != self._r])
        self._pair_cols = np.array([
            basis.pair_offset(min(a, b), max(a, b))
            for a in (s1a, s1b) for b in (s2a, s2b)
        ])
        self._pair_rows = np.array([
            basis.pair_offset(min(k + 1, r), max(k + 1, r)) for k in self._others
        ])
        self._u2 = None

    def _u2_slice(self) -> np.ndarray:
        if self._u2 is None:
            self._u2 = propagator_columns(
                self.prop.eigvals2, self.prop.eigvecs2, self.t,
                self._pair_cols, rows=self._pair_rows)
        return self._u2

    def rho_from_raw(self, a1: tuple[complex, complex, complex],
                     a2: tuple[complex, complex, complex]) -> np.ndarray:
        """Receiver matrix from raw sender amplitude triples (unvalidated)."""
        a10, a11, a12 = a1
        a20, a21, a22 = a2
        v = np.array([a11 * a20, a12 * a20, a10 * a21, a10 * a22])
        singles = self._u1 @ v
        cr = singles[self._r]
        rho11 = abs(cr) ** 2
        rho01 = a10 * a20 * np.conj(cr)
        if a21 != 0 or a22 != 0:
            w = np.array([a11 * a21, a11 * a22, a12 * a21, a12 * a22])
            if w.any():
                paired = self._u2_slice() @ w
                rho11 += float(np.sum(np.abs(paired) ** 2))
                rho01 += np.sum(singles[self._others] * np.conj(paired))
        return np.array([[1.0 - rho11, rho01], [np.conj(rho01), rho11]])

    def rho(self, spec: InitialStateSpec) -> np.ndarray:
        return self.rho_from_raw(sender_amplitudes(spec.sender1),
                                 sender_amplitudes(spec.sender2))

    def state(self, spec: InitialStateSpec,
              policy: BranchPolicy = BranchPolicy.LARGER_FIRST) -> ReceiverState:
        return decompose_receiver(self.rho(spec), policy)
