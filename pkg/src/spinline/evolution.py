"""Exact time evolution in the excitation sectors via spectral decomposition.

One eigendecomposition per Hamiltonian block is reused for every
(state, time) query.  The two-excitation block is diagonalized lazily the
first time it is needed, since one-sided protocols never populate it.  An
optional on-disk cache keyed by the layout fingerprint avoids recomputing
large decompositions across runs (env var SPINLINE_CACHE_DIR).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import Basis, build_basis
from .layout import CouplingLayout, HamiltonianBlocks, assemble_blocks

CACHE_FORMAT_VERSION = 1
CACHE_ENV_VAR = "SPINLINE_CACHE_DIR"

DEFAULT_UNITARITY_TOL = 1e-10
DEFAULT_RECONSTRUCTION_TOL = 1e-8


@dataclass
class StateVector:
    """Amplitudes over the excitation basis: vacuum, singles, ordered pairs."""

    c0: complex
    singles: np.ndarray
    pairs: np.ndarray

    def norm(self) -> float:
        total = (abs(self.c0) ** 2
                 + float(np.sum(np.abs(self.singles) ** 2))
                 + float(np.sum(np.abs(self.pairs) ** 2)))
        return float(np.sqrt(total))

    def sector_norms(self) -> tuple[float, float, float]:
        return (abs(self.c0),
                float(np.linalg.norm(self.singles)),
                float(np.linalg.norm(self.pairs)))

    def copy(self) -> "StateVector":
        return StateVector(self.c0, self.singles.copy(), self.pairs.copy())


def zero_state(basis: Basis) -> StateVector:
    return StateVector(0.0 + 0.0j,
                       np.zeros(basis.dim_one, dtype=complex),
                       np.zeros(basis.dim_two, dtype=complex))


def vacuum_state(basis: Basis) -> StateVector:
    state = zero_state(basis)
    state.c0 = 1.0 + 0.0j
    return state


def energy_expectation(blocks: HamiltonianBlocks, state: StateVector) -> float:
    """<psi|H|psi>; the vacuum carries zero energy."""
    e1 = np.vdot(state.singles, blocks.h1 @ state.singles)
    e2 = np.vdot(state.pairs, blocks.h2 @ state.pairs)
    return float((e1 + e2).real)


def _fix_gauge(vecs: np.ndarray) -> np.ndarray:
    # make each eigenvector's largest-magnitude entry positive for
    # reproducible output across runs
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _checked_eigh(h: np.ndarray, name: str, unitarity_tol: float,
                  reconstruction_tol: float) -> tuple[np.ndarray, np.ndarray]:
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed on the {name} block: {exc}") from exc
    vecs = _fix_gauge(vecs)
    if h.size:
        gram = vecs.T @ vecs
        err = np.max(np.abs(gram - np.eye(len(vals))))
        if err > unitarity_tol:
            raise RuntimeError(
                f"{name} block eigenvectors not orthonormal (err {err:.3e})")
        recon = np.max(np.abs((vecs * vals) @ vecs.T - h))
        if recon > reconstruction_tol:
            raise RuntimeError(
                f"{name} block reconstruction off by {recon:.3e}")
    return vals, vecs


class BlockPropagator:
    """Spectral data of both Hamiltonian blocks, shared read-only.

    The one-excitation block is decomposed eagerly; the two-excitation block
    on first access through :attr:`eigvals2` / :attr:`eigvecs2`.
    """

    def __init__(self, blocks: HamiltonianBlocks,
                 unitarity_tol: float = DEFAULT_UNITARITY_TOL,
                 reconstruction_tol: float = DEFAULT_RECONSTRUCTION_TOL,
                 cache_dir: str | os.PathLike | None = None):
        self._blocks = blocks
        self._tols = (unitarity_tol, reconstruction_tol)
        self._cache_dir = cache_dir
        self.layout_fingerprint = blocks.fingerprint
        self._eig2: tuple[np.ndarray, np.ndarray] | None = None
        loaded = _cache_load(cache_dir, blocks.fingerprint)
        if loaded is not None:
            self.eigvals1, self.eigvecs1 = loaded[0]
            self._eig2 = loaded[1]
        else:
            self.eigvals1, self.eigvecs1 = _checked_eigh(
                blocks.h1, "one-excitation", *self._tols)
            _cache_store(cache_dir, blocks.fingerprint,
                         (self.eigvals1, self.eigvecs1), self._eig2)

    @property
    def n_sites(self) -> int:
        return self._blocks.h1.shape[0]

    @property
    def dim_two(self) -> int:
        return self._blocks.h2.shape[0]

    def _ensure_two(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig2 is None:
            self._eig2 = _checked_eigh(self._blocks.h2, "two-excitation", *self._tols)
            _cache_store(self._cache_dir, self.layout_fingerprint,
                         (self.eigvals1, self.eigvecs1), self._eig2)
        return self._eig2

    @property
    def eigvals2(self) -> np.ndarray:
        return self._ensure_two()[0]

    @property
    def eigvecs2(self) -> np.ndarray:
        return self._ensure_two()[1]

    @property
    def has_two_excitation_data(self) -> bool:
        return self._eig2 is not None


def diagonalize(blocks: HamiltonianBlocks, *,
                unitarity_tol: float = DEFAULT_UNITARITY_TOL,
                reconstruction_tol: float = DEFAULT_RECONSTRUCTION_TOL,
                cache_dir: str | os.PathLike | None = None) -> BlockPropagator:
    """Diagonalize the Hamiltonian blocks for reuse across times and states.

    ``cache_dir`` (or the SPINLINE_CACHE_DIR environment variable) enables a
    versioned on-disk cache keyed by the layout fingerprint.
    """
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV_VAR) or None
    return BlockPropagator(blocks, unitarity_tol, reconstruction_tol, cache_dir)


def propagator_for(layout: CouplingLayout, basis: Basis | None = None,
                   **kwargs) -> BlockPropagator:
    """Convenience: assemble blocks for a layout and diagonalize them."""
    if basis is None:
        basis = build_basis(layout.n_sites)
    return diagonalize(assemble_blocks(layout, basis), **kwargs)


def evolve(prop: BlockPropagator, state: StateVector, t: float) -> StateVector:
    """Evolve each excitation sector independently to time t (t may be < 0)."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if state.singles.shape[0] != prop.n_sites or state.pairs.shape[0] != prop.dim_two:
        raise ValueError("state dimensions do not match the propagator")
    v1 = prop.eigvecs1
    singles = v1 @ (np.exp(-1j * t * prop.eigvals1) * (v1.T @ state.singles))
    if np.any(state.pairs):
        v2 = prop.eigvecs2
        pairs = v2 @ (np.exp(-1j * t * prop.eigvals2) * (v2.T @ state.pairs))
    else:
        pairs = np.zeros_like(state.pairs)
    return StateVector(c0=state.c0, singles=singles, pairs=pairs)


def one_excitation_propagator(prop: BlockPropagator, t: float) -> np.ndarray:
    """The N x N matrix G(t) = exp(-i h1 t); unitary and complex symmetric."""
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    v1 = prop.eigvecs1
    return (v1 * np.exp(-1j * t * prop.eigvals1)) @ v1.T


def propagator_columns(vals: np.ndarray, vecs: np.ndarray, t: float,
                       cols: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Selected columns (optionally row-sliced) of exp(-i h t) for one block."""
    phased = vecs * np.exp(-1j * t * vals)
    left = phased if rows is None else phased[rows, :]
    return left @ vecs[cols, :].T


def two_excitation_fast(g: np.ndarray, pair_amps: np.ndarray, basis: Basis,
                        layout: CouplingLayout | None = None) -> np.ndarray:
    """Two-excitation evolution from one-excitation data.

    For an open nearest-neighbor chain the pair amplitudes evolve as

        c_ij(t) = sum_{k<l} [G_ik G_jl - G_il G_jk] c_kl(0),

    which this computes directly from the supplied G(t).  Exact only for
    chain layouts (the only ones this package builds).
    """
    if layout is not None:
        for k, (i, j, _) in enumerate(layout.bonds):
            if j != i + 1:
                raise ValueError("determinant fast path needs an open chain")
    n = basis.n_sites
    if g.shape != (n, n) or pair_amps.shape[0] != basis.dim_two:
        raise ValueError("dimension mismatch between G, amplitudes and basis")
    out = np.zeros(basis.dim_two, dtype=complex)
    iu, ju = basis.pair_i, basis.pair_j
    for off in np.nonzero(pair_amps)[0]:
        k, l = int(iu[off]), int(ju[off])
        m = np.outer(g[:, k], g[:, l])
        m -= m.T
        out += pair_amps[off] * m[iu, ju]
    return out


def transfer_probability(layout: CouplingLayout, from_site: int, to_site: int,
                         t: float, prop: BlockPropagator | None = None) -> float:
    """|<to| exp(-i h1 t) |from>|^2 for single-excitation transfer."""
    n = layout.n_sites
    if not (1 <= from_site <= n and 1 <= to_site <= n):
        raise ValueError(f"sites ({from_site}, {to_site}) outside 1..{n}")
    if prop is None:
        prop = propagator_for(layout)
    v1 = prop.eigvecs1
    amp = np.sum(v1[to_site - 1] * v1[from_site - 1]
                 * np.exp(-1j * t * prop.eigvals1))
    return float(abs(amp) ** 2)


def _cache_file(cache_dir, fingerprint: str) -> Path:
    return Path(cache_dir) / f"{fingerprint}.v{CACHE_FORMAT_VERSION}.npz"


def _cache_load(cache_dir, fingerprint: str):
    if cache_dir is None:
        return None
    path = _cache_file(cache_dir, fingerprint)
    if not path.exists():
        return None
    try:
        with np.load(path) as data:
            if str(data["fingerprint"]) != fingerprint:
                return None
            one = (data["eigvals1"], data["eigvecs1"])
            two = None
            if "eigvals2" in data.files:
                two = (data["eigvals2"], data["eigvecs2"])
    except (OSError, ValueError, KeyError):
        return None  # unreadable cache entries are simply recomputed
    return one, two


def _cache_store(cache_dir, fingerprint: str, one, two) -> None:
    if cache_dir is None:
        return
    path = _cache_file(cache_dir, fingerprint)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"fingerprint": fingerprint,
               "eigvals1": one[0], "eigvecs1": one[1]}
    if two is not None:
        payload["eigvals2"] = two[0]
        payload["eigvecs2"] = two[1]
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, **payload)
    os.replace(tmp, path)
