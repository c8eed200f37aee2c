import numpy as np
import pytest

import fullspace
from chains import chain_layout, mirror_state, random_state
from spinline.basis import build_basis
from spinline.evolution import (
    StateVector,
    diagonalize,
    energy_expectation,
    evolve,
    one_excitation_propagator,
    propagator_for,
    transfer_probability,
    two_excitation_fast,
    vacuum_state,
    zero_state,
)
from spinline.layout import (
    assemble_blocks,
    layout_asymmetric,
    layout_minimal5,
    layout_single_channel,
    layout_symmetric,
)

RT2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def two_site():
    lay = chain_layout([1.0])
    basis = build_basis(2)
    return lay, basis, propagator_for(lay, basis)


def test_two_site_spectrum(two_site):
    _, _, prop = two_site
    assert np.allclose(np.sort(prop.eigvals1), [-0.5, 0.5])


def test_minimal5_spectrum_from_parity_split():
    # even-parity sector is a uniform 3-chain, odd-parity a 2-chain
    prop = propagator_for(layout_minimal5(1 / RT2))
    expected = np.array([-RT2 / 2, -0.5, 0.0, 0.5, RT2 / 2])
    assert np.allclose(np.sort(prop.eigvals1), expected, atol=1e-12)


@pytest.mark.parametrize("lay", [
    layout_minimal5(0.3),
    layout_single_channel(9, 0.5, 0.8),
    layout_asymmetric(6, 0.55, 0.82, 0.28),
])
def test_spectral_invariants(lay):
    basis = build_basis(lay.n_sites)
    blocks = assemble_blocks(lay, basis)
    prop = diagonalize(blocks)
    assert abs(np.sum(prop.eigvals1)) < 1e-10  # traceless block
    assert abs(np.sum(prop.eigvals2)) < 1e-9
    for vals, vecs, h in [(prop.eigvals1, prop.eigvecs1, blocks.h1),
                          (prop.eigvals2, prop.eigvecs2, blocks.h2)]:
        assert np.max(np.abs(vecs.T @ vecs - np.eye(len(vals)))) <= 1e-10
        assert np.max(np.abs((vecs * vals) @ vecs.T - h)) <= 1e-8
        # sign convention: the largest-magnitude entry of each column is positive
        picks = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(len(vals))]
        assert np.all(picks > 0)


def test_evolve_identity_at_t0():
    lay = layout_minimal5(0.7)
    basis = build_basis(5)
    prop = propagator_for(lay, basis)
    rng = np.random.default_rng(7)
    psi = random_state(basis, rng)
    out = evolve(prop, psi, 0.0)
    assert out.c0 == psi.c0
    assert np.allclose(out.singles, psi.singles, atol=1e-13)
    assert np.allclose(out.pairs, psi.pairs, atol=1e-13)


def test_two_site_rabi_flip(two_site):
    _, basis, prop = two_site
    psi = zero_state(basis)
    psi.singles[0] = 1.0
    out = evolve(prop, psi, np.pi)
    assert abs(out.singles[1]) == pytest.approx(1.0, abs=1e-12)
    # |<2|psi(t)>|^2 = sin^2(t/2) for the uniform two-site chain
    for t in [0.3, 1.1, 2.5]:
        out = evolve(prop, psi, t)
        assert abs(out.singles[1]) ** 2 == pytest.approx(np.sin(t / 2) ** 2, abs=1e-12)


def test_vacuum_is_stationary():
    basis = build_basis(8)
    prop = propagator_for(layout_single_channel(8, 0.4, 0.9), basis)
    out = evolve(prop, vacuum_state(basis), 17.3)
    assert out.c0 == 1.0 + 0.0j
    assert np.all(out.singles == 0) and np.all(out.pairs == 0)


def test_dimension_mismatch_rejected():
    prop = propagator_for(layout_minimal5(0.7))
    with pytest.raises(ValueError):
        evolve(prop, vacuum_state(build_basis(6)), 1.0)
    with pytest.raises(ValueError):
        evolve(prop, vacuum_state(build_basis(5)), np.inf)


@pytest.mark.parametrize("lay", [
    layout_minimal5(0.707),
    layout_single_channel(10, 0.55, 0.82),
    layout_symmetric(6, 0.55, 0.82, 0.32),
])
def test_unitarity_and_conservation(lay):
    basis = build_basis(lay.n_sites)
    blocks = assemble_blocks(lay, basis)
    prop = diagonalize(blocks)
    rng = np.random.default_rng(11)
    for _ in range(20):
        psi = random_state(basis, rng)
        t = rng.uniform(0.0, 100.0)
        out = evolve(prop, psi, t)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)
        # sectors never mix: each sector norm is conserved separately
        for a, b in zip(out.sector_norms(), psi.sector_norms()):
            assert a == pytest.approx(b, abs=1e-10)
        assert energy_expectation(blocks, out) == pytest.approx(
            energy_expectation(blocks, psi), abs=1e-8)


@pytest.mark.parametrize("lay", [
    layout_minimal5(0.707),
    layout_single_channel(8, 0.41, 0.83),
    layout_single_channel(10, 0.55, 0.82),
])
def test_against_full_space_propagation(lay):
    basis = build_basis(lay.n_sites)
    prop = propagator_for(lay, basis)
    rng = np.random.default_rng(3)
    for t in [0.7, 4.4, 19.0]:
        psi = random_state(basis, rng)
        ours = evolve(prop, psi, t)
        ref = fullspace.project_state(
            fullspace.evolve_full(lay, fullspace.embed_state(psi, basis), t),
            basis, StateVector)
        assert abs(ours.c0 - ref.c0) < 1e-8
        assert np.allclose(ours.singles, ref.singles, atol=1e-8)
        assert np.allclose(ours.pairs, ref.pairs, atol=1e-8)


def test_one_excitation_propagator_properties(two_site):
    lay, basis, prop2 = two_site
    g0 = one_excitation_propagator(prop2, 0.0)
    assert np.allclose(g0, np.eye(2), atol=1e-14)
    g = one_excitation_propagator(prop2, np.pi)
    assert abs(g[1, 0]) == pytest.approx(1.0, abs=1e-12)

    prop = propagator_for(layout_single_channel(9, 0.4, 0.7))
    for t in [0.9, 13.7]:
        g = one_excitation_propagator(prop, t)
        assert np.max(np.abs(g @ g.conj().T - np.eye(9))) < 1e-10
        gm = one_excitation_propagator(prop, -t)
        assert np.max(np.abs(gm - g.conj().T)) < 1e-12


def test_fast_path_identity():
    basis = build_basis(6)
    prop = propagator_for(layout_single_channel(6, 0.7, 0.9), basis)
    g0 = one_excitation_propagator(prop, 0.0)
    amps = np.zeros(basis.dim_two, dtype=complex)
    amps[3] = 0.6
    amps[10] = 0.8j
    assert np.allclose(two_excitation_fast(g0, amps, basis), amps, atol=1e-12)


@pytest.mark.parametrize("n", [4, 6, 9, 12])
def test_fast_path_matches_dense_evolution(n):
    rng = np.random.default_rng(n)
    basis = build_basis(n)
    lay = chain_layout(rng.uniform(0.2, 1.0, size=n - 1))
    prop = propagator_for(lay, basis)
    for _ in range(25):
        psi = zero_state(basis)
        # both sparse sender-style and fully dense pair content
        if rng.random() < 0.5:
            idx = rng.choice(basis.dim_two, size=min(4, basis.dim_two), replace=False)
            psi.pairs[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
        else:
            psi.pairs[:] = rng.normal(size=basis.dim_two) \
                + 1j * rng.normal(size=basis.dim_two)
        psi.pairs /= np.linalg.norm(psi.pairs)
        t = rng.uniform(0.0, 40.0)
        dense = evolve(prop, psi, t).pairs
        fast = two_excitation_fast(
            one_excitation_propagator(prop, t), psi.pairs, basis, layout=lay)
        assert np.max(np.abs(dense - fast)) < 1e-10
        assert np.linalg.norm(fast) == pytest.approx(1.0, abs=1e-10)


def test_uniform_two_site_transfer(two_site):
    lay, _, prop = two_site
    assert transfer_probability(lay, 1, 2, np.pi, prop) == pytest.approx(1.0, abs=1e-12)
    assert transfer_probability(lay, 1, 1, 0.0, prop) == pytest.approx(1.0)


def test_minimal5_transfer_closed_form():
    lay = layout_minimal5(1 / RT2)
    prop = propagator_for(lay)
    # parity split gives |<3|U(t)|1>|^2 = (1 - cos(t/sqrt(2)))^2 / 8
    for t in [0.0, 1.0, 2.2, np.pi * RT2, 7.5]:
        expected = (1 - np.cos(t / RT2)) ** 2 / 8
        assert transfer_probability(lay, 1, 3, t, prop) == pytest.approx(
            expected, abs=1e-12)
    assert transfer_probability(lay, 1, 3, np.pi * RT2, prop) == pytest.approx(0.5)


def test_transfer_site_validation():
    lay = layout_minimal5(0.7)
    with pytest.raises(ValueError):
        transfer_probability(lay, 0, 3, 1.0)
    with pytest.raises(ValueError):
        transfer_probability(lay, 1, 6, 1.0)


@pytest.mark.parametrize("lay", [
    layout_symmetric(6, 0.55, 0.82, 0.32),
    layout_minimal5(0.707),
])
def test_mirror_covariance(lay):
    basis = build_basis(lay.n_sites)
    prop = propagator_for(lay, basis)
    rng = np.random.default_rng(23)
    for t in [0.8, 12.0]:
        psi = random_state(basis, rng)
        a = mirror_state(evolve(prop, psi, t), basis)
        b = evolve(prop, mirror_state(psi, basis), t)
        assert np.max(np.abs(a.singles - b.singles)) < 1e-12
        assert np.max(np.abs(a.pairs - b.pairs)) < 1e-12


def test_disk_cache_roundtrip(tmp_path):
    lay = layout_minimal5(0.8)
    basis = build_basis(5)
    blocks = assemble_blocks(lay, basis)
    first = diagonalize(blocks, cache_dir=tmp_path)
    _ = first.eigvals2  # force the lazy block, which updates the cache file
    files = list(tmp_path.glob("*.npz"))
    assert len(files) == 1

    again = diagonalize(blocks, cache_dir=tmp_path)
    assert again.has_two_excitation_data  # loaded, not recomputed
    assert np.array_equal(again.eigvals1, first.eigvals1)
    assert np.array_equal(again.eigvecs2, first.eigvecs2)


def test_cache_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("SPINLINE_CACHE_DIR", str(tmp_path))
    lay = layout_minimal5(0.9)
    propagator_for(lay)
    assert list(tmp_path.glob(f"{lay.fingerprint()}*.npz"))


def test_corrupt_cache_recomputed(tmp_path):
    lay = layout_minimal5(0.85)
    blocks = assemble_blocks(lay, build_basis(5))
    prop = diagonalize(blocks, cache_dir=tmp_path)
    for f in tmp_path.glob("*.npz"):
        f.write_bytes(b"not an npz")
    fresh = diagonalize(blocks, cache_dir=tmp_path)
    assert np.array_equal(fresh.eigvals1, prop.eigvals1)
