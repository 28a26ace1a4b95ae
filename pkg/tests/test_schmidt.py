import math

import numpy as np
import pytest

from homsim.errors import DegenerateStateError, InvalidArgumentError
from homsim.schmidt import (
    HeraldedState,
    herald,
    postulate_pure_state,
    purity,
    reconstruct,
    schmidt_decompose,
    schmidt_number,
)
from homsim.source import (
    BandpassFilter,
    JointSpectralAmplitude,
    PhaseMatching,
    PumpSpectrum,
    apply_filters,
    build_jsa,
)
from homsim.spectral import FrequencyGrid, SpectralFunction, inner_product, make_grid


def correlated_gaussian_jsa(mu: float, n: int = 512, span_sigmas: float = 8.0):
    """exp(-(Ws+Wi)^2/4s+^2 - (Ws-Wi)^2/4s-^2); Schmidt spectrum (1-mu) mu^n
    with mu = ((s+ - s-)/(s+ + s-))^2."""
    s0 = 0.01
    sp = s0 * (1 + math.sqrt(mu))
    sm = s0 * (1 - math.sqrt(mu))
    half = span_sigmas * sp
    spacing = 2 * half / (n - 1)
    det = (np.arange(n) - (n - 1) / 2) * spacing
    grid = FrequencyGrid(780.0, n, spacing, det)
    x = det[:, None]
    y = det[None, :]
    amp = np.exp(-((x + y) ** 2) / (4 * sp**2) - ((x - y) ** 2) / (4 * sm**2))
    return JointSpectralAmplitude(grid, grid, amp)


def separable_jsa(n: int = 128):
    grid = make_grid(780.0, 10.0, 4.0, n)
    g = np.exp(-(grid.detunings**2) / (2 * 0.012**2))
    h = np.exp(-(grid.detunings**2) / (2 * 0.02**2))
    return JointSpectralAmplitude(grid, grid, np.outer(g, h))


@pytest.fixture(scope="module")
def filtered_jsa():
    grid = make_grid(780.0, 10.0, 4.0, 256)
    jsa = build_jsa(PumpSpectrum(), PhaseMatching(), grid, grid)
    return apply_filters(jsa, BandpassFilter(780.0, 10.0), BandpassFilter(780.0, 10.0))


def test_separable_jsa_gives_single_eigenvalue():
    decomp = schmidt_decompose(separable_jsa(), mass=1.0)
    assert decomp.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    recon = reconstruct(decomp)
    jsa = separable_jsa()
    weighted = jsa.amplitudes * jsa.grid_signal.spacing  # square grid
    assert np.max(np.abs(recon - weighted)) < 1e-12


@pytest.mark.parametrize("mu", [0.1, 0.25, 0.5])
def test_geometric_schmidt_spectrum(mu):
    decomp = schmidt_decompose(correlated_gaussian_jsa(mu), rank=10)
    lam = decomp.eigenvalues * (1.0 - decomp.tail_mass)
    expected = (1 - mu) * mu ** np.arange(10)
    assert np.max(np.abs(lam - expected)) < 1e-6


def test_full_rank_eigenvalues_sum_to_one(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa, mass=1.0)
    assert float(decomp.eigenvalues.sum()) == pytest.approx(1.0, abs=1e-10)


def test_reconstruction_error_bounded_by_tail(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa, mass=0.99)
    weighted = filtered_jsa.amplitudes * math.sqrt(
        filtered_jsa.grid_signal.spacing * filtered_jsa.grid_idler.spacing
    )
    err = np.linalg.norm(weighted - reconstruct(decomp))
    assert err <= math.sqrt(decomp.tail_mass) + 1e-12


def test_full_rank_reconstruction_is_exact(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa, rank=filtered_jsa.grid_signal.n_points)
    weighted = filtered_jsa.amplitudes * math.sqrt(
        filtered_jsa.grid_signal.spacing * filtered_jsa.grid_idler.spacing
    )
    assert np.linalg.norm(weighted - reconstruct(decomp)) < 1e-10


def test_mode_sets_are_orthonormal(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa)
    for modes in (decomp.signal_modes, decomp.idler_modes):
        for i, mi in enumerate(modes):
            for j, mj in enumerate(modes):
                expected = 1.0 if i == j else 0.0
                assert abs(inner_product(mi, mj) - expected) < 1e-10


def test_truncation_rules(filtered_jsa):
    by_rank = schmidt_decompose(filtered_jsa, rank=2)
    assert by_rank.rank == 2
    assert float(by_rank.eigenvalues.sum()) == pytest.approx(1.0, abs=1e-12)
    by_threshold = schmidt_decompose(filtered_jsa, threshold=0.05)
    assert np.all(
        by_threshold.eigenvalues * (1 - by_threshold.tail_mass) >= 0.05 - 1e-12
    )
    with pytest.raises(InvalidArgumentError):
        schmidt_decompose(filtered_jsa, rank=0)
    with pytest.raises(InvalidArgumentError):
        schmidt_decompose(filtered_jsa, threshold=2.0)
    with pytest.raises(InvalidArgumentError):
        schmidt_decompose(filtered_jsa, rank=3, mass=0.9)


def test_heavy_truncation_sets_warning_flag(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa, rank=1)
    assert decomp.tail_mass > 0.05
    assert decomp.truncation_warning
    assert not schmidt_decompose(filtered_jsa).truncation_warning


def test_herald_copies_eigenvalues(filtered_jsa):
    decomp = schmidt_decompose(filtered_jsa)
    state = herald(decomp)
    assert np.array_equal(state.weights, decomp.eigenvalues)
    assert state.accumulated_dispersion == 0.0
    assert purity(state) == pytest.approx(1.0 / schmidt_number(decomp), rel=1e-14)


def geometric_state(mu: float, n_modes: int = 40):
    grid = make_grid(780.0, 10.0, 4.0, 128)
    lam = (1 - mu) * mu ** np.arange(n_modes)
    lam /= lam.sum()
    modes = []
    for k in range(n_modes):
        amp = np.zeros(128, dtype=complex)
        amp[k] = 1.0 / math.sqrt(grid.spacing)
        modes.append(SpectralFunction(grid, amp))
    return HeraldedState(weights=lam, modes=tuple(modes))


def test_purity_examples():
    assert purity(geometric_state(0.25)) == pytest.approx(0.6, abs=1e-9)
    half = HeraldedState(
        weights=np.array([0.5, 0.5]), modes=geometric_state(0.5, 2).modes
    )
    assert purity(half) == 0.5
    pure = HeraldedState(weights=np.array([1.0]), modes=geometric_state(0.5, 1).modes)
    assert purity(pure) == 1.0


def test_schmidt_number_examples(filtered_jsa):
    rank1 = schmidt_decompose(separable_jsa(), rank=1)
    assert schmidt_number(rank1) == pytest.approx(1.0, abs=1e-10)
    decomp = schmidt_decompose(filtered_jsa)
    assert schmidt_number(decomp) > 1.0
    # geometric mu = 0.25: K = 1/0.6
    state = geometric_state(0.25)
    assert 1.0 / purity(state) == pytest.approx(1.0 / 0.6, rel=1e-9)


def test_postulated_pure_state_formula():
    grid = make_grid(780.0, 10.0, 4.0, 128)
    e0 = np.zeros(128, dtype=complex)
    e1 = np.zeros(128, dtype=complex)
    e0[10] = 1.0 / math.sqrt(grid.spacing)
    e1[20] = 1.0 / math.sqrt(grid.spacing)
    jsa = JointSpectralAmplitude(
        grid,
        grid,
        math.sqrt(0.8) * np.outer(e0, e0) + math.sqrt(0.2) * np.outer(e1, e1),
    )
    decomp = schmidt_decompose(jsa, mass=1.0)
    state = postulate_pure_state(decomp)
    assert np.array_equal(state.weights, [1.0])
    assert purity(state) == 1.0
    expected = (0.8 * e0 + 0.2 * e1) / math.sqrt(0.68)
    overlap = np.vdot(expected, state.modes[0].amplitudes) * grid.spacing
    assert abs(abs(overlap) - 1.0) < 1e-12


def test_postulated_pure_state_of_rank1_equals_herald():
    decomp = schmidt_decompose(separable_jsa(), rank=1)
    heralded = herald(decomp)
    postulated = postulate_pure_state(decomp)
    fidelity = abs(
        inner_product(heralded.modes[0], postulated.modes[0])
    )
    assert fidelity == pytest.approx(1.0, abs=1e-12)


def test_postulate_rejects_cancelling_modes():
    grid = make_grid(780.0, 10.0, 4.0, 128)
    amp = np.zeros(128, dtype=complex)
    amp[5] = 1.0 / math.sqrt(grid.spacing)
    plus = SpectralFunction(grid, amp)
    minus = SpectralFunction(grid, -amp)
    decomp_like = schmidt_decompose(separable_jsa(), rank=1)
    fake = type(decomp_like)(
        eigenvalues=np.array([0.5, 0.5]),
        signal_modes=(plus, minus),
        idler_modes=(plus, minus),
        rank=2,
    )
    with pytest.raises(DegenerateStateError):
        postulate_pure_state(fake)


def test_truncation_monotonicity(filtered_jsa):
    # Purity from the top-r renormalized eigenvalues never increases with r.
    full = schmidt_decompose(filtered_jsa, mass=1.0)
    purities = []
    for r in range(1, full.rank + 1):
        lam = full.eigenvalues[:r]
        lam = lam / lam.sum()
        purities.append(float((lam**2).sum()))
    assert all(a >= b - 1e-15 for a, b in zip(purities, purities[1:]))


def test_eigenvalues_invariant_under_global_phase(filtered_jsa):
    rotated = JointSpectralAmplitude(
        filtered_jsa.grid_signal,
        filtered_jsa.grid_idler,
        filtered_jsa.amplitudes * np.exp(1j * 0.7),
    )
    a = schmidt_decompose(filtered_jsa)
    b = schmidt_decompose(rotated)
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-12)
    for ma, mb in zip(a.signal_modes, b.signal_modes):
        assert abs(abs(inner_product(ma, mb)) - 1.0) < 1e-9


def test_decomposition_is_deterministic(filtered_jsa):
    a = schmidt_decompose(filtered_jsa)
    b = schmidt_decompose(filtered_jsa)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    for ma, mb in zip(a.signal_modes, b.signal_modes):
        assert np.array_equal(ma.amplitudes, mb.amplitudes)


def test_degenerate_pair_ordered_by_first_moment():
    # Exactly orthogonal modes with exactly equal weights: ordering falls back
    # to the first moment of the mode intensity.
    grid = make_grid(780.0, 10.0, 4.0, 256)
    lo = np.zeros(256)
    hi = np.zeros(256)
    lo[40] = 1.0 / math.sqrt(grid.spacing)
    hi[200] = 1.0 / math.sqrt(grid.spacing)
    jsa = JointSpectralAmplitude(
        grid, grid, np.outer(hi, hi) + np.outer(lo, lo)
    )
    decomp = schmidt_decompose(jsa, mass=1.0)
    moments = [
        float(np.sum(m.grid.detunings * np.abs(m.amplitudes) ** 2) * m.grid.spacing)
        for m in decomp.signal_modes[:2]
    ]
    assert abs(decomp.eigenvalues[0] - decomp.eigenvalues[1]) < 1e-12
    assert moments[0] < moments[1]
