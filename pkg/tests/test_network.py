import numpy as np
import pytest

from homsim.dispersion import DispersiveElement, apply_dispersion
from homsim.errors import InvalidNetworkError, UnsupportedNetworkError
from homsim.hom import coincidence_probability
from homsim.network import (
    BeamSplitterNode,
    DetectorNode,
    NetworkEdge,
    NetworkSpec,
    SourceNode,
    accumulated_dispersion,
    check_cancellation,
    cascade_network,
    outcome_probabilities,
    three_photon_coincidence,
    three_photon_coincidence_mixed,
)
from homsim.schmidt import HeraldedState
from homsim.spectral import SpectralFunction, gaussian_mode, make_grid

X = 37.802 * 6000.0  # fs^2
BW = 0.0309607  # 10 nm at 780 nm, rad/fs

DELAY_GRID = [
    (-150.0, 0.0, -75.0),
    (-75.0, 0.0, 30.0),
    (0.0, 0.0, 0.0),
    (75.0, 0.0, -30.0),
    (150.0, 0.0, 75.0),
]


@pytest.fixture(scope="module")
def grid48():
    return make_grid(780.0, 10.0, 4.0, 48)


@pytest.fixture(scope="module")
def identical_modes(grid48):
    return [gaussian_mode(grid48, BW) for _ in range(3)]


def single_splitter(beta_l_1=0.0, beta_l_2=0.0):
    return NetworkSpec(
        sources=[SourceNode("a"), SourceNode("b")],
        beam_splitters=[BeamSplitterNode("BS")],
        detectors=[DetectorNode("d1"), DetectorNode("d2")],
        edges=[
            NetworkEdge("a", "BS.in0", DispersiveElement(beta_l_1, 1.0)),
            NetworkEdge("b", "BS.in1", DispersiveElement(beta_l_2, 1.0)),
            NetworkEdge("BS.out0", "d1"),
            NetworkEdge("BS.out1", "d2"),
        ],
    )


def test_fig5_path_bookkeeping():
    net = cascade_network(1.0, 2.0, 3.0, 10.0)
    entries = {
        (p.source, p.beam_splitter): p.beta_l for p in accumulated_dispersion(net)
    }
    assert entries == {
        ("s1", "A"): 1.0,
        ("s2", "A"): 2.0,
        ("s1", "B"): 11.0,
        ("s2", "B"): 12.0,
        ("s3", "B"): 3.0,
    }


def test_no_dispersion_accumulates_zero():
    net = cascade_network(0.0, 0.0, 0.0, 0.0)
    assert all(p.beta_l == 0.0 for p in accumulated_dispersion(net))


def test_single_splitter_has_two_entries():
    paths = accumulated_dispersion(single_splitter(5.0, 7.0))
    assert len(paths) == 2
    assert {p.source for p in paths} == {"a", "b"}


def test_condition_i_satisfied():
    assert check_cancellation(cascade_network(X, X, X, 0.0)).satisfied


def test_condition_ii_satisfied():
    Y = 37.802 * 2000.0
    assert check_cancellation(cascade_network(X, X, X + Y, Y)).satisfied


def test_violation_reports_mismatched_pairs():
    report = check_cancellation(cascade_network(X, 2 * X, X, 0.0))
    assert not report.satisfied
    pairs = {(v.beam_splitter, v.first.source, v.second.source) for v in report.violations}
    assert ("A", "s1", "s2") in pairs
    assert any(bs == "B" for bs, _, _ in pairs)
    payload = report.to_json_dict()
    assert payload["satisfied"] is False
    assert payload["violations"]


def test_satisfied_network_survives_common_rescaling():
    Y = 37.802 * 2000.0
    for factor in (0.5, 3.0, 17.0):
        assert check_cancellation(
            cascade_network(factor * X, factor * X, factor * (X + Y), factor * Y)
        ).satisfied


def test_cyclic_network_rejected():
    with pytest.raises(InvalidNetworkError):
        NetworkSpec(
            sources=[SourceNode("a"), SourceNode("b")],
            beam_splitters=[BeamSplitterNode("A"), BeamSplitterNode("B")],
            detectors=[DetectorNode("d1"), DetectorNode("d2")],
            edges=[
                NetworkEdge("a", "A.in0"),
                NetworkEdge("b", "B.in0"),
                NetworkEdge("A.out0", "B.in1"),
                NetworkEdge("B.out0", "A.in1"),
                NetworkEdge("A.out1", "d1"),
                NetworkEdge("B.out1", "d2"),
            ],
        )


def test_bad_wiring_rejected():
    with pytest.raises(InvalidNetworkError):  # dangling splitter input
        NetworkSpec(
            sources=[SourceNode("a")],
            beam_splitters=[BeamSplitterNode("A")],
            detectors=[DetectorNode("d1"), DetectorNode("d2")],
            edges=[
                NetworkEdge("a", "A.in0"),
                NetworkEdge("A.out0", "d1"),
                NetworkEdge("A.out1", "d2"),
            ],
        )
    with pytest.raises(InvalidNetworkError):  # unknown endpoint
        NetworkSpec(
            sources=[SourceNode("a"), SourceNode("b")],
            beam_splitters=[BeamSplitterNode("A")],
            detectors=[DetectorNode("d1"), DetectorNode("d2")],
            edges=[
                NetworkEdge("a", "A.in0"),
                NetworkEdge("b", "A.inX"),
                NetworkEdge("A.out0", "d1"),
                NetworkEdge("A.out1", "d2"),
            ],
        )
    with pytest.raises(InvalidNetworkError):  # double-wired input
        NetworkSpec(
            sources=[SourceNode("a"), SourceNode("b")],
            beam_splitters=[BeamSplitterNode("A")],
            detectors=[DetectorNode("d1"), DetectorNode("d2")],
            edges=[
                NetworkEdge("a", "A.in0"),
                NetworkEdge("b", "A.in0"),
                NetworkEdge("A.out0", "d1"),
                NetworkEdge("A.out1", "d2"),
            ],
        )


def test_non_unitary_splitter_rejected():
    from homsim.errors import InvalidArgumentError

    with pytest.raises(InvalidArgumentError):
        BeamSplitterNode("A", np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_disjoint_photons_give_classical_value(grid48):
    # Spectrally disjoint photons cannot interfere: P is the permanent of the
    # classical transfer probabilities (1/4 for this topology) and is
    # independent of every beta*L.
    n = grid48.n_points
    modes = []
    for k in range(3):
        amp = np.zeros(n, dtype=complex)
        amp[4 + 12 * k] = 1.0
        modes.append(SpectralFunction(grid48, amp).normalized())
    p_plain = three_photon_coincidence(cascade_network(0, 0, 0, 0), modes, (0.0, 0.0, 0.0))
    p_disp = three_photon_coincidence(
        cascade_network(3e5, 1e4, 7e4, 2e5), modes, (0.0, 0.0, 0.0)
    )
    assert p_plain == pytest.approx(0.25, abs=1e-12)
    assert p_disp == pytest.approx(0.25, abs=1e-12)


def test_cancellation_conditions_leave_coincidences_unchanged(identical_modes):
    Y = 37.802 * 2000.0
    for delays in DELAY_GRID:
        base = three_photon_coincidence(cascade_network(0, 0, 0, 0), identical_modes, delays)
        cond_i = three_photon_coincidence(
            cascade_network(X, X, X, 0.0), identical_modes, delays
        )
        cond_ii = three_photon_coincidence(
            cascade_network(X, X, X + Y, Y), identical_modes, delays
        )
        assert cond_i == pytest.approx(base, abs=1e-9)
        assert cond_ii == pytest.approx(base, abs=1e-9)


def test_violated_condition_changes_coincidences(identical_modes):
    diffs = []
    for delays in DELAY_GRID:
        base = three_photon_coincidence(cascade_network(0, 0, 0, 0), identical_modes, delays)
        bad = three_photon_coincidence(
            cascade_network(0.0, 1e5, 0.0, 0.0), identical_modes, delays
        )
        diffs.append(abs(bad - base))
    assert max(diffs) > 1e-3


def test_outcome_probabilities_sum_to_one(grid48):
    rng = np.random.default_rng(9)
    amps = rng.normal(size=(3, grid48.n_points)) + 1j * rng.normal(
        size=(3, grid48.n_points)
    )
    envelope = np.exp(-((grid48.detunings / (0.5 * grid48.detunings[-1])) ** 2))
    modes = [SpectralFunction(grid48, a * envelope).normalized() for a in amps]
    probs = outcome_probabilities(
        cascade_network(1e5, 3e4, 0.0, 6e4), modes, (25.0, -10.0, 40.0)
    )
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-8)
    assert len(probs) == 10  # multisets of 3 photons over 3 ports
    assert all(p >= -1e-12 for p in probs.values())


def test_single_splitter_reduces_to_hom(grid48):
    rng = np.random.default_rng(21)
    envelope = np.exp(-((grid48.detunings / (0.4 * grid48.detunings[-1])) ** 2))
    worst = 0.0
    for _ in range(20):
        amps = rng.normal(size=(2, grid48.n_points)) + 1j * rng.normal(
            size=(2, grid48.n_points)
        )
        m1 = SpectralFunction(grid48, amps[0] * envelope).normalized()
        m2 = SpectralFunction(grid48, amps[1] * envelope).normalized()
        b1, b2 = rng.uniform(0, 2e5, size=2)
        tau = rng.uniform(-400, 400)
        net_p = outcome_probabilities(single_splitter(b1, b2), [m1, m2], (tau, 0.0))[
            (1, 1)
        ]
        s1 = apply_dispersion(
            HeraldedState(np.array([1.0]), (m1,)), DispersiveElement(b1, 1.0)
        )
        s2 = apply_dispersion(
            HeraldedState(np.array([1.0]), (m2,)), DispersiveElement(b2, 1.0)
        )
        hom_p = coincidence_probability(s1, s2, None, tau)
        worst = max(worst, abs(net_p - hom_p))
    assert worst < 1e-9


def test_three_photon_requires_fig5_class(grid48, identical_modes):
    with pytest.raises(UnsupportedNetworkError):
        three_photon_coincidence(single_splitter(), identical_modes[:2])
    with pytest.raises(UnsupportedNetworkError):
        outcome_probabilities(
            NetworkSpec(
                sources=[SourceNode("a")],
                beam_splitters=[],
                detectors=[DetectorNode("d")],
                edges=[NetworkEdge("a", "d")],
            ),
            identical_modes[:1],
        )


def test_three_photon_rejects_mixed_inputs(grid48, identical_modes):
    mixed = HeraldedState(np.array([1.0]), (identical_modes[0],))
    with pytest.raises(UnsupportedNetworkError):
        three_photon_coincidence(cascade_network(0, 0, 0, 0), [mixed] * 3)


def test_mixed_convex_combination_matches_pure_for_rank_one(grid48, identical_modes):
    states = [HeraldedState(np.array([1.0]), (m,)) for m in identical_modes]
    delays = (30.0, 0.0, -45.0)
    p_mixed = three_photon_coincidence_mixed(cascade_network(X, X, X, 0.0), states, delays)
    p_pure = three_photon_coincidence(cascade_network(X, X, X, 0.0), identical_modes, delays)
    assert p_mixed == pytest.approx(p_pure, abs=1e-12)
    big = HeraldedState(
        np.full(4, 0.25), tuple(gaussian_mode(grid48, BW * (1 + 0.1 * k)) for k in range(4))
    )
    with pytest.raises(UnsupportedNetworkError):
        three_photon_coincidence_mixed(cascade_network(0, 0, 0, 0), [big] * 3)


def test_delay_defaults_come_from_source_nodes(grid48, identical_modes):
    net = cascade_network(0, 0, 0, 0, delays=(40.0, 0.0, -60.0))
    p_default = three_photon_coincidence(net, identical_modes)
    p_explicit = three_photon_coincidence(net, identical_modes, (40.0, 0.0, -60.0))
    assert p_default == p_explicit
