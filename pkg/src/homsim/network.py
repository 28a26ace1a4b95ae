"""Multi-path linear interferometer: dispersion bookkeeping and small-N
coincidence simulation.

A network is a DAG of sources, 2x2 beam splitters and detectors.  Edges may
carry a dispersive element; a photon path accumulates the sum of beta*L over
its edges.  Dispersion cancels from every interference observable exactly
when, at each beam splitter, all arriving paths carry equal accumulated
beta*L - the condition checked by :func:`check_cancellation`.

Coincidence probabilities for two or three independent pure photons are
evaluated from first principles: the amplitude for a frequency assignment is
the permanent-structured sum over photon-to-detector permutations of the
composed transfer coefficients, and the outcome probability is the triple
(double) quadrature of its squared magnitude.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .dispersion import DispersiveElement
from .errors import InvalidArgumentError, InvalidNetworkError, UnsupportedNetworkError
from .schmidt import HeraldedState
from .spectral import SpectralFunction


def splitter_50_50() -> np.ndarray:
    """Default beam-splitter unitary (real 50/50)."""
    return np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class SourceNode:
    """Single-photon source; ``delay`` (fs) shifts its photon's arrival."""

    id: str
    delay: float = 0.0


@dataclass(frozen=True)
class BeamSplitterNode:
    """2x2 lossless node; ports are ``<id>.in0/.in1`` and ``<id>.out0/.out1``."""

    id: str
    unitary: np.ndarray = field(default_factory=splitter_50_50)

    def __post_init__(self) -> None:
        u = np.asarray(self.unitary, dtype=complex)
        if u.shape != (2, 2):
            raise InvalidArgumentError(f"beam splitter {self.id}: unitary must be 2x2")
        if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-12):
            raise InvalidArgumentError(f"beam splitter {self.id}: matrix is not unitary")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)


@dataclass(frozen=True)
class DetectorNode:
    id: str


@dataclass(frozen=True)
class NetworkEdge:
    """Directed connection between two ports, optionally dispersive.

    ``start`` is a source id or ``<bs>.out0/.out1``; ``end`` is a detector id
    or ``<bs>.in0/.in1``.  At most one dispersive element sits on an edge;
    series media are composed by summing their beta*L.
    """

    start: str
    end: str
    element: DispersiveElement | None = None

    @property
    def beta_l(self) -> float:
        return 0.0 if self.element is None else self.element.beta_l


@dataclass(frozen=True)
class PathDispersion:
    """Accumulated beta*L (fs^2) along one source -> beam-splitter path."""

    source: str
    beam_splitter: str
    beta_l: float
    via: tuple[str, ...] = ()


@dataclass(frozen=True)
class Violation:
    beam_splitter: str
    first: PathDispersion
    second: PathDispersion

    @property
    def mismatch(self) -> float:
        return abs(self.first.beta_l - self.second.beta_l)


@dataclass(frozen=True)
class CancellationReport:
    satisfied: bool
    violations: tuple[Violation, ...]
    tolerance: float

    def to_json_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "tolerance_fs2": self.tolerance,
            "violations": [
                {
                    "beam_splitter": v.beam_splitter,
                    "path_a": {
                        "source": v.first.source,
                        "via": list(v.first.via),
                        "beta_l_fs2": v.first.beta_l,
                    },
                    "path_b": {
                        "source": v.second.source,
                        "via": list(v.second.via),
                        "beta_l_fs2": v.second.beta_l,
                    },
                    "mismatch_fs2": v.mismatch,
                }
                for v in self.violations
            ],
        }


class NetworkSpec:
    """Validated interferometer wiring.

    Raises :class:`InvalidNetworkError` for cyclic graphs, dangling or
    multiply-used ports, or unknown endpoint names.
    """

    def __init__(
        self,
        sources: list[SourceNode],
        beam_splitters: list[BeamSplitterNode],
        detectors: list[DetectorNode],
        edges: list[NetworkEdge],
    ):
        self.sources = tuple(sources)
        self.beam_splitters = tuple(beam_splitters)
        self.detectors = tuple(detectors)
        self.edges = tuple(edges)
        self._bs_by_id = {b.id: b for b in beam_splitters}
        self._edges_from: dict[str, NetworkEdge] = {}
        self._validate()

    def _validate(self) -> None:
        ids = [n.id for n in self.sources + self.beam_splitters + self.detectors]
        if len(set(ids)) != len(ids):
            raise InvalidNetworkError("node ids must be unique")
        source_ids = {s.id for s in self.sources}
        detector_ids = {d.id for d in self.detectors}

        valid_starts = set(source_ids)
        valid_ends = set(detector_ids)
        for b in self.beam_splitters:
            valid_starts.update((f"{b.id}.out0", f"{b.id}.out1"))
            valid_ends.update((f"{b.id}.in0", f"{b.id}.in1"))

        ends_seen = set()
        for e in self.edges:
            if e.start not in valid_starts:
                raise InvalidNetworkError(f"unknown or non-output endpoint {e.start!r}")
            if e.end not in valid_ends:
                raise InvalidNetworkError(f"unknown or non-input endpoint {e.end!r}")
            if e.start in self._edges_from:
                raise InvalidNetworkError(f"output {e.start!r} wired more than once")
            if e.end in ends_seen:
                raise InvalidNetworkError(f"input {e.end!r} wired more than once")
            self._edges_from[e.start] = e
            ends_seen.add(e.end)

        for start in valid_starts:
            if start not in self._edges_from:
                raise InvalidNetworkError(f"output {start!r} is not connected")
        for end in valid_ends:
            if end not in ends_seen:
                raise InvalidNetworkError(f"input {end!r} is not connected")

        # Cycle check on the node-level graph.
        succ: dict[str, set[str]] = {}
        for e in self.edges:
            a = e.start.split(".")[0]
            b = e.end.split(".")[0]
            succ.setdefault(a, set()).add(b)
        state: dict[str, int] = {}

        def visit(node: str) -> None:
            state[node] = 1
            for nxt in sorted(succ.get(node, ())):
                if state.get(nxt) == 1:
                    raise InvalidNetworkError(f"network contains a cycle through {nxt!r}")
                if nxt not in state:
                    visit(nxt)
            state[node] = 2

        for s in sorted({e.start.split(".")[0] for e in self.edges}):
            if s not in state:
                visit(s)

    def source(self, source_id: str) -> SourceNode:
        for s in self.sources:
            if s.id == source_id:
                return s
        raise InvalidArgumentError(f"unknown source {source_id!r}")


def accumulated_dispersion(net: NetworkSpec) -> list[PathDispersion]:
    """Accumulated beta*L per source -> beam-splitter path.

    Every beam splitter reachable from a source contributes one entry per
    distinct path (multiple paths from the same source are listed
    separately); the accumulation is the sum of beta*L over the edges up to
    that beam splitter's input.
    """
    out: list[PathDispersion] = []

    def walk(endpoint: str, acc: float, via: tuple[str, ...], source_id: str) -> None:
        edge = net._edges_from.get(endpoint)
        if edge is None:  # endpoint is a detector-facing port; validation forbids this
            return
        acc += edge.beta_l
        target = edge.end
        node = target.split(".")[0]
        if node in net._bs_by_id:
            out.append(PathDispersion(source_id, node, acc, via))
            for port in (f"{node}.out0", f"{node}.out1"):
                walk(port, acc, via + (node,), source_id)
        # detectors terminate the path

    for s in net.sources:
        walk(s.id, 0.0, (), s.id)
    return out


def check_cancellation(net: NetworkSpec, tolerance: float = 1e-6) -> CancellationReport:
    """Pairwise-equality check of accumulated beta*L at every beam splitter.

    Dispersion cancels from the interference at a beam splitter iff all
    photon paths arriving there carry the same accumulated beta*L (within
    ``tolerance``, in fs^2).
    """
    paths = accumulated_dispersion(net)
    by_bs: dict[str, list[PathDispersion]] = {}
    for p in paths:
        by_bs.setdefault(p.beam_splitter, []).append(p)
    violations: list[Violation] = []
    for bs in sorted(by_bs):
        group = by_bs[bs]
        for a, b in itertools.combinations(group, 2):
            if abs(a.beta_l - b.beta_l) > tolerance:
                violations.append(Violation(bs, a, b))
    return CancellationReport(
        satisfied=not violations, violations=tuple(violations), tolerance=tolerance
    )


def _transfer_terms(net: NetworkSpec) -> dict[tuple[str, str], list[tuple[complex, float]]]:
    """Per (detector, source): list of (amplitude coefficient, beta*L) path terms."""
    terms: dict[tuple[str, str], list[tuple[complex, float]]] = {}
    detector_ids = {d.id for d in net.detectors}

    def walk(endpoint: str, coeff: complex, acc: float, source_id: str) -> None:
        edge = net._edges_from.get(endpoint)
        if edge is None:
            return
        acc += edge.beta_l
        target = edge.end
        node, _, port = target.partition(".")
        if node in detector_ids:
            terms.setdefault((node, source_id), []).append((coeff, acc))
            return
        bs = net._bs_by_id[node]
        in_idx = 0 if port == "in0" else 1
        for out_idx in (0, 1):
            walk(
                f"{node}.out{out_idx}",
                coeff * complex(bs.unitary[out_idx, in_idx]),
                acc,
                source_id,
            )

    for s in net.sources:
        walk(s.id, 1.0 + 0.0j, 0.0, s.id)
    return terms


def _port_vectors(
    net: NetworkSpec,
    modes: dict[str, SpectralFunction],
    delays: dict[str, float],
) -> dict[tuple[str, str], np.ndarray]:
    """V[(detector, source)](w) = t_{d,s}(w) phi_s(w) e^{i w tau_s} on the grid."""
    grid = next(iter(modes.values())).grid
    for m in modes.values():
        grid.require_same(m.grid)
    w = grid.detunings
    terms = _transfer_terms(net)
    vectors: dict[tuple[str, str], np.ndarray] = {}
    for d in net.detectors:
        for s in net.sources:
            t = np.zeros(len(w), dtype=complex)
            for coeff, beta_l in terms.get((d.id, s.id), ()):
                t = t + coeff * np.exp(-0.5j * beta_l * w**2)
            vectors[(d.id, s.id)] = (
                t * modes[s.id].amplitudes * np.exp(1j * w * delays[s.id])
            )
    return vectors


def _resolve_inputs(
    net: NetworkSpec,
    pure_modes,
    delays,
) -> tuple[dict[str, SpectralFunction], dict[str, float]]:
    n = len(net.sources)
    if len(pure_modes) != n:
        raise InvalidArgumentError(
            f"expected {n} photon modes for {n} sources, got {len(pure_modes)}"
        )
    mode_map = {s.id: m for s, m in zip(net.sources, pure_modes)}
    if delays is None:
        delay_map = {s.id: s.delay for s in net.sources}
    else:
        if len(delays) != n:
            raise InvalidArgumentError(f"expected {n} delays, got {len(delays)}")
        delay_map = {s.id: float(t) for s, t in zip(net.sources, delays)}
    return mode_map, delay_map


def outcome_probabilities(
    net: NetworkSpec,
    pure_modes,
    delays=None,
) -> dict[tuple[int, ...], float]:
    """Probability of every photon-count pattern over the detector ports.

    ``pure_modes`` are normalized single-photon amplitudes, one per source in
    source order; ``delays`` likewise (source-node delays when omitted).
    Patterns are tuples of counts in detector order; for a lossless network
    the probabilities sum to 1.
    """
    n = len(net.sources)
    if n not in (2, 3):
        raise UnsupportedNetworkError(
            f"coincidence simulation supports 2 or 3 photons, network has {n} sources"
        )
    mode_map, delay_map = _resolve_inputs(net, pure_modes, delays)
    vectors = _port_vectors(net, mode_map, delay_map)
    grid = next(iter(mode_map.values())).grid
    source_ids = [s.id for s in net.sources]
    detector_ids = [d.id for d in net.detectors]

    probs: dict[tuple[int, ...], float] = {}
    for counts in itertools.combinations_with_replacement(range(len(detector_ids)), n):
        ports = [detector_ids[i] for i in counts]
        pattern = tuple(counts.count(i) for i in range(len(detector_ids)))
        probs[pattern] = _pattern_probability(vectors, grid, source_ids, ports)
    return probs


def _pattern_probability(vectors, grid, source_ids, ports) -> float:
    """Quadrature of |sum over permutations of row-vector products|^2 for one
    detection pattern; ``ports`` lists a detector id per photon row."""
    n = len(source_ids)
    amp = None
    for perm in itertools.permutations(range(n)):
        vecs = [vectors[(ports[k], source_ids[perm[k]])] for k in range(n)]
        term = reduce(np.multiply.outer, vecs)
        amp = term if amp is None else amp + term
    norm = 1.0
    for port in set(ports):
        norm /= math.factorial(ports.count(port))
    return float(np.sum(np.abs(amp) ** 2)) * grid.spacing**n * norm


def three_photon_coincidence(
    net: NetworkSpec,
    pure_modes,
    delays=None,
) -> float:
    """Probability of one photon at each detector at the three outputs of the two-splitter cascade.

    Requires three sources, two cascaded 2x2 beam splitters and three
    detectors, with pure (single-mode) photon inputs.
    """
    if (
        len(net.sources) != 3
        or len(net.beam_splitters) != 2
        or len(net.detectors) != 3
    ):
        raise UnsupportedNetworkError(
            "three-photon simulation requires 3 sources, 2 beam splitters "
            "and 3 detectors"
        )
    for m in pure_modes:
        if isinstance(m, HeraldedState):
            raise UnsupportedNetworkError(
                "mixed heralded inputs are not supported here; use "
                "three_photon_coincidence_mixed"
            )
    mode_map, delay_map = _resolve_inputs(net, pure_modes, delays)
    vectors = _port_vectors(net, mode_map, delay_map)
    grid = next(iter(mode_map.values())).grid
    return _pattern_probability(
        vectors, grid, [s.id for s in net.sources], [d.id for d in net.detectors]
    )


def three_photon_coincidence_mixed(
    net: NetworkSpec,
    states,
    delays=None,
) -> float:
    """Experimental: mixed heralded inputs by convex combination over
    Schmidt-mode triples.  Each state must have rank <= 3 (cost grows as the
    product of the ranks)."""
    if len(states) != 3:
        raise InvalidArgumentError(f"expected 3 states, got {len(states)}")
    for st in states:
        if len(st.modes) > 3:
            raise UnsupportedNetworkError(
                f"mixed three-photon inputs limited to rank <= 3, got {len(st.modes)}"
            )
    total = 0.0
    for i, j, k in itertools.product(*(range(len(st.modes)) for st in states)):
        weight = states[0].weights[i] * states[1].weights[j] * states[2].weights[k]
        modes = (states[0].modes[i], states[1].modes[j], states[2].modes[k])
        total += weight * three_photon_coincidence(net, modes, delays)
    return total


def cascade_network(
    beta_l_1: float,
    beta_l_2: float,
    beta_l_3: float,
    beta_l_12: float,
    delays: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> NetworkSpec:
    """The cascaded two-splitter topology: sources 1 and 2 meet at splitter A,
    one output of A and source 3 meet at splitter B; detectors on the
    remaining three outputs.  The four dispersive media sit on the two source
    arms into A, the A->B connection, and the source-3 arm into B."""
    return NetworkSpec(
        sources=[
            SourceNode("s1", delays[0]),
            SourceNode("s2", delays[1]),
            SourceNode("s3", delays[2]),
        ],
        beam_splitters=[BeamSplitterNode("A"), BeamSplitterNode("B")],
        detectors=[DetectorNode("d1"), DetectorNode("d2"), DetectorNode("d3")],
        edges=[
            NetworkEdge("s1", "A.in0", DispersiveElement(beta_l_1, 1.0)),
            NetworkEdge("s2", "A.in1", DispersiveElement(beta_l_2, 1.0)),
            NetworkEdge("A.out0", "d1"),
            NetworkEdge("A.out1", "B.in0", DispersiveElement(beta_l_12, 1.0)),
            NetworkEdge("s3", "B.in1", DispersiveElement(beta_l_3, 1.0)),
            NetworkEdge("B.out0", "d2"),
            NetworkEdge("B.out1", "d3"),
        ],
    )
