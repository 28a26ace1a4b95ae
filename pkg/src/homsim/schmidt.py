"""Schmidt decomposition of the JSA via SVD and heralded-state extraction.

The discretized JSA matrix, weighted by the quadrature cell, has Frobenius
norm 1; its singular value decomposition is the matrix analogue of the
continuous Schmidt decomposition.  Squared singular values are the Schmidt
eigenvalues, and the left/right singular vectors (rescaled by the grid
spacings) are the signal/idler mode functions.

SVD phases are arbitrary, so a fixed convention is applied: each signal mode
is rotated so its largest-magnitude sample is real positive (the paired idler
mode absorbs the opposite rotation).  Ordering ties between numerically equal
eigenvalues are broken by the first moment of the signal-mode intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateStateError, InvalidArgumentError
from .source import JointSpectralAmplitude
from .spectral import SpectralFunction

# Keep eigenvalues until this cumulative mass by default, then renormalize.
DEFAULT_MASS = 0.999

# Eigenvalues within this relative distance are treated as degenerate when
# applying the deterministic tie-break.
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Truncated Schmidt spectrum with orthonormal signal/idler modes.

    ``eigenvalues`` are renormalized to sum to 1 after truncation;
    ``tail_mass`` records the discarded eigenvalue mass of the full spectrum
    and ``truncation_warning`` flags a discarded mass above 5%.
    """

    eigenvalues: np.ndarray
    signal_modes: tuple[SpectralFunction, ...]
    idler_modes: tuple[SpectralFunction, ...]
    rank: int
    tail_mass: float = 0.0
    truncation_warning: bool = field(default=False)

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        if self.rank != len(ev) or self.rank != len(self.signal_modes):
            raise InvalidArgumentError("rank does not match the mode/eigenvalue count")


@dataclass(frozen=True)
class HeraldedState:
    """Spectrally mixed heralded photon: weights over signal mode functions.

    ``accumulated_dispersion`` is the total beta*L (fs^2) whose quadratic
    phase has already been multiplied into the modes; 0 for a pristine state.
    """

    weights: np.ndarray
    modes: tuple[SpectralFunction, ...]
    accumulated_dispersion: float = 0.0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.modes) or len(w) == 0:
            raise InvalidArgumentError("weights and modes must match and be non-empty")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise InvalidArgumentError(
                f"weights must sum to 1, got {float(w.sum())!r}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "modes", tuple(self.modes))

    @property
    def grid(self):
        return self.modes[0].grid


def schmidt_decompose(
    jsa: JointSpectralAmplitude,
    rank: int | None = None,
    threshold: float | None = None,
    mass: float | None = None,
) -> SchmidtDecomposition:
    """SVD-based Schmidt decomposition with one of three truncation rules.

    Exactly one of ``rank`` (keep the top r), ``threshold`` (keep eigenvalues
    >= epsilon) or ``mass`` (keep until the cumulative eigenvalue mass reaches
    the target) may be given; the default is mass = 0.999.
    """
    chosen = [name for name, v in (("rank", rank), ("threshold", threshold), ("mass", mass)) if v is not None]
    if len(chosen) > 1:
        raise InvalidArgumentError(f"conflicting truncation rules: {chosen}")

    ds = jsa.grid_signal.spacing
    di = jsa.grid_idler.spacing
    weighted = jsa.amplitudes * math.sqrt(ds * di)
    u, s, vh = np.linalg.svd(weighted, full_matrices=False)
    lam = s**2
    total = float(lam.sum())  # == 1 up to rounding for a normalized JSA

    if rank is not None:
        if rank < 1:
            raise InvalidArgumentError(f"truncation rank must be >= 1, got {rank}")
        keep = min(int(rank), len(lam))
    elif threshold is not None:
        keep = int(np.count_nonzero(lam >= threshold))
        if keep < 1:
            raise InvalidArgumentError(
                f"eigenvalue threshold {threshold} removes every mode"
            )
    else:
        target = DEFAULT_MASS if mass is None else float(mass)
        if not 0.0 < target <= 1.0:
            raise InvalidArgumentError(f"mass target must be in (0, 1], got {target}")
        cum = np.cumsum(lam) / total
        keep = int(np.searchsorted(cum, target) + 1)
        keep = min(keep, len(lam))

    tail = float(lam[keep:].sum()) / total
    eigenvalues = lam[:keep] / float(lam[:keep].sum())

    grid_s = jsa.grid_signal
    grid_i = jsa.grid_idler
    signal = []
    idler = []
    for n in range(keep):
        phi = u[:, n] / math.sqrt(ds)
        psi = vh[n, :] / math.sqrt(di)
        pivot = phi[int(np.argmax(np.abs(phi)))]
        phase = pivot / abs(pivot)
        signal.append(SpectralFunction(grid_s, phi * np.conj(phase)))
        idler.append(SpectralFunction(grid_i, psi * phase))

    order = _tie_broken_order(eigenvalues, signal)
    eigenvalues = eigenvalues[order]
    signal = [signal[i] for i in order]
    idler = [idler[i] for i in order]

    return SchmidtDecomposition(
        eigenvalues=eigenvalues,
        signal_modes=tuple(signal),
        idler_modes=tuple(idler),
        rank=keep,
        tail_mass=tail,
        truncation_warning=tail > 0.05,
    )


def _tie_broken_order(eigenvalues: np.ndarray, modes: list[SpectralFunction]) -> list[int]:
    """Descending eigenvalue order; ties resolved by ascending first moment
    of the mode intensity (deterministic under SVD degeneracy)."""

    def first_moment(f: SpectralFunction) -> float:
        w = np.abs(f.amplitudes) ** 2 * f.grid.spacing
        return float(np.sum(f.grid.detunings * w))

    order = list(range(len(eigenvalues)))
    i = 0
    while i < len(order):
        j = i + 1
        while (
            j < len(order)
            and abs(eigenvalues[order[j]] - eigenvalues[order[i]])
            <= _TIE_RTOL * max(eigenvalues[order[i]], 1e-300)
        ):
            j += 1
        if j - i > 1:
            order[i:j] = sorted(order[i:j], key=lambda k: first_moment(modes[k]))
        i = j
    return order


def reconstruct(decomp: SchmidtDecomposition) -> np.ndarray:
    """Rebuild the quadrature-weighted JSA matrix from the kept modes.

    The Frobenius distance to the original weighted matrix is bounded by
    sqrt(tail_mass).
    """
    ds = decomp.signal_modes[0].grid.spacing
    di = decomp.idler_modes[0].grid.spacing
    scale = 1.0 - decomp.tail_mass  # undo the post-truncation renormalization
    out = np.zeros(
        (decomp.signal_modes[0].grid.n_points, decomp.idler_modes[0].grid.n_points),
        dtype=complex,
    )
    for lam, phi, psi in zip(decomp.eigenvalues, decomp.signal_modes, decomp.idler_modes):
        coeff = math.sqrt(lam * scale * ds * di)
        out += coeff * np.outer(phi.amplitudes, psi.amplitudes)
    return out


def herald(decomp: SchmidtDecomposition) -> HeraldedState:
    """Trace out the idler: weights are the eigenvalues over the signal modes."""
    return HeraldedState(
        weights=decomp.eigenvalues,
        modes=decomp.signal_modes,
        accumulated_dispersion=0.0,
    )


def purity(state: HeraldedState) -> float:
    """Tr(rho^2) = sum of squared weights."""
    return float(np.sum(state.weights**2))


def schmidt_number(decomp: SchmidtDecomposition) -> float:
    """Effective mode count 1 / sum(lambda_n^2); 1 for a separable JSA."""
    return 1.0 / float(np.sum(decomp.eigenvalues**2))


def postulate_pure_state(decomp: SchmidtDecomposition) -> HeraldedState:
    """Eigenvalue-weighted coherent sum of the signal modes, renormalized.

    Produces the single-mode pure state with (approximately) the same
    spectrum as the heralded mixture; weights collapse to [1].
    """
    grid = decomp.signal_modes[0].grid
    summed = np.zeros(grid.n_points, dtype=complex)
    for lam, phi in zip(decomp.eigenvalues, decomp.signal_modes):
        summed += lam * phi.amplitudes
    norm = math.sqrt(float(np.sum(np.abs(summed) ** 2)) * grid.spacing)
    if norm < 1e-12:
        raise DegenerateStateError(
            "eigenvalue-weighted mode sum cancels to zero norm"
        )
    mode = SpectralFunction(grid, summed / norm)
    return HeraldedState(weights=np.array([1.0]), modes=(mode,), accumulated_dispersion=0.0)
