"""Scenario execution: pipelines, output files, and the run manifest.

Every run writes ``<basename>_manifest.yaml`` holding the fully resolved
scenario (all defaults materialized) plus the list of emitted files; feeding
the manifest back to ``run`` reproduces those files byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from . import io
from .dispersion import DispersiveElement, broadened_duration
from .errors import InvalidArgumentError
from .hom import ScanConfig, default_scan_config, fit_dip, scan, visibility_curve
from .network import (
    BeamSplitterNode,
    DetectorNode,
    NetworkEdge,
    NetworkSpec,
    SourceNode,
    check_cancellation,
    three_photon_coincidence,
)
from .scenario import NetworkConfig, Scenario
from .schmidt import (
    herald,
    postulate_pure_state,
    purity,
    schmidt_decompose,
    schmidt_number,
)
from .source import (
    BandpassFilter,
    PhaseMatching,
    PumpSpectrum,
    apply_filters,
    build_jsa,
)
from .spectral import (
    FrequencyGrid,
    fwhm_wavelength_to_angular,
    gaussian_mode,
    make_grid,
)


@dataclass
class RunResult:
    scenario: Scenario
    out_dir: Path
    files: list[str]


def _pump(sc: Scenario) -> PumpSpectrum:
    return PumpSpectrum(
        center_wavelength=sc.source.pump.center_wavelength_nm,
        pulse_duration_fwhm=sc.source.pump.pulse_duration_fwhm_fs,
    )


def _phase_matching(sc: Scenario) -> PhaseMatching:
    pmc = sc.source.phase_matching
    return PhaseMatching(
        crystal_length=pmc.crystal_length_mm,
        model=pmc.model,
        gvm_signal=pmc.gvm_signal_fs_per_mm,
        gvm_idler=pmc.gvm_idler_fs_per_mm,
    )


def _grid(sc: Scenario) -> FrequencyGrid:
    g = sc.source.grid
    return make_grid(
        2.0 * sc.source.pump.center_wavelength_nm,
        g.reference_bandwidth_fwhm_nm,
        g.span_factor,
        g.n_points,
    )


def _filter(cfg) -> BandpassFilter | None:
    if cfg is None:
        return None
    return BandpassFilter(
        center_wavelength=cfg.center_wavelength_nm, fwhm=cfg.fwhm_nm, shape=cfg.shape
    )


def _truncation_kwargs(sc: Scenario) -> dict:
    return {sc.truncation.kind: sc.truncation.value}


def _heralded_state(sc: Scenario, jsa_decomp):
    if sc.purity_mode == "mixed":
        return herald(jsa_decomp)
    return postulate_pure_state(jsa_decomp)


def build_network(cfg: NetworkConfig) -> NetworkSpec:
    sources = [SourceNode(s.id, s.delay_fs) for s in cfg.sources]
    splitters = []
    for b in cfg.beam_splitters:
        if b.unitary is None:
            splitters.append(BeamSplitterNode(b.id))
        else:
            u = np.array(
                [[complex(c[0], c[1]) for c in row] for row in b.unitary]
            )
            splitters.append(BeamSplitterNode(b.id, u))
    detectors = [DetectorNode(d) for d in cfg.detectors]
    edges = []
    for e in cfg.edges:
        if e.beta_l_fs2 is not None:
            element = DispersiveElement(e.beta_l_fs2, 1.0)
        elif e.beta_fs2_per_mm is not None:
            element = DispersiveElement(e.beta_fs2_per_mm, e.length_mm)
        else:
            element = None
        edges.append(NetworkEdge(e.start, e.end, element))
    return NetworkSpec(sources, splitters, detectors, edges)


def _scan_config(sc: Scenario, delta_beta_l: float) -> ScanConfig:
    if sc.scan is not None:
        return ScanConfig(sc.scan.tau_min_fs, sc.scan.tau_max_fs, sc.scan.n_steps)
    return default_scan_config(delta_beta_l)


def _run_two_photon_scan(sc: Scenario, out: Path, base: str, threads: int) -> list[str]:
    grid = _grid(sc)
    jsa = build_jsa(_pump(sc), _phase_matching(sc), grid, grid)
    jsa = apply_filters(jsa, _filter(sc.filters.signal), _filter(sc.filters.idler))
    decomp = schmidt_decompose(jsa, **_truncation_kwargs(sc))
    state = _heralded_state(sc, decomp)
    delta_beta_l = sc.dispersion.beta_fs2_per_mm * (
        sc.dispersion.length_1_mm - sc.dispersion.length_2_mm
    )
    cfg = _scan_config(sc, delta_beta_l)
    result = scan(state, state, delta_beta_l, cfg, threads=threads)
    metrics = fit_dip(result)

    files = []
    io.write_scan_csv(out / f"{base}_scan.csv", result)
    files.append(f"{base}_scan.csv")
    payload = io.metrics_payload(metrics)
    payload.update(
        {
            "delta_beta_l_fs2": delta_beta_l,
            "purity": purity(state),
            "schmidt_number": schmidt_number(decomp),
            "schmidt_rank": decomp.rank,
            "truncation_tail_mass": decomp.tail_mass,
            "purity_mode": sc.purity_mode,
        }
    )
    io.write_json(out / f"{base}_metrics.json", payload)
    files.append(f"{base}_metrics.json")
    if sc.output.emit_jsi:
        io.write_jsi_csv(out / f"{base}_jsi.csv", jsa)
        files.append(f"{base}_jsi.csv")
    if sc.output.emit_eigenvalues:
        io.write_eigenvalues_csv(out / f"{base}_eigenvalues.csv", decomp.eigenvalues)
        files.append(f"{base}_eigenvalues.csv")
    if sc.output.emit_gnuplot:
        io.write_text(
            out / f"{base}.gnuplot",
            io.gnuplot_scan_script(f"{base}_scan.csv", sc.name),
        )
        files.append(f"{base}.gnuplot")
    return files


def _run_visibility_curve(sc: Scenario, out: Path, base: str, threads: int) -> list[str]:
    grid = _grid(sc)
    pump, pm = _pump(sc), _phase_matching(sc)
    fs, fi = _filter(sc.filters.signal), _filter(sc.filters.idler)
    beta = sc.dispersion.beta_fs2_per_mm
    deltas = sc.dispersion.delta_lengths_mm
    length_1 = sc.dispersion.length_1_mm
    if length_1 < max(deltas):
        raise InvalidArgumentError(
            "dispersion.length_1_mm must cover the largest delta length"
        )
    explicit_cfg = None
    if sc.scan is not None:
        explicit_cfg = ScanConfig(sc.scan.tau_min_fs, sc.scan.tau_max_fs, sc.scan.n_steps)
    curves = {
        mode: visibility_curve(
            pump,
            pm,
            grid,
            grid,
            fs,
            fi,
            beta,
            length_1,
            deltas,
            mode,
            scan_config=explicit_cfg,
            threads=threads,
        )
        for mode in ("mixed", "postulated-pure")
    }
    rows = [
        (dl, vm, wm, vp, wp)
        for (dl, vm, wm), (_, vp, wp) in zip(curves["mixed"], curves["postulated-pure"])
    ]
    name = f"{base}_curve.csv"
    io.write_curve_csv(
        out / name,
        ["delta_l_mm", "visibility_mixed", "fwhm_ps_mixed", "visibility_pure", "fwhm_ps_pure"],
        rows,
    )
    return [name]


def _run_network_check(sc: Scenario, out: Path, base: str) -> list[str]:
    net = build_network(sc.network)
    report = check_cancellation(net, tolerance=sc.network.tolerance_fs2)
    name = f"{base}_report.json"
    io.write_json(out / name, report.to_json_dict())
    return [name]


def _run_network_sim(sc: Scenario, out: Path, base: str) -> list[str]:
    cfg = sc.network
    net = build_network(cfg)
    grid = make_grid(
        cfg.grid.center_wavelength_nm,
        cfg.grid.reference_bandwidth_fwhm_nm,
        cfg.grid.span_factor,
        cfg.grid.n_points,
    )
    width = fwhm_wavelength_to_angular(
        cfg.photon_bandwidth_fwhm_nm, cfg.grid.center_wavelength_nm
    )
    modes = [gaussian_mode(grid, width) for _ in net.sources]
    delays = [s.delay for s in net.sources]
    p = three_photon_coincidence(net, modes, delays)
    report = check_cancellation(net, tolerance=cfg.tolerance_fs2)
    payload = {
        "coincidence_probability": p,
        "delays_fs": {s.id: s.delay for s in net.sources},
        "cancellation": report.to_json_dict(),
        "grid_points": cfg.grid.n_points,
        "photon_bandwidth_fwhm_nm": cfg.photon_bandwidth_fwhm_nm,
    }
    name = f"{base}_sim.json"
    io.write_json(out / name, payload)
    files = [name]
    if cfg.delay_scan is not None:
        ds = cfg.delay_scan
        idx = [s.id for s in net.sources].index(ds.source)
        rows = []
        for d in np.linspace(ds.min_fs, ds.max_fs, ds.n_steps):
            dd = list(delays)
            dd[idx] = float(d)
            rows.append((float(d), three_photon_coincidence(net, modes, dd)))
        scan_name = f"{base}_delay_scan.csv"
        io.write_curve_csv(out / scan_name, ["delay_fs", "probability"], rows)
        files.append(scan_name)
    return files


def _run_broadening(sc: Scenario, out: Path, base: str) -> list[str]:
    b = sc.broadening
    rows = []
    for length in b.lengths_mm:
        beta_l = b.beta_fs2_per_mm * length
        tl = broadened_duration(
            b.bandwidth_fwhm_nm, b.center_wavelength_nm, 0.0, b.input_duration_fs
        )
        widened = broadened_duration(
            b.bandwidth_fwhm_nm, b.center_wavelength_nm, beta_l, b.input_duration_fs
        )
        rows.append((length, beta_l, tl, widened))
    name = f"{base}_broadening.csv"
    io.write_curve_csv(
        out / name,
        ["length_mm", "beta_l_fs2", "transform_limited_fwhm_ps", "broadened_fwhm_ps"],
        rows,
    )
    return [name]


def run(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    threads: int = 1,
) -> RunResult:
    """Execute a scenario and write its outputs plus the run manifest."""
    resolved = scenario.model_copy(deep=True)
    if out_dir is not None:
        resolved.output.directory = str(out_dir)
    if resolved.output.basename is None:
        resolved.output.basename = resolved.name
    out = Path(resolved.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    base = resolved.output.basename

    if resolved.mode == "two-photon-scan":
        files = _run_two_photon_scan(resolved, out, base, threads)
    elif resolved.mode == "visibility-curve":
        files = _run_visibility_curve(resolved, out, base, threads)
    elif resolved.mode == "network-check":
        files = _run_network_check(resolved, out, base)
    elif resolved.mode == "network-sim":
        files = _run_network_sim(resolved, out, base)
    else:
        files = _run_broadening(resolved, out, base)

    try:
        version = metadata.version("homsim")
    except metadata.PackageNotFoundError:  # pragma: no cover
        version = "unknown"
    manifest = {
        "scenario": resolved.model_dump(mode="json"),
        "meta": {"package": "homsim", "version": version, "outputs": sorted(files)},
    }
    manifest_name = f"{base}_manifest.yaml"
    io.write_text(
        out / manifest_name,
        yaml.safe_dump(manifest, sort_keys=True, default_flow_style=False),
    )
    files.append(manifest_name)
    return RunResult(scenario=resolved, out_dir=out, files=files)
