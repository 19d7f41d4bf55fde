"""Study runners: wire the channel modules into reproducible batch runs.

Realization i of a study always derives its generator from
(master seed, study id, i), so results are independent of evaluation order
and of the worker count.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import nearfield, scenario as sc
from .capacity import capacity_waterfilling, capacity_equal_power
from .cdl import bundled_cdl_b, load_cluster_table, mixture_from_clusters
from .emcore import WaveContext, green_decomposition, dyadic_green, rayleigh_distance, reactive_boundary
from .errors import ValidationError
from .patterns import PatternSet, dipole, unit_gain
from .results import Column, ResultTable
from .scenario import scenario_hash, validate_scenario
from .seeds import STUDY_IDS, realization_rng
from .tripol import (benchmark_uplink_only, estimate_joint, group_ports, scalar_aligned,
                     simulate_tripol_channel)
from .wavenumber import (RECEIVER, TRANSMITTER, CouplingVariances, EfficiencyMatrix, VmfCluster,
                         VmfMixture, apply_polarization, assemble_channel, coupling_variances,
                         fourier_harmonics, isotropic_mixture, sample_wavenumber_channel,
                         uniform_planar_array, wavenumber_support)

VERSION = "1.0.0"


def _map_indices(func, count: int, jobs: int) -> list:
    if jobs <= 1:
        return [func(i) for i in range(count)]
    chunk = max(1, count // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, range(count), chunksize=chunk))


def _metadata(scn, seed: int, scale: float) -> dict:
    return {
        "study": scn.study,
        "name": scn.name,
        "seed": seed,
        "scale": scale,
        "version": VERSION,
        "scenario_hash": scenario_hash(scn),
    }


# ---------------------------------------------------------------------------
# densely spaced capacity sweep


@dataclass(frozen=True)
class _SchemeSpec:
    name: str
    variances: CouplingVariances
    amplitude: float
    psi_s: tuple
    rx_harmonics: tuple  # ((spacing_wl, psi_t, psi_p), ...)


def _reweighted(mixture: VmfMixture, weights) -> VmfMixture:
    if len(weights) != len(mixture.clusters):
        raise ValidationError(
            [f"cluster_weights: expected {len(mixture.clusters)} weights, got {len(weights)}"]
        )
    clusters = tuple(
        VmfCluster(weight=float(w), mean_theta=c.mean_theta, mean_phi=c.mean_phi,
                   concentration=c.concentration)
        for w, c in zip(weights, mixture.clusters)
    )
    return VmfMixture(clusters=clusters)


def _densely_spaced_realization(i: int, payload) -> list:
    seed, study_id, mu, sigma, snr_db, n_tx, specs = payload
    coef_power = float(n_tx) * 10.0 ** (snr_db / 10.0)
    out = []
    for spec in specs:
        rng = realization_rng(seed, study_id, i)
        h_a = sample_wavenumber_channel(spec.variances, rng)
        pol = apply_polarization(h_a, mu, sigma, rng)
        gamma_s = EfficiencyMatrix.uniform(spec.amplitude, n_tx)
        for _, psi_t, psi_p in spec.rx_harmonics:
            gamma_r = EfficiencyMatrix.uniform(spec.amplitude, psi_t.shape[0])
            h = assemble_channel(gamma_r, psi_t, psi_p, pol, spec.psi_s[0], spec.psi_s[1], gamma_s)
            out.append(capacity_equal_power(h, coef_power, 1.0).capacity)
    return out


def _run_densely_spaced(scn: sc.DenselySpacedScenario, seed: int, scale: float,
                        jobs: int) -> dict[str, ResultTable]:
    ctx = WaveContext.from_frequency(scn.frequency_hz)
    lam = ctx.wavelength
    l_s = scn.tx_side_wavelengths * lam
    l_r = scn.rx_side_wavelengths * lam
    sup_s = wavenumber_support(l_s, l_s, ctx, side=TRANSMITTER)
    sup_r = wavenumber_support(l_r, l_r, ctx, side=RECEIVER)

    table = bundled_cdl_b() if scn.cluster_table is None else load_cluster_table(scn.cluster_table)
    mix_dep = mixture_from_clusters(table, "departure", scn.tx_boresight)
    mix_arr = mixture_from_clusters(table, "arrival", scn.rx_boresight)
    if scn.cluster_weights is not None:
        mix_dep = _reweighted(mix_dep, scn.cluster_weights)
        mix_arr = _reweighted(mix_arr, scn.cluster_weights)
    iso = isotropic_mixture()
    order = scn.quadrature_order
    var_iso = coupling_variances(sup_r, sup_s, iso, iso, ctx, order)
    var_cdl = coupling_variances(sup_r, sup_s, mix_arr, mix_dep, ctx, order)

    patterns = {"unit": PatternSet.uniform(unit_gain()), "dipole": PatternSet.uniform(dipole())}
    tx_array = uniform_planar_array(l_s, l_s, scn.tx_spacing_wavelengths * lam,
                                    scn.tx_spacing_wavelengths * lam)
    psi_s = {p: fourier_harmonics(tx_array, sup_s, patterns[p], ctx) for p in patterns}
    rx_harm = {}
    for spacing in scn.rx_spacing_wavelengths:
        arr = uniform_planar_array(l_r, l_r, spacing * lam, spacing * lam)
        for p in patterns:
            rx_harm[(spacing, p)] = fourier_harmonics(arr, sup_r, patterns[p], ctx)

    scheme_defs = {
        "ideal": (var_iso, "unit", 1.0),
        "ni": (var_cdl, "unit", 1.0),
        "ni-pd": (var_cdl, "dipole", 1.0),
        "proposed": (var_cdl, "dipole", scn.element_efficiency),
    }
    specs = tuple(
        _SchemeSpec(
            name=name,
            variances=scheme_defs[name][0],
            amplitude=float(np.sqrt(scheme_defs[name][2])),
            psi_s=psi_s[scheme_defs[name][1]],
            rx_harmonics=tuple(
                (spacing,) + rx_harm[(spacing, scheme_defs[name][1])]
                for spacing in scn.rx_spacing_wavelengths
            ),
        )
        for name in scn.schemes
    )

    n_real = max(1, int(round(scn.realizations * scale)))
    n_tx = tx_array.count
    payload = (seed, STUDY_IDS[sc.DENSELY_SPACED], scn.xpr_mu_db, scn.xpr_sigma_db,
               scn.snr_db, n_tx, specs)
    rows = _map_indices(functools.partial(_densely_spaced_realization, payload=payload),
                        n_real, jobs)
    caps = np.array(rows)  # (n_real, n_schemes * n_spacings)

    out = ResultTable(
        columns=(Column("scheme"), Column("rx_spacing", "wavelengths"),
                 Column("mean_capacity", "bit/s/Hz"), Column("std_capacity", "bit/s/Hz"),
                 Column("realizations", "count")),
        metadata=_metadata(scn, seed, scale),
    )
    col = 0
    for spec in specs:
        for spacing, _, _ in spec.rx_harmonics:
            series = caps[:, col]
            out.append(spec.name, float(spacing), float(series.mean()),
                       float(series.std(ddof=1)) if n_real > 1 else 0.0, n_real)
            col += 1
    return {"capacity": out}


# ---------------------------------------------------------------------------
# near-field correlation map


def _linear_array(length: float, count: int) -> np.ndarray:
    if count == 1:
        ys = np.zeros(1)
    else:
        ys = np.linspace(-length / 2.0, length / 2.0, count)
    return np.stack([np.zeros(count), ys, np.zeros(count)], axis=1)


def _los_pair(bs_pos, ue_pos, ctx, time_s, velocity) -> tuple[np.ndarray, np.ndarray]:
    geom = nearfield.ArrayGeometry(tx_positions=ue_pos, rx_positions=bs_pos)
    motion = nearfield.MotionState(velocity=np.asarray(velocity, dtype=float))
    exact = nearfield.channel_impulse_response(geom, rays=(), k_factor=np.inf,
                                               t=time_s, motion=motion, ctx=ctx)
    planar = nearfield.planar_wave_channel(geom, rays=(), k_factor=np.inf,
                                           t=time_s, motion=motion, ctx=ctx)
    return nearfield.narrowband_channel(exact), nearfield.narrowband_channel(planar)


def _run_near_field(scn: sc.NearFieldScenario, seed: int, scale: float,
                    jobs: int) -> dict[str, ResultTable]:
    ctx = WaveContext.from_frequency(scn.frequency_hz)
    lam = ctx.wavelength
    bs_pos = _linear_array(scn.aperture_m, scn.bs_elements)
    rayleigh = rayleigh_distance(scn.aperture_m, ctx)

    corr = ResultTable(
        columns=(Column("case"), Column("distance", "m"), Column("rho")),
        metadata={**_metadata(scn, seed, scale), "rayleigh_distance_m": rayleigh},
    )
    cases = [("drop", float(d)) for d in scn.drop_distances_m]
    if scn.include_far_field_check:
        cases.append(("far-field", 10.0 * rayleigh))
    for case, dist in cases:
        ue = _linear_array((scn.ue_elements - 1) * scn.ue_spacing_wavelengths * lam,
                           scn.ue_elements)
        ue = ue + np.array([dist, 0.0, 0.0])
        h_exact, h_planar = _los_pair(bs_pos, ue, ctx, scn.time_s, scn.velocity_mps)
        rho = nearfield.spatial_correlation(h_planar, h_exact)
        corr.append(case, dist, rho)

    prof_bs = _linear_array(scn.profile_aperture_m, scn.profile_elements)
    prof_ue = np.array([[scn.profile_distance_m, 0.0, 0.0]])
    h_exact, h_planar = _los_pair(prof_bs, prof_ue, ctx, scn.time_s, scn.velocity_mps)
    profile = ResultTable(
        columns=(Column("element", "index"), Column("exact_phase", "rad"),
                 Column("planar_phase", "rad"), Column("deviation", "rad")),
        metadata=_metadata(scn, seed, scale),
    )
    for u in range(scn.profile_elements):
        exact = complex(h_exact[u, 0])
        planar = complex(h_planar[u, 0])
        profile.append(u, float(np.angle(exact)), float(np.angle(planar)),
                       float(np.angle(exact * np.conj(planar))))
    return {"correlation": corr, "phase_profile": profile}


# ---------------------------------------------------------------------------
# tri-polarized estimation comparison


def _tri_pol_trial(i: int, payload) -> tuple:
    seed, study_id, rx_split, tx_split, z_gain_db, xpr_db, pilot_snr_db = payload
    seq = np.random.SeedSequence([seed, study_id, i])
    ch_seed, est_seed, bench_seed = seq.spawn(3)
    channel = simulate_tripol_channel(rx_ports=rx_split, tx_ports=tx_split,
                                      z_gain_db=z_gain_db, xpr_db=xpr_db,
                                      rng=np.random.default_rng(ch_seed))
    h = channel.matrix
    row_power = np.mean(np.abs(h) ** 2, axis=1)
    grouping = group_ports(row_power, rule="median")
    est = estimate_joint(channel, grouping, pilot_snr_db, pilot_snr_db, est_seed)
    per_port = pilot_snr_db + 10.0 * np.log10(row_power / row_power.max())
    bench = benchmark_uplink_only(channel, per_port, bench_seed)

    _, err_joint = scalar_aligned(est.assembled, h)
    _, err_bench = scalar_aligned(bench, h)

    power = 10.0 ** (pilot_snr_db / 10.0)
    r = min(h.shape)
    caps = []
    for estimate in (est.assembled, bench):
        _, _, vh = np.linalg.svd(estimate)
        v_r = vh[:r].conj().T
        caps.append(capacity_waterfilling(h @ v_r, power, 1.0).capacity)
    return caps[0], caps[1], err_joint**2, err_bench**2


def _run_tri_pol(scn: sc.TriPolScenario, seed: int, scale: float,
                 jobs: int) -> dict[str, ResultTable]:
    trials = scn.trials(scale)
    half = scn.bs_ports // 2
    payload = (seed, STUDY_IDS[sc.TRI_POL], scn.rx_split(),
               (half, scn.bs_ports - half, 0), scn.z_gain_db, scn.xpr_db, scn.pilot_snr_db)
    rows = _map_indices(functools.partial(_tri_pol_trial, payload=payload), trials, jobs)
    c_joint = np.array([r[0] for r in rows])
    c_bench = np.array([r[1] for r in rows])
    mse_joint = np.array([r[2] for r in rows])
    mse_bench = np.array([r[3] for r in rows])

    cdf = ResultTable(
        columns=(Column("percentile", "%"), Column("joint_capacity", "bit/s/Hz"),
                 Column("benchmark_capacity", "bit/s/Hz")),
        metadata=_metadata(scn, seed, scale),
    )
    for p in scn.percentiles:
        cdf.append(float(p), float(np.percentile(c_joint, p)), float(np.percentile(c_bench, p)))

    summary = ResultTable(
        columns=(Column("metric"), Column("value")),
        metadata=_metadata(scn, seed, scale),
    )
    summary.append("trials", float(trials))
    summary.append("mean_capacity_joint_bit_s_hz", float(c_joint.mean()))
    summary.append("mean_capacity_benchmark_bit_s_hz", float(c_bench.mean()))
    summary.append("mean_mse_joint", float(mse_joint.mean()))
    summary.append("mean_mse_benchmark", float(mse_bench.mean()))
    summary.append("joint_mse_win_fraction", float(np.mean(mse_joint < mse_bench)))
    return {"capacity_cdf": cdf, "summary": summary}


# ---------------------------------------------------------------------------
# core-kernel validation sweep


def _run_em_core(scn: sc.EmCoreValidationScenario, seed: int, scale: float,
                 jobs: int) -> dict[str, ResultTable]:
    ctx = WaveContext.from_frequency(scn.frequency_hz)
    rng = realization_rng(seed, STUDY_IDS[sc.EM_CORE_VALIDATION], 0)
    k0 = ctx.wavenumber
    sweep = np.geomspace(scn.k0r_min, scn.k0r_max, 25)

    decomp = ResultTable(
        columns=(Column("k0r"), Column("relative_residual")),
        metadata=_metadata(scn, seed, scale),
    )
    per_point = max(1, scn.samples // sweep.size)
    for k0r in sweep:
        worst = 0.0
        for _ in range(per_point):
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            r = direction * (k0r / k0)
            s = np.zeros(3)
            g_inf, g_rnf, g_ff = green_decomposition(r, s, ctx)
            g = dyadic_green(r, s, ctx)
            worst = max(worst, float(np.linalg.norm(g_inf + g_rnf + g_ff - g) / np.linalg.norm(g)))
        decomp.append(float(k0r), worst)

    regions = ResultTable(
        columns=(Column("frequency", "Hz"), Column("aperture", "m"),
                 Column("reactive_boundary", "m"), Column("rayleigh_distance", "m")),
        metadata=_metadata(scn, seed, scale),
    )
    for freq, aperture in scn.region_cases:
        case_ctx = WaveContext.from_frequency(float(freq))
        regions.append(float(freq), float(aperture),
                       float(reactive_boundary(float(aperture), case_ctx)),
                       float(rayleigh_distance(float(aperture), case_ctx)))
    return {"decomposition": decomp, "regions": regions}


# ---------------------------------------------------------------------------
# dispatch


_RUNNERS = {
    sc.DENSELY_SPACED: _run_densely_spaced,
    sc.NEAR_FIELD: _run_near_field,
    sc.TRI_POL: _run_tri_pol,
    sc.EM_CORE_VALIDATION: _run_em_core,
}

_AXES_NOTES = {
    (sc.DENSELY_SPACED, "capacity"):
        "x: receive element spacing (wavelengths); y: mean capacity (bit/s/Hz); one series per scheme",
    (sc.NEAR_FIELD, "correlation"):
        "x: user distance (m); y: correlation between planar and exact wavefront channels",
    (sc.NEAR_FIELD, "phase_profile"):
        "x: element index; y: per-element phase (rad), exact vs planar",
    (sc.TRI_POL, "capacity_cdf"):
        "x: capacity (bit/s/Hz); y: cumulative probability (percentile rows)",
    (sc.TRI_POL, "summary"):
        "scalar comparison metrics, one per row",
    (sc.EM_CORE_VALIDATION, "decomposition"):
        "x: normalized distance k0*r; y: worst relative residual of the three-term kernel split",
    (sc.EM_CORE_VALIDATION, "regions"):
        "field-region boundary distances per carrier/aperture case",
}


def run_study(scn, seed: int | None = None, scale: float = 1.0,
              jobs: int = 1) -> dict[str, ResultTable]:
    """Run one study; returns result tables keyed by table name."""
    problems = validate_scenario(scn)
    if problems:
        raise ValidationError(problems)
    if scale <= 0:
        raise ValidationError(["scale: must be positive"])
    if jobs < 1:
        raise ValidationError(["jobs: must be >= 1"])
    effective = scn.master_seed if seed is None else int(seed)
    return _RUNNERS[scn.study](scn, effective, scale, jobs)


def axes_note(study: str, table_key: str) -> str:
    return _AXES_NOTES.get((study, table_key), "tabular output")


def manifest_text(scn, tables: dict[str, ResultTable], fmt: str, seed: int,
                  scale: float) -> str:
    lines = [
        f"study: {scn.study}",
        f"scenario: {scn.name}",
        f"seed: {seed}",
        f"scale: {scale}",
        f"version: {VERSION}",
        f"scenario_hash: {scenario_hash(scn)}",
        "",
    ]
    for key, table in tables.items():
        lines.append(f"table: {key}.{fmt}")
        lines.append(f"  columns: {', '.join(c.header() for c in table.columns)}")
        lines.append(f"  rows: {len(table.rows)}")
        lines.append(f"  axes: {axes_note(scn.study, key)}")
    return "\n".join(lines) + "\n"
