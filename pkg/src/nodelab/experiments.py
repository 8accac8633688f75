"""Config-driven experiment registry behind the `lab` command.

Eight canned experiments bind the library modules into reproducible
pipelines, each writing a results.json report plus CSV artifacts into
an output directory.  Every run is deterministic given its resolved
parameters: reruns produce bit-identical metrics and CSV payloads.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import evolve as ev
from . import fields as ff
from . import nelson as nl
from . import preparation as prep
from . import topology as topo
from .grids import Grid, PotentialSpec, Wavefunction, save_wavefunction
from .madelung import circle_contour
from .states import gaussian_2d, harmonic_eigenstate, coherent_state, vortex_state

__all__ = ["ExperimentConfig", "ExperimentReport", "run_experiment", "list_experiments", "REGISTRY"]

PASS, FAIL, INFO = "pass", "fail", "informational"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    out_dir: Path


@dataclass(frozen=True)
class ExperimentReport:
    experiment: str
    resolved_params: dict
    metrics: dict
    verdict: dict
    artifact_paths: list[str]
    wall_time: float
    seed: int

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "resolved_params": self.resolved_params,
            "metrics": self.metrics,
            "verdict": self.verdict,
            "artifact_paths": self.artifact_paths,
            "wall_time": self.wall_time,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=1)


@dataclass(frozen=True)
class _Entry:
    name: str
    description: str
    claim: str
    defaults: dict
    runner: Callable


def _passfail(ok: bool) -> str:
    return PASS if ok else FAIL


# ---------------------------------------------------------------------------
# E1: long-time density-floor tracking
# ---------------------------------------------------------------------------


def _run_positivity(p: dict, out: Path):
    harmonic = PotentialSpec("harmonic", omega=1.0)
    metrics: dict = {}
    verdict: dict = {}
    artifacts: list[str] = []
    periods = float(p["periods"])

    g1 = Grid((int(p["ground_points"]),), ((-p["ground_extent"], p["ground_extent"]),))
    dt = float(p["ground_dt"])
    psi = ev.split_operator_ground_state(harmonic_eigenstate(g1, 0), harmonic, dt)
    steps = int(round(periods * 2 * math.pi / dt))
    recs = ev.min_density_series(psi, ev.EvolutionConfig(dt, steps, harmonic, int(p["record_every"])))
    artifacts.append(str(ev.write_series_csv(recs, out / "series_ground.csv")))
    floor = min(r.min_rho for r in recs)
    metrics["ground_floor_ratio"] = floor / recs[0].min_rho
    verdict["ground_floor_within_1pc"] = _passfail(0.99 <= metrics["ground_floor_ratio"] <= 1.01)

    g2 = Grid((int(p["coherent_points"]),), ((-p["coherent_extent"], p["coherent_extent"]),))
    dt = float(p["coherent_dt"])
    psi = coherent_state(g2, float(p["coherent_x0"]), 0.0)
    steps = int(round(periods * 2 * math.pi / dt))
    recs = ev.min_density_series(
        psi, ev.EvolutionConfig(dt, steps, harmonic, int(p["coherent_record_every"])))
    artifacts.append(str(ev.write_series_csv(recs, out / "series_coherent.csv")))
    floor = min(r.min_rho for r in recs)
    metrics["coherent_floor_ratio"] = floor / recs[0].min_rho
    verdict["coherent_floor_within_1pc"] = _passfail(0.99 <= metrics["coherent_floor_ratio"] <= 1.01)
    # Sub-resolved torus effect, reported for transparency: the global
    # minimum sits where the two periodic image tails overlap (orders of
    # magnitude below the bulk density); their relative phase p(t)L makes
    # the overlap interfere during the first ~0.1 time units, until seam
    # scattering floods that depth.  The rigid-translation floor law holds
    # at the recording cadence above; this metric shows the early dip.
    fine = ev.min_density_series(
        psi, ev.EvolutionConfig(dt, int(round(0.4 / dt)), harmonic, 20))
    metrics["coherent_early_floor_ratio"] = min(r.min_rho for r in fine) / fine[0].min_rho
    verdict["coherent_early_interference"] = INFO

    n_v = int(p["vortex_points"])
    ext = float(p["vortex_extent"])
    gv = Grid((n_v, n_v), ((-ext, ext), (-ext, ext)))
    dt = float(p["vortex_dt"])
    psi = vortex_state(gv, 1)
    steps = int(round(periods * 2 * math.pi / dt))
    cfg = ev.EvolutionConfig(dt, steps, harmonic, max(steps // 40, 1))
    recs = ev.min_density_series(psi, cfg)
    artifacts.append(str(ev.write_series_csv(recs, out / "series_vortex.csv")))
    final = ev.evolve(psi, ev.EvolutionConfig(dt, steps, harmonic, steps))[-1][1]
    charges = topo.plaquette_charges(final)
    metrics["vortex_charge_count"] = float(len(charges))
    metrics["vortex_total_charge"] = float(sum(c.charge for c in charges))
    h = gv.spacing[0]
    dist = min((math.hypot(*c.position) for c in charges), default=float("inf"))
    metrics["vortex_zero_distance_cells"] = dist / h
    verdict["vortex_node_persists"] = _passfail(
        metrics["vortex_total_charge"] == 1.0 and metrics["vortex_zero_distance_cells"] <= math.sqrt(2.0)
    )
    return metrics, verdict, artifacts


# ---------------------------------------------------------------------------
# E2: winding stability under random band-limited perturbations
# ---------------------------------------------------------------------------


def _run_winding_stability(p: dict, out: Path):
    n = int(p["points"])
    ext = float(p["extent"])
    grid = Grid((n, n), ((-ext, ext), (-ext, ext)))
    psi = vortex_state(grid, 1, normalized=False)
    loop = circle_contour(grid, (0.0, 0.0), float(p["loop_radius"]))
    rho0 = float(np.min(np.abs(psi.values[loop.index_arrays()]) ** 2))
    eps = math.sqrt(float(p["eps_sq_over_rho0"]) * rho0)
    report, rows = topo.stability_scan(
        psi, [eps], int(p["trials"]), loop, int(p["seed"]),
        bandwidth=int(p["bandwidth"]), jobs=int(p["jobs"]),
    )
    topo.save_stability_report(report, rows, out / "report.json", out / "trials.csv")
    metrics = {
        "charge_preserved_fraction": report.charge_preserved_fraction[0],
        "rho0": rho0,
        "epsilon": eps,
        "displacement_mean": report.displacement_stats[0][0],
        "displacement_max": report.displacement_stats[0][1],
    }
    verdict = {"charge_always_preserved": _passfail(metrics["charge_preserved_fraction"] == 1.0)}
    return metrics, verdict, [str(out / "report.json"), str(out / "trials.csv")]


# ---------------------------------------------------------------------------
# E3: 1D node filling by an out-of-phase admixture
# ---------------------------------------------------------------------------


def _run_node_fill(p: dict, out: Path):
    grid = Grid((int(p["points"]),), ((-p["extent"], p["extent"]),))
    psi1 = harmonic_eigenstate(grid, 1, images=0)
    psi0 = harmonic_eigenstate(grid, 0, images=0)
    eps_list = [float(e) for e in str(p["epsilons"]).split(";")]
    metrics: dict = {}
    verdict: dict = {}
    rows = []
    all_ok = True
    for eps in eps_list:
        mix = Wavefunction(grid, psi1.values + 1j * eps * psi0.values)
        value, loc = topo.min_density(mix)
        predicted = eps**2 / math.sqrt(math.pi)
        ratio = value / predicted
        rows.append((eps, value, predicted, ratio, loc[0]))
        metrics[f"fill_ratio_eps_{eps:g}"] = ratio
        all_ok &= 0.99 <= ratio <= 1.01
    verdict["fill_matches_prediction_1pc"] = _passfail(all_ok)
    path = out / "node_fill.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epsilon,min_density,predicted,ratio,argmin_x\n")
        for r in rows:
            f.write(",".join(repr(float(v)) for v in r) + "\n")
    return metrics, verdict, [str(path)]


# ---------------------------------------------------------------------------
# E4: stochastic-process equivariance and node avoidance
# ---------------------------------------------------------------------------


def _run_equivariance(p: dict, out: Path):
    metrics: dict = {}
    verdict: dict = {}
    artifacts: list[str] = []
    seed = int(p["seed"])
    n_paths = int(p["n_paths"])
    dt = float(p["dt"])
    steps = int(p["n_steps"])
    rec = int(p["record_every"])

    g1 = Grid((int(p["points_1d"]),), ((-p["extent_1d"], p["extent_1d"]),))
    psi1 = harmonic_eigenstate(g1, 0)
    cfg = nl.NelsonConfig(dt=dt, n_paths=n_paths, n_steps=steps, seed=seed, record_every=rec)
    ens = nl.simulate(psi1, cfg)
    ks = [nl.ks_distance(ens.positions[:, ti, 0], psi1) for ti in range(len(ens.times))]
    metrics["ks_max"] = max(ks)
    metrics["ks_final"] = ks[-1]
    verdict["ks_below_0p01"] = _passfail(metrics["ks_max"] < 0.01)
    artifacts.append(str(nl.write_ensemble_csv(ens, out / "ensemble_1d.csv",
                                               every_path=max(1, n_paths // int(p["csv_paths"])))))
    dens_path = out / "density.csv"
    with open(dens_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("x,rho\n")
        for x, r in zip(g1.axis(0), psi1.density()):
            f.write(f"{float(x)!r},{float(r)!r}\n")
    artifacts.append(str(dens_path))

    n2 = int(p["points_2d"])
    g2 = Grid((n2, n2), ((-p["extent_2d"], p["extent_2d"]), (-p["extent_2d"], p["extent_2d"])))
    psi2 = vortex_state(g2, 1)
    cfg2 = nl.NelsonConfig(dt=dt, n_paths=n_paths, n_steps=steps, seed=seed + 1, record_every=rec)
    ens2 = nl.simulate(psi2, cfg2)
    radius = float(p["node_radius"])
    expect = nl.disc_probability(psi2, (0.0, 0.0), radius)
    se = math.sqrt(expect * (1.0 - expect) / n_paths)
    devs = []
    pvals = []
    for ti in range(len(ens2.times)):
        pos = ens2.positions[:, ti]
        frac = float(np.mean(np.hypot(pos[:, 0], pos[:, 1]) < radius))
        devs.append((frac - expect) / se)
        pvals.append(nl.chi_square_pvalue(pos, psi2))
    metrics["node_bin_expected"] = expect
    metrics["node_bin_max_excess_se"] = max(devs)
    metrics["chi2_pvalue_min"] = min(pvals)
    verdict["node_not_overfilled"] = _passfail(metrics["node_bin_max_excess_se"] <= 3.0)
    verdict["chi2_consistency"] = INFO
    artifacts.append(str(nl.write_ensemble_csv(ens2, out / "ensemble_2d.csv",
                                               every_path=max(1, n_paths // int(p["csv_paths"])))))
    artifacts.append(str(nl.write_summary_json(out / "summary.json", ens2.times,
                                               {"ks_1d": ks, "node_excess_se_2d": devs,
                                                "chi2_pvalue_2d": pvals})))
    return metrics, verdict, artifacts


# ---------------------------------------------------------------------------
# E5: preparation contamination through a premeasurement
# ---------------------------------------------------------------------------


def _run_preparation(p: dict, out: Path):
    metrics: dict = {}
    verdict: dict = {}
    artifacts: list[str] = []
    w = float(p["pointer_width"])
    sep = float(p["separation_w"]) * w
    seed = int(p["seed"])

    g1 = Grid((int(p["points_1d"]),), ((-p["extent_1d"], p["extent_1d"]),))
    states = [harmonic_eigenstate(g1, n, images=0) for n in range(3)]
    pointers = prep.PointerFamily((-sep, 0.0, sep), w)
    rng = np.random.default_rng([seed, 0])
    alphas = np.exp(2j * np.pi * rng.random(3)) / math.sqrt(3.0)
    rep1 = prep.prepare_and_probe(alphas, states, pointers, target=1)
    artifacts.append(str(prep.save_preparation_report(rep1, out / "prep_1d.json")))
    ratios = np.exp(-((np.array(pointers.centers)) ** 2) / (2 * w**2))
    weights = alphas * ratios
    weights = weights / np.linalg.norm(weights)
    psi_at_node = np.array([math.pi**-0.25, 0.0, -(math.pi**-0.25) / math.sqrt(2.0)])
    predicted = float(abs(np.sum(weights * psi_at_node)) ** 2)
    metrics["fidelity_1d"] = rep1.fidelity
    metrics["min_density_1d"] = rep1.min_density
    metrics["node_fill_predicted"] = predicted
    metrics["node_fill_ratio"] = rep1.min_density / predicted
    verdict["fidelity_above_1m1e6"] = _passfail(rep1.fidelity > 1.0 - 1e-6)
    verdict["node_filled_within_factor_2"] = _passfail(
        rep1.min_density > 0.0 and 0.5 <= metrics["node_fill_ratio"] <= 2.0
    )

    n2 = int(p["points_2d"])
    g2 = Grid((n2, n2), ((-p["extent_2d"], p["extent_2d"]), (-p["extent_2d"], p["extent_2d"])))
    states2 = [gaussian_2d(g2, sigma=(math.sqrt(0.5), math.sqrt(0.5))), vortex_state(g2, 1)]
    pointers2 = prep.PointerFamily((0.0, sep), w)
    alphas2 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    rep2 = prep.prepare_and_probe(alphas2, states2, pointers2, target=1)
    artifacts.append(str(prep.save_preparation_report(rep2, out / "prep_2d.json")))
    metrics["fidelity_2d"] = rep2.fidelity
    metrics["charge_count_2d"] = float(len(rep2.charges))
    metrics["total_charge_2d"] = float(sum(rep2.charges))
    joint2 = prep.entangle(alphas2, states2, pointers2)
    prep_state = prep.condition(joint2, pointers2.centers[1])
    zero_positions = [c.position for c in topo.plaquette_charges(prep_state)]
    disp = min((math.hypot(*pos) for pos in zero_positions), default=float("inf"))
    metrics["vortex_zero_displacement"] = disp
    verdict["vortex_charge_retained"] = _passfail(rep2.charges == (1,) and disp < 0.1)

    ideal = prep.PointerFamily((-50.0 * w, 0.0, 50.0 * w), w)
    rep3 = prep.prepare_and_probe(
        np.array([1.0, 0.0, 1.0]) / math.sqrt(2.0), states, ideal, target=0
    )
    metrics["ideal_delta_norm"] = rep3.delta_norm
    verdict["ideal_pointer_limit"] = _passfail(rep3.delta_norm < 1e-12)
    return metrics, verdict, artifacts


# ---------------------------------------------------------------------------
# E6: standing-wave functional node is unprotected
# ---------------------------------------------------------------------------


def _standing_ingredients(p: dict):
    spec = ff.LatticeSpec(int(p["lattice_dim"]), int(p["sites"]), float(p["spacing"]), float(p["field_mass"]))
    basis = ff.build_modes(spec)
    vac = ff.vacuum(basis)
    cos_modes = [m for m in basis.modes if m.parity == "cos" and any(m.kvec)]
    mode = min(cos_modes, key=lambda m: m.omega)
    sins = [m for m in basis.modes if m.parity == "sin" and m.kvec == mode.kvec]
    return basis, vac, mode, sins[0]


def _run_standing_node(p: dict, out: Path):
    basis, vac, mode, other = _standing_ingredients(p)
    one = ff.apply_creation(vac, mode.index)
    peak_vac = abs(ff.evaluate(vac, np.zeros(len(basis)))) ** 2
    res = int(p["resolution"])
    window = float(p["window"])
    metrics: dict = {}
    verdict: dict = {}
    artifacts: list[str] = []
    all_ok = True
    zero_free = True
    for eps in [float(e) for e in str(p["epsilons"]).split(";")]:
        mix = ff.superpose([(1.0, one), (1j * eps, vac)])
        sec = ff.section(mix, (mode.index, other.index), window=window, resolution=res)
        charges = topo.plaquette_charges(sec)
        zero_free &= not charges
        axis_density = sec.density()[:, res // 2]
        ratio = float(np.min(axis_density)) / (eps**2 * peak_vac)
        metrics[f"min_ratio_eps_{eps:g}"] = ratio
        all_ok &= 0.99 <= ratio <= 1.01
        if eps == 1e-2:
            artifacts.append(str(save_wavefunction(
                sec, out / "section_standing.csv",
                extra_meta={"section": {"mode_1": mode.index, "mode_2": other.index,
                                        "base_point": [0.0] * len(basis)}})))
    metrics["sections_zero_free"] = float(zero_free)
    verdict["node_fill_matches_eps2"] = _passfail(all_ok)
    verdict["no_protected_zero"] = _passfail(zero_free)

    fine = ff.build_modes(ff.LatticeSpec(1, int(p["dispersion_sites"]), float(p["dispersion_spacing"]),
                                         float(p["field_mass"])))
    worst = 0.0
    rows = []
    for m in fine.modes:
        n = fine.spec.sites
        kk = 2 * math.pi * min(m.kvec[0], n - m.kvec[0]) / (n * fine.spec.spacing)
        if 0 < kk * fine.spec.spacing <= 0.3:
            cont = fine.spec.mass**2 + kk**2
            rel = abs(m.omega**2 - cont) / m.omega**2
            worst = max(worst, rel)
            rows.append((kk, m.omega, math.sqrt(cont), rel))
    metrics["dispersion_max_rel_err"] = worst
    verdict["dispersion_continuum_1pc"] = _passfail(worst < 0.01)
    path = out / "dispersion.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("k,omega_lattice,omega_continuum,rel_err\n")
        for r in sorted(rows):
            f.write(",".join(repr(float(v)) for v in r) + "\n")
    artifacts.append(str(path))
    return metrics, verdict, artifacts


# ---------------------------------------------------------------------------
# E7: traveling-mode functional zero survives vacuum admixture
# ---------------------------------------------------------------------------


def _run_vacuum_superposition(p: dict, out: Path):
    basis, vac, cos_m, sin_m = _standing_ingredients(p)
    traveling = ff.superpose([
        (1 / math.sqrt(2), ff.apply_creation(vac, cos_m.index)),
        (1j / math.sqrt(2), ff.apply_creation(vac, sin_m.index)),
    ])
    res = int(p["resolution"])
    window = float(p["window"])
    metrics: dict = {}
    verdict: dict = {}
    artifacts: list[str] = []
    rows = []
    all_ok = True
    for alpha in [float(a) for a in str(p["alphas"]).split(";")]:
        mixed = ff.superpose([(1.0, traveling), (alpha, vac)])
        sec = ff.section(mixed, (cos_m.index, sin_m.index), window=window, resolution=res)
        charges = topo.plaquette_charges(sec)
        ok = len(charges) == 1 and charges[0].charge == 1
        if ok:
            x, y = charges[0].position
            pred_x = -alpha / math.sqrt(cos_m.omega)
            rel = math.hypot(x - pred_x, y) / abs(pred_x)
            rows.append((alpha, 1, x, y, rel))
            metrics[f"zero_rel_err_alpha_{alpha:g}"] = rel
            ok = rel <= 0.02
            if alpha == max(float(a) for a in str(p["alphas"]).split(";")):
                metrics["zero_x"] = x
                metrics["zero_y"] = y
                metrics["zero_x_predicted"] = pred_x
                artifacts.append(str(save_wavefunction(
                    sec, out / "section.csv",
                    extra_meta={"section": {"mode_1": cos_m.index, "mode_2": sin_m.index,
                                            "base_point": [0.0] * len(basis)}})))
        else:
            rows.append((alpha, 0, float("nan"), float("nan"), float("nan")))
        all_ok &= ok
    verdict["displaced_zero_tracks_prediction"] = _passfail(all_ok)
    path = out / "charges.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epsilon,trial,charge,zero_x,zero_y,displacement\n")
        for alpha, q, x, y, rel in rows:
            f.write(f"{alpha!r},0,{q},{x!r},{y!r},{rel!r}\n")
    artifacts.append(str(path))
    return metrics, verdict, artifacts


# ---------------------------------------------------------------------------
# E8: a double zero splits into unit charges
# ---------------------------------------------------------------------------


def _run_charge_splitting(p: dict, out: Path):
    n = int(p["points"])
    ext = float(p["extent"])
    grid = Grid((n, n), ((-ext, ext), (-ext, ext)))
    psi = vortex_state(grid, 2, normalized=False)
    base_charges = topo.plaquette_charges(psi)
    eps = float(p["epsilon"])
    perturbed = Wavefunction(grid, psi.values + eps)
    charges = topo.plaquette_charges(perturbed)
    inner = [c for c in charges if math.hypot(*c.position) < 1.0]
    metrics: dict = {
        "base_total_charge": float(sum(c.charge for c in base_charges)),
        "inner_zero_count": float(len(inner)),
        "inner_total_charge": float(sum(c.charge for c in inner)),
    }
    verdict: dict = {}
    if len(inner) == 2:
        (x1, y1), (x2, y2) = (c.position for c in inner)
        sep = math.hypot(x1 - x2, y1 - y2)
        metrics["separation"] = sep
        metrics["separation_predicted"] = 2.0 * math.sqrt(eps)
        metrics["separation_rel_err"] = abs(sep - 2.0 * math.sqrt(eps)) / (2.0 * math.sqrt(eps))
        ok = (metrics["separation_rel_err"] <= 0.05
              and sorted(c.charge for c in inner) == [1, 1]
              and metrics["base_total_charge"] == 2.0)
    else:
        ok = False
    verdict["splits_into_unit_charges"] = _passfail(ok)
    path = out / "zeros.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("epsilon,trial,charge,zero_x,zero_y,displacement\n")
        for c in charges:
            d = math.hypot(*c.position)
            f.write(f"{eps!r},0,{c.charge},{c.position[0]!r},{c.position[1]!r},{d!r}\n")
    return metrics, verdict, [str(path)]


REGISTRY: dict[str, _Entry] = {
    "E1": _Entry(
        "positivity",
        "Long-time minimum-density tracking for nodeless states and node persistence for a vortex.",
        "an everywhere-positive density stays positive under evolution; the quantum "
        "potential pushes probability back into any developing minimum",
        {
            "periods": 10.0, "record_every": 500,
            "ground_points": 128, "ground_extent": 6.0, "ground_dt": 7e-4,
            "coherent_points": 256, "coherent_extent": 8.0, "coherent_dt": 2.5e-4,
            "coherent_x0": 2.0, "coherent_record_every": 500,
            "vortex_points": 65, "vortex_extent": 6.0, "vortex_dt": 1.6e-3,
            "seed": 1101, "jobs": 1,
        },
        _run_positivity,
    ),
    "E2": _Entry(
        "winding-stability",
        "Random band-limited perturbations against a unit vortex; loop charge must survive.",
        "a zero with nonzero winding number can only move under perturbations "
        "small against the surrounding density",
        {
            "points": 257, "extent": 6.0, "loop_radius": 1.0,
            "eps_sq_over_rho0": 0.01, "trials": 100, "bandwidth": 8, "seed": 1102, "jobs": 1,
        },
        _run_winding_stability,
    ),
    "E3": _Entry(
        "node-fill-1d",
        "A 1D node is destroyed by any small out-of-phase admixture; the residual density is exactly eps^2 |filler|^2.",
        "one-dimensional zeros are unprotected: an out-of-phase component lifts "
        "the density minimum to its own weight at the node",
        {"points": 128, "extent": 2.5, "epsilons": "0.1;0.01;0.001", "seed": 1103, "jobs": 1},
        _run_node_fill,
    ),
    "E4": _Entry(
        "nelson-equivariance",
        "Forward-diffusion ensembles initialized from |psi|^2 stay |psi|^2-distributed; paths avoid the vortex node.",
        "the stochastic process reproduces quantum position statistics for "
        "stationary nodeless states and does not pile onto zeros",
        {
            "points_1d": 512, "extent_1d": 10.0, "points_2d": 257, "extent_2d": 6.0,
            "n_paths": 100_000, "dt": 1e-3, "n_steps": 5000, "record_every": 500,
            "node_radius": 0.2, "csv_paths": 1000, "seed": 1104, "jobs": 1,
        },
        _run_equivariance,
    ),
    "E5": _Entry(
        "preparation-contamination",
        "Measurement-based preparation leaves every branch slightly populated; 1D target nodes fill, 2D vortex zeros only move.",
        "realistic pointer states never vanish, so prepared states carry a small "
        "unknown admixture of the unselected branches",
        {
            "points_1d": 256, "extent_1d": 6.0, "points_2d": 129, "extent_2d": 6.0,
            "pointer_width": 0.25, "separation_w": 6.0, "seed": 1105, "jobs": 1,
        },
        _run_preparation,
    ),
    "E6": _Entry(
        "field-standing-node",
        "Standing-wave one-particle functional: its nodal hyperplane is erased by an imaginary vacuum admixture.",
        "a standing-wave excitation depends on one mode coordinate only, so its "
        "zero is one-dimensional and unprotected against the vacuum background",
        {
            "lattice_dim": 1, "sites": 16, "spacing": 1.0, "field_mass": 1.0,
            "epsilons": "0.1;0.01;0.001", "window": 2.5, "resolution": 128,
            "dispersion_sites": 64, "dispersion_spacing": 0.5, "seed": 1106, "jobs": 1,
        },
        _run_standing_node,
    ),
    "E7": _Entry(
        "field-vacuum-superposition",
        "Traveling-mode one-particle functional keeps a unit section zero under vacuum admixture, displaced by the closed-form amount.",
        "a traveling excitation spans two mode coordinates, so its zero carries "
        "winding and survives vacuum contamination by moving",
        {
            "lattice_dim": 1, "sites": 16, "spacing": 1.0, "field_mass": 1.0,
            "alphas": "0.1;0.3;0.5", "window": 2.5, "resolution": 128, "seed": 1107, "jobs": 1,
        },
        _run_vacuum_superposition,
    ),
    "E8": _Entry(
        "charge-splitting",
        "A charge-2 zero splits under a constant perturbation into two unit zeros separated by 2 sqrt(eps).",
        "higher winding is not lost under perturbation, only distributed over "
        "separate unit zeros",
        {"points": 257, "extent": 6.0, "epsilon": 0.01, "seed": 1108, "jobs": 1},
        _run_charge_splitting,
    ),
}


def list_experiments() -> list[dict]:
    out = []
    for key, entry in REGISTRY.items():
        out.append({
            "id": key,
            "name": entry.name,
            "description": entry.description,
            "claim": entry.claim,
            "defaults": dict(entry.defaults),
        })
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment not in REGISTRY:
        known = ", ".join(REGISTRY)
        raise KeyError(f"unknown experiment {cfg.experiment!r}; registry: {known}")
    entry = REGISTRY[cfg.experiment]
    params = dict(entry.defaults)
    for key, value in cfg.params.items():
        if key not in params:
            raise KeyError(f"unknown parameter {key!r} for {cfg.experiment}; "
                           f"known: {', '.join(params)}")
        params[key] = value
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        metrics, verdict, artifacts = entry.runner(params, out)
    except (ValueError, ArithmeticError, FloatingPointError) as exc:
        metrics = {"error": float("nan")}
        verdict = {"completed": FAIL}
        artifacts = []
        params["error_message"] = str(exc)
    wall = time.perf_counter() - start
    report = ExperimentReport(cfg.experiment, params, metrics, verdict,
                              [str(Path(a).name) for a in artifacts], wall, int(params["seed"]))
    with open(out / "results.json", "w", encoding="utf-8") as f:
        f.write(report.to_json())
        f.write("\n")
    return report
