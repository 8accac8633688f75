"""Acceptance gate: every release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The heavy pipelines
(E1 positivity, E4 stochastic equivariance) execute once as module
fixtures; everything else is direct.
"""
import json
import math
import time

import numpy as np
import pytest

from nodelab.evolve import EvolutionConfig, evolve
from nodelab.experiments import ExperimentConfig, run_experiment
from nodelab.grids import Grid, PotentialSpec, Wavefunction
from nodelab.madelung import (
    circle_contour,
    circulation,
    decompose,
    quantum_potential,
    reconstruct,
    reconstruct_from_flow,
    rectangle_contour,
)
from nodelab.states import (
    coherent_state,
    harmonic_eigenstate,
    nodeless_corpus,
    vortex_state,
)
from nodelab.topology import min_density

HARMONIC = PotentialSpec("harmonic", omega=1.0)


def report(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def e1_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("e1")
    return run_experiment(ExperimentConfig("E1", {}, out))


@pytest.fixture(scope="module")
def e4_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("e4")
    return run_experiment(ExperimentConfig("E4", {}, out))


def test_madelung_round_trip():
    corpus = nodeless_corpus()
    start = time.perf_counter()
    worst = 0.0
    for name, psi in corpus:
        back = reconstruct(decompose(psi))
        i = np.unravel_index(np.argmax(np.abs(psi.values)), psi.values.shape)
        phase = psi.values[i] / back.values[i]
        worst = max(worst, float(np.max(np.abs(phase * back.values - psi.values))))
    elapsed = time.perf_counter() - start
    report("madelung round trip (20 nodeless states)", worst < 1e-12 and elapsed < 1.0,
           f"max deviation {worst:.2e}, {elapsed:.2f}s")


def test_quantum_hamilton_jacobi_balance():
    start = time.perf_counter()
    grid = Grid((512,), ((-10.0, 10.0),))
    psi = harmonic_eigenstate(grid, 0)
    q = quantum_potential(psi.density(), grid)
    x = grid.axis(0)
    window = np.abs(x) <= 4.0
    worst = float(np.max(np.abs((q + 0.5 * x**2)[window] - 0.5)))
    elapsed = time.perf_counter() - start
    report("quantum Hamilton-Jacobi balance (|x|<=4, N=512)", worst < 1e-4 and elapsed < 1.0,
           f"max |Q+V-E| = {worst:.2e}, {elapsed:.2f}s")


def test_circulation_quantization():
    grid = Grid((257, 257), ((-6.0, 6.0), (-6.0, 6.0)))
    psi = vortex_state(grid, 1)
    ax = grid.axis(0)
    to_i = lambda v: int(np.argmin(np.abs(ax - v)))
    rng = np.random.default_rng(2026)

    enclosing_ok = 0
    for _ in range(50):
        x0 = rng.uniform(-3.5, -0.3)
        x1 = rng.uniform(0.3, 3.5)
        y0 = rng.uniform(-3.5, -0.3)
        y1 = rng.uniform(0.3, 3.5)
        loop = rectangle_contour(grid, (to_i(x0), to_i(x1)), (to_i(y0), to_i(y1)))
        enclosing_ok += circulation(psi, loop) == 1
    missing_ok = 0
    for _ in range(50):
        x0 = rng.uniform(0.3, 2.0)
        x1 = x0 + rng.uniform(0.3, 1.5)
        y0 = rng.uniform(-3.0, 1.5)
        y1 = y0 + rng.uniform(0.3, 1.5)
        loop = rectangle_contour(grid, (to_i(x0), to_i(x1)), (to_i(y0), to_i(y1)))
        missing_ok += circulation(psi, loop) == 0
    report("circulation quantization (50+50 random contours)",
           enclosing_ok == 50 and missing_ok == 50,
           f"{enclosing_ok}/50 enclosing give 1, {missing_ok}/50 outside give 0")

    fine = Grid((513, 513), ((-6.0, 6.0), (-6.0, 6.0)))
    f = decompose(vortex_state(fine, 1))
    xm, ym = fine.meshes()
    mask = (np.hypot(xm, ym) >= 0.5) & (np.hypot(xm, ym) <= 2.0)
    axf = fine.axis(0)
    base = (int(np.argmin(np.abs(axf - 1.2))), int(np.argmin(np.abs(axf))))
    half = tuple(0.5 * v for v in f.v)
    _, defect = reconstruct_from_flow(f.rho, half, fine, base, valid_mask=mask)
    report("holonomy defect of half-scaled flow ~ pi*hbar",
           abs(defect - math.pi) < 0.05 * math.pi, f"defect {defect:.5f} vs pi")


def test_evolution_fidelity():
    start = time.perf_counter()
    grid = Grid((256,), ((-8.0, 8.0),))
    psi = coherent_state(grid, 2.0, 0.0)
    dt = 2.5e-4
    steps = int(round(3 * 2 * math.pi / dt))
    cfg = EvolutionConfig(dt, steps, HARMONIC, record_every=steps // 48)
    x = grid.axis(0)
    worst_center = 0.0
    for t, state in evolve(psi, cfg):
        mean = float(np.sum(x * state.density()) * grid.cell_volume)
        worst_center = max(worst_center, abs(mean - 2.0 * math.cos(t)))
    report("coherent center tracks 2 cos t over 3 periods", worst_center < 1e-4,
           f"max deviation {worst_center:.2e}")

    norm_run = evolve(psi, EvolutionConfig(dt, 1000, HARMONIC, record_every=1000))
    drift = abs(norm_run[-1][1].norm - 1.0)
    report("norm drift below 1e-10 per 1000 steps", drift < 1e-10, f"drift {drift:.2e}")

    g96 = Grid((96,), ((-8.0, 8.0),))
    psi96 = coherent_state(g96, 2.0, 0.0)
    errs = []
    for dt_c in (2e-3, 1e-3, 5e-4):
        n = int(round(2 * math.pi / dt_c))
        final = evolve(psi96, EvolutionConfig(dt_c, n, HARMONIC, record_every=n))[-1][1]
        exact = coherent_state(g96, 2.0, n * dt_c)
        errs.append(float(np.max(np.abs(final.values - exact.values))))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    elapsed = time.perf_counter() - start
    report("second-order convergence in dt", 2.8 < r1 < 5.5 and 2.8 < r2 < 5.5 and elapsed < 30.0,
           f"halving ratios {r1:.2f}, {r2:.2f}; {elapsed:.1f}s")


def test_positivity_protection(e1_report):
    m, v = e1_report.metrics, e1_report.verdict
    report("stationary state keeps its density floor (10 periods)",
           v["ground_floor_within_1pc"] == "pass",
           f"floor ratio {m['ground_floor_ratio']:.6f}")
    report("coherent state keeps its density floor (10 periods)",
           v["coherent_floor_within_1pc"] == "pass",
           f"floor ratio {m['coherent_floor_ratio']:.6f}")
    report("vortex node persists within one grid cell",
           v["vortex_node_persists"] == "pass",
           f"distance {m['vortex_zero_distance_cells']:.2e} cells")
    report("positivity experiment runtime < 60 s", e1_report.wall_time < 60.0,
           f"{e1_report.wall_time:.1f}s")


def test_winding_stability(tmp_path):
    e2 = run_experiment(ExperimentConfig("E2", {}, tmp_path / "e2"))
    report("100 random perturbations at eps^2 = 0.01 rho0 preserve charge",
           e2.metrics["charge_preserved_fraction"] == 1.0,
           f"fraction {e2.metrics['charge_preserved_fraction']}")
    e8 = run_experiment(ExperimentConfig("E8", {}, tmp_path / "e8"))
    report("charge-2 zero splits into unit pair at 2 sqrt(eps) (5%)",
           e8.verdict["splits_into_unit_charges"] == "pass",
           f"separation error {e8.metrics.get('separation_rel_err', float('nan')):.3%}")
    report("winding-stability runtime < 30 s",
           e2.wall_time + e8.wall_time < 30.0,
           f"{e2.wall_time + e8.wall_time:.1f}s")


def test_node_filling_1d():
    grid = Grid((128,), ((-2.5, 2.5),))
    psi1 = harmonic_eigenstate(grid, 1, images=0)
    psi0 = harmonic_eigenstate(grid, 0, images=0)
    ok = True
    ratios = []
    for eps in (1e-1, 1e-2, 1e-3):
        mix = Wavefunction(grid, psi1.values + 1j * eps * psi0.values)
        value, _ = min_density(mix)
        ratio = value / (eps**2 / math.sqrt(math.pi))
        ratios.append(ratio)
        ok &= 0.99 <= ratio <= 1.01
    report("1D node filled to eps^2 |filler|^2 within 1%", ok,
           "ratios " + ", ".join(f"{r:.4f}" for r in ratios))


def test_nelson_equivariance(e4_report):
    m, v = e4_report.metrics, e4_report.verdict
    report("diffusion ensemble stays |psi|^2-distributed (KS < 0.01, 1e5 paths)",
           v["ks_below_0p01"] == "pass", f"KS max {m['ks_max']:.4f}")
    report("vortex node-avoidance bin within 3 standard errors",
           v["node_not_overfilled"] == "pass",
           f"max excess {m['node_bin_max_excess_se']:.2f} SE")
    report("stochastic experiment runtime < 5 min", e4_report.wall_time < 300.0,
           f"{e4_report.wall_time:.1f}s")


def test_preparation_contamination(tmp_path):
    e5 = run_experiment(ExperimentConfig("E5", {}, tmp_path / "e5"))
    m, v = e5.metrics, e5.verdict
    report("prepared-state fidelity above 1 - 1e-6",
           v["fidelity_above_1m1e6"] == "pass", f"fidelity {m['fidelity_1d']:.12f}")
    report("1D target node filled within factor 2 of the pointer-ratio value",
           v["node_filled_within_factor_2"] == "pass",
           f"ratio {m['node_fill_ratio']:.3f}")
    report("2D vortex target keeps one unit zero displaced < 0.1",
           v["vortex_charge_retained"] == "pass",
           f"displacement {m['vortex_zero_displacement']:.2e}")


def test_field_ontology(tmp_path):
    e6 = run_experiment(ExperimentConfig("E6", {}, tmp_path / "e6"))
    report("standing-mode node fills to eps^2 |vacuum|^2 within 1%, sections zero-free",
           e6.verdict["node_fill_matches_eps2"] == "pass"
           and e6.verdict["no_protected_zero"] == "pass",
           f"ratios ~ {e6.metrics['min_ratio_eps_0.01']:.4f}")
    report("lattice dispersion matches continuum within 1% for |k|a <= 0.3",
           e6.verdict["dispersion_continuum_1pc"] == "pass",
           f"max rel err {e6.metrics['dispersion_max_rel_err']:.2%}")
    e7 = run_experiment(ExperimentConfig("E7", {}, tmp_path / "e7"))
    report("traveling-mode zero tracks the closed-form displacement within 2%",
           e7.verdict["displaced_zero_tracks_prediction"] == "pass",
           f"worst rel err {max(v for k, v in e7.metrics.items() if k.startswith('zero_rel_err')):.2%}")
    report("field-ontology runtime < 60 s", e6.wall_time + e7.wall_time < 60.0,
           f"{e6.wall_time + e7.wall_time:.1f}s")


def test_determinism(tmp_path):
    a = run_experiment(ExperimentConfig("E3", {}, tmp_path / "a"))
    b = run_experiment(ExperimentConfig("E3", {}, tmp_path / "b"))
    ja = json.loads((tmp_path / "a" / "results.json").read_text())["metrics"]
    jb = json.loads((tmp_path / "b" / "results.json").read_text())["metrics"]
    same = json.dumps(ja) == json.dumps(jb)
    c = run_experiment(ExperimentConfig("E2", {"trials": 12}, tmp_path / "c"))
    d = run_experiment(ExperimentConfig("E2", {"trials": 12}, tmp_path / "d"))
    same &= (tmp_path / "c" / "trials.csv").read_bytes() == (tmp_path / "d" / "trials.csv").read_bytes()
    same &= json.dumps(c.metrics) == json.dumps(d.metrics)
    report("experiment reruns are bit-identical", same)
