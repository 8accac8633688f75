import numpy as np
import pytest
from scipy import stats as sstats

from nodelab.grids import Grid, Wavefunction, normalize
from nodelab.nelson import (
    NelsonConfig,
    build_drift_field,
    disc_probability,
    drift,
    equivariance_stat,
    ks_distance,
    sample_from_density,
    simulate,
    write_ensemble_csv,
)
from nodelab.states import gaussian, harmonic_eigenstate, plane_wave, vortex_state


class TestDrift:
    def test_plane_wave_uniform(self, grid_1d):
        psi = plane_wave(grid_1d, 3)
        k = 2 * np.pi * 3 / 20.0
        h = grid_1d.spacing[0]
        pts = np.array([[-3.2], [0.1], [4.7]])
        b = drift(psi, pts)
        assert np.allclose(b[:, 0], np.sin(k * h) / h, atol=1e-12)  # u = 0 exactly

    def test_harmonic_ground_restoring(self, grid_1d, ho_ground):
        xs = np.linspace(-3.0, 3.0, 13).reshape(-1, 1)
        b = drift(ho_ground, xs)
        assert np.max(np.abs(b[:, 0] + xs[:, 0])) < 1e-3  # b = -x

    def test_even_state_balanced_at_center(self, grid_1d, ho_ground):
        b = drift(ho_ground, np.array([0.0]))
        assert abs(b[0]) < 1e-12

    def test_outside_grid_rejected(self, grid_1d, ho_ground):
        with pytest.raises(ValueError, match="outside"):
            drift(ho_ground, np.array([11.0]))

    def test_clamp_applies(self, grid_2d, vortex):
        field = build_drift_field(vortex)
        b = drift(vortex, np.array([[0.03, 0.0]]), drift_clamp=5.0, field=field)
        assert np.hypot(*b[0]) <= 5.0 + 1e-12


class TestSampling:
    def test_inverse_cdf_matches_density(self, grid_1d, ho_ground):
        rng = np.random.default_rng(42)
        pts = sample_from_density(ho_ground, 10_000, rng)
        assert ks_distance(pts, ho_ground) < 1.63 / np.sqrt(10_000)  # 99% KS band

    def test_rejection_2d(self, grid_2d, vortex):
        rng = np.random.default_rng(44)
        pts = sample_from_density(vortex, 20_000, rng)
        p = equivariance_stat(pts, vortex)  # chi-square p-value
        assert p > 1e-3
        # no pile-up at the node; oracle is the refined quadrature,
        # cross-checked against the closed form 1 - (1 + R^2) e^{-R^2}
        expect = disc_probability(vortex, (0.0, 0.0), 0.2)
        assert abs(expect - (1 - 1.04 * np.exp(-0.04))) < 0.05 * expect
        frac = np.mean(np.hypot(pts[:, 0], pts[:, 1]) < 0.2)
        se = np.sqrt(expect * (1 - expect) / 20_000)
        assert abs(frac - expect) <= 3 * se + 1e-12


class TestSimulate:
    def test_ground_state_equivariance(self, grid_1d, ho_ground):
        cfg = NelsonConfig(dt=1e-3, n_paths=30_000, n_steps=2000, seed=5, record_every=500)
        ens = simulate(ho_ground, cfg)
        for ti in range(len(ens.times)):
            assert ks_distance(ens.positions[:, ti, 0], ho_ground) < 0.015

    def test_zero_diffusion_fixed_points(self, grid_1d, ho_ground):
        cfg = NelsonConfig(dt=1e-3, n_paths=64, n_steps=100, seed=1, nu=1e-30)
        init = np.linspace(-2, 2, 64).reshape(-1, 1)
        ens = simulate(ho_ground, cfg, init=init)
        assert np.max(np.abs(ens.positions[:, -1, :] - init)) < 1e-8

    def test_bit_identical_reruns(self, grid_1d, ho_ground):
        cfg = NelsonConfig(dt=2e-3, n_paths=500, n_steps=50, seed=9, record_every=10)
        a = simulate(ho_ground, cfg)
        b = simulate(ho_ground, cfg)
        assert np.array_equal(a.positions, b.positions)

    def test_path_noise_independent_of_ensemble_size(self, grid_1d, ho_ground):
        small = NelsonConfig(dt=2e-3, n_paths=100, n_steps=40, seed=9)
        init200 = sample_from_density(ho_ground, 200, np.random.default_rng([9, 1]))
        big = NelsonConfig(dt=2e-3, n_paths=200, n_steps=40, seed=9)
        a = simulate(ho_ground, small, init=init200[:100])
        b = simulate(ho_ground, big, init=init200)
        assert np.array_equal(a.positions, b.positions[:100])

    def test_vortex_node_avoidance(self, grid_2d, vortex):
        cfg = NelsonConfig(dt=1e-3, n_paths=20_000, n_steps=1000, seed=17, record_every=500)
        ens = simulate(vortex, cfg)
        expect = disc_probability(vortex, (0.0, 0.0), 0.2)
        se = np.sqrt(expect * (1 - expect) / cfg.n_paths)
        for ti in range(len(ens.times)):
            r = np.hypot(ens.positions[:, ti, 0], ens.positions[:, ti, 1])
            assert np.mean(r < 0.2) <= expect + 3 * se

    def test_ks_improves_with_dt(self, grid_1d, ho_ground):
        ks = []
        for dt in (4e-3, 2e-3, 1e-3):
            steps = int(round(2.0 / dt))
            cfg = NelsonConfig(dt=dt, n_paths=20_000, n_steps=steps, seed=23, record_every=steps)
            ens = simulate(ho_ground, cfg)
            ks.append(ks_distance(ens.positions[:, -1, 0], ho_ground))
        noise = 2.0 / np.sqrt(20_000)
        assert ks[-1] <= ks[0] + noise  # monotone within sampling noise
        assert max(ks) < 0.02

    def test_clamp_invariant_enforced(self, grid_1d, ho_ground):
        cfg = NelsonConfig(dt=1e-3, n_paths=10, n_steps=10, seed=0, drift_clamp=1e6)
        with pytest.raises(ValueError, match="drift_clamp"):
            simulate(ho_ground, cfg)


class TestEquivarianceStat:
    def test_matches_scipy_kstest(self, grid_1d, ho_ground):
        rng = np.random.default_rng(7)
        pts = sample_from_density(ho_ground, 5000, rng)

        from nodelab.nelson import _density_cdf

        edges, cdf = _density_cdf(ho_ground)
        res = sstats.kstest(pts.ravel(), lambda x: np.interp(x, edges, cdf))
        assert ks_distance(pts, ho_ground) == pytest.approx(res.statistic, abs=1e-12)

    def test_degenerate_ensemble(self, grid_1d, ho_ground):
        pts = np.full((1000, 1), -9.0)
        assert ks_distance(pts, ho_ground) > 0.99

    def test_empty_rejected(self, grid_1d, ho_ground):
        with pytest.raises(ValueError, match="empty"):
            equivariance_stat(np.empty((0, 1)), ho_ground)


def test_ensemble_csv(tmp_path, grid_1d, ho_ground):
    cfg = NelsonConfig(dt=2e-3, n_paths=20, n_steps=10, seed=2, record_every=5)
    ens = simulate(ho_ground, cfg)
    path = write_ensemble_csv(ens, tmp_path / "paths.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "path,t,x,alive"
    assert len(lines) == 1 + 20 * len(ens.times)
