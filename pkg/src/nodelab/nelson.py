"""Forward stochastic sampling of stationary states.

Paths follow dX = b(X) dt + dW with forward drift b = v + nu * grad(rho)/rho
(current velocity plus osmotic velocity, nu = hbar/2m) and per-axis noise
variance 2 nu dt.  For a stationary nodeless state the |psi|^2 ensemble is
invariant under this diffusion, which the equivariance statistics check.
Near a zero the drift diverges; it is clamped so the integrator stays
defined, and the node-avoidance statistics expose any distortion this
causes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as _sstats

from .grids import Grid, Wavefunction, gradient
from .madelung import DEFAULT_ZERO_THRESHOLD, _valid_mask

__all__ = [
    "NelsonConfig",
    "TrajectoryEnsemble",
    "DriftField",
    "build_drift_field",
    "drift",
    "simulate",
    "sample_from_density",
    "equivariance_stat",
    "ks_distance",
    "chi_square_pvalue",
    "write_ensemble_csv",
]

_BLOCK = 4096  # fixed path-block size; keeps per-path noise independent of n_paths


@dataclass(frozen=True)
class NelsonConfig:
    dt: float
    n_paths: int
    n_steps: int
    seed: int
    nu: float = 0.5  # hbar / 2m in natural units
    drift_clamp: float | None = None  # None: resolved to 0.5 h_min / dt at run time
    record_every: int = 1

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not self.dt > 0 or self.n_paths < 1 or self.n_steps < 1 or self.record_every < 1:
            raise ValueError("bad stepping parameters")

    def resolve_clamp(self, grid: Grid) -> float:
        h_min = min(grid.spacing)
        if self.drift_clamp is None:
            return 0.5 * h_min / self.dt
        if self.drift_clamp * self.dt >= h_min:
            raise ValueError("drift_clamp * dt must stay below one grid cell")
        return self.drift_clamp


@dataclass(frozen=True)
class TrajectoryEnsemble:
    grid: Grid
    times: np.ndarray          # (n_rec,)
    positions: np.ndarray      # (n_paths, n_rec, dim)
    alive: np.ndarray          # (n_paths,)


@dataclass(frozen=True)
class DriftField:
    """Forward drift b = v + nu grad(ln rho) tabulated on the grid."""

    grid: Grid
    components: tuple[np.ndarray, ...]


def build_drift_field(psi: Wavefunction, nu: float = 0.5,
                      zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> DriftField:
    """Tabulate b on the grid.

    The osmotic part uses centered differences of ln(rho) (exact for
    Gaussian densities); v comes from Im(grad psi / psi).  Masked points
    get b = 0 and are handled by the clamp during integration.
    """
    grid = psi.grid
    vals = psi.values
    rho = psi.density()
    mask = _valid_mask(rho, zero_threshold)
    log_rho = np.log(np.maximum(rho, 1e-300))
    comps = []
    for axis in range(grid.dim):
        g = gradient(vals, grid, axis, method="fd")
        ratio = np.zeros_like(vals)
        np.divide(g, vals, out=ratio, where=mask)
        v = np.where(mask, ratio.imag, 0.0)
        u = nu * gradient(log_rho, grid, axis, method="fd")
        b = np.where(mask, v + u, 0.0)
        comps.append(np.nan_to_num(b))
    return DriftField(grid, tuple(comps))


def _interpolate(field: DriftField, pos: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of every drift component at positions
    (n, dim), with periodic wrap."""
    grid = field.grid
    n, dim = pos.shape
    out = np.empty((n, dim))
    idx = []
    frac = []
    for j in range(dim):
        a, _ = grid.extent_per_axis[j]
        h = grid.spacing[j]
        t = (pos[:, j] - a) / h
        i0 = np.floor(t).astype(np.int64)
        frac.append(t - i0)
        idx.append(i0 % grid.shape[j])
    if dim == 1:
        i0 = idx[0]
        i1 = (i0 + 1) % grid.shape[0]
        f = frac[0]
        comp = field.components[0]
        out[:, 0] = comp[i0] * (1 - f) + comp[i1] * f
        return out
    i0, j0 = idx
    i1 = (i0 + 1) % grid.shape[0]
    j1 = (j0 + 1) % grid.shape[1]
    fx, fy = frac
    w00 = (1 - fx) * (1 - fy)
    w10 = fx * (1 - fy)
    w01 = (1 - fx) * fy
    w11 = fx * fy
    for c, comp in enumerate(field.components):
        out[:, c] = comp[i0, j0] * w00 + comp[i1, j0] * w10 + comp[i0, j1] * w01 + comp[i1, j1] * w11
    return out


def drift(psi: Wavefunction, x: np.ndarray | tuple, nu: float = 0.5,
          drift_clamp: float = 1e3, field: DriftField | None = None) -> np.ndarray:
    """Forward drift at arbitrary points (bilinear between grid values)."""
    grid = psi.grid
    pos = np.atleast_2d(np.asarray(x, dtype=float))
    if pos.shape[1] != grid.dim:
        raise ValueError("point dimension does not match the grid")
    for j in range(grid.dim):
        a, b = grid.extent_per_axis[j]
        if np.any(pos[:, j] < a) or np.any(pos[:, j] >= b):
            raise ValueError("point outside the grid extent")
    if field is None:
        field = build_drift_field(psi, nu)
    out = _interpolate(field, pos)
    mag = np.sqrt(np.sum(out**2, axis=1, keepdims=True))
    scale = np.ones_like(mag)
    np.divide(drift_clamp, mag, out=scale, where=mag > drift_clamp)
    out *= scale
    return out[0] if np.ndim(x) == 1 else out


def sample_from_density(psi: Wavefunction, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points from |psi|^2: inverse CDF in 1D, rejection in 2D.

    Cells are centered on the grid nodes (node i owns [x_i - h/2,
    x_i + h/2)), which keeps the sampler and the CDF model below-O(h)
    consistent with the sampled density.
    """
    grid = psi.grid
    rho = psi.density()
    if grid.dim == 1:
        w = rho * grid.cell_volume
        cdf = np.concatenate([[0.0], np.cumsum(w)])
        cdf /= cdf[-1]
        a, _ = grid.extent_per_axis[0]
        h = grid.spacing[0]
        edges = (a - 0.5 * h) + h * np.arange(grid.shape[0] + 1)
        u = rng.random(n)
        pos = np.interp(u, cdf, edges)
        return pos.reshape(n, 1)
    rho_max = float(np.max(rho))
    (a0, b0), (a1, b1) = grid.extent_per_axis
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        m = max(2 * (n - filled), 1024)
        cand = np.column_stack([rng.uniform(a0, b0, m), rng.uniform(a1, b1, m)])
        ix = np.rint((cand[:, 0] - a0) / grid.spacing[0]).astype(int) % grid.shape[0]
        iy = np.rint((cand[:, 1] - a1) / grid.spacing[1]).astype(int) % grid.shape[1]
        accept = rng.random(m) * rho_max < rho[ix, iy]
        take = cand[accept][: n - filled]
        out[filled:filled + take.shape[0]] = take
        filled += take.shape[0]
    return out


def simulate(psi: Wavefunction, cfg: NelsonConfig, init: str | np.ndarray = "density") -> TrajectoryEnsemble:
    """Euler-Maruyama integration of the Nelson diffusion for a stationary psi.

    Noise streams are keyed by (seed, block) over fixed-size path blocks,
    so path p sees the same noise regardless of n_paths; identical
    (seed, config) gives bit-identical ensembles.
    """
    grid = psi.grid
    clamp = cfg.resolve_clamp(grid)
    field = build_drift_field(psi, cfg.nu)
    dim = grid.dim
    sigma = np.sqrt(2.0 * cfg.nu * cfg.dt)
    extents = np.array(grid.extent_per_axis)
    lengths = extents[:, 1] - extents[:, 0]

    if isinstance(init, str):
        if init != "density":
            raise ValueError(f"unknown init spec {init!r}")
        rng0 = np.random.default_rng([cfg.seed, 1])
        pos0 = sample_from_density(psi, cfg.n_paths, rng0)
    else:
        pos0 = np.array(init, dtype=float).reshape(cfg.n_paths, dim)

    rec_steps = [0] + [s for s in range(1, cfg.n_steps + 1)
                       if s % cfg.record_every == 0 or s == cfg.n_steps]
    rec_steps = sorted(set(rec_steps))
    n_rec = len(rec_steps)
    positions = np.empty((cfg.n_paths, n_rec, dim))
    times = np.array([s * cfg.dt for s in rec_steps])

    for b0 in range(0, cfg.n_paths, _BLOCK):
        b1 = min(b0 + _BLOCK, cfg.n_paths)
        rng = np.random.default_rng([cfg.seed, 0, b0 // _BLOCK])
        pos = pos0[b0:b1].copy()
        rec_i = 0
        if rec_steps[0] == 0:
            positions[b0:b1, 0] = pos
            rec_i = 1
        for step in range(1, cfg.n_steps + 1):
            noise = rng.standard_normal((_BLOCK, dim))[: b1 - b0]
            b = _interpolate(field, pos)
            mag = np.sqrt(np.sum(b**2, axis=1, keepdims=True))
            over = mag > clamp
            if np.any(over):
                b = np.where(over, b * (clamp / mag), b)
            pos = pos + b * cfg.dt + sigma * noise
            pos = extents[:, 0] + np.mod(pos - extents[:, 0], lengths)
            if rec_i < n_rec and step == rec_steps[rec_i]:
                positions[b0:b1, rec_i] = pos
                rec_i += 1

    alive = np.ones(cfg.n_paths, dtype=bool)  # periodic wrap: paths never leave
    return TrajectoryEnsemble(grid, times, positions, alive)


# ---------------------------------------------------------------------------
# Equivariance statistics
# ---------------------------------------------------------------------------


def disc_probability(psi: Wavefunction, center: tuple[float, float], radius: float,
                     supersample: int = 8) -> float:
    """Quadrature of |psi|^2 over a disc, with the density bilinearly
    refined well below the grid spacing (node-level sums misweight the
    rim cells of small discs)."""
    grid = psi.grid
    h = min(grid.spacing) / supersample
    n = int(np.ceil(2 * radius / h)) + 1
    xs = center[0] + np.linspace(-radius, radius, n)
    ys = center[1] + np.linspace(-radius, radius, n)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    rho_field = DriftField(grid, (psi.density(),))  # reuse the interpolator
    vals = _interpolate_scalar(rho_field, pts).reshape(n, n)
    inside = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 < radius**2
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    return float(np.sum(vals[inside]) * cell)


def _interpolate_scalar(field: DriftField, pos: np.ndarray) -> np.ndarray:
    grid = field.grid
    comp = field.components[0]
    idx = []
    frac = []
    for j in range(2):
        a, _ = grid.extent_per_axis[j]
        h = grid.spacing[j]
        t = (pos[:, j] - a) / h
        i0 = np.floor(t).astype(np.int64)
        frac.append(t - i0)
        idx.append(i0 % grid.shape[j])
    i0, j0 = idx
    i1 = (i0 + 1) % grid.shape[0]
    j1 = (j0 + 1) % grid.shape[1]
    fx, fy = frac
    return (comp[i0, j0] * (1 - fx) * (1 - fy) + comp[i1, j0] * fx * (1 - fy)
            + comp[i0, j1] * (1 - fx) * fy + comp[i1, j1] * fx * fy)


def _density_cdf(psi: Wavefunction):
    """Piecewise-linear CDF of |psi|^2 over node-centered cells."""
    grid = psi.grid
    rho = psi.density()
    w = rho * grid.cell_volume
    cdf = np.concatenate([[0.0], np.cumsum(w)])
    cdf /= cdf[-1]
    a, _ = grid.extent_per_axis[0]
    h = grid.spacing[0]
    edges = (a - 0.5 * h) + h * np.arange(grid.shape[0] + 1)
    return edges, cdf


def ks_distance(samples: np.ndarray, psi: Wavefunction) -> float:
    """Kolmogorov-Smirnov distance between samples and the |psi|^2 CDF."""
    edges, cdf = _density_cdf(psi)
    x = np.sort(np.asarray(samples).ravel())
    f = np.interp(x, edges, cdf)
    n = x.size
    ranks = np.arange(1, n + 1) / n
    return float(max(np.max(ranks - f), np.max(f - (ranks - 1.0 / n))))


def chi_square_pvalue(samples: np.ndarray, psi: Wavefunction, bins: int = 32) -> float:
    """Chi-square goodness-of-fit p-value on a bins x bins histogram.

    Expected counts come from |psi|^2 aggregated over the same binning;
    sparse bins (expected < 5) are pooled before the test.
    """
    grid = psi.grid
    (a0, b0), (a1, b1) = grid.extent_per_axis
    pts = np.asarray(samples).reshape(-1, 2)
    obs, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=bins, range=[[a0, b0], [a1, b1]])
    x, y = grid.meshes()
    w = psi.density().ravel() * grid.cell_volume
    exp_mass, _, _ = np.histogram2d(x.ravel(), y.ravel(), bins=bins,
                                    range=[[a0, b0], [a1, b1]], weights=w)
    exp = exp_mass / exp_mass.sum() * pts.shape[0]
    obs, exp = obs.ravel(), exp.ravel()
    dense = exp >= 5.0
    obs_d = np.append(obs[dense], obs[~dense].sum())
    exp_d = np.append(exp[dense], exp[~dense].sum())
    keep = exp_d > 0
    obs_d, exp_d = obs_d[keep], exp_d[keep]
    stat = float(np.sum((obs_d - exp_d) ** 2 / exp_d))
    dof = max(obs_d.size - 1, 1)
    return float(_sstats.chi2.sf(stat, dof))


def equivariance_stat(positions: np.ndarray, psi: Wavefunction) -> float:
    """1D: KS distance to the |psi|^2 CDF; 2D: chi-square p-value (32x32)."""
    pts = np.asarray(positions)
    if pts.size == 0:
        raise ValueError("empty ensemble")
    if psi.grid.dim == 1:
        return ks_distance(pts, psi)
    return chi_square_pvalue(pts, psi)


def write_ensemble_csv(ens: TrajectoryEnsemble, path: str | Path, every_path: int = 1) -> Path:
    """CSV dump `path,t,x[,y],alive` (optionally thinned over paths)."""
    path = Path(path)
    dim = ens.positions.shape[2]
    cols = "path,t,x,alive" if dim == 1 else "path,t,x,y,alive"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(cols + "\n")
        for p in range(0, ens.positions.shape[0], every_path):
            for ti, t in enumerate(ens.times):
                coords = ",".join(repr(float(c)) for c in ens.positions[p, ti])
                f.write(f"{p},{float(t)!r},{coords},{int(ens.alive[p])}\n")
    return path


def write_summary_json(path: str | Path, times: np.ndarray, stats: dict[str, list[float]]) -> Path:
    path = Path(path)
    payload = {"t": [float(t) for t in times]}
    payload.update({k: [float(v) for v in vals] for k, vals in stats.items()})
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    return path
