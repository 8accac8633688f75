"""Strang-split spectral time stepping and minimum-density tracking.

One step applies exp(-i V dt / 2 hbar) * exp(-i T dt / hbar) *
exp(-i V dt / 2 hbar) with the kinetic factor diagonal in Fourier
space.  The scheme is unitary to roundoff and second order in dt; the
config invariant dt * E_max < hbar/2 (E_max the largest kinetic
eigenvalue the grid can represent) keeps the kinetic phase per step
well away from aliasing.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import Grid, PotentialSpec, Wavefunction

__all__ = [
    "EvolutionConfig",
    "SplitStepper",
    "evolve",
    "min_density_series",
    "max_kinetic_eigenvalue",
    "split_operator_ground_state",
    "write_series_csv",
]


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    potential: PotentialSpec
    record_every: int = 1
    hbar: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 1 or self.record_every < 1:
            raise ValueError("steps and record_every must be positive")


def max_kinetic_eigenvalue(grid: Grid, mass: float, hbar: float = 1.0) -> float:
    """Largest representable kinetic energy hbar^2 |k_max|^2 / 2m."""
    k2 = 0.0
    for j in range(grid.dim):
        k2 += float(np.max(grid.wavenumbers(j) ** 2))
    return hbar**2 * k2 / (2.0 * mass)


class SplitStepper:
    """Owns the precomputed phase factors for one (grid, V, dt) triple.

    dt may be negative (used for reversal checks); the public config
    path enforces dt > 0.
    """

    def __init__(self, grid: Grid, potential: PotentialSpec, dt: float, hbar: float = 1.0):
        if not grid.periodic:
            raise ValueError("split stepping requires a periodic grid")
        self.grid = grid
        self.dt = dt
        v = potential.on_grid(grid)
        t_k = hbar**2 * grid.k_squared() / (2.0 * potential.mass)
        self._exp_v_half = np.exp(-0.5j * dt * v / hbar)
        self._exp_t = np.exp(-1j * dt * t_k / hbar)

    def step(self, values: np.ndarray) -> np.ndarray:
        out = np.fft.fftn(self._exp_v_half * values)
        out *= self._exp_t
        out = np.fft.ifftn(out)
        out *= self._exp_v_half
        return out


def _check_config(psi0: Wavefunction, cfg: EvolutionConfig) -> None:
    if not psi0.is_normalized():
        raise ValueError("initial state must be normalized")
    e_max = max_kinetic_eigenvalue(psi0.grid, cfg.potential.mass, cfg.hbar)
    if cfg.dt * e_max >= 0.5 * cfg.hbar:
        raise ValueError("unstable dt")


def evolve(psi0: Wavefunction, cfg: EvolutionConfig) -> list[tuple[float, Wavefunction]]:
    """Run cfg.steps steps, returning (t, state) snapshots every
    record_every steps (t = 0 and the final step always included)."""
    _check_config(psi0, cfg)
    stepper = SplitStepper(psi0.grid, cfg.potential, cfg.dt, cfg.hbar)
    values = psi0.values.copy()
    out = [(0.0, psi0)]
    for n in range(1, cfg.steps + 1):
        values = stepper.step(values)
        if n % cfg.record_every == 0 or n == cfg.steps:
            out.append((n * cfg.dt, Wavefunction(psi0.grid, values)))
    return out


def split_operator_ground_state(reference: Wavefunction, potential: PotentialSpec,
                                dt: float, hbar: float = 1.0) -> Wavefunction:
    """Exactly stationary nodeless state of the one-step split operator.

    Sampling a continuum eigenstate leaves a small seam mismatch that
    beats visibly in the density floor; the eigenvector of the discrete
    step (the ground state of the shadow Hamiltonian the stepper really
    integrates) is frozen to roundoff.  1D only: the dense one-step
    matrix is diagonalized and the eigenvector with the largest overlap
    against `reference` is returned, phase-aligned and normalized.
    """
    grid = reference.grid
    if grid.dim != 1:
        raise ValueError("dense diagonalization is only sensible in 1D")
    n = grid.shape[0]
    stepper = SplitStepper(grid, potential, dt, hbar)
    u = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        u[:, j] = stepper.step(e)
    _, vecs = np.linalg.eig(u)
    overlaps = np.abs(vecs.conj().T @ reference.values)
    vec = vecs[:, int(np.argmax(overlaps))]
    peak = int(np.argmax(np.abs(vec)))
    vec = vec * (abs(vec[peak]) / vec[peak])
    psi = Wavefunction(grid, vec)
    return Wavefunction(grid, psi.values / psi.norm)


@dataclass(frozen=True)
class MinDensityRecord:
    t: float
    min_rho: float
    argmin: tuple[float, ...]
    norm: float
    energy: float


def min_density_series(psi0: Wavefunction, cfg: EvolutionConfig) -> list[MinDensityRecord]:
    """Track the global density minimum along the evolution.

    Streams the evolution (no field snapshots are kept), recording
    min |psi|^2, its location, the norm and the energy every
    record_every steps.
    """
    from .grids import total_energy

    _check_config(psi0, cfg)
    stepper = SplitStepper(psi0.grid, cfg.potential, cfg.dt, cfg.hbar)
    grid = psi0.grid
    axes = [grid.axis(j) for j in range(grid.dim)]

    def record(t: float, values: np.ndarray) -> MinDensityRecord:
        rho = np.abs(values) ** 2
        flat = int(np.argmin(rho))
        idx = np.unravel_index(flat, grid.shape)
        loc = tuple(float(axes[j][idx[j]]) for j in range(grid.dim))
        psi = Wavefunction(grid, values)
        return MinDensityRecord(t, float(rho[idx]), loc, psi.norm, total_energy(psi, cfg.potential, cfg.hbar))

    values = psi0.values.copy()
    out = [record(0.0, values)]
    for n in range(1, cfg.steps + 1):
        values = stepper.step(values)
        if n % cfg.record_every == 0 or n == cfg.steps:
            out.append(record(n * cfg.dt, values))
    return out


def write_series_csv(records: list[MinDensityRecord], path: str | Path) -> Path:
    """CSV dump `t,min_rho,argmin_x[,argmin_y],norm,energy`."""
    path = Path(path)
    dim = len(records[0].argmin)
    arg_cols = "argmin_x" if dim == 1 else "argmin_x,argmin_y"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"t,min_rho,{arg_cols},norm,energy\n")
        for r in records:
            loc = ",".join(repr(float(c)) for c in r.argmin)
            f.write(f"{r.t!r},{r.min_rho!r},{loc},{r.norm!r},{r.energy!r}\n")
    return path
