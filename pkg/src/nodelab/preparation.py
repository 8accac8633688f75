"""Premeasurement entanglement, conditioning, and preparation contamination.

Preparing an eigenstate by measurement entangles the system with a
device, then conditions the joint wave function on the observed device
coordinate.  Because realistic pointer states never vanish exactly, the
conditioned state keeps a small admixture of every other branch; this
module quantifies that contamination and feeds the resulting states to
the density/zero diagnostics.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import Grid, Wavefunction, inner_product, normalize
from .topology import min_density as _min_density
from .topology import plaquette_charges

__all__ = [
    "PointerFamily",
    "BipartiteWavefunction",
    "entangle",
    "condition",
    "device_slice",
    "prepare_and_probe",
    "PreparationReport",
    "save_preparation_report",
]


@dataclass(frozen=True)
class PointerFamily:
    """Gaussian pointer states at strictly increasing centers d_i, width w."""

    centers: tuple[float, ...]
    width: float

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers)
        object.__setattr__(self, "centers", centers)
        if not self.width > 0:
            raise ValueError("pointer width must be positive")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("pointer centers must be strictly increasing")

    def default_grid(self, points: int = 256) -> Grid:
        lo = min(self.centers) - 10.0 * self.width
        hi = max(self.centers) + 10.0 * self.width
        return Grid((points,), ((lo, hi),))

    def on_grid(self, grid: Grid) -> list[np.ndarray]:
        """Pointer amplitudes, each normalized on the device grid."""
        (x,) = grid.meshes()
        h = grid.cell_volume
        out = []
        for d in self.centers:
            chi = np.exp(-((x - d) ** 2) / (2.0 * self.width**2))
            chi = chi / np.sqrt(np.sum(chi**2) * h)
            out.append(chi.astype(complex))
        return out


@dataclass(frozen=True)
class BipartiteWavefunction:
    """Joint system x device amplitudes, (sys points row-major, dev points)."""

    grid_sys: Grid
    grid_dev: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid_sys.size, self.grid_dev.size):
            raise ValueError("amplitude matrix shape mismatch")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        vol = self.grid_sys.cell_volume * self.grid_dev.cell_volume
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * vol))


def entangle(alphas, sys_states: list[Wavefunction], pointers: PointerFamily,
             dev_grid: Grid | None = None) -> BipartiteWavefunction:
    """Psi(q_s, q_d) = sum_i alpha_i psi_i(q_s) chi_i(q_d).

    sys_states must be orthonormal (1e-8) and sum |alpha_i|^2 = 1; the
    result is explicitly renormalized to kill quadrature residue.
    """
    alphas = np.asarray(alphas, dtype=complex)
    if len(sys_states) != alphas.size or alphas.size == 0:
        raise ValueError("need one coefficient per system state")
    if alphas.size > len(pointers.centers):
        raise ValueError("not enough pointer states")
    if abs(np.sum(np.abs(alphas) ** 2) - 1.0) > 1e-10:
        raise ValueError("coefficients must satisfy sum |alpha|^2 = 1")
    grid_sys = sys_states[0].grid
    for a in sys_states:
        if a.grid != grid_sys:
            raise ValueError("system states must share one grid")
    for i, a in enumerate(sys_states):
        for j, b in enumerate(sys_states):
            want = 1.0 if i == j else 0.0
            if abs(inner_product(a, b) - want) > 1e-8:
                raise ValueError("system states are not orthonormal")
    if dev_grid is None:
        dev_grid = pointers.default_grid()
    chis = pointers.on_grid(dev_grid)
    amps = np.zeros((grid_sys.size, dev_grid.size), dtype=complex)
    for alpha, psi_i, chi_i in zip(alphas, sys_states, chis):
        amps += alpha * np.outer(psi_i.values.ravel(), chi_i)
    joint = BipartiteWavefunction(grid_sys, dev_grid, amps)
    return BipartiteWavefunction(grid_sys, dev_grid, amps / joint.norm)


def _dev_index(joint: BipartiteWavefunction, q_obs: float) -> int:
    ax = joint.grid_dev.axis(0)
    return int(np.argmin(np.abs(ax - q_obs)))


def device_slice(joint: BipartiteWavefunction, q_obs: float) -> tuple[np.ndarray, float]:
    """Unnormalized system amplitudes at the device point nearest q_obs,
    plus their norm (zero norm means the observation fell in a null region)."""
    col = joint.amplitudes[:, _dev_index(joint, q_obs)]
    vals = col.reshape(joint.grid_sys.shape)
    norm = float(np.sqrt(np.sum(np.abs(vals) ** 2) * joint.grid_sys.cell_volume))
    return vals, norm


def condition(joint: BipartiteWavefunction, q_obs: float) -> Wavefunction:
    """System state conditioned on observing the device at q_obs."""
    vals, norm = device_slice(joint, q_obs)
    if norm == 0.0:
        raise ValueError("observation in null region")
    return Wavefunction(joint.grid_sys, vals / norm)


@dataclass(frozen=True)
class PreparationReport:
    fidelity: float
    delta_norm: float
    min_density: float
    charges: tuple[int, ...]
    params: dict


def prepare_and_probe(alphas, sys_states: list[Wavefunction], pointers: PointerFamily,
                      target: int, q_obs: float | None = None,
                      dev_grid: Grid | None = None) -> PreparationReport:
    """entangle -> condition -> compare against the target eigenstate.

    fidelity = |<psi_target, psi_prep>|^2; delta_norm is the L2 distance
    minimized over a global phase; min_density and (2D) cell charges
    come from the zero diagnostics.  q_obs defaults to the target's
    pointer center.
    """
    if q_obs is None:
        q_obs = pointers.centers[target]
    joint = entangle(alphas, sys_states, pointers, dev_grid)
    prep = condition(joint, q_obs)
    tgt = normalize(sys_states[target])
    overlap = inner_product(tgt, prep)
    fidelity = float(abs(overlap) ** 2)
    # direct phase-minimized distance; sqrt(2 - 2|overlap|) loses half the
    # significant digits near zero
    phase = overlap / abs(overlap) if overlap != 0 else 1.0
    diff = prep.values - phase * tgt.values
    delta = float(np.sqrt(np.sum(np.abs(diff) ** 2) * prep.grid.cell_volume))
    min_rho, _ = _min_density(prep)
    charges: tuple[int, ...] = ()
    if prep.grid.dim == 2:
        charges = tuple(c.charge for c in plaquette_charges(prep))
    params = {
        "alphas": [[float(a.real), float(a.imag)] for a in np.asarray(alphas, dtype=complex)],
        "pointer_centers": list(pointers.centers),
        "pointer_width": pointers.width,
        "target": int(target),
        "q_obs": float(q_obs),
    }
    return PreparationReport(fidelity, delta, float(min_rho), charges, params)


def save_preparation_report(report: PreparationReport, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "fidelity": report.fidelity,
        "delta_norm": report.delta_norm,
        "min_density": report.min_density,
        "charges": list(report.charges),
        "params": report.params,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    return path
