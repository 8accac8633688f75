"""Uniform periodic grids and complex wave functions.

Everything downstream (Madelung fields, split-step evolution, zero
topology, stochastic sampling) consumes the two carriers defined here:
``Grid`` describes a uniform 1D/2D sampling of a box with half-open
extents [a, b), and ``Wavefunction`` holds complex amplitudes on it,
laid out row-major (x index first).  Natural units hbar = m = 1 are the
defaults; both constants remain explicit arguments so formulas keep
their textbook form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "Wavefunction",
    "PotentialSpec",
    "normalize",
    "inner_product",
    "total_energy",
    "kinetic_energy",
    "gradient",
    "laplacian",
    "save_wavefunction",
    "load_wavefunction",
]


@dataclass(frozen=True)
class Grid:
    """Uniform 1D or 2D sampling of [a_j, b_j) with N_j points per axis.

    Point coordinates are x_j(i) = a_j + i*h_j with h_j = (b_j - a_j)/N_j,
    reproducible bit-exactly from the stored fields.
    """

    points_per_axis: tuple[int, ...]
    extent_per_axis: tuple[tuple[float, float], ...]
    periodic: bool = True

    def __post_init__(self):
        pts = tuple(int(n) for n in np.atleast_1d(self.points_per_axis))
        ext = tuple((float(a), float(b)) for a, b in np.atleast_2d(self.extent_per_axis))
        object.__setattr__(self, "points_per_axis", pts)
        object.__setattr__(self, "extent_per_axis", ext)
        if len(pts) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if len(ext) != len(pts):
            raise ValueError("extent/points axis count mismatch")
        for n in pts:
            if n < 8:
                raise ValueError("need at least 8 points per axis")
        for a, b in ext:
            if not b > a:
                raise ValueError("extent must satisfy b > a")

    @property
    def dim(self) -> int:
        return len(self.points_per_axis)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points_per_axis

    @property
    def size(self) -> int:
        return int(np.prod(self.points_per_axis))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / n for (a, b), n in zip(self.extent_per_axis, self.points_per_axis))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, j: int) -> np.ndarray:
        """Coordinates along axis j."""
        a, _ = self.extent_per_axis[j]
        h = self.spacing[j]
        return a + h * np.arange(self.points_per_axis[j])

    def meshes(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays shaped like a field on this grid ('ij' indexing)."""
        return tuple(np.meshgrid(*[self.axis(j) for j in range(self.dim)], indexing="ij"))

    def wavenumbers(self, j: int) -> np.ndarray:
        """FFT-ordered angular wavenumbers k_n = 2*pi*n/(b - a) along axis j."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis[j], d=self.spacing[j])

    def k_squared(self) -> np.ndarray:
        """|k|^2 on the FFT-ordered reciprocal grid."""
        ks = [self.wavenumbers(j) for j in range(self.dim)]
        if self.dim == 1:
            return ks[0] ** 2
        kx, ky = np.meshgrid(ks[0], ks[1], indexing="ij")
        return kx**2 + ky**2


@dataclass(frozen=True)
class Wavefunction:
    """Complex amplitudes on a grid; immutable after construction."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex, order="C")
        if vals.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals.view(float))):
            raise ValueError("amplitudes must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def is_normalized(self, tol: float = 1e-8) -> bool:
        return abs(self.norm - 1.0) < tol

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class PotentialSpec:
    """External potential plus the particle mass entering H = p^2/2m + V.

    kind is one of "free", "harmonic" (with omega, center) or "custom"
    (tabulated values matching the grid).
    """

    kind: str = "free"
    mass: float = 1.0
    omega: float = 1.0
    center: tuple[float, ...] | float = 0.0
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.kind == "custom":
            if self.values is None:
                raise ValueError("custom potential needs tabulated values")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("tabulated potential values must be finite")

    def on_grid(self, grid: Grid) -> np.ndarray:
        if self.kind == "free":
            return np.zeros(grid.shape)
        if self.kind == "custom":
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != grid.shape:
                raise ValueError("tabulated potential does not match grid")
            return vals
        centers = np.atleast_1d(self.center).astype(float)
        if centers.size == 1 and grid.dim == 2:
            centers = np.repeat(centers, 2)
        meshes = grid.meshes()
        r2 = sum((x - c) ** 2 for x, c in zip(meshes, centers))
        return 0.5 * self.mass * self.omega**2 * r2


def normalize(psi: Wavefunction) -> Wavefunction:
    """Rescale to unit L2 norm; raises on identically-zero input."""
    n = psi.norm
    if n == 0.0:
        raise ValueError("zero norm")
    return Wavefunction(psi.grid, psi.values / n)


def inner_product(psi: Wavefunction, phi: Wavefunction) -> complex:
    """<psi, phi> = sum conj(psi_i) phi_i * prod(h_j); grids must match."""
    if psi.grid != phi.grid:
        raise ValueError("grid mismatch")
    return complex(np.sum(np.conj(psi.values) * phi.values) * psi.grid.cell_volume)


def gradient(values: np.ndarray, grid: Grid, axis: int, method: str = "fd") -> np.ndarray:
    """Partial derivative along one axis with periodic wrap.

    "fd" is the centered 3-point stencil, "spectral" the exact Fourier
    derivative for grid-resolved fields.
    """
    if not grid.periodic:
        raise ValueError("derivative operators require a periodic grid")
    h = grid.spacing[axis]
    if method == "fd":
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    if method == "spectral":
        k = grid.wavenumbers(axis)
        shape = [1] * grid.dim
        shape[axis] = k.size
        k = k.reshape(shape)
        return np.fft.ifftn(1j * k * np.fft.fftn(values))
    raise ValueError(f"unknown method {method!r}")


def laplacian(values: np.ndarray, grid: Grid, method: str = "fd") -> np.ndarray:
    """Laplacian with periodic wrap; centered 3-point per axis or spectral."""
    if not grid.periodic:
        raise ValueError("derivative operators require a periodic grid")
    if method == "fd":
        out = np.zeros_like(np.asarray(values, dtype=complex if np.iscomplexobj(values) else float))
        for axis in range(grid.dim):
            h = grid.spacing[axis]
            out += (
                np.roll(values, -1, axis=axis) - 2.0 * values + np.roll(values, 1, axis=axis)
            ) / (h * h)
        return out
    if method == "spectral":
        out = np.fft.ifftn(-grid.k_squared() * np.fft.fftn(values))
        return out if np.iscomplexobj(values) else out.real
    raise ValueError(f"unknown method {method!r}")


def kinetic_energy(psi: Wavefunction, mass: float = 1.0, hbar: float = 1.0) -> float:
    """<psi, -(hbar^2/2m) Lap psi>, evaluated spectrally."""
    khat = psi.grid.k_squared() * np.fft.fftn(psi.values)
    tpsi = (hbar**2 / (2.0 * mass)) * np.fft.ifftn(khat)
    val = np.sum(np.conj(psi.values) * tpsi) * psi.grid.cell_volume
    return float(val.real)


def total_energy(psi: Wavefunction, potential: PotentialSpec, hbar: float = 1.0) -> float:
    """Energy expectation under H = -(hbar^2/2m) Lap + V for a normalized state.

    The kinetic term is evaluated spectrally on the periodic grid; the
    result must be real to 1e-10, which guards against aliased states.
    """
    if not psi.grid.periodic:
        raise ValueError("total_energy requires a periodic grid")
    if not psi.is_normalized():
        raise ValueError("state must be normalized")
    khat = psi.grid.k_squared() * np.fft.fftn(psi.values)
    tpsi = (hbar**2 / (2.0 * potential.mass)) * np.fft.ifftn(khat)
    vpsi = potential.on_grid(psi.grid) * psi.values
    energy = np.sum(np.conj(psi.values) * (tpsi + vpsi)) * psi.grid.cell_volume
    if abs(energy.imag) > 1e-10 * max(1.0, abs(energy.real)):
        raise ValueError(f"energy has non-negligible imaginary part {energy.imag:g}")
    return float(energy.real)


# ---------------------------------------------------------------------------
# Serialization: CSV amplitudes + JSON grid descriptor sidecar.
# Floats are written with repr() so the round trip is bit-exact.
# ---------------------------------------------------------------------------


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".grid.json")


def save_wavefunction(psi: Wavefunction, path: str | Path, extra_meta: dict | None = None) -> Path:
    """Write `index,x[,y],re,im` CSV plus a grid descriptor sidecar."""
    path = Path(path)
    grid = psi.grid
    meshes = grid.meshes()
    flat = [m.ravel() for m in meshes]
    vals = psi.values.ravel()
    cols = "index,x,re,im" if grid.dim == 1 else "index,x,y,re,im"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(cols + "\n")
        for i in range(vals.size):
            coords = ",".join(repr(float(c[i])) for c in flat)
            f.write(f"{i},{coords},{float(vals[i].real)!r},{float(vals[i].imag)!r}\n")
    meta = {
        "dim": grid.dim,
        "points_per_axis": list(grid.points_per_axis),
        "extent_per_axis": [list(e) for e in grid.extent_per_axis],
        "periodic": grid.periodic,
    }
    if extra_meta:
        meta.update(extra_meta)
    with open(_sidecar_path(path), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=1)
        f.write("\n")
    return path


def load_wavefunction(path: str | Path) -> Wavefunction:
    path = Path(path)
    with open(_sidecar_path(path), encoding="utf-8") as f:
        meta = json.load(f)
    grid = Grid(
        tuple(meta["points_per_axis"]),
        tuple(tuple(e) for e in meta["extent_per_axis"]),
        bool(meta["periodic"]),
    )
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    vals = data[:, -2] + 1j * data[:, -1]
    return Wavefunction(grid, vals.reshape(grid.shape))
