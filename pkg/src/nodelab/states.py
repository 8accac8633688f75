"""Closed-form reference states used throughout the test corpus.

Localized states are periodized (a few mirror images summed) so they are
smooth across the seam of the periodic box; this matters whenever a
state feeds the spectral stepper or a spectral derivative.
"""
from __future__ import annotations

import math

import numpy as np

from .grids import Grid, Wavefunction, normalize

__all__ = [
    "gaussian",
    "plane_wave",
    "harmonic_eigenstate",
    "coherent_state",
    "vortex_state",
    "two_vortex_state",
    "gaussian_2d",
    "nodeless_corpus",
]


def _periodize_1d(f, x: np.ndarray, a: float, b: float, images: int) -> np.ndarray:
    length = b - a
    out = np.zeros_like(x, dtype=complex)
    for n in range(-images, images + 1):
        out += f(x + n * length)
    return out


def gaussian(grid: Grid, sigma: float = 1.0, center: float = 0.0, k: float = 0.0,
             images: int = 2, normalized: bool = True) -> Wavefunction:
    """Gaussian packet whose density has standard deviation sigma.

    psi ~ exp(-(x-c)^2 / (4 sigma^2)) * exp(i k x); under free evolution
    the density variance grows as sigma^2 + (hbar t / (2 m sigma))^2.
    """
    (x,) = grid.meshes()
    a, b = grid.extent_per_axis[0]

    def f(xx):
        return np.exp(-((xx - center) ** 2) / (4.0 * sigma**2)) * np.exp(1j * k * xx)

    vals = _periodize_1d(f, x, a, b, images)
    psi = Wavefunction(grid, vals)
    return normalize(psi) if normalized else psi


def plane_wave(grid: Grid, mode: int | tuple[int, ...] = 1, normalized: bool = True) -> Wavefunction:
    """exp(i k . x) with grid-commensurate k (integer mode numbers)."""
    modes = np.atleast_1d(mode)
    meshes = grid.meshes()
    phase = np.zeros(grid.shape)
    for j, (n, x) in enumerate(zip(modes, meshes)):
        a, b = grid.extent_per_axis[j]
        phase = phase + 2.0 * np.pi * int(n) * (x - a) / (b - a)
    psi = Wavefunction(grid, np.exp(1j * phase))
    return normalize(psi) if normalized else psi


def _hermite_functions(xi: np.ndarray, n_max: int) -> list[np.ndarray]:
    """Orthonormal oscillator eigenfunctions phi_0..phi_{n_max} of xi."""
    phis = [np.pi**-0.25 * np.exp(-0.5 * xi**2)]
    if n_max >= 1:
        phis.append(np.sqrt(2.0) * xi * phis[0])
    for n in range(2, n_max + 1):
        phis.append(np.sqrt(2.0 / n) * xi * phis[n - 1] - np.sqrt((n - 1) / n) * phis[n - 2])
    return phis


def harmonic_eigenstate(grid: Grid, n: int, omega: float = 1.0, mass: float = 1.0,
                        hbar: float = 1.0, center: float = 0.0, images: int = 1) -> Wavefunction:
    """n-th eigenstate of the 1D harmonic trap, sampled analytically."""
    (x,) = grid.meshes()
    a, b = grid.extent_per_axis[0]
    scale = math.sqrt(mass * omega / hbar)

    def f(xx):
        xi = scale * (xx - center)
        return (scale**0.5 * _hermite_functions(xi, n)[n]).astype(complex)

    return Wavefunction(grid, _periodize_1d(f, x, a, b, images))


def coherent_state(grid: Grid, x0: float = 2.0, t: float = 0.0, images: int = 1) -> Wavefunction:
    """Coherent state of the unit harmonic trap (hbar = m = omega = 1).

    Center q(t) = x0 cos t, momentum p(t) = -x0 sin t, with the exact
    global phase, so it doubles as the evolution oracle.
    """
    q = x0 * math.cos(t)
    p = -x0 * math.sin(t)
    (x,) = grid.meshes()
    a, b = grid.extent_per_axis[0]

    def f(xx):
        envelope = np.exp(-0.5 * (xx - q) ** 2)
        phase = np.exp(1j * (p * xx - 0.5 * p * q - 0.5 * t))
        return np.pi**-0.25 * envelope * phase

    return Wavefunction(grid, _periodize_1d(f, x, a, b, images))


def vortex_state(grid: Grid, winding: int = 1, normalized: bool = True) -> Wavefunction:
    """(x + iy)^w exp(-r^2/2): angular-momentum eigenstate of the 2D trap.

    winding < 0 uses the conjugate factor (x - iy)^|w|.
    """
    x, y = grid.meshes()
    z = x + 1j * y
    w = abs(int(winding))
    factor = z**w if winding >= 0 else np.conj(z) ** w
    psi = Wavefunction(grid, factor * np.exp(-0.5 * (x**2 + y**2)))
    return normalize(psi) if normalized else psi


def two_vortex_state(grid: Grid, separation: float = 2.0, normalized: bool = True) -> Wavefunction:
    """Two unit vortices at x = +-separation/2 under a Gaussian envelope."""
    x, y = grid.meshes()
    z = x + 1j * y
    s = separation / 2.0
    psi = Wavefunction(grid, (z - s) * (z + s) * np.exp(-0.5 * (x**2 + y**2)))
    return normalize(psi) if normalized else psi


def gaussian_2d(grid: Grid, sigma: tuple[float, float] = (1.0, 1.0),
                center: tuple[float, float] = (0.0, 0.0), k: tuple[float, float] = (0.0, 0.0),
                normalized: bool = True) -> Wavefunction:
    x, y = grid.meshes()
    vals = np.exp(
        -((x - center[0]) ** 2) / (4.0 * sigma[0] ** 2)
        - ((y - center[1]) ** 2) / (4.0 * sigma[1] ** 2)
    ) * np.exp(1j * (k[0] * x + k[1] * y))
    psi = Wavefunction(grid, vals)
    return normalize(psi) if normalized else psi


def nodeless_corpus() -> list[tuple[str, Wavefunction]]:
    """Twenty nodeless states, 1D and 2D, on domains where the density
    stays above the default validity threshold everywhere."""
    g1 = Grid((256,), ((-5.0, 5.0),))
    g1w = Grid((256,), ((-8.0, 8.0),))
    g2 = Grid((96, 96), ((-4.0, 4.0), (-4.0, 4.0)))
    corpus: list[tuple[str, Wavefunction]] = []

    corpus.append(("gauss_unit", gaussian(g1, 1.0)))
    corpus.append(("gauss_narrow", gaussian(Grid((256,), ((-3.5, 3.5),)), 0.7)))
    corpus.append(("gauss_wide", gaussian(g1w, 1.6)))
    corpus.append(("gauss_offcenter", gaussian(g1, 1.0, center=0.8)))
    corpus.append(("gauss_kicked", gaussian(g1, 1.0, k=2.0 * np.pi * 3 / 10.0)))
    corpus.append(("gauss_kicked_off", gaussian(g1, 0.9, center=-0.5, k=2.0 * np.pi * 2 / 10.0)))
    corpus.append(("coherent_t0", normalize(coherent_state(Grid((256,), ((-5.0, 5.0),)), x0=1.0))))
    corpus.append(("coherent_quarter", normalize(coherent_state(Grid((256,), ((-5.0, 5.0),)), x0=1.0, t=np.pi / 2))))
    corpus.append(("plane_k1", plane_wave(g1, 1)))
    corpus.append(("plane_k3", plane_wave(g1, 3)))
    mix = Wavefunction(g1, harmonic_eigenstate(g1, 0).values + 0.3 * harmonic_eigenstate(g1, 2).values)
    corpus.append(("ho_0_plus_03x2", normalize(mix)))
    flat = Wavefunction(g1, 1.0 + 0.2 * np.exp(1j * 2 * np.pi * (g1.axis(0) + 5.0) / 10.0))
    corpus.append(("flat_plus_mode", normalize(flat)))
    x = g1.axis(0)
    lump = Wavefunction(g1, np.exp(-0.5 * (x / 1.2) ** 2) * np.exp(0.4j * np.sin(2 * np.pi * (x + 5) / 10.0)))
    corpus.append(("gauss_phase_wobble", normalize(lump)))
    corpus.append(("gauss2d_iso", gaussian_2d(g2)))
    corpus.append(("gauss2d_aniso", gaussian_2d(g2, sigma=(0.8, 1.2))))
    corpus.append(("gauss2d_off", gaussian_2d(g2, center=(0.5, -0.4))))
    corpus.append(("gauss2d_kicked", gaussian_2d(g2, k=(2 * np.pi * 2 / 8.0, 0.0))))
    corpus.append(("gauss2d_kicked_xy", gaussian_2d(g2, k=(2 * np.pi / 8.0, 2 * np.pi * 2 / 8.0))))
    corpus.append(("plane2d", plane_wave(g2, (1, 2))))
    xx, yy = g2.meshes()
    bump = np.exp(-0.25 * (xx**2 + yy**2)) * (1.0 + 0.15 * np.exp(1j * 2 * np.pi * (xx + 4) / 8.0))
    corpus.append(("gauss2d_dressed", normalize(Wavefunction(g2, bump))))
    assert len(corpus) == 20
    return corpus
