"""Lattice scalar-field wavefunctionals in normal-mode coordinates.

The free field on a periodic lattice diagonalizes into independent
oscillators, one per real normal mode, with lattice dispersion
omega_k^2 = m^2 + (4/a^2) sum_j sin^2(k_j a / 2).  The vacuum is the
product Gaussian prod_k (omega_k/pi)^(1/4) exp(-omega_k q_k^2 / 2)
(hbar = 1), Fock excitations multiply in normalized Hermite factors,
and any functional built from finitely many excited modes depends on
the other coordinates only through the shared Gaussian.  2D affine
sections of the functional come out as ordinary wave functions, so the
zero diagnostics built for particle states apply verbatim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import Grid, Wavefunction

__all__ = [
    "LatticeSpec",
    "Mode",
    "ModeBasis",
    "FockFunctional",
    "build_modes",
    "vacuum",
    "apply_creation",
    "superpose",
    "evaluate",
    "section",
    "energy",
    "hermite_factor",
]


@dataclass(frozen=True)
class LatticeSpec:
    dim: int
    sites: int
    spacing: float
    mass: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("lattice dimension must be 1, 2 or 3")
        if self.sites < 2 or self.spacing <= 0 or self.mass < 0:
            raise ValueError("bad lattice parameters")


@dataclass(frozen=True, eq=False)
class Mode:
    index: int
    kvec: tuple[int, ...]      # integer wavevector, components in [0, N)
    parity: str                # "const" | "cos" | "sin"
    omega: float
    profile: np.ndarray        # orthonormal real profile on the site lattice


class ModeBasis:
    """Real orthonormal normal modes of one LatticeSpec."""

    def __init__(self, spec: LatticeSpec, modes: list[Mode]):
        self.spec = spec
        self.modes = modes

    def __len__(self) -> int:
        return len(self.modes)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeBasis) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    @property
    def omegas(self) -> np.ndarray:
        return np.array([m.omega for m in self.modes])


def _dispersion(spec: LatticeSpec, kvec: tuple[int, ...]) -> float:
    a = spec.spacing
    n = spec.sites
    s = 0.0
    for nk in kvec:
        k = 2.0 * math.pi * nk / (n * a)
        s += (4.0 / a**2) * math.sin(0.5 * k * a) ** 2
    return math.sqrt(spec.mass**2 + s)


def build_modes(spec: LatticeSpec) -> ModeBasis:
    """Enumerate cos/sin pairs per independent wavevector (plus the
    constant mode), orthonormal under the lattice inner product."""
    n = spec.sites
    d = spec.dim
    shape = (n,) * d
    coords = np.indices(shape)  # site indices; physical x = a * index
    vol = n**d * spec.spacing**d

    seen: set[tuple[int, ...]] = set()
    modes: list[Mode] = []
    for flat in range(n**d):
        kvec = tuple(int(c) for c in np.unravel_index(flat, shape))
        neg = tuple((-c) % n for c in kvec)
        if kvec in seen:
            continue
        seen.add(kvec)
        seen.add(neg)
        phase = np.zeros(shape)
        for j in range(d):
            phase = phase + (2.0 * math.pi * kvec[j] / n) * coords[j]
        omega = _dispersion(spec, kvec)
        if kvec == neg:
            profile = np.cos(phase) / math.sqrt(vol)
            parity = "const" if all(c == 0 for c in kvec) else "cos"
            modes.append(Mode(len(modes), kvec, parity, omega, profile))
        else:
            norm = math.sqrt(2.0 / vol)
            modes.append(Mode(len(modes), kvec, "cos", omega, np.cos(phase) * norm))
            modes.append(Mode(len(modes), kvec, "sin", omega, np.sin(phase) * norm))
    return ModeBasis(spec, modes)


OccMap = tuple[tuple[int, int], ...]  # sorted ((mode index, occupation), ...)


@dataclass(frozen=True)
class FockFunctional:
    """Finite combination of Fock states over one mode basis.

    terms maps sparse occupation patterns to complex coefficients; the
    normalized flag records whether sum |c|^2 == 1.
    """

    basis: ModeBasis
    terms: tuple[tuple[complex, OccMap], ...]
    normalized: bool = True


def _merge_terms(raw: list[tuple[complex, OccMap]]) -> tuple[tuple[complex, OccMap], ...]:
    acc: dict[OccMap, complex] = {}
    for c, occ in raw:
        acc[occ] = acc.get(occ, 0.0) + c
    return tuple((c, occ) for occ, c in sorted(acc.items()) if c != 0.0)


def _renormalized(basis: ModeBasis, raw: list[tuple[complex, OccMap]]) -> FockFunctional:
    merged = _merge_terms(raw)
    norm = math.sqrt(sum(abs(c) ** 2 for c, _ in merged))
    if norm == 0.0:
        raise ValueError("functional is identically zero")
    return FockFunctional(basis, tuple((c / norm, occ) for c, occ in merged), True)


def vacuum(basis: ModeBasis) -> FockFunctional:
    """Gaussian ground-state functional; strictly positive everywhere."""
    if np.any(basis.omegas <= 0.0):
        raise ValueError("massless zero mode")
    return FockFunctional(basis, ((1.0 + 0.0j, ()),), True)


def apply_creation(f: FockFunctional, mode: int) -> FockFunctional:
    """Raise the occupation of one mode in every term (then renormalize).

    On the vacuum this produces sqrt(2 omega) q_mode * vacuum, the
    standing-wave one-particle functional with its nodal hyperplane at
    q_mode = 0.
    """
    if mode < 0 or mode >= len(f.basis):
        raise ValueError("unknown mode")
    if f.basis.modes[mode].omega <= 0.0:
        raise ValueError("massless zero mode")
    raw = []
    for c, occ in f.terms:
        d = dict(occ)
        n = d.get(mode, 0)
        d[mode] = n + 1
        raw.append((c * math.sqrt(n + 1), tuple(sorted(d.items()))))
    return _renormalized(f.basis, raw)


def superpose(parts: list[tuple[complex, FockFunctional]]) -> FockFunctional:
    """Linear combination of functionals over one shared basis, renormalized."""
    if not parts:
        raise ValueError("empty superposition")
    basis = parts[0][1].basis
    raw: list[tuple[complex, OccMap]] = []
    for coef, f in parts:
        if f.basis != basis:
            raise ValueError("basis mismatch")
        raw.extend((coef * c, occ) for c, occ in f.terms)
    return _renormalized(basis, raw)


def hermite_factor(n: int, xi: np.ndarray | float):
    """H_n(xi) / sqrt(2^n n!) via the stable normalized recurrence."""
    h0 = np.ones_like(np.asarray(xi, dtype=float))
    if n == 0:
        return h0
    h1 = math.sqrt(2.0) * np.asarray(xi, dtype=float)
    if n == 1:
        return h1
    for m in range(2, n + 1):
        h0, h1 = h1, (math.sqrt(2.0 / m) * xi * h1 - math.sqrt((m - 1) / m) * h0)
    return h1


def _full_coords(f: FockFunctional, q) -> np.ndarray:
    m = len(f.basis)
    if isinstance(q, dict):
        full = np.zeros(m)
        for k, v in q.items():
            full[k] = v
        return full
    q = np.asarray(q, dtype=float)
    if q.size != m:
        raise ValueError("coordinate vector must match the basis size")
    return q


def evaluate(f: FockFunctional, q) -> complex:
    """Value of the functional at mode coordinates q (dict coords default 0).

    The shared Gaussian is accumulated in log magnitude, so wide bases
    cannot underflow term by term.
    """
    q = _full_coords(f, q)
    omegas = f.basis.omegas
    log_gauss = float(np.sum(0.25 * np.log(omegas / math.pi) - 0.5 * omegas * q**2))
    gauss = math.exp(log_gauss)
    total = 0.0 + 0.0j
    for c, occ in f.terms:
        factor = 1.0
        for mode, n in occ:
            factor *= float(hermite_factor(n, math.sqrt(omegas[mode]) * q[mode]))
        total += c * factor
    return complex(total * gauss)


def section(f: FockFunctional, axes: tuple[int, int], base=None,
            window: float = 2.5, resolution: int = 128) -> Wavefunction:
    """Sample the functional on the 2D plane spanned by two mode
    coordinates about a base point, as a grid-core Wavefunction."""
    ax1, ax2 = axes
    if ax1 == ax2:
        raise ValueError("section axes must be distinct")
    m = len(f.basis)
    base_q = np.zeros(m) if base is None else _full_coords(f, base)
    omegas = f.basis.omegas

    # sections are not periodic in the mode coordinates; wrap cells would
    # otherwise read the window seam as topology
    grid = Grid((resolution, resolution),
                ((base_q[ax1] - window, base_q[ax1] + window),
                 (base_q[ax2] - window, base_q[ax2] + window)),
                periodic=False)
    qx, qy = grid.meshes()

    others = np.ones(m, dtype=bool)
    others[[ax1, ax2]] = False
    log_g0 = float(np.sum(0.25 * np.log(omegas / math.pi)
                          - 0.5 * np.where(others, omegas * base_q**2, 0.0)))
    gauss = math.exp(log_g0) * np.exp(-0.5 * omegas[ax1] * qx**2 - 0.5 * omegas[ax2] * qy**2)

    total = np.zeros(grid.shape, dtype=complex)
    for c, occ in f.terms:
        factor = np.ones(grid.shape)
        for mode, n in occ:
            w = math.sqrt(omegas[mode])
            if mode == ax1:
                factor = factor * hermite_factor(n, w * qx)
            elif mode == ax2:
                factor = factor * hermite_factor(n, w * qy)
            else:
                factor = factor * float(hermite_factor(n, w * base_q[mode]))
        total += c * factor
    return Wavefunction(grid, total * gauss)


def energy(f: FockFunctional) -> float:
    """<H> = sum_t |c_t|^2 (sum_k omega_k n_k) + sum_k omega_k / 2."""
    zero_point = float(np.sum(f.basis.omegas) / 2.0)
    omegas = f.basis.omegas
    norm_sq = sum(abs(c) ** 2 for c, _ in f.terms)
    excitation = sum(
        abs(c) ** 2 * sum(omegas[mode] * n for mode, n in occ) for c, occ in f.terms
    )
    return float(excitation / norm_sq + zero_point)
