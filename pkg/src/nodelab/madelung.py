"""Madelung decomposition psi <-> (rho, S) and its failure modes at zeros.

A wave function psi = sqrt(rho) exp(i S / hbar) carries a velocity field
v = grad(S)/m and a quantum potential

    Q = -(hbar^2 / 2m) * Lap(sqrt rho) / sqrt(rho),

which together turn the Schroedinger equation into a continuity equation
plus a quantum Hamilton-Jacobi equation.  Where rho -> 0 the map is
ill-defined: the phase is undetermined, v diverges, and the flow is no
longer globally irrotational.  This module exposes exactly that
boundary: decomposition/reconstruction with a validity mask, loop
circulation (always an integer for a single-valued psi), and flow
reconstruction whose holonomy defect measures the distance of a given
(rho, v) pair from the quantized-circulation manifold.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import Grid, PotentialSpec, Wavefunction, gradient, laplacian

__all__ = [
    "MadelungFields",
    "Contour",
    "decompose",
    "reconstruct",
    "quantum_potential",
    "hj_residual",
    "circulation",
    "reconstruct_from_flow",
    "rectangle_contour",
    "circle_contour",
    "export_fields_csv",
]

DEFAULT_ZERO_THRESHOLD = 1e-12


@dataclass(frozen=True)
class MadelungFields:
    """(rho, S, v, Q) of a wave function, masked where rho is near zero.

    S_principal is the principal phase branch hbar*arg(psi) in
    (-pi*hbar, pi*hbar]; v and Q are meaningful only on valid_mask.
    """

    grid: Grid
    rho: np.ndarray
    S_principal: np.ndarray
    v: tuple[np.ndarray, ...]
    Q: np.ndarray
    valid_mask: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0


@dataclass(frozen=True)
class Contour:
    """Closed loop of grid points moving in axis-aligned unit steps."""

    points: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        pts = tuple(tuple(int(i) for i in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 4 or pts[0] != pts[-1]:
            raise ValueError("contour must be a closed loop (first point == last)")

    def validate_on(self, grid: Grid) -> None:
        for p, q in zip(self.points[:-1], self.points[1:]):
            steps = 0
            for a, b, n in zip(p, q, grid.points_per_axis):
                d = (b - a) % n
                allowed = (0, 1, n - 1) if grid.periodic else (0, 1)
                if d not in allowed and not (not grid.periodic and b - a == -1):
                    raise ValueError("contour points must be grid-adjacent")
                if d != 0:
                    steps += 1
            if steps != 1:
                raise ValueError("contour must advance one axis per step")

    def index_arrays(self) -> tuple[np.ndarray, ...]:
        arr = np.array(self.points)
        return tuple(arr[:, j] for j in range(arr.shape[1]))


def _valid_mask(rho: np.ndarray, zero_threshold: float) -> np.ndarray:
    return rho > zero_threshold * float(np.mean(rho))


def quantum_potential(rho: np.ndarray, grid: Grid, mass: float = 1.0, hbar: float = 1.0,
                      method: str = "spectral", valid_mask: np.ndarray | None = None) -> np.ndarray:
    """Q = -(hbar^2/2m) Lap(sqrt rho)/sqrt(rho) on the valid mask, NaN elsewhere.

    The spectral Laplacian is exact for smooth nodeless densities; the
    "fd" stencil keeps errors local and is preferred once zeros exist.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    if valid_mask is None:
        valid_mask = _valid_mask(rho, DEFAULT_ZERO_THRESHOLD)
    sqrt_rho = np.sqrt(rho)
    lap = np.real(laplacian(sqrt_rho, grid, method=method))
    q = np.full(rho.shape, np.nan)
    np.divide(lap, sqrt_rho, out=q, where=valid_mask)
    q[valid_mask] *= -(hbar**2) / (2.0 * mass)
    return q


def decompose(psi: Wavefunction, zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
              mass: float = 1.0, hbar: float = 1.0, q_method: str | None = None) -> MadelungFields:
    """Split psi into (rho, S, v, Q).

    v = (hbar/m) Im(grad psi / psi) via centered differences, which
    sidesteps any global phase unwrapping; points with
    rho <= zero_threshold * mean(rho) are masked.  q_method defaults to
    spectral on fully valid fields and to the local stencil otherwise,
    so node kinks cannot ring across the grid.
    """
    vals = psi.values
    rho = np.abs(vals) ** 2
    if not np.any(rho > 0):
        raise ValueError("wave function is identically zero")
    mask = _valid_mask(rho, zero_threshold)
    s_principal = hbar * np.angle(vals)
    vel = []
    for axis in range(psi.grid.dim):
        g = gradient(vals, psi.grid, axis, method="fd")
        ratio = np.zeros_like(vals)
        np.divide(g, vals, out=ratio, where=mask)
        vel.append((hbar / mass) * np.where(mask, ratio.imag, np.nan))
    if q_method is None:
        q_method = "spectral" if bool(mask.all()) else "fd"
    q = quantum_potential(rho, psi.grid, mass=mass, hbar=hbar, method=q_method, valid_mask=mask)
    return MadelungFields(psi.grid, rho, s_principal, tuple(vel), q, mask, mass, hbar)


def reconstruct(fields: MadelungFields) -> Wavefunction:
    """sqrt(rho) exp(i S / hbar); refuses masked points, where the phase
    carries no information and the map is ill-defined."""
    if not bool(fields.valid_mask.all()):
        raise ValueError("zeros present: reconstruction ill-defined")
    vals = np.sqrt(fields.rho) * np.exp(1j * fields.S_principal / fields.hbar)
    return Wavefunction(fields.grid, vals)


def hj_residual(psi_t: Wavefunction, psi_next: Wavefunction, potential: PotentialSpec,
                dt: float, zero_threshold: float = DEFAULT_ZERO_THRESHOLD,
                hbar: float = 1.0) -> np.ndarray:
    """Residual of d_t S + |grad S|^2/2m + V + Q between two time slices.

    The phase difference is unwrapped in time pointwise; a jump close to
    the branch cut means the slices are too far apart to unwrap safely.
    Spatial terms use spectral derivatives (both slices must be
    nodeless, so this is well-posed).  Returns the residual on the valid
    mask, NaN elsewhere.
    """
    if psi_t.grid != psi_next.grid:
        raise ValueError("grid mismatch")
    if dt <= 0:
        raise ValueError("dt must be positive")
    mass = potential.mass
    mask = _valid_mask(psi_t.density(), zero_threshold) & _valid_mask(psi_next.density(), zero_threshold)
    dphase = np.angle(psi_next.values * np.conj(psi_t.values))
    if np.max(np.abs(dphase[mask])) > 0.9 * np.pi:
        raise ValueError("dt too large")
    dt_s = hbar * dphase / dt

    def spatial_terms(psi: Wavefunction) -> np.ndarray:
        grad_s_sq = np.zeros(psi.grid.shape)
        for axis in range(psi.grid.dim):
            g = gradient(psi.values, psi.grid, axis, method="spectral")
            ratio = np.zeros_like(psi.values)
            np.divide(g, psi.values, out=ratio, where=mask)
            grad_s_sq += np.where(mask, (hbar * ratio.imag) ** 2, 0.0)
        q = quantum_potential(psi.density(), psi.grid, mass=mass, hbar=hbar,
                              method="spectral", valid_mask=mask)
        return grad_s_sq / (2.0 * mass) + np.where(mask, q, 0.0)

    # averaging both slices centers the spatial terms on the same midpoint
    # as the phase difference, so the residual is second order in dt
    spatial = 0.5 * (spatial_terms(psi_t) + spatial_terms(psi_next))
    v_ext = potential.on_grid(psi_t.grid)
    res = np.full(psi_t.grid.shape, np.nan)
    res[mask] = dt_s[mask] + spatial[mask] + v_ext[mask]
    return res


def circulation(psi: Wavefunction, loop: Contour, zero_threshold: float = DEFAULT_ZERO_THRESHOLD) -> int:
    """Winding number (1/2pi) sum of wrapped phase steps along the loop.

    Exact integer for any single-valued psi; equivalently
    (m / 2 pi hbar) * closed line integral of v.
    """
    loop.validate_on(psi.grid)
    idx = loop.index_arrays()
    vals = psi.values[idx]
    rho = np.abs(vals) ** 2
    if np.min(rho) <= zero_threshold * float(np.mean(psi.density())):
        raise ValueError("contour through node")
    total = float(np.sum(np.angle(vals[1:] * np.conj(vals[:-1]))))
    turns = total / (2.0 * np.pi)
    n = int(np.rint(turns))
    if abs(turns - n) > 0.1:
        raise ValueError(f"circulation {turns:.3f} does not resolve to an integer")
    return n


def _neighbors(point: tuple[int, ...], shape: tuple[int, ...]):
    for axis in range(len(shape)):
        for step in (1, -1):
            q = list(point)
            q[axis] = (q[axis] + step) % shape[axis]
            yield tuple(q), axis, step


def reconstruct_from_flow(rho: np.ndarray, v: tuple[np.ndarray, ...], grid: Grid,
                          base: tuple[int, ...], valid_mask: np.ndarray | None = None,
                          mass: float = 1.0, hbar: float = 1.0) -> tuple[Wavefunction, float]:
    """Rebuild a single-valued psi from (rho, v) and report the holonomy defect.

    S is accumulated by trapezoid line integrals of m*v along a
    breadth-first spanning tree rooted at `base` (neighbors visited in
    fixed +x, -x, +y, -y order, so the tree is reproducible).  The
    defect is the largest distance of any independent-loop circulation
    from a multiple of 2 pi hbar, evaluated over the fundamental cycles
    of the valid-region graph; a small defect certifies integer
    circulation, a defect near pi hbar flags a non-quantizable flow.
    """
    rho = np.asarray(rho, dtype=float)
    if valid_mask is None:
        valid_mask = _valid_mask(rho, DEFAULT_ZERO_THRESHOLD)
    base = tuple(int(i) for i in base)
    if not valid_mask[base]:
        raise ValueError("base point is masked")
    shape = grid.shape
    spacing = grid.spacing

    def edge_integral(p, q, axis, step):
        # trapezoid rule for int m v . dl over one grid edge
        return 0.5 * mass * (v[axis][p] + v[axis][q]) * step * spacing[axis]

    s = np.full(shape, np.nan)
    s[base] = 0.0
    seen = np.zeros(shape, dtype=bool)
    seen[base] = True
    queue = deque([base])
    while queue:
        p = queue.popleft()
        for q, axis, step in _neighbors(p, shape):
            if seen[q] or not valid_mask[q]:
                continue
            if not np.isfinite(v[axis][p]) or not np.isfinite(v[axis][q]):
                raise ValueError("masked point encountered on integration edge")
            s[q] = s[p] + edge_integral(p, q, axis, step)
            seen[q] = True
            queue.append(q)
    if bool((valid_mask & ~seen).any()):
        raise ValueError("valid region is not connected to the base point")

    defect = _holonomy_defect(v, grid, valid_mask, s, mass, hbar)
    vals = np.where(valid_mask, np.sqrt(rho) * np.exp(1j * np.nan_to_num(s) / hbar), 0.0)
    return Wavefunction(grid, vals), defect


def _wrap_distance(value: float | np.ndarray, period: float):
    return np.abs((value + 0.5 * period) % period - 0.5 * period)


def _contour_flow_integral(v, grid: Grid, loop: Contour, mass: float) -> float:
    arr = np.array(loop.points)
    total = 0.0
    for axis in range(grid.dim):
        moved = arr[1:, axis] != arr[:-1, axis]
        p = arr[:-1][moved]
        q = arr[1:][moved]
        step = q[:, axis] - p[:, axis]
        seg = 0.5 * mass * (v[axis][tuple(p.T)] + v[axis][tuple(q.T)]) * step * grid.spacing[axis]
        total += float(np.sum(seg))
    return total


def _holonomy_defect(v, grid: Grid, valid_mask: np.ndarray, s: np.ndarray,
                     mass: float, hbar: float) -> float:
    """Max distance of any independent-loop circulation from 2 pi hbar Z.

    The cycle basis is: every fully-valid plaquette, a rectangle around
    each enclosed masked hole, and the torus wrap cycles through the
    first fully-valid row/column (1D: the single wrap cycle, taken from
    the spanning-"tree" closure).  Plaquette and hole loops are
    evaluated as direct trapezoid circulations, so tree-path truncation
    error does not pile into the defect.
    """
    period = 2.0 * np.pi * hbar
    if grid.dim == 1:
        seg = 0.5 * mass * (v[0] + np.roll(v[0], -1)) * grid.spacing[0]
        mismatch = s + seg - np.roll(s, -1)
        both = valid_mask & np.roll(valid_mask, -1)
        if not both.any():
            return 0.0
        return float(np.max(_wrap_distance(mismatch[both], period)))

    defect = 0.0
    hx, hy = grid.spacing
    ex = 0.5 * mass * (v[0] + np.roll(v[0], -1, axis=0)) * hx   # edge (i,j)->(i+1,j)
    ey = 0.5 * mass * (v[1] + np.roll(v[1], -1, axis=1)) * hy   # edge (i,j)->(i,j+1)
    cell_ok = (valid_mask & np.roll(valid_mask, -1, axis=0)
               & np.roll(valid_mask, -1, axis=1)
               & np.roll(np.roll(valid_mask, -1, axis=0), -1, axis=1))
    if cell_ok.any():
        circ = ex + np.roll(ey, -1, axis=0) - np.roll(ex, -1, axis=1) - ey
        defect = float(np.max(_wrap_distance(circ[cell_ok], period)))

    # wrap cycles of the torus, where a full row/column is valid
    full_rows = np.where(valid_mask.all(axis=1))[0]
    if full_rows.size:
        defect = max(defect, float(_wrap_distance(np.sum(ey[full_rows[0], :]), period)))
    full_cols = np.where(valid_mask.all(axis=0))[0]
    if full_cols.size:
        defect = max(defect, float(_wrap_distance(np.sum(ex[:, full_cols[0]]), period)))

    # enclosed masked holes: one rectangle per interior connected component
    from scipy import ndimage

    labels, n_comp = ndimage.label(~valid_mask)
    ni, nj = grid.shape
    for comp in range(1, n_comp + 1):
        ii, jj = np.where(labels == comp)
        if ii.min() == 0 or jj.min() == 0 or ii.max() == ni - 1 or jj.max() == nj - 1:
            continue  # touches the domain edge: an outer tail, nothing to enclose
        # widest valid rectangle: the velocity samples are most accurate
        # far from the hole, so larger loops carry less bias
        max_margin = int(min(ii.min(), jj.min(), ni - 1 - ii.max(), nj - 1 - jj.max()))
        for margin in range(max_margin, 1, -1):
            i0, i1 = int(ii.min()) - margin, int(ii.max()) + margin
            j0, j1 = int(jj.min()) - margin, int(jj.max()) + margin
            loop = rectangle_contour(grid, (i0, i1), (j0, j1))
            pts = loop.index_arrays()
            if not bool(valid_mask[pts].all()):
                continue
            circ = _contour_flow_integral(v, grid, loop, mass)
            defect = max(defect, float(_wrap_distance(circ, period)))
            break
    return defect


# ---------------------------------------------------------------------------
# Contour constructors
# ---------------------------------------------------------------------------


def rectangle_contour(grid: Grid, i_range: tuple[int, int], j_range: tuple[int, int]) -> Contour:
    """Counterclockwise rectangle over index ranges [i0, i1] x [j0, j1]."""
    i0, i1 = i_range
    j0, j1 = j_range
    if i1 <= i0 or j1 <= j0:
        raise ValueError("degenerate rectangle")
    pts = [(i, j0) for i in range(i0, i1)]
    pts += [(i1, j) for j in range(j0, j1)]
    pts += [(i, j1) for i in range(i1, i0, -1)]
    pts += [(i0, j) for j in range(j1, j0 - 1, -1)]
    return Contour(tuple(pts))


def circle_contour(grid: Grid, center: tuple[float, float], radius: float, n_samples: int = 720) -> Contour:
    """Closed staircase of grid points tracking a circle counterclockwise."""
    ax0, ax1 = grid.axis(0), grid.axis(1)
    h0, h1 = grid.spacing

    def nearest(cx, cy):
        return (
            int(np.clip(np.rint((cx - ax0[0]) / h0), 0, len(ax0) - 1)),
            int(np.clip(np.rint((cy - ax1[0]) / h1), 0, len(ax1) - 1)),
        )

    raw = []
    for t in np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False):
        p = nearest(center[0] + radius * np.cos(t), center[1] + radius * np.sin(t))
        if not raw or p != raw[-1]:
            raw.append(p)
    pts: list[tuple[int, int]] = []
    for p, q in zip(raw, raw[1:] + raw[:1]):
        pts.append(p)
        # staircase connector: x first, then y
        i, j = p
        while i != q[0]:
            i += 1 if q[0] > i else -1
            pts.append((i, j))
        while j != q[1]:
            j += 1 if q[1] > j else -1
            pts.append((i, j))
    # drop consecutive duplicates, close the loop
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    if dedup[0] != dedup[-1]:
        dedup.append(dedup[0])
    return Contour(tuple(dedup))


def export_fields_csv(fields: MadelungFields, path: str | Path) -> Path:
    """CSV dump `index,x[,y],rho,S,vx[,vy],Q,valid`."""
    path = Path(path)
    grid = fields.grid
    meshes = [m.ravel() for m in grid.meshes()]
    rho = fields.rho.ravel()
    s = fields.S_principal.ravel()
    vels = [vi.ravel() for vi in fields.v]
    q = fields.Q.ravel()
    valid = fields.valid_mask.ravel()
    coord_cols = "x" if grid.dim == 1 else "x,y"
    v_cols = "vx" if grid.dim == 1 else "vx,vy"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"index,{coord_cols},rho,S,{v_cols},Q,valid\n")
        for i in range(rho.size):
            coords = ",".join(repr(float(m[i])) for m in meshes)
            vs = ",".join(repr(float(vi[i])) for vi in vels)
            f.write(
                f"{i},{coords},{float(rho[i])!r},{float(s[i])!r},{vs},{float(q[i])!r},{int(valid[i])}\n"
            )
    return path
