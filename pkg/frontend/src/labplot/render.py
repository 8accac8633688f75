"""Render diagnostic figures from experiment output directories.

Input schemas (produced by the lab runner):
  series_*.csv   t,min_rho,argmin_x[,argmin_y],norm,energy
  trials.csv     epsilon,trial,charge,zero_x,zero_y,displacement
  ensemble_*.csv path,t,x[,y],alive
  density.csv    x,rho
  section.csv    index,x,y,re,im  (+ .grid.json sidecar)
  charges.csv    epsilon,trial,charge,zero_x,zero_y,displacement
  results.json   experiment report

Rendering is read-only and deterministic: fixed figure geometry, no
timestamps embedded in the output.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "labplot"

FIGURE_KINDS = (
    "min-density-series",
    "zero-displacement-scatter",
    "density-histogram-overlay",
    "section-heatmap-with-charges",
)


@dataclass(frozen=True)
class FigureSpec:
    experiment_dir: Path
    kind: str
    out_format: str = "svg"

    def __post_init__(self):
        object.__setattr__(self, "experiment_dir", Path(self.experiment_dir))
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; known: {', '.join(FIGURE_KINDS)}")
        if self.out_format not in ("svg", "png"):
            raise ValueError("output format must be svg or png")


def _read_csv(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise FileNotFoundError(f"missing artifact {path.name}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        fields = reader.fieldnames or []
        for col in required:
            if col not in fields:
                raise ValueError(f"{path.name}: missing column {col!r}")
        rows = list(reader)
    out: dict[str, np.ndarray] = {}
    for col in fields:
        vals = [r[col] for r in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals)
    return out


def _read_results(exp_dir: Path) -> dict:
    path = exp_dir / "results.json"
    if not path.exists():
        raise FileNotFoundError("missing results.json; is this an experiment directory?")
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def render(spec: FigureSpec):
    """Build the figure; returns (fig, info) with marker data for callers."""
    results = _read_results(spec.experiment_dir)
    fig, ax = plt.subplots(figsize=(7.2, 4.5), dpi=110)
    info: dict = {"experiment": results["experiment"]}

    if spec.kind == "min-density-series":
        series = sorted(spec.experiment_dir.glob("series_*.csv"))
        if not series:
            raise FileNotFoundError("no series_*.csv artifacts found")
        floor = None
        for path in series:
            data = _read_csv(path, ("t", "min_rho"))
            label = path.stem.replace("series_", "")
            ax.plot(data["t"], data["min_rho"], label=label, lw=1.0)
            this_floor = float(np.min(data["min_rho"]))
            floor = this_floor if floor is None else min(floor, this_floor)
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(r"min $|\psi|^2$")
        ax.annotate(f"floor {floor:.3e}", xy=(0.02, 0.04), xycoords="axes fraction")
        ax.legend(loc="best", fontsize=8)
        info["floor"] = floor

    elif spec.kind == "zero-displacement-scatter":
        data = _read_csv(spec.experiment_dir / "trials.csv",
                         ("epsilon", "trial", "charge", "zero_x", "zero_y", "displacement"))
        ax.scatter(data["epsilon"], data["displacement"], s=12, alpha=0.7)
        rho0 = results["metrics"].get("rho0")
        if rho0 is not None:
            guide = float(np.sqrt(0.01 * rho0))
            ax.axvline(guide, color="tab:red", ls="--", lw=1.0,
                       label=r"$\epsilon^2 = 0.01\,\rho_0$")
            ax.legend(loc="best", fontsize=8)
            info["guide_epsilon"] = guide
        ax.set_xlabel(r"perturbation amplitude $\epsilon$")
        ax.set_ylabel("zero displacement")

    elif spec.kind == "density-histogram-overlay":
        ens = _read_csv(spec.experiment_dir / "ensemble_1d.csv", ("path", "t", "x", "alive"))
        dens = _read_csv(spec.experiment_dir / "density.csv", ("x", "rho"))
        t_final = float(np.max(ens["t"]))
        xs = ens["x"][ens["t"] == t_final]
        ax.hist(xs, bins=60, density=True, alpha=0.5, label=f"ensemble at t = {t_final:g}")
        ax.plot(dens["x"], dens["rho"], lw=1.2, color="tab:red", label=r"$|\psi|^2$")
        ax.set_xlabel("x")
        ax.set_ylabel("probability density")
        ax.legend(loc="best", fontsize=8)
        info["n_samples"] = int(xs.size)

    else:  # section-heatmap-with-charges
        data = _read_csv(spec.experiment_dir / "section.csv", ("index", "x", "y", "re", "im"))
        with open(spec.experiment_dir / "section.grid.json", encoding="utf-8") as f:
            meta = json.load(f)
        nx, ny = meta["points_per_axis"]
        rho = (data["re"] ** 2 + data["im"] ** 2).reshape(nx, ny)
        x = data["x"].reshape(nx, ny)
        y = data["y"].reshape(nx, ny)
        mesh = ax.pcolormesh(x, y, rho, shading="auto", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=r"$|\Psi|^2$ on section")
        markers = []
        charges_path = spec.experiment_dir / "charges.csv"
        if charges_path.exists():
            ch = _read_csv(charges_path, ("charge", "zero_x", "zero_y"))
            for q, zx, zy in zip(ch["charge"], ch["zero_x"], ch["zero_y"]):
                if np.isfinite(zx):
                    ax.plot(zx, zy, "wx", ms=8, mew=1.5)
                    ax.annotate(f"{int(q):+d}", xy=(zx, zy), xytext=(4, 4),
                                textcoords="offset points", color="w", fontsize=9)
                    markers.append((float(zx), float(zy), int(q)))
        zx = results["metrics"].get("zero_x")
        zy = results["metrics"].get("zero_y")
        if zx is not None:
            ax.plot(zx, zy, "o", ms=11, mfc="none", mec="tab:red", mew=1.4)
            info["reported_zero"] = (float(zx), float(zy))
        mode_meta = meta.get("section", {})
        ax.set_xlabel(f"mode coordinate q[{mode_meta.get('mode_1', '?')}]")
        ax.set_ylabel(f"mode coordinate q[{mode_meta.get('mode_2', '?')}]")
        info["markers"] = markers

    ax.set_title(f"{results['experiment']}: {spec.kind}", fontsize=10)
    fig.tight_layout()
    return fig, info


def render_to_file(spec: FigureSpec, out_path: str | Path):
    fig, info = render(spec)
    out_path = Path(out_path)
    metadata = {"Date": None} if spec.out_format == "svg" else {"Software": None}
    fig.savefig(out_path, format=spec.out_format, metadata=metadata)
    plt.close(fig)
    return out_path, info
