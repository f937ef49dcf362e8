"""Figure rendering for runs and sweeps (file output only).

Figures are written next to the delimited output of the same run so a
directory is self-contained: load curves per surface, the airborne
load, accumulated exposure per susceptible, pathway shares over time,
and a heatmap per sweep.  The Agg backend is forced; nothing here opens
a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from tripath.dynamics import DOSE_PATHWAYS  # noqa: E402
from tripath.integrator import SimulationResult  # noqa: E402
from tripath.sweep import SweepResult  # noqa: E402

#: Legends are suppressed above this many series to keep figures readable.
MAX_LEGEND_SERIES = 12


def _save(fig, ax, out_path: Path, n_series: int, legend_kwargs=None) -> Path:
    ax.grid(alpha=0.3)
    if 0 < n_series <= MAX_LEGEND_SERIES:
        ax.legend(fontsize="small", **(legend_kwargs or {}))
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_run_figures(result: SimulationResult, out_dir) -> list[Path]:
    """Write the four per-run figures into out_dir; returns their paths."""
    out_dir = Path(out_dir)
    t = result.times
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for sid in result.layout.surface_ids:
        ax.plot(t, result.series(sid), label=sid)
    ax.set_xlabel("time (h)")
    ax.set_ylabel("viral particles")
    ax.set_title("surface loads")
    written.append(_save(fig, ax, out_dir / "surface_loads.png", len(result.layout.surface_ids)))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, result.series("air"), color="tab:purple")
    ax.set_xlabel("time (h)")
    ax.set_ylabel("viral particles")
    ax.set_title("airborne load")
    written.append(_save(fig, ax, out_dir / "air_load.png", 0))

    susceptibles = result.layout.susceptible_ids
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for pid in susceptibles:
        ax.plot(t, result.total_dose(pid), label=pid)
    ax.set_xlabel("time (h)")
    ax.set_ylabel("accumulated dose (viral particles)")
    ax.set_title("exposure per susceptible")
    written.append(_save(fig, ax, out_dir / "exposure.png", len(susceptibles)))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = dict(zip(DOSE_PATHWAYS, ("tab:blue", "tab:orange", "tab:green")))
    for pid in susceptibles:
        total = result.total_dose(pid)
        with np.errstate(invalid="ignore", divide="ignore"):
            for pathway in DOSE_PATHWAYS:
                share = np.where(total > 0, result.dose(pid, pathway) / total, np.nan)
                ax.plot(
                    t,
                    share,
                    color=colors[pathway],
                    alpha=min(1.0, 3.0 / max(len(susceptibles), 1)),
                    label=pathway if pid == susceptibles[0] else None,
                )
    ax.set_xlabel("time (h)")
    ax.set_ylabel("share of accumulated dose")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("pathway shares")
    written.append(_save(fig, ax, out_dir / "pathway_shares.png", len(DOSE_PATHWAYS)))
    return written


def render_sweep_figure(sweep: SweepResult, out_dir) -> Path:
    """Write heatmap.png for a sweep grid; returns its path."""
    out_dir = Path(out_dir)
    spec = sweep.spec
    fig, ax = plt.subplots(figsize=(6.5, 5))
    # axis1 varies along rows -> vertical axis of the image
    image = ax.imshow(sweep.values, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(spec.axis2.values)), [f"{v:g}" for v in spec.axis2.values])
    ax.set_yticks(range(len(spec.axis1.values)), [f"{v:g}" for v in spec.axis1.values])
    ax.set_xlabel(spec.axis2.path)
    ax.set_ylabel(spec.axis1.path)
    label = spec.metric if spec.metric != "pathway_share" else f"{spec.pathway} share"
    fig.colorbar(image, ax=ax, label=label)
    fig.tight_layout()
    out_path = out_dir / "heatmap.png"
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


__all__ = ["MAX_LEGEND_SERIES", "render_run_figures", "render_sweep_figure"]
