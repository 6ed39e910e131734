"""Figures for the analytic-vs-Monte-Carlo comparison.

Each figure pairs two panels: analytic curves on a fine time grid with the
Monte Carlo estimates (and two standard errors) overlaid.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .exp_poly import KernelParams  # noqa: E402
from .hawkes_cumulants import cumulants, intensity_count_moment, mean_intensity  # noqa: E402

PANELS = {
    "fig1_mean_std": (("kappa1", "First cumulant"), ("std", "Square root of second cumulant")),
    "fig2_third_skewness": (("kappa3", "Third cumulant"), ("skewness", "Skewness")),
    "fig3_fourth_kurtosis": (("kappa4", "Fourth cumulant"), ("excess_kurtosis", "Excess kurtosis")),
    "fig4_intensity": (("mean_intensity", "Mean intensity"), ("joint_moment", "Joint moment E[lambda_t N_t]")),
}

STYLE = {
    "figure.figsize": (9.0, 3.6),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def analytic_curves(params: KernelParams, t_max: float, points: int = 200) -> dict[str, np.ndarray]:
    ts = np.linspace(0.0, t_max, points + 1)
    cols: dict[str, list[float]] = {k: [] for k in
                                    ("kappa1", "std", "kappa3", "skewness", "kappa4", "excess_kurtosis",
                                     "mean_intensity", "joint_moment")}
    for t in ts:
        q = params.with_horizon(float(t))
        cv = cumulants(4, q)
        cols["kappa1"].append(cv[1])
        cols["std"].append(math.sqrt(cv[2]))
        cols["kappa3"].append(cv[3])
        cols["kappa4"].append(cv[4])
        cols["skewness"].append(cv.skewness if t > 0 else math.nan)
        cols["excess_kurtosis"].append(cv.excess_kurtosis if t > 0 else math.nan)
        cols["mean_intensity"].append(mean_intensity(q))
        cols["joint_moment"].append(intensity_count_moment(q))
    out = {k: np.asarray(v) for k, v in cols.items()}
    out["t"] = ts
    return out


def _mc_points(rows: list[dict], quantity: str):
    if quantity == "std":
        sel = [r for r in rows if r["quantity"] == "kappa2"]
        est = np.array([math.sqrt(max(r["estimate"], 0.0)) for r in sel])
        # delta method: se(sqrt(k2)) = se(k2) / (2 sqrt(k2))
        se = np.array([r["se"] / (2 * math.sqrt(r["estimate"])) if r["estimate"] > 0 else 0.0 for r in sel])
    else:
        sel = [r for r in rows if r["quantity"] == quantity]
        est = np.array([r["estimate"] for r in sel])
        se = np.array([r["se"] for r in sel])
    return np.array([r["t"] for r in sel]), est, se


def render_comparison(rows: list[dict], params: KernelParams, out_dir: str | Path, samples: int) -> list[Path]:
    """Write one PNG per figure into ``out_dir``; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t_max = max(r["t"] for r in rows)
    curves = analytic_curves(params, t_max)
    written = []
    with plt.rc_context(STYLE):
        for name, panels in PANELS.items():
            fig, axes = plt.subplots(1, 2)
            for ax, (key, title) in zip(axes, panels):
                ax.plot(curves["t"], curves[key], color="k", lw=1.2, label="Bell recursion")
                ts, est, se = _mc_points(rows, key)
                ax.errorbar(ts, est, yerr=2 * se, fmt="o", ms=3, color="tab:red", capsize=2,
                            label=f"Monte Carlo ({samples:g} samples)")
                ax.set_title(title)
                ax.set_xlabel("t")
            axes[0].legend(loc="upper left", fontsize=7)
            fig.suptitle(f"nu={params.nu:g}, a={params.a:g}, b={params.b:g}")
            path = out_dir / f"{name}.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)
    return written
