"""Render run-CSV figures: truth-vs-filter trajectories and relative errors.

Every plotted quantity is read from the CSVs; nothing is recomputed here.
Rendering is deterministic: a pinned style and the Agg backend make repeated
renders of the same inputs byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

EXPECTED_COLUMNS = (
    "time",
    "theta_true",
    "v_true",
    "rho_true",
    "X",
    "Y",
    "post_mean",
    "post_var",
    "rel_abs_err",
    "zeta",
)

REQUIRED = {
    "trajectories": ("time", "theta_true", "v_true", "post_mean"),
    "errors": ("time", "theta_true", "v_true", "rel_abs_err"),
}

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
}


class ColumnError(ValueError):
    """A required CSV column is missing."""


class TimeGridError(ValueError):
    """Panel CSVs disagree on the time grid."""


@dataclass(frozen=True)
class Panel:
    path: Path
    columns: dict[str, np.ndarray]

    @property
    def title(self) -> str:
        theta0 = self.columns["theta_true"][0]
        v0 = self.columns["v_true"][0]
        return f"θ(0)={theta0:g} and v(0)={v0:g}"


@dataclass(frozen=True)
class FigureSpec:
    figure: str  # "trajectories" or "errors"
    inputs: tuple[Path, ...]
    out: Path

    def __post_init__(self):
        if self.figure not in REQUIRED:
            raise ValueError(f"unknown figure kind {self.figure!r}")
        if not 1 <= len(self.inputs) <= 4:
            raise ValueError("expected between 1 and 4 input CSVs (2x2 layout)")


def load_panel(path: Path, required: tuple[str, ...]) -> Panel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [name for name in required if name not in fields]
        if missing:
            raise ColumnError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    columns = {
        name: np.array([float(row[name]) for row in rows]) for name in required
    }
    return Panel(path=path, columns=columns)


def check_time_grids(panels: list[Panel]) -> None:
    ref = panels[0].columns["time"]
    for panel in panels[1:]:
        t = panel.columns["time"]
        if len(t) != len(ref) or not np.array_equal(t, ref):
            raise TimeGridError(
                f"time grid of {panel.path} does not match {panels[0].path}"
            )


def render_figure(spec: FigureSpec) -> Path:
    required = REQUIRED[spec.figure]
    panels = [load_panel(p, required) for p in spec.inputs]
    check_time_grids(panels)

    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
        for ax in axes.flat:
            ax.set_visible(False)
        for panel, ax in zip(panels, axes.flat):
            ax.set_visible(True)
            t = panel.columns["time"]
            if spec.figure == "trajectories":
                ax.plot(t, panel.columns["theta_true"], color="tab:blue",
                        label="inhibition rate")
                ax.plot(t, panel.columns["post_mean"], color="tab:red",
                        linestyle="--", label="filter mean")
                ax.set_ylabel("θ")
            else:
                ax.plot(t, panel.columns["rel_abs_err"], color="tab:red",
                        label="relative absolute error")
                ax.set_ylabel("relative error")
            ax.set_title(panel.title)
            ax.set_xlabel("time")
            ax.legend(loc="best")
        fig.tight_layout()
        out = Path(spec.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, format="png", metadata={"Software": None})
        plt.close(fig)
    return out
