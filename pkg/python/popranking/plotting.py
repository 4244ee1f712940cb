"""
Line plots of figure data, written as SVG next to the CSV.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path

logger = logging.getLogger(__name__)


def _pyplot():
    # Deferred so the numeric modules never pay for a plotting import
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "popranking"
    import matplotlib.pyplot as plt

    return plt


def _group(rows: list[dict], keys: list[str]) -> dict[tuple, list[dict]]:
    groups = defaultdict(list)
    for row in rows:
        groups[tuple(row.get(key) for key in keys)].append(row)
    return groups


def _label(keys: list[str], values: tuple) -> str:
    return ", ".join(f"{key}={value}" for key, value in zip(keys, values))


def line_plot(
    rows: list[dict],
    path: str | Path,
    x: str,
    y: str,
    series: list[str] | None = None,
    panel: str | None = None,
    title: str = "",
) -> Path:
    """
    Plot ``y`` against ``x`` with one line per distinct ``series`` value and
    one axis per distinct ``panel`` value.
    """
    plt = _pyplot()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    series = series or []

    panels = _group(rows, [panel]) if panel else {(None,): rows}
    fig, axes = plt.subplots(
        1, len(panels), figsize=(5 * len(panels), 4), squeeze=False
    )
    for ax, (panel_value, panel_rows) in zip(axes[0], panels.items()):
        for values, line_rows in _group(panel_rows, series).items():
            line_rows = sorted(line_rows, key=lambda row: float(row[x]))
            ax.plot(
                [float(row[x]) for row in line_rows],
                [float(row[y]) for row in line_rows],
                marker="." if len(line_rows) < 40 else None,
                label=_label(series, values) if series else None,
            )
        if panel:
            ax.set_title(f"{panel}={panel_value[0]}", fontsize=10)
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        ax.grid(True, linestyle="--", alpha=0.3)
        if series:
            ax.legend(fontsize=7)

    if title:
        fig.suptitle(title, fontsize=11)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug("Wrote plot %s", path)
    return path
