"""Static report rendering: one figure and one delimited table per step.

Given an exported bundle, writes ``NN_Symbol.png`` / ``NN_Symbol.csv`` pairs
plus an ``index.csv`` manifest into a directory. Figures are matplotlib;
tables are plain CSV mirroring each payload.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ExportError

FIG_SIZE = (6.0, 4.0)
ACCENT = "#4878b0"
NEGATIVE = "#d0544f"


def _attribution_figure(ax, payload):
    names = [c["variable"] for c in payload["contributions"]]
    vals = [c["value"] for c in payload["contributions"]]
    colors = [ACCENT if v >= 0 else NEGATIVE for v in vals]
    ax.barh(range(len(vals))[::-1], vals, color=colors)
    ax.set_yticks(range(len(vals))[::-1], names)
    ax.axvline(0.0, color="#555", linewidth=0.8)
    ax.set_xlabel(
        f"contribution ({payload['method']}, baseline {payload['baseline']:.3g}, "
        f"prediction {payload['prediction']:.3g})"
    )


def _attribution_rows(payload):
    unc = payload.get("uncertainty") or {}
    header = ["variable", "contribution"] + (["sd"] if unc else [])
    rows = [header]
    for c in payload["contributions"]:
        row = [c["variable"], c["value"]]
        if unc:
            row.append(unc.get(c["variable"], ""))
        rows.append(row)
    return rows


def _profile_figure(ax, payload):
    if payload["kind"] == "numeric":
        ax.plot(payload["grid"], payload["values"], color=ACCENT)
        anchor = payload.get("anchor")
        if anchor:
            ax.plot([anchor["x"]], [anchor["prediction"]], "o", color=NEGATIVE, label="instance")
            ax.legend()
    else:
        ax.bar(payload["grid"], payload["values"], color=ACCENT)
    ax.set_xlabel(payload["variable"])
    ax.set_ylabel("prediction")
    ax.set_title(payload["method"])


def _profile_rows(payload):
    return [["grid", "value"]] + [
        [g, v] for g, v in zip(payload["grid"], payload["values"])
    ]


def _dependence_figure(ax, payload):
    xs = [p["x"] for p in payload["points"]]
    ys = [p["phi"] for p in payload["points"]]
    ax.scatter(xs, ys, s=12, color=ACCENT, alpha=0.7)
    ax.set_xlabel(payload["variable"])
    ax.set_ylabel("attribution")


def _importance_figure(ax, payload):
    names = [e["variable"] for e in payload["entries"]]
    vals = [e["estimate"] for e in payload["entries"]]
    errs = [e.get("spread") or 0.0 for e in payload["entries"]]
    order = np.argsort(vals)
    ax.barh(
        range(len(vals)),
        [vals[i] for i in order],
        xerr=[errs[i] for i in order],
        color=ACCENT,
    )
    ax.set_yticks(range(len(vals)), [names[i] for i in order])
    label = payload["method"]
    if "baseline_loss" in payload:
        label += f" (baseline {payload.get('loss', '')} {payload['baseline_loss']:.3g})"
    ax.set_xlabel(label)


def _importance_rows(payload):
    # loss-based importances also get a ratio column (permuted/baseline) for display
    baseline = payload.get("baseline_loss")
    with_ratio = baseline is not None and baseline > 0.0
    rows = [["variable", "estimate", "spread"] + (["ratio_to_baseline"] if with_ratio else [])]
    for e in payload["entries"]:
        row = [e["variable"], e["estimate"], e.get("spread", "")]
        if with_ratio:
            row.append((baseline + e["estimate"]) / baseline)
        rows.append(row)
    return rows


def _distribution_figure(ax, payload):
    bins = payload["bins"]
    if payload["kind"] == "histogram":
        if bins and "lo" in bins[0]:
            widths = [b["hi"] - b["lo"] or 1.0 for b in bins]
            ax.bar([b["lo"] for b in bins], [b["count"] for b in bins],
                   width=widths, align="edge", color=ACCENT, edgecolor="white")
        ax.set_ylabel("count")
    elif payload["kind"] == "barplot":
        ax.bar([b["level"] for b in bins], [b["count"] for b in bins], color=ACCENT)
        ax.set_ylabel("count")
    else:  # boxplot from the summary statistics
        st = payload["stats"]
        ax.bxp(
            [{
                "med": st["median"], "q1": st["q1"], "q3": st["q3"],
                "whislo": st["whisker_low"], "whishi": st["whisker_high"],
                "fliers": st["outliers"],
            }],
            showfliers=True,
        )
        ax.set_xticks([1], [payload["column"]])
    ax.set_xlabel(payload["column"])


def _distribution_rows(payload):
    if payload["kind"] == "boxplot":
        return [["stat", "value"]] + [[k, v] for k, v in payload["stats"].items()
                                      if k != "outliers"]
    if payload["kind"] == "barplot":
        return [["level", "count"]] + [[b["level"], b["count"]] for b in payload["bins"]]
    return [["lo", "hi", "count"]] + [[b["lo"], b["hi"], b["count"]] for b in payload["bins"]]


def _matrix_figure(ax, payload):
    arr = np.array(
        [[np.nan if v is None else v for v in row] for row in payload["values"]], dtype=float
    )
    im = ax.imshow(arr, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(payload["variables"])), payload["variables"], rotation=45, ha="right")
    ax.set_yticks(range(len(payload["variables"])), payload["variables"])
    ax.figure.colorbar(im, ax=ax, shrink=0.8)


def _matrix_rows(payload):
    head = [""] + list(payload["variables"])
    rows = [head]
    for var, row in zip(payload["variables"], payload["values"]):
        rows.append([var] + ["" if v is None else v for v in row])
    return rows


def _network_figure(ax, payload):
    nodes = payload["nodes"]
    angles = np.linspace(0.0, 2.0 * np.pi, len(nodes), endpoint=False)
    pos = {n: (np.cos(a), np.sin(a)) for n, a in zip(nodes, angles)}
    for e in payload["edges"]:
        (x1, y1), (x2, y2) = pos[e["a"]], pos[e["b"]]
        ax.plot([x1, x2], [y1, y2],
                color=ACCENT if e["weight"] >= 0 else NEGATIVE,
                linewidth=0.5 + 2.0 * abs(e["weight"]))
    for n, (x, y) in pos.items():
        ax.plot([x], [y], "o", color="#333")
        ax.annotate(n, (x, y), textcoords="offset points", xytext=(6, 4), fontsize=8)
    ax.set_axis_off()
    ax.set_title(f"|association| >= {payload['threshold']}")


def _network_rows(payload):
    return [["a", "b", "weight"]] + [[e["a"], e["b"], e["weight"]] for e in payload["edges"]]


def _data_profile_figure(ax, payload):
    pts = payload["points"]
    numeric = pts and "x" in pts[0]
    if payload.get("scatter") and numeric:
        ax.scatter([p["x"] for p in payload["scatter"]], [p["y"] for p in payload["scatter"]],
                   s=8, color="#bbb", alpha=0.6, label="sample")
    if numeric:
        ax.plot([p["x"] for p in pts], [p["mean"] for p in pts],
                "-o", color=NEGATIVE, label="bin mean")
        ax.legend()
    else:
        ax.bar([p["level"] for p in pts], [p["mean"] for p in pts], color=ACCENT)
    ax.set_xlabel(payload["variable"])
    ax.set_ylabel(f"mean {payload['target']}")


def _data_profile_rows(payload):
    pts = payload["points"]
    key = "x" if pts and "x" in pts[0] else "level"
    return [[key, "mean", "count"]] + [[p[key], p["mean"], p["count"]] for p in pts]


def _mosaic_figure(ax, payload):
    counts = np.array(payload["counts"], dtype=float)
    totals = counts.sum(axis=1, keepdims=True)
    widths = totals[:, 0] / counts.sum()
    lefts = np.concatenate([[0.0], np.cumsum(widths)[:-1]])
    cmap = plt.get_cmap("tab10")
    for j, level_b in enumerate(payload["levels_b"]):
        bottoms = counts[:, :j].sum(axis=1) / np.maximum(totals[:, 0], 1.0)
        heights = counts[:, j] / np.maximum(totals[:, 0], 1.0)
        ax.bar(lefts, heights, width=widths * 0.97, bottom=bottoms, align="edge",
               color=cmap(j % 10), label=level_b)
    ax.set_xticks(lefts + widths / 2.0, payload["levels_a"])
    ax.set_xlabel(payload["var_a"])
    ax.set_ylabel(f"share of {payload['var_b']}")
    ax.legend(fontsize=8)


def _mosaic_rows(payload):
    head = [f"{payload['var_a']}\\{payload['var_b']}"] + list(payload["levels_b"]) + ["total"]
    rows = [head]
    for lvl, row, marg in zip(payload["levels_a"], payload["counts"], payload["row_marginals"]):
        rows.append([lvl] + list(row) + [marg])
    rows.append(["total"] + list(payload["col_marginals"]) + [sum(payload["col_marginals"])])
    return rows


def _selection_rows(payload):
    return [["selected"], [payload["selected"]]]


def render_step_figure(symbol: str, payload: dict):
    """One matplotlib figure for a step payload; the caller owns the figure."""
    fig, ax = plt.subplots(figsize=FIG_SIZE, constrained_layout=True)
    if "contributions" in payload:
        _attribution_figure(ax, payload)
    elif "entries" in payload:
        _importance_figure(ax, payload)
    elif payload.get("method") == "shap_dependence":
        _dependence_figure(ax, payload)
    elif "grid" in payload and "values" in payload:
        _profile_figure(ax, payload)
    elif "bins" in payload:
        _distribution_figure(ax, payload)
    elif "variables" in payload and "values" in payload:
        _matrix_figure(ax, payload)
    elif "edges" in payload:
        _network_figure(ax, payload)
    elif "counts" in payload:
        _mosaic_figure(ax, payload)
    elif "points" in payload:
        _data_profile_figure(ax, payload)
    elif "selected" in payload:
        ax.text(0.5, 0.5, f"selected: {payload['selected']}", ha="center", va="center")
        ax.set_axis_off()
    else:
        raise ExportError(f"no figure renderer for step {symbol!r}")
    fig.suptitle(symbol.replace("_", " "))
    return fig


def step_rows(symbol: str, payload: dict) -> list[list]:
    """The payload flattened to CSV rows (header first)."""
    if "contributions" in payload:
        return _attribution_rows(payload)
    if "entries" in payload:
        return _importance_rows(payload)
    if payload.get("method") == "shap_dependence":
        return [["x", "phi"]] + [[p["x"], p["phi"]] for p in payload["points"]]
    if "grid" in payload and "values" in payload:
        return _profile_rows(payload)
    if "bins" in payload:
        return _distribution_rows(payload)
    if "variables" in payload and "values" in payload:
        return _matrix_rows(payload)
    if "edges" in payload:
        return _network_rows(payload)
    if "counts" in payload:
        return _mosaic_rows(payload)
    if "points" in payload:
        return _data_profile_rows(payload)
    if "selected" in payload:
        return _selection_rows(payload)
    raise ExportError(f"no table renderer for step {symbol!r}")


def write_report(bundle: dict, out_dir: str | Path, dpi: int = 120) -> list[Path]:
    """Figures and CSV tables for every step of a bundle; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    manifest = [["step", "symbol", "figure", "table"]]
    for i, step in enumerate(bundle["history"]):
        stem = f"{i:02d}_{step['symbol']}"
        fig = render_step_figure(step["symbol"], step["payload"])
        fig_path = out / f"{stem}.png"
        fig.savefig(fig_path, dpi=dpi)
        plt.close(fig)
        csv_path = out / f"{stem}.csv"
        with csv_path.open("w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(step_rows(step["symbol"], step["payload"]))
        manifest.append([i, step["symbol"], fig_path.name, csv_path.name])
        written.extend([fig_path, csv_path])
    index = out / "index.csv"
    with index.open("w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(manifest)
    written.append(index)
    return written
