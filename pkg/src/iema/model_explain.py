"""Model-level explanations: aggregated profiles and variable importances."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, NUMERIC, Dataset, quantile
from .errors import ExplanationError
from .instance_explain import (
    DEFAULT_GRID_SIZE,
    ceteris_paribus,
    quantile_grid,
    shap_attribution,
)
from .models import ModelHandle, loss as compute_loss, refit_without

DEFAULT_ALE_BINS = 10
DEFAULT_PERMUTATION_REPEATS = 10


@dataclass(frozen=True)
class ModelProfile:
    """Aggregated response along one variable (curve or point cloud)."""

    method: str  # pdp | ale | shap_dependence
    variable: str
    kind: str
    grid: tuple = ()
    values: tuple[float, ...] = ()
    points: tuple[tuple[float, float], ...] = ()  # shap_dependence cloud
    bin_counts: tuple[int, ...] = ()  # ale only

    def to_payload(self) -> dict:
        payload: dict = {"method": self.method, "variable": self.variable, "kind": self.kind}
        if self.method == "shap_dependence":
            payload["points"] = [
                {"x": x if isinstance(x, str) else float(x), "phi": float(v)}
                for x, v in self.points
            ]
        else:
            payload["grid"] = [
                z if isinstance(z, str) else float(z) for z in self.grid
            ]
            payload["values"] = [float(v) for v in self.values]
            if self.bin_counts:
                payload["bin_counts"] = [int(c) for c in self.bin_counts]
        return payload


def _instance_set(d: Dataset, instance_cap: int | None, seed: int) -> np.ndarray:
    n = d.n_rows
    if instance_cap is None or instance_cap >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=instance_cap, replace=False))


def partial_dependence(
    m: ModelHandle,
    d: Dataset,
    variable: str,
    grid_size: int = DEFAULT_GRID_SIZE,
    instance_cap: int | None = None,
    seed: int = 0,
) -> ModelProfile:
    """Mean of the per-instance what-if profiles on a shared quantile grid."""
    f = m.field(variable)
    rows = _instance_set(d, instance_cap, seed)
    if f.kind == CATEGORICAL:
        grid: tuple = f.levels
        shared = None
    else:
        if grid_size < 2:
            raise ExplanationError(f"grid_size must be >= 2, got {grid_size}")
        shared = quantile_grid(d, variable, grid_size)
        grid = tuple(float(z) for z in shared)
    stack = np.array(
        [
            ceteris_paribus(m, d, int(i), variable, grid=shared).values
            for i in rows
        ]
    )
    values = np.mean(stack, axis=0)
    return ModelProfile(
        method="pdp",
        variable=variable,
        kind=f.kind,
        grid=grid,
        values=tuple(float(v) for v in values),
    )


def accumulated_local_effects(
    m: ModelHandle, d: Dataset, variable: str, k_bins: int = DEFAULT_ALE_BINS
) -> ModelProfile:
    """First-order accumulated local effects over quantile bins.

    Per bin, rows falling inside contribute the prediction difference between
    the bin's edges; partial sums accumulate along the grid and the profile is
    centered by the data-frequency-weighted mean (each row weighted at its
    bin's upper edge). Empty bins merge into their upper neighbor.
    """
    f = m.field(variable)
    if f.kind != NUMERIC:
        raise ExplanationError("accumulated local effects require a numeric variable")
    if k_bins < 2:
        raise ExplanationError(f"k_bins must be >= 2, got {k_bins}")
    x = np.asarray(d.column(variable).values, dtype=float)
    if len(np.unique(x)) < 2:
        raise ExplanationError(f"variable {variable!r} has fewer than 2 distinct values")

    edges = np.unique(quantile(x, np.linspace(0.0, 1.0, k_bins + 1)))
    while True:
        which = np.clip(np.searchsorted(edges, x, side="left") - 1, 0, len(edges) - 2)
        counts = np.bincount(which, minlength=len(edges) - 1)
        empty = np.flatnonzero(counts == 0)
        if len(empty) == 0:
            break
        edges = np.delete(edges, empty[0] + 1)  # merge into the upper neighbor

    cols = {g.id: d.column(g.id).values for g in m.schema}
    lower = dict(cols)
    upper = dict(cols)
    lower[variable] = edges[which]
    upper[variable] = edges[which + 1]
    diffs = m.predict_columns(upper) - m.predict_columns(lower)

    k = len(edges) - 1
    effects = np.array([diffs[which == b].mean() for b in range(k)])
    accumulated = np.concatenate([[0.0], np.cumsum(effects)])
    center = float(np.sum(counts * accumulated[1:]) / len(x))
    centered = accumulated - center
    return ModelProfile(
        method="ale",
        variable=variable,
        kind=NUMERIC,
        grid=tuple(float(e) for e in edges),
        values=tuple(float(v) for v in centered),
        bin_counts=tuple(int(c) for c in counts),
    )


def shap_dependence(
    m: ModelHandle,
    d: Dataset,
    variable: str,
    mode: str = "exact",
    b_permutations: int = 200,
    seed: int = 0,
    instance_cap: int | None = None,
    background_rows: int | None = None,
) -> ModelProfile:
    """One (variable value, Shapley value) point per evaluated instance.

    Sampling mode seeds instance i with ``seed + i`` so independently computed
    attributions reproduce the cloud exactly.
    """
    f = m.field(variable)
    rows = _instance_set(d, instance_cap, seed)
    col = d.column(variable).values
    points = []
    for i in rows:
        attr = shap_attribution(
            m,
            d,
            int(i),
            mode=mode,
            b_permutations=b_permutations,
            seed=seed + int(i),
            background_rows=background_rows,
        )
        xv = col[i]
        points.append((float(xv) if f.kind == NUMERIC else str(xv), attr.contribution(variable)))
    return ModelProfile(
        method="shap_dependence", variable=variable, kind=f.kind, points=tuple(points)
    )


@dataclass(frozen=True)
class ImportanceResult:
    """Per-variable importance scores with their reference level."""

    method: str  # permutation | loco | shap_importance
    entries: tuple[tuple[str, float, float | None], ...]  # (variable, estimate, spread)
    baseline_loss: float | None = None
    baseline_value: float | None = None
    loss_kind: str | None = None
    repeats: dict[str, tuple[float, ...]] | None = None  # permuted losses per repeat

    def estimate(self, variable: str) -> float:
        for var, est, _ in self.entries:
            if var == variable:
                return est
        raise ExplanationError(f"no importance entry for variable {variable!r}")

    def to_payload(self) -> dict:
        payload: dict = {
            "method": self.method,
            "entries": [
                {
                    "variable": var,
                    "estimate": float(est),
                    **({"spread": float(spread)} if spread is not None else {}),
                }
                for var, est, spread in self.entries
            ],
        }
        if self.baseline_loss is not None:
            payload["baseline_loss"] = float(self.baseline_loss)
        if self.baseline_value is not None:
            payload["baseline_value"] = float(self.baseline_value)
        if self.loss_kind is not None:
            payload["loss"] = self.loss_kind
        if self.repeats is not None:
            payload["repeats"] = {k: [float(x) for x in v] for k, v in self.repeats.items()}
        return payload


def shap_importance(
    m: ModelHandle,
    d: Dataset,
    mode: str = "exact",
    b_permutations: int = 200,
    seed: int = 0,
    instance_cap: int | None = None,
    background_rows: int | None = None,
) -> ImportanceResult:
    """Mean absolute Shapley attribution per variable over the dataset."""
    rows = _instance_set(d, instance_cap, seed)
    names = m.variable_ids
    abs_sum = np.zeros(len(names))
    sd_sum = np.zeros(len(names))
    baseline = None
    for i in rows:
        attr = shap_attribution(
            m,
            d,
            int(i),
            mode=mode,
            b_permutations=b_permutations,
            seed=seed + int(i),
            background_rows=background_rows,
        )
        if baseline is None:
            baseline = attr.baseline
        abs_sum += np.abs([val for _, val in attr.contributions])
        if attr.uncertainty is not None:
            sd_sum += [attr.uncertainty[v] for v in names]
    means = abs_sum / len(rows)
    spreads = sd_sum / len(rows) if mode == "sampling" else None
    entries = tuple(
        (names[j], float(means[j]), float(spreads[j]) if spreads is not None else None)
        for j in range(len(names))
    )
    return ImportanceResult(method="shap_importance", entries=entries, baseline_value=baseline)


def _column_rng(seed: int, repeat: int, column_id: str) -> np.random.Generator:
    # keyed by column id, not position: importances ignore schema order
    return np.random.default_rng([seed, repeat, zlib.crc32(column_id.encode("utf-8"))])


def permutation_importance(
    m: ModelHandle,
    d: Dataset,
    loss_kind: str,
    b_repeats: int = DEFAULT_PERMUTATION_REPEATS,
    seed: int = 0,
) -> ImportanceResult:
    """Loss increase after permuting one column, averaged over seeded repeats."""
    if b_repeats < 1:
        raise ExplanationError(f"b_repeats must be >= 1, got {b_repeats}")
    y = np.asarray(d.column(d.target).values, dtype=float)
    cols = {f.id: d.column(f.id).values for f in m.schema}
    baseline = compute_loss(loss_kind, m.predict_columns(cols), y)
    entries = []
    repeats: dict[str, tuple[float, ...]] = {}
    for f in m.schema:
        losses = []
        for b in range(b_repeats):
            rng = _column_rng(seed, b, f.id)
            shuffled = dict(cols)
            shuffled[f.id] = cols[f.id][rng.permutation(len(y))]
            losses.append(compute_loss(loss_kind, m.predict_columns(shuffled), y))
        arr = np.array(losses)
        spread = float(arr.std(ddof=1)) if b_repeats > 1 else 0.0
        entries.append((f.id, float(arr.mean() - baseline), spread))
        repeats[f.id] = tuple(float(v) for v in arr)
    return ImportanceResult(
        method="permutation",
        entries=tuple(entries),
        baseline_loss=baseline,
        loss_kind=loss_kind,
        repeats=repeats,
    )


def loco_importance(m: ModelHandle, d: Dataset, loss_kind: str) -> ImportanceResult:
    """Leave-one-covariate-out: loss change after refitting without a column."""
    y = np.asarray(d.column(d.target).values, dtype=float)
    cols = {f.id: d.column(f.id).values for f in m.schema}
    baseline = compute_loss(loss_kind, m.predict_columns(cols), y)
    entries = []
    for f in m.schema:
        reduced = refit_without(m, d, f.id)
        if reduced.schema:
            preds = reduced.predict_columns({g.id: cols[g.id] for g in reduced.schema})
        else:  # intercept-only model: the input carries no row count
            preds = np.full(len(y), reduced.intercept)
        refit_loss = compute_loss(loss_kind, preds, y)
        entries.append((f.id, float(refit_loss - baseline), None))
    return ImportanceResult(
        method="loco", entries=tuple(entries), baseline_loss=baseline, loss_kind=loss_kind
    )
