"""Black-box prediction contract and the built-in desk-scale model families.

Two families cover the smooth and the piecewise-constant case:

* linear (identity or logistic link, refittable by least squares / IRLS),
* tree ensemble (mean- or sum-aggregated binary trees, not refittable).

Every explainer in the package talks to a model exclusively through
:meth:`ModelHandle.predict_columns`, so anything honoring that contract can
be analyzed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import CATEGORICAL, NUMERIC, Column, Dataset
from .errors import CapabilityError, DataError, ModelError

REGRESSION = "regression"
BINARY_CLASSIFICATION = "binary_classification"

IRLS_MAX_ITER = 100
IRLS_TOL = 1e-8

SPEC_VERSION_KEY = "model-spec"


@dataclass(frozen=True)
class SchemaField:
    id: str
    kind: str  # numeric | categorical
    levels: tuple[str, ...] = ()


def schema_from_dataset(d: Dataset) -> tuple[SchemaField, ...]:
    """Model input schema: every dataset column except the target."""
    fields = []
    for c in d.columns:
        if c.id == d.target:
            continue
        fields.append(SchemaField(id=c.id, kind=c.kind, levels=c.levels))
    return tuple(fields)


def _columns_from_rows(schema: Sequence[SchemaField], rows) -> dict[str, np.ndarray]:
    """Normalize rows (columnar mapping, row dicts, or row sequences) to columns."""
    if isinstance(rows, Mapping):
        out = {}
        n = None
        for f in schema:
            if f.id not in rows:
                raise ModelError(f"missing column {f.id!r} in prediction input")
            arr = np.asarray(rows[f.id], dtype=float if f.kind == NUMERIC else object)
            if n is None:
                n = len(arr)
            elif len(arr) != n:
                raise ModelError("prediction input columns have differing lengths")
            out[f.id] = arr
        return out
    rows = list(rows)
    if not rows:
        return {f.id: np.array([], dtype=float if f.kind == NUMERIC else object) for f in schema}
    if isinstance(rows[0], Mapping):
        return _columns_from_rows(schema, {f.id: [r[f.id] for r in rows] for f in schema})
    if len(rows[0]) != len(schema):
        raise ModelError(f"rows have {len(rows[0])} cells, schema has {len(schema)}")
    return _columns_from_rows(
        schema, {f.id: [r[i] for r in rows] for i, f in enumerate(schema)}
    )


class ModelHandle:
    """Deterministic prediction interface over schema-typed rows."""

    def __init__(self, id: str, task: str, schema: tuple[SchemaField, ...], refittable: bool):
        self.id = id
        self.task = task
        self.schema = schema
        self.refittable = refittable
        self._by_id = {f.id: f for f in schema}

    @property
    def variable_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.schema)

    def field(self, var: str) -> SchemaField:
        try:
            return self._by_id[var]
        except KeyError:
            raise ModelError(f"variable {var!r} not in model schema") from None

    def predict_columns(self, cols: Mapping[str, np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def predict_rows(self, rows) -> np.ndarray:
        return self.predict_columns(_columns_from_rows(self.schema, rows))

    def card(self) -> dict:
        return {
            "id": self.id,
            "task": self.task,
            "refittable": self.refittable,
            "schema": [
                {"id": f.id, "kind": f.kind, **({"levels": list(f.levels)} if f.levels else {})}
                for f in self.schema
            ],
        }


def predict_batch(m: ModelHandle, rows) -> np.ndarray:
    """Scores for a batch of rows; length equals the row count."""
    return m.predict_rows(rows)


class LinearModel(ModelHandle):
    """Affine score with identity or logistic link.

    Categorical variables carry one weight per level (reference levels get 0).
    """

    def __init__(self, schema, weights: dict, intercept: float, link: str, id: str = "linear"):
        task = REGRESSION if link == "identity" else BINARY_CLASSIFICATION
        super().__init__(id=id, task=task, schema=schema, refittable=True)
        self.weights = weights
        self.intercept = float(intercept)
        self.link = link

    def predict_columns(self, cols: Mapping[str, np.ndarray]) -> np.ndarray:
        n = len(next(iter(cols.values()))) if cols else 0
        score = np.full(n, self.intercept, dtype=float)
        for f in self.schema:
            w = self.weights[f.id]
            if f.kind == NUMERIC:
                score += w * np.asarray(cols[f.id], dtype=float)
            else:
                level_w = np.array([w.get(str(v), 0.0) for v in cols[f.id]])
                score += level_w
        if self.link == "logistic":
            return 1.0 / (1.0 + np.exp(-score))
        return score


class TreeEnsembleModel(ModelHandle):
    """Aggregated binary decision trees; numeric splits are `x <= t` to the left,
    categorical splits send members of the level set to the left."""

    def __init__(self, schema, trees: list[list[dict]], aggregation: str, id: str = "tree_ensemble"):
        super().__init__(id=id, task=REGRESSION, schema=schema, refittable=False)
        self.trees = trees
        self.aggregation = aggregation

    def _eval_tree(self, nodes: list[dict], cols: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        out = np.zeros(n)
        stack = [(0, np.arange(n))]
        while stack:
            idx, members = stack.pop()
            node = nodes[idx]
            if "value" in node:
                out[members] = float(node["value"])
                continue
            var = node["var"]
            vals = cols[var]
            if "threshold" in node:
                goes_left = np.asarray(vals, dtype=float)[members] <= float(node["threshold"])
            else:
                allowed = set(node["levels"])
                goes_left = np.array([str(v) in allowed for v in vals[members]], dtype=bool)
            stack.append((node["left"], members[goes_left]))
            stack.append((node["right"], members[~goes_left]))
        return out

    def predict_columns(self, cols: Mapping[str, np.ndarray]) -> np.ndarray:
        n = len(next(iter(cols.values()))) if cols else 0
        if n == 0:
            return np.array([])
        total = np.zeros(n)
        for nodes in self.trees:
            total += self._eval_tree(nodes, cols, n)
        if self.aggregation == "mean":
            total /= len(self.trees)
        return total


# ---------------------------------------------------------------------------
# spec loading


def load_model(spec: bytes | str | dict, schema: tuple[SchemaField, ...]) -> ModelHandle:
    """Instantiate a handle from a versioned JSON model spec."""
    if isinstance(spec, (bytes, str)):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as e:
            raise ModelError(f"model spec is not valid JSON: {e}") from None
    if spec.get(SPEC_VERSION_KEY) != 1:
        raise ModelError(f'model spec must declare "{SPEC_VERSION_KEY}": 1')
    mtype = spec.get("type")
    if mtype == "linear":
        return _load_linear(spec, schema)
    if mtype == "tree_ensemble":
        return _load_tree_ensemble(spec, schema)
    raise ModelError(f"unknown model type {spec.get('type')!r}")


def _load_linear(spec: dict, schema) -> LinearModel:
    link = spec.get("link", "identity")
    if link not in ("identity", "logistic"):
        raise ModelError(f"unknown link {link!r}")
    weights = spec.get("weights")
    if not isinstance(weights, dict):
        raise ModelError("linear spec needs a weights map")
    schema_ids = {f.id for f in schema}
    unknown = set(weights) - schema_ids
    if unknown:
        raise ModelError(f"weight(s) for unknown variable(s): {sorted(unknown)}")
    missing = schema_ids - set(weights)
    if missing:
        raise ModelError(f"missing weight(s) for variable(s): {sorted(missing)}")
    clean: dict = {}
    for f in schema:
        w = weights[f.id]
        if f.kind == NUMERIC:
            if isinstance(w, dict):
                raise ModelError(f"numeric variable {f.id!r} cannot take per-level weights")
            clean[f.id] = float(w)
        else:
            if not isinstance(w, dict):
                raise ModelError(f"categorical variable {f.id!r} needs per-level weights")
            bad = set(w) - set(f.levels)
            if bad:
                raise ModelError(f"weight(s) for unknown level(s) of {f.id!r}: {sorted(bad)}")
            clean[f.id] = {lvl: float(val) for lvl, val in w.items()}
    return LinearModel(
        schema=schema, weights=clean, intercept=float(spec.get("intercept", 0.0)), link=link
    )


def _validate_tree(nodes: list[dict], schema_by_id: dict) -> None:
    if not nodes:
        raise ModelError("tree has no nodes")
    seen: set[int] = set()
    stack = [0]
    while stack:
        idx = stack.pop()
        if not 0 <= idx < len(nodes):
            raise ModelError(f"tree child index {idx} out of range")
        if idx in seen:
            raise ModelError(f"tree node {idx} reachable twice (cycle or shared child)")
        seen.add(idx)
        node = nodes[idx]
        if "value" in node:
            continue
        var = node.get("var")
        if var not in schema_by_id:
            raise ModelError(f"tree split on unknown variable {var!r}")
        f = schema_by_id[var]
        if f.kind == NUMERIC:
            if "threshold" not in node:
                raise ModelError(f"numeric split on {var!r} needs a threshold")
        else:
            levels = node.get("levels")
            if not levels:
                raise ModelError(f"categorical split on {var!r} needs a level set")
            bad = set(levels) - set(f.levels)
            if bad:
                raise ModelError(f"split on unknown level(s) of {var!r}: {sorted(bad)}")
        if "left" not in node or "right" not in node:
            raise ModelError(f"internal tree node {idx} needs left and right children")
        stack.extend((node["left"], node["right"]))


def _load_tree_ensemble(spec: dict, schema) -> TreeEnsembleModel:
    aggregation = spec.get("aggregation", "mean")
    if aggregation not in ("mean", "sum"):
        raise ModelError(f"unknown aggregation {aggregation!r}")
    trees = spec.get("trees")
    if not trees:
        raise ModelError("tree ensemble needs at least one tree")
    schema_by_id = {f.id: f for f in schema}
    node_lists = []
    for t in trees:
        nodes = t.get("nodes") if isinstance(t, dict) else None
        if nodes is None:
            raise ModelError("each tree needs a nodes list")
        _validate_tree(nodes, schema_by_id)
        node_lists.append(nodes)
    return TreeEnsembleModel(schema=schema, trees=node_lists, aggregation=aggregation)


# ---------------------------------------------------------------------------
# losses

LOSS_KINDS = ("rmse", "cross_entropy", "one_minus_auc")
PROB_CLAMP = 1e-12


def default_loss(task: str) -> str:
    return "rmse" if task == REGRESSION else "one_minus_auc"


def loss(kind: str, predictions, targets) -> float:
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(targets, dtype=float)
    if len(p) != len(t) or len(p) == 0:
        raise DataError("loss needs equally long, non-empty prediction and target vectors")
    if kind == "rmse":
        return float(np.sqrt(np.mean((p - t) ** 2)))
    if kind == "cross_entropy":
        clipped = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
        return float(-np.mean(t * np.log(clipped) + (1.0 - t) * np.log(1.0 - clipped)))
    if kind == "one_minus_auc":
        pos = t == 1.0
        neg = t == 0.0
        if not pos.any() or not neg.any():
            raise DataError("AUC needs both classes present")
        from .data import _ranks  # tie-averaged ranks, shared convention

        r = _ranks(p)
        n_pos, n_neg = int(pos.sum()), int(neg.sum())
        auc = (float(np.sum(r[pos])) - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
        return float(1.0 - auc)
    raise DataError(f"unknown loss kind {kind!r}")


# ---------------------------------------------------------------------------
# refitting (LOCO support)


def _design_matrix(d: Dataset, fields: Sequence[SchemaField]) -> tuple[np.ndarray, list]:
    """Intercept + numeric columns + reference-coded level indicators."""
    n = d.n_rows
    cols: list[np.ndarray] = [np.ones(n)]
    layout: list = [("__intercept__", None)]
    for f in fields:
        col = d.column(f.id)
        if f.kind == NUMERIC:
            cols.append(np.asarray(col.values, dtype=float))
            layout.append((f.id, None))
        else:
            for lvl in f.levels[1:]:  # first level is the reference
                cols.append(np.array([1.0 if v == lvl else 0.0 for v in col.values]))
                layout.append((f.id, lvl))
    return np.column_stack(cols), layout


def _coeffs_to_weights(beta: np.ndarray, layout, fields) -> tuple[float, dict]:
    intercept = float(beta[0])
    weights: dict = {}
    for f in fields:
        if f.kind == NUMERIC:
            weights[f.id] = 0.0
        else:
            weights[f.id] = {lvl: 0.0 for lvl in f.levels}
    for b, (var, lvl) in zip(beta[1:], layout[1:]):
        if lvl is None:
            weights[var] = float(b)
        else:
            weights[var][lvl] = float(b)
    return intercept, weights


def _fit_ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return beta


def _fit_irls(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    beta = np.zeros(X.shape[1])
    for _ in range(IRLS_MAX_ITER):
        eta = X @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        z = eta + (y - mu) / w
        wx = X * w[:, None]
        new_beta, *_ = np.linalg.lstsq(wx.T @ X, wx.T @ z, rcond=None)
        if np.max(np.abs(new_beta - beta)) < IRLS_TOL:
            beta = new_beta
            break
        beta = new_beta
    return beta


def fit_linear(d: Dataset, link: str = "identity", id: str = "refit") -> LinearModel:
    """Least-squares (identity) or IRLS (logistic) fit on all predictors."""
    schema = schema_from_dataset(d)
    y = np.asarray(d.column(d.target).values, dtype=float)
    X, layout = _design_matrix(d, schema)
    beta = _fit_ols(X, y) if link == "identity" else _fit_irls(X, y)
    intercept, weights = _coeffs_to_weights(beta, layout, schema)
    return LinearModel(schema=schema, weights=weights, intercept=intercept, link=link, id=id)


def refit_without(m: ModelHandle, d: Dataset, dropped: str) -> ModelHandle:
    """Retrain the same family on all predictors except ``dropped``."""
    if not m.refittable:
        raise CapabilityError(
            f"model {m.id!r} is not refittable; leave-one-covariate-out unavailable"
        )
    m.field(dropped)  # raises on unknown variable
    assert isinstance(m, LinearModel)
    fields = tuple(f for f in m.schema if f.id != dropped)
    y = np.asarray(d.column(d.target).values, dtype=float)
    X, layout = _design_matrix(d, fields)
    beta = _fit_ols(X, y) if m.link == "identity" else _fit_irls(X, y)
    intercept, weights = _coeffs_to_weights(beta, layout, fields)
    return LinearModel(
        schema=fields,
        weights=weights,
        intercept=intercept,
        link=m.link,
        id=f"{m.id}-without-{dropped}",
    )
