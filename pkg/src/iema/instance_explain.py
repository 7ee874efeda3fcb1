"""Instance-level explanations: prediction profiles and attributions.

All methods see the model only through batched predictions. Coalition
values are marginal: v(S) is the dataset-mean prediction after overwriting
the variables in S with the instance's values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import CATEGORICAL, NUMERIC, Dataset, quantile
from .errors import ExplanationError
from .models import ModelHandle

EXACT_SHAP_MAX_P = 12
DEFAULT_GRID_SIZE = 101
DEFAULT_LIME_SAMPLES = 1000


def resolve_instance(d: Dataset, m: ModelHandle, instance) -> dict:
    """Normalize an instance reference (row index or explicit values) to a
    schema-ordered mapping."""
    if isinstance(instance, (int, np.integer)) and not isinstance(instance, bool):
        if not 0 <= instance < d.n_rows:
            raise ExplanationError(f"row index {instance} outside [0, {d.n_rows})")
        return {f.id: d.column(f.id).values[instance] for f in m.schema}
    if isinstance(instance, Mapping):
        out = {}
        for f in m.schema:
            if f.id not in instance:
                raise ExplanationError(f"instance is missing variable {f.id!r}")
            v = instance[f.id]
            if f.kind == NUMERIC:
                v = float(v)
                if not math.isfinite(v):
                    raise ExplanationError(f"non-finite value for {f.id!r}")
            else:
                v = str(v)
                if v not in f.levels:
                    raise ExplanationError(f"unknown level {v!r} for variable {f.id!r}")
            out[f.id] = v
        return out
    if isinstance(instance, Sequence) and not isinstance(instance, (str, bytes)):
        if len(instance) != len(m.schema):
            raise ExplanationError(
                f"instance has {len(instance)} values, schema needs {len(m.schema)}"
            )
        return resolve_instance(d, m, {f.id: v for f, v in zip(m.schema, instance)})
    raise ExplanationError(f"cannot interpret instance reference {instance!r}")


def _predictor_columns(d: Dataset, m: ModelHandle) -> dict[str, np.ndarray]:
    return {f.id: d.column(f.id).values for f in m.schema}


def predict_instance(m: ModelHandle, instance: Mapping) -> float:
    cols = {f.id: np.array([instance[f.id]], dtype=float if f.kind == NUMERIC else object)
            for f in m.schema}
    return float(m.predict_columns(cols)[0])


@dataclass(frozen=True)
class Profile:
    """Model response along one variable, anchored at the instance."""

    variable: str
    kind: str  # numeric | categorical
    grid: tuple
    values: tuple[float, ...]
    anchor: tuple | None = None  # (instance value, prediction at the instance)
    method: str = "ceteris_paribus"

    def to_payload(self) -> dict:
        grid = [float(z) for z in self.grid] if self.kind == NUMERIC else list(self.grid)
        payload = {
            "method": self.method,
            "variable": self.variable,
            "kind": self.kind,
            "grid": grid,
            "values": [float(v) for v in self.values],
        }
        if self.anchor is not None:
            x, fx = self.anchor
            payload["anchor"] = {
                "x": float(x) if self.kind == NUMERIC else str(x),
                "prediction": float(fx),
            }
        return payload


def quantile_grid(d: Dataset, variable: str, grid_size: int) -> np.ndarray:
    """Equidistant-quantile grid over a numeric column (duplicates removed)."""
    col = d.column(variable)
    values = np.asarray(col.values, dtype=float)
    return np.unique(quantile(values, np.linspace(0.0, 1.0, grid_size)))


def ceteris_paribus(
    m: ModelHandle,
    d: Dataset,
    instance,
    variable: str,
    grid_size: int = DEFAULT_GRID_SIZE,
    grid: Sequence[float] | None = None,
) -> Profile:
    """What-if profile: the prediction as one variable sweeps a grid.

    Numeric grids are equidistant quantiles of the variable's distribution
    with the instance's own value inserted; categorical grids are the level
    set. ``grid`` overrides the construction (used to align with aggregated
    profiles).
    """
    f = m.field(variable)
    x = resolve_instance(d, m, instance)
    fx = predict_instance(m, x)
    if f.kind == CATEGORICAL:
        levels = f.levels
        cols = {
            g.id: np.array(
                [x[g.id]] * len(levels), dtype=float if g.kind == NUMERIC else object
            )
            for g in m.schema
        }
        cols[variable] = np.array(list(levels), dtype=object)
        vals = m.predict_columns(cols)
        return Profile(
            variable=variable,
            kind=CATEGORICAL,
            grid=levels,
            values=tuple(float(v) for v in vals),
            anchor=(x[variable], fx),
        )
    if grid is not None:
        zs = np.asarray(list(grid), dtype=float)
    else:
        if grid_size < 2:
            raise ExplanationError(f"grid_size must be >= 2, got {grid_size}")
        zs = np.unique(np.append(quantile_grid(d, variable, grid_size), float(x[variable])))
    cols = {
        g.id: np.full(len(zs), x[g.id]) if g.kind == NUMERIC else np.array([x[g.id]] * len(zs), dtype=object)
        for g in m.schema
    }
    cols[variable] = zs
    vals = m.predict_columns(cols)
    return Profile(
        variable=variable,
        kind=NUMERIC,
        grid=tuple(float(z) for z in zs),
        values=tuple(float(v) for v in vals),
        anchor=(float(x[variable]), fx),
    )


# ---------------------------------------------------------------------------
# coalition machinery shared by the Shapley and break-down attributions


class CoalitionValues:
    """Caches v(S) = mean prediction with the coalition overwritten by the
    instance; coalitions are bitmasks over the schema order."""

    def __init__(self, m: ModelHandle, d: Dataset, instance: Mapping,
                 background_rows: int | None = None, seed: int = 0):
        self.m = m
        self.variables = m.variable_ids
        base = _predictor_columns(d, m)
        n = d.n_rows
        if background_rows is not None and background_rows < n:
            rng = np.random.default_rng(seed)
            take = np.sort(rng.choice(n, size=background_rows, replace=False))
            base = {k: v[take] for k, v in base.items()}
            n = background_rows
        self.n = n
        self.base = base
        self.instance = instance
        self._cache: dict[int, float] = {}

    def value(self, mask: int) -> float:
        got = self._cache.get(mask)
        if got is not None:
            return got
        cols = {}
        for i, var in enumerate(self.variables):
            if mask >> i & 1:
                f = self.m.field(var)
                if f.kind == NUMERIC:
                    cols[var] = np.full(self.n, float(self.instance[var]))
                else:
                    cols[var] = np.array([self.instance[var]] * self.n, dtype=object)
            else:
                cols[var] = self.base[var]
        val = float(np.mean(self.m.predict_columns(cols)))
        self._cache[mask] = val
        return val


@dataclass(frozen=True)
class Attribution:
    """Additive per-variable decomposition of one prediction."""

    method: str  # shap | breakdown | lime
    baseline: float
    contributions: tuple[tuple[str, float], ...]
    prediction: float
    uncertainty: dict[str, float] | None = None
    fidelity: float | None = None
    coefficients: dict | None = None

    def contribution(self, variable: str) -> float:
        for var, val in self.contributions:
            if var == variable:
                return val
        raise ExplanationError(f"no contribution for variable {variable!r}")

    def to_payload(self) -> dict:
        payload = {
            "method": self.method,
            "baseline": float(self.baseline),
            "prediction": float(self.prediction),
            "contributions": [
                {"variable": var, "value": float(val)} for var, val in self.contributions
            ],
        }
        if self.uncertainty is not None:
            payload["uncertainty"] = {k: float(v) for k, v in self.uncertainty.items()}
        if self.fidelity is not None:
            payload["fidelity"] = float(self.fidelity)
        if self.coefficients is not None:
            payload["coefficients"] = self.coefficients
        return payload


def shap_attribution(
    m: ModelHandle,
    d: Dataset,
    instance,
    mode: str = "exact",
    b_permutations: int = 200,
    seed: int = 0,
    background_rows: int | None = None,
) -> Attribution:
    """Shapley values of the marginal coalition game.

    Exact mode enumerates all coalitions (p <= 12); sampling mode averages
    marginal contributions over seeded random permutations and reports a
    per-variable standard deviation.
    """
    x = resolve_instance(d, m, instance)
    p = len(m.schema)
    oracle = CoalitionValues(m, d, x, background_rows=background_rows, seed=seed)
    baseline = oracle.value(0)
    fx = predict_instance(m, x)
    names = m.variable_ids

    if mode == "exact":
        if p > EXACT_SHAP_MAX_P:
            raise ExplanationError(
                f"exact mode enumerates 2^p coalitions; p={p} exceeds {EXACT_SHAP_MAX_P}"
            )
        values = [oracle.value(mask) for mask in range(1 << p)]
        fact = [math.factorial(k) for k in range(p + 1)]
        phi = np.zeros(p)
        for mask in range(1 << p):
            size = bin(mask).count("1")
            w = fact[size] * fact[p - size - 1] / fact[p]
            for j in range(p):
                if not mask >> j & 1:
                    phi[j] += w * (values[mask | (1 << j)] - values[mask])
        contributions = tuple((names[j], float(phi[j])) for j in range(p))
        return Attribution(
            method="shap", baseline=baseline, contributions=contributions, prediction=fx
        )

    if mode == "sampling":
        if b_permutations < 2:
            raise ExplanationError("sampling mode needs at least 2 permutations")
        rng = np.random.default_rng(seed)
        draws = np.zeros((b_permutations, p))
        for b in range(b_permutations):
            mask = 0
            prev = baseline
            for j in rng.permutation(p):
                mask |= 1 << int(j)
                cur = oracle.value(mask)
                draws[b, int(j)] = cur - prev
                prev = cur
        phi = draws.mean(axis=0)
        sd = draws.std(axis=0, ddof=1)
        contributions = tuple((names[j], float(phi[j])) for j in range(p))
        return Attribution(
            method="shap",
            baseline=baseline,
            contributions=contributions,
            prediction=fx,
            uncertainty={names[j]: float(sd[j]) for j in range(p)},
        )

    raise ExplanationError(f"unknown shap mode {mode!r}")


def breakdown_attribution(
    m: ModelHandle,
    d: Dataset,
    instance,
    order: Sequence[str] | None = None,
    background_rows: int | None = None,
    seed: int = 0,
) -> Attribution:
    """Sequential attribution: each variable contributes its marginal effect
    given the variables fixed before it.

    The default order is greedy: descending single-variable effect size,
    ties broken by schema order. The telescoping sum makes baseline plus
    contributions equal the prediction for any order.
    """
    x = resolve_instance(d, m, instance)
    names = m.variable_ids
    index = {v: i for i, v in enumerate(names)}
    if order is not None:
        order = tuple(order)
        if sorted(order) != sorted(names):
            raise ExplanationError(
                f"order must be a permutation of the schema variables {list(names)}"
            )
    oracle = CoalitionValues(m, d, x, background_rows=background_rows, seed=seed)
    baseline = oracle.value(0)
    fx = predict_instance(m, x)
    if order is None:
        singles = [(-abs(oracle.value(1 << i) - baseline), i) for i in range(len(names))]
        order = tuple(names[i] for _, i in sorted(singles))
    mask = 0
    prev = baseline
    contributions = []
    for var in order:
        mask |= 1 << index[var]
        cur = oracle.value(mask)
        contributions.append((var, float(cur - prev)))
        prev = cur
    return Attribution(
        method="breakdown", baseline=baseline, contributions=tuple(contributions), prediction=fx
    )


# ---------------------------------------------------------------------------
# local surrogate (weighted linear regression on perturbations)


def lime_attribution(
    m: ModelHandle,
    d: Dataset,
    instance,
    n_samples: int = DEFAULT_LIME_SAMPLES,
    kernel_width: float | None = None,
    top_k: int | None = None,
    seed: int = 0,
) -> Attribution:
    """Weighted linear surrogate around the instance.

    Perturbations resample each variable from its empirical marginal.
    Proximity combines Euclidean distance over standardized numerics with
    Hamming distance over categoricals. Contributions are surrogate
    coefficients times the centered instance features; the intercept is the
    baseline. No completeness guarantee.
    """
    x = resolve_instance(d, m, instance)
    p = len(m.schema)
    if n_samples < 10 * p:
        raise ExplanationError(f"n_samples must be >= 10*p = {10 * p}, got {n_samples}")
    if kernel_width is None:
        kernel_width = 0.75 * math.sqrt(p)
    if top_k is None:
        top_k = p
    if not 1 <= top_k <= p:
        raise ExplanationError(f"top_k must lie in [1, {p}], got {top_k}")

    rng = np.random.default_rng(seed)
    base = _predictor_columns(d, m)
    perturbed = {}
    for f in m.schema:
        source = base[f.id]
        perturbed[f.id] = source[rng.integers(0, len(source), size=n_samples)]

    if all(len(np.unique(col.astype(str))) == 1 for col in perturbed.values()):
        raise ExplanationError("degenerate design: all perturbations are identical")

    y = m.predict_columns(perturbed)

    # centered/standardized feature blocks, one per variable
    blocks: list[np.ndarray] = []
    instance_feats: list[np.ndarray] = []
    layout: list[tuple[str, str | None, float]] = []  # (var, level, scale)
    sq_dist = np.zeros(n_samples)
    hamming = np.zeros(n_samples)
    for f in m.schema:
        if f.kind == NUMERIC:
            col = np.asarray(base[f.id], dtype=float)
            mu, sd = float(col.mean()), float(col.std())
            pert = np.asarray(perturbed[f.id], dtype=float)
            if sd == 0.0:
                z = np.zeros(n_samples)
                zi = 0.0
            else:
                z = (pert - mu) / sd
                zi = (float(x[f.id]) - mu) / sd
            blocks.append(z[:, None])
            instance_feats.append(np.array([zi]))
            layout.append((f.id, None, sd))
            sq_dist += (z - zi) ** 2
        else:
            vals = perturbed[f.id].astype(str)
            freqs = {lvl: float(np.mean(base[f.id].astype(str) == lvl)) for lvl in f.levels}
            ind = np.column_stack([(vals == lvl).astype(float) - freqs[lvl] for lvl in f.levels])
            inst = np.array([(1.0 if x[f.id] == lvl else 0.0) - freqs[lvl] for lvl in f.levels])
            blocks.append(ind)
            instance_feats.append(inst)
            for lvl in f.levels:
                layout.append((f.id, lvl, 1.0))
            hamming += (vals != x[f.id]).astype(float)
    dist = np.sqrt(sq_dist) + hamming
    weights = np.exp(-(dist**2) / kernel_width**2)

    X = np.hstack(blocks)
    inst_row = np.concatenate(instance_feats)

    def weighted_fit(design: np.ndarray) -> np.ndarray:
        sw = np.sqrt(weights)
        A = np.column_stack([np.ones(n_samples), design]) * sw[:, None]
        beta, *_ = np.linalg.lstsq(A, y * sw, rcond=None)
        return beta

    keep_vars = list(m.variable_ids)
    if top_k < p:
        scores = {}
        col_idx = 0
        for f in m.schema:
            width = 1 if f.kind == NUMERIC else len(f.levels)
            cols = X[:, col_idx : col_idx + width]
            scores[f.id] = max(
                abs(_weighted_corr(cols[:, i], y, weights)) for i in range(width)
            )
            col_idx += width
        keep_vars = sorted(scores, key=lambda v: (-scores[v], m.variable_ids.index(v)))[:top_k]
        keep_vars = [v for v in m.variable_ids if v in keep_vars]

    keep_cols = [i for i, (var, _, _) in enumerate(layout) if var in keep_vars]
    beta = weighted_fit(X[:, keep_cols])
    intercept = float(beta[0])
    coef_by_col = dict(zip(keep_cols, beta[1:]))

    fitted = intercept + X[:, keep_cols] @ beta[1:]
    fidelity = _weighted_r2(y, fitted, weights)

    contributions = []
    coefficients: dict = {}
    for f in m.schema:
        cols = [i for i, (var, _, _) in enumerate(layout) if var == f.id]
        total = 0.0
        for i in cols:
            total += float(coef_by_col.get(i, 0.0)) * float(inst_row[i])
        contributions.append((f.id, total))
        if f.kind == NUMERIC:
            i = cols[0]
            b = float(coef_by_col.get(i, 0.0))
            scale = layout[i][2]
            coefficients[f.id] = b / scale if scale else 0.0
        else:
            coefficients[f.id] = {
                layout[i][1]: float(coef_by_col.get(i, 0.0)) for i in cols
            }

    return Attribution(
        method="lime",
        baseline=intercept,
        contributions=tuple(contributions),
        prediction=predict_instance(m, x),
        fidelity=fidelity,
        coefficients=coefficients,
    )


def _weighted_corr(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    wsum = w.sum()
    am, bm = (w * a).sum() / wsum, (w * b).sum() / wsum
    cov = (w * (a - am) * (b - bm)).sum()
    va = (w * (a - am) ** 2).sum()
    vb = (w * (b - bm) ** 2).sum()
    if va == 0.0 or vb == 0.0:
        return 0.0
    return float(cov / math.sqrt(va * vb))


def _weighted_r2(y: np.ndarray, fitted: np.ndarray, w: np.ndarray) -> float:
    ybar = (w * y).sum() / w.sum()
    total = (w * (y - ybar) ** 2).sum()
    if total == 0.0:
        return 1.0  # zero-variance response: the surrogate is trivially faithful
    resid = (w * (y - fitted) ** 2).sum()
    return float(np.clip(1.0 - resid / total, 0.0, 1.0))
