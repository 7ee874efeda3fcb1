"""Tabular datasets and data-level explanations.

A :class:`Dataset` is an immutable, fully typed table with a designated
target column. All data-level explanations (distribution summaries,
correlation matrices and networks, binned target profiles, contingency
tables) are pure functions over it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

HISTOGRAM_MAX_BINS = 50
HISTOGRAM_FALLBACK_BINS = 10
SCATTER_SAMPLE_CAP = 500
DEFAULT_NETWORK_THRESHOLD = 0.3


@dataclass(frozen=True)
class Column:
    """One typed column; values are a read-only numpy array of length n_rows."""

    id: str
    kind: str  # NUMERIC or CATEGORICAL
    values: np.ndarray
    levels: tuple[str, ...] = ()  # sorted, fixed at construction (categorical only)

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"unknown column kind {self.kind!r} for column {self.id!r}")
        if self.kind == NUMERIC:
            arr = np.asarray(self.values, dtype=float)
            if arr.size and not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite value in numeric column {self.id!r}")
        else:
            arr = np.asarray([str(v) for v in self.values], dtype=object)
            levels = self.levels or tuple(sorted(set(arr.tolist())))
            if not levels:
                raise DataError(f"categorical column {self.id!r} has an empty level set")
            unknown = set(arr.tolist()) - set(levels)
            if unknown:
                raise DataError(
                    f"value(s) {sorted(unknown)} outside the level set of column {self.id!r}"
                )
            object.__setattr__(self, "levels", levels)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Dataset:
    """Immutable table with unique column ids and a designated target."""

    name: str
    columns: tuple[Column, ...]
    target: str

    def __post_init__(self):
        ids = [c.id for c in self.columns]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate column id(s): {dupes}")
        if self.target not in ids:
            raise DataError(f"target column {self.target!r} not in dataset")
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise DataError(f"columns have differing lengths: {sorted(lengths)}")
        if not self.columns or len(self.columns[0]) < 2:
            raise DataError("dataset needs at least 2 rows")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0])

    @property
    def column_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.columns)

    @property
    def predictor_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.columns if c.id != self.target)

    def column(self, column_id: str) -> Column:
        for c in self.columns:
            if c.id == column_id:
                return c
        raise DataError(f"unknown column {column_id!r}")

    def summary(self) -> dict:
        """Compact JSON-ready description used by bundles and the HTTP API."""
        cols = []
        for c in self.columns:
            entry: dict = {"id": c.id, "kind": c.kind}
            if c.kind == NUMERIC:
                entry.update(
                    min=float(np.min(c.values)),
                    max=float(np.max(c.values)),
                    mean=float(np.mean(c.values)),
                )
            else:
                entry["levels"] = list(c.levels)
            cols.append(entry)
        return {
            "name": self.name,
            "n_rows": self.n_rows,
            "target": self.target,
            "columns": cols,
        }


def load_dataset(
    source: bytes | str,
    target: str,
    types: Mapping[str, str] | None = None,
    name: str = "dataset",
) -> Dataset:
    """Parse an RFC-4180 style CSV (header row mandatory) into a Dataset.

    Column kinds are inferred (every cell parseable as a number -> numeric,
    otherwise categorical) unless overridden through ``types``. Rows with a
    missing cell anywhere are rejected: complete data is assumed downstream.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"duplicate header name(s): {dupes}")
    if target not in header:
        raise DataError(f"unknown target {target!r}; header has {header}")

    rows = []
    for idx, row in enumerate(reader):
        if not row or (len(row) == 1 and row[0] == ""):
            continue  # ignore trailing blank lines
        if len(row) != len(header):
            raise DataError(f"row {idx} has {len(row)} cells, expected {len(header)}")
        rows.append(row)
    if not rows:
        raise DataError("empty dataset: no data rows")

    cells = list(zip(*rows))  # column-major
    target_pos = header.index(target)
    missing_target = [i for i, v in enumerate(cells[target_pos]) if v.strip() == ""]
    if missing_target:
        raise DataError(f"missing target value in row(s) {missing_target}")
    for pos, col_id in enumerate(header):
        missing = [i for i, v in enumerate(cells[pos]) if v.strip() == ""]
        if missing:
            raise DataError(f"missing value(s) in column {col_id!r}, row(s) {missing}")

    types = dict(types or {})
    unknown = set(types) - set(header)
    if unknown:
        raise DataError(f"type override(s) for unknown column(s): {sorted(unknown)}")

    columns = []
    for pos, col_id in enumerate(header):
        raw = [v.strip() for v in cells[pos]]
        kind = types.get(col_id)
        if kind is None:
            kind = NUMERIC if all(_parses_as_number(v) for v in raw) else CATEGORICAL
        elif kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"invalid type override {kind!r} for column {col_id!r}")
        if kind == NUMERIC:
            bad = [i for i, v in enumerate(raw) if not _parses_as_number(v)]
            if bad:
                raise DataError(
                    f"column {col_id!r} declared numeric but row(s) {bad} do not parse"
                )
            values = np.array([float(v) for v in raw])
        else:
            values = np.array(raw, dtype=object)
        columns.append(Column(id=col_id, kind=kind, values=values))
    return Dataset(name=name, columns=tuple(columns), target=target)


def _parses_as_number(s: str) -> bool:
    try:
        return math.isfinite(float(s))
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# distribution summaries


@dataclass(frozen=True)
class DistributionSummary:
    column: str
    kind: str  # histogram | boxplot | barplot
    bins_or_levels: tuple[tuple, ...]  # ((lo, hi), count) or (level, count)
    stats: dict | None = None

    def to_payload(self) -> dict:
        bins = []
        for label, count in self.bins_or_levels:
            if isinstance(label, tuple):
                bins.append({"lo": float(label[0]), "hi": float(label[1]), "count": int(count)})
            else:
                bins.append({"level": str(label), "count": int(count)})
        return {
            "column": self.column,
            "kind": self.kind,
            "bins": bins,
            "stats": self.stats,
        }


def quantile(values: np.ndarray, q) -> np.ndarray:
    """Linear-interpolation quantiles, the single rule used package-wide."""
    return np.quantile(np.asarray(values, dtype=float), q)


def _numeric_stats(v: np.ndarray) -> dict:
    q1, med, q3 = quantile(v, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = v[(v < lo_fence) | (v > hi_fence)]
    return {
        "min": float(np.min(v)),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(np.max(v)),
        "mean": float(np.mean(v)),
        "whisker_low": float(np.min(inside)),
        "whisker_high": float(np.max(inside)),
        "outliers": [float(x) for x in sorted(outliers)],
    }


def freedman_diaconis_bins(v: np.ndarray) -> int:
    """Bin count by the Freedman-Diaconis rule, clamped to [1, 50]."""
    lo, hi = float(np.min(v)), float(np.max(v))
    if hi == lo:
        return 1
    q1, q3 = quantile(v, [0.25, 0.75])
    iqr = float(q3 - q1)
    if iqr == 0.0:
        return HISTOGRAM_FALLBACK_BINS
    width = 2.0 * iqr / len(v) ** (1.0 / 3.0)
    return int(min(HISTOGRAM_MAX_BINS, max(1, math.ceil((hi - lo) / width))))


def distribution_summary(d: Dataset, column: str, kind: str) -> DistributionSummary:
    """Histogram / boxplot for numeric columns, barplot for categorical."""
    col = d.column(column)
    if kind in ("histogram", "boxplot") and col.kind != NUMERIC:
        raise DataError(f"{kind} requires a numeric column, {column!r} is categorical")
    if kind == "barplot" and col.kind != CATEGORICAL:
        raise DataError(f"barplot requires a categorical column, {column!r} is numeric")

    if kind == "histogram":
        v = np.asarray(col.values, dtype=float)
        n_bins = freedman_diaconis_bins(v)
        lo, hi = float(np.min(v)), float(np.max(v))
        if lo == hi:
            return DistributionSummary(column, kind, (((lo, hi), len(v)),), _numeric_stats(v))
        edges = np.linspace(lo, hi, n_bins + 1)
        counts, _ = np.histogram(v, bins=edges)
        bins = tuple(
            ((float(edges[i]), float(edges[i + 1])), int(counts[i])) for i in range(n_bins)
        )
        return DistributionSummary(column, kind, bins, _numeric_stats(v))

    if kind == "boxplot":
        v = np.asarray(col.values, dtype=float)
        return DistributionSummary(column, kind, (), _numeric_stats(v))

    if kind == "barplot":
        vals = col.values.tolist()
        bins = tuple((lvl, vals.count(lvl)) for lvl in col.levels)
        return DistributionSummary(column, kind, bins, None)

    raise DataError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# correlation


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric matrix over all columns; None marks undefined entries."""

    variables: tuple[str, ...]
    values: tuple[tuple, ...]  # float or None
    methods: tuple[tuple[str, ...], ...]

    def entry(self, a: str, b: str):
        i, j = self.variables.index(a), self.variables.index(b)
        return self.values[i][j]

    def to_payload(self) -> dict:
        return {
            "variables": list(self.variables),
            "values": [list(row) for row in self.values],
            "methods": [list(row) for row in self.methods],
        }


def _pearson(x: np.ndarray, y: np.ndarray):
    xd, yd = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(np.sum(xd * xd)), np.sqrt(np.sum(yd * yd))
    if sx == 0.0 or sy == 0.0:
        return None
    return float(np.clip(np.sum(xd * yd) / (sx * sy), -1.0, 1.0))


def _ranks(x: np.ndarray) -> np.ndarray:
    """Average ranks (ties share the mean of their positions)."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _spearman(x: np.ndarray, y: np.ndarray):
    return _pearson(_ranks(x), _ranks(y))


def _cramers_v(a: Sequence[str], b: Sequence[str], levels_a, levels_b):
    n = len(a)
    table = np.zeros((len(levels_a), len(levels_b)))
    ia = {l: i for i, l in enumerate(levels_a)}
    ib = {l: i for i, l in enumerate(levels_b)}
    for va, vb in zip(a, b):
        table[ia[va], ib[vb]] += 1
    k = min(len(levels_a) - 1, len(levels_b) - 1)
    if k == 0:
        return None
    row = table.sum(axis=1, keepdims=True)
    col = table.sum(axis=0, keepdims=True)
    expected = row @ col / n
    mask = expected > 0
    chi2 = float(np.sum((table[mask] - expected[mask]) ** 2 / expected[mask]))
    return float(np.clip(math.sqrt(chi2 / (n * k)), 0.0, 1.0))


def _eta_squared(numeric: np.ndarray, groups: Sequence[str]):
    """Correlation ratio: share of numeric variance explained by group means."""
    total = float(np.sum((numeric - numeric.mean()) ** 2))
    if total == 0.0:
        return None
    grand = numeric.mean()
    between = 0.0
    for g in set(groups):
        sub = numeric[np.array([v == g for v in groups])]
        between += len(sub) * (sub.mean() - grand) ** 2
    return float(np.clip(between / total, 0.0, 1.0))


def pairwise_correlation(d: Dataset, method: str = "pearson") -> CorrelationMatrix:
    """All-pairs association over every column of the dataset.

    numeric-numeric uses ``method`` (pearson or spearman), categorical pairs
    use Cramer's V, mixed pairs use the correlation ratio (eta squared).
    Undefined entries (zero variance, single level) stay None rather than 0.
    """
    if method not in ("pearson", "spearman"):
        raise DataError(f"unknown correlation method {method!r}")
    cols = d.columns
    if len(cols) < 2:
        raise DataError("pairwise correlation needs at least 2 variables")
    p = len(cols)
    values = [[None] * p for _ in range(p)]
    methods = [[""] * p for _ in range(p)]
    numeric_fn = _pearson if method == "pearson" else _spearman
    for i in range(p):
        for j in range(i, p):
            a, b = cols[i], cols[j]
            if a.kind == NUMERIC and b.kind == NUMERIC:
                m = method
                val = numeric_fn(
                    np.asarray(a.values, dtype=float), np.asarray(b.values, dtype=float)
                )
            elif a.kind == CATEGORICAL and b.kind == CATEGORICAL:
                m = "cramers_v"
                val = _cramers_v(a.values.tolist(), b.values.tolist(), a.levels, b.levels)
            else:
                m = "eta_squared"
                num, cat = (a, b) if a.kind == NUMERIC else (b, a)
                val = _eta_squared(np.asarray(num.values, dtype=float), cat.values.tolist())
            values[i][j] = values[j][i] = val
            methods[i][j] = methods[j][i] = m
    return CorrelationMatrix(
        variables=tuple(c.id for c in cols),
        values=tuple(tuple(row) for row in values),
        methods=tuple(tuple(row) for row in methods),
    )


@dataclass(frozen=True)
class CorrelationNetwork:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    threshold: float

    def to_payload(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [{"a": a, "b": b, "weight": w} for a, b, w in self.edges],
            "threshold": self.threshold,
        }


def correlation_network(
    d: Dataset, threshold: float = DEFAULT_NETWORK_THRESHOLD, method: str = "pearson"
) -> CorrelationNetwork:
    """Variables as nodes, defined associations with |value| >= threshold as edges."""
    if not 0.0 <= threshold <= 1.0:
        raise DataError(f"threshold must lie in [0, 1], got {threshold}")
    matrix = pairwise_correlation(d, method=method)
    edges = []
    names = matrix.variables
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            val = matrix.values[i][j]
            if val is not None and abs(val) >= threshold:
                edges.append((names[i], names[j], float(val)))
    return CorrelationNetwork(nodes=names, edges=tuple(edges), threshold=float(threshold))


# ---------------------------------------------------------------------------
# binned target profile and contingency table


@dataclass(frozen=True)
class DataProfile:
    """Mean of the target per bin of one variable, plus a scatter sample."""

    variable: str
    target: str
    points: tuple[tuple, ...]  # (x-or-level, mean target, count)
    scatter: tuple[tuple, ...]  # sampled (x, target) pairs

    def to_payload(self) -> dict:
        pts = []
        for x, mean, count in self.points:
            key = "level" if isinstance(x, str) else "x"
            pts.append({key: x if isinstance(x, str) else float(x), "mean": float(mean), "count": int(count)})
        return {
            "variable": self.variable,
            "target": self.target,
            "points": pts,
            "scatter": [
                {"x": x if isinstance(x, str) else float(x), "y": float(y)} for x, y in self.scatter
            ],
        }


def data_profile(d: Dataset, variable: str, bins: int = 10, seed: int = 0) -> DataProfile:
    """Binned mean of the target as a function of one variable.

    Numeric variables are cut at equispaced quantile edges (one curve point
    per non-empty bin, located at the mean of the member values); categorical
    variables get one point per level. A seeded scatter sample of at most 500
    rows rides along for display.
    """
    col = d.column(variable)
    target = d.column(d.target)
    if target.kind != NUMERIC:
        raise DataError("data profile requires a numeric target")
    y = np.asarray(target.values, dtype=float)

    points = []
    if col.kind == NUMERIC:
        if bins < 1:
            raise DataError(f"bins must be >= 1, got {bins}")
        x = np.asarray(col.values, dtype=float)
        edges = np.unique(quantile(x, np.linspace(0.0, 1.0, bins + 1)))
        if len(edges) == 1:  # constant variable: a single degenerate bin
            points.append((float(x.mean()), float(y.mean()), len(x)))
        else:
            which = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
            for b in range(len(edges) - 1):
                members = which == b
                if not members.any():
                    continue
                points.append(
                    (float(x[members].mean()), float(y[members].mean()), int(members.sum()))
                )
    else:
        vals = col.values.tolist()
        for lvl in col.levels:
            members = np.array([v == lvl for v in vals])
            if not members.any():
                continue
            points.append((lvl, float(y[members].mean()), int(members.sum())))

    rng = np.random.default_rng(seed)
    n = d.n_rows
    take = np.sort(rng.choice(n, size=min(n, SCATTER_SAMPLE_CAP), replace=False))
    xs = col.values[take]
    scatter = tuple(
        (str(xv) if col.kind == CATEGORICAL else float(xv), float(y[i]))
        for xv, i in zip(xs, take)
    )
    return DataProfile(variable=variable, target=d.target, points=tuple(points), scatter=scatter)


@dataclass(frozen=True)
class MosaicTable:
    var_a: str
    var_b: str
    levels_a: tuple[str, ...]
    levels_b: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    @property
    def row_marginals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    @property
    def col_marginals(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.counts))

    def to_payload(self) -> dict:
        return {
            "var_a": self.var_a,
            "var_b": self.var_b,
            "levels_a": list(self.levels_a),
            "levels_b": list(self.levels_b),
            "counts": [list(row) for row in self.counts],
            "row_marginals": list(self.row_marginals),
            "col_marginals": list(self.col_marginals),
        }


def mosaic_table(d: Dataset, var_a: str, var_b: str) -> MosaicTable:
    """Contingency counts of two categorical columns with consistent marginals."""
    a, b = d.column(var_a), d.column(var_b)
    if a.kind != CATEGORICAL or b.kind != CATEGORICAL:
        raise DataError("mosaic requires two categorical columns")
    counts = [[0] * len(b.levels) for _ in a.levels]
    ia = {l: i for i, l in enumerate(a.levels)}
    ib = {l: i for i, l in enumerate(b.levels)}
    for va, vb in zip(a.values.tolist(), b.values.tolist()):
        counts[ia[va]][ib[vb]] += 1
    return MosaicTable(
        var_a=var_a,
        var_b=var_b,
        levels_a=a.levels,
        levels_b=b.levels,
        counts=tuple(tuple(row) for row in counts),
    )
