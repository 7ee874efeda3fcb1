"""Deterministic desk-scale synthetic data and the bundled demo models.

The committed files under ``iema/assets`` are produced by :func:`write_assets`;
regenerating them with the same seed is byte-stable.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .data import Dataset, load_dataset
from .models import fit_linear, load_model, schema_from_dataset

DEFAULT_N = 160
DEFAULT_SEED = 20240

POSITIONS = ("DEF", "FWD", "GK", "MID")
FEET = ("L", "R")


def players_tree_spec() -> dict:
    """Hand-built sum-aggregated ensemble predicting a player valuation."""
    def leaf(v):
        return {"value": v}

    trees = [
        {  # skill curve on reactions
            "nodes": [
                {"var": "reactions", "threshold": 55.0, "left": 1, "right": 2},
                leaf(4.0),
                {"var": "reactions", "threshold": 75.0, "left": 3, "right": 4},
                leaf(14.0),
                leaf(26.0),
            ]
        },
        {  # age first helps, then hurts
            "nodes": [
                {"var": "age", "threshold": 24.0, "left": 1, "right": 2},
                leaf(6.0),
                {"var": "age", "threshold": 31.0, "left": 3, "right": 4},
                leaf(4.0),
                leaf(-2.0),
            ]
        },
        {
            "nodes": [
                {"var": "ball_control", "threshold": 60.0, "left": 1, "right": 2},
                leaf(1.0),
                leaf(6.0),
            ]
        },
        {  # offensive positions are valued higher, keepers lower
            "nodes": [
                {"var": "position", "levels": ["FWD", "MID"], "left": 1, "right": 2},
                leaf(3.0),
                {"var": "position", "levels": ["GK"], "left": 3, "right": 4},
                leaf(-1.0),
                leaf(1.0),
            ]
        },
        {
            "nodes": [
                {"var": "foot", "levels": ["L"], "left": 1, "right": 2},
                leaf(0.5),
                leaf(0.0),
            ]
        },
        {  # reactions/age interaction
            "nodes": [
                {"var": "reactions", "threshold": 75.0, "left": 1, "right": 4},
                {"var": "age", "threshold": 27.0, "left": 2, "right": 3},
                leaf(1.0),
                leaf(0.0),
                {"var": "age", "threshold": 27.0, "left": 5, "right": 6},
                leaf(5.0),
                leaf(2.0),
            ]
        },
    ]
    return {"model-spec": 1, "type": "tree_ensemble", "aggregation": "sum", "trees": trees}


def players_csv(n: int = DEFAULT_N, seed: int = DEFAULT_SEED) -> str:
    """Synthetic player table; the target tracks the demo ensemble plus noise."""
    rng = np.random.default_rng(seed)
    age = rng.integers(17, 41, size=n).astype(float)
    reactions = np.round(rng.uniform(35.0, 95.0, size=n), 1)
    ball_control = np.round(rng.uniform(25.0, 95.0, size=n), 1)
    position = rng.choice(POSITIONS, size=n)
    foot = rng.choice(FEET, size=n, p=[0.25, 0.75])

    header = "age,reactions,ball_control,position,foot,value"
    probe = load_dataset(
        "\n".join(
            [header]
            + [
                f"{age[i]:.0f},{reactions[i]},{ball_control[i]},{position[i]},{foot[i]},0"
                for i in range(n)
            ]
        ),
        target="value",
    )
    model = load_model(players_tree_spec(), schema_from_dataset(probe))
    base = model.predict_columns({f.id: probe.column(f.id).values for f in model.schema})
    value = np.round(np.maximum(0.5, base + rng.normal(0.0, 1.5, size=n)), 2)

    out = io.StringIO()
    out.write(header + "\n")
    for i in range(n):
        out.write(
            f"{age[i]:.0f},{reactions[i]},{ball_control[i]},"
            f"{position[i]},{foot[i]},{value[i]}\n"
        )
    return out.getvalue()


def players_config() -> dict:
    return {
        "target": "value",
        "types": {"position": "categorical", "foot": "categorical"},
        "seed": 7,
    }


def players_linear_spec(d: Dataset) -> dict:
    """Refittable companion model: a least-squares fit of the synthetic table."""
    m = fit_linear(d, id="players-linear")
    weights = {}
    for f in m.schema:
        w = m.weights[f.id]
        if isinstance(w, dict):
            weights[f.id] = {lvl: round(v, 6) for lvl, v in w.items()}
        else:
            weights[f.id] = round(w, 6)
    return {
        "model-spec": 1,
        "type": "linear",
        "link": "identity",
        "intercept": round(m.intercept, 6),
        "weights": weights,
    }


def demo_script() -> list[dict]:
    """The six-question walkthrough bound to the synthetic table."""
    return [
        {"symbol": "SHAP_Attribution", "params": {"instance": 0}},
        {"symbol": "Select_Variable", "params": {"variable": "age"}},
        {"symbol": "Ceteris_Paribus", "params": {}},
        {"symbol": "Histogram", "params": {}},
        {"symbol": "Partial_Dependence", "params": {}},
        {"symbol": "Scatter_Plot", "params": {}},
        {"symbol": "Permutational_Importance", "params": {}},
    ]


def write_assets(directory: str | Path, n: int = DEFAULT_N, seed: int = DEFAULT_SEED) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_text = players_csv(n=n, seed=seed)
    (directory / "players.csv").write_text(csv_text, encoding="utf-8")
    (directory / "players.config.json").write_text(
        json.dumps(players_config(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (directory / "players_tree.json").write_text(
        json.dumps(players_tree_spec(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    d = load_dataset(csv_text, target="value", name="players")
    (directory / "players_linear.json").write_text(
        json.dumps(players_linear_spec(d), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (directory / "demo_script.json").write_text(
        json.dumps(demo_script(), indent=2) + "\n", encoding="utf-8"
    )
