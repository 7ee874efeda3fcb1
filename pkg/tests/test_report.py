import csv
import json

import matplotlib.pyplot as plt
import pytest

from iema.assets import asset_text
from iema.data import load_dataset
from iema.models import load_model, schema_from_dataset
from iema.report import render_step_figure, step_rows, write_report
from iema.session import Session

ALL_STEP_SCRIPT = [
    ("BD_Attribution", {"instance": 0, "background_rows": 30}),
    ("Select_Variable", {"variable": "reactions"}),
    ("Ceteris_Paribus", {"grid_size": 15}),
    ("Partial_Dependence", {"grid_size": 11, "instance_cap": 15}),
    ("Scatter_Plot", {}),
    ("Mosaic_Plot", {"var_a": "position", "var_b": "foot"}),
    ("Boxplot", {}),
    ("Accumulated_Local", {"k_bins": 4}),
    ("Barplot", {"variable": "position"}),
    ("SHAP_Dependence", {"instance_cap": 6, "background_rows": 30}),
    ("Histogram", {}),
    ("LOCO_Importance", {}),
]


@pytest.fixture(scope="module")
def every_kind_session():
    config = json.loads(asset_text("players.config.json"))
    d = load_dataset(asset_text("players.csv"), target=config["target"],
                     types=config["types"], name="players")
    m = load_model(asset_text("players_linear.json"), schema_from_dataset(d))
    s = Session(d, m, seed=5)
    for symbol, params in ALL_STEP_SCRIPT:
        s.apply_step(symbol, params)
    # two extra payload families the grammar path above cannot reach in one go
    extra = Session(d, m, seed=5)
    extra.apply_step("Graphical_Networks", {"threshold": 0.2})
    other = Session(d, m, seed=5)
    other.apply_step("Pairwise_Correlation", {})
    other.apply_step("Scatter_Plot", {"variable": "age"})
    steps = list(s.history) + list(extra.history) + list(other.history)
    return steps


def test_figure_for_every_payload_kind(every_kind_session):
    for step in every_kind_session:
        fig = render_step_figure(step.symbol, step.payload)
        assert fig.axes, step.symbol
        plt.close(fig)


def test_rows_for_every_payload_kind(every_kind_session):
    for step in every_kind_session:
        rows = step_rows(step.symbol, step.payload)
        assert len(rows) >= 2, step.symbol
        header = rows[0]
        assert all(len(r) == len(header) for r in rows[1:]), step.symbol


def test_importance_table_carries_ratio_column(every_kind_session):
    loco = next(s for s in every_kind_session if s.symbol == "LOCO_Importance")
    rows = step_rows(loco.symbol, loco.payload)
    assert rows[0][-1] == "ratio_to_baseline"


def test_write_report_manifest(tmp_path, every_kind_session):
    bundle = {"history": [s.to_doc() for s in every_kind_session]}
    written = write_report(bundle, tmp_path)
    assert (tmp_path / "index.csv").exists()
    with (tmp_path / "index.csv").open() as fh:
        manifest = list(csv.reader(fh))
    assert len(manifest) == len(every_kind_session) + 1
    for _, _, figure, table in manifest[1:]:
        assert (tmp_path / figure).exists()
        assert (tmp_path / table).exists()
