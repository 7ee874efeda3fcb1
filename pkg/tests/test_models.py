import json

import numpy as np
import pytest

from iema.errors import CapabilityError, DataError, ModelError
from iema.models import (
    fit_linear,
    load_model,
    loss,
    predict_batch,
    refit_without,
    schema_from_dataset,
)

from helpers import make_dataset, linear_model, tree_model


def two_col_dataset():
    return make_dataset(
        {"x1": [0.0, 1.0, 2.0, 3.0], "x2": [1.0, 3.0, 5.0, 7.0], "y": [0.0, 1.0, 0.0, 1.0]},
        target="y",
    )


# -- loading specs ---------------------------------------------------------------


def test_load_linear_spec_refittable():
    d = two_col_dataset()
    spec = {
        "model-spec": 1,
        "type": "linear",
        "link": "identity",
        "intercept": 0.0,
        "weights": {"x1": 2.0, "x2": -1.0},
    }
    m = load_model(json.dumps(spec), schema_from_dataset(d))
    assert m.refittable
    assert m.task == "regression"


def test_load_stump_and_trace_split():
    d = make_dataset({"x1": [-1.0, 1.0], "y": [0.0, 1.0]}, target="y")
    spec = {
        "model-spec": 1,
        "type": "tree_ensemble",
        "aggregation": "mean",
        "trees": [
            {
                "nodes": [
                    {"var": "x1", "threshold": 0.0, "left": 1, "right": 2},
                    {"value": 0.0},
                    {"value": 1.0},
                ]
            }
        ],
    }
    m = load_model(json.dumps(spec), schema_from_dataset(d))
    assert not m.refittable
    assert predict_batch(m, [[-1.0], [1.0]]).tolist() == [0.0, 1.0]
    assert predict_batch(m, [[0.0]]).tolist() == [0.0]  # boundary goes left


def test_load_unknown_variable_named():
    d = two_col_dataset()
    spec = {"model-spec": 1, "type": "linear", "weights": {"x1": 1.0, "x2": 0.0, "q": 1.0}}
    with pytest.raises(ModelError, match="q"):
        load_model(json.dumps(spec), schema_from_dataset(d))


def test_load_cyclic_tree_rejected():
    d = make_dataset({"x1": [0.0, 1.0], "y": [0.0, 1.0]}, target="y")
    spec = {
        "model-spec": 1,
        "type": "tree_ensemble",
        "trees": [
            {"nodes": [{"var": "x1", "threshold": 0.0, "left": 0, "right": 1}, {"value": 1.0}]}
        ],
    }
    with pytest.raises(ModelError, match="cycle|twice"):
        load_model(json.dumps(spec), schema_from_dataset(d))


def test_load_bad_link_and_missing_version():
    d = two_col_dataset()
    schema = schema_from_dataset(d)
    with pytest.raises(ModelError, match="model-spec"):
        load_model({"type": "linear", "weights": {"x1": 1.0, "x2": 1.0}}, schema)
    with pytest.raises(ModelError, match="link"):
        load_model(
            {"model-spec": 1, "type": "linear", "link": "probit",
             "weights": {"x1": 1.0, "x2": 1.0}},
            schema,
        )


def test_load_categorical_weights():
    d = make_dataset({"c": ["a", "b", "a"], "y": [0.0, 1.0, 0.0]}, target="y")
    spec = {
        "model-spec": 1,
        "type": "linear",
        "weights": {"c": {"a": 1.0, "b": -1.0}},
        "intercept": 0.5,
    }
    m = load_model(spec, schema_from_dataset(d))
    assert predict_batch(m, [["a"], ["b"]]).tolist() == [1.5, -0.5]


# -- prediction --------------------------------------------------------------------


def test_linear_dot_product():
    d = two_col_dataset()
    m = linear_model(d, {"x1": 2.0, "x2": -1.0})
    assert predict_batch(m, [[1.0, 3.0]])[0] == pytest.approx(-1.0)


def test_logistic_at_zero_score():
    d = two_col_dataset()
    m = linear_model(d, {"x1": 2.0, "x2": -1.0}, link="logistic")
    assert predict_batch(m, [[0.0, 0.0]])[0] == pytest.approx(0.5)
    assert m.task == "binary_classification"


def test_empty_batch():
    d = two_col_dataset()
    m = linear_model(d, {"x1": 2.0, "x2": -1.0})
    assert len(predict_batch(m, [])) == 0


def test_prediction_is_rowwise():
    rng = np.random.default_rng(2)
    d = two_col_dataset()
    m = linear_model(d, {"x1": 0.5, "x2": 1.5}, intercept=2.0)
    rows = rng.normal(size=(10, 2)).tolist()
    preds = predict_batch(m, rows)
    perm = rng.permutation(10)
    shuffled = predict_batch(m, [rows[i] for i in perm])
    assert np.allclose(shuffled, preds[perm])


def test_linear_finite_difference_slope_matches_weight():
    d = two_col_dataset()
    m = linear_model(d, {"x1": 2.0, "x2": -1.0}, intercept=3.0)
    h = 1e-6
    base = predict_batch(m, [[1.0, 1.0]])[0]
    bump = predict_batch(m, [[1.0 + h, 1.0]])[0]
    assert (bump - base) / h == pytest.approx(2.0, abs=1e-9 / h)


def test_tree_aggregation_mean_vs_sum():
    d = make_dataset({"x1": [0.0, 1.0], "y": [0.0, 1.0]}, target="y")
    trees = [
        [{"var": "x1", "threshold": 0.5, "left": 1, "right": 2}, {"value": 2.0}, {"value": 4.0}],
        [{"value": 6.0}],
    ]
    assert predict_batch(tree_model(d, trees, "mean"), [[0.0]])[0] == pytest.approx(4.0)
    assert predict_batch(tree_model(d, trees, "sum"), [[0.0]])[0] == pytest.approx(8.0)


# -- losses -------------------------------------------------------------------------


def test_rmse_zero_iff_equal():
    assert loss("rmse", [1.0, 2.0], [1.0, 2.0]) == 0.0
    assert loss("rmse", [1.0, 2.0], [1.0, 2.5]) > 0.0


def test_one_minus_auc_perfect_ranking():
    assert loss("one_minus_auc", [0.9, 0.1], [1.0, 0.0]) == pytest.approx(0.0)


def test_one_minus_auc_tie_convention():
    assert loss("one_minus_auc", [0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5)


def test_auc_single_class_is_error():
    with pytest.raises(DataError, match="both classes"):
        loss("one_minus_auc", [0.5, 0.6], [1.0, 1.0])


def test_cross_entropy_clamps_extreme_probabilities():
    val = loss("cross_entropy", [0.0, 1.0], [1.0, 0.0])
    assert np.isfinite(val) and val > 0.0


def test_loss_length_mismatch():
    with pytest.raises(DataError):
        loss("rmse", [1.0], [1.0, 2.0])


# -- refitting ----------------------------------------------------------------------


def exact_linear_dataset():
    rng = np.random.default_rng(11)
    x1 = rng.normal(size=30)
    x2 = rng.normal(size=30)
    noise = rng.normal(size=30)  # zero-weight column
    y = 2.0 * x1 - 1.0 * x2 + 0.5
    return make_dataset(
        {"x1": x1.tolist(), "x2": x2.tolist(), "noise": noise.tolist(), "y": y.tolist()},
        target="y",
    )


def test_refit_drop_irrelevant_column_recovers_weights():
    d = exact_linear_dataset()
    m = fit_linear(d)
    reduced = refit_without(m, d, "noise")
    assert reduced.weights["x1"] == pytest.approx(2.0, abs=1e-9)
    assert reduced.weights["x2"] == pytest.approx(-1.0, abs=1e-9)
    assert reduced.intercept == pytest.approx(0.5, abs=1e-9)


def test_refit_drop_only_predictor_gives_mean_model():
    d = make_dataset({"x1": [0.0, 1.0, 2.0, 3.0], "y": [1.0, 5.0, 3.0, 7.0]}, target="y")
    m = fit_linear(d)
    reduced = refit_without(m, d, "x1")
    assert reduced.schema == ()
    assert reduced.intercept == pytest.approx(4.0)  # the target mean


def test_refit_tree_is_capability_error():
    d = make_dataset({"x1": [0.0, 1.0], "y": [0.0, 1.0]}, target="y")
    m = tree_model(d, [[{"value": 1.0}]])
    with pytest.raises(CapabilityError):
        refit_without(m, d, "x1")


def test_logistic_refit_converges():
    rng = np.random.default_rng(4)
    x = rng.normal(size=80)
    p = 1.0 / (1.0 + np.exp(-(1.5 * x - 0.25)))
    y = (rng.random(80) < p).astype(float)
    d = make_dataset({"x": x.tolist(), "z": rng.normal(size=80).tolist(), "y": y.tolist()},
                     target="y")
    m = fit_linear(d, link="logistic")
    preds = m.predict_columns({"x": np.asarray(x), "z": d.column("z").values})
    assert np.all((preds >= 0.0) & (preds <= 1.0))
    reduced = refit_without(m, d, "z")
    assert abs(reduced.weights["x"] - 1.5) < 0.75  # recovers the signal roughly
