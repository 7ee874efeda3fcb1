import numpy as np
import pytest

from iema.errors import CapabilityError, ExplanationError
from iema.instance_explain import ceteris_paribus, quantile_grid, shap_attribution
from iema.model_explain import (
    accumulated_local_effects,
    loco_importance,
    partial_dependence,
    permutation_importance,
    shap_dependence,
    shap_importance,
)
from iema.models import fit_linear

from helpers import ConstantModel, linear_model, make_dataset, tree_model


def additive_setup(n=40, seed=0):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(0.0, 2.0, size=n)
    x2 = rng.normal(4.0, 1.0, size=n)
    d = make_dataset(
        {"x1": x1.tolist(), "x2": x2.tolist(), "y": (x1 + x2).tolist()}, target="y"
    )
    return d, linear_model(d, {"x1": 1.0, "x2": 1.0})


# -- partial dependence ---------------------------------------------------------


def test_pdp_constant_model_flat():
    d, _ = additive_setup()
    prof = partial_dependence(ConstantModel(d, 0.25), d, "x1", grid_size=11)
    assert all(v == pytest.approx(0.25) for v in prof.values)


def test_pdp_additive_closed_form():
    # f = x1 + x2 gives PDP_x1(z) = z + mean(x2); here mean(x2) = 4 exactly
    x2 = [3.0, 4.0, 5.0, 4.0]
    d = make_dataset(
        {"x1": [0.0, 1.0, 2.0, 3.0], "x2": x2, "y": [0.0] * 4}, target="y"
    )
    m = linear_model(d, {"x1": 1.0, "x2": 1.0})
    prof = partial_dependence(m, d, "x1", grid_size=5)
    for z, v in zip(prof.grid, prof.values):
        assert v == pytest.approx(z + 4.0, abs=1e-12)
    assert 3.0 in prof.grid  # PDP(3) = 7 from the sheet
    assert prof.values[prof.grid.index(3.0)] == pytest.approx(7.0)


def test_pdp_equals_mean_of_cp_profiles():
    d, m = additive_setup()
    grid = quantile_grid(d, "x1", 101)
    prof = partial_dependence(m, d, "x1", grid_size=101)
    stack = np.array(
        [ceteris_paribus(m, d, i, "x1", grid=grid).values for i in range(d.n_rows)]
    )
    independent_mean = np.mean(stack, axis=0)
    assert np.max(np.abs(np.asarray(prof.values) - independent_mean)) <= 1e-12


def test_pdp_bounded_by_cp_envelope():
    d, m = additive_setup(seed=3)
    grid = quantile_grid(d, "x1", 21)
    prof = partial_dependence(m, d, "x1", grid_size=21)
    stack = np.array(
        [ceteris_paribus(m, d, i, "x1", grid=grid).values for i in range(d.n_rows)]
    )
    assert np.all(np.asarray(prof.values) >= stack.min(axis=0) - 1e-12)
    assert np.all(np.asarray(prof.values) <= stack.max(axis=0) + 1e-12)


def test_pdp_instance_cap_seeded():
    d, m = additive_setup(n=30, seed=5)
    a = partial_dependence(m, d, "x1", grid_size=11, instance_cap=10, seed=2)
    b = partial_dependence(m, d, "x1", grid_size=11, instance_cap=10, seed=2)
    assert a.values == b.values


def test_pdp_categorical_levels():
    d = make_dataset(
        {"c": ["a", "b", "a", "b"], "x": [0.0, 1.0, 2.0, 3.0], "y": [0.0] * 4}, target="y"
    )
    m = linear_model(d, {"c": {"a": 10.0, "b": 20.0}, "x": 0.0})
    prof = partial_dependence(m, d, "c")
    assert prof.grid == ("a", "b")
    assert list(prof.values) == pytest.approx([10.0, 20.0])


# -- accumulated local effects -----------------------------------------------------


def test_ale_constant_model_zero():
    d, _ = additive_setup()
    prof = accumulated_local_effects(ConstantModel(d, 3.0), d, "x1", k_bins=5)
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in prof.values)


def test_ale_identity_model_telescopes():
    # f = x1 alone: accumulated effect at edge z is exactly z - z_min, and the
    # weighted mean subtracts sum(count_b * upper_edge_b) / n
    d, _ = additive_setup(n=25, seed=1)
    m = linear_model(d, {"x1": 1.0, "x2": 0.0})
    prof = accumulated_local_effects(m, d, "x1", k_bins=5)
    edges = np.asarray(prof.grid)
    counts = np.asarray(prof.bin_counts)
    w_mean = float(np.sum(counts * edges[1:]) / counts.sum())
    for z, v in zip(edges, prof.values):
        assert v == pytest.approx(z - w_mean, abs=1e-9)


def test_ale_additive_second_variable_cancels():
    d, m = additive_setup(n=25, seed=2)  # f = x1 + x2
    only_x1 = linear_model(d, {"x1": 1.0, "x2": 0.0})
    a = accumulated_local_effects(m, d, "x1", k_bins=6)
    b = accumulated_local_effects(only_x1, d, "x1", k_bins=6)
    assert np.allclose(a.values, b.values, atol=1e-12)
    assert a.grid == b.grid


def test_ale_centering_over_data():
    d, _ = additive_setup(n=35, seed=4)
    m = tree_model(
        d,
        [[
            {"var": "x1", "threshold": 0.0, "left": 1, "right": 2},
            {"value": -1.0},
            {"value": 2.5},
        ]],
    )
    prof = accumulated_local_effects(m, d, "x1", k_bins=7)
    counts = np.asarray(prof.bin_counts, dtype=float)
    per_row_values = np.asarray(prof.values[1:])  # value at each bin's upper edge
    assert abs(np.sum(counts * per_row_values)) <= 1e-9


def test_ale_rejects_categorical_and_constant():
    d = make_dataset(
        {"c": ["a", "b", "a"], "k": [2.0, 2.0, 2.0], "y": [0.0, 1.0, 0.0]}, target="y"
    )
    m = linear_model(d, {"c": {"a": 0.0, "b": 1.0}, "k": 1.0})
    with pytest.raises(ExplanationError):
        accumulated_local_effects(m, d, "c")
    with pytest.raises(ExplanationError, match="distinct"):
        accumulated_local_effects(m, d, "k")


def test_ale_merges_empty_bins():
    # heavy ties force duplicate quantile edges; profile must still cover all rows
    vals = [1.0] * 10 + [2.0] * 10 + [9.0]
    d = make_dataset({"x1": vals, "y": [0.0] * 21}, target="y")
    m = linear_model(d, {"x1": 1.0})
    prof = accumulated_local_effects(m, d, "x1", k_bins=10)
    assert sum(prof.bin_counts) == 21
    assert all(c > 0 for c in prof.bin_counts)


# -- shap dependence ---------------------------------------------------------------


def test_shap_dependence_linear_cloud_on_line():
    d, m = additive_setup(n=20, seed=6)
    cloud = shap_dependence(m, d, "x1")
    mean_x1 = float(np.mean(d.column("x1").values))
    for x, phi in cloud.points:
        assert phi == pytest.approx(1.0 * (x - mean_x1), abs=1e-9)


def test_shap_dependence_constant_model():
    d, _ = additive_setup(n=12)
    cloud = shap_dependence(ConstantModel(d), d, "x1")
    assert all(phi == pytest.approx(0.0, abs=1e-12) for _, phi in cloud.points)


def test_shap_dependence_cloud_size():
    d, m = additive_setup(n=15)
    assert len(shap_dependence(m, d, "x1").points) == 15
    assert len(shap_dependence(m, d, "x1", instance_cap=6, seed=1).points) == 6


# -- shap importance ----------------------------------------------------------------


def test_shap_importance_identity_with_per_instance_attributions():
    d, m = additive_setup(n=18, seed=7)
    result = shap_importance(m, d)
    for var in ("x1", "x2"):
        independent = np.mean(
            [abs(shap_attribution(m, d, i).contribution(var)) for i in range(d.n_rows)]
        )
        assert abs(result.estimate(var) - independent) <= 1e-12


def test_shap_importance_constant_model_zeros():
    d, _ = additive_setup(n=10)
    result = shap_importance(ConstantModel(d), d)
    assert all(est == pytest.approx(0.0, abs=1e-12) for _, est, _ in result.entries)


def test_shap_importance_linear_closed_form():
    d, _ = additive_setup(n=22, seed=8)
    m = linear_model(d, {"x1": 3.0, "x2": -0.5})
    result = shap_importance(m, d)
    for var, w in (("x1", 3.0), ("x2", -0.5)):
        col = np.asarray(d.column(var).values, dtype=float)
        expected = abs(w) * np.mean(np.abs(col - col.mean()))
        assert result.estimate(var) == pytest.approx(expected, abs=1e-9)


def test_shap_importance_nonnegative():
    d, m = additive_setup(n=12, seed=9)
    result = shap_importance(m, d)
    assert all(est >= 0.0 for _, est, _ in result.entries)


# -- permutation importance ------------------------------------------------------------


def ignores_noise_setup(n=50, seed=10):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=n)
    noise = rng.normal(size=n)
    d = make_dataset(
        {"x1": x1.tolist(), "noise": noise.tolist(), "y": x1.tolist()}, target="y"
    )
    return d, linear_model(d, {"x1": 1.0, "noise": 0.0})


def test_permutation_ignored_column_exactly_zero_every_repeat():
    d, m = ignores_noise_setup()
    result = permutation_importance(m, d, "rmse", b_repeats=10, seed=0)
    assert result.estimate("noise") == 0.0
    assert all(l == result.baseline_loss for l in result.repeats["noise"])


def test_permutation_used_column_positive_every_repeat():
    d, m = ignores_noise_setup()
    result = permutation_importance(m, d, "rmse", b_repeats=50, seed=0)
    assert all(l > result.baseline_loss for l in result.repeats["x1"])
    assert result.estimate("x1") > 0.0


def test_permutation_two_row_expectation():
    # n=2, x1=(0,1), f=x1, target=x1: the identity permutation scores rmse 0,
    # the swap scores 1, so the expected importance is 0.5
    d = make_dataset({"x1": [0.0, 1.0], "y": [0.0, 1.0]}, target="y")
    m = linear_model(d, {"x1": 1.0})
    result = permutation_importance(m, d, "rmse", b_repeats=400, seed=3)
    assert result.estimate("x1") == pytest.approx(0.5, abs=0.1)


def test_permutation_invariant_to_schema_order():
    d, _ = ignores_noise_setup(n=30, seed=12)
    m_fwd = linear_model(d, {"x1": 1.0, "noise": 0.25})
    m_rev = linear_model(d, {"x1": 1.0, "noise": 0.25})
    m_rev.schema = tuple(reversed(m_rev.schema))
    fwd = permutation_importance(m_fwd, d, "rmse", b_repeats=5, seed=1)
    rev = permutation_importance(m_rev, d, "rmse", b_repeats=5, seed=1)
    assert fwd.estimate("x1") == rev.estimate("x1")
    assert fwd.estimate("noise") == rev.estimate("noise")


def test_permutation_spread_reported():
    d, m = ignores_noise_setup()
    result = permutation_importance(m, d, "rmse", b_repeats=4, seed=5)
    spreads = {var: spread for var, _, spread in result.entries}
    assert spreads["noise"] == 0.0
    assert spreads["x1"] > 0.0


# -- loco -------------------------------------------------------------------------------


def test_loco_zero_weight_column_scores_zero():
    rng = np.random.default_rng(13)
    x1 = rng.normal(size=30)
    noise = rng.normal(size=30)
    d = make_dataset(
        {"x1": x1.tolist(), "noise": noise.tolist(), "y": (2.0 * x1).tolist()}, target="y"
    )
    m = fit_linear(d)
    result = loco_importance(m, d, "rmse")
    assert result.estimate("noise") == pytest.approx(0.0, abs=1e-9)
    assert result.estimate("x1") > 0.1


def test_loco_only_informative_variable():
    # dropping the only predictor leaves the mean model; rmse = population sd
    d = make_dataset({"x1": [0.0, 1.0, 2.0, 3.0], "y": [1.0, 3.0, 5.0, 7.0]}, target="y")
    m = fit_linear(d)
    result = loco_importance(m, d, "rmse")
    sd = float(np.std([1.0, 3.0, 5.0, 7.0]))
    assert result.baseline_loss == pytest.approx(0.0, abs=1e-9)
    assert result.estimate("x1") == pytest.approx(sd, abs=1e-9)


def test_loco_tree_is_capability_error():
    d = make_dataset({"x1": [0.0, 1.0], "y": [0.0, 1.0]}, target="y")
    m = tree_model(d, [[{"value": 1.0}]])
    with pytest.raises(CapabilityError):
        loco_importance(m, d, "rmse")
