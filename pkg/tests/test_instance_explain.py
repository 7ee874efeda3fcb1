import itertools
import math

import numpy as np
import pytest

from iema.errors import ExplanationError
from iema.instance_explain import (
    breakdown_attribution,
    ceteris_paribus,
    lime_attribution,
    predict_instance,
    resolve_instance,
    shap_attribution,
)

from helpers import ConstantModel, linear_model, make_dataset, tree_model


def brute_force_shapley(value_of, p):
    """Independent Shapley oracle: direct sum over all coalitions."""
    phi = [0.0] * p
    for j in range(p):
        others = [k for k in range(p) if k != j]
        for r in range(p):
            for subset in itertools.combinations(others, r):
                s = set(subset)
                w = math.factorial(len(s)) * math.factorial(p - len(s) - 1) / math.factorial(p)
                phi[j] += w * (value_of(s | {j}) - value_of(s))
    return phi


def mean_value_oracle(m, d, x):
    """v(S) by explicit row-by-row substitution, no shared code with the package."""
    names = [f.id for f in m.schema]

    def value_of(s):
        total = 0.0
        for i in range(d.n_rows):
            row = []
            for pos, var in enumerate(names):
                row.append(x[var] if pos in s else d.column(var).values[i])
            total += m.predict_rows([row])[0]
        return total / d.n_rows

    return value_of


def linear_2d():
    d = make_dataset(
        {"x1": [-1.0, 0.0, 1.0], "x2": [-3.0, 0.0, 3.0], "y": [0.0, 0.0, 0.0]}, target="y"
    )
    return d, linear_model(d, {"x1": 2.0, "x2": -1.0})


# -- ceteris paribus -------------------------------------------------------------


def test_cp_constant_model():
    d, _ = linear_2d()
    prof = ceteris_paribus(ConstantModel(d, 0.5), d, 0, "x1", grid_size=11)
    assert all(v == pytest.approx(0.5) for v in prof.values)


def test_cp_anchor_reproduced_on_grid():
    d, m = linear_2d()
    prof = ceteris_paribus(m, d, {"x1": 0.4, "x2": 1.0}, "x1", grid_size=21)
    x_star, fx = prof.anchor
    assert x_star in prof.grid
    idx = prof.grid.index(x_star)
    assert prof.values[idx] == pytest.approx(fx)


def test_cp_linear_closed_form():
    d, m = linear_2d()
    # f(x) = 2 x1 - x2; at x* = (1, 3) the x1 profile is 2 z - 3
    prof = ceteris_paribus(m, d, {"x1": 1.0, "x2": 3.0}, "x1", grid=[-1.0, 0.0, 5.0])
    assert list(prof.values) == pytest.approx([-5.0, -3.0, 7.0])


def test_cp_grid_strictly_increasing_with_instance_inserted():
    d, m = linear_2d()
    prof = ceteris_paribus(m, d, {"x1": 0.123, "x2": 0.0}, "x1", grid_size=7)
    assert 0.123 in prof.grid
    assert all(a < b for a, b in zip(prof.grid, prof.grid[1:]))


def test_cp_categorical_grid_is_level_set():
    d = make_dataset({"c": ["a", "b", "c"], "x": [0.0, 1.0, 2.0], "y": [0, 1, 0]}, target="y")
    m = linear_model(d, {"c": {"a": 1.0, "b": 2.0, "c": 3.0}, "x": 0.0})
    prof = ceteris_paribus(m, d, 0, "c")
    assert prof.grid == ("a", "b", "c")
    assert list(prof.values) == pytest.approx([1.0, 2.0, 3.0])


def test_cp_unknown_variable_and_small_grid():
    d, m = linear_2d()
    with pytest.raises(Exception):
        ceteris_paribus(m, d, 0, "nope")
    with pytest.raises(ExplanationError):
        ceteris_paribus(m, d, 0, "x1", grid_size=1)


# -- shap ----------------------------------------------------------------------


def test_shap_null_player():
    # x*_j equals every dataset value of x2, so substituting it changes nothing
    d = make_dataset(
        {"x1": [0.0, 1.0, 2.0], "x2": [5.0, 5.0, 5.0], "y": [0, 0, 0]}, target="y"
    )
    m = linear_model(d, {"x1": 1.0, "x2": 3.0})
    attr = shap_attribution(m, d, {"x1": 1.5, "x2": 5.0})
    assert attr.contribution("x2") == pytest.approx(0.0, abs=1e-12)


def test_shap_linear_closed_form_and_brute_force():
    d, m = linear_2d()  # column means are (0, 0)
    x = {"x1": 1.0, "x2": 3.0}
    attr = shap_attribution(m, d, x)
    assert attr.contribution("x1") == pytest.approx(2.0, abs=1e-9)
    assert attr.contribution("x2") == pytest.approx(-3.0, abs=1e-9)
    oracle = brute_force_shapley(mean_value_oracle(m, d, x), 2)
    assert attr.contribution("x1") == pytest.approx(oracle[0], abs=1e-9)
    assert attr.contribution("x2") == pytest.approx(oracle[1], abs=1e-9)


def test_shap_completeness():
    d, m = linear_2d()
    x = {"x1": 0.7, "x2": -2.0}
    attr = shap_attribution(m, d, x)
    total = attr.baseline + sum(v for _, v in attr.contributions)
    assert abs(total - attr.prediction) <= 1e-9


def test_shap_symmetry():
    d = make_dataset(
        {"a": [0.0, 1.0, 2.0], "b": [0.0, 1.0, 2.0], "y": [0, 0, 0]}, target="y"
    )
    m = linear_model(d, {"a": 1.0, "b": 1.0})
    attr = shap_attribution(m, d, {"a": 2.0, "b": 2.0})
    assert attr.contribution("a") == pytest.approx(attr.contribution("b"), abs=1e-12)


def xor_setup():
    rows = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
    d = make_dataset(
        {"x1": [r[0] for r in rows], "x2": [r[1] for r in rows], "y": [0.0] * 4}, target="y"
    )
    # tree encoding of XOR(x1, x2)
    nodes = [
        {"var": "x1", "threshold": 0.5, "left": 1, "right": 2},
        {"var": "x2", "threshold": 0.5, "left": 3, "right": 4},
        {"var": "x2", "threshold": 0.5, "left": 5, "right": 6},
        {"value": 0.0},
        {"value": 1.0},
        {"value": 1.0},
        {"value": 0.0},
    ]
    return d, tree_model(d, [nodes])


def test_shap_xor_hand_enumeration():
    # v(empty)=0.5, v({x1})=v({x2})=0.5, v(both)=0 at x*=(1,1):
    # phi_j = 0.5*(0 + (0 - 0.5)) = -0.25 for both variables
    d, m = xor_setup()
    attr = shap_attribution(m, d, {"x1": 1.0, "x2": 1.0})
    assert attr.baseline == pytest.approx(0.5)
    assert attr.contribution("x1") == pytest.approx(-0.25, abs=1e-12)
    assert attr.contribution("x2") == pytest.approx(-0.25, abs=1e-12)


def test_shap_exact_mode_p_limit():
    cols = {f"v{i}": [0.0, 1.0] for i in range(13)}
    cols["y"] = [0.0, 1.0]
    d = make_dataset(cols, target="y")
    m = ConstantModel(d)
    with pytest.raises(ExplanationError, match="2\\^p"):
        shap_attribution(m, d, 0, mode="exact")


def test_shap_sampling_matches_exact_for_additive_model():
    d, m = linear_2d()
    x = {"x1": 1.0, "x2": 3.0}
    exact = shap_attribution(m, d, x)
    sampled = shap_attribution(m, d, x, mode="sampling", b_permutations=8, seed=0)
    for var, val in exact.contributions:
        assert sampled.contribution(var) == pytest.approx(val, abs=1e-9)
    assert set(sampled.uncertainty) == {"x1", "x2"}


def test_shap_sampling_b_minimum():
    d, m = linear_2d()
    with pytest.raises(ExplanationError):
        shap_attribution(m, d, 0, mode="sampling", b_permutations=1)


def test_shap_sampling_converges_to_exact():
    # non-additive model so permutation sampling actually has variance
    d, m = xor_setup()
    instances = [{"x1": 1.0, "x2": 1.0}, {"x1": 0.0, "x2": 1.0}, {"x1": 1.0, "x2": 0.0}]
    mads = []
    for b in (8, 64, 512):
        total = 0.0
        for k, x in enumerate(instances):
            exact = shap_attribution(m, d, x)
            sampled = shap_attribution(m, d, x, mode="sampling", b_permutations=b, seed=100 + k)
            total += np.mean(
                [abs(sampled.contribution(v) - exact.contribution(v)) for v in ("x1", "x2")]
            )
        mads.append(total / len(instances))
    assert mads[0] >= mads[1] >= mads[2]


# -- breakdown -------------------------------------------------------------------


def test_breakdown_equals_shap_for_additive_model():
    d, m = linear_2d()
    x = {"x1": 1.0, "x2": 3.0}
    shap = shap_attribution(m, d, x)
    for order in ([("x1", "x2")], [("x2", "x1")]):
        bd = breakdown_attribution(m, d, x, order=order[0])
        for var, val in shap.contributions:
            assert bd.contribution(var) == pytest.approx(val, abs=1e-9)


def test_breakdown_completeness_any_order():
    d, m = xor_setup()
    x = {"x1": 1.0, "x2": 0.0}
    for order in (("x1", "x2"), ("x2", "x1"), None):
        bd = breakdown_attribution(m, d, x, order=order)
        total = bd.baseline + sum(v for _, v in bd.contributions)
        assert abs(total - bd.prediction) <= 1e-12


def test_breakdown_xor_hand_enumeration():
    # at x*=(1,1): v(empty)=0.5, v({x1})=0.5, v({x2})=0.5, v(both)=0, so the
    # first-ordered variable contributes 0 and the second -0.5, either order
    d, m = xor_setup()
    x = {"x1": 1.0, "x2": 1.0}
    bd12 = breakdown_attribution(m, d, x, order=("x1", "x2"))
    assert bd12.contributions == (("x1", pytest.approx(0.0)), ("x2", pytest.approx(-0.5)))
    bd21 = breakdown_attribution(m, d, x, order=("x2", "x1"))
    assert bd21.contributions == (("x2", pytest.approx(0.0)), ("x1", pytest.approx(-0.5)))


def test_breakdown_default_order_by_single_effect():
    d, m = linear_2d()
    bd = breakdown_attribution(m, d, {"x1": 1.0, "x2": 3.0})
    # |v({x2}) - v(0)| = 3 > |v({x1}) - v(0)| = 2, so x2 leads
    assert [var for var, _ in bd.contributions] == ["x2", "x1"]


def test_breakdown_invalid_order():
    d, m = linear_2d()
    with pytest.raises(ExplanationError):
        breakdown_attribution(m, d, 0, order=("x1", "x1"))


# -- lime -----------------------------------------------------------------------


def noisy_linear_setup(n=60, seed=1):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(2.0, 1.5, size=n)
    x2 = rng.normal(-1.0, 0.7, size=n)
    d = make_dataset(
        {"x1": x1.tolist(), "x2": x2.tolist(), "y": (2.0 * x1 - x2).tolist()}, target="y"
    )
    return d, linear_model(d, {"x1": 2.0, "x2": -1.0}, intercept=0.5)


def test_lime_constant_model_zero_coefficients():
    d, _ = noisy_linear_setup()
    attr = lime_attribution(ConstantModel(d, 0.5), d, 0, seed=3)
    for _, val in attr.contributions:
        assert val == pytest.approx(0.0, abs=1e-9)
    assert attr.fidelity == 1.0  # zero-variance response convention
    assert attr.baseline == pytest.approx(0.5, abs=1e-9)


def test_lime_recovers_linear_coefficients():
    d, m = noisy_linear_setup()
    attr = lime_attribution(m, d, 0, n_samples=1000, seed=7)
    assert attr.coefficients["x1"] == pytest.approx(2.0, rel=0.05)
    assert attr.coefficients["x2"] == pytest.approx(-1.0, rel=0.05)
    assert attr.fidelity == pytest.approx(1.0, abs=1e-9)


def test_lime_fidelity_bounded():
    d, m = xor_setup()
    attr = lime_attribution(m, d, {"x1": 1.0, "x2": 0.0}, n_samples=200, seed=5)
    assert 0.0 <= attr.fidelity <= 1.0


def test_lime_sample_floor():
    d, m = noisy_linear_setup()
    with pytest.raises(ExplanationError, match="10\\*p"):
        lime_attribution(m, d, 0, n_samples=19)


def test_lime_degenerate_design():
    d = make_dataset({"x1": [1.0, 1.0, 1.0], "x2": [2.0, 2.0, 2.0], "y": [0, 1, 2]},
                     target="y")
    m = linear_model(d, {"x1": 1.0, "x2": 1.0})
    with pytest.raises(ExplanationError, match="degenerate"):
        lime_attribution(m, d, 0, n_samples=50, seed=0)


def test_lime_categorical_contributions():
    rng = np.random.default_rng(8)
    levels = ["a", "b"]
    c = [levels[i] for i in rng.integers(0, 2, size=50)]
    x = rng.normal(size=50)
    d = make_dataset({"c": c, "x": x.tolist(), "y": [0.0] * 50}, target="y")
    m = linear_model(d, {"c": {"a": 1.0, "b": -1.0}, "x": 0.5})
    attr = lime_attribution(m, d, {"c": "a", "x": 0.0}, n_samples=400, seed=2)
    # surrogate of a linear model stays faithful with a categorical block
    assert attr.fidelity == pytest.approx(1.0, abs=1e-6)
    assert attr.coefficients["x"] == pytest.approx(0.5, rel=0.05)


def test_lime_seeded_determinism():
    d, m = noisy_linear_setup()
    a = lime_attribution(m, d, 0, n_samples=300, seed=11)
    b = lime_attribution(m, d, 0, n_samples=300, seed=11)
    assert a.contributions == b.contributions


# -- instance resolution ------------------------------------------------------------


def test_resolve_instance_forms():
    d, m = linear_2d()
    by_index = resolve_instance(d, m, 2)
    by_map = resolve_instance(d, m, {"x1": 1.0, "x2": 3.0})
    by_seq = resolve_instance(d, m, [1.0, 3.0])
    assert by_index == {"x1": 1.0, "x2": 3.0}
    assert by_map == by_seq


def test_resolve_instance_errors():
    d, m = linear_2d()
    with pytest.raises(ExplanationError):
        resolve_instance(d, m, 99)
    with pytest.raises(ExplanationError):
        resolve_instance(d, m, {"x1": 1.0})
    with pytest.raises(ExplanationError):
        resolve_instance(d, m, [1.0])


def test_predict_instance_matches_batch():
    d, m = linear_2d()
    assert predict_instance(m, {"x1": 1.0, "x2": 3.0}) == pytest.approx(-1.0)
