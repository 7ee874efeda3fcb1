"""Grammar-governed explanation dialogues over one dataset/model pair.

A session holds an ordered step history whose terminal-symbol projection is
always a valid prefix of the dialogue grammar, plus the running context (the
instance and variable under discussion). Steps are atomic: a failing step
leaves the session untouched.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from typing import Mapping

from . import data as data_ops
from . import instance_explain as instance_ops
from . import model_explain as model_ops
from .data import Dataset
from .errors import CapabilityError, ParameterError, SessionError, StepRejectedError
from .grammar import Grammar, NextSteps, iema_grammar
from .models import ModelHandle, default_loss

INSTANCE_SYMBOLS = ("SHAP_Attribution", "BD_Attribution", "LIME_Attribution")
DISTRIBUTION_KINDS = {"Histogram": "histogram", "Boxplot": "boxplot", "Barplot": "barplot"}


@dataclass(frozen=True)
class BoundStep:
    symbol: str
    params: dict
    payload: dict
    timestamp: int  # position in history; logical time keeps exports reproducible

    def to_doc(self) -> dict:
        return {
            "symbol": self.symbol,
            "params": self.params,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }


@dataclass
class Context:
    instance: object | None = None  # row index or value mapping
    variable: str | None = None


class Session:
    def __init__(
        self,
        dataset: Dataset,
        model: ModelHandle,
        seed: int = 0,
        grammar: Grammar | None = None,
        session_id: str | None = None,
    ):
        _check_schema_match(dataset, model)
        self.id = session_id or uuid.uuid4().hex
        self.dataset = dataset
        self.model = model
        self.seed = int(seed)
        self.grammar = grammar or iema_grammar()
        self.history: list[BoundStep] = []
        self.context = Context()

    # -- state ------------------------------------------------------------------

    @property
    def prefix(self) -> tuple[str, ...]:
        return tuple(step.symbol for step in self.history)

    def next_steps(self) -> NextSteps:
        return self.grammar.next_steps(self.prefix)

    def _assert_valid_prefix(self) -> None:
        if not self.grammar.is_valid_prefix(self.prefix):
            raise SessionError(f"internal: history {self.prefix} is not a valid prefix")

    def _step_seed(self, timestamp: int) -> int:
        return (self.seed * 1_000_003 + timestamp * 7_919) & 0x7FFFFFFF

    # -- mutations -----------------------------------------------------------------

    def apply_step(self, symbol: str, params: Mapping | None = None) -> BoundStep:
        params = dict(params or {})
        permitted = self.grammar.next_steps(self.prefix).terminals
        if symbol not in permitted:
            raise StepRejectedError(
                f"step {symbol!r} is not permitted here; permitted: {list(permitted)}",
                permitted=permitted,
            )
        timestamp = len(self.history)
        payload, context_update = self._execute(symbol, params, timestamp)
        step = BoundStep(symbol=symbol, params=params, payload=payload, timestamp=timestamp)
        self.history.append(step)
        for key, value in context_update.items():
            setattr(self.context, key, value)
        self._assert_valid_prefix()
        return step

    def undo(self) -> None:
        if not self.history:
            raise SessionError("undo on empty history")
        self.history.pop()
        self._recompute_context()
        self._assert_valid_prefix()

    def _recompute_context(self) -> None:
        ctx = Context()
        for step in self.history:
            if step.symbol == "Select_Variable":
                ctx.variable = step.params["variable"]
            elif step.symbol in INSTANCE_SYMBOLS and "instance" in step.params:
                ctx.instance = step.params["instance"]
        self.context = ctx

    # -- parameter resolution ---------------------------------------------------------

    def _resolve_variable(self, params: Mapping, fallback_to_context: bool = True) -> str:
        var = params.get("variable")
        if var is None and fallback_to_context:
            var = self.context.variable
        if var is None:
            raise ParameterError(
                "no variable in scope: pass 'variable' or apply Select_Variable first"
            )
        if var not in self.dataset.column_ids:
            raise ParameterError(f"unknown variable {var!r}")
        return var

    def _resolve_instance(self, params: Mapping):
        ref = params.get("instance", self.context.instance)
        if ref is None:
            raise ParameterError("this step needs an 'instance' (row index or value map)")
        try:
            instance_ops.resolve_instance(self.dataset, self.model, ref)
        except Exception as e:
            raise ParameterError(str(e)) from None
        return ref

    def _resolve_loss(self, params: Mapping) -> str:
        kind = params.get("loss", default_loss(self.model.task))
        if kind not in ("rmse", "cross_entropy", "one_minus_auc"):
            raise ParameterError(f"unknown loss {kind!r}")
        return kind

    # -- step execution ------------------------------------------------------------------

    def _execute(self, symbol: str, params: dict, timestamp: int) -> tuple[dict, dict]:
        d, m = self.dataset, self.model
        seed = int(params.get("seed", self._step_seed(timestamp)))
        try:
            if symbol == "Select_Variable":
                var = params.get("variable")
                if var is None:
                    raise ParameterError("Select_Variable needs a 'variable'")
                if var not in m.variable_ids:
                    raise ParameterError(f"unknown variable {var!r}")
                return {"selected": var}, {"variable": var}

            if symbol in INSTANCE_SYMBOLS:
                ref = self._resolve_instance(params)
                if symbol == "SHAP_Attribution":
                    mode = params.get("mode", "exact")
                    result = instance_ops.shap_attribution(
                        m, d, ref,
                        mode=mode,
                        b_permutations=int(params.get("b_permutations", 200)),
                        seed=seed,
                        background_rows=params.get("background_rows"),
                    )
                elif symbol == "BD_Attribution":
                    result = instance_ops.breakdown_attribution(
                        m, d, ref,
                        order=params.get("order"),
                        background_rows=params.get("background_rows"),
                        seed=seed,
                    )
                else:
                    result = instance_ops.lime_attribution(
                        m, d, ref,
                        n_samples=int(params.get("n_samples", 1000)),
                        kernel_width=params.get("kernel_width"),
                        top_k=params.get("top_k"),
                        seed=seed,
                    )
                return result.to_payload(), {"instance": ref}

            if symbol == "Ceteris_Paribus":
                ref = self._resolve_instance(params)
                var = self._resolve_variable(params)
                result = instance_ops.ceteris_paribus(
                    m, d, ref, var, grid_size=int(params.get("grid_size", 101))
                )
                return result.to_payload(), {}

            if symbol in DISTRIBUTION_KINDS:
                var = self._resolve_variable(params)
                result = data_ops.distribution_summary(d, var, DISTRIBUTION_KINDS[symbol])
                return result.to_payload(), {}

            if symbol == "Scatter_Plot":
                var = self._resolve_variable(params)
                result = data_ops.data_profile(
                    d, var, bins=int(params.get("bins", 10)), seed=seed
                )
                return result.to_payload(), {}

            if symbol == "Mosaic_Plot":
                var_a = params.get("var_a", self.context.variable)
                var_b = params.get("var_b")
                if var_a is None or var_b is None:
                    raise ParameterError("Mosaic_Plot needs 'var_a' (or context) and 'var_b'")
                result = data_ops.mosaic_table(d, var_a, var_b)
                return result.to_payload(), {}

            if symbol == "Pairwise_Correlation":
                result = data_ops.pairwise_correlation(d, method=params.get("method", "pearson"))
                return result.to_payload(), {}

            if symbol == "Graphical_Networks":
                result = data_ops.correlation_network(
                    d,
                    threshold=float(params.get("threshold", 0.3)),
                    method=params.get("method", "pearson"),
                )
                return result.to_payload(), {}

            if symbol == "Partial_Dependence":
                var = self._resolve_variable(params)
                result = model_ops.partial_dependence(
                    m, d, var,
                    grid_size=int(params.get("grid_size", 101)),
                    instance_cap=params.get("instance_cap"),
                    seed=seed,
                )
                return result.to_payload(), {}

            if symbol == "Accumulated_Local":
                var = self._resolve_variable(params)
                result = model_ops.accumulated_local_effects(
                    m, d, var, k_bins=int(params.get("k_bins", 10))
                )
                return result.to_payload(), {}

            if symbol == "SHAP_Dependence":
                var = self._resolve_variable(params)
                result = model_ops.shap_dependence(
                    m, d, var,
                    mode=params.get("mode", "exact"),
                    b_permutations=int(params.get("b_permutations", 200)),
                    seed=seed,
                    instance_cap=params.get("instance_cap"),
                    background_rows=params.get("background_rows"),
                )
                return result.to_payload(), {}

            if symbol == "Permutational_Importance":
                result = model_ops.permutation_importance(
                    m, d,
                    self._resolve_loss(params),
                    b_repeats=int(params.get("b_repeats", 10)),
                    seed=seed,
                )
                return result.to_payload(), {}

            if symbol == "LOCO_Importance":
                result = model_ops.loco_importance(m, d, self._resolve_loss(params))
                return result.to_payload(), {}

            if symbol == "SHAP_Importance":
                result = model_ops.shap_importance(
                    m, d,
                    mode=params.get("mode", "exact"),
                    b_permutations=int(params.get("b_permutations", 200)),
                    seed=seed,
                    instance_cap=params.get("instance_cap"),
                    background_rows=params.get("background_rows"),
                )
                return result.to_payload(), {}
        except (ParameterError, CapabilityError):
            raise
        except Exception as e:
            # invalid arguments surface as parameter errors; the step is not appended
            raise ParameterError(str(e)) from e
        raise ParameterError(f"no operation mapped for symbol {symbol!r}")

    # -- export --------------------------------------------------------------------------

    def export_bundle(self) -> dict:
        ns = self.next_steps()
        return {
            "iema-bundle": 1,
            "seed": self.seed,
            "dataset": self.dataset.summary(),
            "model": self.model.card(),
            "grammar": self.grammar.to_json(),
            "history": [step.to_doc() for step in self.history],
            "next_steps": {
                "permitted": list(ns.terminals),
                "end_of_dialogue": ns.end_of_dialogue,
            },
        }


def _check_schema_match(dataset: Dataset, model: ModelHandle) -> None:
    predictors = set(dataset.predictor_ids)
    schema_ids = set(model.variable_ids)
    missing = sorted(schema_ids - predictors)
    extra = sorted(predictors - schema_ids)
    if missing or extra:
        raise SessionError(
            f"model schema does not match dataset predictors; "
            f"missing in dataset: {missing}, unused by model: {extra}"
        )
    for f in model.schema:
        col = dataset.column(f.id)
        if col.kind != f.kind:
            raise SessionError(
                f"variable {f.id!r} is {col.kind} in the dataset but {f.kind} in the model"
            )


def new_session(dataset: Dataset, model: ModelHandle, seed: int = 0) -> Session:
    return Session(dataset, model, seed=seed)
