"""Interactive explanatory model analysis over tabular data.

The package computes data-, instance-, and model-level explanations of
black-box predictive models and drives human-model explanation dialogues
with a context-free grammar: every session history is a valid prefix of the
dialogue language, and the grammar enumerates the steps that may follow.
"""

from .bundle import export_bundle_text, import_bundle, parse_bundle, serialize_bundle
from .data import (
    Column,
    CorrelationMatrix,
    Dataset,
    DistributionSummary,
    correlation_network,
    data_profile,
    distribution_summary,
    load_dataset,
    mosaic_table,
    pairwise_correlation,
)
from .errors import (
    CapabilityError,
    DataError,
    ExplanationError,
    ExportError,
    GrammarError,
    IemaError,
    ModelError,
    ParameterError,
    SessionError,
    StepRejectedError,
)
from .grammar import Grammar, Node, Rule, iema_grammar, render_tree
from .html_export import export_html, extract_bundle_text
from .instance_explain import (
    Attribution,
    Profile,
    breakdown_attribution,
    ceteris_paribus,
    lime_attribution,
    shap_attribution,
)
from .model_explain import (
    ImportanceResult,
    ModelProfile,
    accumulated_local_effects,
    loco_importance,
    partial_dependence,
    permutation_importance,
    shap_dependence,
    shap_importance,
)
from .models import (
    LinearModel,
    ModelHandle,
    TreeEnsembleModel,
    fit_linear,
    load_model,
    loss,
    predict_batch,
    refit_without,
    schema_from_dataset,
)
from .report import render_step_figure, write_report
from .session import BoundStep, Session, new_session

__version__ = "0.1.0"
