"""Bundle serialization: the versioned, re-importable session document."""

from __future__ import annotations

import json

import jsonschema

from .data import Dataset
from .errors import ExportError
from .models import ModelHandle
from .session import BoundStep, Session

BUNDLE_VERSION = 1

BUNDLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["iema-bundle", "seed", "dataset", "model", "grammar", "history", "next_steps"],
    "properties": {
        "iema-bundle": {"const": BUNDLE_VERSION},
        "seed": {"type": "integer"},
        "dataset": {
            "type": "object",
            "required": ["name", "n_rows", "target", "columns"],
            "properties": {
                "name": {"type": "string"},
                "n_rows": {"type": "integer", "minimum": 2},
                "target": {"type": "string"},
                "columns": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "kind"],
                        "properties": {
                            "id": {"type": "string"},
                            "kind": {"enum": ["numeric", "categorical"]},
                        },
                    },
                },
            },
        },
        "model": {
            "type": "object",
            "required": ["id", "task", "refittable", "schema"],
            "properties": {
                "task": {"enum": ["regression", "binary_classification"]},
                "refittable": {"type": "boolean"},
            },
        },
        "grammar": {
            "type": "object",
            "required": ["nonterminals", "terminals", "start", "rules"],
            "properties": {
                "rules": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["lhs", "rhs"],
                        "properties": {
                            "lhs": {"type": "string"},
                            "rhs": {"type": "array", "items": {"type": "string"}},
                        },
                    },
                },
            },
        },
        "history": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["symbol", "params", "payload", "timestamp"],
                "properties": {
                    "symbol": {"type": "string"},
                    "params": {"type": "object"},
                    "payload": {"type": "object"},
                    "timestamp": {"type": "integer", "minimum": 0},
                },
            },
        },
        "next_steps": {
            "type": "object",
            "required": ["permitted", "end_of_dialogue"],
            "properties": {
                "permitted": {"type": "array", "items": {"type": "string"}},
                "end_of_dialogue": {"type": "boolean"},
            },
        },
    },
}


def validate_bundle(doc: dict) -> None:
    try:
        jsonschema.validate(doc, BUNDLE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ExportError(f"bundle does not match the schema: {e.message}") from None


def serialize_bundle(doc: dict) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    validate_bundle(doc)
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def export_bundle_text(session: Session) -> str:
    return serialize_bundle(session.export_bundle())


def parse_bundle(text: str | bytes) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ExportError(f"bundle is not valid JSON: {e}") from None
    validate_bundle(doc)
    return doc


def import_bundle(doc: dict | str | bytes, dataset: Dataset, model: ModelHandle) -> Session:
    """Rebuild a session (history, payloads, context) from an exported bundle.

    The bundle stores only summaries of the data and model, so the actual
    objects must be supplied; they are checked against the recorded cards.
    """
    if not isinstance(doc, dict):
        doc = parse_bundle(doc)
    else:
        validate_bundle(doc)
    if doc["dataset"]["target"] != dataset.target or doc["dataset"]["n_rows"] != dataset.n_rows:
        raise ExportError("bundle dataset summary does not match the supplied dataset")
    recorded = {c["id"] for c in doc["dataset"]["columns"]}
    if recorded != set(dataset.column_ids):
        raise ExportError("bundle dataset columns do not match the supplied dataset")
    if doc["model"]["schema"] != model.card()["schema"]:
        raise ExportError("bundle model card does not match the supplied model")

    session = Session(dataset, model, seed=doc["seed"])
    for entry in doc["history"]:
        session.history.append(
            BoundStep(
                symbol=entry["symbol"],
                params=entry["params"],
                payload=entry["payload"],
                timestamp=entry["timestamp"],
            )
        )
    session._recompute_context()
    session._assert_valid_prefix()
    return session
