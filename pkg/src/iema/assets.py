"""Access to the bundled demo files (synthetic table, models, dialogue script)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

ASSET_NAMES = (
    "players.csv",
    "players.config.json",
    "players_tree.json",
    "players_linear.json",
    "demo_script.json",
    "viewer.js",
)


def asset_path(name: str) -> Path:
    if name not in ASSET_NAMES:
        raise KeyError(f"unknown asset {name!r}; have {ASSET_NAMES}")
    return Path(str(resources.files("iema").joinpath("assets", name)))


def asset_text(name: str) -> str:
    return asset_path(name).read_text(encoding="utf-8")
