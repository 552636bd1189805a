"""Bundled declarative scripts: spaces, fibrations, scenarios, golden tables."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Dict, List

from ..spaces import Fibration, Space, run_script

_PKG = resources.files(__name__)


def _names(prefix: str, suffix: str = ".json") -> List[str]:
    out = []
    for entry in _PKG.iterdir():
        n = entry.name
        if n.startswith(prefix) and n.endswith(suffix):
            out.append(n[len(prefix) : -len(suffix)])
    return sorted(out)


def _load_json(filename: str) -> dict:
    return json.loads((_PKG / filename).read_text(encoding="utf-8"))


def space_names() -> List[str]:
    return _names("space_")


def fibration_names() -> List[str]:
    return _names("fib_")


def scenario_names() -> List[str]:
    return _names("scen_")


def golden_names() -> List[str]:
    golden = _PKG / "golden"
    return sorted(
        e.name[: -len(".tsv")] for e in golden.iterdir() if e.name.endswith(".tsv")
    )


def load_space_script(name: str) -> dict:
    if name not in space_names():
        raise KeyError(f"no space named {name!r}; available: {space_names()}")
    return _load_json(f"space_{name}.json")


@lru_cache(maxsize=None)
def load_space(name: str) -> Space:
    return run_script(load_space_script(name))


def load_fibration_script(name: str) -> dict:
    if name not in fibration_names():
        raise KeyError(f"no fibration named {name!r}; available: {fibration_names()}")
    return _load_json(f"fib_{name}.json")


@lru_cache(maxsize=None)
def load_fibration(name: str) -> Fibration:
    script = load_fibration_script(name)
    return Fibration(
        name=script["name"],
        source=load_space(script["source"]),
        target=load_space(script["target"]),
        pullback=script["pullback"],
    )


def load_scenario(name: str) -> dict:
    if name not in scenario_names():
        raise KeyError(f"no scenario named {name!r}; available: {scenario_names()}")
    return _load_json(f"scen_{name}.json")


def load_golden(name: str) -> str:
    if name not in golden_names():
        raise KeyError(f"no golden table named {name!r}; available: {golden_names()}")
    return (_PKG / "golden" / f"{name}.tsv").read_text(encoding="utf-8")


def golden_tables() -> Dict[str, str]:
    return {name: load_golden(name) for name in golden_names()}
