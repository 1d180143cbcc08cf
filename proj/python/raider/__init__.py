"""Python bindings for the raider core library."""

import json

from . import _core
from ._core import (
    ConflictError,
    Error,
    NotFoundError,
    ParseError,
    PlanError,
    Scene,
    ScriptError,
    TimeoutError,
    TransportError,
    ValidationError,
    judge_action,
    normalize_label,
    parse_tool_calls,
    render_plan,
)

__all__ = [
    "ConflictError",
    "Error",
    "NotFoundError",
    "ParseError",
    "PlanError",
    "Scene",
    "ScriptError",
    "TimeoutError",
    "TransportError",
    "ValidationError",
    "apply",
    "execute_plan",
    "judge_action",
    "load_scene",
    "normalize_label",
    "parse_tool_calls",
    "render_plan",
    "run_detection",
    "run_suite",
    "scene_dict",
]


def load_scene(source):
    """Scene from a path, a JSON string or a dict."""
    if isinstance(source, dict):
        return Scene.from_json(json.dumps(source))
    text = str(source)
    if text.lstrip().startswith("{"):
        return Scene.from_json(text)
    return Scene.load(text)


def scene_dict(scene):
    return json.loads(scene.to_json())


def apply(scene, mutation):
    scene.apply(json.dumps(mutation))


def execute_plan(plan, scene, answers=()):
    return json.loads(_core.execute_plan(plan, scene, json.dumps(list(answers))))


def run_detection(query, scene, responses, variant="QGEN_GRND", profile="household",
                  max_iterations=12):
    return json.loads(
        _core.run_detection(query, scene, list(responses), variant, profile, max_iterations))


def run_suite(corpus_dir, method="raider", workers=1):
    return json.loads(_core.run_suite(str(corpus_dir), method, workers))
