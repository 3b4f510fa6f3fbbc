"""JSON reading and writing for spaces, functions, operators and reports."""

from __future__ import annotations

import json
import os
from pathlib import Path

from . import _num
from .daugavet import DualFunctional, LinearOperator
from .errors import BadSpec, DaugavetError
from .lipschitz import GlueSetup, LipFunction, PartialFunction
from .metric import MetricSpace, generate_space, validate_metric


def read_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DaugavetError("FILE_NOT_FOUND", f"no such file: {path}", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise DaugavetError("BAD_JSON", f"{path}: {exc}", path=str(path)) from None


def parse_json_arg(text: str) -> object:
    """Inline JSON, or ``@file`` to read it from a file."""
    if text.startswith("@"):
        return read_json(text[1:])
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DaugavetError("BAD_JSON", f"cannot parse {text!r}: {exc}") from None


def dumps(obj) -> str:
    """Deterministic serialisation used for every report."""
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_text(path, text: str) -> None:
    if path is None or path == "-":
        print(text, end="")
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def space_from_obj(obj, mode: str | None = None, base: str | os.PathLike | None = None) -> MetricSpace:
    """A space from a generator spec (has "kind"), an inline matrix, or a file reference."""
    if isinstance(obj, str):
        path = Path(obj) if base is None or Path(obj).is_absolute() else Path(base) / obj
        return space_from_obj(read_json(path), mode, path.parent)
    if not isinstance(obj, dict):
        raise BadSpec(message="a space must be a JSON object or a file reference")
    if "space" in obj and "dist" not in obj and "kind" not in obj:
        return space_from_obj(obj["space"], mode, base)
    if "kind" in obj:
        spec = dict(obj)
        if mode is not None:
            spec["mode"] = mode
        return generate_space(spec)
    if "dist" not in obj:
        raise BadSpec(message="a space needs either 'kind' or 'dist'")
    m = mode or obj.get("mode", _num.FLOAT)
    return validate_metric(obj.get("labels"), obj["dist"], m, obj.get("coords"))


def _space_of(obj, space, mode, base):
    if space is not None:
        return space
    if "space" not in obj:
        raise BadSpec(message="no space given (inline 'space' or --space/--gen)")
    return space_from_obj(obj["space"], mode, base)


def function_from_obj(obj, space: MetricSpace | None = None, mode=None, base=None) -> LipFunction:
    if not isinstance(obj, dict) or "values" not in obj:
        raise BadSpec(message="a function needs 'values'")
    K = _space_of(obj, space, mode, base)
    return LipFunction(K, obj["values"])


def partial_from_obj(obj, space: MetricSpace | None = None, mode=None, base=None) -> PartialFunction:
    if not isinstance(obj, dict) or not {"values", "subset", "L"} <= set(obj):
        raise BadSpec(message="a partial function needs 'subset', 'values' and 'L'")
    K = _space_of(obj, space, mode, base)
    return PartialFunction(K, obj["subset"], obj["values"], obj["L"])


def functional_from_obj(obj, space: MetricSpace | None = None, mode=None, base=None) -> DualFunctional:
    if isinstance(obj, list):
        obj = {"coeffs": obj}
    if not isinstance(obj, dict) or "coeffs" not in obj:
        raise BadSpec(message="a functional needs 'coeffs'")
    K = _space_of(obj, space, mode, base)
    return DualFunctional(K, obj["coeffs"])


def operator_from_obj(obj, space: MetricSpace | None = None, mode=None, base=None) -> LinearOperator:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise BadSpec(message="an operator needs 'kind'")
    K = _space_of(obj, space, mode, base)
    return LinearOperator.from_dict(K, obj)


def glue_from_obj(obj, space: MetricSpace | None = None, mode=None, base=None) -> GlueSetup:
    keys = {"B", "C", "C_tilde", "r", "delta", "f"}
    if not isinstance(obj, dict) or not keys <= set(obj):
        raise BadSpec(message=f"a glue setup needs {sorted(keys)}")
    K = _space_of(obj, space, mode, base)
    f = obj["f"]["values"] if isinstance(obj["f"], dict) else obj["f"]
    return GlueSetup(K, obj["B"], obj["C"], obj["C_tilde"], obj["r"], obj["delta"], LipFunction(K, f))


def glue_to_obj(setup: GlueSetup) -> dict:
    mode = setup.space.mode
    return {"space": setup.space.to_dict(), "B": list(setup.B), "C": list(setup.C),
            "C_tilde": list(setup.C_tilde), "r": _num.encode(setup.r, mode),
            "delta": _num.encode(setup.delta, mode),
            "f": _num.encode_array(setup.values(), mode)}
