"""Typed coercion of ``--set section.key=VALUE`` overrides."""

import types
import typing
from dataclasses import fields, is_dataclass, replace
from typing import Any, Callable

from gazemask.config.base import suggest
from gazemask.errors import ConfigError

_TRUE_LITERALS: frozenset[str] = frozenset({"true", "1", "yes", "y", "on"})
_FALSE_LITERALS: frozenset[str] = frozenset({"false", "0", "no", "n", "off"})
_NONE_LITERALS: frozenset[str] = frozenset({"none", "null", ""})


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return bool(value)
    if isinstance(value, str):
        lowered = value.lower().strip()
        if lowered in _TRUE_LITERALS:
            return True
        if lowered in _FALSE_LITERALS:
            return False
    raise ValueError(f"cannot coerce {value!r} to bool")


def _parse_int(value: Any) -> int:
    if isinstance(value, str):
        value = value.strip().replace("_", "")
        as_float = float(value)
        if not as_float.is_integer():
            raise ValueError(f"{value!r} is not an integer")
        return int(as_float)
    return int(value)


COERCERS: dict[type, Callable[[Any], Any]] = {
    bool: _parse_bool,
    int: _parse_int,
    float: float,
    str: str,
}


def _unwrap_optional(annotation: Any) -> tuple[Any, bool]:
    args = typing.get_args(annotation)
    origin = typing.get_origin(annotation)
    if origin in (typing.Union, types.UnionType) and type(None) in args:
        rest = [a for a in args if a is not type(None)]
        return rest[0], True
    return annotation, False


def coerce_value(value: Any, annotation: Any) -> Any:
    """
    Convert ``value`` (usually a string) to the field type ``annotation``.

    Supports the scalar types of :data:`COERCERS`, ``X | None`` (``none`` /
    ``null`` / empty give ``None``), ``list[X]`` from comma-separated text
    and ``dict[str, str]`` from ``k:v,k:v`` text.
    """
    inner, optional = _unwrap_optional(annotation)
    if optional and isinstance(value, str) and value.strip().lower() in _NONE_LITERALS:
        return None
    if value is None and optional:
        return None

    origin = typing.get_origin(inner)
    if origin is list:
        (item_type,) = typing.get_args(inner) or (str,)
        items = value.split(",") if isinstance(value, str) else list(value)
        return [
            coerce_value(v.strip() if isinstance(v, str) else v, item_type)
            for v in items
            if v != ""
        ]
    if origin is dict:
        if not isinstance(value, str):
            return dict(value)
        pairs = [p.split(":", 1) for p in value.split(",") if p]
        if any(len(p) != 2 for p in pairs):
            raise ValueError(f"expected k:v pairs, got {value!r}")
        return {k.strip(): v.strip() for k, v in pairs}

    coercer = COERCERS.get(inner)
    if coercer is None:
        return value
    if inner is not bool and isinstance(value, bool):
        raise ValueError(f"refusing to coerce bool {value!r} to {inner.__name__}")
    return coercer(value)


def parse_assignment(text: str) -> tuple[list[str], str]:
    """Split ``a.b=value`` into ``(["a", "b"], "value")``."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like section.key=value")
    key, value = text.split("=", 1)
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {text!r} has an empty key")
    return path, value


def set_path(obj: Any, path: list[str], raw: str) -> Any:
    """
    Return a copy of the dataclass ``obj`` with ``path`` set to ``raw``.

    The value is coerced against the annotated field type; validation runs
    again through the dataclasses' ``__post_init__``.
    """
    if not is_dataclass(obj):
        raise ConfigError(f"cannot set {'.'.join(path)}: not a section")
    names = [f.name for f in fields(obj)]
    head, rest = path[0], path[1:]
    if head not in names:
        raise ConfigError(f"unknown key {head!r}{suggest(head, names)}")
    current = getattr(obj, head)
    if rest:
        return replace(obj, **{head: set_path(current, rest, raw)})
    if is_dataclass(current):
        raise ConfigError(f"{head!r} is a section; set one of its keys instead")
    hints = typing.get_type_hints(type(obj))
    try:
        value = coerce_value(raw, hints[head])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot coerce {head}={raw!r}: {exc}") from exc
    return replace(obj, **{head: value})
