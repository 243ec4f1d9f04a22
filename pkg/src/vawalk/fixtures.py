"""Built-in groups and measures, and the JSON formats for both.

Group references: ``"Z^<m>"`` (``"Z"`` is ``"Z^1"``), ``"Dinf"``, ``"Tri"``, and
products written ``"A*B"``.  Measure references are ``"<group>:<name>"``.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Union

from .group import GroupSpec, GroupSpecError, make_spec, product_spec
from .measure import FiniteMeasure, MeasureError

ROT = ((0, -1), (1, -1))
ROT2 = ((-1, 1), (-1, 0))


class ConfigError(ValueError):
    """Unusable input: unknown name, unreadable file or schema violation."""


def z_spec(m: int) -> GroupSpec:
    eye = [[int(i == j) for j in range(m)] for i in range(m)]
    return make_spec(m, [[0]], [eye], name=f"Z^{m}" if m != 1 else "Z")


def dinf_spec() -> GroupSpec:
    """Z x| Z/2 with the reflection acting by -1."""
    return make_spec(1, [[0, 1], [1, 0]], [[[1]], [[-1]]], name="Dinf")


def tri_spec() -> GroupSpec:
    """Z^2 x| Z/3, the rotation of order three on the hexagonal lattice."""
    eye = ((1, 0), (0, 1))
    mul = [[(a + b) % 3 for b in range(3)] for a in range(3)]
    return make_spec(2, mul, [eye, ROT, ROT2], name="Tri")


@lru_cache(maxsize=None)
def builtin_group(name: str) -> GroupSpec:
    name = name.strip()
    if "*" in name:
        left, right = name.split("*", 1)
        return product_spec(builtin_group(left), builtin_group(right))
    if name == "Z":
        return z_spec(1)
    if re.fullmatch(r"Z\^\d+", name):
        return z_spec(int(name[2:]))
    if name == "Dinf":
        return dinf_spec()
    if name == "Tri":
        return tri_spec()
    raise ConfigError(f"group: unknown built-in group {name!r}")


def _dinf_generators(spec: GroupSpec):
    return spec.element([0], 1), spec.element([1], 1)


def _tri_generators(spec: GroupSpec):
    return spec.element([0, 0], 1), spec.element([1, 0], 1), spec.element([1, 1], 1)


def _builtin_measure(group: str, name: str) -> FiniteMeasure:
    spec = builtin_group(group)
    if group == "Dinf":
        s1, s2 = _dinf_generators(spec)
        e = spec.identity()
        table = {
            "lsrw": [s1, s2, e],
            "srw": [s1, s2],
            "ape": [s1, s2, spec.multiply(s1, s2), spec.multiply(s2, s1)],
        }
        if name in table:
            return FiniteMeasure.uniform(spec, table[name])
    elif group == "Tri" and name == "uniform6":
        gens = _tri_generators(spec)
        return FiniteMeasure.uniform(spec, list(gens) + [spec.invert(s) for s in gens])
    elif group == "Z":
        if name == "lazy":
            return FiniteMeasure.uniform(spec, [spec.lattice([k]) for k in (-1, 0, 1)])
        if name == "drift":
            return FiniteMeasure.from_mapping(
                spec, {spec.lattice([1]): Fraction(2, 3), spec.lattice([-1]): Fraction(1, 3)})
    elif group == "Dinf*Z" and name == "nu":
        dinf, z = spec.factors
        s1, s2 = _dinf_generators(dinf)
        e = dinf.identity()
        atoms = [(s1, 0), (s2, 1), (e, -1), (e, 0)]
        return FiniteMeasure.uniform(spec, [spec.pair(a, z.lattice([k])) for a, k in atoms])
    raise ConfigError(f"measure: unknown built-in measure {group}:{name}")


BUILTIN_MEASURES = ("Dinf:lsrw", "Dinf:srw", "Dinf:ape", "Tri:uniform6", "Z:lazy", "Z:drift",
                    "Dinf*Z:nu")


# -- JSON ---------------------------------------------------------------------------------


def group_from_json(obj) -> GroupSpec:
    if isinstance(obj, str):
        return builtin_group(obj)
    if not isinstance(obj, dict):
        raise ConfigError("group: expected a built-in name or an object")
    for key in ("m", "f_order", "mul", "ad"):
        if key not in obj:
            raise ConfigError(f"group: missing field {key!r}")
    if not isinstance(obj["m"], int) or obj["m"] < 0:
        raise ConfigError("m: expected a nonnegative integer")
    if not isinstance(obj["f_order"], int) or len(obj["mul"]) != obj["f_order"]:
        raise ConfigError("f_order: does not match the size of mul")
    try:
        return make_spec(obj["m"], obj["mul"], obj["ad"], obj.get("tau"))
    except GroupSpecError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"group: malformed entries ({exc})") from exc


def _parse_weight(p):
    if isinstance(p, bool):
        raise ConfigError("p: boolean is not a probability")
    if isinstance(p, float):
        return p
    if isinstance(p, (int, str)):
        try:
            return Fraction(p)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"p: cannot parse {p!r}") from exc
    raise ConfigError(f"p: cannot parse {p!r}")


def measure_from_json(obj) -> FiniteMeasure:
    if not isinstance(obj, dict):
        raise ConfigError("measure: expected an object")
    if "group" not in obj:
        raise ConfigError("measure: missing field 'group'")
    if "atoms" not in obj or not isinstance(obj["atoms"], list) or not obj["atoms"]:
        raise ConfigError("atoms: expected a nonempty list")
    spec = group_from_json(obj["group"])
    weights = {}
    for i, atom in enumerate(obj["atoms"]):
        if not isinstance(atom, dict):
            raise ConfigError(f"atoms[{i}]: expected an object")
        for key in ("v", "x", "p"):
            if key not in atom:
                raise ConfigError(f"atoms[{i}].{key}: missing")
        try:
            g = spec.element(atom["v"], atom["x"])
        except (GroupSpecError, TypeError, ValueError) as exc:
            raise ConfigError(f"atoms[{i}]: {exc}") from exc
        if g in weights:
            raise ConfigError(f"atoms[{i}]: duplicate element")
        weights[g] = _parse_weight(atom["p"])
    try:
        return FiniteMeasure.from_mapping(spec, weights)
    except MeasureError as exc:
        raise ConfigError(f"atoms: {exc}") from exc


def _load_json_file(path: Union[str, Path]):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc


def load_group(ref: str) -> GroupSpec:
    if Path(ref).suffix == ".json" or Path(ref).is_file():
        return group_from_json(_load_json_file(ref))
    return builtin_group(ref)


def load_measure(ref: str) -> FiniteMeasure:
    """Built-in ``"<group>:<name>"`` or a path to a measure JSON file."""
    if Path(ref).suffix == ".json" or Path(ref).is_file():
        return measure_from_json(_load_json_file(ref))
    if ":" not in ref:
        raise ConfigError(f"measure: {ref!r} is neither a file nor '<group>:<name>'")
    group, name = ref.rsplit(":", 1)
    return _builtin_measure(group, name)
