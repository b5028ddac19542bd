"""Named example classes, shipped as JSON data files."""
from __future__ import annotations

import json
import re
from importlib import resources
from string import Template

from .stokes import ClassError, IrregularClass


class PresetError(KeyError):
    """Unknown preset or bad preset parameters."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown preset"


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__package__).joinpath("presets").iterdir()
                  if p.name.endswith(".json"))


def parse_name(text: str) -> tuple[str, dict[str, int]]:
    """``"p1h n=2 k=3"`` or ``"p1h(n=2,k=3)"`` -> ("p1h", {"n": 2, "k": 3})."""
    m = re.fullmatch(r"\s*([A-Za-z_][\w-]*)\s*(?:\((.*)\)|(.*))\s*", text)
    if not m:
        raise PresetError(f"cannot parse preset name {text!r}")
    name, args = m.group(1), (m.group(2) if m.group(2) is not None else m.group(3)) or ""
    params = {}
    for tok in re.split(r"[\s,]+", args.strip()):
        if not tok:
            continue
        key, sep, val = tok.partition("=")
        if not sep or not val.strip().lstrip("-").isdigit():
            raise PresetError(f"bad preset parameter {tok!r} in {text!r}")
        params[key.strip()] = int(val)
    return name, params


def load_preset_data(text: str) -> dict:
    name, params = parse_name(text)
    path = resources.files(__package__).joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise PresetError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    raw = path.read_text()
    data = json.loads(raw)
    defaults = data.get("params", {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise PresetError(f"preset {name!r} has no parameter(s) {sorted(unknown)}")
    values = {**defaults, **params}
    if name == "p1h" and (values["k"] < 1 or values["k"] % 2 == 0 or values["n"] < 1):
        raise PresetError("p1h needs n >= 1 and odd k >= 1")
    if values:
        cls_text = Template(json.dumps(data["class"])).substitute({k: str(v) for k, v in values.items()})
        data["class"] = json.loads(cls_text)
        for entry in data["class"]["entries"]:
            entry["mult"] = int(entry["mult"])
    data["name"] = name
    data["params"] = values
    data["label"] = name + "".join(f" {k}={values[k]}" for k in defaults)
    return data


def load_preset(text: str) -> IrregularClass:
    data = load_preset_data(text)
    try:
        return IrregularClass.from_json(data["class"])
    except ClassError as exc:
        raise PresetError(f"preset {text!r} is malformed: {exc}") from exc
