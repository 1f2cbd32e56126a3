import json
import os
from typing import Any, Dict, List, Union

import yaml


def load_file_into_dict(file_path: str) -> dict:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")

    file_extension = os.path.splitext(file_path)[1].lower()

    if file_extension == ".json":
        with open(file_path, "r") as json_file:
            data = json.load(json_file)
    elif file_extension in [".yaml", ".yml"]:
        with open(file_path, "r") as yaml_file:
            data = yaml.safe_load(yaml_file)
    else:
        raise ValueError("Unsupported file type. Please provide a JSON or YAML file.")

    return data or {}


def flatten_sections(data: Dict[str, Any], sections=("model", "set", "estimation", "output")) -> Dict[str, Any]:
    """Lift the keys of known section headers into a single flat mapping.

    Keys defined at top level win over keys of the same name inside a section.
    """
    flat: Dict[str, Any] = {}
    for section in sections:
        value = data.get(section)
        if isinstance(value, dict):
            flat.update(value)
    for key, value in data.items():
        if key in sections and isinstance(value, dict):
            continue
        flat[key] = value
    return flat


def parse_k_spec(spec: Union[str, int, List[int], None]) -> List[int]:
    """Parse a k specification: ``3``, ``"1,2,5"`` or ``"1..10"``."""
    if spec is None:
        return []
    if isinstance(spec, int):
        return [spec]
    if isinstance(spec, (list, tuple)):
        return [int(k) for k in spec]
    values: List[int] = []
    for part in str(spec).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            start, stop = part.split("..", 1)
            lo, hi = int(start), int(stop)
            if hi < lo:
                raise ValueError(f"Empty k range: {part}")
            values.extend(range(lo, hi + 1))
        else:
            values.append(int(part))
    if any(k < 1 for k in values):
        raise ValueError(f"k values must be positive: {spec}")
    return values


def parse_float_list(spec: Union[str, float, List[float], None]) -> List[float]:
    if spec is None:
        return []
    if isinstance(spec, (int, float)):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    return [float(v) for v in str(spec).split(",") if v.strip()]
