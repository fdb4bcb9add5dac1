"""
Checkpoint I/O and teacher-to-student parameter inheritance.

A checkpoint is a JSON document::

    {"format_version": 1,
     "architecture": {...} | null,
     "params": [{"name": ..., "shape": [...], "data": [...]}, ...]}

Floats are written with Python's shortest round-trip repr, so
save -> load -> save is byte-identical.
"""
import json
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from nn.module import Module, Param
from utils.errors import CheckpointError
from utils.io import PathLike, atomic_write_text

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
CHECKPOINT_SUFFIX = ".ckpt.json"

ParamSource = Union[Module, Mapping[str, Param]]


@dataclass
class Checkpoint:
    params: "OrderedDict[str, np.ndarray]"
    architecture: Optional[Dict[str, Any]] = None


@dataclass
class InheritResult:
    copied: int
    copied_names: List[str] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)


def _named(source: ParamSource) -> Mapping[str, Param]:
    return source.named_parameters() if isinstance(source, Module) else source


def checkpoint_text(source: ParamSource, architecture: Optional[Dict[str, Any]] = None) -> str:
    entries = [
        {"name": name, "shape": list(p.shape), "data": p.value.data.reshape(-1).tolist()}
        for name, p in _named(source).items()
    ]
    doc = {"format_version": FORMAT_VERSION, "architecture": architecture, "params": entries}
    return json.dumps(doc, separators=(",", ":")) + "\n"


def save_checkpoint(source: ParamSource, path: PathLike, architecture: Optional[Dict[str, Any]] = None) -> Path:
    if architecture is None and hasattr(source, "architecture"):
        architecture = source.architecture()
    target = atomic_write_text(path, checkpoint_text(source, architecture))
    logger.info(f"Saved checkpoint {target}")
    return target


def load_checkpoint(path: PathLike, net: Optional[Module] = None) -> Checkpoint:
    """Read a checkpoint; when ``net`` is given, load every parameter into it strictly."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Checkpoint format_version {version} != supported {FORMAT_VERSION}")
    params: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for entry in doc.get("params", []):
        shape = tuple(entry["shape"])
        data = np.asarray(entry["data"], dtype=np.float64)
        if data.size != int(np.prod(shape)):
            raise CheckpointError(f"{entry['name']}: {data.size} values for shape {shape}")
        params[entry["name"]] = data.reshape(shape)
    ckpt = Checkpoint(params=params, architecture=doc.get("architecture"))
    if net is not None:
        load_into(net, ckpt)
    return ckpt


def load_into(net: Module, ckpt: Checkpoint) -> None:
    named = net.named_parameters()
    missing = [name for name in named if name not in ckpt.params]
    if missing:
        raise CheckpointError(f"Checkpoint is missing parameter(s): {missing}")
    for name, p in named.items():
        data = ckpt.params[name]
        if data.shape != p.shape:
            raise CheckpointError(f"{name}: checkpoint shape {data.shape} != network shape {p.shape}")
        p.assign(data)
        p.momentum_buffer = np.zeros(p.shape)


def inherit_parameters(student: Module, teacher: Module) -> InheritResult:
    """Copy every teacher tensor whose name and shape match a student tensor."""
    teacher_params = teacher.named_parameters()
    result = InheritResult(copied=0)
    for name, p in student.named_parameters().items():
        source = teacher_params.get(name)
        if source is None:
            continue
        if source.shape != p.shape:
            result.skipped.append(name)
            continue
        p.assign(source.value.data)
        p.momentum_buffer = np.zeros(p.shape)
        result.copied += 1
        result.copied_names.append(name)
    if result.skipped:
        logger.info(f"Inheritance skipped {len(result.skipped)} shape-mismatched tensor(s): {result.skipped}")
    return result
