"""Config ingestion, atomic file output and run manifests."""
from __future__ import annotations

import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import ZoneConfig

ZONE_FIELDS = ("lambda_v", "mu_c", "c_points", "n_classes", "p", "lambda_c")
SIM_FIELDS = ("mode", "horizon", "warmup", "seed", "engine", "batches", "trace_points")


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def split_config(doc: dict, source: str = "<config>", extra: tuple[str, ...] = SIM_FIELDS) -> tuple[dict, dict]:
    """Partition a config document into zone and simulation fields; unknown keys are errors."""
    unknown = sorted(set(doc) - set(ZONE_FIELDS) - set(extra))
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {unknown}")
    zone = {k: doc[k] for k in ZONE_FIELDS if k in doc}
    sim = {k: doc[k] for k in extra if k in doc}
    return zone, sim


def zone_from_dict(d: dict, source: str = "<config>") -> ZoneConfig:
    missing = [k for k in ZONE_FIELDS if k not in d]
    if missing:
        raise ConfigError(f"{source}: missing field(s) {missing}")
    try:
        return ZoneConfig(**d)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_zone(path: str | Path) -> tuple[ZoneConfig, dict]:
    zone, sim = split_config(read_json(path), str(path))
    return zone_from_dict(zone, str(path)), sim


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def write_atomic(path: str | Path, text: str) -> Path:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def tool_version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    parameters: dict
    seeds: list[int] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    argv: list[str] = field(default_factory=lambda: list(sys.argv))
    tool_version: str = field(default_factory=tool_version)
    started: float = field(default_factory=time.time)
    wall_clock_s: float | None = None

    def finish(self) -> "RunManifest":
        self.wall_clock_s = time.time() - self.started
        return self

    def write_beside(self, out: str | Path) -> Path:
        return write_atomic(f"{out}.manifest.json", dumps(asdict(self.finish())))
