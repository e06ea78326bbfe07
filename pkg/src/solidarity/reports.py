"""Run-report plumbing shared by the CLI commands: atomic artifact writes,
input digests, and the machine-readable report JSON.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

RUN_REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": [
        "schema_version",
        "command",
        "version",
        "created_utc",
        "params",
        "seeds",
        "inputs",
        "outputs",
        "counts",
        "status",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "command": {"type": "string"},
        "version": {"type": "string"},
        "created_utc": {"type": "string"},
        "params": {"type": "object"},
        "seeds": {"type": "object"},
        "inputs": {"type": "object", "additionalProperties": {"type": "string"}},
        "outputs": {"type": "array", "items": {"type": "string"}},
        "counts": {"type": "object"},
        "status": {"enum": ["ok"]},
    },
}


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@contextmanager
def atomic_path(final: str | Path):
    """Yield a temporary path in the target directory, moved over `final` on
    success; interrupted runs leave no partial artifact behind."""
    final = Path(final)
    final.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=final.parent, prefix=f".{final.name}.", suffix=".tmp")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, final)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


@contextmanager
def atomic_text(final: str | Path, newline: str | None = None):
    with atomic_path(final) as tmp:
        with open(tmp, "w", encoding="utf-8", newline=newline) as f:
            yield f


@dataclass
class RunReport:
    """Machine-readable record of one command invocation."""

    command: str
    params: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs.append(str(path))

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "command": self.command,
            "version": __version__,
            "created_utc": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "params": self.params,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "counts": self.counts,
            "status": "ok",
        }

    def write(self, path: str | Path) -> None:
        with atomic_text(path) as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
            f.write("\n")
