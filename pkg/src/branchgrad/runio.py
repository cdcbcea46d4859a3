"""Output plumbing: stable CSV tables, JSON run manifests, config files.

Floats are written with ``repr`` (shortest round-trip form) and rows in a
deterministic order, so re-running a command from its manifest reproduces
every output byte for byte. Manifests deliberately carry no timestamps.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

__all__ = [
    "ConfigError",
    "RunManifest",
    "format_cell",
    "params_hash",
    "parse_config_file",
    "write_csv",
]


class ConfigError(ValueError):
    """Malformed config file or unusable option value."""


def format_cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])


def _canonical(config: dict[str, Any]) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def params_hash(config: dict[str, Any]) -> str:
    return hashlib.sha256(_canonical(config).encode("utf-8")).hexdigest()


@dataclass(slots=True)
class RunManifest:
    """Everything needed to reproduce one command run, defaults materialized."""

    command: str
    seed: int
    config: dict[str, Any]
    outputs: list[str]
    version: str
    tool: str = "branchgrad"
    params_sha256: str = field(default="")

    def __post_init__(self) -> None:
        if not self.params_sha256:
            self.params_sha256 = params_hash(self.config)

    def write(self, path: str | Path) -> None:
        doc = {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "outputs": self.outputs,
            "params_sha256": self.params_sha256,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
        try:
            manifest = cls(
                command=doc["command"],
                seed=doc["seed"],
                config=doc["config"],
                outputs=list(doc["outputs"]),
                version=doc["version"],
                tool=doc.get("tool", "branchgrad"),
                params_sha256=doc.get("params_sha256", ""),
            )
        except KeyError as exc:
            raise ConfigError(f"manifest {path} is missing field {exc}") from exc
        expected = params_hash(manifest.config)
        if manifest.params_sha256 != expected:
            raise ConfigError(f"manifest {path} params_sha256 does not match its config")
        return manifest


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Plain-text ``key = value`` pairs; blank lines and # comments ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = value.strip()
    return out
