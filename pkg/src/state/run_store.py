"""
Free Gibbs Transport - Run Store

One directory per run: resolved config, CSV tables, JSON summaries,
SVG plots and ensembles, listed in manifest.json so that ``report``
can tell a finished run from one with missing artifacts.
"""

import csv
import io
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from core.config import config_to_dict
from core.errors import ArtifactError

from .ensemble_store import save_ensemble

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


class RunStore:
    """Writes artifacts of a single run and keeps its manifest current."""

    def __init__(self, root, command: str):
        self.root = Path(root)
        self.command = command
        self.artifacts: Dict[str, str] = {}
        self.status: Optional[str] = None
        self.root.mkdir(parents=True, exist_ok=True)

    def _write(self, name: str, text: str, kind: str) -> Path:
        target = self.root / name
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + ".tmp")
        tmp.write_text(text)
        os.replace(tmp, target)
        self.artifacts[name] = kind
        self.save_manifest()
        return target

    def write_config(self, config) -> Path:
        return self.write_json("config.json", config_to_dict(config))

    def write_json(self, name: str, data) -> Path:
        return self._write(name, json.dumps(data, indent=2, sort_keys=True, default=str), "json")

    def write_csv(self, name: str, rows: Iterable[dict], fieldnames: Optional[List[str]] = None):
        rows = list(rows)
        if fieldnames is None:
            fieldnames = list(rows[0]) if rows else []
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return self._write(name, buf.getvalue(), "csv")

    def write_svg(self, name: str, svg: str) -> Path:
        return self._write(name, svg, "svg")

    def write_text(self, name: str, text: str, kind: str = "text") -> Path:
        return self._write(name, text, kind)

    def write_ensemble(self, name: str, ens, meta: Optional[dict] = None) -> Path:
        target = save_ensemble(ens, self.root / name, meta)
        self.artifacts[name] = "hmt1"
        self.save_manifest()
        return target

    def finish(self, passed: bool) -> None:
        self.status = "passed" if passed else "failed"
        self.save_manifest()

    def save_manifest(self) -> bool:
        manifest = {
            "command": self.command,
            "status": self.status,
            "updated_at": _now(),
            "artifacts": dict(sorted(self.artifacts.items())),
        }
        try:
            target = self.root / MANIFEST
            tmp = target.with_suffix(".tmp")
            tmp.write_text(json.dumps(manifest, indent=2))
            os.replace(tmp, target)
            return True
        except OSError as e:
            logger.error(f"Failed to save manifest: {e}")
            return False


class RunRecord:
    """A finished run read back for reporting."""

    def __init__(self, root):
        self.root = Path(root)
        path = self.root / MANIFEST
        try:
            self.manifest = json.loads(path.read_text())
        except OSError as e:
            raise ArtifactError(f"{self.root}: no manifest ({e.strerror})") from e
        except json.JSONDecodeError as e:
            raise ArtifactError(f"{path}: invalid JSON at line {e.lineno}") from e

    @property
    def command(self) -> str:
        return self.manifest.get("command", "unknown")

    @property
    def status(self) -> Optional[str]:
        return self.manifest.get("status")

    @property
    def artifacts(self) -> Dict[str, str]:
        return self.manifest.get("artifacts", {})

    def missing(self) -> List[str]:
        return sorted(name for name in self.artifacts if not (self.root / name).exists())

    def read_json(self, name: str) -> Optional[dict]:
        path = self.root / name
        if name not in self.artifacts or not path.exists():
            return None
        return json.loads(path.read_text())

    def read_csv(self, name: str) -> List[dict]:
        path = self.root / name
        if name not in self.artifacts or not path.exists():
            return []
        with open(path, newline="") as f:
            return list(csv.DictReader(f))

    def names(self, kind: str) -> List[str]:
        return sorted(name for name, k in self.artifacts.items() if k == kind)


__all__ = ["MANIFEST", "RunRecord", "RunStore"]
