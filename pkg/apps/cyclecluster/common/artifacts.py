# BSD 3-Clause License
#
# Copyright (c) 2025, Infrastructure Architects, LLC
# All rights reserved.

"""
Artifact storage for pipeline stages.

Every stage reads its inputs from, and writes its outputs to, one output
directory. JSON is written with orjson (sorted keys, two-space indent,
trailing newline) and CSV with pandas, so identical inputs give identical
bytes. manifest.json records the SHA-256 of every artifact written so far.
"""

import hashlib
import logging
from pathlib import Path
from typing import Any

import orjson
import pandas as pd
from pydantic import BaseModel

from app.core.errors import ArtifactError
from models import ArtifactMeta

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
MANIFEST = "manifest.json"


def dumps(payload: Any) -> bytes:
    """Canonical JSON bytes for an artifact payload"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return orjson.dumps(payload, option=JSON_OPTIONS) + b"\n"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ArtifactStore:
    """Reads and writes the artifacts of one pipeline output directory"""

    def __init__(self, out_dir: str | Path, meta: ArtifactMeta | None = None):
        self.out_dir = Path(out_dir)
        self.meta = meta

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def exists(self, name: str) -> bool:
        return self.path(name).is_file()

    # ------------------------------------------------------------------
    # Writing
    # ------------------------------------------------------------------

    def write_json(self, name: str, payload: BaseModel | dict[str, Any]) -> Path:
        """Write a JSON artifact, stamping it with `meta` when the store has one"""
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json")
        if self.meta is not None:
            payload = {**payload, "meta": self.meta.model_dump(mode="json")}
        return self._write_bytes(name, dumps(payload))

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        data = frame.to_csv(index=False, lineterminator="\n").encode("utf-8")
        return self._write_bytes(name, data)

    def _write_bytes(self, name: str, data: bytes) -> Path:
        target = self.path(name)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        except OSError as e:
            raise ArtifactError(f"cannot write artifact {target}: {e}") from e
        logger.debug(f"Wrote {target} ({len(data)} bytes)")
        self._record(name, hashlib.sha256(data).hexdigest())
        return target

    def _record(self, name: str, digest: str):
        manifest = self.read_manifest()
        manifest[name] = digest
        self.path(MANIFEST).write_bytes(dumps({"artifacts": manifest}))

    # ------------------------------------------------------------------
    # Reading
    # ------------------------------------------------------------------

    def read_manifest(self) -> dict[str, str]:
        target = self.path(MANIFEST)
        if not target.is_file():
            return {}
        try:
            return dict(orjson.loads(target.read_bytes()).get("artifacts", {}))
        except (orjson.JSONDecodeError, AttributeError) as e:
            raise ArtifactError(f"corrupt manifest {target}: {e}") from e

    def _require(self, name: str, produced_by: str | None) -> Path:
        target = self.path(name)
        if not target.is_file():
            hint = f"; run `cyclecluster {produced_by}` first" if produced_by else ""
            raise ArtifactError(f"missing artifact {target}{hint}")
        return target

    def read_json(self, name: str, produced_by: str | None = None) -> dict[str, Any]:
        target = self._require(name, produced_by)
        try:
            payload = orjson.loads(target.read_bytes())
        except orjson.JSONDecodeError as e:
            raise ArtifactError(f"invalid JSON in {target}: {e}") from e
        if not isinstance(payload, dict):
            raise ArtifactError(f"{target}: expected a JSON object")
        payload.pop("meta", None)
        return payload

    def read_csv(self, name: str, produced_by: str | None = None, **kwargs) -> pd.DataFrame:
        target = self._require(name, produced_by)
        try:
            return pd.read_csv(target, float_precision="round_trip", **kwargs)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
            raise ArtifactError(f"cannot read {target}: {e}") from e
