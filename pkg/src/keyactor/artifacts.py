"""On-disk artifact helpers: canonical JSON/JSONL, schema checks, digests.

Every stage is a pure file-to-file transformation; artifacts never embed
wall-clock state, so re-running a stage with identical inputs and seed
reproduces identical bytes. Digests go to the log, not into the artifacts.
"""

import hashlib
import json
import logging
from pathlib import Path

from .errors import ArtifactSchemaError, StageDependencyError

log = logging.getLogger("keyactor")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def require(path) -> Path:
    path = Path(path)
    if not path.exists():
        raise StageDependencyError(path)
    return path


def write_json(path, obj) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path, expect_schema: str | None = None) -> dict:
    with require(path).open("r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if expect_schema is not None and obj.get("schema") != expect_schema:
        raise ArtifactSchemaError(f"{path}: expected schema {expect_schema!r}, found {obj.get('schema')!r}")
    return obj


def write_jsonl(path, rows) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_jsonl(path, required_keys: tuple = ()) -> list[dict]:
    rows = []
    with require(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            missing = [k for k in required_keys if k not in obj]
            if missing:
                raise ArtifactSchemaError(f"{path}:{line_no}: missing keys {missing}")
            rows.append(obj)
    return rows


def log_stage(stage: str, inputs: list, outputs: list, wall_seconds: float | None = None) -> None:
    """One log line per stage with input/output digests (never persisted in
    the artifacts themselves, which must stay byte-deterministic)."""
    parts = [f"stage={stage}"]
    for p in inputs:
        parts.append(f"in={p} sha256={sha256_file(p)}")
    for p in outputs:
        parts.append(f"out={p} sha256={sha256_file(p)}")
    if wall_seconds is not None:
        parts.append(f"wall={wall_seconds:.2f}s")
    log.info(" ".join(parts))
