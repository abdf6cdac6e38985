"""Run manifests: digests of config, inputs and outputs for every pipeline stage.

Re-running a stage with identical inputs and seed must reproduce identical
output digests; the manifest is the evidence.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

from . import __version__

__all__ = ["config_digest", "file_digest", "write_manifest"]


def config_digest(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    ).hexdigest()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    stage: str,
    out_dir,
    config: dict,
    inputs: list,
    outputs: list,
    seed: int | None = None,
    started: float | None = None,
) -> str:
    manifest = {
        "stage": stage,
        "tool_version": __version__,
        "seed": seed,
        "config_digest": config_digest(config),
        "inputs": {str(p): file_digest(p) for p in sorted(str(p) for p in inputs)},
        "outputs": {str(p): file_digest(p) for p in sorted(str(p) for p in outputs)},
        "timings": {
            "seconds": round(time.monotonic() - started, 6) if started else None
        },
    }
    path = os.path.join(out_dir, f"{stage}.manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
