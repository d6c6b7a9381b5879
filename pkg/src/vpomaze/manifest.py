"""Output-directory manifests.

Every CLI command that produces an output directory drops a single
``manifest.json`` next to its artifacts: a config snapshot, the seeds in
play, and a blake2s digest of every other file in the tree.  The file is
written with sorted keys and no timestamps so that identical runs produce
byte-identical manifests.
"""
from __future__ import annotations

import hashlib
import json
import os

from . import __version__

MANIFEST_NAME = "manifest.json"
_CHUNK = 1 << 16


class ManifestError(Exception):
    pass


def file_digest(path: str) -> str:
    h = hashlib.blake2s()
    with open(path, "rb") as fh:
        while True:
            block = fh.read(_CHUNK)
            if not block:
                break
            h.update(block)
    return h.hexdigest()


def _tree_files(out_dir: str) -> list[str]:
    """All files under out_dir (relative, '/'-separated), minus the manifest."""
    rels = []
    for root, _dirs, names in os.walk(out_dir):
        for name in names:
            rel = os.path.relpath(os.path.join(root, name), out_dir)
            rel = rel.replace(os.sep, "/")
            if rel != MANIFEST_NAME:
                rels.append(rel)
    return sorted(rels)


def write_manifest(out_dir: str, kind: str, config: dict | None = None,
                   seeds: list[int] | None = None,
                   extra: dict | None = None) -> str:
    files = {rel: file_digest(os.path.join(out_dir, rel))
             for rel in _tree_files(out_dir)}
    payload = {
        "kind": kind,
        "tool_version": __version__,
        "config": config,
        "seeds": seeds,
        "files": files,
    }
    if extra:
        payload.update(extra)
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def read_manifest(out_dir: str) -> dict:
    path = os.path.join(out_dir, MANIFEST_NAME)
    if not os.path.isfile(path):
        raise ManifestError(f"missing manifest: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"unreadable manifest {path}: {exc}") from exc
    if not isinstance(payload.get("files"), dict):
        raise ManifestError(f"manifest {path} lacks a files table")
    return payload


def verify_manifest(out_dir: str) -> list[str]:
    """Re-hash the directory against its manifest; return human-readable
    problems (empty means everything verifies)."""
    payload = read_manifest(out_dir)
    recorded = payload["files"]
    problems = []
    present = set(_tree_files(out_dir))
    for rel, digest in sorted(recorded.items()):
        full = os.path.join(out_dir, rel)
        if rel not in present:
            problems.append(f"missing file: {rel}")
        elif file_digest(full) != digest:
            problems.append(f"digest mismatch: {rel}")
    for rel in sorted(present - set(recorded)):
        problems.append(f"file not in manifest: {rel}")
    return problems
