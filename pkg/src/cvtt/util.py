"""Small shared helpers: seed derivation, config fingerprints, file name slugs."""

from __future__ import annotations

import hashlib
import json
import re


def derive_seed(*parts) -> int:
    """Derive a reproducible 64-bit seed from arbitrary labelled parts.

    Stable across processes and platforms (unlike builtin ``hash``), so runs
    keyed by (seed, model, strategy, fold) are exactly repeatable.
    """
    key = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def fingerprint(obj) -> str:
    """Hex digest of a JSON-serializable object, independent of key order."""
    canonical = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def slugify(label: str) -> str:
    """Turn a series label like ``window(3)`` into a file-name-safe slug."""
    slug = re.sub(r"[^A-Za-z0-9_]+", "-", label).strip("-")
    return slug or "x"
