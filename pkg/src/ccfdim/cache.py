"""Write-once rung cache keyed on the exact computation parameters.

Keys are the canonical decimal rendering of (tau_u, tau_v, N, n, tol) plus
a code-version tag; the tag also encodes the evaluator variant (tail on or
off, refined inf-domain on or off) so that algorithmic changes invalidate
stale entries silently instead of serving wrong numbers.  Entries are
immutable once written and land atomically (temp + rename), so concurrent
runs can share a cache directory.  The cache changes wall time only.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict
from pathlib import Path

CODE_TAG = "ccfdim-0.1.0"
CACHE_ENV_VAR = "CCFDIM_CACHE_DIR"


def canonical(x: float) -> str:
    """Shortest round-trip decimal; the exact-match key rendering."""
    return format(float(x), ".17g")


def variant_tag(tail: bool, refine_domain: bool) -> str:
    return f"{CODE_TAG}.t{int(tail)}d{int(refine_domain)}"


def rung_key(
    tau_u: float, tau_v: float, N: int, n: int, tol: float, tag: str
) -> str:
    return "|".join(
        [canonical(tau_u), canonical(tau_v), str(N), str(n), canonical(tol), tag]
    )


def default_cache_dir() -> str | None:
    return os.environ.get(CACHE_ENV_VAR) or None


class Cache:
    """Append-only JSON store of solved rungs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        digest = hashlib.sha256(key.encode()).hexdigest()[:24]
        return self.root / f"rung_{digest}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        try:
            with open(path) as f:
                entry = json.load(f)
        except (OSError, json.JSONDecodeError):
            self.misses += 1
            return None
        if entry.get("key") != key:        # digest collision or tampering
            self.misses += 1
            return None
        self.hits += 1
        return entry["value"]

    def put(self, key: str, value: dict) -> None:
        path = self._path(key)
        if path.exists():                  # immutable once written
            return
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                json.dump({"key": key, "value": value}, f, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def get_rung(self, par, N: int, n: int, tol: float, tag: str) -> dict | None:
        return self.get(rung_key(par.u, par.v, N, n, tol, tag))

    def put_rung(self, par, N: int, n: int, tol: float, tag: str, rung) -> None:
        self.put(rung_key(par.u, par.v, N, n, tol, tag), asdict(rung))
