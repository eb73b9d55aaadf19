"""On-disk JSON cache of built theories.

Entries are keyed by a content hash of (space, bundle, twist, D).  Each file stores
its own payload digest; a mismatch raises CacheCorrupt and the caller rebuilds.
Writes go through a temporary file and an atomic rename, so readers never see a
partial entry.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .cohring import CohClass
from .errors import CacheCorrupt
from .scalars import parse, render
from .series import FormalSeries, SeriesMatrix

FORMAT_VERSION = 1
SERIES_FIELDS = ("I", "tau0", "tau2", "J")
MATRIX_FIELDS = ("L_tilde", "P", "product_H_tilde", "L", "product_H")


def default_cache_dir():
    env = os.environ.get("QSD_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "qsd"


def cache_key(space, bundle, twist, D) -> str:
    blob = json.dumps({"space": str(space), "bundle": list(bundle), "twist": str(twist), "D": int(D),
                       "version": FORMAT_VERSION}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def series_to_json(s: FormalSeries):
    return {"D": s.D, "n": s.n,
            "terms": [[*key, [render(x) for x in s.terms[key].coeffs]] for key in sorted(s.terms)]}


def series_from_json(obj) -> FormalSeries:
    terms = {}
    for *key, coeffs in obj["terms"]:
        terms[tuple(key)] = CohClass([parse(x) for x in coeffs])
    return FormalSeries(obj["D"], obj["n"], terms)


def matrix_to_json(m: SeriesMatrix):
    return {"D": m.D, "rows": m.rows, "cols": m.cols,
            "terms": [[*key, [[render(x) for x in row] for row in m.terms[key]]] for key in sorted(m.terms)]}


def matrix_from_json(obj) -> SeriesMatrix:
    terms = {}
    for *key, rows in obj["terms"]:
        terms[tuple(key)] = tuple(tuple(parse(x) for x in row) for row in rows)
    return SeriesMatrix(obj["D"], obj["rows"], obj["cols"], terms)


def _digest(payload) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


class SeriesCache:
    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.hits = 0
        self.misses = 0

    def path(self, key):
        return self.directory / f"{key}.json"

    def put(self, key, bundle: dict):
        """Store a dict of FormalSeries / SeriesMatrix values."""
        payload = {}
        for name, value in sorted(bundle.items()):
            if isinstance(value, SeriesMatrix):
                payload[name] = {"kind": "matrix", "value": matrix_to_json(value)}
            else:
                payload[name] = {"kind": "series", "value": series_to_json(value)}
        doc = {"version": FORMAT_VERSION, "key": key, "digest": _digest(payload), "payload": payload}
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, sort_keys=True)
            os.replace(tmp, self.path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def get(self, key):
        """Return the stored dict, None on a miss, or raise CacheCorrupt."""
        p = self.path(key)
        if not p.exists():
            self.misses += 1
            return None
        try:
            doc = json.loads(p.read_text())
            payload = doc["payload"]
            if doc.get("key") != key or doc.get("digest") != _digest(payload):
                raise CacheCorrupt(f"digest mismatch in {p}")
            out = {}
            for name, item in payload.items():
                reader = matrix_from_json if item["kind"] == "matrix" else series_from_json
                out[name] = reader(item["value"])
        except CacheCorrupt:
            raise
        except (ValueError, KeyError, TypeError, SyntaxError) as exc:
            raise CacheCorrupt(f"unreadable cache entry {p}: {exc}") from exc
        self.hits += 1
        return out

    def discard(self, key):
        p = self.path(key)
        if p.exists():
            p.unlink()
