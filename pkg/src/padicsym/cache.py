"""Disk cache for Hecke matrices, exact integers/rationals in JSON.

Schema (docs/schema.md): one file per (N, k, sign, operator), entries as
"num" or "num/den" strings so nothing is ever rounded.
"""

from __future__ import annotations

import json
import os

from gmpy2 import mpq

SCHEMA_VERSION = 1


def _path(cache_dir, N, k, sign, op_key):
    tag = {1: "p", -1: "m", None: "f"}[sign]
    safe = op_key.replace("(", "").replace(")", "").replace("'", "").replace(
        ", ", "_").replace(" ", "")
    return os.path.join(cache_dir, f"hecke_N{N}_k{k}_{tag}_{safe}.json")


def _enc(x) -> str:
    q = mpq(x)
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{int(q.numerator)}/{int(q.denominator)}"


def _dec(s: str):
    if "/" in s:
        a, b = s.split("/")
        return mpq(int(a), int(b))
    return mpq(int(s))


def store_hecke(cache_dir, N, k, sign, op_key, mat):
    os.makedirs(cache_dir, exist_ok=True)
    payload = {
        "schema": SCHEMA_VERSION,
        "N": N, "k": k, "sign": sign, "op": op_key,
        "dim": len(mat),
        "entries": [[_enc(x) for x in row] for row in mat],
    }
    path = _path(cache_dir, N, k, sign, op_key)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def load_hecke(cache_dir, N, k, sign, op_key):
    path = _path(cache_dir, N, k, sign, op_key)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != SCHEMA_VERSION:
        return None
    return [[_dec(x) for x in row] for row in payload["entries"]]
