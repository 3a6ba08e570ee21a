"""Machine-readable JSON reports and symbol serialisation.

Every CLI command emits one report: {"schema", "command", "config", "checks",
"data"}; checks are {"name", "passed", "detail"} rows so harnesses can grep a
single boolean.  Timestamps are deliberately absent: identical config and
cache must give byte-identical reports.
"""

from __future__ import annotations

import json

import numpy as np

SCHEMA_VERSION = 1


def make_report(command: str, config: dict, checks: list, data: dict | None = None):
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "checks": [
            {"name": n, "passed": bool(ok), "detail": _plain(det)}
            for n, ok, det in checks
        ],
        "all_passed": all(bool(ok) for _, ok, _ in checks),
        "data": _plain(data or {}),
    }


def _plain(x):
    """Recursively coerce to JSON-serialisable plain types."""
    from fractions import Fraction

    from gmpy2 import mpq, mpz

    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (mpq, Fraction)):
        return str(x)
    if isinstance(x, mpz):
        return int(x)
    if hasattr(x, "coeffs") and hasattr(x, "prec"):
        return {"coeffs": [int(c) for c in x.coeffs], "prec": int(x.prec)}
    return x


def dump_report(report: dict, path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def serialise_ovc_symbol(Phi) -> dict:
    """Resumable form of an overconvergent symbol: moments plus ledger."""
    return {
        "schema": SCHEMA_VERSION,
        "kind": "ovc_symbol",
        "N": Phi.space.N,
        "k": Phi.space.k,
        "sign": Phi.space.sign,
        "p": Phi.spec.p,
        "budget": Phi.spec.M,
        "coeff_kind": Phi.spec.kind,
        "weight": {"k0": Phi.weight.k0, "n": Phi.weight.n},
        "moments": Phi.moments.tolist(),
        "prec": Phi.prec.tolist(),
        "tail_val": Phi.tail_val,
        "eigenvalue": list(Phi.eigenvalue) if Phi.eigenvalue else None,
        "ledger": Phi.ledger.to_dict(),
    }


def deserialise_ovc_symbol(payload: dict, space):
    import numpy as np

    from .dist import CoeffSpec, WeightChar
    from .lift import LiftLedger, OvcSymbol

    spec = CoeffSpec(payload["p"], payload["budget"], payload["coeff_kind"])
    weight = WeightChar(payload["weight"]["k0"], payload["weight"]["n"])
    led_data = payload["ledger"]
    ledger = LiftLedger(payload["p"], payload["budget"],
                        len(payload["prec"]))
    ledger.shift = led_data["shift"]
    ledger.iterations = led_data["iterations"]
    ledger.converged = led_data["converged"]
    ledger.defect_history = list(led_data["defect_history"])
    ledger.events = list(led_data["events"])
    ledger.slope_num, ledger.slope_den = led_data["slope"]
    return OvcSymbol(space, spec, weight,
                     np.array(payload["moments"], dtype=np.int64),
                     np.array(payload["prec"], dtype=np.int64),
                     ledger,
                     eigenvalue=tuple(payload["eigenvalue"]) if payload["eigenvalue"] else None,
                     tail_val=payload["tail_val"])
