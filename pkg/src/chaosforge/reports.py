"""Verification records and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

CSV_COLUMNS = ("case", "m", "n", "d", "seed", "lhs", "rhs", "abs_err", "rel_err", "pass")


@dataclass(frozen=True)
class VerificationReport:
    """One identity check.

    ``lhs``/``rhs`` hold real parts; ``abs_err`` is measured on the full
    complex difference and ``rel_err = abs_err / max(1, |lhs|)``.
    """

    case: str
    m: int
    n: int
    d: int
    seed: int
    lhs: float
    rhs: float
    abs_err: float
    rel_err: float
    passed: bool

    def to_json(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out

    @classmethod
    def from_json(cls, obj: dict) -> VerificationReport:
        obj = dict(obj)
        obj["passed"] = obj.pop("pass")
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in obj.items() if k in names})


def check(case, lhs, rhs, tol, *, m=0, n=0, d=0, seed=0, mode="rel") -> VerificationReport:
    """Compare two numbers; ``mode`` is ``"rel"`` (against max(1, |lhs|)) or ``"abs"``."""
    lhs, rhs = complex(lhs), complex(rhs)
    abs_err = abs(lhs - rhs)
    rel_err = abs_err / max(1.0, abs(lhs))
    err = rel_err if mode == "rel" else abs_err
    ok = bool(math.isfinite(err) and err <= tol)
    return VerificationReport(case, int(m), int(n), int(d), int(seed), lhs.real, rhs.real, abs_err, rel_err, ok)


def check_flag(case, ok, *, m=0, n=0, d=0, seed=0) -> VerificationReport:
    """Boolean check recorded as lhs = rhs = 1 on success."""
    v = 1.0 if ok else 0.0
    return VerificationReport(case, m, n, d, seed, v, 1.0, 1.0 - v, 1.0 - v, bool(ok))


def _csv_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reports_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        row = r.to_json()
        w.writerow([_csv_value(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def reports_to_json(results) -> str:
    return json.dumps([r.to_json() for r in results], indent=2) + "\n"


def emit_report(results, format: str, path) -> Path:
    if format == "json":
        text = reports_to_json(results)
    elif format == "csv":
        text = reports_to_csv(results)
    else:
        raise ValueError(f"unknown report format {format!r}")
    path = Path(path)
    path.write_text(text)
    return path


def read_report(path) -> list[VerificationReport]:
    path = Path(path)
    if path.suffix == ".csv":
        out = []
        with path.open(newline="") as fh:
            for row in csv.DictReader(fh):
                out.append(
                    VerificationReport(
                        row["case"], int(row["m"]), int(row["n"]), int(row["d"]), int(row["seed"]),
                        float(row["lhs"]), float(row["rhs"]), float(row["abs_err"]),
                        float(row["rel_err"]), row["pass"] == "true",
                    )
                )
        return out
    return [VerificationReport.from_json(o) for o in json.loads(path.read_text())]
