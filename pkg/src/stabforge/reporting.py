"""Deterministic check records, line-delimited report streams, and CSV paths.

Records serialise through canonical JSON (sorted keys, shortest-roundtrip
floats), so identical inputs produce byte-identical streams.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IOFailure
from .slag import TracedPath, omega_density

__all__ = [
    "ReportRecord",
    "make_record",
    "canonical_json",
    "params_hash",
    "render_report",
    "emit_paths",
]


def _jsonable(x):
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, Path):
        return str(x)
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_jsonable)


def params_hash(params: dict) -> str:
    return hashlib.sha256(canonical_json(params).encode()).hexdigest()[:16]


@dataclass
class ReportRecord:
    check_id: str
    status: str  # pass | fail | skipped
    module: str
    operation: str
    values: dict = field(default_factory=dict)
    witness: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in ("pass", "fail", "skipped"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "fail" and self.witness is None:
            raise ValueError("every failing record needs a witness")

    def to_json(self) -> str:
        return canonical_json(
            {
                "check_id": self.check_id,
                "status": self.status,
                "values": self.values,
                "witness": self.witness,
                "provenance": {
                    "module": self.module,
                    "operation": self.operation,
                    "params": self.params,
                    "params_hash": params_hash(self.params),
                },
            }
        )


def make_record(
    check_id: str,
    passed: bool,
    module: str,
    operation: str,
    *,
    values: dict | None = None,
    witness=None,
    params: dict | None = None,
    skipped: bool = False,
) -> ReportRecord:
    status = "skipped" if skipped else ("pass" if passed else "fail")
    return ReportRecord(
        check_id=check_id,
        status=status,
        module=module,
        operation=operation,
        values=values or {},
        witness=None if witness is None else str(witness),
        params=params or {},
    )


def render_report(records) -> str:
    lines = [r.to_json() for r in sorted(records, key=lambda r: r.check_id)]
    return "\n".join(lines) + ("\n" if lines else "")


def emit_paths(paths: list[TracedPath], directory, prefix: str = "slag_path") -> list[Path]:
    """Write one CSV per traced path; byte-stable for identical inputs.

    Columns: t, Re z, Im z, Re and Im of the form density against the
    recorded tangent, and the cumulative mass.  The header documents the
    form coefficients and phase.
    """
    directory = Path(directory)
    written: list[Path] = []
    try:
        if paths:
            directory.mkdir(parents=True, exist_ok=True)
        for i, path in enumerate(paths):
            p = path.problem
            dest = directory / f"{prefix}_{i:03d}.csv"
            rows = ["# a={!r} c={!r} phi={!r}".format(p.a, p.c, p.phase)]
            rows.append("t,re_z,im_z,re_omega_tangent,im_omega_tangent,cumulative_mass")
            omega_t = omega_density(path.z, p.a, p.c) * path.tangent
            for t, z, w, cm in zip(path.t, path.z, omega_t, path.cumulative_mass):
                rows.append(
                    f"{float(t)!r},{float(z.real)!r},{float(z.imag)!r},"
                    f"{float(w.real)!r},{float(w.imag)!r},{float(cm)!r}"
                )
            dest.write_text("\n".join(rows) + "\n")
            written.append(dest)
    except OSError as exc:
        raise IOFailure(f"could not write CSV output: {exc}") from exc
    return written
