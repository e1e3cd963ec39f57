"""Result records, CSV/JSON writers, run manifests and plot-data files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import subprocess
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .estimation import CorrelationEstimate, DecayFit


@dataclass(frozen=True)
class EstimateRecord:
    """One estimated query with its spatial separation and time gap (None if not a connection)."""

    est: CorrelationEstimate
    r: float | None = None
    dt: float | None = None

    def row(self) -> dict:
        e = self.est
        return {"query": e.query, "r": self.r, "dt": self.dt, "p_hat": e.p_hat, "n_trials": e.n_trials,
                "hits": e.hits, "ci_lo": e.ci_lo, "ci_hi": e.ci_hi}


def fit_row(fit: DecayFit) -> dict:
    return {"kind": fit.kind, "mu_hat": fit.mu_hat, "tau_hat": fit.tau_hat, "r_squared": fit.r_squared,
            "n_points": fit.n_points, "domain": ";".join(f"{x:g}" for x in fit.domain)}


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def render_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    cols = list(columns) if columns is not None else (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def render_json(rows: Sequence[dict]) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        if isinstance(v, np.generic):
            return v.item()
        return v
    return json.dumps([{k: clean(v) for k, v in r.items()} for r in rows], indent=2) + "\n"


class OutputDir:
    """Writes files under one directory and remembers their content hashes."""

    def __init__(self, path, formats: Sequence[str] = ("csv",)):
        self.path = Path(path)
        self.formats = tuple(formats)
        self.files: dict[str, str] = {}

    def write_text(self, name: str, text: str) -> Path:
        self.path.mkdir(parents=True, exist_ok=True)
        dest = self.path / name
        data = text.encode()
        dest.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return dest

    def write_table(self, stem: str, rows: Sequence[dict], columns: Sequence[str] | None = None) -> list[Path]:
        out = []
        if "csv" in self.formats:
            out.append(self.write_text(f"{stem}.csv", render_csv(rows, columns)))
        if "json" in self.formats:
            out.append(self.write_text(f"{stem}.json", render_json(rows)))
        return out

    def write_manifest(self, command: str, meta: dict) -> Path:
        body = {"command": command, "toolkit_version": toolkit_version(), **meta,
                "files": dict(sorted(self.files.items()))}
        dest = self.path / f"manifest_{command}.json"
        self.path.mkdir(parents=True, exist_ok=True)
        dest.write_text(json.dumps(body, indent=2) + "\n")
        return dest


def toolkit_version() -> str:
    """``git describe`` of the source checkout when available, else the package version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
    except (OSError, subprocess.SubprocessError):
        return __version__
    desc = out.stdout.strip()
    return f"{__version__}+g{desc}" if out.returncode == 0 and desc else __version__


# -- plot data -------------------------------------------------------------

def _log(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(np.asarray(x, dtype=float))


def _tsv(header: Sequence[str], cols: Sequence[np.ndarray]) -> str:
    lines = ["# " + "\t".join(header)]
    for vals in zip(*cols):
        lines.append("\t".join(fmt(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def emit_plot_data(records: Sequence[EstimateRecord], out: OutputDir,
                   fits: Sequence[DecayFit] = ()) -> list[Path]:
    """Tab-separated files for the two decay plots.

    ``spatial.tsv``: equal-time connections, columns r, log p and the log CI.
    ``temporal.tsv``: same-site connections, columns dt, log dt, log p,
    log(-log p) and its CI.  A fitted column is added when a matching fit is
    supplied.  Points with p in {0, 1} carry no information and are skipped.
    """
    if not records and not fits:
        warnings.warn("no estimates or fits: plot data not written", stacklevel=2)
        return []
    spatial = sorted((rec for rec in records if rec.r and rec.dt == 0 and 0 < rec.est.p_hat < 1),
                     key=lambda rec: rec.r)
    temporal = sorted((rec for rec in records if rec.r == 0 and rec.dt and 0 < rec.est.p_hat < 1),
                      key=lambda rec: rec.dt)
    by_kind = {f.kind: f for f in fits}
    written = []
    if spatial:
        r = np.array([rec.r for rec in spatial])
        cols = [r, _log([rec.est.p_hat for rec in spatial]), _log([rec.est.ci_lo for rec in spatial]),
                _log([rec.est.ci_hi for rec in spatial])]
        head = ["r", "log_p", "log_ci_lo", "log_ci_hi"]
        fit = by_kind.get("spatial-exponential")
        if fit is not None:
            cols.append(fit.intercept - fit.mu_hat * r)
            head.append("fit_log_p")
        written.append(out.write_text("spatial.tsv", _tsv(head, cols)))
    if temporal:
        dt = np.array([rec.dt for rec in temporal])
        logp = _log([rec.est.p_hat for rec in temporal])
        cols = [dt, _log(dt), logp, _log(-logp),
                _log(-_log([rec.est.ci_hi for rec in temporal])),
                _log(-_log([rec.est.ci_lo for rec in temporal]))]
        head = ["dt", "log_dt", "log_p", "loglog_p", "loglog_ci_lo", "loglog_ci_hi"]
        fit = by_kind.get("temporal-stretched")
        if fit is not None:
            cols.append(math.log(fit.mu_hat) + fit.tau_hat * _log(dt))
            head.append("fit_loglog_p")
        written.append(out.write_text("temporal.tsv", _tsv(head, cols)))
    if not written:
        warnings.warn("no estimate with 0 < p < 1 on a spatial or temporal sweep", stacklevel=2)
    return written
