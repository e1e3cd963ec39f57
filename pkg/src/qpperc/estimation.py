"""Monte Carlo estimates of percolation events, regularity probes and decay fits."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from . import _kernels
from .connectivity import FULL, BoundarySpec, Mask
from .environment import EnvironmentSpec
from .realization import SpaceTimeBox, box_rates

Z95 = float(norm.ppf(0.975))
CHUNK = 4096


class FitRefused(ValueError):
    """Too few usable points for a decay fit."""


def wilson_interval(hits: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = hits / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # keep the estimate inside its own interval despite rounding at p = 0, 1
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class CorrelationEstimate:
    p_hat: float
    n_trials: int
    ci_lo: float
    ci_hi: float
    query: str = ""
    hits: int | None = None

    @classmethod
    def from_hits(cls, hits: int, n: int, query: str = "") -> "CorrelationEstimate":
        lo, hi = wilson_interval(hits, n)
        return cls(hits / n, n, lo, hi, query, hits)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_hi - self.ci_lo)


# -- events ---------------------------------------------------------------

def _point(p) -> tuple[tuple[int, ...], float]:
    x, t = p
    return tuple(int(c) for c in np.atleast_1d(x)), float(t)


def _fmt_point(p) -> str:
    x, t = p
    return f"({','.join(map(str, x))};{t:g})"


@dataclass(frozen=True)
class Connection:
    """``a <-> b`` inside the (masked) box."""

    a: tuple
    b: tuple
    mask: Mask = FULL
    increasing = True

    def __post_init__(self):
        object.__setattr__(self, "a", _point(self.a))
        object.__setattr__(self, "b", _point(self.b))

    def describe(self) -> str:
        return f"{_fmt_point(self.a)}<->{_fmt_point(self.b)} | {self.mask.describe()}"


@dataclass(frozen=True)
class BoundaryHit:
    """a's cluster reaches the selected faces of the (masked) box."""

    a: tuple
    faces: BoundarySpec = BoundarySpec()
    mask: Mask = FULL
    increasing = True

    def __post_init__(self):
        object.__setattr__(self, "a", _point(self.a))

    def describe(self) -> str:
        f = self.faces
        names = "+".join(n for n, on in (("lower", f.lower), ("upper", f.upper),
                                         ("horizontal", f.horizontal)) if on)
        return f"{_fmt_point(self.a)}->{names} | {self.mask.describe()}"


@dataclass(frozen=True)
class VerticalCrossing:
    """The lower time face is connected to the upper one."""

    mask: Mask = FULL
    increasing = True

    def describe(self) -> str:
        return f"lower<->upper | {self.mask.describe()}"


@dataclass(frozen=True)
class Complement:
    event: object

    @property
    def increasing(self) -> bool:
        return not self.event.increasing

    @property
    def mask(self) -> Mask:
        return self.event.mask

    def describe(self) -> str:
        return f"not[{self.event.describe()}]"


_BASE_EVENTS = (Connection, BoundaryHit, VerticalCrossing)


def _base(ev):
    flip = False
    while isinstance(ev, Complement):
        ev, flip = ev.event, not flip
    if not isinstance(ev, _BASE_EVENTS):
        raise TypeError(f"unsupported event {ev!r}")
    return ev, flip


@dataclass
class _Plan:
    """Events compiled to the flat arrays the kernel expects."""

    mask_active: np.ndarray
    mask_lo: np.ndarray
    mask_hi: np.ndarray
    ev: tuple
    flips: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))


def _compile(box: SpaceTimeBox, events: Sequence) -> _Plan:
    geo = box.geometry
    masks: list[Mask] = []
    cols = {k: [] for k in ("type", "mask", "av", "at", "bv", "bt", "faces")}
    flips = []
    for ev in events:
        base, flip = _base(ev)
        if base.mask not in masks:
            masks.append(base.mask)
        m = masks.index(base.mask)
        av = at = bv = bt = 0
        faces = 0
        if isinstance(base, Connection):
            kind = _kernels.EV_CONNECT
            av, at = geo.vertex(base.a[0]), base.a[1]
            bv, bt = geo.vertex(base.b[0]), base.b[1]
        elif isinstance(base, BoundaryHit):
            kind = _kernels.EV_BOUNDARY
            av, at = geo.vertex(base.a[0]), base.a[1]
            faces = base.faces.flags
        else:
            kind = _kernels.EV_CROSSING
        for key, val in zip(cols, (kind, m, av, at, bv, bt, faces)):
            cols[key].append(val)
        flips.append(flip)
    arrs = [mask.arrays(box) for mask in masks]
    ev = (np.array(cols["type"], dtype=np.int64), np.array(cols["mask"], dtype=np.int64),
          np.array(cols["av"], dtype=np.int64), np.array(cols["at"], dtype=np.float64),
          np.array(cols["bv"], dtype=np.int64), np.array(cols["bt"], dtype=np.float64),
          np.array(cols["faces"], dtype=np.int64))
    return _Plan(np.array([a for a, _, _ in arrs], dtype=np.bool_).reshape(len(arrs), geo.n_vertices),
                 np.array([lo for _, lo, _ in arrs], dtype=np.float64),
                 np.array([hi for _, _, hi in arrs], dtype=np.float64),
                 ev, np.array(flips, dtype=bool))


def _events_chunk(args):
    spec, box, plan, seed, trial0, n = args
    geo = box.geometry
    rates = box_rates(spec, box.center, box.L)
    return _kernels.run_events(np.uint64(seed), trial0, n, geo.ids_v, geo.ids_e, rates.death, rates.bond,
                               box.t_lo, box.t_hi, geo.e_lo, geo.e_hi, geo.on_face,
                               plan.mask_active, plan.mask_lo, plan.mask_hi, *plan.ev)


def _chunks(n_trials: int, trial0: int):
    return [(trial0 + s, min(CHUNK, n_trials - s)) for s in range(0, n_trials, CHUNK)]


def _map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def event_outcomes(spec: EnvironmentSpec, box: SpaceTimeBox, events: Sequence, n_trials: int,
                   seed: int, trial0: int = 0, workers: int = 1) -> np.ndarray:
    """0/1 matrix of shape (n_trials, len(events)); trial s uses index trial0 + s.

    Trials are keyed individually, so the matrix is independent of how the
    work is split between workers.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if spec.d != box.d:
        raise ValueError("environment and box dimensions differ")
    plan = _compile(box, events)
    parts = _map(_events_chunk, [(spec, box, plan, seed, t0, n) for t0, n in _chunks(n_trials, trial0)],
                 workers)
    out = np.concatenate(parts, axis=0).astype(bool)
    out[:, plan.flips] = ~out[:, plan.flips]
    return out


def estimate_events(spec, box, events, n_trials: int, seed: int, workers: int = 1) -> list[CorrelationEstimate]:
    hits = event_outcomes(spec, box, events, n_trials, seed, workers=workers).sum(axis=0)
    return [CorrelationEstimate.from_hits(int(h), n_trials, ev.describe()) for h, ev in zip(hits, events)]


def estimate_two_point(spec: EnvironmentSpec, box: SpaceTimeBox, a, b, mask: Mask = FULL,
                       n_trials: int = 1000, seed: int = 0, workers: int = 1) -> CorrelationEstimate:
    """Fraction of trials in which a and b are connected inside the masked box.

    A query point that falls on a death is deleted and counts as not connected.
    """
    return estimate_events(spec, box, [Connection(a, b, mask)], n_trials, seed, workers)[0]


# -- boundary flux and regularity -----------------------------------------

def _q_chunk(args):
    spec, box, av, at, faces, seed, trial0, n = args
    geo = box.geometry
    rates = box_rates(spec, box.center, box.L)
    return _kernels.run_q(np.uint64(seed), trial0, n, geo.ids_v, geo.ids_e, rates.death, rates.bond,
                          box.t_lo, box.t_hi, geo.e_lo, geo.e_hi, av, at,
                          geo.bd_inner, rates.boundary_bond, faces)


def q_samples(spec: EnvironmentSpec, box: SpaceTimeBox, a, n_trials: int, seed: int,
              bspec: BoundarySpec = BoundarySpec(), workers: int = 1) -> np.ndarray:
    """Per-trial boundary-flux statistic of point a in the box."""
    x, t = _point(a)
    av = box.geometry.vertex(x)
    jobs = [(spec, box, av, t, bspec.flags, seed, t0, n) for t0, n in _chunks(n_trials, 0)]
    return np.concatenate(_map(_q_chunk, jobs, workers))


@dataclass(frozen=True)
class RegularityProbe:
    q_hat: float
    ci_lo: float
    ci_hi: float
    threshold: float
    is_regular: str  # "yes" | "no" | "undecided"
    n_trials: int


def estimate_regularity(spec: EnvironmentSpec, x, L: int, eta: float, mu: float,
                        n_trials: int = 1000, seed: int = 0, workers: int = 1) -> RegularityProbe:
    """Compare the mean boundary flux over ``B_{L, L^eta}(x, 0)`` with ``exp(-mu L)``."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if not eta > 0:
        raise ValueError("eta must be positive")
    x = tuple(int(c) for c in np.atleast_1d(x))
    box = SpaceTimeBox.around(x, L, float(L) ** eta)
    q = q_samples(spec, box, (x, 0.0), n_trials, seed, workers=workers)
    mean = float(q.mean())
    se = float(q.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else math.inf
    lo, hi = mean - Z95 * se, mean + Z95 * se
    thr = math.exp(-mu * L)
    verdict = "yes" if hi < thr else "no" if lo > thr else "undecided"
    return RegularityProbe(mean, lo, hi, thr, verdict, n_trials)


# -- decay fits ------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    kind: str  # "spatial-exponential" | "temporal-stretched"
    mu_hat: float
    tau_hat: float | None
    r_squared: float
    domain: tuple[float, ...]
    intercept: float = 0.0  # of the fitted line: log p at r = 0, or log mu

    @property
    def n_points(self) -> int:
        return len(self.domain)


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return float(slope), float(intercept), r2


def fit_spatial_decay(points: Sequence[tuple[float, CorrelationEstimate]],
                      max_rel_width: float = 2.0) -> DecayFit:
    """Least-squares slope of log p against distance; ``mu_hat = -slope``.

    Points enter only if 0 < p < 1 and ``(ci_hi - ci_lo) / p < max_rel_width``.
    """
    used = [(float(r), est.p_hat) for r, est in points
            if 0.0 < est.p_hat < 1.0 and (est.ci_hi - est.ci_lo) / est.p_hat < max_rel_width]
    if len(used) < 3:
        raise FitRefused(f"need 3 usable points, have {len(used)}")
    r = np.array([u[0] for u in used])
    logp = np.log([u[1] for u in used])
    slope, intercept, r2 = _line_fit(r, logp)
    mu = -slope
    if abs(mu) < 1e-13:
        mu = 0.0
    return DecayFit("spatial-exponential", mu, None, r2, tuple(r.tolist()), intercept)


def fit_temporal_stretch(points: Sequence[tuple[float, CorrelationEstimate]], p_min: float = 1e-4,
                         p_max: float = 0.99, log_frac: float = 0.25) -> DecayFit:
    """Fit ``p = exp(-mu dt^tau)`` by a line of log(-log p) against log dt.

    Usable points have ``p_min <= p <= p_max`` and CI half-width below
    ``log_frac * |log p|``; the supplied time gaps must span a decade.
    """
    dts = np.array([float(dt) for dt, _ in points])
    if dts.size == 0 or np.any(dts <= 0):
        raise FitRefused("time gaps must be positive")
    if dts.max() / dts.min() < 10.0:
        raise FitRefused("time gaps span less than one decade")
    used = [(float(dt), est.p_hat) for dt, est in points
            if p_min <= est.p_hat <= p_max and 0.0 < est.p_hat < 1.0
            and est.half_width < log_frac * abs(math.log(est.p_hat))]
    if len(used) < 3:
        raise FitRefused(f"need 3 usable points, have {len(used)}")
    x = np.log([u[0] for u in used])
    y = np.log(-np.log([u[1] for u in used]))
    slope, intercept, r2 = _line_fit(x, y)
    return DecayFit("temporal-stretched", math.exp(intercept), slope, r2, tuple(np.exp(x).tolist()), intercept)


# -- FKG probe -------------------------------------------------------------

@dataclass(frozen=True)
class FKGResult:
    p_xy: float
    p_x: float
    p_y: float
    se: float
    passed: bool
    n_trials: int

    @property
    def excess(self) -> float:
        return self.p_xy - self.p_x * self.p_y


def fkg_probe(spec: EnvironmentSpec, box: SpaceTimeBox, event_x, event_y, n_trials: int,
              seed: int, workers: int = 1) -> FKGResult:
    """Check ``P(X and Y) >= P(X) P(Y)`` on one trial stream.

    The standard error is that of the plug-in covariance
    ``mean(XY) - mean(X) mean(Y)`` (delta method); the probe passes unless the
    covariance is more than four standard errors below zero.
    """
    incr = []
    for ev in (event_x, event_y):
        base, flip = _base(ev)
        incr.append(base.increasing != flip)
    if incr[0] != incr[1]:
        raise ValueError("FKG needs both events increasing or both decreasing")
    out = event_outcomes(spec, box, [event_x, event_y], n_trials, seed, workers=workers)
    X = out[:, 0].astype(float)
    Y = out[:, 1].astype(float)
    p_x, p_y, p_xy = X.mean(), Y.mean(), (X * Y).mean()
    infl = X * Y - p_y * X - p_x * Y
    se = float(infl.std(ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else math.inf
    passed = bool(p_xy >= p_x * p_y - 4.0 * se)
    return FKGResult(float(p_xy), float(p_x), float(p_y), se, passed, n_trials)
