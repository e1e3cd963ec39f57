"""Quasiperiodic rate fields on Z^d sampled along Diophantine torus shifts.

Death rates live on vertices, ``delta_x = h_0(theta_0 + M_0 x)``, and bond
rates on edges, ``lambda_{x + e_i/2} = 1 / h_i(theta_i + M_i x)``.  The torus
metric is the sup over coordinates of the circle distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .lattice import l1_ball

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateFieldError(ValueError):
    """A lattice element landed exactly on a zero of its sampling function."""


def _reduce(coords) -> np.ndarray:
    arr = np.mod(np.asarray(coords, dtype=float), 1.0)
    # -tiny % 1.0 rounds to 1.0
    arr[arr >= 1.0] = 0.0
    return arr


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        reduced = _reduce(np.atleast_1d(self.coords))
        object.__setattr__(self, "coords", tuple(float(c) for c in reduced))

    @property
    def nu(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def _as_coords(p) -> np.ndarray:
    if isinstance(p, TorusPoint):
        return np.asarray(p.coords)
    return np.asarray(p, dtype=float)


def circle_sup_distance(a, b) -> np.ndarray:
    """Vectorised torus distance over the last axis (arrays broadcast)."""
    diff = np.mod(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)), 1.0)
    return np.minimum(diff, 1.0 - diff).max(axis=-1)


def torus_distance(a, b) -> float:
    a, b = _as_coords(a), _as_coords(b)
    if a.shape != b.shape:
        raise ValueError(f"torus dimension mismatch: {a.shape} vs {b.shape}")
    return float(circle_sup_distance(a, b))


@dataclass(frozen=True)
class SamplingFunction:
    """``constant``: h = level.  ``power-product``: h = level * prod d(theta, z_j)^s_j.

    A constant of ``inf`` is allowed and turns the corresponding bonds off
    (lambda = 1/h = 0).
    """

    kind: str
    level: float
    zeros: tuple[tuple[TorusPoint, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "power-product"):
            raise ValueError(f"unknown sampling function kind {self.kind!r}")
        if not self.level > 0:
            raise ValueError("level must be positive")
        if self.kind == "constant" and self.zeros:
            raise ValueError("constant sampling function cannot have zeros")
        if self.kind == "power-product":
            if not math.isfinite(self.level):
                raise ValueError("power-product level must be finite")
            zs = tuple((z if isinstance(z, TorusPoint) else TorusPoint(tuple(np.atleast_1d(z))), float(s))
                       for z, s in self.zeros)
            for _, s in zs:
                if not s > 0:
                    raise ValueError("zero exponents must be positive")
            if len({z.nu for z, _ in zs}) > 1:
                raise ValueError("zeros live on tori of different dimension")
            object.__setattr__(self, "zeros", zs)

    @classmethod
    def constant(cls, level: float) -> "SamplingFunction":
        return cls("constant", float(level))

    @classmethod
    def power_product(cls, zeros, level: float = 1.0) -> "SamplingFunction":
        return cls("power-product", float(level), tuple(zeros))

    @property
    def n_zeros(self) -> int:
        return len(self.zeros)

    def admissible(self, sigma: float) -> bool:
        return all(s < sigma for _, s in self.zeros)

    def __call__(self, theta) -> np.ndarray | float:
        theta = _as_coords(theta)
        scalar = theta.ndim == 1
        theta = np.atleast_2d(theta)
        out = np.full(theta.shape[0], self.level, dtype=float)
        for z, s in self.zeros:
            out = out * circle_sup_distance(theta, np.asarray(z.coords)) ** s
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class TorusField:
    """One torus shift ``theta -> M x + theta`` together with its sampling function."""

    matrix: tuple[tuple[float, ...], ...]
    theta: TorusPoint
    h: SamplingFunction

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in m))
        if not isinstance(self.theta, TorusPoint):
            object.__setattr__(self, "theta", TorusPoint(tuple(np.atleast_1d(self.theta))))
        if self.theta.nu != m.shape[0]:
            raise ValueError("phase dimension does not match matrix rows")
        if self.h.zeros and self.h.zeros[0][0].nu != m.shape[0]:
            raise ValueError("sampling function zeros do not live on this torus")

    @property
    def nu(self) -> int:
        return len(self.matrix)

    @cached_property
    def M(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def orbit(self, x: np.ndarray) -> np.ndarray:
        """Torus points ``M x + theta mod 1`` for an (n, d) array of sites."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        # fixed summation order, so a site gives the same bits alone or in a batch
        acc = np.broadcast_to(np.asarray(self.theta.coords), (x.shape[0], self.nu)).copy()
        for j in range(x.shape[1]):
            acc += x[:, j:j + 1] * self.M[:, j]
        return _reduce(acc)


@dataclass(frozen=True)
class EnvironmentSpec:
    """Fields ``fields[0]`` (deaths) and ``fields[1..d]`` (bonds along e_1..e_d)."""

    d: int
    fields: tuple[TorusField, ...]
    kappa: float
    zeta: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if self.d < 1:
            raise ValueError("d must be positive")
        if len(self.fields) != self.d + 1:
            raise ValueError(f"need d + 1 = {self.d + 1} torus fields, got {len(self.fields)}")
        for f in self.fields:
            if len(f.matrix[0]) != self.d:
                raise ValueError("every shift matrix must have d columns")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    @property
    def R_v(self) -> int:
        return self.fields[0].h.n_zeros

    @property
    def R_e(self) -> int:
        return sum(f.h.n_zeros for f in self.fields[1:])

    @property
    def R(self) -> int:
        return max(2, self.R_v + self.R_e)

    @property
    def nu(self) -> int:
        return min(f.nu for f in self.fields)

    def is_admissible(self) -> bool:
        return all(f.h.admissible(self.sigma) for f in self.fields)


def shift(spec: EnvironmentSpec, i: int, x) -> TorusPoint:
    if not 0 <= i <= spec.d:
        raise IndexError(f"torus index {i} outside 0..{spec.d}")
    return TorusPoint(tuple(spec.fields[i].orbit(np.asarray(x).reshape(1, -1))[0]))


def death_rates(spec: EnvironmentSpec, sites) -> np.ndarray:
    """delta at each row of an (n, d) site array."""
    sites = np.atleast_2d(np.asarray(sites))
    vals = np.asarray(spec.fields[0].h(spec.fields[0].orbit(sites)), dtype=float).reshape(-1)
    bad = np.flatnonzero(vals == 0.0)
    if bad.size:
        raise DegenerateFieldError(f"death rate vanishes at site {tuple(sites[bad[0]])}")
    return vals


def bond_rates(spec: EnvironmentSpec, bases, direction: int) -> np.ndarray:
    """lambda on the edges ``base + e_direction / 2`` (direction is 0-based)."""
    bases = np.atleast_2d(np.asarray(bases))
    f = spec.fields[direction + 1]
    h = np.asarray(f.h(f.orbit(bases)), dtype=float).reshape(-1)
    bad = np.flatnonzero(h == 0.0)
    if bad.size:
        mid = bases[bad[0]].astype(float)
        mid[direction] += 0.5
        raise DegenerateFieldError(f"bond rate diverges at edge {tuple(mid)}")
    with np.errstate(divide="ignore"):
        return 1.0 / h


def death_rate(spec: EnvironmentSpec, x) -> float:
    return float(death_rates(spec, np.asarray(x).reshape(1, -1))[0])


def edge_from_midpoint(u) -> tuple[np.ndarray, int]:
    """Split a midpoint ``x + e_i/2`` into ``(x, i)``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    frac = np.abs(u - np.round(u))
    half = np.flatnonzero(np.isclose(frac, 0.5))
    if half.size != 1 or not np.allclose(np.delete(frac, half), 0.0):
        raise ValueError(f"{tuple(u)} is not an edge midpoint")
    i = int(half[0])
    x = np.round(u).astype(np.int64)
    x[i] = int(math.floor(u[i]))
    return x, i


def bond_rate(spec: EnvironmentSpec, u) -> float:
    x, i = edge_from_midpoint(u)
    return float(bond_rates(spec, x.reshape(1, -1), i)[0])


def local_density(spec: EnvironmentSpec, x) -> tuple[float, float]:
    """Upper and lower local densities kappa^2 * (max / min incident lambda) / delta."""
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    delta = death_rate(spec, x)
    lams = []
    for i in range(spec.d):
        below = x.copy()
        below[i] -= 1
        lams.append(bond_rates(spec, x.reshape(1, -1), i)[0])
        lams.append(bond_rates(spec, below.reshape(1, -1), i)[0])
    k2 = spec.kappa ** 2
    return k2 * max(lams) / delta, k2 * min(lams) / delta


class DiophantineCertificate(NamedTuple):
    c_hat: float
    witness: tuple[int, ...]


def diophantine_certificate(M, zeta: float, N: int) -> DiophantineCertificate:
    """Finite-range Diophantine constant: min of ``d(Mx, 0) |x|_1^zeta`` over 0 < |x|_1 <= N.

    Only one of each pair ``x, -x`` is examined (the distance is symmetric);
    the first minimiser in order of increasing norm is the witness.
    """
    if N < 1:
        raise ValueError("search radius must be at least 1")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    pts = l1_ball(np.zeros(M.shape[1], dtype=np.int64), N)
    nz = pts != 0
    first = nz.argmax(axis=1)
    keep = nz.any(axis=1) & (pts[np.arange(len(pts)), first] > 0)
    pts = pts[keep]
    norms = np.abs(pts).sum(axis=1)
    order = np.lexsort(tuple(pts.T[::-1]) + (norms,))
    pts, norms = pts[order], norms[order]
    dist = circle_sup_distance(pts @ M.T, np.zeros(M.shape[0]))
    vals = dist * norms.astype(float) ** zeta
    k = int(np.argmin(vals))
    return DiophantineCertificate(float(vals[k]), tuple(int(v) for v in pts[k]))


@dataclass
class ResonanceReport:
    epsilon: float
    box_center: tuple[int, ...]
    box_radius: int
    resonant_sites: list[tuple[int, ...]] = field(default_factory=list)
    site_rates: list[float] = field(default_factory=list)
    resonant_edges: list[tuple[float, ...]] = field(default_factory=list)
    edge_rates: list[float] = field(default_factory=list)

    @property
    def is_resonant(self) -> bool:
        return bool(self.resonant_sites or self.resonant_edges)

    def rows(self) -> list[tuple]:
        """``(kind, *position, rate, epsilon)`` rows, sites first."""
        out = [("site", *s, r, self.epsilon) for s, r in zip(self.resonant_sites, self.site_rates)]
        out += [("edge", *u, r, self.epsilon) for u, r in zip(self.resonant_edges, self.edge_rates)]
        return out


def scan_resonances(spec: EnvironmentSpec, center, L: int, epsilon: float) -> ResonanceReport:
    """All epsilon-resonant sites and edges of the l1 block of radius L."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    center = np.asarray(center, dtype=np.int64).reshape(-1)
    report = ResonanceReport(float(epsilon), tuple(int(c) for c in center), int(L))
    sites = l1_ball(center, L)
    delta = death_rates(spec, sites)
    hit = np.flatnonzero(delta < epsilon)
    report.resonant_sites = [tuple(int(v) for v in sites[k]) for k in hit]
    report.site_rates = [float(delta[k]) for k in hit]
    for i in range(spec.d):
        upper = sites.copy()
        upper[:, i] += 1
        inside = np.abs(upper - center).sum(axis=1) <= L
        bases = sites[inside]
        lam = bond_rates(spec, bases, i)
        for k in np.flatnonzero(lam > 1.0 / epsilon):
            mid = bases[k].astype(float)
            mid[i] += 0.5
            report.resonant_edges.append(tuple(float(v) for v in mid))
            report.edge_rates.append(float(lam[k]))
    return report


def admissibility_ratios(h: SamplingFunction, zero_index: int, distances: Sequence[float],
                         direction=None) -> np.ndarray:
    """``|log h| / |log d|`` at points at sup-distance ``d`` from one zero."""
    z = np.asarray(h.zeros[zero_index][0].coords)
    if direction is None:
        direction = np.ones_like(z)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.abs(direction).max()
    dist = np.asarray(distances, dtype=float)
    pts = z[None, :] + dist[:, None] * direction[None, :]
    return np.abs(np.log(h(pts))) / np.abs(np.log(dist))


def field_spec(matrix, theta, h: SamplingFunction) -> TorusField:
    return TorusField(matrix, TorusPoint(tuple(np.atleast_1d(theta))), h)


def uniform_environment(d: int, delta: float, lam: float, kappa: float = 1.0) -> EnvironmentSpec:
    """Constant fields; ``lam = 0`` switches bonds off."""
    row = tuple(GOLDEN for _ in range(d))
    fields = [field_spec((row,), 0.0, SamplingFunction.constant(delta))]
    bond_level = math.inf if lam == 0 else 1.0 / lam
    fields += [field_spec((row,), 0.0, SamplingFunction.constant(bond_level)) for _ in range(d)]
    return EnvironmentSpec(d, tuple(fields), kappa)


def golden_environment(kappa: float = 1.0, exponent: float = 0.9, death_zero: float = 0.5,
                       bond_zero: float = 0.5, theta0: float = 0.0, theta1: float = 0.0,
                       level: float = 1.0, sigma: float = 1.0, zeta: float = 1.0) -> EnvironmentSpec:
    """d = 1 golden-rotation environment with one zero in each sampling function."""
    h0 = SamplingFunction.power_product([((death_zero,), exponent)], level)
    h1 = SamplingFunction.power_product([((bond_zero,), exponent)], level)
    fields = (field_spec(((GOLDEN,),), theta0, h0), field_spec(((GOLDEN,),), theta1, h1))
    return EnvironmentSpec(1, fields, kappa, zeta=zeta, sigma=sigma)
