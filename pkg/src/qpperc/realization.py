"""Poisson death and bond arrivals on a finite space-time box."""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from . import _kernels
from ._philox import line_key, trial_key
from .environment import EnvironmentSpec, bond_rates, death_rates, edge_from_midpoint
from .lattice import block_edges, boundary_edges, l1_ball


@dataclass(frozen=True)
class SpaceTimeBox:
    """``Lambda_L(center) x (t_lo, t_hi)``."""

    center: tuple[int, ...]
    L: int
    t_lo: float
    t_hi: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in np.atleast_1d(self.center)))
        object.__setattr__(self, "t_lo", float(self.t_lo))
        object.__setattr__(self, "t_hi", float(self.t_hi))
        if self.L < 0:
            raise ValueError("box radius must be nonnegative")
        if self.t_hi < self.t_lo:
            raise ValueError("empty time window: t_hi < t_lo")

    @classmethod
    def around(cls, center, L: int, T: float, t: float = 0.0) -> "SpaceTimeBox":
        """The box of radius L and half-height T centred at (center, t)."""
        return cls(tuple(np.atleast_1d(center)), int(L), t - T, t + T)

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def geometry(self) -> "BoxGeometry":
        return _geometry(self.center, self.L)

    def contains_time(self, t: float) -> bool:
        return self.t_lo < t < self.t_hi


@dataclass(frozen=True, eq=False)
class BoxGeometry:
    vertices: np.ndarray
    e_lo: np.ndarray
    e_hi: np.ndarray
    e_dir: np.ndarray
    on_face: np.ndarray
    ids_v: np.ndarray
    ids_e: np.ndarray
    bd_inner: np.ndarray
    bd_base: np.ndarray
    bd_dir: np.ndarray

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {tuple(v): k for k, v in enumerate(self.vertices.tolist())}

    @cached_property
    def edge_index(self) -> dict[tuple[tuple[int, ...], int], int]:
        return {(tuple(self.vertices[x].tolist()), int(i)): k
                for k, (x, i) in enumerate(zip(self.e_lo, self.e_dir))}

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.e_lo.shape[0]

    def vertex(self, x) -> int:
        key = tuple(int(c) for c in np.atleast_1d(x))
        try:
            return self.index[key]
        except KeyError:
            raise ValueError(f"vertex {key} is not in the box") from None

    def edge(self, u) -> int:
        """Index of an edge given its midpoint, or a ``(base vertex, direction)`` pair."""
        if isinstance(u, tuple) and len(u) == 2 and not np.isscalar(u[0]):
            x, i = np.asarray(u[0], dtype=np.int64), int(u[1])
        else:
            x, i = edge_from_midpoint(u)
        key = (tuple(int(c) for c in x), i)
        try:
            return self.edge_index[key]
        except KeyError:
            raise ValueError(f"edge {key} is not in the box") from None

    def midpoint(self, k: int) -> tuple[float, ...]:
        mid = self.vertices[self.e_lo[k]].astype(float)
        mid[self.e_dir[k]] += 0.5
        return tuple(float(v) for v in mid)


@lru_cache(maxsize=64)
def _geometry(center: tuple[int, ...], L: int) -> BoxGeometry:
    verts = l1_ball(center, L)
    e_lo, e_hi, e_dir = block_edges(verts)
    c = np.asarray(center)
    on_face = np.abs(verts - c).sum(axis=1) == L
    ids_v = np.array([line_key("D", 0, v) for v in verts.tolist()], dtype=np.uint64).reshape(-1, 2)
    ids_e = np.array([line_key("B", int(i), verts[x].tolist()) for x, i in zip(e_lo, e_dir)],
                     dtype=np.uint64).reshape(-1, 2)
    index = {tuple(v): k for k, v in enumerate(verts.tolist())}
    bd = boundary_edges(center, L)
    bd_inner = np.array([index[y] for y, _, _ in bd], dtype=np.int64)
    bd_base = np.array([b for _, b, _ in bd], dtype=np.int64).reshape(-1, len(center))
    bd_dir = np.array([i for _, _, i in bd], dtype=np.int64)
    for arr in (verts, e_lo, e_hi, e_dir, on_face, ids_v, ids_e, bd_inner, bd_base, bd_dir):
        arr.setflags(write=False)
    return BoxGeometry(verts, e_lo, e_hi, e_dir, on_face, ids_v, ids_e, bd_inner, bd_base, bd_dir)


@dataclass(frozen=True, eq=False)
class BoxRates:
    """Poisson intensities actually used on the box: delta/kappa and kappa*lambda."""

    death: np.ndarray
    bond: np.ndarray
    boundary_bond: np.ndarray


@lru_cache(maxsize=64)
def box_rates(spec: EnvironmentSpec, center: tuple[int, ...], L: int) -> BoxRates:
    geo = _geometry(center, L)
    death = death_rates(spec, geo.vertices) / spec.kappa
    bond = np.zeros(geo.n_edges)
    for i in range(spec.d):
        sel = np.flatnonzero(geo.e_dir == i)
        if sel.size:
            bond[sel] = spec.kappa * bond_rates(spec, geo.vertices[geo.e_lo[sel]], i)
    bd = np.zeros(geo.bd_inner.shape[0])
    for i in range(spec.d):
        sel = np.flatnonzero(geo.bd_dir == i)
        if sel.size:
            bd[sel] = spec.kappa * bond_rates(spec, geo.bd_base[sel], i)
    for arr in (death, bond, bd):
        arr.setflags(write=False)
    return BoxRates(death, bond, bd)


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


@dataclass(frozen=True, eq=False)
class Realization:
    """Sorted death times per vertex line and bond times per edge line (CSR)."""

    box: SpaceTimeBox
    d_times: np.ndarray
    d_off: np.ndarray
    b_times: np.ndarray
    b_off: np.ndarray

    def __post_init__(self):
        geo = self.box.geometry
        if self.d_off.shape[0] != geo.n_vertices + 1 or self.b_off.shape[0] != geo.n_edges + 1:
            raise ValueError("line offsets do not match the box geometry")
        for times, off in ((self.d_times, self.d_off), (self.b_times, self.b_off)):
            if times.size and not (np.all(times > self.box.t_lo) and np.all(times < self.box.t_hi)):
                raise ValueError("arrival outside the open time window")
            for k in range(off.shape[0] - 1):
                seg = times[off[k]:off[k + 1]]
                if np.any(np.diff(seg) <= 0):
                    raise ValueError("arrival times on a line must be strictly increasing")
        if self.b_times.size and self.d_times.size:
            kept = _kernels.drop_coincident_bonds(self.d_times, self.d_off, self.b_times, self.b_off,
                                                  geo.e_lo, geo.e_hi)[2]
            if kept.size != self.b_times.size:
                raise ValueError("a bond coincides with a death on one of its endpoint lines")
        _frozen(self.d_times, self.d_off, self.b_times, self.b_off)

    def __eq__(self, other):
        if not isinstance(other, Realization):
            return NotImplemented
        return (self.box == other.box
                and all(np.array_equal(a, b) for a, b in zip(
                    (self.d_times, self.d_off, self.b_times, self.b_off),
                    (other.d_times, other.d_off, other.b_times, other.b_off))))

    @property
    def n_deaths(self) -> int:
        return int(self.d_times.size)

    @property
    def n_bonds(self) -> int:
        return int(self.b_times.size)

    def deaths_at(self, x) -> np.ndarray:
        k = self.box.geometry.vertex(x)
        return self.d_times[self.d_off[k]:self.d_off[k + 1]]

    def bonds_at(self, u) -> np.ndarray:
        k = self.box.geometry.edge(u)
        return self.b_times[self.b_off[k]:self.b_off[k + 1]]

    @property
    def deaths(self) -> dict[tuple[int, ...], np.ndarray]:
        geo = self.box.geometry
        return {tuple(v): self.d_times[self.d_off[k]:self.d_off[k + 1]]
                for k, v in enumerate(geo.vertices.tolist())}

    @property
    def bonds(self) -> dict[tuple[float, ...], np.ndarray]:
        geo = self.box.geometry
        return {geo.midpoint(k): self.b_times[self.b_off[k]:self.b_off[k + 1]]
                for k in range(geo.n_edges)}


def empty_realization(box: SpaceTimeBox) -> Realization:
    geo = box.geometry
    return Realization(box, np.empty(0), np.zeros(geo.n_vertices + 1, dtype=np.int64),
                       np.empty(0), np.zeros(geo.n_edges + 1, dtype=np.int64))


def sample_realization(spec: EnvironmentSpec, box: SpaceTimeBox, seed: int, trial: int) -> Realization:
    """One realization; a pure function of (spec, box, seed, trial)."""
    if spec.d != box.d:
        raise ValueError("environment and box dimensions differ")
    k0, k1 = (np.uint64(v) for v in trial_key(int(seed), int(trial)))
    geo = box.geometry
    rates = box_rates(spec, box.center, box.L)
    d_times, d_off = _kernels.sample_lines(k0, k1, geo.ids_v, rates.death, box.t_lo, box.t_hi)
    b_times, b_off = _kernels.sample_lines(k0, k1, geo.ids_e, rates.bond, box.t_lo, box.t_hi)
    d_times, d_off, b_times, b_off = _kernels.drop_coincident_bonds(d_times, d_off, b_times, b_off,
                                                                    geo.e_lo, geo.e_hi)
    return Realization(box, d_times, d_off, b_times, b_off)


def _insert(times: np.ndarray, off: np.ndarray, k: int, t: float):
    seg = times[off[k]:off[k + 1]]
    pos = off[k] + int(np.searchsorted(seg, t))
    new_times = np.insert(times, pos, t)
    new_off = off.copy()
    new_off[k + 1:] += 1
    return new_times, new_off


def _check_new_time(r: Realization, t: float):
    if not r.box.contains_time(t):
        raise ValueError(f"time {t} is outside the open window ({r.box.t_lo}, {r.box.t_hi})")
    if np.any(r.d_times == t) or np.any(r.b_times == t):
        raise ValueError(f"time {t} coincides with an existing arrival")


def add_bond(r: Realization, u, t: float) -> Realization:
    """Copy of r with one more bond at edge u (midpoint or (x, direction))."""
    t = float(t)
    _check_new_time(r, t)
    k = r.box.geometry.edge(u)
    b_times, b_off = _insert(r.b_times, r.b_off, k, t)
    return Realization(r.box, r.d_times.copy(), r.d_off.copy(), b_times, b_off)


def add_death(r: Realization, x, t: float) -> Realization:
    t = float(t)
    _check_new_time(r, t)
    k = r.box.geometry.vertex(x)
    d_times, d_off = _insert(r.d_times, r.d_off, k, t)
    return Realization(r.box, d_times, d_off, r.b_times.copy(), r.b_off.copy())


def from_lines(box: SpaceTimeBox, deaths: dict | None = None, bonds: dict | None = None) -> Realization:
    """Build a realization from ``{vertex: times}`` and ``{edge: times}`` mappings."""
    geo = box.geometry
    d_lists = [[] for _ in range(geo.n_vertices)]
    b_lists = [[] for _ in range(geo.n_edges)]
    for x, ts in (deaths or {}).items():
        d_lists[geo.vertex(x)].extend(float(t) for t in ts)
    for u, ts in (bonds or {}).items():
        b_lists[geo.edge(u)].extend(float(t) for t in ts)

    def pack(lists):
        off = np.zeros(len(lists) + 1, dtype=np.int64)
        off[1:] = np.cumsum([len(s) for s in lists])
        times = np.array([t for s in lists for t in sorted(s)], dtype=float)
        return times, off

    d_times, d_off = pack(d_lists)
    b_times, b_off = pack(b_lists)
    return Realization(box, d_times, d_off, b_times, b_off)


def _fmt_pos(coords) -> str:
    return " ".join(repr(float(c)) if float(c) != int(c) else str(int(c)) for c in coords)


def dump_realization(r: Realization, dest=None) -> str:
    """Line-oriented text: ``D x.. time`` and ``B u.. time``, times to 17 digits."""
    geo = r.box.geometry
    lines = ["# qpperc realization v1",
             f"# center {' '.join(str(c) for c in r.box.center)}",
             f"# L {r.box.L}",
             f"# window {r.box.t_lo:.17g} {r.box.t_hi:.17g}"]
    for k, v in enumerate(geo.vertices.tolist()):
        for t in r.d_times[r.d_off[k]:r.d_off[k + 1]]:
            lines.append(f"D {_fmt_pos(v)} {t:.17g}")
    for k in range(geo.n_edges):
        mid = _fmt_pos(geo.midpoint(k))
        for t in r.b_times[r.b_off[k]:r.b_off[k + 1]]:
            lines.append(f"B {mid} {t:.17g}")
    text = "\n".join(lines) + "\n"
    if dest is not None:
        Path(dest).write_text(text)
    return text


def load_realization(source) -> Realization:
    """Inverse of :func:`dump_realization`; accepts a path or the text itself."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text()
    center = L = window = None
    deaths: dict = {}
    bonds: dict = {}
    for lineno, line in enumerate(io.StringIO(source), start=1):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "#":
            if len(parts) > 1 and parts[1] == "center":
                center = tuple(int(c) for c in parts[2:])
            elif len(parts) > 1 and parts[1] == "L":
                L = int(parts[2])
            elif len(parts) > 1 and parts[1] == "window":
                window = (float(parts[2]), float(parts[3]))
            continue
        kind, pos, t = parts[0], parts[1:-1], float(parts[-1])
        if kind == "D":
            deaths.setdefault(tuple(int(c) for c in pos), []).append(t)
        elif kind == "B":
            bonds.setdefault(tuple(float(c) for c in pos), []).append(t)
        else:
            raise ValueError(f"line {lineno}: unknown record kind {kind!r}")
    if center is None or L is None or window is None:
        raise ValueError("missing box header")
    return from_lines(SpaceTimeBox(center, L, *window), deaths, bonds)
