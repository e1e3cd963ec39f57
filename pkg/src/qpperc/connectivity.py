"""Exact cluster structure of a realization.

Deaths cut each vertex line into death-free intervals; a bond at time t on
edge {x, y} merges the interval of x containing t with that of y.  The
clusters are the classes of a disjoint-set forest over intervals, so no time
discretisation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .environment import EnvironmentSpec
from .realization import Realization, box_rates


@dataclass(frozen=True)
class Mask:
    """Restriction ``W`` of a box: drop some vertex lines and/or narrow the window.

    Only box-shaped and box-minus-lines regions are expressible, which covers
    every conditioning used on finite boxes.
    """

    exclude: frozenset = frozenset()
    t_lo: float | None = None
    t_hi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "exclude",
                           frozenset(tuple(int(c) for c in np.atleast_1d(v)) for v in self.exclude))

    @classmethod
    def sub_box(cls, box, center, L: int, t_lo: float | None = None, t_hi: float | None = None) -> "Mask":
        c = np.asarray(center)
        verts = box.geometry.vertices
        outside = verts[np.abs(verts - c).sum(axis=1) > L]
        return cls(frozenset(map(tuple, outside.tolist())), t_lo, t_hi)

    @classmethod
    def only(cls, box, vertices) -> "Mask":
        keep = {tuple(int(c) for c in np.atleast_1d(v)) for v in vertices}
        return cls(frozenset(v for v in map(tuple, box.geometry.vertices.tolist()) if v not in keep))

    def arrays(self, box) -> tuple[np.ndarray, float, float]:
        geo = box.geometry
        active = np.ones(geo.n_vertices, dtype=np.bool_)
        for v in self.exclude:
            if v in geo.index:
                active[geo.index[v]] = False
        w_lo = box.t_lo if self.t_lo is None else max(box.t_lo, float(self.t_lo))
        w_hi = box.t_hi if self.t_hi is None else min(box.t_hi, float(self.t_hi))
        return active, w_lo, w_hi

    def describe(self) -> str:
        parts = []
        if self.exclude:
            parts.append("minus " + ";".join(",".join(map(str, v)) for v in sorted(self.exclude)))
        if self.t_lo is not None or self.t_hi is not None:
            parts.append(f"window {self.t_lo}:{self.t_hi}")
        return " ".join(parts) or "box"


FULL = Mask()


@dataclass(frozen=True)
class BoundarySpec:
    """Which faces of the box count: the two time slabs and/or the spatial face."""

    lower: bool = True
    upper: bool = True
    horizontal: bool = True

    @property
    def flags(self) -> int:
        return ((_kernels.FACE_LOWER if self.lower else 0)
                | (_kernels.FACE_UPPER if self.upper else 0)
                | (_kernels.FACE_HORIZONTAL if self.horizontal else 0))


VERTICAL = BoundarySpec(True, True, False)
HORIZONTAL = BoundarySpec(False, False, True)


@dataclass(frozen=True)
class IntervalId:
    vertex: tuple[int, ...]
    index: int


@dataclass(frozen=True, eq=False)
class ClusterStructure:
    realization: Realization
    mask: Mask
    roots: np.ndarray
    n_unions: int
    active: np.ndarray = field(repr=False)
    w_lo: float = 0.0
    w_hi: float = 0.0

    @property
    def box(self):
        return self.realization.box

    @property
    def n_intervals(self) -> int:
        return int(self.roots.shape[0])

    @property
    def n_clusters(self) -> int:
        return int(np.unique(self.roots).size)

    def interval(self, point) -> int:
        """Flat interval index of an alive point ``(vertex, time)``."""
        x, t = point
        r = self.realization
        v = r.box.geometry.vertex(x)
        t = float(t)
        if not self.w_lo < t < self.w_hi:
            raise ValueError(f"time {t} outside the window ({self.w_lo}, {self.w_hi})")
        if not self.active[v]:
            raise ValueError(f"vertex {tuple(x)} is masked out")
        i = _kernels.locate(r.d_times, r.d_off, v, t)
        if i < 0:
            raise ValueError(f"({tuple(np.atleast_1d(x))}, {t}) is a death point")
        return int(i)

    def interval_id(self, point) -> IntervalId:
        i = self.interval(point)
        v = self.realization.box.geometry.vertex(point[0])
        return IntervalId(tuple(np.atleast_1d(point[0]).tolist()), i - int(self.realization.d_off[v]) - v)

    def root(self, point) -> int:
        return int(self.roots[self.interval(point)])

    @cached_property
    def interval_bounds(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(vertex index, start, end) of every interval, clipped to the mask window."""
        r = self.realization
        n_v = r.d_off.shape[0] - 1
        counts = np.diff(r.d_off) + 1
        vert = np.repeat(np.arange(n_v), counts)
        lo = np.empty(self.n_intervals)
        hi = np.empty(self.n_intervals)
        for v in range(n_v):
            base = r.d_off[v] + v
            cuts = r.d_times[r.d_off[v]:r.d_off[v + 1]]
            edges = np.concatenate([[r.box.t_lo], cuts, [r.box.t_hi]])
            lo[base:base + counts[v]] = edges[:-1]
            hi[base:base + counts[v]] = edges[1:]
        return vert, np.clip(lo, self.w_lo, self.w_hi), np.clip(hi, self.w_lo, self.w_hi)

    def summary(self) -> list[dict]:
        """Per cluster: id, number of intervals, alive length, faces touched."""
        r = self.realization
        geo = r.box.geometry
        vert, lo, hi = self.interval_bounds
        out = {}
        for i in range(self.n_intervals):
            v = vert[i]
            if not self.active[v]:
                continue
            root = int(self.roots[i])
            row = out.setdefault(root, {"cluster": root, "size": 0, "alive_length": 0.0,
                                        "lower": False, "upper": False, "horizontal": False})
            row["size"] += 1
            row["alive_length"] += float(hi[i] - lo[i])
            if geo.on_face[v]:
                row["horizontal"] = True
        for v in range(geo.n_vertices):
            if not self.active[v]:
                continue
            low = _kernels.lower_interval(r.d_times, r.d_off, v, self.w_lo)
            up = _kernels.upper_interval(r.d_times, r.d_off, v, self.w_hi)
            out[int(self.roots[low])]["lower"] = True
            out[int(self.roots[up])]["upper"] = True
        return [out[k] for k in sorted(out)]


def build_clusters(r: Realization, mask: Mask = FULL) -> ClusterStructure:
    active, w_lo, w_hi = mask.arrays(r.box)
    geo = r.box.geometry
    roots, unions = _kernels.build_forest(r.d_times, r.d_off, r.b_times, r.b_off,
                                          geo.e_lo, geo.e_hi, active, w_lo, w_hi)
    roots.setflags(write=False)
    return ClusterStructure(r, mask, roots, int(unions), active, w_lo, w_hi)


def connected(cs: ClusterStructure, a, b) -> bool:
    """Whether alive points ``a = (vertex, time)`` and ``b`` share a cluster."""
    return cs.root(a) == cs.root(b)


def boundary_hit(cs: ClusterStructure, a, bspec: BoundarySpec) -> bool:
    r = cs.realization
    return bool(_kernels.boundary_hit_root(cs.roots, r.d_times, r.d_off, cs.active, cs.w_lo, cs.w_hi,
                                           r.box.geometry.on_face, cs.root(a), bspec.flags))


def vertical_crossing(cs: ClusterStructure) -> bool:
    """Some cluster meets both time faces of the (masked) box."""
    r = cs.realization
    mark = np.zeros(cs.n_intervals, dtype=np.int64)
    return bool(_kernels.vertical_crossing(cs.roots, r.d_times, r.d_off, cs.active,
                                           cs.w_lo, cs.w_hi, 1, mark))


def q_statistic(cs: ClusterStructure, a, spec: EnvironmentSpec, bspec: BoundarySpec = BoundarySpec()) -> float:
    """Boundary flux of a's cluster in the box.

    Sum over edges leaving the box of (kappa * lambda_u) times the alive time
    on the inner endpoint line that is connected to a, plus one for each
    time-face endpoint ``(y, t_lo)``, ``(y, t_hi)`` connected to a.  Its mean
    over realizations is the boundary-flux functional Q(a, box).
    """
    if cs.mask != FULL:
        raise ValueError("the flux statistic is defined on the unmasked box")
    r = cs.realization
    geo = r.box.geometry
    rates = box_rates(spec, r.box.center, r.box.L)
    return float(_kernels.q_value(cs.roots, r.d_times, r.d_off, r.box.t_lo, r.box.t_hi, cs.root(a),
                                  geo.bd_inner, rates.boundary_bond, bspec.flags))
