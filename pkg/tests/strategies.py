"""Random small realizations: a numpy generator for bulk sweeps and a hypothesis strategy."""

import numpy as np
from hypothesis import assume, strategies as st

from qpperc.realization import SpaceTimeBox, from_lines

SHAPES = [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1)]  # (d, L) with at most 6 vertices


def _lines(box):
    geo = box.geometry
    verts = [tuple(v) for v in geo.vertices.tolist()]
    edges = [geo.midpoint(k) for k in range(geo.n_edges)]
    return verts, edges


def random_instance(rng, max_arrivals=20, rate_range=(0.1, 5.0)):
    """Poisson arrivals with per-line rates uniform in ``rate_range``; at most ``max_arrivals`` in total."""
    d, L = SHAPES[rng.integers(len(SHAPES))]
    center = tuple(int(c) for c in rng.integers(-3, 4, size=d))
    t0 = float(rng.uniform(-2, 2))
    box = SpaceTimeBox(center, L, t0, t0 + float(rng.uniform(0.2, 3.0)))
    verts, edges = _lines(box)
    width = box.t_hi - box.t_lo
    while True:
        deaths, bonds = {}, {}
        for v in verts:
            n = rng.poisson(rng.uniform(*rate_range) * width)
            deaths[v] = np.sort(rng.uniform(box.t_lo, box.t_hi, n))
        for u in edges:
            n = rng.poisson(rng.uniform(*rate_range) * width)
            bonds[u] = np.sort(rng.uniform(box.t_lo, box.t_hi, n))
        total = sum(map(len, deaths.values())) + sum(map(len, bonds.values()))
        if total <= max_arrivals:
            return from_lines(box, deaths, bonds)
        # thin the window until the instance is small enough
        width *= 0.7


def random_point(rng, r, exclude=()):
    """A uniformly random point of the box that is not a death time."""
    box = r.box
    verts = box.geometry.vertices
    while True:
        v = tuple(int(c) for c in verts[rng.integers(len(verts))])
        t = float(rng.uniform(box.t_lo, box.t_hi))
        if t not in r.deaths_at(v) and box.contains_time(t):
            return v, t


@st.composite
def small_realizations(draw, max_arrivals=20):
    d, L = draw(st.sampled_from(SHAPES))
    center = tuple(draw(st.lists(st.integers(-5, 5), min_size=d, max_size=d)))
    box = SpaceTimeBox(center, L, 0.0, 1.0)
    verts, edges = _lines(box)
    n = draw(st.integers(0, max_arrivals))
    times = draw(st.lists(st.floats(0.001, 0.999, allow_nan=False), min_size=n, max_size=n, unique=True))
    deaths, bonds = {}, {}
    for t in times:
        if draw(st.booleans()) or not edges:
            deaths.setdefault(draw(st.sampled_from(verts)), []).append(t)
        else:
            bonds.setdefault(draw(st.sampled_from(edges)), []).append(t)
    return from_lines(box, deaths, bonds)


@st.composite
def alive_points(draw, r):
    verts = [tuple(v) for v in r.box.geometry.vertices.tolist()]
    v = draw(st.sampled_from(verts))
    t = draw(st.floats(r.box.t_lo, r.box.t_hi, exclude_min=True, exclude_max=True, allow_nan=False))
    assume(t not in r.deaths_at(v))
    return v, float(t)
