import itertools

import numpy as np
from hypothesis import given, strategies as st

from qpperc.lattice import block_edges, boundary_edges, l1_ball


def brute_ball(center, L):
    d = len(center)
    rng = range(-L, L + 1)
    return sorted(tuple(c + o for c, o in zip(center, off))
                  for off in itertools.product(rng, repeat=d) if sum(map(abs, off)) <= L)


@given(st.integers(1, 3), st.integers(0, 4), st.data())
def test_ball_matches_brute_force(d, L, data):
    center = tuple(data.draw(st.lists(st.integers(-10, 10), min_size=d, max_size=d)))
    got = [tuple(v) for v in l1_ball(center, L).tolist()]
    assert got == brute_ball(center, L)


@given(st.integers(1, 3), st.integers(0, 4))
def test_edges_are_midpoints_within_radius(d, L):
    verts = l1_ball((0,) * d, L)
    lo, hi, di = block_edges(verts)
    mids = {tuple(verts[a] + 0.5 * np.eye(d, dtype=int)[i]) for a, i in zip(lo, di)}
    # every half-integer midpoint with l1 norm <= L
    expect = set()
    for v in brute_ball((0,) * d, L + 1):
        for i in range(d):
            m = tuple(c + 0.5 * (k == i) for k, c in enumerate(v))
            if sum(map(abs, m)) <= L:
                expect.add(m)
    assert mids == expect
    assert np.all(np.abs(verts[hi] - verts[lo]).sum(axis=1) == 1)


def test_ball_counts():
    assert len(l1_ball((0,), 3)) == 7
    assert len(l1_ball((0, 0), 1)) == 5
    assert len(l1_ball((0, 0), 2)) == 13
    assert len(l1_ball((0, 0, 0), 1)) == 7


@given(st.integers(1, 3), st.integers(0, 3))
def test_boundary_edges_leave_the_block(d, L):
    c = (2,) * d
    bd = boundary_edges(c, L)
    inside = set(brute_ball(c, L))
    for y, base, i in bd:
        assert y in inside
        other = tuple(b + (k == i) for k, b in enumerate(base)) if base == y else base
        assert other not in inside
        assert sum(abs(a - b) for a, b in zip(y, other)) == 1
    # count: each face vertex has exactly as many outward edges as enumerated by brute force
    brute = sum(1 for y in inside for i in range(d) for s in (1, -1)
                if tuple(v + s * (k == i) for k, v in enumerate(y)) not in inside)
    assert len(bd) == brute


def test_boundary_of_single_site():
    assert sorted(boundary_edges((0,), 0)) == [((0,), (-1,), 0), ((0,), (0,), 0)]
