"""Blocks of Z^d in the l1 metric, their edges, and edge boundaries.

An edge is stored as ``(base vertex x, direction i)`` and stands for the
midpoint ``x + e_i / 2``.
"""

from __future__ import annotations

import numpy as np


def l1_ball(center, radius: int) -> np.ndarray:
    """All lattice points y with ``|y - center|_1 <= radius``, lexicographic."""
    center = np.asarray(center, dtype=np.int64).reshape(-1)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    offsets = _ball_offsets(center.size, int(radius))
    return offsets + center


def _ball_offsets(d: int, radius: int) -> np.ndarray:
    if d == 1:
        return np.arange(-radius, radius + 1, dtype=np.int64).reshape(-1, 1)
    parts = []
    for a in range(-radius, radius + 1):
        rest = _ball_offsets(d - 1, radius - abs(a))
        head = np.full((rest.shape[0], 1), a, dtype=np.int64)
        parts.append(np.hstack([head, rest]))
    return np.vstack(parts)


def block_edges(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edges with both endpoints in ``vertices``.

    For an l1 block this is exactly the set of midpoints within the radius.
    Returns (lower endpoint index, upper endpoint index, direction).
    """
    index = {tuple(v): k for k, v in enumerate(vertices.tolist())}
    d = vertices.shape[1]
    lo, hi, direction = [], [], []
    for k, v in enumerate(vertices.tolist()):
        for i in range(d):
            w = list(v)
            w[i] += 1
            j = index.get(tuple(w))
            if j is not None:
                lo.append(k)
                hi.append(j)
                direction.append(i)
    return (np.array(lo, dtype=np.int64), np.array(hi, dtype=np.int64),
            np.array(direction, dtype=np.int64))


def boundary_edges(center, radius: int) -> list[tuple[tuple[int, ...], tuple[int, ...], int]]:
    """Edges joining the block to its complement.

    Each entry is ``(inner vertex, base vertex, direction)``; the base vertex is
    the lower endpoint, which is what the bond field is sampled at.
    """
    center = np.asarray(center, dtype=np.int64).reshape(-1)
    d = center.size
    out = []
    for y in l1_ball(center, radius).tolist():
        if int(np.abs(np.asarray(y) - center).sum()) != radius:
            continue
        for i in range(d):
            for sign in (1, -1):
                w = list(y)
                w[i] += sign
                if int(np.abs(np.asarray(w) - center).sum()) == radius + 1:
                    base = tuple(y) if sign == 1 else tuple(w)
                    out.append((tuple(y), base, i))
    return out


def l1_norm(x) -> int:
    return int(np.abs(np.asarray(x)).sum())
