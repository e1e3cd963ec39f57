"""Philox4x64-10 counter-based generator, compiled with numba.

Produces the same raw stream as ``numpy.random.Philox(key=..., counter=...)``,
so every line of every trial can be regenerated on its own from
``(seed, trial, line id)``: the trial pair is the 128-bit key and the line id
occupies the two high counter words.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numba import njit, uint64

_M0 = uint64(0xD2E7470EE14C6C93)
_M1 = uint64(0xCA5A826395121157)
_W0 = uint64(0x9E3779B97F4A7C15)
_W1 = uint64(0xBB67AE8584CAA73B)
_MASK32 = uint64(0xFFFFFFFF)
_S32 = uint64(32)
_S11 = uint64(11)
_ONE = uint64(1)
_ZERO = uint64(0)
_TWO_M53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mulhilo(a, b):
    lo = a * b
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, lo


@njit(cache=True)
def philox_block(c0, c1, c2, c3, k0, k1):
    """Encrypt one 256-bit counter; returns four uint64 words."""
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(cache=True)
def raw_stream(k0, k1, line_lo, line_hi, n):
    """First ``n`` raw words of the stream for one line (testing helper)."""
    out = np.empty(n, dtype=np.uint64)
    block = _ZERO
    i = 0
    while i < n:
        block = block + _ONE
        w0, w1, w2, w3 = philox_block(block, _ZERO, line_lo, line_hi, k0, k1)
        for w in (w0, w1, w2, w3):
            if i < n:
                out[i] = w
                i += 1
    return out


@njit(cache=True)
def to_unit(word):
    """Map a raw word to a double in [0, 1) using the top 53 bits."""
    return float(word >> _S11) * _TWO_M53


def line_key(kind: str, direction: int, coords) -> tuple[int, int]:
    """Stable 128-bit identifier for a vertex line ('D') or edge line ('B')."""
    text = f"{kind}:{direction}:" + ",".join(str(int(c)) for c in coords)
    digest = hashlib.blake2b(text.encode(), digest_size=16).digest()
    return int.from_bytes(digest[:8], "little"), int.from_bytes(digest[8:], "little")


def trial_key(seed: int, trial: int) -> tuple[int, int]:
    mask = (1 << 64) - 1
    if seed < 0 or trial < 0 or seed > mask or trial > mask:
        raise ValueError("seed and trial must be unsigned 64-bit integers")
    return seed, trial
