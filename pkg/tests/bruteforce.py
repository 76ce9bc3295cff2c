"""Independent straight-box brute-force SVP/CVP oracle used as a test referee.

Deliberately shares no code with the package: it works on plain integer
matrices and evaluates every norm on every box point, with no basis
reduction. Full-rank lattices are searched over an ambient integer box
(every lattice vector of l_p norm at most R lies in the l_inf box of radius
R) with membership decided by the integer adjugate. Other bases fall back to
a coefficient box from Hölder's inequality on the pseudo-inverse.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def _dual(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def box_bounds(E: np.ndarray, r_p: float, p: float, center=None):
    """Coefficient box from Hölder's inequality on the plain pseudo-inverse."""
    P = np.linalg.pinv(E.astype(float))
    n = E.shape[1]
    c = np.zeros(n) if center is None else P @ np.asarray(center, dtype=float)
    w = r_p * np.linalg.norm(P, ord=_dual(p), axis=1) * (1 + 1e-7) + 1e-7
    return np.ceil(c - w).astype(np.int64), np.floor(c + w).astype(np.int64)


def box_size(E: np.ndarray, r_p: float, p: float, center=None) -> int:
    lo, hi = box_bounds(E, r_p, p, center)
    return int(np.prod(np.maximum(hi - lo + 1, 0).astype(object)))


def box_chunks(lo, hi, chunk: int = 1 << 18):
    sizes = (hi - lo + 1).tolist()
    total = math.prod(sizes)
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk))
        yield np.stack(np.unravel_index(idx, sizes), axis=1).astype(np.int64) + lo


def _keys(Y: np.ndarray, den: int, p):
    """Exact keys (as Fractions via ints) for p in {1, 2, inf}, float norms otherwise."""
    if p == 1:
        return np.abs(Y).sum(axis=1), den
    if p == 2:
        return (Y * Y).sum(axis=1), den * den
    if p == "inf":
        return np.abs(Y).max(axis=1), den
    vals = (np.abs(Y.astype(np.longdouble)) / den) ** np.longdouble(p)
    return vals.sum(axis=1) ** (1 / np.longdouble(p)), None


def norm_value(key, key_den, p) -> float:
    if key_den is None:
        return float(key)
    v = Fraction(int(key), key_den)
    return math.sqrt(v) if p == 2 else float(v)


def _pf(p) -> float:
    return math.inf if p == "inf" else float(p)


def _exact_key(key, key_den):
    return float(key) if key_den is None else Fraction(int(key), key_den)


def _adjugate(E: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer adjugate and |det| of a small square integer matrix, checked exactly."""
    det = int(round(np.linalg.det(E.astype(float))))
    adj = np.rint(np.linalg.inv(E.astype(float)) * det).astype(np.int64)
    assert np.array_equal(adj @ E, det * np.eye(len(E), dtype=np.int64)), "adjugate rounding failed"
    return adj, abs(det)


def _ambient_points(E: np.ndarray, lo, hi):
    """Lattice vectors among the integer points of the box [lo, hi] (inclusive)."""
    adj, det = _adjugate(E)
    for Y in box_chunks(np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64)):
        yield Y[np.all((Y @ adj.T) % det == 0, axis=1)]


def _square(E: np.ndarray) -> bool:
    return E.shape[0] == E.shape[1]


def _min_key(chunks, p, den: int, shift=None):
    best = key_den = None
    for Y in chunks:
        if shift is not None:
            Y = Y * den - shift
        if len(Y) == 0:
            continue
        keys, key_den = _keys(Y, den, p)
        k = keys.min()
        best = k if best is None else min(best, k)
    return best, key_den


def brute_svp_key(E: np.ndarray, p) -> Fraction | float:
    """lambda_1 of the lattice spanned by the integer columns of E, as a comparison key.

    The key is the exact l_1 or l_inf norm, the exact squared l_2 norm, or a
    float norm for other p.
    """
    pf = _pf(p)
    col = min(np.linalg.norm(E[:, j].astype(float), ord=pf) for j in range(E.shape[1]))
    if _square(E):
        R = int(math.floor(col + 1e-9))
        chunks = (Y[np.any(Y != 0, axis=1)] for Y in _ambient_points(E, [-R] * len(E), [R] * len(E)))
    else:
        lo, hi = box_bounds(E, col, pf)
        chunks = (X[np.any(X != 0, axis=1)] @ E.T.astype(np.int64) for X in box_chunks(lo, hi))
    return _exact_key(*_min_key(chunks, p, 1))


def brute_cvp_key(E: np.ndarray, t: list[Fraction], p) -> Fraction | float:
    """Distance from the rational target t to the lattice of E, as a comparison key."""
    pf = _pf(p)
    D = math.lcm(*(x.denominator for x in t))
    tf = np.array([float(x) for x in t])
    c = np.linalg.lstsq(E.astype(float), tf, rcond=None)[0]
    r0 = np.linalg.norm(E.astype(float) @ np.rint(c) - tf, ord=pf)
    tint = np.array([int(x * D) for x in t], dtype=np.int64)
    if _square(E):
        lo = [math.ceil(x - r0 - 1e-9) for x in t]
        hi = [math.floor(x + r0 + 1e-9) for x in t]
        chunks = _ambient_points(E, lo, hi)
    else:
        lo, hi = box_bounds(E, r0, pf, tf)
        chunks = (X @ E.T.astype(np.int64) for X in box_chunks(lo, hi))
    return _exact_key(*_min_key(chunks, p, D, tint))


def _key_value(key, p) -> float:
    if isinstance(key, Fraction):
        return math.sqrt(key) if p == 2 else float(key)
    return float(key)


def brute_svp(E: np.ndarray, p) -> float:
    """lambda_1 of the lattice spanned by the integer columns of E."""
    return _key_value(brute_svp_key(E, p), p)


def brute_cvp(E: np.ndarray, t: list[Fraction], p) -> float:
    """Distance from the rational target t to the lattice of E."""
    return _key_value(brute_cvp_key(E, t, p), p)
