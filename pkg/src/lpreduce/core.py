"""Lattices, l_p norms and the exact enumeration engine.

A lattice is stored as an integer matrix (m rows, n columns) together with a
single positive denominator, so the real basis is ``entries / denominator``.
Norm comparisons for p in {1, 2, inf} are carried out on integer keys
(sum of absolute values, sum of squares, max of absolute values) after
clearing denominators; other finite p use extended precision floats and treat
norms within a relative ``TIE_RTOL`` of each other as equal.

Enumeration uses a coefficient box derived from Hölder's inequality on an
LLL-preconditioned copy of the basis, followed by an exact norm filter.
Preconditioning only changes which box gets scanned; the set of points that
comes out is identical, and coefficients are always reported with respect to
the basis the caller supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterator, Sequence

import mpmath
import numpy as np
from sympy import Matrix, QQ, ZZ
from sympy.matrices.normalforms import hermite_normal_form
from sympy.polys.matrices import DomainMatrix

from .errors import EnumerationBudgetExceeded, RankOne, SingularBasis, ZeroVector

#: Largest rank the enumeration engine accepts unless a caller overrides it.
ENUMERATION_RANK_LIMIT = 8
#: Largest coefficient box (number of integer cells) scanned in one call.
DEFAULT_CELL_CAP = 30_000_000
#: Two non-exact norms within this relative distance count as tied.
TIE_RTOL = 1e-9

_CHUNK = 1 << 15
_INT64_SAFE = 2**62


def as_rational(x) -> Fraction:
    """Convert ints, floats (exactly), Fractions and "num/den" strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(float(x)):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(float(x))
    return Fraction(x)


def as_rational_vector(v) -> tuple[Fraction, ...]:
    return tuple(as_rational(x) for x in v)


def _lcm(values) -> int:
    return reduce(math.lcm, (int(v) for v in values), 1)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PNorm:
    """An l_p norm tag with p >= 1 finite, or p = inf."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise ValueError(f"p must satisfy p >= 1, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, value) -> "PNorm":
        """Accept a PNorm, a number, or strings such as "2", "1.5", "inf"."""
        if isinstance(value, PNorm):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("inf", "infinity", "∞", "+inf"):
                return cls(math.inf)
            return cls(float(text))
        return cls(float(value))

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    @property
    def exact(self) -> bool:
        """True when comparisons between rational vectors are exact."""
        return self.p in (1.0, 2.0) or self.is_inf

    @property
    def dual(self) -> "PNorm":
        if self.p == 1.0:
            return PNorm(math.inf)
        if self.is_inf:
            return PNorm(1.0)
        return PNorm(self.p / (self.p - 1.0))

    def __str__(self) -> str:
        if self.is_inf:
            return "inf"
        if self.p.is_integer():
            return str(int(self.p))
        return repr(self.p)

    # Keys are monotone functions of the norm that can be compared exactly:
    # sum |x| for p=1, sum x^2 for p=2, max |x| for inf, sum |x|^p otherwise.

    def key(self, v) -> Fraction | float:
        """Comparison key of a rational (or float) vector."""
        vals = as_rational_vector(v)
        if not vals:
            raise ValueError("empty vector")
        if self.p == 1.0:
            return sum((abs(x) for x in vals), Fraction(0))
        if self.p == 2.0:
            return sum((x * x for x in vals), Fraction(0))
        if self.is_inf:
            return max(abs(x) for x in vals)
        with mpmath.workprec(96):
            p = mpmath.mpf(self.p)
            acc = mpmath.fsum(
                mpmath.power(abs(mpmath.mpf(x.numerator) / x.denominator), p) for x in vals
            )
            return float(acc)

    def key_to_value(self, k) -> float:
        if self.p == 1.0 or self.is_inf:
            return float(k)
        if self.p == 2.0:
            k = Fraction(k)
            return math.sqrt(k.numerator) / math.sqrt(k.denominator) if k else 0.0
        return float(k) ** (1.0 / self.p)

    def value_to_key(self, r) -> Fraction | float:
        """Key of any vector whose norm equals ``r`` (exact for rational r)."""
        if r < 0:
            raise ValueError("radius must be nonnegative")
        if self.exact:
            rr = as_rational(r)
            return rr * rr if self.p == 2.0 else rr
        return float(r) ** self.p

    def scale_key(self, k, factor) -> Fraction | float:
        """Key of ``factor * v`` given the key ``k`` of ``v`` (factor >= 0)."""
        power = 2 if self.p == 2.0 else (1 if self.p == 1.0 or self.is_inf else self.p)
        if self.exact and not isinstance(k, float):
            return k * as_rational(factor) ** power
        return float(k) * float(factor) ** power

    def key_rtol(self) -> float:
        """Relative tolerance in key space matching ``TIE_RTOL`` on norms."""
        if self.exact:
            return 0.0
        return (1.0 + TIE_RTOL) ** self.p - 1.0

    def key_le(self, a, b) -> bool:
        """``a <= b`` with the tie tolerance for non-exact norms."""
        if self.exact:
            return a <= b
        return float(a) <= float(b) * (1.0 + self.key_rtol())

    def keys_tied(self, a, b) -> bool:
        if self.exact:
            return a == b
        a, b = float(a), float(b)
        return abs(a - b) <= self.key_rtol() * max(abs(a), abs(b))


def lp_norm(v, p) -> float:
    """The l_p norm of a rational vector, returned as a float."""
    norm = PNorm.parse(p)
    vals = as_rational_vector(v)
    if not vals:
        raise ValueError("empty vector")
    if norm.exact:
        return norm.key_to_value(norm.key(vals))
    with mpmath.workprec(96):
        pp = mpmath.mpf(norm.p)
        acc = mpmath.fsum(
            mpmath.power(abs(mpmath.mpf(x.numerator) / x.denominator), pp) for x in vals
        )
        return float(mpmath.power(acc, 1 / pp))


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------


def _to_fraction(e) -> Fraction:
    return Fraction(int(e.numerator), int(e.denominator))


@dataclass(frozen=True)
class Basis:
    """Integer matrix ``entries`` (m rows, n columns) over a shared denominator.

    The lattice consists of integer combinations of the columns of
    ``entries / denominator``. The columns must be linearly independent.
    """

    entries: tuple[tuple[int, ...], ...]
    denominator: int = 1

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        den = int(self.denominator)
        if den <= 0:
            raise ValueError("denominator must be positive")
        if not rows or not rows[0]:
            raise ValueError("a basis needs at least one row and one column")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("ragged basis matrix")
        g = reduce(math.gcd, (x for r in rows for x in r), den)
        if g > 1:
            rows = tuple(tuple(x // g for x in r) for r in rows)
            den //= g
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "denominator", den)
        if n > len(rows):
            raise SingularBasis(f"rank {n} exceeds ambient dimension {len(rows)}")
        if self._dm.rank() != n:
            raise SingularBasis("basis columns are linearly dependent")

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "Basis":
        """Build a basis from rational column vectors."""
        cols = [as_rational_vector(c) for c in columns]
        if not cols:
            raise ValueError("rank-0 lattices are not supported")
        m = len(cols[0])
        if any(len(c) != m for c in cols):
            raise ValueError("columns have different lengths")
        den = _lcm(x.denominator for c in cols for x in c)
        rows = tuple(tuple(int(c[i] * den) for c in cols) for i in range(m))
        return cls(rows, den)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Basis":
        """Build a basis from a rational matrix given row by row (columns are basis vectors)."""
        mat = [as_rational_vector(r) for r in rows]
        if not mat or not mat[0]:
            raise ValueError("empty matrix")
        n = len(mat[0])
        return cls.from_columns([[r[j] for r in mat] for j in range(n)])

    @classmethod
    def identity(cls, n: int) -> "Basis":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, diag: Sequence) -> "Basis":
        d = as_rational_vector(diag)
        return cls.from_columns([[d[j] if i == j else 0 for i in range(len(d))] for j in range(len(d))])

    # -- shape and views --------------------------------------------------

    @property
    def m(self) -> int:
        """Ambient dimension."""
        return len(self.entries)

    @property
    def n(self) -> int:
        """Rank."""
        return len(self.entries[0])

    @cached_property
    def _dm(self) -> DomainMatrix:
        return DomainMatrix([[ZZ(x) for x in r] for r in self.entries], (self.m, self.n), ZZ)

    @cached_property
    def columns(self) -> tuple[tuple[Fraction, ...], ...]:
        d = self.denominator
        return tuple(
            tuple(Fraction(self.entries[i][j], d) for i in range(self.m)) for j in range(self.n)
        )

    @cached_property
    def int_matrix(self) -> np.ndarray:
        """Integer entries as an int64 (or object, if huge) array of shape (m, n)."""
        big = max(abs(x) for r in self.entries for x in r) >= _INT64_SAFE
        return np.array(self.entries, dtype=object if big else np.int64)

    def float_matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=float) / self.denominator

    def apply(self, coeffs: Sequence[int]) -> tuple[Fraction, ...]:
        """The lattice point ``B @ coeffs`` as exact rationals."""
        if len(coeffs) != self.n:
            raise ValueError("coefficient vector has the wrong length")
        d = self.denominator
        return tuple(
            Fraction(sum(int(a) * int(c) for a, c in zip(row, coeffs)), d) for row in self.entries
        )

    def scaled(self, factor) -> "Basis":
        f = as_rational(factor)
        if f <= 0:
            raise ValueError("scale factor must be positive")
        return Basis(
            tuple(tuple(x * f.numerator for x in r) for r in self.entries),
            self.denominator * f.denominator,
        )

    def vector(self, coeffs: Sequence[int]) -> "LatticeVector":
        return LatticeVector(self, tuple(int(c) for c in coeffs))

    def zero(self) -> "LatticeVector":
        return LatticeVector(self, (0,) * self.n)

    # -- exact linear algebra --------------------------------------------

    @cached_property
    def left_inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        """Exact ``(B^T B)^{-1} B^T`` as an n x m rational matrix."""
        e = self._dm.convert_to(QQ)
        et = e.transpose()
        p = (et * e).inv() * et
        d = self.denominator
        return tuple(tuple(_to_fraction(x) * d for x in row) for row in p.to_list())

    def coords(self, y) -> tuple[int, ...] | None:
        """Integer coefficients of ``y`` if it lies in the lattice, else None."""
        y = as_rational_vector(y)
        if len(y) != self.m:
            raise ValueError("vector has the wrong dimension")
        x = []
        for row in self.left_inverse:
            c = sum((a * b for a, b in zip(row, y)), Fraction(0))
            if c.denominator != 1:
                return None
            x.append(int(c))
        if self.apply(x) != y:
            return None
        return tuple(x)

    def contains(self, y) -> bool:
        return self.coords(y) is not None

    def is_sublattice_of(self, other: "Basis") -> bool:
        """True when every column of this basis is a point of ``other``."""
        if other.m != self.m:
            return False
        return all(other.contains(c) for c in self.columns)

    @cached_property
    def reduced(self) -> tuple[np.ndarray, np.ndarray]:
        """LLL-reduced integer rows ``R`` (n x m) and unimodular ``T`` with ``R = T @ B^T``.

        Used only to shrink enumeration boxes.
        """
        rows = DomainMatrix(
            [[ZZ(self.entries[i][j]) for i in range(self.m)] for j in range(self.n)],
            (self.n, self.m),
            ZZ,
        )
        red, trans = rows.lll_transform(delta=QQ(99, 100))
        r = [[int(x) for x in row] for row in red.to_list()]
        t = [[int(x) for x in row] for row in trans.to_list()]
        big = max(abs(x) for row in r + t for x in row) >= _INT64_SAFE
        dtype = object if big else np.int64
        return np.array(r, dtype=dtype), np.array(t, dtype=dtype)

    @cached_property
    def _box_data(self) -> tuple[np.ndarray, dict]:
        r, _ = self.reduced
        rf = np.array(r, dtype=float).T / self.denominator  # m x n
        return np.linalg.pinv(rf), {}

    def _dual_row_norms(self, norm: PNorm) -> np.ndarray:
        pinv, cache = self._box_data
        if norm.p not in cache:
            cache[norm.p] = np.linalg.norm(pinv, ord=norm.dual.p, axis=1)
        return cache[norm.p]

    def column_keys(self, norm: PNorm) -> list:
        return [norm.key(c) for c in self.columns]


@dataclass(frozen=True)
class LatticeVector:
    """A lattice point given by its integer coefficients in ``basis``."""

    basis: Basis
    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != self.basis.n:
            raise ValueError("coefficient vector has the wrong length")
        object.__setattr__(self, "coeffs", coeffs)

    @cached_property
    def embedding(self) -> tuple[Fraction, ...]:
        return self.basis.apply(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def gcd(self) -> int:
        return math.gcd(*self.coeffs)

    @property
    def is_primitive(self) -> bool:
        return self.gcd == 1

    def key(self, norm: PNorm):
        return norm.key(self.embedding)

    def norm(self, p) -> float:
        return lp_norm(self.embedding, p)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(self.basis, tuple(-c for c in self.coeffs))

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        self._check_same(other)
        return LatticeVector(self.basis, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        self._check_same(other)
        return LatticeVector(self.basis, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, k: int) -> "LatticeVector":
        return LatticeVector(self.basis, tuple(int(k) * c for c in self.coeffs))

    def _check_same(self, other: "LatticeVector"):
        if other.basis != self.basis:
            raise ValueError("vectors belong to different bases")


@dataclass(frozen=True)
class CvpInstance:
    """A closest-vector query: lattice, rational target and norm."""

    basis: Basis
    target: tuple[Fraction, ...]
    norm: PNorm

    def __post_init__(self):
        target = as_rational_vector(self.target)
        if len(target) != self.basis.m:
            raise ValueError("target length must equal the ambient dimension")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "norm", PNorm.parse(self.norm))


@dataclass(frozen=True)
class BallSpec:
    """Closed l_p ball of the given radius around ``center`` (None means 0)."""

    radius: float | Fraction
    norm: PNorm
    center: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "norm", PNorm.parse(self.norm))
        if self.center is not None:
            c = as_rational_vector(self.center)
            object.__setattr__(self, "center", None if not any(c) else c)

    @property
    def radius_key(self):
        return self.norm.value_to_key(self.radius)


# ---------------------------------------------------------------------------
# Enumeration engine
# ---------------------------------------------------------------------------


@dataclass
class PointSet:
    """Result of a ball scan: coefficient rows plus integer (or float) keys.

    For exact norms ``keys[i] / key_den`` is the exact key of point ``i``
    measured from the ball center; for other norms ``keys`` holds floats and
    ``key_den`` is 1.
    """

    basis: Basis
    norm: PNorm
    coeffs: np.ndarray
    keys: np.ndarray
    key_den: int

    def __len__(self) -> int:
        return len(self.coeffs)

    def key(self, i: int):
        if self.norm.exact:
            return Fraction(int(self.keys[i]), self.key_den)
        return float(self.keys[i])

    def vectors(self) -> list[LatticeVector]:
        return [LatticeVector(self.basis, tuple(int(c) for c in row)) for row in self.coeffs]

    def select(self, mask) -> "PointSet":
        return PointSet(self.basis, self.norm, self.coeffs[mask], self.keys[mask], self.key_den)

    def min_indices(self) -> np.ndarray:
        """Indices attaining the minimum key (ties within tolerance for inexact norms)."""
        if len(self) == 0:
            return np.zeros(0, dtype=np.int64)
        if self.norm.exact:
            lo = min(self.keys.tolist()) if self.keys.dtype == object else self.keys.min()
            return np.flatnonzero(self.keys == lo)
        lo = float(self.keys.min())
        return np.flatnonzero(self.keys <= lo * (1.0 + self.norm.key_rtol()))

    def float_values(self) -> np.ndarray:
        """Norm values (distance to center) as floats."""
        if self.norm.exact:
            k = self.keys.astype(float) / float(self.key_den)
            return np.sqrt(k) if self.norm.p == 2.0 else k
        return np.asarray(self.keys, dtype=float) ** (1.0 / self.norm.p)


def _check_rank(basis: Basis, rank_limit: int | None):
    limit = ENUMERATION_RANK_LIMIT if rank_limit is None else rank_limit
    if basis.n > limit:
        raise EnumerationBudgetExceeded(f"rank {basis.n} exceeds the enumeration limit {limit}")


def _scan_chunks(
    basis: Basis,
    norm: PNorm,
    rkey,
    center: tuple[Fraction, ...] | None,
    cell_cap: int | None,
    rank_limit: int | None,
) -> tuple[int, Iterator[tuple[np.ndarray, np.ndarray]]]:
    """Yield ``(coeffs, keys)`` chunks for all lattice points with key <= rkey."""
    _check_rank(basis, rank_limit)
    cap = DEFAULT_CELL_CAP if cell_cap is None else cell_cap
    n, m = basis.n, basis.m
    if center is not None and len(center) != m:
        raise ValueError("center has the wrong dimension")
    red, trans = basis.reduced
    d = basis.denominator
    pinv, _ = basis._box_data
    rval = norm.key_to_value(rkey)
    if norm.exact:
        rkey = Fraction(rkey)
    if center is None:
        c0 = np.zeros(n)
        center_dens = ()
    else:
        c0 = pinv @ np.array([float(x) for x in center])
        center_dens = [x.denominator for x in center]
    widths = rval * basis._dual_row_norms(norm)
    pad = 1e-7 * (1.0 + np.abs(c0) + widths)
    lo = np.ceil(c0 - widths - pad).astype(np.int64)
    hi = np.floor(c0 + widths + pad).astype(np.int64)
    scale = _lcm([d, *center_dens])
    expo = 2 if norm.p == 2.0 else 1
    key_den = scale**expo if norm.exact else 1

    def empty():
        return iter(())

    if np.any(hi < lo):
        return key_den, empty()
    sizes = (hi - lo + 1).tolist()
    cells = math.prod(sizes)
    if cells > cap:
        raise EnumerationBudgetExceeded(f"coefficient box has {cells} cells (cap {cap})")

    factor = scale // d
    tint = [0] * m if center is None else [int(x * scale) for x in center]
    max_coeff = max(max(abs(int(a)), abs(int(b))) for a, b in zip(lo, hi))
    colsum = max(sum(abs(int(red[j][i])) for j in range(n)) for i in range(m))
    ybound = colsum * max_coeff * factor + max(abs(x) for x in tint)
    if norm.p == 2.0:
        need = m * ybound * ybound
    else:
        need = m * ybound
    use_obj = need >= _INT64_SAFE or red.dtype == object or ybound >= 2**60
    dtype = object if use_obj else np.int64
    red_m = np.array(red, dtype=dtype)
    trans_m = np.array(trans, dtype=dtype)
    tvec = np.array(tint, dtype=dtype)
    lo_m = lo.astype(dtype)
    if norm.exact:
        thr = math.floor(rkey * key_den)
    else:
        thr = float(rkey) * (1.0 + norm.key_rtol())

    def gen():
        for start in range(0, cells, _CHUNK):
            idx = np.arange(start, min(cells, start + _CHUNK), dtype=np.int64)
            cc = np.stack(np.unravel_index(idx, sizes), axis=1).astype(dtype) + lo_m
            y = (cc @ red_m) * factor - tvec
            if norm.p == 1.0:
                k = np.abs(y).sum(axis=1)
            elif norm.p == 2.0:
                k = (y * y).sum(axis=1)
            elif norm.is_inf:
                k = np.abs(y).max(axis=1)
            else:
                yl = np.abs(y.astype(np.longdouble)) / np.longdouble(scale)
                k = (yl ** np.longdouble(norm.p)).sum(axis=1)
            mask = k <= thr
            if not np.any(mask):
                continue
            yield cc[mask] @ trans_m, k[mask]

    return key_den, gen()


def scan_ball(
    basis: Basis,
    norm: PNorm,
    rkey,
    center=None,
    *,
    exclude_zero: bool = False,
    cell_cap: int | None = None,
    rank_limit: int | None = None,
) -> PointSet:
    """All lattice points whose key (distance to ``center``) is at most ``rkey``.

    Rows are sorted lexicographically by coefficient vector.
    """
    norm = PNorm.parse(norm)
    if center is not None:
        center = as_rational_vector(center)
        if not any(center):
            center = None
    key_den, chunks = _scan_chunks(basis, norm, rkey, center, cell_cap, rank_limit)
    cs, ks = [], []
    for c, k in chunks:
        cs.append(c)
        ks.append(k)
    if cs:
        coeffs = np.concatenate(cs)
        keys = np.concatenate(ks)
    else:
        coeffs = np.zeros((0, basis.n), dtype=np.int64)
        keys = np.zeros(0, dtype=np.int64 if norm.exact else np.longdouble)
    if exclude_zero and len(coeffs):
        nz = np.any(coeffs != 0, axis=1)
        coeffs, keys = coeffs[nz], keys[nz]
    if len(coeffs) > 1:
        if coeffs.dtype == object:
            order = sorted(range(len(coeffs)), key=lambda i: tuple(coeffs[i]))
        else:
            order = np.lexsort(coeffs.T[::-1])
        coeffs, keys = coeffs[order], keys[order]
    return PointSet(basis, norm, coeffs, keys, key_den)


def count_in_ball(
    basis: Basis,
    norm: PNorm,
    rkey,
    center=None,
    *,
    primitive: bool = False,
    cell_cap: int | None = None,
    rank_limit: int | None = None,
) -> int:
    """Number of lattice points (or primitive points, center 0) with key <= rkey."""
    norm = PNorm.parse(norm)
    if center is not None:
        center = as_rational_vector(center)
        if not any(center):
            center = None
    if primitive and center is not None:
        raise ValueError("primitive counts require the ball to be centered at 0")
    _, chunks = _scan_chunks(basis, norm, rkey, center, cell_cap, rank_limit)
    total = 0
    for c, _k in chunks:
        if primitive:
            total += int(np.count_nonzero(_row_gcd(c) == 1))
        else:
            total += len(c)
    return total


def box_cells(basis: Basis, norm, radius: float) -> int:
    """Size of the coefficient box a scan of radius ``radius`` around 0 would visit."""
    norm = PNorm.parse(norm)
    widths = float(radius) * basis._dual_row_norms(norm)
    pad = 1e-7 * (1.0 + widths)
    sizes = np.floor(widths + pad).astype(np.int64) * 2 + 1
    return math.prod(int(s) for s in sizes)


@dataclass
class KeyProfile:
    """Keys and primitivity flags of every nonzero point in a ball around 0.

    ``count(rkey)`` and ``count_primitive(rkey)`` answer for any smaller radius
    without rescanning.
    """

    norm: PNorm
    keys: np.ndarray
    primitive: np.ndarray
    key_den: int

    def _threshold(self, rkey):
        if self.norm.exact:
            return math.floor(Fraction(rkey) * self.key_den)
        return float(rkey) * (1.0 + self.norm.key_rtol())

    def _inside(self, rkey) -> np.ndarray:
        return np.asarray(self.keys <= self._threshold(rkey), dtype=bool)

    def count(self, rkey) -> int:
        """Lattice points with key at most ``rkey``, the origin included."""
        return 1 + int(np.count_nonzero(self._inside(rkey)))

    def count_primitive(self, rkey) -> int:
        return int(np.count_nonzero(self.primitive & self._inside(rkey)))


def key_profile(basis: Basis, norm, rkey, *, cell_cap: int | None = None) -> KeyProfile:
    """Scan once and keep the keys of all nonzero points with key at most ``rkey``."""
    norm = PNorm.parse(norm)
    key_den, chunks = _scan_chunks(basis, norm, rkey, None, cell_cap, None)
    ks, ps = [], []
    for c, k in chunks:
        nz = np.any(c != 0, axis=1)
        ks.append(k[nz])
        ps.append(np.asarray(_row_gcd(c[nz]) == 1, dtype=bool))
    if ks:
        keys, prim = np.concatenate(ks), np.concatenate(ps).astype(bool)
    else:
        keys, prim = np.zeros(0), np.zeros(0, dtype=bool)
    return KeyProfile(norm, keys, prim, key_den)


def _row_gcd(coeffs: np.ndarray) -> np.ndarray:
    if coeffs.dtype == object:
        return np.array([math.gcd(*map(int, row)) for row in coeffs], dtype=object)
    return np.gcd.reduce(coeffs, axis=1)


def primitive_mask(coeffs: np.ndarray) -> np.ndarray:
    """Boolean mask of rows whose coefficient gcd equals 1."""
    if len(coeffs) == 0:
        return np.zeros(0, dtype=bool)
    return _row_gcd(coeffs) == 1


def enumerate_points(basis: Basis, ball: BallSpec, *, cell_cap: int | None = None) -> list[LatticeVector]:
    """Every lattice point in ``ball``, once, in lexicographic coefficient order."""
    return scan_ball(basis, ball.norm, ball.radius_key, ball.center, cell_cap=cell_cap).vectors()


def count_points(basis: Basis, ball: BallSpec, *, cell_cap: int | None = None) -> int:
    return count_in_ball(basis, ball.norm, ball.radius_key, ball.center, cell_cap=cell_cap)


def count_primitive(basis: Basis, ball: BallSpec, *, cell_cap: int | None = None) -> int:
    """Primitive lattice points in a ball centered at 0 (both signs counted)."""
    if ball.center is not None:
        raise ValueError("count_primitive requires the ball to be centered at 0")
    return count_in_ball(basis, ball.norm, ball.radius_key, primitive=True, cell_cap=cell_cap)


def left_inverse(basis: Basis) -> tuple[tuple[Fraction, ...], ...]:
    return basis.left_inverse


def primitive_part(v: LatticeVector) -> tuple[LatticeVector, int]:
    """Split ``v = k * w`` with ``w`` primitive and ``k`` the coefficient gcd."""
    if v.is_zero:
        raise ZeroVector("the zero vector has no primitive part")
    k = v.gcd
    return LatticeVector(v.basis, tuple(c // k for c in v.coeffs)), k


def basis_from_generators(vectors: Sequence[Sequence]) -> Basis:
    """A basis of the lattice generated by rational vectors (which may be dependent)."""
    vecs = [as_rational_vector(v) for v in vectors]
    den = _lcm(x.denominator for v in vecs for x in v)
    m = len(vecs[0])
    mat = Matrix(m, len(vecs), lambda i, j: int(vecs[j][i] * den))
    h = hermite_normal_form(mat)
    cols = []
    for j in range(h.shape[1]):
        col = [int(h[i, j]) for i in range(m)]
        if not any(col):
            continue
        lead = next(x for x in col if x)
        if lead < 0:
            col = [-x for x in col]
        cols.append([Fraction(x, den) for x in col])
    if not cols:
        raise ValueError("generators span the zero lattice")
    return Basis.from_columns(cols)


def project_orthogonal(basis: Basis, x) -> Basis:
    """A basis of the projection of the lattice orthogonally to ``x``."""
    if basis.n < 2:
        raise RankOne("projecting a rank-one lattice leaves only {0}")
    xv = x.embedding if isinstance(x, LatticeVector) else as_rational_vector(x)
    xx = sum((a * a for a in xv), Fraction(0))
    if xx == 0:
        raise ZeroVector("cannot project orthogonally to the zero vector")
    gens = []
    for col in basis.columns:
        coef = sum((a * b for a, b in zip(col, xv)), Fraction(0)) / xx
        gens.append([a - coef * b for a, b in zip(col, xv)])
    return basis_from_generators(gens)
