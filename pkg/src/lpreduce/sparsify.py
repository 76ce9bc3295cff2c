"""Random sublattices and cosets modulo a prime.

For a prime Q and z in Z_Q^n the sparsified lattice is
``{y in L : <z, B^{-1} y> = 0 mod Q}``, an index-Q sublattice whenever z is
nonzero mod Q. A short vector of L survives with probability about 1/Q, and
different short vectors survive almost independently, which is what lets an
SVP oracle on the sublattice isolate individual short vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy

from .core import Basis, LatticeVector, PNorm
from .errors import NoPrimeInRange, NoSolution, PromiseViolated


def is_prime(q: int) -> bool:
    return bool(sympy.isprime(int(q)))


def find_prime(lo: int, hi: int) -> int:
    """Smallest prime in ``[lo, hi]``."""
    lo, hi = int(lo), int(hi)
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    q = int(sympy.nextprime(lo - 1))
    if q > hi:
        raise NoPrimeInRange(f"no prime in [{lo}, {hi}]")
    return q


def next_prime(n: int) -> int:
    """Smallest prime at least ``n``."""
    return int(sympy.nextprime(max(1, int(n) - 1)))


@dataclass(frozen=True)
class Sparsifier:
    """A prime modulus, a vector z in Z_Q^n and an optional coset vector c."""

    Q: int
    z: tuple[int, ...]
    c: tuple[int, ...] | None = None

    def __post_init__(self):
        if not is_prime(self.Q):
            raise ValueError(f"{self.Q} is not prime")
        object.__setattr__(self, "z", tuple(int(x) % self.Q for x in self.z))
        if self.c is not None:
            if len(self.c) != len(self.z):
                raise ValueError("z and c must have the same length")
            object.__setattr__(self, "c", tuple(int(x) % self.Q for x in self.c))

    @classmethod
    def sample(cls, Q: int, n: int, rng: np.random.Generator, coset: bool = False) -> "Sparsifier":
        z = tuple(int(x) for x in rng.integers(0, Q, size=n))
        c = tuple(int(x) for x in rng.integers(0, Q, size=n)) if coset else None
        return cls(Q, z, c)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def pivot(self) -> int | None:
        """Index of the last nonzero entry of z (None if z = 0 mod Q)."""
        for j in range(self.n - 1, -1, -1):
            if self.z[j]:
                return j
        return None

    def transform(self) -> list[list[int]]:
        """Coefficient-space generators of the sublattice, as columns."""
        n, j, Q = self.n, self.pivot, self.Q
        if j is None:
            return [[int(i == k) for i in range(n)] for k in range(n)]
        inv = pow(self.z[j], -1, Q)
        cols = []
        for k in range(n):
            col = [0] * n
            if k == j:
                col[j] = Q
            else:
                col[k] = 1
                col[j] = -((self.z[k] * inv) % Q)
            cols.append(col)
        return cols

    def satisfies(self, coeffs) -> bool:
        """Whether ``<z, coeffs> = 0 mod Q``."""
        return sum(a * int(b) for a, b in zip(self.z, coeffs)) % self.Q == 0


@dataclass(frozen=True)
class Sublattice:
    """A sublattice basis together with the map back to parent coefficients."""

    parent: Basis
    basis: Basis
    transform: tuple[tuple[int, ...], ...]  # columns, in parent coefficients

    def lift(self, v: LatticeVector) -> LatticeVector:
        coeffs = [0] * self.parent.n
        for col, a in zip(self.transform, v.coeffs):
            if a:
                for i, x in enumerate(col):
                    coeffs[i] += a * x
        return LatticeVector(self.parent, tuple(coeffs))


def sparsify(basis: Basis, s: Sparsifier) -> Sublattice:
    if s.n != basis.n:
        raise ValueError("sparsifier length must equal the rank")
    cols = s.transform()
    e = basis.entries
    entries = tuple(
        tuple(sum(e[i][k] * col[k] for k in range(basis.n)) for col in cols) for i in range(basis.m)
    )
    sub = Basis(entries, basis.denominator)
    return Sublattice(basis, sub, tuple(tuple(c) for c in cols))


def sublattice_basis(basis: Basis, s: Sparsifier) -> Basis:
    """Basis of ``{y in L : <z, B^{-1} y> = 0 mod Q}``."""
    return sparsify(basis, s).basis


def coset_point(basis: Basis, s: Sparsifier) -> LatticeVector:
    """A lattice vector y with ``<z, B^{-1} y> = <z, c> mod Q``."""
    if s.c is None:
        raise ValueError("sparsifier has no coset vector")
    target = sum(a * b for a, b in zip(s.z, s.c)) % s.Q
    j = s.pivot
    if j is None:
        if target:
            raise NoSolution("z = 0 but <z, c> != 0 mod Q")
        return basis.zero()
    k = (target * pow(s.z[j], -1, s.Q)) % s.Q
    coeffs = [0] * basis.n
    coeffs[j] = k
    return LatticeVector(basis, tuple(coeffs))


def sampling_window(N: int, f: int) -> tuple[int, int]:
    """The prime window ``[100 fN log(fN), 200 fN log(fN)]`` (natural log)."""
    x = f * N * math.log(f * N)
    return math.ceil(100 * x), math.floor(200 * x)


def uniform_primitive_sample(
    basis: Basis,
    norm,
    r,
    N: int,
    f: int,
    oracle,
    rng: np.random.Generator,
    Q: int | None = None,
) -> LatticeVector | None:
    """One trial of uniform sampling of short primitive vectors through uSVP.

    Sparsify with a random z, ask the oracle for a shortest vector of the
    sublattice, and return it with a random sign when its norm is at most r.
    Returns None on failure (callers retry). A strict oracle that rejects the
    sublattice counts as a failure as well.
    """
    norm = PNorm.parse(norm)
    if Q is None:
        if N < 10 or f < 10:
            raise ValueError("need N >= 10 and f >= 10 for the prescribed window")
        Q = find_prime(*sampling_window(N, f))
    s = Sparsifier.sample(Q, basis.n, rng)
    sub = sparsify(basis, s)
    try:
        ans = oracle(sub.basis, norm)
    except PromiseViolated:
        return None
    v = sub.lift(ans.vector)
    if v.is_zero or not norm.key_le(v.key(norm), norm.value_to_key(r)):
        return None
    return v if rng.integers(2) else -v


# ---------------------------------------------------------------------------
# Isolation events (vectorized Monte Carlo)
# ---------------------------------------------------------------------------


def isolation_bounds(Q: int, N: int, n: int, coset: bool = False) -> tuple[float, float]:
    """Probability window of the isolation event for N competing vectors in Z_Q^n."""
    if coset:
        return 1 / Q - 2 * N / Q**2 - N / Q**n, 1 / Q + 1 / Q**n
    return 1 / Q - N / Q**2, 1 / Q


def isolation_count(
    Q: int,
    x,
    vs,
    draws: int,
    rng: np.random.Generator,
    ys=None,
    chunk: int = 1 << 17,
) -> int:
    """How many of ``draws`` uniform z (and c, for the coset event) isolate x.

    Plain event: ``<z, x> = 0`` and ``<z, v_i> != 0`` for every i.
    Coset event (``ys`` given, with ``x`` playing y_1): ``<z, x + c> = 0``,
    ``<z, v_i> != 0`` for every i and ``<z, y_i + c> != 0`` for every y_i in ys.
    All arithmetic is mod Q.
    """
    x = np.asarray(x, dtype=np.int64) % Q
    V = np.asarray(vs, dtype=np.int64).reshape(-1, len(x)) % Q
    Y = None if ys is None else np.asarray(ys, dtype=np.int64).reshape(-1, len(x)) % Q
    n = len(x)
    hits = 0
    done = 0
    while done < draws:
        k = min(chunk, draws - done)
        Z = rng.integers(0, Q, size=(k, n), dtype=np.int64)
        if Y is None:
            ok = (Z @ x) % Q == 0
        else:
            C = rng.integers(0, Q, size=(k, n), dtype=np.int64)
            zc = np.einsum("ij,ij->i", Z, C)
            ok = (Z @ x + zc) % Q == 0
            if len(Y):
                ok &= np.all((Z @ Y.T + zc[:, None]) % Q != 0, axis=1)
        if len(V):
            ok &= np.all((Z @ V.T) % Q != 0, axis=1)
        hits += int(ok.sum())
        done += k
    return hits
