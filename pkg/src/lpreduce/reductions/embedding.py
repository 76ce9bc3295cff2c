"""Embedding a target into a lattice of one higher rank and dimension."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..core import Basis, LatticeVector, as_rational, as_rational_vector


@dataclass(frozen=True)
class EmbeddedBasis:
    """Basis ``[[c B, -c t], [0, s]]`` where ``c`` is ``pre_scale``.

    A vector with last coefficient k lies in layer k, i.e. it equals
    ``(c (B x - k t), k s)`` for the lattice vector ``B x``.
    """

    base: Basis
    original: Basis
    target: tuple[Fraction, ...]
    scale_s: Fraction
    pre_scale: Fraction

    def layer(self, v: LatticeVector) -> int:
        """The layer index k of an embedded vector (its last coordinate over s)."""
        last = v.embedding[-1] / self.scale_s
        if last.denominator != 1:
            raise ValueError("vector is not in the embedded lattice")
        return int(last)

    def lattice_part(self, v: LatticeVector) -> LatticeVector:
        """The lattice vector ``B x`` of an embedded vector ``(c (B x - k t), k s)``."""
        if v.basis != self.base:
            raise ValueError("vector belongs to a different basis")
        return LatticeVector(self.original, v.coeffs[:-1])


def kannan_embed(basis: Basis, target, s=1, pre_scale=1) -> EmbeddedBasis:
    """Append the column ``(-pre_scale t, s)`` to ``pre_scale B`` padded with a zero row."""
    t = as_rational_vector(target)
    if len(t) != basis.m:
        raise ValueError("target length must equal the ambient dimension")
    s = as_rational(s)
    c = as_rational(pre_scale)
    if s <= 0 or c <= 0:
        raise ValueError("scales must be positive")
    cols = [tuple(c * x for x in col) + (Fraction(0),) for col in basis.columns]
    cols.append(tuple(-c * x for x in t) + (s,))
    return EmbeddedBasis(Basis.from_columns(cols), basis, t, s, c)
