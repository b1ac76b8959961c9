"""The lattice of finitely generated submodules of a free module.

A Submodule is an ambient rank together with a basis matrix kept in canonical
column-Hermite form, so two submodules are equal as sets exactly when their
basis matrices are equal.  Construction canonicalizes; dependent generators
are tolerated and collapse to a basis.

Sums, intersections, preimages, containment, free-quotient tests and
complements are all exact.  Structure maps restricted to submodules are
re-expressed in basis coordinates by restrict_map.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .exactla import (
    Matrix,
    hermite_basis,
    inverse_unimodular,
    kernel_basis,
    snf,
)
from .ring import Ring, Scalar


class AmbientMismatch(ValueError):
    """Two submodules of different ambient modules were combined."""


class NotContained(ValueError):
    """An operation required one submodule to lie inside another."""


class NotFreeQuotient(ValueError):
    """A complement was requested where the quotient has torsion."""

    def __init__(self, torsion: Tuple[Scalar, ...]):
        super().__init__(f"quotient has torsion invariants {list(torsion)}")
        self.torsion = torsion


class ImageEscapesTarget(ValueError):
    """A map was restricted to a destination that does not contain its image."""


class Submodule:
    """A finitely generated submodule of R^n in canonical form."""

    __slots__ = ("ambient_rank", "basis", "_pivots")

    def __init__(self, ambient_rank: int, basis: Matrix, *, _canonical: bool = False):
        if basis.rows != ambient_rank:
            raise ValueError(f"basis has {basis.rows} rows for ambient rank {ambient_rank}")
        if not _canonical:
            basis = hermite_basis(basis)
        object.__setattr__(self, "ambient_rank", ambient_rank)
        object.__setattr__(self, "basis", basis)
        # topmost nonzero row of each column; rows strictly increase
        is_zero = basis.ring.is_zero
        pivots = []
        for j in range(basis.cols):
            col = basis.column(j)
            for i in range(ambient_rank):
                if not is_zero(col[i]):
                    pivots.append(i)
                    break
        object.__setattr__(self, "_pivots", tuple(pivots))

    def __setattr__(self, name, value):
        raise AttributeError("Submodule is immutable")

    @classmethod
    def zero(cls, ring: Ring, ambient_rank: int) -> "Submodule":
        return cls(ambient_rank, Matrix.zeros(ring, ambient_rank, 0), _canonical=True)

    @classmethod
    def full(cls, ring: Ring, ambient_rank: int) -> "Submodule":
        return cls(ambient_rank, Matrix.identity(ring, ambient_rank), _canonical=True)

    @classmethod
    def spanned_by(cls, ring: Ring, ambient_rank: int,
                   vectors: Sequence[Sequence[Scalar]]) -> "Submodule":
        return cls(ambient_rank, Matrix.from_columns(ring, ambient_rank, vectors))

    @property
    def ring(self) -> Ring:
        return self.basis.ring

    @property
    def rank(self) -> int:
        return self.basis.cols

    def is_zero(self) -> bool:
        return self.basis.cols == 0

    def is_full(self) -> bool:
        # full rank is not enough over a ring; the canonical basis of the
        # whole ambient module is exactly the identity
        return self.basis == Matrix.identity(self.ring, self.ambient_rank)

    def coords_of(self, vec: Sequence[Scalar]) -> Optional[Tuple[Scalar, ...]]:
        """Coordinates of vec in the canonical basis, or None if outside.

        Forward substitution down the pivot rows; valid because entries right
        of each pivot vanish in the canonical form.
        """
        if len(vec) != self.ambient_rank:
            raise ValueError("vector length does not match ambient rank")
        ring = self.basis.ring
        is_zero, try_div = ring.is_zero, ring.try_div
        sub, mul = ring.sub, ring.mul
        work = list(vec)
        coeffs: List[Scalar] = []
        cols = self.basis.entries
        for j, prow in enumerate(self._pivots):
            val = work[prow]
            if is_zero(val):
                coeffs.append(ring.zero)
                continue
            q = try_div(val, cols[prow][j])
            if q is None:
                return None
            coeffs.append(q)
            for i in range(prow, self.ambient_rank):
                work[i] = sub(work[i], mul(q, cols[i][j]))
        if any(not is_zero(x) for x in work):
            return None
        return tuple(coeffs)

    def contains_vector(self, vec: Sequence[Scalar]) -> bool:
        return self.coords_of(vec) is not None

    def member_from_coords(self, coords: Sequence[Scalar]) -> Tuple[Scalar, ...]:
        return self.basis.apply(coords)

    def sum(self, other: "Submodule") -> "Submodule":
        _check_ambient(self, other)
        return Submodule(self.ambient_rank, self.basis.hstack(other.basis))

    def intersect(self, other: "Submodule") -> "Submodule":
        _check_ambient(self, other)
        if self.is_zero() or other.is_zero():
            return Submodule.zero(self.ring, self.ambient_rank)
        stacked = self.basis.hstack(other.basis.negate())
        ker = kernel_basis(stacked)
        coeffs_self = Matrix(self.ring, [ker.row(i) for i in range(self.rank)],
                             rows=self.rank, cols=ker.cols)
        return Submodule(self.ambient_rank, self.basis @ coeffs_self)

    def contains(self, other: "Submodule") -> bool:
        """True iff other is a subset of self."""
        _check_ambient(self, other)
        return all(self.coords_of(other.basis.column(j)) is not None
                   for j in range(other.rank))

    def to_json(self) -> dict:
        return {"ambient_rank": self.ambient_rank, "basis": self.basis.to_json()}

    @classmethod
    def from_json(cls, ring: Ring, obj: dict) -> "Submodule":
        return cls(int(obj["ambient_rank"]), Matrix.from_json(ring, obj["basis"]))

    def __eq__(self, other):
        return (isinstance(other, Submodule)
                and self.ambient_rank == other.ambient_rank
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient_rank, self.basis))

    def __repr__(self):
        return f"Submodule(rank {self.rank} of {self.ring!r}^{self.ambient_rank})"


def _check_ambient(a: Submodule, b: Submodule) -> None:
    if a.ambient_rank != b.ambient_rank or a.ring != b.ring:
        raise AmbientMismatch(
            f"ambient mismatch: {a.ring!r}^{a.ambient_rank} vs {b.ring!r}^{b.ambient_rank}")


def preimage(m: Matrix, target: Submodule) -> Submodule:
    """The submodule {x : m @ x in target} of the source module.

    Always contains ker(m).
    """
    if m.rows != target.ambient_rank or m.ring != target.ring:
        raise AmbientMismatch(
            f"map into rank {m.rows} cannot hit target of ambient rank {target.ambient_rank}")
    if target.is_full():
        return Submodule.full(m.ring, m.cols)
    stacked = m.hstack(target.basis.negate())
    ker = kernel_basis(stacked)
    xpart = Matrix(m.ring, [ker.row(i) for i in range(m.cols)], rows=m.cols, cols=ker.cols)
    return Submodule(m.cols, xpart)


def _coords_matrix(sub: Submodule, ambient: Submodule) -> Matrix:
    """Coordinates of sub's basis inside ambient's basis; NotContained if it escapes."""
    _check_ambient(sub, ambient)
    cols = []
    for j in range(sub.rank):
        c = ambient.coords_of(sub.basis.column(j))
        if c is None:
            raise NotContained("submodule is not contained in the proposed ambient")
        cols.append(c)
    return Matrix.from_columns(sub.ring, ambient.rank, cols)


def is_free_quotient(sub: Submodule, ambient: Submodule) -> bool:
    """True iff ambient/sub is free; requires sub to be contained in ambient."""
    coords = _coords_matrix(sub, ambient)
    ring = sub.ring
    dec = snf(coords)
    return all(ring.is_unit(d) for d in dec.invariant_factors)


def complement(sub: Submodule, ambient: Submodule) -> Submodule:
    """A direct complement C with sub (+) C = ambient.

    Built by completing sub's coordinate image through the unimodular factor
    of its Smith decomposition in ambient coordinates, so the choice is
    deterministic.  Raises NotFreeQuotient when the quotient has torsion,
    which is exactly the obstruction to any complement existing.
    """
    coords = _coords_matrix(sub, ambient)
    ring = sub.ring
    dec = snf(coords)
    torsion = tuple(d for d in dec.invariant_factors if not ring.is_unit(d))
    if torsion:
        raise NotFreeQuotient(torsion)
    k = len(dec.invariant_factors)  # == sub.rank since basis columns are independent
    uinv = inverse_unimodular(dec.U)
    comp_coords = uinv.columns_slice(k, ambient.rank)
    return Submodule(ambient.ambient_rank, ambient.basis @ comp_coords)


def restrict_map(m: Matrix, src: Submodule, dst: Submodule) -> Matrix:
    """Coordinate matrix of m restricted to src, written in dst's basis.

    Composing with the basis inclusions recovers m on src; raises
    ImageEscapesTarget if m does not map src into dst.
    """
    if m.cols != src.ambient_rank or m.rows != dst.ambient_rank or \
            m.ring != src.ring or m.ring != dst.ring:
        raise AmbientMismatch("map shape does not match src/dst ambients")
    cols = []
    for j in range(src.rank):
        img = m.apply(src.basis.column(j))
        c = dst.coords_of(img)
        if c is None:
            raise ImageEscapesTarget("image of src under the map escapes dst")
        cols.append(c)
    return Matrix.from_columns(m.ring, dst.rank, cols)
