"""Dense exact matrix algebra over a ring: products, Hermite and Smith normal
forms, kernels, images, cokernel invariants, and exact solving.

Matrices are immutable after construction.  Column j of a map's matrix holds
the image of the j-th source basis vector, so composition is an ordinary
matrix product.  Zero-dimensional matrices (0 x n, n x 0) are legal
throughout and represent maps to or from the zero module.

The Smith routine picks minimal-magnitude pivots and eliminates with gcd
row/column transforms, which keeps intermediate entries tame at the sizes
this library targets (ranks up to a few dozen).  The Hermite form is
column-style: column operations only, each pivot is the topmost nonzero
entry of its column, pivot rows strictly increase left to right, pivots are
unit-normalized, and entries sharing a pivot's row in earlier columns are
reduced to their canonical residue.  That form is unique per column span, so
basis matrices compare by plain equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .ring import Ring, Scalar


class NotUnimodular(ValueError):
    """Raised when a matrix expected to have unit determinant does not."""


class Matrix:
    """Immutable dense matrix over a ring, entries stored row-major."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: Ring, entries: Sequence[Sequence[Scalar]],
                 *, rows: Optional[int] = None, cols: Optional[int] = None):
        data = tuple(tuple(row) for row in entries)
        if rows is None:
            rows = len(data)
        if len(data) != rows:
            raise ValueError(f"expected {rows} rows, got {len(data)}")
        if cols is None:
            cols = len(data[0]) if data else 0
        for row in data:
            if len(row) != cols:
                raise ValueError("ragged matrix rows")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", data)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "Matrix":
        one, zero = ring.one, ring.zero
        return cls(ring, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, ring: Ring, rows: int, cols: int) -> "Matrix":
        zero = ring.zero
        return cls(ring, [[zero] * cols for _ in range(rows)], rows=rows, cols=cols)

    @classmethod
    def from_columns(cls, ring: Ring, nrows: int,
                     columns: Sequence[Sequence[Scalar]]) -> "Matrix":
        for col in columns:
            if len(col) != nrows:
                raise ValueError("column length does not match row count")
        return cls(ring, [[col[i] for col in columns] for i in range(nrows)],
                   rows=nrows, cols=len(columns))

    def entry(self, i: int, j: int) -> Scalar:
        return self.entries[i][j]

    def row(self, i: int) -> Tuple[Scalar, ...]:
        return self.entries[i]

    def column(self, j: int) -> Tuple[Scalar, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> List[Tuple[Scalar, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def columns_slice(self, j0: int, j1: int) -> "Matrix":
        return Matrix(self.ring, [row[j0:j1] for row in self.entries],
                      rows=self.rows, cols=j1 - j0)

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, list(zip(*self.entries)) if self.entries else [],
                      rows=self.cols, cols=self.rows)

    def hstack(self, other: "Matrix") -> "Matrix":
        if other.rows != self.rows or other.ring != self.ring:
            raise ValueError("hstack shape or ring mismatch")
        return Matrix(self.ring, [self.entries[i] + other.entries[i] for i in range(self.rows)],
                      rows=self.rows, cols=self.cols + other.cols)

    def negate(self) -> "Matrix":
        neg = self.ring.neg
        return Matrix(self.ring, [[neg(x) for x in row] for row in self.entries],
                      rows=self.rows, cols=self.cols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows or self.ring != other.ring:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        ring = self.ring
        add, mul, zero = ring.add, ring.mul, ring.zero
        out = []
        ot = other.entries
        for row in self.entries:
            out_row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    acc = add(acc, mul(row[k], ot[k][j]))
                out_row.append(acc)
            out.append(out_row)
        return Matrix(ring, out, rows=self.rows, cols=other.cols)

    def apply(self, vec: Sequence[Scalar]) -> Tuple[Scalar, ...]:
        """Matrix-vector product."""
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        ring = self.ring
        add, mul, zero = ring.add, ring.mul, ring.zero
        out = []
        for row in self.entries:
            acc = zero
            for k in range(self.cols):
                acc = add(acc, mul(row[k], vec[k]))
            out.append(acc)
        return tuple(out)

    def map_entries(self, ring: Ring, fn) -> "Matrix":
        """Entry-wise image under fn into another ring (e.g. reduction mod p)."""
        return Matrix(ring, [[fn(x) for x in row] for row in self.entries],
                      rows=self.rows, cols=self.cols)

    def is_zero(self) -> bool:
        is_zero = self.ring.is_zero
        return all(is_zero(x) for row in self.entries for x in row)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.ring == other.ring
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.ring, self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"Matrix({self.ring!r}, {self.rows}x{self.cols}, {list(map(list, self.entries))!r})"

    def to_json(self) -> dict:
        to_str = self.ring.to_str
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[to_str(x) for x in row] for row in self.entries]}

    @classmethod
    def from_json(cls, ring: Ring, obj: dict) -> "Matrix":
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError("matrix JSON shape mismatch")
        return cls(ring, [[ring.from_str(x) for x in row] for row in entries],
                   rows=rows, cols=cols)


@dataclass(frozen=True)
class SmithDecomposition:
    """S = U @ M @ V with U, V unimodular and S the Smith form of M."""

    U: Matrix
    S: Matrix
    V: Matrix
    invariant_factors: Tuple[Scalar, ...]


def _swap_rows(a: List[List[Scalar]], i: int, j: int) -> None:
    a[i], a[j] = a[j], a[i]


def _swap_cols(a: List[List[Scalar]], i: int, j: int) -> None:
    for row in a:
        row[i], row[j] = row[j], row[i]


def snf(m: Matrix) -> SmithDecomposition:
    """Smith decomposition with the divisibility chain d1 | d2 | ... enforced.

    >>> from .ring import Z
    >>> snf(Matrix(Z, [[2, 0], [0, 3]])).invariant_factors
    (1, 6)
    """
    ring = m.ring
    nr, nc = m.rows, m.cols
    a = [list(row) for row in m.entries]
    u = [list(row) for row in Matrix.identity(ring, nr).entries]
    v = [list(row) for row in Matrix.identity(ring, nc).entries]
    is_zero, try_div, magnitude = ring.is_zero, ring.try_div, ring.magnitude
    sub, mul, neg = ring.sub, ring.mul, ring.neg

    def row_sub(dst: int, src: int, q: Scalar) -> None:
        ar, br = a[dst], a[src]
        for x in range(nc):
            ar[x] = sub(ar[x], mul(q, br[x]))
        ar, br = u[dst], u[src]
        for x in range(nr):
            ar[x] = sub(ar[x], mul(q, br[x]))

    def col_sub(dst: int, src: int, q: Scalar) -> None:
        for row in a:
            row[dst] = sub(row[dst], mul(q, row[src]))
        for row in v:
            row[dst] = sub(row[dst], mul(q, row[src]))

    def row_combine(i: int, j: int, x: Scalar, y: Scalar, z: Scalar, w: Scalar) -> None:
        # rows (i, j) <- (x*i + y*j, z*i + w*j); det of the block is a unit
        for mat, width in ((a, nc), (u, nr)):
            ri, rj = mat[i], mat[j]
            for c in range(width):
                p, q = ri[c], rj[c]
                ri[c] = ring.add(mul(x, p), mul(y, q))
                rj[c] = ring.add(mul(z, p), mul(w, q))

    def col_combine(i: int, j: int, x: Scalar, y: Scalar, z: Scalar, w: Scalar) -> None:
        for mat in (a, v):
            for row in mat:
                p, q = row[i], row[j]
                row[i] = ring.add(mul(x, p), mul(y, q))
                row[j] = ring.add(mul(z, p), mul(w, q))

    t = 0
    limit = min(nr, nc)
    while t < limit:
        # minimal-magnitude pivot in the trailing submatrix
        best = None
        best_mag = None
        for i in range(t, nr):
            row = a[i]
            for j in range(t, nc):
                x = row[j]
                if not is_zero(x):
                    mg = magnitude(x)
                    if best is None or mg < best_mag:
                        best, best_mag = (i, j), mg
        if best is None:
            break
        bi, bj = best
        if bi != t:
            _swap_rows(a, t, bi)
            _swap_rows(u, t, bi)
        if bj != t:
            _swap_cols(a, t, bj)
            _swap_cols(v, t, bj)
        while True:
            for i in range(t + 1, nr):
                b = a[i][t]
                if is_zero(b):
                    continue
                piv = a[t][t]
                q = try_div(b, piv)
                if q is not None:
                    row_sub(i, t, q)
                else:
                    g, x, y = ring.ext_gcd(piv, b)
                    row_combine(t, i, x, y, neg(ring.exact_div(b, g)), ring.exact_div(piv, g))
            for j in range(t + 1, nc):
                b = a[t][j]
                if is_zero(b):
                    continue
                piv = a[t][t]
                q = try_div(b, piv)
                if q is not None:
                    col_sub(j, t, q)
                else:
                    g, x, y = ring.ext_gcd(piv, b)
                    col_combine(t, j, x, y, neg(ring.exact_div(b, g)), ring.exact_div(piv, g))
            if all(is_zero(a[i][t]) for i in range(t + 1, nr)):
                break
        t += 1

    # repair the divisibility chain; the 2x2 blocks involved stay isolated
    for i in range(t):
        for j in range(i + 1, t):
            di, dj = a[i][i], a[j][j]
            if try_div(dj, di) is not None:
                continue
            col_sub(i, j, neg(ring.one))  # pulls d_j into column i at row j
            g, x, y = ring.ext_gcd(a[i][i], a[j][i])
            row_combine(i, j, x, y,
                        neg(ring.exact_div(a[j][i], g)), ring.exact_div(a[i][i], g))
            spill = a[i][j]
            if not is_zero(spill):
                col_sub(j, i, ring.exact_div(spill, a[i][i]))

    for i in range(t):
        unit, canon = ring.unit_normalize(a[i][i])
        if unit != ring.one:
            inv = ring.inv_unit(unit)
            a[i][i] = canon
            u[i] = [mul(inv, x) for x in u[i]]

    factors = tuple(a[i][i] for i in range(t))
    return SmithDecomposition(
        U=Matrix(ring, u, rows=nr, cols=nr),
        S=Matrix(ring, a, rows=nr, cols=nc),
        V=Matrix(ring, v, rows=nc, cols=nc),
        invariant_factors=factors,
    )


def hermite_basis(m: Matrix) -> Matrix:
    """Canonical column-Hermite form of the column span; zero columns dropped.

    The result depends only on the span of m's columns, so it doubles as a
    canonical form for submodule bases.
    """
    ring = m.ring
    nr = m.rows
    cols = [list(m.column(j)) for j in range(m.cols)]
    is_zero, try_div, magnitude = ring.is_zero, ring.try_div, ring.magnitude
    sub, mul, neg = ring.sub, ring.mul, ring.neg
    slot = 0
    for r in range(nr):
        live = [j for j in range(slot, len(cols)) if not is_zero(cols[j][r])]
        if not live:
            continue
        jstar = min(live, key=lambda j: magnitude(cols[j][r]))
        if jstar != slot:
            cols[slot], cols[jstar] = cols[jstar], cols[slot]
        for j in range(slot + 1, len(cols)):
            b = cols[j][r]
            if is_zero(b):
                continue
            piv = cols[slot][r]
            q = try_div(b, piv)
            if q is not None:
                cj, cs = cols[j], cols[slot]
                for x in range(r, nr):
                    cj[x] = sub(cj[x], mul(q, cs[x]))
            else:
                g, x, y = ring.ext_gcd(piv, b)
                mb, pa = neg(ring.exact_div(b, g)), ring.exact_div(piv, g)
                cs, cj = cols[slot], cols[j]
                for i in range(r, nr):
                    p, q2 = cs[i], cj[i]
                    cs[i] = ring.add(mul(x, p), mul(y, q2))
                    cj[i] = ring.add(mul(mb, p), mul(pa, q2))
        unit, canon = ring.unit_normalize(cols[slot][r])
        if unit != ring.one:
            inv = ring.inv_unit(unit)
            cols[slot] = [mul(inv, x) for x in cols[slot]]
        piv = cols[slot][r]
        for j in range(slot):
            e = cols[j][r]
            if is_zero(e):
                continue
            q, _ = ring.canonical_quo_rem(e, piv)
            if not is_zero(q):
                cj, cs = cols[j], cols[slot]
                for x in range(r, nr):
                    cj[x] = sub(cj[x], mul(q, cs[x]))
        slot += 1
    return Matrix.from_columns(ring, nr, cols[:slot])


def rank(m: Matrix) -> int:
    """Rank over the fraction field = number of nonzero invariant factors."""
    return hermite_basis(m).cols


def kernel_basis(m: Matrix) -> Matrix:
    """Canonical basis of ker(m); the kernel of a map between free modules is
    automatically saturated."""
    dec = snf(m)
    r = len(dec.invariant_factors)
    return hermite_basis(dec.V.columns_slice(r, m.cols))


def image_basis(m: Matrix) -> Matrix:
    """Canonical basis of the column span of m."""
    return hermite_basis(m)


def cokernel_invariants(m: Matrix) -> Tuple[int, Tuple[Scalar, ...]]:
    """(free rank, torsion factors) of coker(m); free iff torsion is empty."""
    dec = snf(m)
    ring = m.ring
    torsion = tuple(d for d in dec.invariant_factors if not ring.is_unit(d))
    return m.rows - len(dec.invariant_factors), torsion


class _SmithSolver:
    """Solves m @ x = b repeatedly from a single Smith decomposition."""

    __slots__ = ("ring", "dec", "cols", "rows")

    def __init__(self, m: Matrix):
        self.ring = m.ring
        self.dec = snf(m)
        self.rows = m.rows
        self.cols = m.cols

    def solve(self, b: Sequence[Scalar]) -> Optional[Tuple[Scalar, ...]]:
        ring, dec = self.ring, self.dec
        if len(b) != self.rows:
            raise ValueError("right-hand side has wrong length")
        ub = dec.U.apply(b)
        y = [ring.zero] * self.cols
        k = len(dec.invariant_factors)
        for i in range(k):
            q = ring.try_div(ub[i], dec.S.entries[i][i])
            if q is None:
                return None
            y[i] = q
        for i in range(k, self.rows):
            if not ring.is_zero(ub[i]):
                return None
        return dec.V.apply(y)


def solve(m: Matrix, b: Sequence[Scalar]) -> Optional[Tuple[Scalar, ...]]:
    """One exact solution x of m @ x = b over the ring, or None if none exists."""
    return _SmithSolver(m).solve(b)


def solve_columns(m: Matrix, rhs: Matrix) -> Optional[Matrix]:
    """Solve m @ X = rhs column by column; None if any column is unsolvable."""
    solver = _SmithSolver(m)
    out = []
    for j in range(rhs.cols):
        x = solver.solve(rhs.column(j))
        if x is None:
            return None
        out.append(x)
    return Matrix.from_columns(m.ring, m.cols, out)


def inverse_unimodular(m: Matrix) -> Matrix:
    """Exact inverse of a square matrix with unit determinant.

    Raises NotUnimodular when the determinant is not a unit (in particular for
    any non-square input).
    """
    if m.rows != m.cols:
        raise NotUnimodular("matrix is not square")
    ring = m.ring
    dec = snf(m)
    if len(dec.invariant_factors) != m.rows or \
            any(not ring.is_unit(d) for d in dec.invariant_factors):
        raise NotUnimodular("determinant is not a unit")
    n = m.rows
    inv_diag = [ring.inv_unit(dec.S.entries[i][i]) for i in range(n)]
    scaled = Matrix(ring, [[ring.mul(inv_diag[i], dec.U.entries[i][j]) for j in range(n)]
                           for i in range(n)], rows=n, cols=n)
    return dec.V @ scaled


def is_unimodular(m: Matrix) -> bool:
    """True iff m is square with unit determinant."""
    if m.rows != m.cols:
        return False
    dec = snf(m)
    ring = m.ring
    return len(dec.invariant_factors) == m.rows and \
        all(ring.is_unit(d) for d in dec.invariant_factors)
