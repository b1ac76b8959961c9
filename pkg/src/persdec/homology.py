"""Simplicial filtrations, integer and finite-field persistent homology,
relative homology, and the field-independence report.

Simplices carry a single integer grade; the filtration at grade g is the
subcomplex of simplices with grade <= g.  A fixed global simplex order (by
grade, then lexicographically on vertices) makes every boundary matrix the
top-left block of the ones at later grades.

Homology groups are computed from Smith normal forms of boundary data.  The
persistent module over the integers requires every pointwise group to be
free; when that holds, classes are carried along inclusions by solving for
their coordinates in a chosen free basis plus boundaries.  Over GF(p) the
same pipeline runs without a freeness hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .barcode import Barcode
from .decomp import NotDecomposable, decompose, rank_barcode_oracle
from .exactla import Matrix, inverse_unimodular, kernel_basis, snf, solve_columns
from .lattice import Submodule
from .persmod import BadOrder, CokernelWitness, PersistenceModule, check_free_cokernels
from .ring import GF, Ring, Scalar, Z


class FiltrationFormatError(ValueError):
    """Malformed filtration input; carries a 1-based line number when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.bare_message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TorsionHomology(ValueError):
    """Integer homology has torsion at some grade, so the pointwise-free
    pipeline refuses to continue."""

    def __init__(self, grade: int, dim: int, torsion: Tuple[Scalar, ...]):
        super().__init__(
            f"H_{dim} at grade {grade} has torsion {list(torsion)}")
        self.grade = grade
        self.dim = dim
        self.torsion = torsion


class SimplicialFiltration:
    """Graded simplicial complex: every face present no later than its cofaces."""

    __slots__ = ("simplices", "_grade_of", "_by_dim")

    def __init__(self, simplices: Sequence[Tuple[Sequence[int], int]]):
        seen: Dict[Tuple[int, ...], int] = {}
        for verts, grade in simplices:
            vt = tuple(verts)
            if len(set(vt)) != len(vt):
                raise FiltrationFormatError(f"repeated vertex in simplex {vt}")
            if any(v < 0 for v in vt):
                raise FiltrationFormatError(f"negative vertex in simplex {vt}")
            if tuple(sorted(vt)) != vt:
                vt = tuple(sorted(vt))
            if vt in seen:
                raise FiltrationFormatError(f"duplicate simplex {vt}")
            seen[vt] = int(grade)
        for vt, grade in seen.items():
            if len(vt) == 1:
                continue
            for i in range(len(vt)):
                face = vt[:i] + vt[i + 1:]
                fg = seen.get(face)
                if fg is None:
                    raise FiltrationFormatError(f"missing face {face} of {vt}")
                if fg > grade:
                    raise FiltrationFormatError(
                        f"face {face} appears at grade {fg}, after its coface {vt}")
        ordered = tuple(sorted(seen.items(), key=lambda item: (item[1], item[0])))
        object.__setattr__(self, "simplices", ordered)
        object.__setattr__(self, "_grade_of", dict(ordered))
        by_dim: Dict[int, List[Tuple[Tuple[int, ...], int]]] = {}
        for vt, g in ordered:
            by_dim.setdefault(len(vt) - 1, []).append((vt, g))
        object.__setattr__(self, "_by_dim", by_dim)

    def __setattr__(self, name, value):
        raise AttributeError("SimplicialFiltration is immutable")

    def __len__(self):
        return len(self.simplices)

    @property
    def grades(self) -> Tuple[int, ...]:
        return tuple(sorted({g for _, g in self.simplices}))

    def max_dim(self) -> int:
        return max((len(vt) - 1 for vt, _ in self.simplices), default=-1)

    def simplices_of_dim(self, n: int, max_grade: Optional[int] = None,
                         min_grade: Optional[int] = None) -> List[Tuple[int, ...]]:
        """n-simplices in global order, optionally windowed by grade."""
        out = []
        for vt, g in self._by_dim.get(n, []):
            if max_grade is not None and g > max_grade:
                continue
            if min_grade is not None and g <= min_grade:
                continue
            out.append(vt)
        return out

    @classmethod
    def from_text(cls, text: str) -> "SimplicialFiltration":
        """One simplex per line: `<grade> <v0> <v1> ... <vk>`; '#' comments."""
        entries = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise FiltrationFormatError(
                    "expected `<grade> <v0> [v1 ...]`", line=lineno)
            try:
                grade = int(parts[0])
                verts = [int(v) for v in parts[1:]]
            except ValueError:
                raise FiltrationFormatError(
                    f"non-integer token in {line!r}", line=lineno) from None
            if any(v < 0 for v in verts):
                raise FiltrationFormatError("vertices must be nonnegative", line=lineno)
            entries.append((verts, grade))
        try:
            return cls(entries)
        except FiltrationFormatError:
            raise
        except ValueError as exc:  # pragma: no cover - defensive
            raise FiltrationFormatError(str(exc)) from exc

    def to_text(self) -> str:
        lines = [f"{g} {' '.join(map(str, vt))}" for vt, g in self.simplices]
        return "\n".join(lines) + ("\n" if lines else "")


def boundary_matrix(filtration: SimplicialFiltration, n: int, grade: int,
                    ring: Ring = Z) -> Matrix:
    """Boundary of n-chains at the given grade: rows over (n-1)-simplices,
    columns over n-simplices, alternating signs by deleted-vertex position."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    cols = filtration.simplices_of_dim(n, max_grade=grade)
    rows = filtration.simplices_of_dim(n - 1, max_grade=grade) if n > 0 else []
    row_index = {vt: i for i, vt in enumerate(rows)}
    entries = [[ring.zero] * len(cols) for _ in range(len(rows))]
    one = ring.one
    for j, vt in enumerate(cols):
        if n == 0:
            continue
        sign = one
        for i in range(len(vt)):
            face = vt[:i] + vt[i + 1:]
            entries[row_index[face]][j] = sign
            sign = ring.neg(sign)
    return Matrix(ring, entries, rows=len(rows), cols=len(cols))


@dataclass(frozen=True)
class HomologySnapshot:
    """Pointwise homology at one grade: Betti number, torsion, a cycle basis,
    boundary coordinates inside it, and a free-part chain basis when the
    group is free."""

    grade: int
    dim: int
    betti: int
    torsion: Tuple[Scalar, ...]
    cycle_basis: Matrix
    boundary_coords: Matrix
    free_chain_basis: Optional[Matrix]


def _homology_from_boundaries(d_n: Matrix, d_np1: Matrix, grade: int,
                              dim: int) -> HomologySnapshot:
    ring = d_n.ring
    cycles = kernel_basis(d_n)
    cycle_sub = Submodule(d_n.cols, cycles, _canonical=True)
    coord_cols = []
    for j in range(d_np1.cols):
        c = cycle_sub.coords_of(d_np1.column(j))
        if c is None:  # boundaries are always cycles
            raise AssertionError("boundary column is not a cycle")
        coord_cols.append(c)
    coords = Matrix.from_columns(ring, cycles.cols, coord_cols)
    dec = snf(coords)
    r = len(dec.invariant_factors)
    torsion = tuple(d for d in dec.invariant_factors if not ring.is_unit(d))
    betti = cycles.cols - r
    free_chain = None
    if not torsion:
        uinv = inverse_unimodular(dec.U)
        free_chain = cycles @ uinv.columns_slice(r, cycles.cols)
    return HomologySnapshot(grade=grade, dim=dim, betti=betti, torsion=torsion,
                            cycle_basis=cycles, boundary_coords=coords,
                            free_chain_basis=free_chain)


def homology_snapshot(filtration: SimplicialFiltration, n: int, grade: int,
                      ring: Ring = Z) -> HomologySnapshot:
    """Homology of the subcomplex at one grade, via Smith reduction of the
    boundary pair."""
    d_n = boundary_matrix(filtration, n, grade, ring)
    d_np1 = boundary_matrix(filtration, n + 1, grade, ring)
    return _homology_from_boundaries(d_n, d_np1, grade, n)


def persistent_homology_module(filtration: SimplicialFiltration, n: int,
                               ring: Ring = Z) -> PersistenceModule:
    """The persistence module of H_n along the filtration.

    Raises TorsionHomology when some pointwise group fails to be free (only
    possible over the integers); the pipeline refuses rather than guessing.
    """
    grades = filtration.grades
    snapshots = []
    for g in grades:
        snap = homology_snapshot(filtration, n, g, ring)
        if snap.torsion:
            raise TorsionHomology(g, n, snap.torsion)
        snapshots.append(snap)
    steps = []
    for i in range(len(grades) - 1):
        src, dst = snapshots[i], snapshots[i + 1]
        d_np1 = boundary_matrix(filtration, n + 1, grades[i + 1], ring)
        frame = dst.free_chain_basis.hstack(d_np1)
        n_src_chains = src.cycle_basis.rows
        n_dst_chains = dst.cycle_basis.rows
        padded_cols = []
        for j in range(src.free_chain_basis.cols):
            col = list(src.free_chain_basis.column(j))
            col.extend([ring.zero] * (n_dst_chains - n_src_chains))
            padded_cols.append(col)
        padded = Matrix.from_columns(ring, n_dst_chains, padded_cols)
        sol = solve_columns(frame, padded)
        if sol is None:  # free homology makes classes expressible: unreachable
            raise AssertionError("cycle class escaped the free basis")
        step = Matrix(ring, [sol.row(i2) for i2 in range(dst.betti)],
                      rows=dst.betti, cols=sol.cols)
        steps.append(step)
    return PersistenceModule(ring, grades, [s.betti for s in snapshots], steps)


def field_diagram(filtration: SimplicialFiltration, n: int, p: int) -> Barcode:
    """Persistence diagram of H_n over GF(p), through an interval
    decomposition of the finite-field persistence module."""
    module = persistent_homology_module(filtration, n, GF(p))
    _, bars = decompose(module)
    return bars


def relative_homology_invariants(filtration: SimplicialFiltration, a: int, b: int,
                                 n: int, ring: Ring = Z) -> Tuple[int, Tuple[Scalar, ...]]:
    """(Betti, torsion) of the relative homology H_n(K_b, K_a).

    Built from the chain complex spanned by simplices with grade in (a, b];
    rows and columns of the boundary matrices are restricted to that window.
    """
    if b < a:
        raise BadOrder(f"relative homology requested for {a} > {b}")

    def rel_boundary(dim: int) -> Matrix:
        cols = filtration.simplices_of_dim(dim, max_grade=b, min_grade=a)
        rows = filtration.simplices_of_dim(dim - 1, max_grade=b, min_grade=a) \
            if dim > 0 else []
        row_index = {vt: i for i, vt in enumerate(rows)}
        entries = [[ring.zero] * len(cols) for _ in range(len(rows))]
        one = ring.one
        for j, vt in enumerate(cols):
            if dim == 0:
                continue
            sign = one
            for i in range(len(vt)):
                face = vt[:i] + vt[i + 1:]
                idx = row_index.get(face)
                if idx is not None:
                    entries[idx][j] = sign
                sign = ring.neg(sign)
        return Matrix(ring, entries, rows=len(rows), cols=len(cols))

    snap = _homology_from_boundaries(rel_boundary(n), rel_boundary(n + 1), b, n)
    return snap.betti, snap.torsion


@dataclass(frozen=True)
class FieldIndependenceReport:
    """Joint verdicts of the four equivalent characterizations of
    field-independent persistence, plus the freeness-hypothesis bookkeeping.

    Verdicts are None when the hypothesis failure at dimension n makes the
    underlying computation meaningless.  When the hypothesis holds, the four
    verdicts agree (all true or all false)."""

    dimension: int
    primes: Tuple[int, ...]
    h_n_free: bool
    h_n_minus_1_free: bool
    torsion_snapshots: Tuple[Tuple[int, int, Tuple[Scalar, ...]], ...]
    decomposable: Optional[bool]
    cokernels_free: Optional[bool]
    cokernel_witness: Optional[CokernelWitness]
    relative_free: Optional[bool]
    relative_witness: Optional[Tuple[int, int, int, Tuple[Scalar, ...]]]
    diagrams_equal: Optional[bool]
    diagram_witness: Optional[Tuple[str, str]]
    diagrams: Tuple[Tuple[str, Barcode], ...]
    max_invariant_factor: Optional[int]

    @property
    def hypothesis_ok(self) -> bool:
        return self.h_n_free and self.h_n_minus_1_free

    @property
    def all_true(self) -> bool:
        return (self.decomposable is True and self.cokernels_free is True
                and self.relative_free is True and self.diagrams_equal is True)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "primes": list(self.primes),
            "hypothesis": {
                "h_n_free": self.h_n_free,
                "h_n_minus_1_free": self.h_n_minus_1_free,
                "torsion_snapshots": [
                    {"grade": g, "dim": d, "torsion": [Z.to_str(t) for t in tor]}
                    for g, d, tor in self.torsion_snapshots],
            },
            "conditions": {
                "decomposable": self.decomposable,
                "cokernels_free": {
                    "verdict": self.cokernels_free,
                    "witness": None if self.cokernel_witness is None
                    else self.cokernel_witness.to_json(),
                },
                "relative_homology_free": {
                    "verdict": self.relative_free,
                    "witness": None if self.relative_witness is None else {
                        "from": self.relative_witness[0],
                        "to": self.relative_witness[1],
                        "dim": self.relative_witness[2],
                        "torsion": [Z.to_str(t) for t in self.relative_witness[3]],
                    },
                },
                "diagrams_equal": {
                    "verdict": self.diagrams_equal,
                    "witness": None if self.diagram_witness is None
                    else {"first": self.diagram_witness[0],
                          "second": self.diagram_witness[1]},
                },
            },
            "diagrams": {label: bc.to_json() for label, bc in self.diagrams},
            "max_invariant_factor": None if self.max_invariant_factor is None
            else str(self.max_invariant_factor),
        }


def field_independence_report(filtration: SimplicialFiltration, n: int,
                              primes: Sequence[int]) -> FieldIndependenceReport:
    """Evaluate the four field-independence conditions over the given primes.

    Condition checks: (1) integer interval decomposability, (2) free
    cokernels of all induced maps, (3) freeness of every relative homology
    group, (4) equality of the diagrams over the rational numbers and every
    listed prime.  "Every field" cannot be enumerated, so the report names
    the primes tested and the largest invariant factor seen, which bounds the
    primes at which diagrams can disagree.
    """
    if not primes:
        raise ValueError("at least one prime is required")
    primes = tuple(sorted(set(int(p) for p in primes)))
    grades = filtration.grades
    torsion_snaps: List[Tuple[int, int, Tuple[Scalar, ...]]] = []
    max_factor: Optional[int] = None

    def note_factor(values) -> None:
        nonlocal max_factor
        for v in values:
            av = abs(int(v))
            if max_factor is None or av > max_factor:
                max_factor = av

    h_n_free = True
    h_n_minus_1_free = True
    for g in grades:
        for dim in ([n - 1] if n > 0 else []) + [n]:
            snap = homology_snapshot(filtration, dim, g, Z)
            if snap.torsion:
                torsion_snaps.append((g, dim, snap.torsion))
                note_factor(snap.torsion)
                if dim == n:
                    h_n_free = False
                else:
                    h_n_minus_1_free = False

    relative_free: Optional[bool] = True
    relative_witness = None
    for ai, a in enumerate(grades):
        if relative_witness:
            break
        for b in grades[ai + 1:]:
            betti, torsion = relative_homology_invariants(filtration, a, b, n)
            if torsion:
                note_factor(torsion)
                relative_free = False
                relative_witness = (a, b, n, torsion)
                break

    decomposable: Optional[bool] = None
    cokernels_free: Optional[bool] = None
    cokernel_witness = None
    diagrams_equal: Optional[bool] = None
    diagram_witness = None
    diagrams: List[Tuple[str, Barcode]] = []

    if h_n_free:
        module = persistent_homology_module(filtration, n, Z)
        cokernel_witness = check_free_cokernels(module)
        cokernels_free = cokernel_witness is None
        if cokernel_witness is not None:
            note_factor(cokernel_witness.torsion)
        try:
            decompose(module)
            decomposable = True
        except NotDecomposable:
            decomposable = False
        for p in primes:
            diagrams.append((f"GF({p})", field_diagram(filtration, n, p)))
        diagrams.append(("Q", rank_barcode_oracle(module)))
        diagrams_equal = True
        for i in range(len(diagrams)):
            for j in range(i + 1, len(diagrams)):
                if not diagrams[i][1].same_bars(diagrams[j][1]):
                    diagrams_equal = False
                    diagram_witness = (diagrams[i][0], diagrams[j][0])
                    break
            if diagram_witness:
                break
    else:
        # dimension-n torsion: the integer module does not exist pointwise
        # free, so none of the four conditions is meaningful
        relative_free = None
        relative_witness = None

    return FieldIndependenceReport(
        dimension=n,
        primes=primes,
        h_n_free=h_n_free,
        h_n_minus_1_free=h_n_minus_1_free,
        torsion_snapshots=tuple(torsion_snaps),
        decomposable=decomposable,
        cokernels_free=cokernels_free,
        cokernel_witness=cokernel_witness,
        relative_free=relative_free,
        relative_witness=relative_witness,
        diagrams_equal=diagrams_equal,
        diagram_witness=diagram_witness,
        diagrams=tuple(diagrams),
        max_invariant_factor=max_factor,
    )
