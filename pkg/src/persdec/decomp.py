"""Interval decomposition by incremental consistent-basis extension.

A consistent basis assigns each actual grade a unimodular basis matrix such
that every structure map, rewritten in these bases, is a matching matrix
(entries 0/1, at most one nonzero per row and per column).  Such a family is
exactly the witness of an interval decomposition; the barcode reads off the
matched chains.

decompose() first decides decomposability through the free-cokernel check
and then grows the basis one grade at a time.  Each extension step picks a
critical index set around the new grade and builds the new basis blockwise
from the (p, q)-partition of its neighbors:

  case 1  the block cannot support vectors at this grade: empty;
  case 2  the block is born at or before the nearest anchored grade below:
          push that grade's block forward;
  case 3  the block dies after the nearest anchored grade above: pull that
          grade's block back, one preimage per vector, each chosen inside the
          matching image-kernel submodule (the split of a short exact
          sequence guarantees such preimages exist);
  case 4  nothing to push or pull: carve a fresh complement out of the
          image-kernel lattice.

The only way an extension can fail is a missing complement, which is the
same torsion obstruction the cokernel check reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .barcode import Barcode
from .exactla import Matrix, inverse_unimodular, is_unimodular, rank
from .lattice import NotFreeQuotient, Submodule, complement, preimage
from .persmod import (
    MAX,
    MIN,
    CriticalIndexSet,
    Grade,
    PersistenceModule,
    check_free_cokernels,
    critical_index_set,
)
from .ring import Ring

# Exactness assertions of the split short exact sequence run by default; they
# are cheap relative to the surrounding lattice work.  Flip off only for
# throughput experiments.
EXACTNESS_CHECKS = True

# count of assertion batches executed, so test campaigns can confirm the
# checks were exercised and not silently skipped
exactness_checks_run = 0


class DecompositionError(Exception):
    """Base class for decomposition failures."""


class NotDecomposable(DecompositionError):
    """The module admits no interval decomposition; carries the witness pair."""

    def __init__(self, witness):
        super().__init__(
            f"no interval decomposition: structure map {witness.source} -> "
            f"{witness.target} has torsion cokernel {list(witness.torsion)}")
        self.witness = witness


class NotFreeCokernel(DecompositionError):
    """A required complement does not exist (torsion quotient)."""

    def __init__(self, grade, p, q, torsion):
        super().__init__(
            f"no complement at grade {grade} for block ({p}, {q}): "
            f"torsion {list(torsion)}")
        self.grade = grade
        self.p = p
        self.q = q
        self.torsion = torsion


class InconsistentInput(DecompositionError):
    """A basis handed to extension fails the consistency contract."""


class ExactnessViolation(DecompositionError):
    """An exactness assertion of the pullback construction failed; indicates
    an inconsistent input basis or an internal bug, not bad user data."""


class CaseGap(DecompositionError):
    """The four-case dispatch failed to classify a block (unreachable)."""


class ZeroVector(ValueError):
    """Labels are only defined for nonzero vectors."""


class NegativeMultiplicity(DecompositionError):
    """The rank inclusion-exclusion produced a negative bar count."""


def is_matching_matrix(m: Matrix) -> bool:
    """Entries in {0, 1} with at most one nonzero per row and per column."""
    ring = m.ring
    row_used = [False] * m.rows
    col_used = [False] * m.cols
    for i in range(m.rows):
        for j in range(m.cols):
            x = m.entries[i][j]
            if ring.is_zero(x):
                continue
            if x != ring.one:
                return False
            if row_used[i] or col_used[j]:
                return False
            row_used[i] = True
            col_used[j] = True
    return True


def label_vector(f: PersistenceModule, j: Grade, crit: CriticalIndexSet,
                 v: Sequence) -> Tuple[int, int]:
    """(birth position, death position) of v at grade j, relative to the
    critical representatives: the least p with v in Im[i_p, j] and the least
    q with v in Ker[j, i_q]."""
    ring = f.ring
    if all(ring.is_zero(x) for x in v):
        raise ZeroVector("cannot label the zero vector")
    p = q = None
    for pos in range(1, crit.r + 1):
        rep = crit.grade(pos)
        if p is None and f.im_sub(rep, j).contains_vector(v):
            p = pos
        if q is None and f.ker_sub(j, rep).contains_vector(v):
            q = pos
        if p is not None and q is not None:
            return p, q
    raise CaseGap(f"vector at grade {j!r} has no label; critical set is not covering")


@dataclass(frozen=True)
class GradeBasis:
    """Basis matrix for one grade, the (p, q) label of each column, and the
    representatives those labels refer to."""

    grade: int
    matrix: Matrix
    labels: Tuple[Tuple[int, int], ...]
    representatives: Tuple[Grade, ...]

    def columns_labeled(self, p: int, q: int) -> List[Tuple]:
        return [self.matrix.column(c) for c, pq in enumerate(self.labels) if pq == (p, q)]


class ConsistentBasis:
    """Per-grade unimodular bases; the computational witness of an interval
    decomposition of the bound module."""

    __slots__ = ("module", "_bases")

    def __init__(self, module: PersistenceModule,
                 bases: Optional[Dict[int, GradeBasis]] = None):
        object.__setattr__(self, "module", module)
        object.__setattr__(self, "_bases", dict(bases or {}))

    def __setattr__(self, name, value):
        raise AttributeError("ConsistentBasis is immutable")

    @property
    def grades(self) -> Tuple[int, ...]:
        return tuple(sorted(self._bases))

    def __contains__(self, grade: int) -> bool:
        return grade in self._bases

    def at(self, grade: int) -> GradeBasis:
        return self._bases[grade]

    def with_grade(self, gb: GradeBasis) -> "ConsistentBasis":
        if gb.grade in self._bases:
            raise ValueError(f"grade {gb.grade} already has a basis")
        merged = dict(self._bases)
        merged[gb.grade] = gb
        return ConsistentBasis(self.module, merged)

    def basis_matrix(self, grade: Grade) -> Matrix:
        """Basis matrix at any extended grade (identity of rank 0 at endpoints)."""
        if isinstance(grade, int) and grade in self._bases:
            return self._bases[grade].matrix
        n = self.module.rank_at(grade)
        if n == 0:
            return Matrix.identity(self.module.ring, 0)
        raise KeyError(f"no basis stored for grade {grade!r}")

    def to_json(self) -> dict:
        out = []
        for g in self.grades:
            gb = self._bases[g]
            out.append({
                "grade": g,
                "matrix": gb.matrix.to_json(),
                "labels": [list(pq) for pq in gb.labels],
                "representatives": [_encode_grade(r) for r in gb.representatives],
            })
        return {"grades": list(self.grades), "bases": out}

    @classmethod
    def from_json(cls, module: PersistenceModule, obj: dict) -> "ConsistentBasis":
        bases = {}
        for entry in obj["bases"]:
            g = int(entry["grade"])
            bases[g] = GradeBasis(
                grade=g,
                matrix=Matrix.from_json(module.ring, entry["matrix"]),
                labels=tuple((int(p), int(q)) for p, q in entry["labels"]),
                representatives=tuple(_decode_grade(r) for r in entry["representatives"]),
            )
        return cls(module, bases)


def _encode_grade(g: Grade):
    if g is MIN:
        return "-inf"
    if g is MAX:
        return "inf"
    return g


def _decode_grade(v) -> Grade:
    if v == "-inf":
        return MIN
    if v == "inf":
        return MAX
    return int(v)


def _partition(f: PersistenceModule, j: Grade, crit: CriticalIndexSet,
               bases: ConsistentBasis) -> Dict[Tuple[int, int], List[Tuple]]:
    """Group the stored basis columns at j by their (p, q) labels."""
    cells: Dict[Tuple[int, int], List[Tuple]] = {}
    matrix = bases.basis_matrix(j)
    for c in range(matrix.cols):
        v = matrix.column(c)
        cells.setdefault(label_vector(f, j, crit, v), []).append(v)
    return cells


def _ik_pos(f: PersistenceModule, a: Grade, reps: Tuple[Grade, ...],
            p: int, q: int) -> Submodule:
    """IK at a for 1-based representative positions; position 0 denotes the
    empty image / zero kernel."""
    if p < 1 or q < 1:
        return Submodule.zero(f.ring, f.rank_at(a))
    return f.ik(a, reps[p - 1], reps[q - 1])


def _case3_pullback(f: PersistenceModule, a: int, crit: CriticalIndexSet,
                    p: int, q: int, targets: List[Tuple]) -> List[Tuple]:
    """One preimage inside IK_a[i_p, i_q] per target vector at i_t.

    Solvability is the surjectivity half of the split exact sequence; with
    EXACTNESS_CHECKS on, both the surjectivity and the preimage identity are
    asserted outright.
    """
    i_t = crit.grade(crit.t)
    i_p, i_q = crit.grade(p), crit.grade(q)
    ik_a = f.ik(a, i_p, i_q)
    step = f.structure_map(a, i_t)
    restricted = step @ ik_a.basis
    out: List[Tuple] = []
    if targets:
        from .exactla import _SmithSolver

        solver = _SmithSolver(restricted)
        for w in targets:
            x = solver.solve(w)
            if x is None:
                raise ExactnessViolation(
                    f"target vector at {i_t!r} has no preimage inside IK at {a}")
            out.append(ik_a.basis.apply(x))
    if EXACTNESS_CHECKS:
        global exactness_checks_run
        exactness_checks_run += 1
        image = Submodule(f.rank_at(i_t), restricted)
        if image != f.ik(i_t, i_p, i_q):
            raise ExactnessViolation(
                f"IK at {a} does not surject onto IK at {i_t!r} for block ({p}, {q})")
        lower_t = f.ik(i_t, crit.grade(p - 1), i_q).sum(f.ik(i_t, i_p, crit.grade(q - 1)))
        lower_a = f.ik(a, crit.grade(p - 1), i_q).sum(f.ik(a, i_p, crit.grade(q - 1)))
        if preimage(step, lower_t).intersect(ik_a) != lower_a:
            raise ExactnessViolation(
                f"preimage identity fails at {a} for block ({p}, {q})")
    return out


def pullback_split(f: PersistenceModule, a: int, crit: CriticalIndexSet,
                   p: int, q: int, bases: ConsistentBasis) -> Submodule:
    """Span of the chosen case-3 preimages of the (p, q) block above a."""
    if not (crit.s < p <= crit.k < crit.t < q <= crit.r):
        raise ValueError("pullback_split requires a case-3 configuration")
    cells = _partition(f, crit.grade(crit.t), crit, bases)
    vectors = _case3_pullback(f, a, crit, p, q, cells.get((p, q), []))
    if not vectors:
        return Submodule.zero(f.ring, f.rank_at(a))
    return Submodule.spanned_by(f.ring, f.rank_at(a), vectors)


def extend_basis(f: PersistenceModule, J: Iterable[Grade], bases: ConsistentBasis,
                 a: int, *, verify: bool = False) -> ConsistentBasis:
    """Extend a consistent basis on J by a new grade a.

    With verify=True the input is checked first (InconsistentInput on
    failure) and the partition invariants of the freshly built basis are
    checked afterwards.
    """
    jset = frozenset(J)
    if verify and not verify_consistent(f, bases, jset):
        raise InconsistentInput(f"input bases on {sorted(jset, key=_sort_key)} are not consistent")
    crit = critical_index_set(f, a, jset)
    k, s, t, r = crit.k, crit.s, crit.t, crit.r
    i_s, i_t = crit.grade(s), crit.grade(t)
    push = f.structure_map(i_s, a)
    cells_s = _partition(f, i_s, crit, bases)
    cells_t = _partition(f, i_t, crit, bases)

    columns: List[Tuple] = []
    labels: List[Tuple[int, int]] = []
    for p in range(1, r + 1):
        for q in range(1, r + 1):
            if p > k or q <= k:
                continue  # case 1: nothing lives at a in this block
            if p <= s:
                block = [push.apply(v) for v in cells_s.get((p, q), [])]  # case 2
            elif q > t:
                block = _case3_pullback(f, a, crit, p, q, cells_t.get((p, q), []))
            elif q <= t:
                block = _case4_complement(f, a, crit, p, q)
            else:  # pragma: no cover - the three branches above are exhaustive
                raise CaseGap(f"block ({p}, {q}) escaped the case dispatch at grade {a}")
            columns.extend(block)
            labels.extend([(p, q)] * len(block))

    n_a = f.rank_at(a)
    if len(columns) != n_a:
        raise InconsistentInput(
            f"extension at {a} produced {len(columns)} vectors for rank {n_a}; "
            "the input basis violates the consistency contract")
    matrix = Matrix.from_columns(f.ring, n_a, columns)
    gb = GradeBasis(grade=a, matrix=matrix, labels=tuple(labels),
                    representatives=crit.representatives)
    extended = bases.with_grade(gb)
    if verify:
        problems = partition_violations(f, gb)
        if problems:
            raise InconsistentInput(
                f"extension at {a} violates partition invariants: {problems[0]}")
        if not verify_consistent(f, extended, jset | {a}):
            raise InconsistentInput(f"extension at {a} broke consistency")
    return extended


def _case4_complement(f: PersistenceModule, a: int, crit: CriticalIndexSet,
                      p: int, q: int) -> List[Tuple]:
    reps = crit.representatives
    ik_pq = _ik_pos(f, a, reps, p, q)
    lower = _ik_pos(f, a, reps, p - 1, q).sum(_ik_pos(f, a, reps, p, q - 1))
    try:
        comp = complement(lower, ik_pq)
    except NotFreeQuotient as exc:
        raise NotFreeCokernel(a, p, q, exc.torsion) from exc
    return comp.basis.columns()


def partition_violations(f: PersistenceModule, gb: GradeBasis) -> List[str]:
    """Check the partition identities of a freshly extended grade.

    Returns human-readable descriptions of any failures: the labeled blocks
    must exhaust f_a as a direct sum, label prefixes must span the matching
    kernels and images, and each block must complement its lower blocks
    inside its image-kernel submodule.
    """
    a = gb.grade
    reps = gb.representatives
    problems: List[str] = []
    n_a = f.rank_at(a)
    if not is_unimodular(gb.matrix):
        problems.append("basis matrix is not unimodular")
    r = len(reps)
    for n in range(1, r + 1):
        ker_cols = [gb.matrix.column(c) for c, (p, q) in enumerate(gb.labels) if q <= n]
        span = Submodule.spanned_by(f.ring, n_a, ker_cols)
        if span != f.ker_sub(a, reps[n - 1]):
            problems.append(f"columns with q <= {n} do not span the kernel at position {n}")
        im_cols = [gb.matrix.column(c) for c, (p, q) in enumerate(gb.labels) if p <= n]
        span = Submodule.spanned_by(f.ring, n_a, im_cols)
        if span != f.im_sub(reps[n - 1], a):
            problems.append(f"columns with p <= {n} do not span the image at position {n}")
    for p in range(1, r + 1):
        for q in range(1, r + 1):
            block = Submodule.spanned_by(
                f.ring, n_a,
                [gb.matrix.column(c) for c, pq in enumerate(gb.labels) if pq == (p, q)])
            ik_pq = _ik_pos(f, a, reps, p, q)
            lower = _ik_pos(f, a, reps, p - 1, q).sum(_ik_pos(f, a, reps, p, q - 1))
            if block.sum(lower) != ik_pq or not block.intersect(lower).is_zero():
                problems.append(f"block ({p}, {q}) is not a complement inside its IK")
    return problems


def _sort_key(g: Grade):
    if g is MIN:
        return (-1, 0)
    if g is MAX:
        return (1, 0)
    return (0, g)


def verify_consistent(f: PersistenceModule, bases: ConsistentBasis,
                      J: Iterable[Grade]) -> bool:
    """True iff the bases on J witness consistency with respect to f.

    Checks that every pairwise structure map over J is a matching matrix in
    the stored bases and that, at each grade, the basis contains a basis for
    every distinct kernel out of and image into that grade.
    """
    jset = frozenset(J)
    actual = sorted(g for g in jset if isinstance(g, int))
    if set(actual) != set(bases.grades):
        return False
    inverses = {}
    for g in actual:
        m = bases.at(g).matrix
        if m.rows != f.rank_at(g) or m.cols != f.rank_at(g):
            return False
        try:
            inverses[g] = inverse_unimodular(m)
        except Exception:
            return False
    for xi, x in enumerate(actual):
        for y in actual[xi + 1:]:
            rep = inverses[y] @ f.structure_map(x, y) @ bases.at(x).matrix
            if not is_matching_matrix(rep):
                return False
    ext = f.index_set.extended
    for g in actual:
        matrix = bases.at(g).matrix
        cols = matrix.columns()
        n_g = f.rank_at(g)
        targets: Set[Submodule] = set()
        for y in ext:
            targets.add(f.ker_sub(g, y))
        for x in ext:
            targets.add(f.im_sub(x, g))
        for sub in targets:
            inside = [c for c in cols if sub.contains_vector(c)]
            if Submodule.spanned_by(f.ring, n_g, inside) != sub:
                return False
    return True


def decompose(f: PersistenceModule, *, order: Optional[Sequence[int]] = None,
              verify: bool = False) -> Tuple[ConsistentBasis, Barcode]:
    """Decide decomposability and construct a consistent basis plus barcode.

    Raises NotDecomposable with the first witness pair when some composite
    structure map has torsion cokernel.  The insertion order of grades is
    ascending by default and immaterial to the resulting barcode.
    """
    witness = check_free_cokernels(f)
    if witness is not None:
        raise NotDecomposable(witness)
    if order is None:
        order = list(f.grades)
    elif sorted(order) != sorted(f.grades):
        raise ValueError("order must enumerate exactly the module's grades")
    J: Set[Grade] = {MIN, MAX}
    bases = ConsistentBasis(f)
    for a in order:
        bases = extend_basis(f, J, bases, a, verify=verify)
        J.add(a)
    bars = barcode_of(bases)
    for g in f.grades:
        if bars.total_at(g) != f.rank_at(g):
            raise InconsistentInput(
                f"barcode count at {g} does not reproduce the rank")  # pragma: no cover
    return bases, bars


def barcode_of(bases: ConsistentBasis) -> Barcode:
    """Barcode of a verified consistent basis: follow the matchings across
    consecutive grades; every maximal matched chain is one bar."""
    f = bases.module
    gs = bases.grades
    ring = f.ring
    if not gs:
        return Barcode.empty(ring.label)
    bars: List[Tuple[int, Optional[int]]] = []
    alive: Dict[int, int] = {c: gs[0] for c in range(f.rank_at(gs[0]))}
    for i in range(len(gs) - 1):
        g, nxt = gs[i], gs[i + 1]
        step = inverse_unimodular(bases.at(nxt).matrix) @ \
            f.structure_map(g, nxt) @ bases.at(g).matrix
        if not is_matching_matrix(step):
            raise InconsistentInput(
                f"step {g} -> {nxt} is not a matching matrix in the stored bases")
        row_of_col = {}
        for rr in range(step.rows):
            for cc in range(step.cols):
                if not ring.is_zero(step.entries[rr][cc]):
                    row_of_col[cc] = rr
        nxt_alive: Dict[int, int] = {}
        for c, birth in alive.items():
            target = row_of_col.get(c)
            if target is None:
                bars.append((birth, nxt))
            else:
                nxt_alive[target] = birth
        for rr in range(f.rank_at(nxt)):
            if rr not in nxt_alive:
                nxt_alive[rr] = nxt
        alive = nxt_alive
    bars.extend((birth, None) for birth in alive.values())
    return Barcode.of(bars, ring.label)


def rank_barcode_oracle(f: PersistenceModule) -> Barcode:
    """Barcode by rank inclusion-exclusion over the fraction field.

    Independent of the consistent-basis machinery; only uses ranks of
    composite structure maps.  Raises NegativeMultiplicity on a module whose
    rank function is not interval-decomposable (impossible for genuine
    persistence modules over a domain).
    """
    gs = f.grades
    ext = f.index_set.extended
    n = len(gs)
    r_cache: Dict[Tuple[Grade, Grade], int] = {}

    def r(x: Grade, y: Grade) -> int:
        key = (x, y)
        if key not in r_cache:
            r_cache[key] = rank(f.structure_map(x, y))
        return r_cache[key]

    bars = []
    for i in range(1, n + 1):
        b = ext[i]
        for j in range(i + 1, n + 2):
            d = ext[j]
            mult = r(b, ext[j - 1]) - r(b, d) - r(ext[i - 1], ext[j - 1]) + r(ext[i - 1], d)
            if mult < 0:
                raise NegativeMultiplicity(
                    f"negative multiplicity for bar [{b}, {d!r})")
            if mult > 0:
                bars.append((b, None if d is MAX else d, mult))
    coeff = f.ring.fraction_label
    return Barcode(tuple(bars), coeff)
