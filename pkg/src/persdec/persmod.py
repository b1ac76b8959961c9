"""Persistence modules over a finite totally ordered grade set with virtual
endpoints, their image/kernel sublattice, critical index selection, and the
free-cokernel decidability check.

A module stores one free rank per grade and one matrix per consecutive grade
pair; composite structure maps are memoized products.  The virtual endpoints
MIN and MAX carry the zero module, so maps into and out of them are the
unique zero-dimensional matrices and no special cases leak into the algebra.

Modules are immutable after construction.  The composite-map, kernel, image
and intersection caches are pure (a key always maps to the same value), so
concurrent readers are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .barcode import Barcode
from .exactla import Matrix, image_basis, kernel_basis, snf
from .lattice import Submodule
from .ring import Ring, Scalar, Z


class BadOrder(ValueError):
    """A structure map was requested against the grade order."""


class _Endpoint:
    """Virtual -inf / +inf grade; compares against every integer grade."""

    __slots__ = ("_sign", "_name")

    def __init__(self, sign: int, name: str):
        self._sign = sign
        self._name = name

    def __lt__(self, other):
        if isinstance(other, _Endpoint):
            return self._sign < other._sign
        if isinstance(other, int):
            return self._sign < 0
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, _Endpoint):
            return self._sign > other._sign
        if isinstance(other, int):
            return self._sign > 0
        return NotImplemented

    def __le__(self, other):
        return self == other or self < other

    def __ge__(self, other):
        return self == other or self > other

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return hash(("persdec.endpoint", self._sign))

    def __repr__(self):
        return self._name


MIN = _Endpoint(-1, "MIN")
MAX = _Endpoint(+1, "MAX")

Grade = Union[int, _Endpoint]

_GRADE_BOUND = 1 << 63


class IndexSet:
    """Strictly increasing 64-bit grade labels plus the virtual endpoints."""

    __slots__ = ("grades", "extended", "_pos")

    def __init__(self, grades: Sequence[int]):
        gs = tuple(grades)
        for g in gs:
            if not isinstance(g, int) or not (-_GRADE_BOUND <= g < _GRADE_BOUND):
                raise ValueError(f"grade {g!r} is not a 64-bit integer")
        if any(gs[i] >= gs[i + 1] for i in range(len(gs) - 1)):
            raise ValueError("grades must be strictly increasing")
        object.__setattr__(self, "grades", gs)
        object.__setattr__(self, "extended", (MIN,) + gs + (MAX,))
        object.__setattr__(self, "_pos", {g: i for i, g in enumerate(self.extended)})

    def __setattr__(self, name, value):
        raise AttributeError("IndexSet is immutable")

    def __contains__(self, g: Grade) -> bool:
        return g in self._pos

    def __len__(self) -> int:
        return len(self.grades)

    def position(self, g: Grade) -> int:
        """Position of g in the extended list (MIN is 0)."""
        try:
            return self._pos[g]
        except KeyError:
            raise KeyError(f"grade {g!r} is not in the index set") from None

    def pred(self, g: Grade) -> Grade:
        return self.extended[self.position(g) - 1]

    def succ(self, g: Grade) -> Grade:
        return self.extended[self.position(g) + 1]

    def __eq__(self, other):
        return isinstance(other, IndexSet) and other.grades == self.grades

    def __hash__(self):
        return hash(self.grades)

    def __repr__(self):
        return f"IndexSet({list(self.grades)})"


class PersistenceModule:
    """Pointwise free module with one step matrix per consecutive grade pair."""

    __slots__ = ("ring", "index_set", "_ranks", "_steps",
                 "_maps", "_kers", "_ims", "_iks")

    def __init__(self, ring: Ring, grades: Union[IndexSet, Sequence[int]],
                 ranks: Sequence[int], steps: Sequence[Matrix]):
        index_set = grades if isinstance(grades, IndexSet) else IndexSet(grades)
        gs = index_set.grades
        if len(ranks) != len(gs):
            raise ValueError("one rank per grade required")
        if any(r < 0 for r in ranks):
            raise ValueError("ranks must be nonnegative")
        if len(steps) != max(len(gs) - 1, 0):
            raise ValueError("one step map per consecutive grade pair required")
        for i, m in enumerate(steps):
            if m.ring != ring:
                raise ValueError("step map ring mismatch")
            if m.rows != ranks[i + 1] or m.cols != ranks[i]:
                raise ValueError(
                    f"step {gs[i]}->{gs[i+1]} must be {ranks[i+1]}x{ranks[i]}, "
                    f"got {m.rows}x{m.cols}")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "index_set", index_set)
        object.__setattr__(self, "_ranks", dict(zip(gs, ranks)))
        object.__setattr__(self, "_steps", tuple(steps))
        object.__setattr__(self, "_maps", {})
        object.__setattr__(self, "_kers", {})
        object.__setattr__(self, "_ims", {})
        object.__setattr__(self, "_iks", {})

    def __setattr__(self, name, value):
        raise AttributeError("PersistenceModule is immutable")

    @property
    def grades(self) -> Tuple[int, ...]:
        return self.index_set.grades

    def rank_at(self, g: Grade) -> int:
        if isinstance(g, _Endpoint):
            return 0
        return self._ranks[g]

    def step(self, g: Grade) -> Matrix:
        """The stored map out of g to the next extended grade."""
        pos = self.index_set.position(g)
        if g is MIN:
            nxt = self.index_set.succ(g)
            return Matrix.zeros(self.ring, self.rank_at(nxt), 0)
        if pos == len(self.index_set.extended) - 2:  # last actual grade or MIN
            return Matrix.zeros(self.ring, 0, self.rank_at(g))
        return self._steps[pos - 1]

    def structure_map(self, a: Grade, b: Grade) -> Matrix:
        """Composite map f(a <= b); identity at a = b; memoized."""
        if a not in self.index_set or b not in self.index_set:
            raise KeyError(f"grades {a!r}, {b!r} must lie in the index set")
        if b < a:
            raise BadOrder(f"structure map requested for {a!r} > {b!r}")
        key = (a, b)
        cached = self._maps.get(key)
        if cached is not None:
            return cached
        if a == b:
            result = Matrix.identity(self.ring, self.rank_at(a))
        else:
            prev = self.index_set.pred(b)
            result = self.step(prev)
            if prev != a:
                result = result @ self.structure_map(a, prev)
        self._maps[key] = result
        return result

    def ker_sub(self, a: Grade, y: Grade) -> Submodule:
        """Kernel of f(a <= y) as a submodule of f_a; zero when y < a."""
        key = (a, y)
        cached = self._kers.get(key)
        if cached is None:
            if y < a:
                cached = Submodule.zero(self.ring, self.rank_at(a))
            else:
                cached = Submodule(self.rank_at(a),
                                   kernel_basis(self.structure_map(a, y)),
                                   _canonical=True)
            self._kers[key] = cached
        return cached

    def im_sub(self, x: Grade, a: Grade) -> Submodule:
        """Image of f(x <= a) as a submodule of f_a; the full module when x >= a."""
        key = (x, a)
        cached = self._ims.get(key)
        if cached is None:
            if x >= a:
                cached = Submodule.full(self.ring, self.rank_at(a))
            else:
                cached = Submodule(self.rank_at(a),
                                   image_basis(self.structure_map(x, a)),
                                   _canonical=True)
            self._ims[key] = cached
        return cached

    def ik(self, a: Grade, x: Grade, y: Grade) -> Submodule:
        """Im[x, a] intersected with Ker[a, y]."""
        key = (a, x, y)
        cached = self._iks.get(key)
        if cached is None:
            cached = self.im_sub(x, a).intersect(self.ker_sub(a, y))
            self._iks[key] = cached
        return cached

    def direct_sum(self, other: "PersistenceModule") -> "PersistenceModule":
        if other.index_set != self.index_set or other.ring != self.ring:
            raise ValueError("direct sum requires matching index sets and rings")
        gs = self.grades
        ranks = [self.rank_at(g) + other.rank_at(g) for g in gs]
        steps = []
        for i in range(len(gs) - 1):
            a, b = self._steps[i], other._steps[i]
            zero = self.ring.zero
            rows = []
            for r in range(a.rows):
                rows.append(list(a.row(r)) + [zero] * b.cols)
            for r in range(b.rows):
                rows.append([zero] * a.cols + list(b.row(r)))
            steps.append(Matrix(self.ring, rows, rows=a.rows + b.rows, cols=a.cols + b.cols))
        return PersistenceModule(self.ring, self.index_set, ranks, steps)

    def map_to_ring(self, ring: Ring) -> "PersistenceModule":
        """Entry-wise pushforward of all step maps (e.g. reduction mod p)."""
        steps = [m.map_entries(ring, ring.from_int) for m in self._steps]
        return PersistenceModule(ring, self.index_set,
                                 [self.rank_at(g) for g in self.grades], steps)

    def to_json(self) -> dict:
        gs = self.grades
        return {
            "indices": list(gs),
            "ranks": [self.rank_at(g) for g in gs],
            "maps": [{"from": gs[i], "to": gs[i + 1], "matrix": self._steps[i].to_json()}
                     for i in range(len(gs) - 1)],
        }

    @classmethod
    def from_json(cls, obj: dict, ring: Ring = Z) -> "PersistenceModule":
        grades = [int(g) for g in obj["indices"]]
        ranks = [int(r) for r in obj["ranks"]]
        if len(ranks) != len(grades):
            raise ValueError("ranks and indices must have equal length")
        index_set = IndexSet(grades)
        by_pair: Dict[Tuple[int, int], Matrix] = {}
        for entry in obj.get("maps", []):
            pair = (int(entry["from"]), int(entry["to"]))
            if pair in by_pair:
                raise ValueError(f"duplicate map for {pair}")
            by_pair[pair] = Matrix.from_json(ring, entry["matrix"])
        steps = []
        for i in range(len(grades) - 1):
            pair = (grades[i], grades[i + 1])
            if pair not in by_pair:
                raise ValueError(f"missing map for consecutive pair {pair}")
            steps.append(by_pair.pop(pair))
        if by_pair:
            raise ValueError(f"non-consecutive map entries: {sorted(by_pair)}")
        return cls(ring, index_set, ranks, steps)

    def __repr__(self):
        ranks = [self.rank_at(g) for g in self.grades]
        return f"PersistenceModule({self.ring!r}, grades={list(self.grades)}, ranks={ranks})"


@dataclass(frozen=True)
class CriticalIndexSet:
    """Representatives realizing every kernel out of and image into a focal
    grade, with 1-based bookkeeping positions.

    k is the focal grade's position; s and t are the positions of the nearest
    members of the anchor set J strictly below and above the focal grade.
    """

    representatives: Tuple[Grade, ...]
    k: int
    s: int
    t: int

    @property
    def r(self) -> int:
        return len(self.representatives)

    def grade(self, pos: int) -> Grade:
        """Representative at a 1-based position."""
        return self.representatives[pos - 1]

    @property
    def focal(self) -> Grade:
        return self.representatives[self.k - 1]


def critical_index_set(f: PersistenceModule, a: int, J: Iterable[Grade]) -> CriticalIndexSet:
    """Choose representatives for the distinct kernels out of and images into f_a.

    One representative per distinct submodule, drawn from J whenever a member
    of J realizes it (the smallest such member; smallest grade overall
    otherwise).  MIN always represents the zero image and MAX the full
    kernel, so p,q labels are total at every grade.  A kernel that is zero,
    or an image that is everything, needs no representative of its own unless
    J demands one: the focal grade itself realizes both.
    """
    jset = frozenset(J)
    if MIN not in jset or MAX not in jset:
        raise ValueError("J must contain the virtual endpoints")
    if a in jset:
        raise ValueError("focal grade must not lie in J")
    if a not in f.index_set or isinstance(a, _Endpoint):
        raise KeyError(f"focal grade {a!r} is not an actual grade")
    ext = f.index_set.extended
    reps: set[Grade] = {a}

    zero_ker = Submodule.zero(f.ring, f.rank_at(a))
    full_im = Submodule.full(f.ring, f.rank_at(a))

    groups: Dict[Submodule, List[Grade]] = {}
    for y in ext:
        if y > a:
            groups.setdefault(f.ker_sub(a, y), []).append(y)
    for sub, cands in groups.items():
        if cands[-1] is MAX:
            reps.add(MAX)
            continue
        in_j = [y for y in cands if y in jset]
        if in_j:
            reps.add(in_j[0])
        elif sub != zero_ker:
            reps.add(cands[0])

    groups = {}
    for x in ext:
        if x < a:
            groups.setdefault(f.im_sub(x, a), []).append(x)
    for sub, cands in groups.items():
        if cands[0] is MIN:
            reps.add(MIN)
            continue
        in_j = [x for x in cands if x in jset]
        if in_j:
            reps.add(in_j[0])
        elif sub != full_im:
            reps.add(cands[0])

    reps.add(MIN)
    reps.add(MAX)
    ordered = tuple(sorted(reps, key=f.index_set.position))
    k = ordered.index(a) + 1
    s = max(p + 1 for p, g in enumerate(ordered) if g in jset and g < a)
    t = min(p + 1 for p, g in enumerate(ordered) if g in jset and g > a)
    return CriticalIndexSet(ordered, k, s, t)


@dataclass(frozen=True)
class CokernelWitness:
    """A grade pair whose composite structure map has torsion cokernel."""

    source: int
    target: int
    torsion: Tuple[Scalar, ...]

    def to_json(self, ring: Ring = Z) -> dict:
        return {"from": self.source, "to": self.target,
                "torsion": [ring.to_str(t) for t in self.torsion]}


def check_free_cokernels(f: PersistenceModule) -> Optional[CokernelWitness]:
    """None if every composite structure map has free cokernel, else the
    lexicographically first failing pair.

    All grade pairs are examined, not just consecutive steps, because free
    cokernels do not compose.  Pairs whose image into the target duplicates
    one already tested are skipped; the cokernel only depends on that image.
    """
    gs = f.grades
    ring = f.ring
    seen_by_target: Dict[int, set] = {g: set() for g in gs}
    for ai, a in enumerate(gs):
        for b in gs[ai + 1:]:
            img = f.im_sub(a, b)
            seen = seen_by_target[b]
            if img in seen:
                continue
            seen.add(img)
            torsion = tuple(d for d in snf(img.basis).invariant_factors
                            if not ring.is_unit(d))
            if torsion:
                return CokernelWitness(a, b, torsion)
    return None


def _random_unimodular(ring: Ring, n: int, rng, entry_bound: int = 3,
                       shears: Optional[int] = None) -> Matrix:
    """Product of seeded elementary matrices; every factor has entries in
    [-entry_bound, entry_bound]."""
    rows = [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]
    if n == 0:
        return Matrix(ring, [], rows=0, cols=0)
    count = 2 * n if shears is None else shears
    for _ in range(count):
        op = rng.randrange(3)
        i = rng.randrange(n)
        j = rng.randrange(n)
        if op == 0 and i != j:
            c = ring.from_int(rng.randint(-entry_bound, entry_bound))
            rows[i] = [ring.add(rows[i][x], ring.mul(c, rows[j][x])) for x in range(n)]
        elif op == 1 and i != j:
            rows[i], rows[j] = rows[j], rows[i]
        elif op == 2:
            # negation keeps the determinant a unit
            rows[i] = [ring.neg(x) for x in rows[i]]
    return Matrix(ring, rows, rows=n, cols=n)


def _bar_slots(bars: Sequence[Tuple[int, Optional[int], int]],
               grades: Sequence[int]) -> Tuple[List[Tuple[int, Optional[int]]], List[List[int]]]:
    """Expand bars by multiplicity and assign per-grade slot orderings."""
    expanded: List[Tuple[int, Optional[int]]] = []
    for birth, death, mult in bars:
        if birth not in grades or (death is not None and death not in grades):
            raise ValueError(f"bar [{birth}, {death}) does not lie on the grade list")
        expanded.extend([(birth, death)] * mult)
    expanded.sort(key=lambda bd: (bd[0], bd[1] is None, bd[1] if bd[1] is not None else 0))
    per_grade = []
    for g in grades:
        per_grade.append([i for i, (b, d) in enumerate(expanded)
                          if b <= g and (d is None or g < d)])
    return expanded, per_grade


def interval_module_sum(bars: Union[Barcode, Sequence[Tuple[int, Optional[int], int]]],
                        grades: Sequence[int], ring: Ring = Z) -> PersistenceModule:
    """Direct sum of interval modules: identity on each bar, zero off it."""
    bar_list = list(bars.bars) if isinstance(bars, Barcode) else list(bars)
    gs = list(grades)
    _, per_grade = _bar_slots(bar_list, gs)
    ranks = [len(slots) for slots in per_grade]
    steps = []
    for i in range(len(gs) - 1):
        src, dst = per_grade[i], per_grade[i + 1]
        dst_pos = {bar: r for r, bar in enumerate(dst)}
        m = [[ring.zero] * len(src) for _ in range(len(dst))]
        for c, bar in enumerate(src):
            r = dst_pos.get(bar)
            if r is not None:
                m[r][c] = ring.one
        steps.append(Matrix(ring, m, rows=len(dst), cols=len(src)))
    return PersistenceModule(ring, gs, ranks, steps)


def conjugate_module(f: PersistenceModule, seed: int, entry_bound: int = 3) -> PersistenceModule:
    """Conjugate every grade by a seeded random unimodular change of basis."""
    import random

    rng = random.Random(seed)
    gs = f.grades
    us = {g: _random_unimodular(f.ring, f.rank_at(g), rng, entry_bound) for g in gs}
    from .exactla import inverse_unimodular

    steps = []
    for i in range(len(gs) - 1):
        a, b = gs[i], gs[i + 1]
        steps.append(us[b] @ f._steps[i] @ inverse_unimodular(us[a]))
    return PersistenceModule(f.ring, f.index_set, [f.rank_at(g) for g in gs], steps)


def disguise(bars: Union[Barcode, Sequence[Tuple[int, Optional[int], int]]],
             grades: Sequence[int], seed: int, ring: Ring = Z,
             entry_bound: int = 3) -> PersistenceModule:
    """A module isomorphic to the given interval sum, with its structure
    hidden by seeded unimodular basis changes at every grade."""
    return conjugate_module(interval_module_sum(bars, grades, ring), seed, entry_bound)
