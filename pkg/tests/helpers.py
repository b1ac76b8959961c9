"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's own reduction code:
invariant factors come from gcds of minors, ranks from fraction-based
Gaussian elimination, Betti numbers from the boundary-rank formula, and
matrix products from a plain integer replay.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from persdec.barcode import Barcode
from persdec.exactla import Matrix
from persdec.homology import SimplicialFiltration
from persdec.persmod import PersistenceModule, conjugate_module, interval_module_sum
from persdec.ring import Z


def random_int_matrix(rng: random.Random, rows: int, cols: int,
                      lo: int = -9, hi: int = 9) -> Matrix:
    return Matrix(Z, [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)],
                  rows=rows, cols=cols)


def plain_matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> List[List[int]]:
    """Independent integer matrix product used to replay U @ M @ V."""
    ra, ca = len(a), len(a[0]) if a else 0
    cb = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(ca)) for j in range(cb)]
            for i in range(ra)]


def minors_invariant_factors(m: Matrix) -> List[int]:
    """Invariant factors via gcds of k x k minors (independent of snf).

    d_k = gcd(all k-minors) / gcd(all (k-1)-minors); only practical for tiny
    matrices, which is exactly how the tests use it.
    """
    rows, cols = m.rows, m.cols
    ent = [[int(x) for x in row] for row in m.entries]

    def det(idx_r: Tuple[int, ...], idx_c: Tuple[int, ...]) -> int:
        k = len(idx_r)
        if k == 1:
            return ent[idx_r[0]][idx_c[0]]
        total = 0
        sign = 1
        for pos, r in enumerate(idx_r):
            sub = det(idx_r[:pos] + idx_r[pos + 1:], idx_c[1:])
            total += sign * ent[r][idx_c[0]] * sub
            sign = -sign
        return total

    factors = []
    prev = 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for idx_r in itertools.combinations(range(rows), k):
            for idx_c in itertools.combinations(range(cols), k):
                g = gcd(g, det(idx_r, idx_c))
        if g == 0:
            break
        factors.append(g // prev)
        prev = g
    return factors


def fraction_rank(m: Matrix) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    work = [[Fraction(int(x)) for x in row] for row in m.entries]
    rank = 0
    rows, cols = m.rows, m.cols
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if work[r][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = 1 / work[rank][col]
        work[rank] = [x * inv for x in work[rank]]
        for r in range(rows):
            if r != rank and work[r][col] != 0:
                factor = work[r][col]
                work[r] = [x - factor * y for x, y in zip(work[r], work[rank])]
        rank += 1
    return rank


def random_barcode_and_grades(rng: random.Random, max_bars: int = 6,
                              max_grades: int = 8) -> Tuple[Barcode, List[int]]:
    n = rng.randint(1, max_grades)
    pool = sorted(rng.sample(range(0, 64), n))
    bars = []
    for _ in range(rng.randint(0, max_bars)):
        bi = rng.randrange(n)
        birth = pool[bi]
        if bi == n - 1 or rng.random() < 0.3:
            death: Optional[int] = None
        else:
            death = pool[rng.randrange(bi + 1, n)]
        bars.append((birth, death, 1))
    return Barcode(tuple(bars)), pool


def disguised_sample(seed: int, max_bars: int = 6, max_grades: int = 8,
                     entry_bound: int = 3) -> Tuple[Barcode, PersistenceModule]:
    """Seeded (barcode, disguised module) pair."""
    rng = random.Random(seed)
    bars, grades = random_barcode_and_grades(rng, max_bars, max_grades)
    module = conjugate_module(interval_module_sum(bars, grades), seed=seed ^ 0x5EED,
                              entry_bound=entry_bound)
    return bars, module


def torsion_injected_sample(seed: int, max_bars: int = 5,
                            max_grades: int = 6) -> PersistenceModule:
    """Disguised module with one interval-sum step entry scaled by >= 2.

    Resamples until some bar crosses some step, so the scaled entry always
    creates a torsion cokernel.
    """
    rng = random.Random(seed)
    while True:
        bars, grades = random_barcode_and_grades(rng, max_bars, max_grades)
        base = interval_module_sum(bars, grades)
        live = [i for i in range(len(grades) - 1)
                if not base.step(grades[i]).is_zero()]
        if not live:
            continue
        i = rng.choice(live)
        step = base.step(grades[i])
        ones = [(r, c) for r in range(step.rows) for c in range(step.cols)
                if step.entries[r][c] == 1]
        r0, c0 = rng.choice(ones)
        rows = [list(row) for row in step.entries]
        rows[r0][c0] = rng.randint(2, 9)
        steps = [base.step(grades[j]) for j in range(len(grades) - 1)]
        steps[i] = Matrix(Z, rows, rows=step.rows, cols=step.cols)
        tampered = PersistenceModule(Z, grades,
                                     [base.rank_at(g) for g in grades], steps)
        return conjugate_module(tampered, seed=seed ^ 0x70C5)


def random_filtration(rng: random.Random, max_vertices: int = 8,
                      max_grades: int = 4, edge_p: float = 0.45,
                      tri_p: float = 0.4) -> SimplicialFiltration:
    """Random face-closed filtration on a few vertices and grades."""
    nv = rng.randint(3, max_vertices)
    ng = rng.randint(1, max_grades)
    grades = list(range(1, ng + 1))
    entries = []
    vgrade = {}
    for v in range(nv):
        vgrade[v] = rng.choice(grades)
        entries.append(([v], vgrade[v]))
    egrade = {}
    for u, v in itertools.combinations(range(nv), 2):
        if rng.random() < edge_p:
            lo = max(vgrade[u], vgrade[v])
            egrade[(u, v)] = rng.choice([g for g in grades if g >= lo])
            entries.append(([u, v], egrade[(u, v)]))
    for a, b, c in itertools.combinations(range(nv), 3):
        needed = [(a, b), (a, c), (b, c)]
        if all(e in egrade for e in needed) and rng.random() < tri_p:
            lo = max(egrade[e] for e in needed)
            entries.append(([a, b, c], rng.choice([g for g in grades if g >= lo])))
    return SimplicialFiltration(entries)


def betti_by_boundary_ranks(filtration: SimplicialFiltration, n: int, grade: int,
                            rank_fn) -> int:
    """Independent Betti number: dim C_n - rank d_n - rank d_(n+1)."""
    from persdec.homology import boundary_matrix

    d_n = boundary_matrix(filtration, n, grade)
    d_np1 = boundary_matrix(filtration, n + 1, grade)
    return d_n.cols - rank_fn(d_n) - rank_fn(d_np1)


def mobius_filtration() -> SimplicialFiltration:
    """Minimal Mobius triangulation (5 vertices, triangles {i, i+1, i+2} mod 5)
    filtered by its boundary pentagon: boundary circle at grade 1, the rest
    at grade 2."""
    entries = []
    for v in range(5):
        entries.append(([v], 1))
    for i in range(5):
        entries.append((sorted((i, (i + 2) % 5)), 1))
    for i in range(5):
        entries.append((sorted((i, (i + 1) % 5)), 2))
    for i in range(5):
        entries.append((sorted((i, (i + 1) % 5, (i + 2) % 5)), 2))
    return SimplicialFiltration(entries)


RP2_FACES = [(1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 6), (1, 5, 6),
             (2, 3, 6), (2, 4, 5), (2, 5, 6), (3, 4, 5), (3, 4, 6)]


def rp2_filtration(grade: int = 1) -> SimplicialFiltration:
    """Six-vertex projective plane, all at one grade (torsion H_1)."""
    entries = []
    vertices = sorted(set(itertools.chain.from_iterable(RP2_FACES)))
    for v in vertices:
        entries.append(([v], grade))
    edges = sorted({tuple(sorted(e)) for f in RP2_FACES
                    for e in itertools.combinations(f, 2)})
    for e in edges:
        entries.append((list(e), grade))
    for f in RP2_FACES:
        entries.append((sorted(f), grade))
    return SimplicialFiltration(entries)


def circle_filtration() -> SimplicialFiltration:
    """Triangle-boundary circle, all at grade 1."""
    return SimplicialFiltration(
        [([0], 1), ([1], 1), ([2], 1), ([0, 1], 1), ([0, 2], 1), ([1, 2], 1)])
