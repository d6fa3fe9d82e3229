"""Integer homology, collapsibility, and fundamental-group machinery.

Everything here works on the facet encodings of :mod:`dualcx.simplicial`.
Semi-simplicial input is converted through ``functor_p`` first; that keeps
the facet lists, attachments, chain complexes and incidence counts literally
identical, so no result depends on which encoding the caller holds.

Boundary maps of triangulated sets are computed directly on reduced facets
with permutation-parity signs against the stored slot order.  This is the
correctness-critical path: the flag functor is only homotopy-faithful for
simple complexes, so homology never goes through it.

All integer linear algebra is exact (Python integers, Smith normal form).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import BudgetError, ValidationError
from .simplicial import SemiSimplicialSet, TriangulatedSet, functor_p

MAX_HOMOLOGY_DIM = 4


def _as_tset(x) -> TriangulatedSet:
    if isinstance(x, TriangulatedSet):
        return x
    if isinstance(x, SemiSimplicialSet):
        return functor_p(x)
    raise ValidationError(f"expected a complex, got {type(x).__name__}")


# ---------------------------------------------------------------------------
# exact integer linear algebra
# ---------------------------------------------------------------------------


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s a + t b = g = gcd(a, b), g > 0 for (a, b) != (0, 0)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def smith_normal_form(matrix) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form over the integers: returns (D, U, V), U M V = D.

    D is diagonal with d_i | d_{i+1} and d_i >= 0; U and V are unimodular.
    Elimination uses 2x2 Bezout blocks (one shot per entry, determinant
    one), which terminates with moderate coefficient growth; arithmetic is
    exact arbitrary-precision throughout.
    """
    A = [[int(x) for x in row] for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def clear_row_entry(t: int, i: int):
        """Zero A[i][t] against the pivot by a unimodular row operation.

        Exact multiples eliminate plainly (the pivot row is untouched);
        otherwise a 2x2 Bezout block runs, which strictly shrinks the
        pivot to the gcd.  Euclid's coefficients are not used in the exact
        case on purpose: for divisible pairs they can return a mixing
        block (s = 0) that would undo previous clearing forever.
        """
        a, b = A[t][t], A[i][t]
        if b == 0:
            return
        if a == 0:
            A[t], A[i] = A[i], A[t]
            U[t], U[i] = U[i], U[t]
            return
        if b % a == 0:
            q = b // a
            A[i] = [y - q * x for x, y in zip(A[t], A[i])]
            U[i] = [y - q * x for x, y in zip(U[t], U[i])]
            return
        g, s, tt = _extended_gcd(a, b)
        af, bf = a // g, b // g
        row_t = [s * x + tt * y for x, y in zip(A[t], A[i])]
        row_i = [-bf * x + af * y for x, y in zip(A[t], A[i])]
        A[t], A[i] = row_t, row_i
        u_t = [s * x + tt * y for x, y in zip(U[t], U[i])]
        u_i = [-bf * x + af * y for x, y in zip(U[t], U[i])]
        U[t], U[i] = u_t, u_i

    def clear_col_entry(t: int, j: int):
        a, b = A[t][t], A[t][j]
        if b == 0:
            return
        if a == 0:
            for r in range(m):
                A[r][t], A[r][j] = A[r][j], A[r][t]
            for r in range(n):
                V[r][t], V[r][j] = V[r][j], V[r][t]
            return
        if b % a == 0:
            q = b // a
            for r in range(m):
                A[r][j] -= q * A[r][t]
            for r in range(n):
                V[r][j] -= q * V[r][t]
            return
        g, s, tt = _extended_gcd(a, b)
        af, bf = a // g, b // g
        for r in range(m):
            x, y = A[r][t], A[r][j]
            A[r][t], A[r][j] = s * x + tt * y, -bf * x + af * y
        for r in range(n):
            x, y = V[r][t], V[r][j]
            V[r][t], V[r][j] = s * x + tt * y, -bf * x + af * y

    t = 0
    while t < min(m, n):
        # move some nonzero entry of the trailing block to the pivot seat
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0:
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        if pivot[0] != t:
            A[t], A[pivot[0]] = A[pivot[0]], A[t]
            U[t], U[pivot[0]] = U[pivot[0]], U[t]
        if pivot[1] != t:
            for r in range(m):
                A[r][t], A[r][pivot[1]] = A[r][pivot[1]], A[r][t]
            for r in range(n):
                V[r][t], V[r][pivot[1]] = V[r][pivot[1]], V[r][t]
        # alternate row and column clearing; the pivot gcd-decreases, and
        # once it stabilizes one exact pass leaves both clear
        while True:
            for i in range(t + 1, m):
                clear_row_entry(t, i)
            if all(A[t][j] == 0 for j in range(t + 1, n)):
                break
            for j in range(t + 1, n):
                clear_col_entry(t, j)
            if all(A[i][t] == 0 for i in range(t + 1, m)):
                break
        # divisibility: fold a non-multiple entry into the pivot row, redo
        retry = False
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t] != 0:
                    A[t] = [x + y for x, y in zip(A[t], A[i])]
                    U[t] = [x + y for x, y in zip(U[t], U[i])]
                    retry = True
                    break
            if retry:
                break
        if not retry:
            t += 1

    for i in range(min(m, n)):
        if A[i][i] < 0:
            A[i] = [-x for x in A[i]]
            U[i] = [-x for x in U[i]]
    return A, U, V


def _mat_mul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def integer_det(matrix) -> int:
    """Exact determinant by fraction-free elimination."""
    a = [[Fraction(int(x)) for x in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / inv
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    assert det.denominator == 1
    return int(det)


def lattice_span_index(vectors) -> int:
    """Index of the sublattice spanned by integer vectors; 0 if rank-deficient.

    The index is the product of the elementary divisors of the stacked
    matrix, i.e. the absolute determinant when the matrix is square of full
    rank.
    """
    rows = [list(map(int, v)) for v in vectors]
    if not rows:
        raise ValidationError("lattice_span_index needs at least one vector")
    n = len(rows[0])
    D, _, _ = smith_normal_form(rows)
    divisors = [D[i][i] for i in range(min(len(rows), n))]
    if len([d for d in divisors if d != 0]) < n:
        return 0
    idx = 1
    for d in divisors[:n]:
        idx *= d
    return idx


# ---------------------------------------------------------------------------
# chain complexes and homology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegerChainComplex:
    """Ranks and integer boundary matrices; boundaries[n] maps degree n to n-1.

    boundaries[0] is the empty map out of degree 0.  The square-zero
    identity is asserted at construction time.
    """

    ranks: tuple[int, ...]
    boundaries: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        for n in range(1, len(self.ranks)):
            mat = self.boundaries[n]
            if len(mat) != self.ranks[n - 1] or any(len(r) != self.ranks[n] for r in mat):
                raise ValidationError(f"boundary {n} has wrong shape")
        for n in range(2, len(self.ranks)):
            a = [list(r) for r in self.boundaries[n - 1]]
            b = [list(r) for r in self.boundaries[n]]
            if a and b and a[0]:
                prod = _mat_mul(a, b)
                if any(any(x != 0 for x in row) for row in prod):
                    raise ValidationError(f"boundary squared is nonzero in degree {n}")

    def boundary_matrix(self, n: int) -> list[list[int]]:
        if n <= 0 or n >= len(self.ranks):
            return [[0] * (self.ranks[n] if 0 <= n < len(self.ranks) else 0) for _ in range(0)]
        return [list(r) for r in self.boundaries[n]]


def _injection_parity(inj: tuple, deleted: int, dim: int) -> int:
    """Sign of the injection as a permutation of the target slot order."""
    images = [inj[j] for j in range(dim + 1) if j != deleted]
    sign = 1
    seen = list(images)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def chain_complex(x) -> IntegerChainComplex:
    """Cellular chain complex on reduced facets.

    For a facet f with slots 0..n, the boundary is
    ``sum_k (-1)^k sign(inj_k) [target_k]`` where ``sign`` compares the
    attachment injection against the target's stored slot order.  For
    complexes coming from semi-simplicial sets every injection is order
    preserving and this reduces to the alternating face sum.
    """
    t = _as_tset(x)
    t.validate()
    if t.dimension > MAX_HOMOLOGY_DIM:
        raise ValidationError(f"homology supported up to dimension {MAX_HOMOLOGY_DIM}")
    ranks = t.counts()
    boundaries: list[tuple[tuple[int, ...], ...]] = [tuple()]
    for n in range(1, t.dimension + 1):
        rows = [[0] * ranks[n] for _ in range(ranks[n - 1])]
        for i in range(ranks[n]):
            for k in range(n + 1):
                g, inj = t.attachment(n, i, k)
                rows[g][i] += (-1) ** k * _injection_parity(inj, k, n)
        boundaries.append(tuple(tuple(r) for r in rows))
    return IntegerChainComplex(ranks=tuple(ranks), boundaries=tuple(boundaries))


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...]

    def is_trivial(self) -> bool:
        return self.betti == 0 and not self.torsion

    def __str__(self) -> str:
        parts = ["Z"] * self.betti + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def _matrix_rank_and_divisors(mat) -> tuple[int, list[int]]:
    if not mat or not mat[0]:
        return 0, []
    D, _, _ = smith_normal_form(mat)
    divisors = [D[i][i] for i in range(min(len(D), len(D[0]))) if D[i][i] != 0]
    return len(divisors), divisors


def homology(x, reduced: bool = False) -> list[HomologyGroup]:
    """Integer homology in all degrees, via Smith normal form."""
    cc = chain_complex(x)
    out = []
    for n in range(len(cc.ranks)):
        rank_n = cc.ranks[n]
        if n == 0:
            rank_dn = 0
        else:
            rank_dn, _ = _matrix_rank_and_divisors(cc.boundary_matrix(n))
        if n + 1 < len(cc.ranks):
            rank_dn1, divs = _matrix_rank_and_divisors(cc.boundary_matrix(n + 1))
        else:
            rank_dn1, divs = 0, []
        betti = rank_n - rank_dn - rank_dn1
        torsion = tuple(d for d in divs if d > 1)
        out.append(HomologyGroup(betti, torsion))
    if reduced and out:
        out[0] = HomologyGroup(out[0].betti - 1, out[0].torsion)
    return out


def euler_characteristic(x) -> int:
    return _as_tset(x).euler_characteristic()


# ---------------------------------------------------------------------------
# free faces and collapsibility
# ---------------------------------------------------------------------------


def _coface_paths(t: TriangulatedSet) -> dict[tuple[int, int], dict[tuple[int, int], int]]:
    """paths[h][g] = number of slot subsets of facet h whose face is g."""
    paths: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
    for d in range(1, t.dimension + 1):
        for i in range(t.count(d)):
            counts: dict[tuple[int, int], int] = {}
            for size in range(1, d + 1):
                for subset in combinations(range(d + 1), size):
                    tgt = t.delete_slots(d, i, frozenset(subset))[:2]
                    counts[tgt] = counts.get(tgt, 0) + 1
            paths[(d, i)] = counts
    return paths


def free_faces(x, alive: frozenset | None = None) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All (face, unique coface) pairs, incidence counted with multiplicity.

    A facet g is free when the total number of ways any other facet runs
    over g is exactly one; the unique incidence is then through a facet one
    dimension up.  The dunce hat edge sits three times inside its one
    triangle, so it is not free.
    """
    t = _as_tset(x)
    t.validate()
    paths = _coface_paths(t)
    cells = [(d, i) for d in range(t.dimension + 1) for i in range(t.count(d))]
    if alive is None:
        alive = frozenset(cells)
    out = []
    for g in sorted(alive):
        total = 0
        witness = None
        for h in alive:
            if h == g:
                continue
            c = paths.get(h, {}).get(g, 0)
            total += c
            if c:
                witness = h
            if total > 1:
                break
        if total == 1 and witness is not None and witness[0] == g[0] + 1:
            out.append((g, witness))
    return out


@dataclass(frozen=True)
class CollapseResult:
    """Outcome of the exhaustive collapse search.

    status is 'collapsible', 'non_collapsible', or 'inconclusive';
    ``certificate`` is the ordered list of removed (free face, coface)
    pairs when status is 'collapsible'.  'non_collapsible' is only
    reported when the whole search space was enumerated within budget.
    """

    status: str
    certificate: tuple | None
    states_explored: int
    exhausted: bool


def is_collapsible(x, budget: int = 100_000) -> CollapseResult:
    """Backtracking search over all collapse sequences with memoization.

    States are the surviving cell subsets, which is an exact canonical form
    for this search.  Free pairs are tried in lexicographic order, so the
    first certificate found is the lexicographically least one.
    """
    if budget <= 0:
        raise BudgetError("collapse search needs a positive budget")
    t = _as_tset(x)
    t.validate()
    paths = _coface_paths(t)
    cells = [(d, i) for d in range(t.dimension + 1) for i in range(t.count(d))]
    start = frozenset(cells)

    seen: set[frozenset] = set()
    explored = 0
    over_budget = False

    def pairs_of(alive: frozenset):
        out = []
        for g in sorted(alive):
            total = 0
            witness = None
            for h in alive:
                if h == g:
                    continue
                c = paths.get(h, {}).get(g, 0)
                total += c
                if c:
                    witness = h
                if total > 1:
                    break
            if total == 1 and witness is not None and witness[0] == g[0] + 1:
                out.append((g, witness))
        return out

    def search(alive: frozenset):
        nonlocal explored, over_budget
        if len(alive) == 1 and next(iter(alive))[0] == 0:
            return []
        if alive in seen:
            return None
        seen.add(alive)
        explored += 1
        if explored > budget:
            over_budget = True
            return None
        for g, f in pairs_of(alive):
            sub = search(alive - {g, f})
            if sub is not None:
                return [(g, f)] + sub
            if over_budget:
                return None
        return None

    cert = search(start)
    if cert is not None:
        return CollapseResult("collapsible", tuple(cert), explored, exhausted=False)
    if over_budget:
        return CollapseResult("inconclusive", None, explored, exhausted=False)
    return CollapseResult("non_collapsible", None, explored, exhausted=True)


def replay_collapse(x, certificate) -> bool:
    """Re-run a collapse certificate, checking every step is legal."""
    t = _as_tset(x)
    paths = _coface_paths(t)
    alive = set((d, i) for d in range(t.dimension + 1) for i in range(t.count(d)))
    for g, f in certificate:
        g = tuple(g)
        f = tuple(f)
        if g not in alive or f not in alive:
            return False
        total = sum(paths.get(h, {}).get(g, 0) for h in alive if h != g)
        if total != 1 or paths.get(f, {}).get(g, 0) != 1 or f[0] != g[0] + 1:
            return False
        alive -= {g, f}
    return len(alive) == 1 and next(iter(alive))[0] == 0


# ---------------------------------------------------------------------------
# barycentric subdivision (true geometric one)
# ---------------------------------------------------------------------------


def barycentric_subdivision(x) -> SemiSimplicialSet:
    """Geometric barycentric subdivision of the realization.

    Every n-cell splits into (n+1)! simplices indexed by flags of slot
    subsets; pieces whose top subset is proper are identified into the
    corresponding face cell, with incidence multiplicity preserved.  The
    result is naturally semi-simplicial (vertices ordered by subset size).
    Unlike the flag functor, this is a genuine subdivision for non-simple
    complexes as well.
    """
    t = _as_tset(x)
    t.validate()

    def canon(cell):
        """Normalize (facet, chain) so the top subset is the full slot set."""
        (d, i), chain = cell
        top = chain[-1]
        if len(top) == d + 1:
            return (d, i), chain
        delete = frozenset(range(d + 1)) - top
        nd, ni, smap = t.delete_slots(d, i, delete)
        new_chain = tuple(frozenset(smap[s] for s in sub) for sub in chain)
        return canon(((nd, ni), new_chain))

    # enumerate cells: chains of strictly nested subsets ending at the full set
    max_len = t.dimension + 1
    cells_by_len: list[list] = []
    for ln in range(1, max_len + 1):
        level = []
        for d in range(t.dimension + 1):
            for i in range(t.count(d)):
                for chain in _full_chains(d + 1, ln):
                    level.append(((d, i), chain))
        cells_by_len.append(sorted(level, key=_cell_sort_key))
    index = [{c: k for k, c in enumerate(level)} for level in cells_by_len]

    levels = []
    for ln in range(2, max_len + 1):
        faces_level = []
        for cell in cells_by_len[ln - 1]:
            (d, i), chain = cell
            fs = []
            for k in range(ln):
                sub_chain = chain[:k] + chain[k + 1 :]
                sub_cell = canon(((d, i), sub_chain))
                fs.append(index[ln - 2][sub_cell])
            faces_level.append(tuple(fs))
        levels.append(tuple(faces_level))
    out = SemiSimplicialSet(num_vertices=len(cells_by_len[0]), faces=tuple(levels))
    out.validate()
    return out


def _cell_sort_key(cell):
    (d, i), chain = cell
    return (d, i, tuple(tuple(sorted(s)) for s in chain))


def _full_chains(n_slots: int, length: int):
    """Strictly nested subset chains of {0..n_slots-1} ending at the full set."""
    full = frozenset(range(n_slots))
    if length == 1:
        return [(full,)]
    out = []
    for size in range(length - 1, n_slots):
        for sub in combinations(range(n_slots), size):
            for chain in _full_chains_to(frozenset(sub), length - 1):
                out.append(chain + (full,))
    return out


def _full_chains_to(top: frozenset, length: int):
    if length == 1:
        return [(top,)]
    out = []
    for size in range(length - 1, len(top)):
        for sub in combinations(sorted(top), size):
            for chain in _full_chains_to(frozenset(sub), length - 1):
                out.append(chain + (top,))
    return out


# ---------------------------------------------------------------------------
# group presentations
# ---------------------------------------------------------------------------


def free_reduce(word: tuple[int, ...]) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(word: tuple[int, ...]) -> tuple[int, ...]:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


@dataclass(frozen=True)
class GroupPresentation:
    """Finite presentation; relators are words of nonzero generator indices.

    Generator k is the letter k+1; its inverse is -(k+1).  Relators are
    stored freely reduced.
    """

    num_generators: int
    relators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for rel in self.relators:
            for x in rel:
                if x == 0 or abs(x) > self.num_generators:
                    raise ValidationError("relator references a missing generator")
            if free_reduce(rel) != rel:
                raise ValidationError("relators must be freely reduced")

    def exponent_matrix(self) -> list[list[int]]:
        rows = []
        for rel in self.relators:
            row = [0] * self.num_generators
            for x in rel:
                row[abs(x) - 1] += 1 if x > 0 else -1
            rows.append(row)
        return rows

    def abelianization(self) -> HomologyGroup:
        if self.num_generators == 0:
            return HomologyGroup(0, ())
        rows = self.exponent_matrix()
        if not rows:
            return HomologyGroup(self.num_generators, ())
        rank, divisors = _matrix_rank_and_divisors(rows)
        return HomologyGroup(self.num_generators - rank, tuple(d for d in divisors if d > 1))


def presentation(num_generators: int, relators) -> GroupPresentation:
    return GroupPresentation(num_generators, tuple(free_reduce(tuple(r)) for r in relators))


def edge_path_presentation(x, basepoint: int = 0) -> GroupPresentation:
    """Edge-path presentation of the fundamental group of a 2-complex.

    Generators: edges off a breadth-first spanning tree (deterministic, by
    id).  Relators: boundary words of the 2-cells, read off the slot
    attachments; a side whose injection reverses the edge contributes the
    inverse letter.  Requires a connected complex.
    """
    t = _as_tset(x)
    t.validate()
    if t.dimension > 2:
        raise ValidationError("edge-path presentations are for complexes of dimension <= 2")
    nv = t.count(0)
    ne = t.count(1)
    if nv == 0:
        raise ValidationError("empty complex")

    # edge endpoints: tail = target of deleting slot 1, head = of slot 0
    tails = [t.attachment(1, e, 1)[0] for e in range(ne)]
    heads = [t.attachment(1, e, 0)[0] for e in range(ne)]

    # BFS spanning tree from the basepoint, scanning edges by id
    from collections import deque

    in_tree = [False] * ne
    visited = [False] * nv
    visited[basepoint] = True
    queue = deque([basepoint])
    while queue:
        u = queue.popleft()
        for e in range(ne):
            if in_tree[e]:
                continue
            a, b = tails[e], heads[e]
            v = b if a == u else (a if b == u else None)
            if v is not None and not visited[v]:
                in_tree[e] = True
                visited[v] = True
                queue.append(v)
    if not all(visited):
        raise ValidationError("edge-path presentation needs a connected complex")

    gen_of_edge: dict[int, int] = {}
    g = 0
    for e in range(ne):
        if not in_tree[e]:
            g += 1
            gen_of_edge[e] = g

    def letter(edge: int, forward: bool) -> tuple[int, ...]:
        if edge not in gen_of_edge:
            return ()
        k = gen_of_edge[edge]
        return (k if forward else -k,)

    relators = []
    for f in range(t.count(2)):
        word: tuple[int, ...] = ()
        # boundary path corner 0 -> 1 -> 2 -> 0; side (a,b) is the face
        # deleting the third slot, traversed from slot a to slot b
        for a, b, deleted in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            edge, inj = t.attachment(2, f, deleted)
            word = word + letter(edge, forward=(inj[a], inj[b]) == (0, 1))
        relators.append(free_reduce(word))
    return GroupPresentation(g, tuple(relators))


# ---------------------------------------------------------------------------
# Tietze simplification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TietzeResult:
    status: str                     # 'trivial' | 'inconclusive'
    moves: tuple | None             # replayable move log when trivial
    reason: str
    states_explored: int = 0


def _substitute(rel: tuple[int, ...], gen: int, value: tuple[int, ...]) -> tuple[int, ...]:
    inv = tuple(-x for x in reversed(value))
    out: list[int] = []
    for x in rel:
        if x == gen:
            out.extend(value)
        elif x == -gen:
            out.extend(inv)
        else:
            out.append(x)
    return free_reduce(tuple(out))


def _drop_generator(p: GroupPresentation, gen: int, value: tuple[int, ...]) -> GroupPresentation:
    """Substitute gen := value everywhere, then renumber generators densely."""
    rels = []
    for rel in p.relators:
        w = cyclic_reduce(_substitute(rel, gen, value))
        if w:
            rels.append(w)
    remap = {}
    k = 0
    for old in range(1, p.num_generators + 1):
        if old == gen:
            continue
        k += 1
        remap[old] = k
    rels2 = tuple(tuple((remap[x] if x > 0 else -remap[-x]) for x in rel) for rel in rels)
    return GroupPresentation(p.num_generators - 1, rels2)


def _canonical(p: GroupPresentation):
    return (p.num_generators, tuple(sorted(min(_rotations(r)) for r in p.relators if r)))


def _rotations(word: tuple[int, ...]):
    outs = []
    for w in (word, tuple(-x for x in reversed(word))):
        for k in range(max(1, len(w))):
            outs.append(w[k:] + w[:k])
    return outs


def tietze_trivialize(p: GroupPresentation, budget: int = 1_000_000) -> TietzeResult:
    """Bounded search for a Tietze trivialization certificate.

    Nontrivial abelianization short-circuits to 'inconclusive' (the group
    is then provably nontrivial, which the reason records).  Otherwise a
    shortest-first search over generator eliminations and relator
    rewritings runs until the empty presentation is reached or the budget
    is exhausted.  The move log is replayable.
    """
    if budget <= 0:
        raise BudgetError("tietze search needs a positive budget")
    ab = p.abelianization()
    if not ab.is_trivial():
        return TietzeResult("inconclusive", None, f"abelianization is {ab}, group is nontrivial")

    start = GroupPresentation(p.num_generators, tuple(cyclic_reduce(r) for r in p.relators if cyclic_reduce(r)))
    seen = set()
    explored = 0
    # priority queue on (total length, generators)
    import heapq

    heap = [(sum(map(len, start.relators)) + start.num_generators, 0, start, [])]
    counter = 1
    while heap:
        _, _, cur, moves = heapq.heappop(heap)
        key = _canonical(cur)
        if key in seen:
            continue
        seen.add(key)
        explored += 1
        if explored > budget:
            return TietzeResult("inconclusive", None, "budget exhausted", explored)
        if cur.num_generators == 0:
            return TietzeResult("trivial", tuple(moves), "reached the empty presentation", explored)

        candidates = []
        # eliminate a generator occurring exactly once in some relator
        for ri, rel in enumerate(sorted(cur.relators, key=len)):
            for gen in range(1, cur.num_generators + 1):
                occurrences = [k for k, x in enumerate(rel) if abs(x) == gen]
                if len(occurrences) == 1:
                    k = occurrences[0]
                    sign = 1 if rel[k] > 0 else -1
                    rest = rel[k + 1 :] + rel[:k]
                    value = tuple(-x for x in reversed(rest)) if sign > 0 else rest
                    nxt = _drop_generator(cur, gen, value)
                    candidates.append((nxt, ("eliminate", gen, value)))
        # shorten a relator against another
        rels = list(cur.relators)
        for i in range(len(rels)):
            for j in range(len(rels)):
                if i == j:
                    continue
                for w in (rels[j], tuple(-x for x in reversed(rels[j]))):
                    cand = cyclic_reduce(free_reduce(rels[i] + w))
                    if len(cand) < len(rels[i]):
                        new_rels = list(rels)
                        if cand:
                            new_rels[i] = cand
                        else:
                            new_rels.pop(i)
                        nxt = GroupPresentation(cur.num_generators, tuple(new_rels))
                        candidates.append((nxt, ("multiply", i, j)))
        for nxt, mv in candidates:
            k2 = _canonical(nxt)
            if k2 not in seen:
                heapq.heappush(
                    heap,
                    (sum(map(len, nxt.relators)) + nxt.num_generators, counter, nxt, moves + [mv]),
                )
                counter += 1
    return TietzeResult("inconclusive", None, "search space exhausted without certificate", explored)
