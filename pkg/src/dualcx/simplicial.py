"""Semi-simplicial and triangulated sets, stored by facets and attachments.

Encoding
--------
A *semi-simplicial set* keeps, per dimension ``n``, a dense list of simplex
ids and, for ``n >= 1``, a face tuple ``faces[n][i] = (f_0, ..., f_n)``
where ``f_k`` is the id of the ``k``-th face one dimension down.

A *triangulated set* drops the chosen vertex orderings and keeps one
*reduced facet* per symmetry orbit.  An ``n``-facet has ``n + 1`` *slots*
(vertex positions).  For every slot ``k`` the attachment
``attach[n][i][k] = (g, inj)`` names the reduced ``(n-1)``-facet ``g``
obtained by deleting that slot, together with the injection ``inj`` of the
remaining slots into the slots of ``g`` (``inj`` is a tuple of length
``n + 1`` whose ``k``-th entry is ``None``).  Validation checks that
deleting two slots in either order reaches the same facet with the same
composite injection; that coherence is exactly what makes iterated faces
well defined.

In this orbit encoding the symmetric-group action on decorated facets
(facet, ordering of its slots) is free by construction, so the free-action
requirement of the functor definition needs no further data.  Note that
cyclically symmetric attachment patterns are legitimate: the triangle whose
three sides are glued to one edge in a rotating pattern is a valid
triangulated set even though a slot 3-cycle preserves its attachments.

Ids are dense integers per dimension and serialization sorts everything,
so equal files mean equal complexes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, permutations

from .errors import ValidationError

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# semi-simplicial sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SemiSimplicialSet:
    """Finite semi-simplicial set.

    ``num_vertices`` counts the 0-simplices; ``faces[d]`` (d starting at 1)
    lists, for each d-simplex, the tuple of its d+1 face ids.
    """

    num_vertices: int
    faces: tuple[tuple[tuple[int, ...], ...], ...]

    # -- structure ----------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.faces)

    def count(self, dim: int) -> int:
        if dim == 0:
            return self.num_vertices
        if 1 <= dim <= self.dimension:
            return len(self.faces[dim - 1])
        return 0

    def counts(self) -> tuple[int, ...]:
        return tuple(self.count(d) for d in range(self.dimension + 1))

    def face(self, dim: int, idx: int, k: int) -> int:
        return self.faces[dim - 1][idx][k]

    def validate(self) -> None:
        """Check id ranges and the identities d_i d_j = d_{j-1} d_i (i < j)."""
        if self.num_vertices < 0:
            raise ValidationError("negative vertex count")
        for d in range(1, self.dimension + 1):
            below = self.count(d - 1)
            for i, fs in enumerate(self.faces[d - 1]):
                if len(fs) != d + 1:
                    raise ValidationError(f"simplex ({d},{i}) has {len(fs)} faces, wants {d + 1}")
                for f in fs:
                    if not (0 <= f < below):
                        raise ValidationError(f"simplex ({d},{i}) references missing face {f}")
        for d in range(2, self.dimension + 1):
            for i in range(self.count(d)):
                for j in range(d + 1):
                    for k in range(j):
                        # d_k d_j = d_{j-1} d_k for k < j
                        a = self.face(d - 1, self.face(d, i, j), k)
                        b = self.face(d - 1, self.face(d, i, k), j - 1)
                        if a != b:
                            raise ValidationError(f"semi-simplicial identity fails at ({d},{i}), k={k}, j={j}")

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.count(d) for d in range(self.dimension + 1))

    def to_json_dict(self) -> dict:
        return {
            "kind": "ssset",
            "schema": SCHEMA_VERSION,
            "dims": list(self.counts()),
            "faces": [[list(f) for f in level] for level in self.faces],
        }


# ---------------------------------------------------------------------------
# triangulated sets
# ---------------------------------------------------------------------------


Attachment = tuple[int, tuple]  # (target id, injection tuple with None at the deleted slot)


@dataclass(frozen=True)
class TriangulatedSet:
    """Finite triangulated set in the reduced-facet encoding.

    ``num_vertices`` counts reduced 0-facets; ``attach[d]`` (d from 1)
    lists, per reduced d-facet, one attachment per slot.
    """

    num_vertices: int
    attach: tuple[tuple[tuple[Attachment, ...], ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.attach)

    def count(self, dim: int) -> int:
        if dim == 0:
            return self.num_vertices
        if 1 <= dim <= self.dimension:
            return len(self.attach[dim - 1])
        return 0

    def counts(self) -> tuple[int, ...]:
        return tuple(self.count(d) for d in range(self.dimension + 1))

    def attachment(self, dim: int, idx: int, slot: int) -> Attachment:
        return self.attach[dim - 1][idx][slot]

    # -- iterated faces -------------------------------------------------------

    def delete_slots(self, dim: int, idx: int, slots: frozenset[int]) -> tuple[int, int, dict[int, int]]:
        """Delete a set of slots; returns (target dim, target id, slot map).

        The slot map sends each surviving slot of the source facet to the
        corresponding slot of the target facet.  Well defined by coherence,
        whichever order the slots are removed in.
        """
        if not slots:
            return dim, idx, {s: s for s in range(dim + 1)}
        s = max(slots)
        g, inj = self.attachment(dim, idx, s)
        mapped = frozenset(inj[t] for t in slots if t != s)
        tdim, tidx, tmap = self.delete_slots(dim - 1, g, mapped)
        out = {k: tmap[inj[k]] for k in range(dim + 1) if k not in slots}
        return tdim, tidx, out

    def iterated_faces(self, dim: int, idx: int) -> dict[frozenset[int], tuple[int, int]]:
        """All faces of one facet, indexed by the deleted slot subset."""
        out: dict[frozenset[int], tuple[int, int]] = {frozenset(): (dim, idx)}
        for size in range(1, dim + 1):
            for subset in combinations(range(dim + 1), size):
                fs = frozenset(subset)
                d, i, _ = self.delete_slots(dim, idx, fs)
                out[fs] = (d, i)
        return out

    def face_closure(self, dim: int, idx: int) -> set[tuple[int, int]]:
        """Set of (dim, id) of all iterated faces, the facet included."""
        return set(self.iterated_faces(dim, idx).values())

    # -- validation -----------------------------------------------------------

    def validate(self) -> None:
        """Referential integrity, injectivity, and two-step coherence."""
        if self.num_vertices < 0:
            raise ValidationError("negative vertex count")
        for d in range(1, self.dimension + 1):
            below = self.count(d - 1)
            for i, atts in enumerate(self.attach[d - 1]):
                if len(atts) != d + 1:
                    raise ValidationError(f"facet ({d},{i}) has {len(atts)} slots, wants {d + 1}")
                for k, (g, inj) in enumerate(atts):
                    if not (0 <= g < below):
                        raise ValidationError(f"facet ({d},{i}) slot {k} references missing target {g}")
                    if len(inj) != d + 1 or inj[k] is not None:
                        raise ValidationError(f"facet ({d},{i}) slot {k} has malformed injection")
                    values = [inj[j] for j in range(d + 1) if j != k]
                    if sorted(values) != list(range(d)):
                        raise ValidationError(f"facet ({d},{i}) slot {k} injection is not bijective onto target slots")
        for d in range(2, self.dimension + 1):
            for i in range(self.count(d)):
                for j in range(d + 1):
                    for k in range(d + 1):
                        if j == k:
                            continue
                        g1, inj1 = self.attachment(d, i, j)
                        h1, kap1 = self.attachment(d - 1, g1, inj1[k])
                        g2, inj2 = self.attachment(d, i, k)
                        h2, kap2 = self.attachment(d - 1, g2, inj2[j])
                        if h1 != h2:
                            raise ValidationError(f"coherence: facet ({d},{i}) slots {j},{k} reach different facets")
                        for l in range(d + 1):
                            if l in (j, k):
                                continue
                            if kap1[inj1[l]] != kap2[inj2[l]]:
                                raise ValidationError(
                                    f"coherence: facet ({d},{i}) slots {j},{k} disagree on slot {l}"
                                )

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.count(d) for d in range(self.dimension + 1))

    def to_json_dict(self) -> dict:
        return {
            "kind": "tset",
            "schema": SCHEMA_VERSION,
            "dims": list(self.counts()),
            "attach": [
                [[[g, [(-1 if v is None else v) for v in inj]] for g, inj in atts] for atts in level]
                for level in self.attach
            ],
        }


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def make_duncehat() -> SemiSimplicialSet:
    """One vertex, one edge, one triangle; every triangle face is the edge.

    The realization identifies the boundary of the triangle with the single
    edge three times, one of the passes reversed: the classical dunce hat,
    contractible but with no free face.
    """
    return SemiSimplicialSet(num_vertices=1, faces=(((0, 0),), ((0, 0, 0),)))


def make_single_2_simplex() -> SemiSimplicialSet:
    """A triangle with three distinct vertices and three distinct edges."""
    # edges: 0 = [12], 1 = [02], 2 = [01]; triangle faces (d0, d1, d2)
    return SemiSimplicialSet(
        num_vertices=3,
        faces=(((2, 1), (2, 0), (1, 0)), ((0, 1, 2),)),
    )


def make_tetrahedron_boundary() -> SemiSimplicialSet:
    """Boundary of the 3-simplex: the triangulated 2-sphere."""
    verts = list(range(4))
    edges = list(combinations(verts, 2))
    edge_id = {e: i for i, e in enumerate(edges)}
    tris = list(combinations(verts, 3))
    edge_faces = []
    for a, b in edges:
        edge_faces.append((b, a))  # d0 deletes the first vertex
    tri_faces = []
    for tri in tris:
        fs = []
        for k in range(3):
            rest = tuple(v for i, v in enumerate(tri) if i != k)
            fs.append(edge_id[rest])
        tri_faces.append(tuple(fs))
    return SemiSimplicialSet(num_vertices=4, faces=(tuple(edge_faces), tuple(tri_faces)))


def make_cycle_graph(n: int = 3) -> SemiSimplicialSet:
    """Cycle with n vertices and n edges (a circle)."""
    if n < 1:
        raise ValidationError("cycle needs at least one vertex")
    edges = tuple(((i + 1) % n, i) for i in range(n))  # edge i runs i -> i+1
    return SemiSimplicialSet(num_vertices=n, faces=(edges,))


def make_cyclic_triangle() -> TriangulatedSet:
    """One triangle whose three sides are glued to one edge cyclically.

    The side pattern is [01], [12], [20]: each side maps onto the edge with
    the rotation carrying slot i+1 to slot i.  This space has fundamental
    group of order three, and it is the standard example of a triangulated
    set that lifts to no semi-simplicial set.
    """
    edge_attach = (((0, (None, 0)), (0, (0, None))),)
    tri_attach = (
        (
            (0, (None, 0, 1)),  # delete slot 0: side [12] -> edge as (1,2) -> (0,1)
            (0, (1, None, 0)),  # delete slot 1: side [20] -> edge as (2,0) -> (0,1)
            (0, (0, 1, None)),  # delete slot 2: side [01] -> edge as (0,1) -> (0,1)
        ),
    )
    return TriangulatedSet(num_vertices=1, attach=(edge_attach, tri_attach))


# ---------------------------------------------------------------------------
# the functors between the two categories
# ---------------------------------------------------------------------------


def functor_p(s: SemiSimplicialSet) -> TriangulatedSet:
    """Forget the chosen orderings: simplices become reduced facets.

    Decorated facets of the result are pairs (simplex, ordering), on which
    the symmetric groups act freely; in the reduced encoding the slots are
    the vertex positions and each attachment is the order-collapsing
    injection induced by the face map.
    """
    s.validate()
    levels = []
    for d in range(1, s.dimension + 1):
        facets = []
        for fs in s.faces[d - 1]:
            atts = []
            for k in range(d + 1):
                inj = tuple(None if j == k else (j if j < k else j - 1) for j in range(d + 1))
                atts.append((fs[k], inj))
            facets.append(tuple(atts))
        levels.append(tuple(facets))
    t = TriangulatedSet(num_vertices=s.num_vertices, attach=tuple(levels))
    t.validate()
    return t


def functor_q(t: TriangulatedSet) -> SemiSimplicialSet:
    """Flag complex: simplices are chains of reduced facets under the face order.

    The face order puts a < b when a is an iterated face of b.  Chains are
    sets of reduced facets (no incidence multiplicity), so the result is
    only homotopy-faithful for simple inputs; homology of non-simple
    complexes is computed directly on the facets, never through this
    functor.
    """
    t.validate()
    nodes: list[tuple[int, int]] = []
    for d in range(t.dimension + 1):
        nodes += [(d, i) for i in range(t.count(d))]
    node_id = {nd: k for k, nd in enumerate(nodes)}
    below: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for d, i in nodes:
        below[(d, i)] = t.face_closure(d, i) - {(d, i)}

    chains_by_len: list[list[tuple[int, ...]]] = [[(node_id[nd],) for nd in nodes]]
    id_by_chain: list[dict[tuple[int, ...], int]] = [{c: k for k, c in enumerate(chains_by_len[0])}]
    while True:
        prev = chains_by_len[-1]
        nxt = []
        for chain in prev:
            top = nodes[chain[-1]]
            for nd in nodes:
                if top in below[nd]:
                    nxt.append(chain + (node_id[nd],))
        if not nxt:
            break
        nxt = sorted(set(nxt))
        chains_by_len.append(nxt)
        id_by_chain.append({c: k for k, c in enumerate(nxt)})

    levels = []
    for ln in range(1, len(chains_by_len)):
        face_tuples = []
        for chain in chains_by_len[ln]:
            fs = []
            for k in range(ln + 1):
                sub = chain[:k] + chain[k + 1 :]
                fs.append(id_by_chain[ln - 1][sub])
            face_tuples.append(tuple(fs))
        levels.append(tuple(face_tuples))
    out = SemiSimplicialSet(num_vertices=len(chains_by_len[0]), faces=tuple(levels))
    out.validate()
    return out


def has_semisimplicial_lift(t: TriangulatedSet) -> bool:
    """Whether the triangulated set is isomorphic to p(S) for some S.

    Equivalent to choosing one ordering of the slots of every reduced facet
    so that every attachment is order preserving.  Searched exhaustively;
    intended for desk-scale complexes.
    """
    t.validate()
    facets = [(d, i) for d in range(t.dimension + 1) for i in range(t.count(d))]
    orders: dict[tuple[int, int], tuple[int, ...]] = {}

    def consistent(d: int, i: int) -> bool:
        if d == 0:
            return True
        order = orders[(d, i)]
        for k in range(d + 1):
            g, inj = t.attachment(d, i, k)
            if (d - 1, g) not in orders:
                continue
            induced = tuple(inj[j] for j in order if j != k)
            if induced != orders[(d - 1, g)]:
                return False
        return True

    def search(pos: int) -> bool:
        if pos == len(facets):
            return True
        d, i = facets[pos]
        for perm in permutations(range(d + 1)):
            orders[(d, i)] = perm
            if consistent(d, i) and all(
                consistent(dd, ii) for (dd, ii) in facets[:pos] if dd == d + 1
            ):
                if search(pos + 1):
                    return True
        del orders[(d, i)]
        return False

    return search(0)


# ---------------------------------------------------------------------------
# simplicity predicates
# ---------------------------------------------------------------------------


def _as_tset(x) -> TriangulatedSet:
    return x if isinstance(x, TriangulatedSet) else functor_p(x)


def is_simple(x) -> bool:
    """No facet has coinciding faces of any codimension."""
    t = _as_tset(x)
    t.validate()
    for d in range(1, t.dimension + 1):
        for i in range(t.count(d)):
            faces = t.iterated_faces(d, i)
            by_size: dict[int, list[tuple[int, int]]] = {}
            for subset, tgt in faces.items():
                if subset:
                    by_size.setdefault(len(subset), []).append(tgt)
            for _, tgts in by_size.items():
                if len(set(tgts)) != len(tgts):
                    return False
    return True


def is_strictly_simple(x) -> bool:
    """Any two facets meet in nothing or share a unique maximal common face."""
    t = _as_tset(x)
    if not is_simple(t):
        return False
    facets = [(d, i) for d in range(t.dimension + 1) for i in range(t.count(d))]
    closures = {f: t.face_closure(*f) for f in facets}
    for a, b in combinations(facets, 2):
        common = closures[a] & closures[b]
        if not common:
            continue
        if not any(common <= closures[m] for m in common):
            return False
    return True


# ---------------------------------------------------------------------------
# isomorphism testing (backtracking)
# ---------------------------------------------------------------------------


def isomorphic(t1: TriangulatedSet, t2: TriangulatedSet) -> bool:
    """Exact isomorphism of triangulated sets, by backtracking search.

    An isomorphism is a dimension-preserving bijection of reduced facets
    plus a slot bijection per facet commuting with all attachments.
    Intended for the small complexes this library manipulates.
    """
    t1.validate()
    t2.validate()
    if t1.counts() != t2.counts():
        return False
    dims = t1.dimension

    facet_map: dict[tuple[int, int], tuple[int, tuple[int, ...]]] = {}

    def attach_ok(d: int, i: int) -> bool:
        if d == 0:
            return True
        img, perm = facet_map[(d, i)]
        for k in range(d + 1):
            g, inj = t1.attachment(d, i, k)
            if (d - 1, g) not in facet_map:
                continue
            g_img, g_perm = facet_map[(d - 1, g)]
            g2, inj2 = t2.attachment(d, img, perm[k])
            if g2 != g_img:
                return False
            for j in range(d + 1):
                if j == k:
                    continue
                if inj2[perm[j]] != g_perm[inj[j]]:
                    return False
        return True

    order = [(d, i) for d in range(dims + 1) for i in range(t1.count(d))]

    def search(pos: int, used: list[set[int]]) -> bool:
        if pos == len(order):
            return True
        d, i = order[pos]
        for img in range(t2.count(d)):
            if img in used[d]:
                continue
            for perm in permutations(range(d + 1)):
                facet_map[(d, i)] = (img, perm)
                ok = attach_ok(d, i) and all(
                    attach_ok(dd, ii) for (dd, ii) in order[:pos] if dd == d + 1
                )
                if ok:
                    used[d].add(img)
                    if search(pos + 1, used):
                        return True
                    used[d].discard(img)
                del facet_map[(d, i)]
        return False

    return search(0, [set() for _ in range(dims + 1)])


# ---------------------------------------------------------------------------
# serialization and builtins
# ---------------------------------------------------------------------------


def complex_to_json(x) -> str:
    return json.dumps(x.to_json_dict(), sort_keys=True, indent=1)


def complex_from_json_dict(data: dict):
    if data.get("schema") != SCHEMA_VERSION:
        raise ValidationError("unsupported complex schema")
    if data.get("kind") == "ssset":
        faces = tuple(tuple(tuple(f) for f in level) for level in data["faces"])
        out = SemiSimplicialSet(num_vertices=data["dims"][0] if data["dims"] else 0, faces=faces)
    elif data.get("kind") == "tset":
        attach = tuple(
            tuple(
                tuple((g, tuple(None if v == -1 else v for v in inj)) for g, inj in atts)
                for atts in level
            )
            for level in data["attach"]
        )
        out = TriangulatedSet(num_vertices=data["dims"][0] if data["dims"] else 0, attach=attach)
    else:
        raise ValidationError("unknown complex kind")
    out.validate()
    return out


def complex_from_json(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from exc
    return complex_from_json_dict(data)


BUILTIN_COMPLEXES = {
    "duncehat": make_duncehat,
    "cyclic-triangle": make_cyclic_triangle,
    "tetrahedron-boundary": make_tetrahedron_boundary,
    "single-2-simplex": make_single_2_simplex,
    "circle": make_cycle_graph,
}


def builtin_complex(name: str):
    try:
        return BUILTIN_COMPLEXES[name]()
    except KeyError:
        raise ValidationError(f"unknown builtin complex {name!r}; have {sorted(BUILTIN_COMPLEXES)}")
