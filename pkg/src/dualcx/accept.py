"""The acceptance battery behind `dualcx reproduce` and the test suite.

Each check returns a dict with ``name``, ``passed``, and enough detail to
audit a failure.  Tolerances are pinned here, next to the claims they
guard; nothing is deferred to later calibration.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import GuardError
from .numerics import DEFAULT_TOL, Tolerances
from . import simplicial as sx
from . import topology as tp
from . import ncgeom as nc
from . import cubics as cb
from . import obstruction as ob


def _check(name: str, passed: bool, **details) -> dict:
    out = {"name": name, "passed": bool(passed)}
    out.update(details)
    return out


# --- 1: the dunce hat ------------------------------------------------------


def check_duncehat_suite(tol: Tolerances) -> dict:
    d = sx.make_duncehat()
    d.validate()
    hs = tp.homology(d, reduced=True)
    reduced_trivial = all(h.is_trivial() for h in hs)
    chi = tp.euler_characteristic(d)
    free = tp.free_faces(d)
    col = tp.is_collapsible(d, budget=10_000)
    pres = tp.edge_path_presentation(d)
    tz = tp.tietze_trivialize(pres)
    passed = (
        reduced_trivial
        and chi == 1
        and free == []
        and col.status == "non_collapsible"
        and col.exhausted
        and tz.status == "trivial"
    )
    return _check(
        "duncehat: contractible certificates, no free face, not collapsible",
        passed,
        reduced_homology=[str(h) for h in hs],
        euler=chi,
        free_faces=len(free),
        collapse_status=col.status,
        tietze=tz.status,
    )


# --- 2: the wrong case -----------------------------------------------------


def check_wrong_case(tol: Tolerances) -> dict:
    c = sx.make_cyclic_triangle()
    c.validate()
    h1 = tp.homology(c)[1]
    pres = tp.edge_path_presentation(c)
    ab = pres.abelianization()
    passed = h1.betti == 0 and h1.torsion == (3,) and ab.betti == 0 and ab.torsion == (3,)
    return _check(
        "cyclic triangle: first homology and abelianized pi1 of order three",
        passed,
        homology_1=str(h1),
        abelianization=str(ab),
    )


# --- 3: dual-complex identifications ---------------------------------------


def check_dual_complex_identifications(tol: Tolerances) -> dict:
    right = nc.dual_complex(nc.duncehat_surface_description())
    wrong = nc.dual_complex(nc.wrong_case_surface_description())
    ok_right = sx.isomorphic(right, sx.functor_p(sx.make_duncehat()))
    ok_wrong = sx.isomorphic(wrong, sx.make_cyclic_triangle())
    distinct = not sx.isomorphic(right, wrong)
    return _check(
        "dual complexes: right case is the dunce hat, wrong case the cyclic triangle",
        ok_right and ok_wrong and distinct,
        right_case=ok_right,
        wrong_case=ok_wrong,
        cases_distinct=distinct,
    )


# --- 4: degree arithmetic ---------------------------------------------------


def check_kulikov(tol: Tolerances) -> dict:
    blown_down = nc.kulikov_degree(-2, -1, 3)
    raw = nc.kulikov_degree(7, 7, 3)
    derived = nc.kulikov_degree(7 - 9, 7 - 8, 3)
    report = nc.kulikov_report(nc.duncehat_surface_description())
    passed = blown_down == 0 and raw == 17 and derived == 0 and all(r["vanishes"] for r in report)
    return _check(
        "triple-point degrees: (-2,-1,3) vanishes, raw pair gives 17",
        passed,
        blown_down=blown_down,
        raw=raw,
        from_blowdowns=derived,
        surface_report=report,
    )


# --- 5: generic fiber invariants --------------------------------------------


def check_fiber_invariants(tol: Tolerances) -> dict:
    chi = nc.generic_fiber_euler(nc.duncehat_surface_description())
    inv = nc.numerical_invariants(11, 0, 0)
    passed = chi == 11 and inv == {"h11": 9, "c1_sq": 1, "c2": 11}
    return _check(
        "generic fiber: euler characteristic 11, h11 = 9, c1^2 = 1, c2 = 11",
        passed,
        euler=chi,
        invariants=inv,
    )


# --- 6: the gluing-data torus -----------------------------------------------


def _graph_b1_oracle(graph: nc.CurveIncidenceGraph) -> int:
    """Independent first Betti number: rank of the boundary matrix over Q."""
    n_vert = graph.num_components + len(graph.point_multiplicities)
    rows = []
    for c, p in graph.edges:
        row = [Fraction(0)] * n_vert
        row[c] += 1
        row[graph.num_components + p] -= 1
        rows.append(row)
    # fraction-free Gaussian elimination for the rank
    rank = 0
    cols = list(range(n_vert))
    mat = [row[:] for row in rows]
    for col in cols:
        piv = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = mat[rank][col]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                f = mat[r][col] / inv
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
    return len(graph.edges) - rank


def _random_incidence_graph(rng: np.random.Generator) -> nc.CurveIncidenceGraph:
    k = int(rng.integers(1, 5))
    s = int(rng.integers(1, 5))
    mults = [int(rng.integers(2, 5)) for _ in range(s)]
    edges = []
    for j, m in enumerate(mults):
        for _ in range(m):
            edges.append((int(rng.integers(0, k)), j))
    return nc.CurveIncidenceGraph(k, tuple(mults), tuple(edges))


def check_pic_torus(tol: Tolerances, n_graphs: int = 50) -> dict:
    dunce_dim = nc.pic0_structure(nc.duncehat_curve_graph()).dimension
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(n_graphs):
        g = _random_incidence_graph(rng)
        torus = nc.pic0_structure(g)
        if torus.dimension != _graph_b1_oracle(g) or torus.dimension != g.betti_1():
            mismatches += 1
    passed = dunce_dim == 2 and mismatches == 0
    return _check(
        "gluing-data torus: dimension two for the triple-point curve, b1 oracle on random graphs",
        passed,
        duncehat_curve_dimension=dunce_dim,
        graphs_checked=n_graphs,
        mismatches=mismatches,
    )


# --- 7: the elementary-move lattice -----------------------------------------


def check_lattice_move(tol: Tolerances) -> dict:
    vecs = [(1, 0), (0, 1), (-1, -1)]
    D, U, V = tp.smith_normal_form([list(v) for v in vecs])
    diag = [D[i][i] for i in range(2)]
    idx = tp.lattice_span_index(vecs)
    passed = diag == [1, 1] and idx == 1
    return _check(
        "move lattice: the three loop moves span the full integer lattice",
        passed,
        smith_diagonal=diag,
        index=idx,
    )


# --- 8 and 10: consistency and mark invariance ------------------------------


def check_consistency(tol: Tolerances, quick: bool) -> tuple[dict, dict]:
    n_families = 3 if quick else 10
    size = 3 if quick else 5
    worst = 0.0
    worst_invariance = 0.0
    divisor_clean = True
    details = []
    for k in range(n_families):
        fam = ob.seeded_family(seed=100 + k, size=size, tol=tol)
        rep = ob.consistency_check(fam, tol)
        worst = max(worst, rep.deviation)
        # residual divisor orders are hard-asserted inside the pipeline; record them
        _, drep, _ = ob.direct_pipeline_data(fam[0], tol)
        divisor_clean &= drep.mark_orders == (1, 1, 1) and drep.local_orders == (1, 1, 1)
        base_lam = ob.lambda_factors(fam[0])
        base_ds = ob.scale_derivatives(fam[0].n_p)
        for member in fam[1:]:
            lam = ob.lambda_factors(member)
            ds = ob.scale_derivatives(member.n_p)
            worst_invariance = max(
                worst_invariance,
                max(abs(a - b) / abs(b) for a, b in zip(lam, base_lam)),
                max(abs(a - b) / abs(b) for a, b in zip(ds, base_ds)),
            )
        details.append({"seed": 100 + k, "deviation": rep.deviation})
    c8 = _check(
        "obstruction consistency: closed form vs direct pipeline on fixed-mark families",
        worst <= 1e-6 and divisor_clean,
        families=n_families,
        family_size=size,
        worst_deviation=worst,
        tolerance=1e-6,
        residual_divisors_exact=divisor_clean,
        per_family=details,
    )
    c10 = _check(
        "mark dependence: tangent ratios and scale derivatives fixed by (n_p, n_q)",
        worst_invariance <= 1e-8,
        worst_relative_spread=worst_invariance,
        tolerance=1e-8,
    )
    return c8, c10


# --- 9: smoothness and surjectivity -----------------------------------------


def check_rank_and_scan(tol: Tolerances, quick: bool) -> dict:
    n_constructs = 10 if quick else 100
    n_targets = 3 if quick else 20
    full = 0
    rejected = 0
    persistent_failures = []
    for seed in range(n_constructs):
        try:
            c = cb.random_construct(seed, tol)
        except GuardError:
            rejected += 1
            continue
        jr = ob.jacobian_rank(c, tol=tol)
        if jr.rank == 4:
            full += 1
            continue
        # re-examine at tighter steps before declaring a failure
        retried = False
        for h in (1e-6, 1e-7):
            jr2 = ob.jacobian_rank(c, step=h, tol=tol)
            if jr2.rank == 4:
                full += 1
                retried = True
                break
        if not retried:
            persistent_failures.append(seed)
    scan = ob.surjectivity_scan(seed=41, n_targets=n_targets, tol=1e-8, tolerances=tol)
    reached = sum(t.reached for t in scan.targets)
    worst_res = max((t.residual for t in scan.targets), default=0.0)
    need = (n_constructs - rejected) - (0 if quick else 1)
    passed = full >= need and not persistent_failures and reached == n_targets
    return _check(
        "smoothness and surjectivity: full-rank derivative, Newton reaches all targets",
        passed,
        constructs=n_constructs,
        guard_rejected=rejected,
        full_rank=full,
        persistent_rank_failures=persistent_failures,
        targets=n_targets,
        targets_reached=reached,
        worst_newton_residual=worst_res,
        newton_tolerance=1e-8,
    )


# --- 11: cross-module properties --------------------------------------------


def check_cross_module(tol: Tolerances, quick: bool) -> dict:
    problems = []

    builtins = {
        "duncehat": sx.make_duncehat(),
        "cyclic-triangle": sx.make_cyclic_triangle(),
        "tetrahedron-boundary": sx.make_tetrahedron_boundary(),
        "single-2-simplex": sx.make_single_2_simplex(),
    }
    for name, x in builtins.items():
        pres = tp.edge_path_presentation(x)
        ab = pres.abelianization()
        h1 = tp.homology(x)[1]
        if (ab.betti, ab.torsion) != (h1.betti, h1.torsion):
            problems.append(f"{name}: abelianized pi1 {ab} differs from H1 {h1}")
        bary = tp.barycentric_subdivision(x)
        if tp.euler_characteristic(bary) != tp.euler_characteristic(x):
            problems.append(f"{name}: euler characteristic changed under subdivision")
        hs = tp.homology(x)
        hb = tp.homology(bary)
        if [(h.betti, h.torsion) for h in hs] != [(h.betti, h.torsion) for h in hb]:
            problems.append(f"{name}: homology changed under subdivision")
        # boundary squared vanishes: asserted at construction, re-derive here
        tp.chain_complex(x)

    for seed in range(2 if quick else 5):
        c = cb.random_construct(500 + seed, tol)
        if len(c.intersections) != 9:
            problems.append(f"seed {500 + seed}: intersection count {len(c.intersections)}")
        for t, s in c.intersections:
            gap = float(np.linalg.norm(c.p.gamma.affine(t) - c.q.gamma.affine(s)))
            if gap > 1e-9 * max(1.0, float(np.linalg.norm(c.p.gamma.affine(t)))):
                problems.append(f"seed {500 + seed}: two-sided intersection images differ by {gap:.2e}")
                break
    return _check(
        "cross-module properties: pi1 vs H1, subdivision invariance, Bezout count",
        not problems,
        problems=problems,
    )


def run_all(quick: bool = False, tol: Tolerances = DEFAULT_TOL) -> list[dict]:
    checks = [
        check_duncehat_suite(tol),
        check_wrong_case(tol),
        check_dual_complex_identifications(tol),
        check_kulikov(tol),
        check_fiber_invariants(tol),
        check_pic_torus(tol, n_graphs=10 if quick else 50),
        check_lattice_move(tol),
    ]
    c8, c10 = check_consistency(tol, quick)
    checks.append(c8)
    checks.append(check_rank_and_scan(tol, quick))
    checks.append(c10)
    checks.append(check_cross_module(tol, quick))
    return checks
