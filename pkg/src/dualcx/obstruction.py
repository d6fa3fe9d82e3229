"""Gluing data of the first tangent cohomology of a construct, two ways.

What is computed
----------------
The singular locus of the glued surface is a rational curve through one
triple point three times; degree-zero line bundles on it are classified by
three fiber values at the marks (p1, p2, p3) up to a common scale, a
two-dimensional torus.  A construct's first tangent cohomology is such a
bundle, and every claim here is about its class *up to per-coordinate
factors that depend only on the pair of cross-ratio marks (n_p, n_q)*:
that relative normalization is exactly what stays well defined once the
auxiliary trivializations are chosen, and all downstream statements
(consistency across a family with fixed marks, Jacobian ranks, Newton
targets expressed as multiplicative offsets) live at that level.

Route one (closed form) assembles the endpoint formulas: with
s_b(tau) = (tau - 1)/(tau - tau_b),

    value_1 ~ s_b(p1) * Om(vP(p1), vP(p2)) * Om(vQ(q2), vQ(q1)) / (fQ(pN) fP(qN))
    value_2 ~ s_b(p2) * Om(vP(p2), vP(p1)) / fQ(pN)
    value_3 ~ s_b(p3) * Om(vQ(q1), vQ(q2)) / fP(qN)

where Om is the fixed area form on pushed-forward reference tangent
vectors and the f values sit at the opposite nodes (both nonzero by the
construct guards; the pairing that would put each f at its own vanishing
point is the singular variant and is deliberately not used).

Route two (direct pipeline) builds a meromorphic section scale
R = s * s_b * g * h / (fQ|_P * phi^* fP|_Q) against the conormal tensor
frame, with

    s(tau) = n_p * tau (tau - n_p) / (tau - 2 n_p)^3,
    g(tau) = (tau - n_p) / (tau - 1)^2,

computes the full divisor of the section numerically (root finding piece
by piece, plus the exact node / infinity / blowup frame corrections),
cancels everything off the marks with a Moebius-product h (unique up to
one global constant, which the quotient kills), asserts the residual
divisor is exactly [p1] + [p2] + [p3], and reads the three derivative
values at the marks.  The scale s vanishes simply at all three marks and
keeps the same formula in the mark-normalized coordinate for every n_p.

The two routes share the curve data but not the derivation: route one is
endpoint algebra, route two is divisor bookkeeping plus local derivative
extraction.  Their componentwise ratio must be constant along any family
with fixed (n_p, n_q); `consistency_check` measures exactly that, and a
corrupted endpoint formula shows up immediately because the endpoint
values vary along the family while the ratio no longer cancels them.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import GuardError, ValidationError
from .ncgeom import PicClass, duncehat_curve_graph, pic0_structure, pic_normalize
from .numerics import (
    INF,
    DEFAULT_TOL,
    Divisor,
    Mobius,
    Poly,
    Tolerances,
    aberth_roots,
    chordal,
    finite_diff_jacobian,
    is_inf,
)
from .cubics import (
    AffineFamilyDirection,
    Construct,
    NodalCubic,
    affine_direction,
    affine_family,
    omega,
    random_construct,
)

# ---------------------------------------------------------------------------
# the tau-line helper functions
# ---------------------------------------------------------------------------


def vanishing_scale(tau: complex, n: complex) -> complex:
    """s(tau) = n tau (tau - n) / (tau - 2n)^3: simple zeros at 0, n, infinity.

    In the coordinate tau' = tau / n the formula reads
    tau' (tau' - 1) / (tau' - 2)^3 for every n, which is what makes its
    mark derivatives functions of n alone.
    """
    return n * tau * (tau - n) / (tau - 2 * n) ** 3


def offset_scale(tau: complex, n: complex) -> complex:
    """The non-vanishing variant n^2 (tau - n)/(tau - 2n)^3.

    Takes the value 1/8 at tau = 0 independently of n and has a double
    zero at infinity, so it cannot serve as a section scale that vanishes
    simply at all three marks; kept only as documentation of the pitfall
    and exercised by the tests.
    """
    return n**2 * (tau - n) / (tau - 2 * n) ** 3


def scale_derivatives(n: complex) -> tuple[complex, complex, complex]:
    """d(vanishing_scale)/dv at the marks (0, infinity, n).

    Against the reference field v = (tau-1)^2 d/dtau; at infinity the
    chart sigma = 1/tau with v = -(1-sigma)^2 d/dsigma is used.  All three
    depend on n alone and none of them vanishes for admissible n.
    """
    return (1.0 / (8.0 * n), -n, -((n - 1.0) ** 2) / n)


def sb_values(n_p: complex, tau_b: complex) -> tuple[complex, complex, complex]:
    """The extra-point weight (tau - 1)/(tau - tau_b) at the marks 0, inf, n_p."""
    return (1.0 / tau_b, 1.0 + 0.0j, (n_p - 1.0) / (n_p - tau_b))


def lambda_factors(c: Construct) -> tuple[complex, complex, complex]:
    """Tangent-scale ratios across the identification at the three marks.

    lambda_1 compares the reference fields at p3 against q1, lambda_2 at
    p1 against q2, lambda_3 at p2 against q3, all through the derivative
    of the identification map.  Each is a function of (n_p, n_q) alone:
    in mark coordinates the identification is tau_Q = n_q (tau_P - n_p) /
    tau_P, with closed forms

        lambda_1 = n_q (n_p - 1)^2 / n_p,
        lambda_2 = 1 / (n_p n_q),
        lambda_3 = n_p n_q / (n_q - 1)^2,

    which the tests check against this numeric route.
    """
    vp = c.p.v_scale_poly()
    vq = c.q.v_scale_poly()
    out = []
    for t, s in ((c.t_p3, c.s_q1), (c.t_p1, c.s_q2), (c.t_p2, c.s_q3)):
        num = complex(vp(t)) * c.phi.derivative(t)
        den = complex(vq(s))
        if abs(den) < 1e-12 or abs(num) < 1e-14:
            raise GuardError("reference-field-zero", "degenerate tangent comparison across the identification")
        out.append(num / den)
    return tuple(out)


def lambda_factors_closed_form(n_p: complex, n_q: complex) -> tuple[complex, complex, complex]:
    return (
        n_q * (n_p - 1.0) ** 2 / n_p,
        1.0 / (n_p * n_q),
        n_p * n_q / (n_q - 1.0) ** 2,
    )


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GluingTriple:
    """Three fiber values at the marks, with provenance."""

    values: tuple[complex, complex, complex]
    kind: str                  # 'rows' | 'closed-form' | 'direct-pipeline'
    n_p: complex
    n_q: complex

    def __post_init__(self):
        for v in self.values:
            if v == 0 or not (cmath.isfinite(v.real) and cmath.isfinite(v.imag)):
                raise ValidationError(f"gluing values must be nonzero and finite, got {self.values}")


@dataclass(frozen=True)
class JPoint:
    """Class of a gluing triple in the two-torus: (G2/G1, G3/G1)."""

    g21: complex
    g31: complex

    @staticmethod
    def from_triple(t: GluingTriple) -> "JPoint":
        return JPoint(t.values[1] / t.values[0], t.values[2] / t.values[0])

    def log(self) -> np.ndarray:
        return np.array(
            [cmath.log(self.g21).real, cmath.log(self.g21).imag, cmath.log(self.g31).real, cmath.log(self.g31).imag]
        )

    def ratio(self, other: "JPoint") -> tuple[complex, complex]:
        return (self.g21 / other.g21, self.g31 / other.g31)


def jpoint_as_pic_class(t: GluingTriple) -> PicClass:
    """The same class as an element of the gluing-data torus of the curve."""
    torus = pic0_structure(duncehat_curve_graph())
    return pic_normalize(torus, t.values)


@dataclass(frozen=True)
class SBGValues:
    """All endpoint ingredients of the closed form, for inspection and tests."""

    sb: tuple[complex, complex, complex]
    g_p1: complex
    f_q_at_pn: complex
    f_p_at_qn: complex
    om_p12: complex
    om_q21: complex
    om_q3_p3: complex
    a_factor: complex      # 1 / Om(vQ(q1), vQ(q2)) style inverse, finite variant
    b_factor: complex


# ---------------------------------------------------------------------------
# the shared geometric evaluations
# ---------------------------------------------------------------------------


def _pairings(c: Construct) -> dict[str, complex]:
    vp1 = c.p.vpush(c.t_p1)
    vp2 = c.p.vpush(c.t_p2)
    vp3 = c.p.vpush(c.t_p3)
    vq1 = c.q.vpush(c.s_q1)
    vq2 = c.q.vpush(c.s_q2)
    vq3 = c.q.vpush(c.s_q3)
    out = {
        "om_p12": omega(vp1, vp2),
        "om_q21": omega(vq2, vq1),
        "om_q3_p3": omega(vq3, vp3),
    }
    for key, val in out.items():
        if abs(val) < 1e-12:
            raise GuardError("degenerate-pairing", f"vanishing area pairing {key}")
    return out


def eval_main_rows(c: Construct) -> GluingTriple:
    """Raw derivative rows of the uncorrected section at the three marks.

    row_1 = lambda_1 ds/dv(p1) Om(vP(p1), vP(p2)) Om(vQ(q2), vQ(q1))
    row_2 =          ds/dv(p2) Om(vP(p2), vP(p1)) Om(vQ(q3), vP(p3))
    row_3 = lambda_2 lambda_3 ds/dv(p3) Om(vP(p3), vQ(q3)) Om(vQ(q1), vQ(q2))

    in the fixed mark charts; the lambda factors convert the Q-side
    reference vectors into the P-side ones along the identification.
    """
    l1, l2, l3 = lambda_factors(c)
    d1, d2, d3 = scale_derivatives(c.n_p)
    pr = _pairings(c)
    row1 = l1 * d1 * pr["om_p12"] * pr["om_q21"]
    row2 = d2 * (-pr["om_p12"]) * pr["om_q3_p3"]
    row3 = l2 * l3 * d3 * (-pr["om_q3_p3"]) * (-pr["om_q21"])
    return GluingTriple((row1, row2, row3), "rows", c.n_p, c.n_q)


def closed_form_data(c: Construct) -> tuple[JPoint, SBGValues, GluingTriple]:
    """Closed-form gluing data, up to (n_p, n_q)-only per-coordinate factors."""
    pr = _pairings(c)
    f_q_pn = c.q.f_value(c.p.node_point)
    f_p_qn = c.p.f_value(c.q.node_point)
    sb = sb_values(c.n_p, c.tau_b)
    a1 = pr["om_p12"] * pr["om_q21"] / (f_q_pn * f_p_qn)
    a2 = -pr["om_p12"] / f_q_pn
    a3 = -pr["om_q21"] / f_p_qn
    triple = GluingTriple((sb[0] * a1, sb[1] * a2, sb[2] * a3), "closed-form", c.n_p, c.n_q)
    sbg = SBGValues(
        sb=sb,
        g_p1=-c.n_p,
        f_q_at_pn=f_q_pn,
        f_p_at_qn=f_p_qn,
        om_p12=pr["om_p12"],
        om_q21=pr["om_q21"],
        om_q3_p3=pr["om_q3_p3"],
        a_factor=1.0 / (-pr["om_q21"] / f_p_qn),
        b_factor=1.0 / (pr["om_p12"] / f_q_pn),
    )
    return JPoint.from_triple(triple), sbg, triple


# ---------------------------------------------------------------------------
# the direct pipeline
# ---------------------------------------------------------------------------


def _poly_div(p: Poly, tol: float) -> Divisor:
    """Divisor of a polynomial as a rational function (infinity by degree)."""
    q = p.trim()
    pts: list[tuple[complex, int]] = []
    if q.degree >= 1:
        pts += [(z, 1) for z in aberth_roots(q, tol=tol)]
    pts.append((INF, -q.degree))
    return Divisor(pts)


def _compose_partial(cubic: NodalCubic, var: int) -> Poly:
    from .cubics import _partial_composed

    return _partial_composed(cubic.gamma, cubic.f, var)


def _v_scale_divisor(cubic: NodalCubic) -> Divisor:
    """Divisor of V(t) = ((a-c) t + (b-d))^2 / det: double zero, double pole at infinity."""
    (a, b), (cc, d) = cubic.tau.m
    lin = Poly([b - d, a - cc]).trim()
    if lin.degree == 0:
        return Divisor([])  # flex at the infinite parameter: zeros and poles cancel there
    root = -lin.coef[0] / lin.coef[1]
    return Divisor([(complex(root), 2), (INF, -2)])


def _u_ratio_divisor(cubic: NodalCubic, tol: float) -> Divisor:
    """Divisor of the conormal scalar u = alpha(v): the reference conormal
    section beta = i_v Omega measured against the d f frame.

    u = V(t) (X'W - XW') / F_Y(gamma): numerically root-found numerator and
    denominator; the vertical-tangent zeros shared by both cancel in the
    merge, leaving the double flex zero and the two node-preimage poles.
    """
    num = cubic.gamma.nx.trim()
    den = _compose_partial(cubic, 1).trim()
    if den.is_zero():
        raise GuardError("chart-degenerate", "the y-partial vanishes along the curve")
    return _v_scale_divisor(cubic) + _poly_div(num, tol) - _poly_div(den, tol)


def _phi_pullback(div: Divisor, phi: Mobius) -> Divisor:
    inv = phi.inverse()
    return Divisor([(inv(z), m) for z, m in div.points])


@dataclass(frozen=True)
class DirectReport:
    """Pipeline internals: the merged divisor, the h correction, the checks."""

    mark_orders: tuple[int, int, int]
    off_points: tuple[tuple[complex, int], ...]
    local_orders: tuple[int, int, int]
    values: tuple[complex, complex, complex]


def _section_divisor(c: Construct, tol: Tolerances) -> tuple[Divisor, dict]:
    """Full divisor of the uncorrected section scale times the conormal frame.

    Pieces, all on the P parameter line (Q-side pieces pulled back through
    the identification):

    * the vanishing scale, the extra-point weight s_b, the auxiliary g;
    * minus the divisors of the two restricted cubic equations;
    * the conormal scalars of both sides against their d f frames;
    * the frame corrections: node zeros, triple poles along the infinity
      points, and one zero per blown-up point (the eight non-chosen
      intersections and b on the P side, the eight on the Q side).
    """
    rt = tol.root_residual
    tau_p = c.p.tau
    inv_tau = tau_p.inverse()
    t_psi = inv_tau(1.0)
    t_pole = inv_tau(2 * c.n_p)

    pieces: dict[str, Divisor] = {}
    pieces["scale"] = Divisor([(c.t_p1, 1), (c.t_p2, 1), (c.t_p3, 1), (t_pole, -3)])
    pieces["sb"] = Divisor([(t_psi, 1), (c.b_param, -1)])
    pieces["g"] = Divisor([(c.t_p3, 1), (c.t_p2, 1), (t_psi, -2)])

    fq_on_p = c.q.f.compose_map(c.p.gamma.x, c.p.gamma.y, c.p.gamma.w)
    fp_on_q = c.p.f.compose_map(c.q.gamma.x, c.q.gamma.y, c.q.gamma.w)
    div_fq_p = _poly_div(fq_on_p, rt) - _poly_div(c.p.gamma.w, rt).scaled(3)
    div_fp_q = _poly_div(fp_on_q, rt) - _poly_div(c.q.gamma.w, rt).scaled(3)
    pieces["inv_fq_on_p"] = -div_fq_p
    pieces["inv_fp_on_q_pulled"] = -_phi_pullback(div_fp_q, c.phi)

    pieces["conormal_p"] = _u_ratio_divisor(c.p, rt)
    pieces["conormal_q_pulled"] = _phi_pullback(_u_ratio_divisor(c.q, rt), c.phi)

    # infinity points of the curve: zeros of the w coordinate, including the
    # infinite parameter when the degree drops
    wdiv_p = _poly_div(c.p.gamma.w, rt)
    hp = [(z, mm) for z, mm in wdiv_p.points if mm > 0]
    deficit = 3 - sum(mm for _, mm in hp)
    if deficit:
        hp.append((INF, deficit))
    wdiv_q = _poly_div(c.q.gamma.w, rt)
    hq = [(z, mm) for z, mm in wdiv_q.points if mm > 0]
    deficit_q = 3 - sum(mm for _, mm in hq)
    if deficit_q:
        hq.append((INF, deficit_q))

    frame_p = Divisor([(c.t_p1, 1), (c.t_p2, 1), (c.b_param, 1)])
    frame_p = frame_p + Divisor([(t, 1) for k, (t, _) in enumerate(c.intersections) if k != c.n_index])
    frame_p = frame_p + Divisor(hp).scaled(-3)
    pieces["frame_p"] = frame_p

    frame_q = Divisor([(c.s_q1, 1), (c.s_q2, 1)])
    frame_q = frame_q + Divisor([(s, 1) for k, (_, s) in enumerate(c.intersections) if k != c.n_index])
    frame_q = frame_q + Divisor(hq).scaled(-3)
    pieces["frame_q_pulled"] = _phi_pullback(frame_q, c.phi)

    total = Divisor([])
    for d in pieces.values():
        total = total + d
    return total.merged(tol.cluster_radius), pieces


def _build_h(off: Divisor) -> tuple[list[tuple[complex, int]], int]:
    """Moebius-product exponents cancelling the off-mark part.

    Returns finite (point, exponent) factors for h = prod (t - z)^e and the
    implied order at infinity (from the degree imbalance), which must match
    minus the off-part's infinity multiplicity.
    """
    if off.degree() != 0:
        raise GuardError("divisor-imbalance", f"off-mark divisor has degree {off.degree()}, expected 0")
    factors = []
    inf_off = 0
    for z, m in off.points:
        if is_inf(z):
            inf_off = m
        else:
            factors.append((z, -m))
    imbalance = sum(e for _, e in factors)
    if imbalance != inf_off:
        raise GuardError("divisor-imbalance", "h cannot balance the infinity order of the off-mark part")
    return factors, -inf_off


def _eval_h(factors: list[tuple[complex, int]], t: complex) -> complex:
    out = 1.0 + 0.0j
    for z, e in factors:
        out *= (t - z) ** e
    return out


def _scale_fn(c: Construct, h_factors, t: complex) -> complex:
    """Pointwise value of R(t) = s s_b g h / (fQ|_P  phi^* fP|_Q)."""
    tau = c.p.tau(t)
    s_val = vanishing_scale(tau, c.n_p)
    sb_val = (tau - 1.0) / (tau - c.tau_b)
    g_val = (tau - c.n_p) / (tau - 1.0) ** 2
    pt_p = c.p.gamma.affine(t)
    fq = c.q.f.affine(complex(pt_p[0]), complex(pt_p[1]))
    s_param = c.phi(t)
    pt_q = c.q.gamma.affine(s_param)
    fp = c.p.f.affine(complex(pt_q[0]), complex(pt_q[1]))
    return s_val * sb_val * g_val * _eval_h(h_factors, t) / (fq * fp)


def _ratio_fn(c: Construct, h_factors, t: complex) -> complex:
    """R(t) / s(tau(t)): the correction factor, regular at the marks."""
    tau = c.p.tau(t)
    sb_val = (tau - 1.0) / (tau - c.tau_b)
    g_val = (tau - c.n_p) / (tau - 1.0) ** 2
    pt_p = c.p.gamma.affine(t)
    fq = c.q.f.affine(complex(pt_p[0]), complex(pt_p[1]))
    s_param = c.phi(t)
    pt_q = c.q.gamma.affine(s_param)
    fp = c.p.f.affine(complex(pt_q[0]), complex(pt_q[1]))
    return sb_val * g_val * _eval_h(h_factors, t) / (fq * fp)


def _circle_mean(f, center: complex, radius: float, points: int = 8) -> complex:
    vals = []
    for k in range(points):
        z = center + radius * cmath.exp(2j * cmath.pi * k / points)
        vals.append(f(z))
    return complex(np.mean(np.asarray(vals, dtype=complex)))


def _local_order(f, center: complex, radius: float) -> int:
    """Order of vanishing from the scaling of |f| on two circles."""
    def gm(r):
        logs = []
        for k in range(8):
            z = center + r * cmath.exp(2j * cmath.pi * (k + 0.5) / 8)
            logs.append(cmath.log(abs(f(z))).real)
        return float(np.mean(logs))

    slope = (gm(radius) - gm(radius / 2.0)) / cmath.log(2.0).real
    return int(round(slope))


def direct_pipeline_data(c: Construct, tol: Tolerances = DEFAULT_TOL) -> tuple[JPoint, DirectReport, GluingTriple]:
    """Gluing data through the full divisor pipeline.

    Hard assertions, each a failure and never a warning: the off-mark part
    of the section divisor must cancel exactly into the h factors, the
    residual divisor must be exactly one at each mark (checked twice: on
    the clustered divisor and again by local scaling of the evaluated
    scale function), and the final derivative values must be finite and
    nonzero.
    """
    total, pieces = _section_divisor(c, tol)
    if total.degree() != 3:
        raise GuardError("divisor-imbalance", f"section divisor has degree {total.degree()}, expected 3")
    marks = list(c.marks_p())
    mark_mults, off = total.split_at(marks, tol.cluster_radius)
    if tuple(mark_mults) != (1, 1, 1):
        raise GuardError(
            "residual-divisor",
            f"section does not vanish simply at the marks: multiplicities {tuple(mark_mults)}, "
            f"off-part {off.points}",
        )
    h_factors, _h_inf = _build_h(off)

    # radius for local work: stay clear of every singularity of every factor
    # (the merged divisor is no guide here: cancelled pairs such as the
    # intersection parameters drop out of it but remain poles of the scalar)
    all_pts = [c.b_param]
    for piece in pieces.values():
        all_pts += [z for z, _ in piece.points if not is_inf(z)]
    orders = []
    values = []
    rows = eval_main_rows(c)
    for i, mk in enumerate(marks):
        dmin = min((abs(mk - z) for z in all_pts if abs(mk - z) > 1e-9), default=1.0)
        radius = max(1e-8, min(0.05, dmin / 30.0))
        orders.append(_local_order(lambda z: _scale_fn(c, h_factors, z), mk, radius))
        r_val = _circle_mean(lambda z: _ratio_fn(c, h_factors, z), mk, radius)
        values.append(rows.values[i] * r_val)
    if tuple(orders) != (1, 1, 1):
        raise GuardError("residual-divisor", f"local vanishing orders {tuple(orders)} differ from (1, 1, 1)")
    triple = GluingTriple(tuple(values), "direct-pipeline", c.n_p, c.n_q)
    report = DirectReport(
        mark_orders=(1, 1, 1),
        off_points=tuple(off.points),
        local_orders=tuple(orders),
        values=tuple(values),
    )
    return JPoint.from_triple(triple), report, triple


# ---------------------------------------------------------------------------
# consistency across a fixed-mark family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyReport:
    deviation: float
    ratios: tuple[tuple[complex, complex], ...]
    n_p: complex
    n_q: complex


def consistency_check(constructs: list[Construct], tol: Tolerances = DEFAULT_TOL) -> ConsistencyReport:
    """Componentwise ratio of the two routes must be constant on the family.

    All members must share (n_p, n_q) to within 1e-8; the report carries
    the maximal relative deviation of the ratio pair against the first
    member.
    """
    if not constructs:
        raise ValidationError("empty family")
    base = constructs[0]
    for member in constructs[1:]:
        if chordal(member.n_p, base.n_p) > 1e-8 or chordal(member.n_q, base.n_q) > 1e-8:
            raise GuardError("marks-drift", "family members have drifting (n_p, n_q)")
    ratios = []
    for member in constructs:
        jd, _, _ = direct_pipeline_data(member, tol)
        jc = closed_form_data(member)[0]
        ratios.append(jd.ratio(jc))
    base_ratio = ratios[0]
    deviation = 0.0
    for r in ratios[1:]:
        deviation = max(deviation, abs(r[0] / base_ratio[0] - 1.0), abs(r[1] / base_ratio[1] - 1.0))
    return ConsistencyReport(deviation, tuple(ratios), base.n_p, base.n_q)


def seeded_family(seed: int, size: int, tol: Tolerances = DEFAULT_TOL) -> list[Construct]:
    """A fixed-(n_p, n_q) family: random small moves on both sides."""
    base = random_construct(seed, tol)
    rng = np.random.default_rng(seed + 777)
    dir_p = affine_direction(base, "P")
    dir_q = affine_direction(base, "Q")
    out = [base]
    while len(out) < size:
        ep = 0.05 * complex(rng.standard_normal() + 1j * rng.standard_normal())
        eq = 0.05 * complex(rng.standard_normal() + 1j * rng.standard_normal())
        try:
            member = affine_family(affine_family(base, dir_p, ep), dir_q, eq)
        except GuardError:
            continue
        out.append(member)
    return out


# ---------------------------------------------------------------------------
# Jacobian rank and the surjectivity scan
# ---------------------------------------------------------------------------


def _moved_jpoint(c: Construct, dir_p: AffineFamilyDirection, dir_q: AffineFamilyDirection, eps_p: complex, eps_q: complex) -> JPoint:
    member = c
    if eps_p != 0:
        member = affine_family(member, dir_p, eps_p)
    if eps_q != 0:
        member = affine_family(member, dir_q, eps_q)
    return closed_form_data(member)[0]


@dataclass(frozen=True)
class JacobianReport:
    rank: int
    singular_values: tuple[float, ...]
    richardson_disagreement: float
    step: float


def jacobian_rank(c: Construct, step: float | None = None, tol: Tolerances = DEFAULT_TOL) -> JacobianReport:
    """Rank of the derivative of the closed-form class along the family.

    Four real directions (complex moves of each side, the maps fixing the
    identification point and the opposite node), central differences with
    a Richardson disagreement flag, rank from the singular values of the
    real 4x4 Jacobian of the log class.  Full rank four is the numeric
    form of smooth fibers of complex rank two.
    """
    h = tol.fd_step if step is None else step
    dir_p = affine_direction(c, "P")
    dir_q = affine_direction(c, "Q")
    base = closed_form_data(c)[0]

    def f(x: np.ndarray) -> np.ndarray:
        jp = _moved_jpoint(c, dir_p, dir_q, complex(x[0], x[1]), complex(x[2], x[3]))
        r = jp.ratio(base)
        return np.array(
            [cmath.log(r[0]).real, cmath.log(r[0]).imag, cmath.log(r[1]).real, cmath.log(r[1]).imag]
        )

    fd = finite_diff_jacobian(f, np.zeros(4), h=h, rank_tol=tol.rank_tol)
    return JacobianReport(fd.rank, tuple(float(s) for s in fd.singular_values), fd.richardson_disagreement, h)


@dataclass(frozen=True)
class ScanTarget:
    target: tuple[complex, complex]
    reached: bool
    iterations: int
    residual: float


@dataclass(frozen=True)
class ScanReport:
    targets: tuple[ScanTarget, ...]

    @property
    def all_reached(self) -> bool:
        return all(t.reached for t in self.targets)


def surjectivity_scan(
    seed: int,
    n_targets: int = 20,
    tol: float = 1e-8,
    max_log_offset: float = 1.0,
    construct: Construct | None = None,
    tolerances: Tolerances = DEFAULT_TOL,
) -> ScanReport:
    """Newton continuation onto multiplicative targets in the class torus.

    Targets are offsets exp(zeta) relative to the starting class (the
    class itself is only defined up to (n_p, n_q) factors, so offsets are
    the well-posed notion).  Newton runs on the four family parameters
    with a fresh finite-difference Jacobian per step, damped by halving;
    failures are reported as data, not hidden.
    """
    c = construct if construct is not None else random_construct(seed, tolerances)
    rng = np.random.default_rng(seed + 313)
    dir_p = affine_direction(c, "P")
    dir_q = affine_direction(c, "Q")
    base = closed_form_data(c)[0]

    def f(x: np.ndarray) -> np.ndarray:
        jp = _moved_jpoint(c, dir_p, dir_q, complex(x[0], x[1]), complex(x[2], x[3]))
        r = jp.ratio(base)
        return np.array(
            [cmath.log(r[0]).real, cmath.log(r[0]).imag, cmath.log(r[1]).real, cmath.log(r[1]).imag]
        )

    results = []
    for _ in range(n_targets):
        z1 = max_log_offset * rng.uniform(0.2, 1.0) * cmath.exp(2j * cmath.pi * rng.uniform())
        z2 = max_log_offset * rng.uniform(0.2, 1.0) * cmath.exp(2j * cmath.pi * rng.uniform())
        target = np.array([z1.real, z1.imag, z2.real, z2.imag])
        x, reached, iters, res = _continuation_solve(f, target, tol)
        results.append(ScanTarget((complex(z1), complex(z2)), reached, iters, res))
    return ScanReport(tuple(results))


def _cheap_jacobian(f, x: np.ndarray, h: float) -> np.ndarray:
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.stack(cols, axis=1)


def _newton_to(f, x0: np.ndarray, target: np.ndarray, tol: float, max_steps: int = 20) -> tuple[np.ndarray, bool, int, float]:
    x = x0.copy()
    used = 0
    res = float("inf")
    for _ in range(max_steps):
        used += 1
        try:
            val = f(x)
        except GuardError:
            return x, False, used, res
        res = float(np.linalg.norm(val - target))
        if res <= tol:
            return x, True, used, res
        try:
            jac = _cheap_jacobian(f, x, 1e-5)
            step = np.linalg.solve(jac, target - val)
        except (GuardError, np.linalg.LinAlgError):
            return x, False, used, res
        lam = 1.0
        improved = False
        for _ in range(8):
            try:
                trial = f(x + lam * step)
            except GuardError:
                lam *= 0.5
                continue
            if np.linalg.norm(trial - target) < res:
                x = x + lam * step
                improved = True
                break
            lam *= 0.5
        if not improved:
            return x, False, used, res
    return x, False, used, res


def _continuation_solve(f, target: np.ndarray, tol: float, max_total_iters: int = 400) -> tuple[np.ndarray, bool, int, float]:
    """Walk the target in from zero, Newton-solving each stage.

    The map is locally invertible but a full-size step can leave the guard
    region; staging keeps every Newton start inside the basin.  The stage
    size adapts: it halves on failure and grows back on success.  Total
    work is capped so unreachable targets fail in bounded time.
    """
    x = np.zeros(4)
    achieved = 0.0
    stage = 1.0
    total_iters = 0
    res = float("inf")
    while achieved < 1.0:
        frac = min(1.0, achieved + stage)
        x_new, ok, used, res = _newton_to(f, x, frac * target, tol)
        total_iters += used
        if total_iters > max_total_iters:
            return x, False, total_iters, res
        if ok:
            x = x_new
            achieved = frac
            stage = min(1.0, stage * 1.6)
        else:
            stage *= 0.5
            if stage < 1.0 / 64.0:
                return x, False, total_iters, res
    return x, True, total_iters, res
