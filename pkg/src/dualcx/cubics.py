"""Parametrized nodal plane cubics and two-cubic constructs.

Conventions
-----------
Cubics are parametrization-first: a curve is a degree-3 map from the
projective line, stored as three binary cubics (X, Y, W).  The implicit
equation is derived by a nullspace fit and every downstream quantity
(nodes, flexes, intersections) reduces to one-variable root finding.

The affine chart is fixed once and for all: coordinates (x, y) = (X/W,
Y/W), the line at infinity is W = 0, and the area form is dx ^ dy.
Genericity with respect to this chart is enforced by guards, never by
re-choosing the chart.

The residue convention: along a curve f = 0 the 2-form (dx ^ dy)/f has
residue 1-form alpha with alpha = dx / (df/dy) on the curve, i.e.
alpha(v) = (dx ^ dy)(v, w) / df(w) for any transverse w.  Pulled back
through the parametrization, alpha(d/dt) = (X'W - XW') / F_Y(X, Y, W):
the W-powers cancel, so both numerator and denominator are honest
polynomials in t.  The implicit equation is scaled so alpha has residue
exactly +1 at the first node preimage of the chosen ordering; the residue
at the other preimage is then -1.

Flex choice: a nodal cubic has three smooth flexes.  The selection rule
is fixed and recorded: for each flex phi compute w = (phi - u1)/(phi - u2)
(u1, u2 the node preimages) and the scale-free ratio r = w^2 / (product
of the other two w's); pick the flex whose r is lexicographically least
by (real part, imaginary part).  The rule is invariant under plane affine
maps and under reparametrization; it is a declared convention, nothing
forces it.

Tangent scales: tau is the coordinate with tau(p1) = 0, tau(p2) =
infinity, tau(flex) = 1, and the reference vector field is
v = (tau - 1)^2 d/dtau.  In the parameter chart v = V(t) d/dt with
V(t) = ((a - c) t + (b - d))^2 / det for tau = (a t + b)/(c t + d), a
polynomial, so v is evaluable everywhere including the preimage of
tau = infinity (where the chart swap sigma = 1/tau gives
v = -(1 - sigma)^2 d/dsigma, finite and nonzero).

Degenerate configurations are rejected with named guards, never
perturbed: the moduli space being sampled is open, so rejection sampling
is cheap and silent perturbation would corrupt derivative tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError, ValidationError
from .numerics import (
    INF,
    DEFAULT_TOL,
    Mobius,
    Poly,
    Tolerances,
    aberth_roots,
    chordal,
    is_inf,
    mobius_from_triple,
    poly_from_roots,
    poly_roots,
)

# ---------------------------------------------------------------------------
# ternary cubic forms
# ---------------------------------------------------------------------------

MONOMIALS: tuple[tuple[int, int, int], ...] = (
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
)


def _tern_mul(a: dict, b: dict) -> dict:
    out: dict[tuple[int, int, int], complex] = {}
    for (i, j, k), ca in a.items():
        for (p, q, r), cb in b.items():
            key = (i + p, j + q, k + r)
            out[key] = out.get(key, 0.0) + ca * cb
    return out


class TernaryCubic:
    """Homogeneous cubic form in (x, y, w), ten coefficients."""

    __slots__ = ("coef",)

    def __init__(self, coef):
        arr = np.asarray(coef, dtype=complex)
        if arr.shape != (10,):
            raise ValidationError("a ternary cubic has ten coefficients")
        self.coef = arr

    def __call__(self, x: complex, y: complex, w: complex) -> complex:
        out = 0.0 + 0.0j
        for c, (a, b, g) in zip(self.coef, MONOMIALS):
            out += c * x**a * y**b * w**g
        return complex(out)

    def affine(self, x: complex, y: complex) -> complex:
        return self(x, y, 1.0)

    def scaled(self, c: complex) -> "TernaryCubic":
        return TernaryCubic(self.coef * c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coef))

    def partial(self, var: int) -> dict:
        """Partial derivative as a ternary dict (degree two)."""
        out: dict[tuple[int, int, int], complex] = {}
        for c, mon in zip(self.coef, MONOMIALS):
            if mon[var] == 0:
                continue
            key = list(mon)
            key[var] -= 1
            out[tuple(key)] = out.get(tuple(key), 0.0) + c * mon[var]
        return out

    def gradient(self, x: complex, y: complex, w: complex) -> tuple[complex, complex, complex]:
        vals = []
        for var in range(3):
            acc = 0.0 + 0.0j
            for (a, b, g), c in self.partial(var).items():
                acc += c * x**a * y**b * w**g
            vals.append(complex(acc))
        return tuple(vals)

    def compose_map(self, gx: Poly, gy: Poly, gw: Poly) -> Poly:
        """The univariate polynomial F(gx(t), gy(t), gw(t))."""
        powers = {}
        for base, name in ((gx, 0), (gy, 1), (gw, 2)):
            powers[name] = [Poly([1.0]), base, base * base, base * base * base]
        out = Poly([0.0])
        for c, (a, b, g) in zip(self.coef, MONOMIALS):
            out = out + c * (powers[0][a] * powers[1][b] * powers[2][g])
        return out

    def compose_linear(self, L) -> "TernaryCubic":
        """The form F(L v): substitute linear coordinates."""
        L = np.asarray(L, dtype=complex).reshape(3, 3)
        forms = [
            {(1, 0, 0): L[r][0], (0, 1, 0): L[r][1], (0, 0, 1): L[r][2]} for r in range(3)
        ]
        acc: dict[tuple[int, int, int], complex] = {}
        for c, (a, b, g) in zip(self.coef, MONOMIALS):
            term = {(0, 0, 0): c}
            for _ in range(a):
                term = _tern_mul(term, forms[0])
            for _ in range(b):
                term = _tern_mul(term, forms[1])
            for _ in range(g):
                term = _tern_mul(term, forms[2])
            for key, val in term.items():
                acc[key] = acc.get(key, 0.0) + val
        return TernaryCubic([acc.get(mon, 0.0) for mon in MONOMIALS])


# ---------------------------------------------------------------------------
# the parametrization
# ---------------------------------------------------------------------------


class CubicMap:
    """Degree-3 map to the plane: three binary cubics (X, Y, W)."""

    __slots__ = ("x", "y", "w", "nx", "ny")

    def __init__(self, x: Poly, y: Poly, w: Poly):
        for p in (x, y, w):
            if p.degree > 3:
                raise ValidationError("parametrization coordinates have degree at most three")
        self.x, self.y, self.w = x, y, w
        # numerators of the affine derivative: d(X/W)/dt = (X'W - XW')/W^2
        self.nx = x.derivative() * w - x * w.derivative()
        self.ny = y.derivative() * w - y * w.derivative()

    def hom(self, t: complex) -> np.ndarray:
        return np.array([self.x(t), self.y(t), self.w(t)], dtype=complex)

    def affine(self, t: complex) -> np.ndarray:
        w = self.w(t)
        if abs(w) == 0.0:
            raise GuardError("point-at-infinity", "parameter maps to the line at infinity")
        return np.array([self.x(t) / w, self.y(t) / w], dtype=complex)

    def affine_derivative(self, t: complex) -> np.ndarray:
        w = self.w(t)
        if abs(w) == 0.0:
            raise GuardError("point-at-infinity", "derivative requested on the line at infinity")
        return np.array([self.nx(t), self.ny(t)], dtype=complex) / w**2

    def wronskian(self) -> Poly:
        """det(gamma, gamma', gamma''): the inflection form.

        For honest cubics the coefficients above degree three cancel
        identically (multilinearity in the coefficient vectors), so three
        roots remain, some possibly at infinity when the degree drops.
        """
        g = (self.x, self.y, self.w)
        d1 = tuple(p.derivative() for p in g)
        d2 = tuple(p.derivative() for p in d1)
        det = Poly([0.0])
        for (i, j, k), sign in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                                ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
            det = det + sign * (g[i] * d1[j] * d2[k])
        return det.trim(rel=1e-10)

    def transformed(self, hom_matrix) -> "CubicMap":
        """Compose with a linear map of the plane (exact on coefficients)."""
        L = np.asarray(hom_matrix, dtype=complex).reshape(3, 3)
        comps = []
        for r in range(3):
            comps.append(L[r][0] * self.x + L[r][1] * self.y + L[r][2] * self.w)
        return CubicMap(*comps)


# ---------------------------------------------------------------------------
# implicitization
# ---------------------------------------------------------------------------


def implicitize(gamma: CubicMap, tol: float = 1e-8) -> TernaryCubic:
    """Cubic form vanishing on the image, by a nullspace fit.

    Twenty samples of the parametrization feed a 10-column monomial
    matrix; the answer is the right singular vector of the smallest
    singular value.  A second small singular value means the nullspace is
    not one-dimensional (degenerate parametrization) and is an error, as
    is a poor residual.
    """
    ts = 1.07 * np.exp(2j * np.pi * (np.arange(20) + 0.13) / 20) + (0.31 - 0.17j)
    rows = []
    for t in ts:
        v = gamma.hom(complex(t))
        nv = np.linalg.norm(v)
        if nv == 0.0:
            raise GuardError("degenerate-parametrization", "common zero of the coordinate polynomials")
        x, y, w = v / nv
        rows.append([x**a * y**b * w**c for a, b, c in MONOMIALS])
    m = np.asarray(rows, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    if s[8] <= 1e-6 * s[0]:
        raise GuardError("degenerate-parametrization", "implicit nullspace has dimension above one")
    if s[9] > 1e-8 * s[0]:
        raise GuardError("degenerate-parametrization", "no cubic vanishes on the image")
    f = TernaryCubic(np.conj(vh[9]))
    check = implicit_residual(gamma, f)
    if check > tol:
        raise GuardError("implicitization-residual", f"fit residual {check:.2e} above {tol:.2e}")
    return f


def implicit_residual(gamma: CubicMap, f: TernaryCubic, n_samples: int = 50) -> float:
    """Largest normalized |f(gamma(t))| over held-out sample parameters."""
    ts = 0.93 * np.exp(2j * np.pi * (np.arange(n_samples) + 0.41) / n_samples) - (0.11 + 0.23j)
    worst = 0.0
    fn = f.norm()
    for t in ts:
        v = gamma.hom(complex(t))
        nv = np.linalg.norm(v)
        worst = max(worst, abs(f(*(v / nv))) / fn)
    return worst


# ---------------------------------------------------------------------------
# node finding
# ---------------------------------------------------------------------------


def _divided_minor(p: Poly, q: Poly) -> np.ndarray:
    """(p(u) q(v) - p(v) q(u)) / (u - v) as a bidegree-(2,2) array S[a][b]."""
    pc = np.zeros(4, dtype=complex)
    qc = np.zeros(4, dtype=complex)
    pc[: len(p.coef)] = p.coef
    qc[: len(q.coef)] = q.coef
    S = np.zeros((3, 3), dtype=complex)
    for i in range(4):
        for j in range(i + 1, 4):
            cij = pc[i] * qc[j] - pc[j] * qc[i]
            if cij == 0:
                continue
            # (u^i v^j - u^j v^i)/(u - v) = -sum_l u^(i+l) v^(j-1-l)
            for l in range(j - i):
                S[i + l][j - 1 - l] += -cij
    return S


def _poly_matrix_det(mat: list[list[Poly]]) -> Poly:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    out = Poly([0.0])
    for j in range(n):
        minor = [[mat[r][c] for c in range(n) if c != j] for r in range(1, n)]
        term = mat[0][j] * _poly_matrix_det(minor)
        out = out + ((-1) ** j) * term
    return out


def find_node(gamma: CubicMap, tol: float = 1e-7) -> tuple[complex, complex]:
    """The unique double point parameters (u, v), u != v, of a 1-nodal cubic.

    Solved through the three divided-difference minors of the coordinate
    pairs: their common off-diagonal zeros are exactly the parameter pairs
    with equal image.  A resultant in one variable produces candidates,
    verification against the parametrization filters them, and anything
    other than exactly one pair is rejected (cusp, extra nodes, or a
    degenerate map).
    """
    sxy = _divided_minor(gamma.x, gamma.y)
    sxw = _divided_minor(gamma.x, gamma.w)
    syw = _divided_minor(gamma.y, gamma.w)

    def v_coeffs(S) -> list[Poly]:
        return [Poly(S[:, b]).trim() for b in range(3)]  # coefficient of v^b, a Poly in u

    pairs_found: list[tuple[complex, complex]] = []
    minors = [sxy, sxw, syw]
    for first, second, third in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        A = v_coeffs(minors[first])
        B = v_coeffs(minors[second])
        syl = [
            [A[2], A[1], A[0], Poly([0.0])],
            [Poly([0.0]), A[2], A[1], A[0]],
            [B[2], B[1], B[0], Poly([0.0])],
            [Poly([0.0]), B[2], B[1], B[0]],
        ]
        res = _poly_matrix_det(syl).trim(rel=1e-9)
        if res.is_zero() or res.degree < 1:
            continue
        for u in aberth_roots(res, tol=1e-9):
            quad = Poly([complex(c(u)) for c in v_coeffs(minors[first])]).trim(rel=1e-9)
            if quad.degree < 1:
                continue
            for v in aberth_roots(quad, tol=1e-9):
                if chordal(u, v) <= 10 * tol:
                    continue
                gu, gv = gamma.hom(u), gamma.hom(v)
                cross = np.linalg.norm(np.cross(gu, gv)) / (np.linalg.norm(gu) * np.linalg.norm(gv))
                if cross <= tol:
                    pairs_found.append((u, v))
        if pairs_found:
            break
    # deduplicate unordered pairs
    unique: list[tuple[complex, complex]] = []
    for u, v in pairs_found:
        for uu, vv in unique:
            if (chordal(u, uu) <= 1e-6 and chordal(v, vv) <= 1e-6) or (
                chordal(u, vv) <= 1e-6 and chordal(v, uu) <= 1e-6
            ):
                break
        else:
            unique.append((u, v))
    if len(unique) != 1:
        raise GuardError(
            "not-one-node",
            f"expected exactly one double point, found {len(unique)} (cuspidal, reducible, or degenerate input)",
        )
    return unique[0]


# ---------------------------------------------------------------------------
# flexes
# ---------------------------------------------------------------------------


def flexes(gamma: CubicMap, node: tuple[complex, complex] | None = None, tol: float = 1e-6) -> tuple[complex, complex, complex]:
    """The three smooth flex parameters (possibly including INF).

    Roots of the inflection form; when its degree drops below three the
    missing flexes sit at the infinite parameter.  Flexes colliding with
    each other or with the node preimages reject the input as non-generic.
    """
    w3 = gamma.wronskian()
    if w3.is_zero():
        raise GuardError("degenerate-parametrization", "inflection form vanishes identically")
    d = w3.degree
    if d > 3:
        raise GuardError("degenerate-parametrization", "inflection form of degree above three")
    roots = list(aberth_roots(w3, tol=1e-9)) if d >= 1 else []
    roots += [INF] * (3 - d)
    if len(roots) != 3:
        raise GuardError("flex-count", f"found {len(roots)} flex parameters")
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal(roots[i], roots[j]) <= tol:
                raise GuardError("flex-collision", "coincident flexes (non-generic cubic)")
    if node is not None:
        for r in roots:
            for u in node:
                if chordal(r, u) <= tol:
                    raise GuardError("flex-collision", "flex collides with a node preimage")
    return tuple(roots)


def choose_flex(flex_params, u1: complex, u2: complex, margin: float = 1e-9) -> tuple[complex, str]:
    """Deterministic flex selection (see the module docstring for the rule)."""

    def w_of(phi):
        if is_inf(phi):
            return 1.0 + 0.0j
        return (phi - u1) / (phi - u2)

    ws = [w_of(phi) for phi in flex_params]
    rs = []
    for i in range(3):
        others = [ws[j] for j in range(3) if j != i]
        rs.append(ws[i] ** 2 / (others[0] * others[1]))

    def key(i):
        # primary: the scale-free invariant; ties (curves with a symmetry
        # permuting the flexes) break on w itself, which is injective in
        # the flex and still invariant under plane affine maps
        r, w = rs[i], ws[i]
        return (round(r.real, 9), round(r.imag, 9), w.real, w.imag)

    order = sorted(range(3), key=key)
    if abs(ws[order[0]] - ws[order[1]]) <= margin:
        raise GuardError("flex-choice-ambiguous", "tie in the flex selection invariant")
    return (
        flex_params[order[0]],
        "lex-min (Re, Im) of w_i^2/(w_j w_k), ties by (Re, Im) of w_i, w = (flex - u1)/(flex - u2)",
    )


# ---------------------------------------------------------------------------
# residue normalization
# ---------------------------------------------------------------------------


def residue_at_node_preimage(gamma: CubicMap, f: TernaryCubic, u: complex) -> complex:
    """Residue at t = u of the pulled-back residue form of (dx^dy)/f.

    alpha(d/dt) = (X'W - XW') / F_Y(gamma)  with the chart-swapped formula
    -(Y'W - YW') / F_X(gamma) used when better conditioned; the pole is
    simple so the residue is a ratio of a value and a derivative.
    """
    den_y = _partial_composed(gamma, f, var=1)
    den_x = _partial_composed(gamma, f, var=0)
    dy, dx = den_y.derivative()(u), den_x.derivative()(u)
    scale_y, scale_x = abs(dy), abs(dx)
    if max(scale_y, scale_x) == 0.0:
        raise GuardError("residue-degenerate", "residue form denominator is stationary at the node preimage")
    if scale_y >= scale_x:
        if abs(den_y(u)) > 1e-6 * scale_y * max(1.0, abs(u)):
            raise GuardError("residue-degenerate", "denominator does not vanish at the node preimage")
        return gamma.nx(u) / dy
    if abs(den_x(u)) > 1e-6 * scale_x * max(1.0, abs(u)):
        raise GuardError("residue-degenerate", "denominator does not vanish at the node preimage")
    return -gamma.ny(u) / dx


def _partial_composed(gamma: CubicMap, f: TernaryCubic, var: int) -> Poly:
    out = Poly([0.0])
    powers = {
        0: [Poly([1.0]), gamma.x, gamma.x * gamma.x, gamma.x * gamma.x * gamma.x],
        1: [Poly([1.0]), gamma.y, gamma.y * gamma.y, gamma.y * gamma.y * gamma.y],
        2: [Poly([1.0]), gamma.w, gamma.w * gamma.w, gamma.w * gamma.w * gamma.w],
    }
    for (a, b, g), c in f.partial(var).items():
        out = out + c * (powers[0][a] * powers[1][b] * powers[2][g])
    return out


def normalize_residue(gamma: CubicMap, f: TernaryCubic, u_first: complex) -> TernaryCubic:
    """Scale f so the residue at the designated node preimage is exactly one.

    Idempotent: normalizing an already normalized form reproduces it, and
    any prior rescaling of f is absorbed.
    """
    rho = residue_at_node_preimage(gamma, f, u_first)
    if abs(rho) < 1e-14:
        raise GuardError("residue-degenerate", "vanishing residue at the node preimage")
    return f.scaled(rho)


# ---------------------------------------------------------------------------
# the nodal cubic bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodalCubic:
    """A parametrized nodal cubic with all derived choices attached.

    node is the ordered pair of node preimages (the residue normalization
    points at the first); flex_params are all three flexes; psi the chosen
    one; tau the coordinate with (node_1, node_2, psi) at (0, INF, 1).
    """

    gamma: CubicMap
    node: tuple[complex, complex]
    f: TernaryCubic
    flex_params: tuple[complex, complex, complex]
    psi: complex
    flex_rule: str
    tau: Mobius

    @property
    def node_point(self) -> np.ndarray:
        return self.gamma.affine(self.node[0])

    def v_scale_poly(self) -> Poly:
        """V(t) with v = V(t) d/dt for the reference field (tau-1)^2 d/dtau."""
        (a, b), (c, d) = self.tau.m
        det = a * d - b * c
        return Poly([b - d, a - c]) ** 2 * (1.0 / det)

    def vpush(self, t: complex) -> np.ndarray:
        """Pushforward of the reference field to the plane at parameter t."""
        return complex(self.v_scale_poly()(t)) * self.gamma.affine_derivative(t)

    def f_value(self, point: np.ndarray) -> complex:
        return self.f.affine(complex(point[0]), complex(point[1]))


def nodal_cubic(
    gamma: CubicMap,
    node: tuple[complex, complex] | None = None,
    swap_node_order: bool = False,
    tol: Tolerances = DEFAULT_TOL,
) -> NodalCubic:
    """Assemble the full cubic bundle from a parametrization.

    When ``node`` is supplied it is verified rather than searched for.
    All genericity guards live here: exactly one node with transverse
    branches, an immersed parametrization, three distinct flexes, a clean
    residue.
    """
    u1, u2 = node if node is not None else find_node(gamma)
    if swap_node_order:
        u1, u2 = u2, u1
    gu, gv = gamma.hom(u1), gamma.hom(u2)
    cross = np.linalg.norm(np.cross(gu, gv)) / (np.linalg.norm(gu) * np.linalg.norm(gv))
    if cross > 1e-7:
        raise GuardError("node-mismatch", "claimed node parameters have different images")
    if chordal(u1, u2) <= 1e-7:
        raise GuardError("node-mismatch", "node preimages coincide")
    for u in (u1, u2):
        if abs(gamma.w(u)) <= 1e-9 * np.linalg.norm(gamma.hom(u)):
            raise GuardError("point-at-infinity", "node sits on the line at infinity")
    d1, d2 = gamma.affine_derivative(u1), gamma.affine_derivative(u2)
    denom = np.linalg.norm(d1) * np.linalg.norm(d2)
    if denom == 0.0 or abs(d1[0] * d2[1] - d1[1] * d2[0]) <= tol.guard_margin * denom:
        raise GuardError("node-tangential", "node branches are not transverse")

    f_raw = implicitize(gamma)
    # the gradient must vanish at the node image (it is the singular point)
    gx, gy, gw = f_raw.gradient(*(gamma.hom(u1) / np.linalg.norm(gamma.hom(u1))))
    grad_scale = f_raw.norm()
    if max(abs(gx), abs(gy), abs(gw)) > 1e-5 * grad_scale:
        raise GuardError("node-mismatch", "implicit gradient does not vanish at the node")

    f = normalize_residue(gamma, f_raw, u1)
    flex = flexes(gamma, node=(u1, u2))
    psi, rule = choose_flex(flex, u1, u2)
    tau = mobius_from_triple(u1, u2, psi)
    return NodalCubic(gamma=gamma, node=(u1, u2), f=f, flex_params=flex, psi=psi, flex_rule=rule, tau=tau)


# ---------------------------------------------------------------------------
# intersections
# ---------------------------------------------------------------------------


def intersect(p: NodalCubic, q: NodalCubic, tol: Tolerances = DEFAULT_TOL) -> tuple[tuple[complex, complex], ...]:
    """The nine intersection parameter pairs (t on P, s on Q).

    Roots of f_Q(gamma_P(t)) matched against roots of f_P(gamma_Q(s)) by
    nearest image point.  Bezout gives nine with multiplicity; clustered
    roots (tangencies) and ambiguous matchings are rejections, not
    warnings.
    """
    fq_on_p = q.f.compose_map(p.gamma.x, p.gamma.y, p.gamma.w).trim(rel=1e-12)
    fp_on_q = p.f.compose_map(q.gamma.x, q.gamma.y, q.gamma.w).trim(rel=1e-12)
    if fq_on_p.degree != 9 or fp_on_q.degree != 9:
        raise GuardError("infinity-intersection", "an intersection point sits at the infinite parameter")
    ts = poly_roots(fq_on_p, tol=tol.root_residual)
    ss = poly_roots(fp_on_q, tol=tol.root_residual)
    if any(m > 1 for _, m in ts) or any(m > 1 for _, m in ss) or len(ts) != 9 or len(ss) != 9:
        raise GuardError("tangency", "clustered intersection parameters (tangential pair)")
    pts_p = [p.gamma.affine(t) for t, _ in ts]
    pts_q = [q.gamma.affine(s) for s, _ in ss]
    pairs = []
    used = set()
    for i, xp in enumerate(pts_p):
        dists = sorted((float(np.linalg.norm(xp - xq)), j) for j, xq in enumerate(pts_q))
        best, jbest = dists[0]
        second = dists[1][0]
        scale = max(1.0, float(np.linalg.norm(xp)))
        if best > 1e-7 * scale:
            raise GuardError("intersection-match", "intersection images do not match across the two sides")
        if second < 10 * best + 1e-12 * scale:
            raise GuardError("intersection-match", "ambiguous intersection matching")
        if jbest in used:
            raise GuardError("intersection-match", "two parameters matched the same image")
        used.add(jbest)
        pairs.append((ts[i][0], ss[jbest][0]))
    pairs.sort(key=lambda ts_pair: (ts_pair[0].real, ts_pair[0].imag))
    return tuple(pairs)


# ---------------------------------------------------------------------------
# constructs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Construct:
    """Two nodal cubics plus all discrete choices, fully validated.

    Marks on the P parameter line: node preimages (p1, p2) and the chosen
    intersection preimage p3.  phi is the identification of the two
    parameter lines with phi(p1) = q2, phi(p2) = q3, phi(p3) = q1; n_p and
    n_q are tau_P(p3) and tau_Q(q3).  b is an extra marked parameter on P.
    """

    p: NodalCubic
    q: NodalCubic
    intersections: tuple[tuple[complex, complex], ...]
    n_index: int
    b_param: complex
    phi: Mobius
    n_p: complex
    n_q: complex
    tau_b: complex
    seed: int | None = None

    @property
    def t_p1(self) -> complex:
        return self.p.node[0]

    @property
    def t_p2(self) -> complex:
        return self.p.node[1]

    @property
    def t_p3(self) -> complex:
        return self.intersections[self.n_index][0]

    @property
    def s_q1(self) -> complex:
        return self.q.node[0]

    @property
    def s_q2(self) -> complex:
        return self.q.node[1]

    @property
    def s_q3(self) -> complex:
        return self.intersections[self.n_index][1]

    @property
    def n_point(self) -> np.ndarray:
        return self.p.gamma.affine(self.t_p3)

    @property
    def b_point(self) -> np.ndarray:
        return self.p.gamma.affine(self.b_param)

    def marks_p(self) -> tuple[complex, complex, complex]:
        return (self.t_p1, self.t_p2, self.t_p3)


def omega(v: np.ndarray, w: np.ndarray) -> complex:
    """The fixed area form dx ^ dy on pushed-forward tangent vectors."""
    return complex(v[0] * w[1] - v[1] * w[0])


def make_construct(
    p: NodalCubic,
    q: NodalCubic,
    n_index: int,
    b_param: complex,
    tol: Tolerances = DEFAULT_TOL,
    seed: int | None = None,
    precomputed_intersections: tuple | None = None,
) -> Construct:
    """Assemble and guard a construct.

    Guards (each one a named rejection): neither cubic through the other's
    node; nine transverse intersections; the two nodes and the chosen
    intersection not collinear; b off the special points; the tau-line
    marks well separated so the reference fields stay nonzero where they
    are evaluated.

    ``precomputed_intersections`` skips the root solve when the caller has
    already intersected exactly this pair (family rebuilds do).
    """
    inters = precomputed_intersections if precomputed_intersections is not None else intersect(p, q, tol)
    if not (0 <= n_index < 9):
        raise ValidationError("intersection index out of range")
    t3, s3 = inters[n_index]

    p_n = p.node_point
    q_n = q.node_point
    fq_pn = q.f_value(p_n)
    fp_qn = p.f_value(q_n)
    scale_q = q.f.norm() * max(1.0, float(np.linalg.norm(p_n))) ** 3
    scale_p = p.f.norm() * max(1.0, float(np.linalg.norm(q_n))) ** 3
    if abs(fq_pn) <= tol.guard_margin * scale_q:
        raise GuardError("node-on-curve", "the second cubic passes through the node of the first")
    if abs(fp_qn) <= tol.guard_margin * scale_p:
        raise GuardError("node-on-curve", "the first cubic passes through the node of the second")

    n_pt = p.gamma.affine(t3)
    d1 = q_n - p_n
    d2 = n_pt - p_n
    denom = float(np.linalg.norm(d1) * np.linalg.norm(d2))
    if denom == 0.0 or abs(d1[0] * d2[1] - d1[1] * d2[0]) <= tol.guard_margin * denom:
        raise GuardError("collinear-markers", "the two nodes and the chosen intersection lie on a line (outside the open locus)")

    for special, name in ((p.node[0], "p1"), (p.node[1], "p2"), (t3, "p3")):
        if chordal(b_param, special) <= 1e-5:
            raise GuardError("b-collision", f"extra point b collides with {name}")

    phi = _identification(p, q, t3, s3)
    n_p = p.tau(t3)
    n_q = q.tau(s3)
    tau_b = p.tau(b_param)
    for val, name in ((n_p, "n_p"), (n_q, "n_q")):
        for bad in (0.0, 1.0, INF):
            if chordal(val, bad) <= 1e-3:
                raise GuardError("marks-degenerate", f"{name} too close to {bad}")
    if chordal(2 * n_p, 0.0) <= 1e-3 or chordal(2 * n_p, 1.0) <= 1e-3:
        raise GuardError("marks-degenerate", "auxiliary pole of the vanishing scale collides with a mark")
    for bad in (0.0, 1.0, INF, n_p):
        if chordal(tau_b, bad) <= 1e-3:
            raise GuardError("b-collision", "tau(b) too close to a mark")

    # reference fields must be nonzero at every evaluation point
    for cubic, params in ((p, [p.node[0], p.node[1], t3]), (q, [q.node[0], q.node[1], s3])):
        for t in params:
            if float(np.linalg.norm(cubic.vpush(t))) <= 1e-9:
                raise GuardError("reference-field-zero", "vanishing reference field at a marked point")
        for t in params:
            if abs(cubic.gamma.w(t)) <= 1e-6 * float(np.linalg.norm(cubic.gamma.hom(t))):
                raise GuardError("point-at-infinity", "a marked point sits near the line at infinity")

    return Construct(
        p=p, q=q, intersections=inters, n_index=n_index, b_param=b_param,
        phi=phi, n_p=n_p, n_q=n_q, tau_b=tau_b, seed=seed,
    )


def _identification(p: NodalCubic, q: NodalCubic, t3: complex, s3: complex) -> Mobius:
    """phi with phi(p1) = q2, phi(p2) = q3, phi(p3) = q1, on parameter lines."""
    mp = mobius_from_triple(p.node[0], p.node[1], t3)
    mq = mobius_from_triple(q.node[1], s3, q.node[0])
    return mq.inverse().compose(mp)


# ---------------------------------------------------------------------------
# random constructs
# ---------------------------------------------------------------------------


def _node_poly_basis(u1: complex, u2: complex, lam: complex) -> tuple[Poly, Poly, Poly]:
    """Basis of the cubics p with p(u1) = lam * p(u2).

    q1 and t*q1 vanish at both parameters; the linear member takes values
    (lam, 1).  The scale lam is an honest modulus: on the lam = 1 slice
    the inflection form provably drops degree (a flex parks at the
    infinite parameter), so generic sampling must draw it too.
    """
    q1 = poly_from_roots([u1, u2])
    beta = (lam - 1.0) / (u1 - u2)
    alpha = lam - beta * u1
    return Poly([alpha, beta]), q1, q1 * Poly([0.0, 1.0])


def _random_nodal_cubic(rng: np.random.Generator, tol: Tolerances) -> NodalCubic:
    """Sample a nodal cubic with its node placed by construction.

    Coordinates are drawn from the three-dimensional space of cubics whose
    values at the two chosen node parameters differ by a fixed random
    projective scale, so gamma(u1) is parallel to gamma(u2) by linear
    algebra and no root search is needed.
    """
    for _ in range(40):
        angle = rng.uniform(0, 2 * np.pi, size=2)
        rad = rng.uniform(0.6, 1.4, size=2)
        u1 = rad[0] * np.exp(1j * angle[0])
        u2 = rad[1] * np.exp(1j * angle[1])
        if chordal(u1, u2) < 0.2:
            continue
        lam = np.exp(0.7 * (rng.standard_normal() + 1j * rng.standard_normal()))
        if abs(lam - 1.0) < 0.2:
            continue
        basis = _node_poly_basis(complex(u1), complex(u2), complex(lam))
        coefs = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        comps = []
        for r in range(3):
            acc = Poly([0.0])
            for c, b in zip(coefs[r], basis):
                acc = acc + c * b
            comps.append(acc)
        gamma = CubicMap(*comps)
        try:
            cubic = nodal_cubic(gamma, node=(complex(u1), complex(u2)), tol=tol)
        except GuardError:
            continue
        if any(is_inf(f) or abs(f) > 1e3 for f in cubic.flex_params):
            continue
        return cubic
    raise GuardError("sampling-exhausted", "could not sample a generic nodal cubic")


def random_construct(seed: int, tol: Tolerances = DEFAULT_TOL, max_attempts: int = 60) -> Construct:
    """Rejection-sample a valid construct from a seeded generator."""
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        try:
            p = _random_nodal_cubic(rng, tol)
            q = _random_nodal_cubic(rng, tol)
            inters = intersect(p, q, tol)
        except GuardError:
            continue
        # prefer the intersection with the healthiest collinearity margin
        p_n, q_n = p.node_point, q.node_point
        d1 = q_n - p_n

        def margin(k: int) -> float:
            n_pt = p.gamma.affine(inters[k][0])
            d2 = n_pt - p_n
            dd = float(np.linalg.norm(d1) * np.linalg.norm(d2))
            return abs(d1[0] * d2[1] - d1[1] * d2[0]) / dd if dd else 0.0

        order = sorted(range(9), key=margin, reverse=True)
        for n_index in order[:3]:
            for _ in range(6):
                b = complex(rng.standard_normal() + 1j * rng.standard_normal()) * 1.1
                try:
                    return make_construct(p, q, n_index, b, tol, seed=seed)
                except GuardError:
                    continue
    raise GuardError("sampling-exhausted", f"no valid construct after {max_attempts} attempts (seed {seed})")


# ---------------------------------------------------------------------------
# affine families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineMapPlane:
    """Affine map of the plane, linear part plus shift."""

    linear: tuple[tuple[complex, complex], tuple[complex, complex]]
    shift: tuple[complex, complex]

    def matrix(self) -> np.ndarray:
        return np.asarray(self.linear, dtype=complex)

    def __call__(self, pt: np.ndarray) -> np.ndarray:
        return self.matrix() @ np.asarray(pt, dtype=complex) + np.asarray(self.shift, dtype=complex)

    def homogeneous(self) -> np.ndarray:
        m = self.matrix()
        s = np.asarray(self.shift, dtype=complex)
        return np.array([[m[0, 0], m[0, 1], s[0]], [m[1, 0], m[1, 1], s[1]], [0, 0, 1]], dtype=complex)

    def inverse(self) -> "AffineMapPlane":
        m = np.linalg.inv(self.matrix())
        s = -m @ np.asarray(self.shift, dtype=complex)
        return AffineMapPlane(((m[0, 0], m[0, 1]), (m[1, 0], m[1, 1])), (s[0], s[1]))

    def det(self) -> complex:
        m = self.matrix()
        return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


@dataclass(frozen=True)
class AffineFamilyDirection:
    """One-parameter family of affine maps fixing two prescribed points.

    The generator is the rank-one nilpotent x -> d <d_perp, x - base>,
    with d the vector from the base point to the second fixed point; the
    exponential is then exactly I + eps * generator, volume preserving,
    and both fixed points are fixed by construction (linear algebra, not
    optimization).  side names the cubic the family moves.
    """

    side: str                      # 'P' or 'Q'
    base: tuple[complex, complex]  # the intersection point n
    through: tuple[complex, complex]  # the other fixed point

    def map_at(self, eps: complex) -> AffineMapPlane:
        n = np.asarray(self.base, dtype=complex)
        d = np.asarray(self.through, dtype=complex) - n
        perp = np.array([-d[1], d[0]], dtype=complex)
        m = np.eye(2, dtype=complex) + eps * np.outer(d, perp)
        shift = -eps * np.outer(d, perp) @ n
        return AffineMapPlane(((m[0, 0], m[0, 1]), (m[1, 0], m[1, 1])), (shift[0], shift[1]))

    def generator_at(self, pt: np.ndarray) -> np.ndarray:
        n = np.asarray(self.base, dtype=complex)
        d = np.asarray(self.through, dtype=complex) - n
        perp = np.array([-d[1], d[0]], dtype=complex)
        return d * complex(perp @ (np.asarray(pt, dtype=complex) - n))


def affine_direction(c: Construct, side: str) -> AffineFamilyDirection:
    """The family direction used by the rank and surjectivity tests.

    Moving Q fixes the intersection n and the node of P; moving P fixes n
    and the node of Q.  With these choices the moved node crosses the
    level sets of the other cubic transversely exactly when the three
    markers are not collinear, which the construct guards guarantee.
    """
    if side not in ("P", "Q"):
        raise ValidationError("side must be 'P' or 'Q'")
    n_pt = c.n_point
    fixed = c.p.node_point if side == "Q" else c.q.node_point
    return AffineFamilyDirection(side=side, base=(complex(n_pt[0]), complex(n_pt[1])), through=(complex(fixed[0]), complex(fixed[1])))


def transport_cubic(cubic: NodalCubic, a: AffineMapPlane) -> NodalCubic:
    """Move a nodal cubic by a plane affine map, exactly on coefficients.

    The parametrization composes with the map; the implicit form composes
    with the inverse and is then residue-renormalized (a no-op for volume
    preserving maps, an exact scale fix otherwise).  Node parameters and
    flex parameters are untouched by construction; flexes are re-derived
    and matched as an assertion.
    """
    g2 = cubic.gamma.transformed(a.homogeneous())
    f2 = cubic.f.compose_linear(a.inverse().homogeneous())
    f2 = normalize_residue(g2, f2, cubic.node[0])
    flex2 = flexes(g2, node=cubic.node)
    psi2 = None
    for phi in flex2:
        if chordal(phi, cubic.psi) <= 1e-6:
            psi2 = phi
            break
    if psi2 is None:
        raise GuardError("flex-tracking", "flex parameters moved under an affine transport")
    tau2 = mobius_from_triple(cubic.node[0], cubic.node[1], psi2)
    return NodalCubic(
        gamma=g2, node=cubic.node, f=f2, flex_params=flex2, psi=psi2,
        flex_rule=cubic.flex_rule, tau=tau2,
    )


def _rebuild_after_move(c: Construct, p2: NodalCubic, q2: NodalCubic, b2: complex, drift_tol: float) -> Construct:
    inters = intersect(p2, q2)
    n_old = c.n_point
    dists = sorted((float(np.linalg.norm(p2.gamma.affine(t) - n_old)), k) for k, (t, _) in enumerate(inters))
    best, kbest = dists[0]
    if best > 1e-6 * max(1.0, float(np.linalg.norm(n_old))) or dists[1][0] < 10 * best:
        raise GuardError("intersection-match", "could not re-identify the chosen intersection after the move")
    out = make_construct(p2, q2, kbest, b2, seed=c.seed, precomputed_intersections=inters)
    if chordal(out.n_p, c.n_p) > drift_tol or chordal(out.n_q, c.n_q) > drift_tol:
        raise GuardError("marks-drift", "n_p or n_q drifted along an affine family")
    return out


def affine_family(c: Construct, direction: AffineFamilyDirection, eps: complex, drift_tol: float = 1e-8) -> Construct:
    """Member of the affine family at parameter eps.

    Moves one cubic (and b with it when P moves), re-derives intersections
    and re-matches the chosen one by nearest image; n_p and n_q are
    asserted unchanged up to drift_tol, since the identification point is
    fixed and all special parameters transport with the curve.
    """
    a = direction.map_at(eps)
    if direction.side == "Q":
        return _rebuild_after_move(c, c.p, transport_cubic(c.q, a), c.b_param, drift_tol)
    return _rebuild_after_move(c, transport_cubic(c.p, a), c.q, c.b_param, drift_tol)


def transport_construct(c: Construct, a: AffineMapPlane) -> Construct:
    """Apply one affine map to the whole construct (both cubics and b)."""
    p2 = transport_cubic(c.p, a)
    q2 = transport_cubic(c.q, a)
    inters = intersect(p2, q2)
    n_new = a(c.n_point)
    dists = sorted((float(np.linalg.norm(p2.gamma.affine(t) - n_new)), k) for k, (t, _) in enumerate(inters))
    best, kbest = dists[0]
    if best > 1e-6 * max(1.0, float(np.linalg.norm(n_new))):
        raise GuardError("intersection-match", "intersection tracking failed under whole-plane transport")
    return make_construct(p2, q2, kbest, c.b_param, seed=c.seed, precomputed_intersections=inters)
