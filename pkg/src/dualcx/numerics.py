"""Complex-arithmetic kernels: polynomials, Moebius maps, divisors, Jacobians.

Conventions fixed here and relied on everywhere else:

* Points of the projective line are ordinary complex numbers together with
  the sentinel ``INF`` for the point at infinity.  Infinity is always
  handled through an explicit second chart (coefficient reversal for
  polynomials, matrix entries for Moebius maps), never through a large
  finite proxy.
* ``Poly`` stores coefficients in ascending order, ``p(t) = sum c_k t^k``.
* Root finding is simultaneous Aberth-Ehrlich iteration with deterministic
  initial guesses on a perturbed circle.  A root is accepted only when its
  backward error ``|p(z)| <= tol * sum |c_k| |z|^k`` is met; non-convergence
  raises, it is never silent.
* All default tolerances live in :class:`Tolerances` and may be overridden
  per call.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GuardError, RootFindingError, ValidationError

INF = complex(float("inf"), 0.0)

MAX_POLY_DEGREE = 64


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


def chordal(z: complex, w: complex) -> float:
    """Chordal metric on the Riemann sphere, with ``INF`` supported."""
    if is_inf(z) and is_inf(w):
        return 0.0
    if is_inf(z):
        return 1.0 / abs(cmath.sqrt(1.0 + abs(w) ** 2))
    if is_inf(w):
        return 1.0 / abs(cmath.sqrt(1.0 + abs(z) ** 2))
    return abs(z - w) / (abs(cmath.sqrt(1.0 + abs(z) ** 2)) * abs(cmath.sqrt(1.0 + abs(w) ** 2)))


@dataclass(frozen=True)
class Tolerances:
    """Default numeric policy.

    root_residual : relative backward error accepted by the root finder.
    cluster_radius : radius (chordal) used to merge root clusters and to
        match divisor points.
    rank_tol : singular values below ``rank_tol * sigma_max`` count as zero.
    mobius_det_floor : minimal determinant modulus after unit normalization.
    guard_margin : relative margin for genericity guards on constructs.
    fd_step : default finite-difference step.
    """

    root_residual: float = 1e-11
    cluster_radius: float = 1e-7
    rank_tol: float = 1e-6
    mobius_det_floor: float = 1e-12
    guard_margin: float = 1e-6
    fd_step: float = 1e-5

    def with_overrides(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT_TOL = Tolerances()


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Dense univariate polynomial over the complex numbers.

    Coefficients ascend: ``Poly([a0, a1, a2])`` is ``a0 + a1 t + a2 t^2``.
    Trailing coefficients that are negligible relative to the largest one
    can be dropped with :meth:`trim`; arithmetic never trims silently.
    """

    __slots__ = ("coef",)

    def __init__(self, coef):
        arr = np.atleast_1d(np.asarray(coef, dtype=complex))
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("polynomial needs a 1-d nonempty coefficient list")
        if arr.size - 1 > MAX_POLY_DEGREE:
            raise ValidationError(f"degree {arr.size - 1} exceeds supported maximum {MAX_POLY_DEGREE}")
        self.coef = arr

    # -- basic structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree of the stored coefficient vector (no trimming applied)."""
        return len(self.coef) - 1

    def trim(self, rel: float = 1e-13) -> "Poly":
        scale = float(np.max(np.abs(self.coef)))
        if scale == 0.0:
            return Poly([0.0])
        c = self.coef.copy()
        k = len(c)
        while k > 1 and abs(c[k - 1]) <= rel * scale:
            k -= 1
        return Poly(c[:k])

    def is_zero(self, rel: float = 1e-13) -> bool:
        return bool(np.all(np.abs(self.coef) <= rel * max(1.0, float(np.max(np.abs(self.coef)))))) or float(
            np.max(np.abs(self.coef))
        ) == 0.0

    def __call__(self, t: complex):
        if is_inf(t):
            raise ValidationError("evaluate the reversed polynomial for the infinite chart")
        return complex(np.polynomial.polynomial.polyval(t, self.coef))

    def eval_many(self, ts) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(ts, dtype=complex), self.coef)

    def reversed(self) -> "Poly":
        """Chart swap t -> 1/t: coefficients in reverse order."""
        return Poly(self.coef[::-1])

    def derivative(self) -> "Poly":
        if len(self.coef) == 1:
            return Poly([0.0])
        k = np.arange(1, len(self.coef))
        return Poly(self.coef[1:] * k)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> "Poly":
        other = other if isinstance(other, Poly) else Poly([other])
        n = max(len(self.coef), len(other.coef))
        a = np.zeros(n, dtype=complex)
        a[: len(self.coef)] += self.coef
        a[: len(other.coef)] += other.coef
        return Poly(a)

    def __neg__(self) -> "Poly":
        return Poly(-self.coef)

    def __sub__(self, other) -> "Poly":
        return self + (-(other if isinstance(other, Poly) else Poly([other])))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            return Poly(np.convolve(self.coef, other.coef))
        return Poly(self.coef * other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValidationError("negative polynomial power")
        out = Poly([1.0])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def deflate(self, root: complex) -> "Poly":
        """Synthetic division by (t - root); remainder discarded."""
        c = self.coef
        n = len(c) - 1
        if n < 1:
            raise ValidationError("cannot deflate a constant")
        out = np.zeros(n, dtype=complex)
        acc = c[n]
        for k in range(n - 1, -1, -1):
            out[k] = acc
            acc = c[k] + acc * root
        return Poly(out)

    def __repr__(self) -> str:
        return f"Poly({np.array2string(self.coef, precision=6)})"


def poly_from_roots(roots, leading: complex = 1.0) -> Poly:
    out = Poly([leading])
    for r in roots:
        out = out * Poly([-r, 1.0])
    return out


def _backward_errors(coef_abs: np.ndarray, z: np.ndarray, pz: np.ndarray) -> np.ndarray:
    az = np.abs(z)
    scale = np.zeros_like(az)
    for k in range(len(coef_abs)):
        scale += coef_abs[k] * az**k
    scale = np.maximum(scale, np.max(coef_abs) * 1e-30)
    return np.abs(pz) / scale


def aberth_roots(p: Poly, tol: float | None = None, max_iter: int = 400) -> list[complex]:
    """All complex roots of ``p`` by Aberth-Ehrlich simultaneous iteration.

    Returns a plain list of ``degree`` roots (multiplicities appear as
    clusters; see :func:`poly_roots` for merged output).  Initialization is
    deterministic: equispaced points on a circle of Cauchy-bound radius,
    rotated by a fixed irrational angle so symmetric inputs do not stall.
    """
    tol = DEFAULT_TOL.root_residual if tol is None else tol
    q = p.trim()
    n = q.degree
    if n < 1:
        raise ValidationError("root finding needs degree >= 1")

    # exact zero roots peel off first; improves conditioning of the rest
    zero_mult = 0
    c = q.coef
    while zero_mult < n and c[zero_mult] == 0:
        zero_mult += 1
    roots: list[complex] = [0.0 + 0.0j] * zero_mult
    if zero_mult:
        q = Poly(c[zero_mult:])
        n = q.degree
        if n == 0:
            return roots

    coef = q.coef
    an = coef[-1]
    radius = 1.0 + float(np.max(np.abs(coef[:-1] / an))) if n >= 1 else 1.0
    ks = np.arange(n)
    z = radius * np.exp(2j * np.pi * (ks + 0.25) / n + 0.376991j)
    # slight radial stagger to break residual symmetries deterministically
    z *= 1.0 + 0.01 * ((ks % 7) - 3) / 7.0

    dq = q.derivative()
    coef_abs = np.abs(coef)
    polish = 0
    for _ in range(max_iter):
        pz = q.eval_many(z)
        converged = np.max(_backward_errors(coef_abs, z, pz)) <= tol
        if converged:
            # keep iterating a while: clusters around multiple roots tighten
            # linearly after the backward-error target is already met
            polish += 1
            if polish > 48:
                return roots + [complex(v) for v in z]
        dpz = dq.eval_many(z)
        # Newton correction with Aberth repulsion
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(dpz != 0, pz / np.where(dpz == 0, 1, dpz), 0.1 + 0.1j)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            denom = 1.0 - newton * s
            step = np.where(np.abs(denom) > 1e-300, newton / np.where(denom == 0, 1, denom), newton)
        bad = ~np.isfinite(step)
        if np.any(bad):
            step = np.where(bad, 0.1 * radius * np.exp(1j * ks), step)
        nz = z - step
        if converged and np.max(np.abs(step) / (1.0 + np.abs(z))) <= 1e-15:
            return roots + [complex(v) for v in nz]
        z = nz
    pz = q.eval_many(z)
    if np.max(_backward_errors(coef_abs, z, pz)) <= tol:
        return roots + [complex(v) for v in z]
    raise RootFindingError(f"Aberth iteration did not converge within {max_iter} iterations (degree {q.degree})")


def cluster_points(points: list[complex], radius: float) -> list[tuple[complex, int]]:
    """Greedy union of points at pairwise chordal distance <= radius.

    Returns (representative, count) pairs; the representative is the mean of
    the finite members (or ``INF`` for an infinite cluster).
    """
    remaining = list(points)
    out: list[tuple[complex, int]] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        changed = True
        while changed:
            changed = False
            keep = []
            for w in remaining:
                if any(chordal(w, m) <= radius for m in members):
                    members.append(w)
                    changed = True
                else:
                    keep.append(w)
            remaining = keep
        if any(is_inf(m) for m in members):
            rep = INF
        else:
            rep = complex(np.mean(np.asarray(members)))
        out.append((rep, len(members)))
    return out


def _merge_radius(size: int, base: float) -> float:
    # an m-fold root computed in double precision scatters like eps**(1/m)
    return max(base, 5.0 * (1e-14) ** (1.0 / size))


def _largest_gap_split(points: list[complex]) -> tuple[list[complex], list[complex]]:
    """Cut the complete chordal graph at the longest MST edge (Prim)."""
    n = len(points)
    in_tree = [0]
    best_edge = (0.0, 0, 1)
    dist = [(chordal(points[0], points[k]), 0) for k in range(n)]
    edges = []
    while len(in_tree) < n:
        cand = min((dist[k][0], k) for k in range(n) if k not in in_tree)
        d, k = cand
        edges.append((d, dist[k][1], k))
        in_tree.append(k)
        for j in range(n):
            if j not in in_tree and chordal(points[k], points[j]) < dist[j][0]:
                dist[j] = (chordal(points[k], points[j]), k)
    cut = max(edges)
    # remove the cut edge; components of the remaining forest
    adj = {k: set() for k in range(n)}
    for d, a, b in edges:
        if (d, a, b) != cut:
            adj[a].add(b)
            adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    left = [points[k] for k in range(n) if k in seen]
    right = [points[k] for k in range(n) if k not in seen]
    return left, right


def _cluster_adaptive(points: list[complex], base: float) -> list[tuple[complex, int]]:
    if len(points) == 1:
        return [(points[0], 1)]
    diam = max(chordal(a, b) for a in points for b in points)
    if diam <= _merge_radius(len(points), base):
        if any(is_inf(p) for p in points):
            return [(INF, len(points))]
        return [(complex(np.mean(np.asarray(points))), len(points))]
    left, right = _largest_gap_split(points)
    if not left or not right:  # degenerate split; fall back to fixed radius
        return cluster_points(points, base)
    return _cluster_adaptive(left, base) + _cluster_adaptive(right, base)


def poly_roots(p: Poly, tol: float | None = None, cluster_radius: float | None = None) -> list[tuple[complex, int]]:
    """Root multiset of ``p``: list of (root, multiplicity).

    Clusters merge adaptively: a set of m approximants counts as one m-fold
    root only when its diameter fits the ``eps**(1/m)`` accuracy an m-fold
    root admits in double precision; otherwise it is split at the largest
    single-linkage gap.
    """
    base = DEFAULT_TOL.cluster_radius if cluster_radius is None else cluster_radius
    raw = aberth_roots(p, tol=tol)
    return _cluster_adaptive(raw, base)


# ---------------------------------------------------------------------------
# Moebius transforms
# ---------------------------------------------------------------------------


class Mobius:
    """Invertible fractional-linear map of the projective line.

    Stored as a 2x2 complex matrix up to scale, normalized so the largest
    entry has modulus one.  Determinant modulus below the configured floor
    is rejected.
    """

    __slots__ = ("m",)

    def __init__(self, m, det_floor: float = DEFAULT_TOL.mobius_det_floor):
        mat = np.asarray(m, dtype=complex).reshape(2, 2)
        scale = float(np.max(np.abs(mat)))
        if scale == 0.0:
            raise ValidationError("zero Moebius matrix")
        mat = mat / scale
        if abs(np.linalg.det(mat)) < det_floor:
            raise ValidationError("Moebius matrix is numerically singular")
        self.m = mat

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    def __call__(self, z: complex) -> complex:
        (a, b), (c, d) = self.m
        if is_inf(z):
            return INF if c == 0 else a / c
        den = c * z + d
        if den == 0:
            return INF
        return (a * z + b) / den

    def inverse(self) -> "Mobius":
        (a, b), (c, d) = self.m
        return Mobius([[d, -b], [-c, a]])

    def compose(self, other: "Mobius") -> "Mobius":
        """self after other: (self.compose(other))(z) = self(other(z))."""
        return Mobius(self.m @ other.m)

    def derivative(self, z: complex) -> complex:
        """d(M)/dz at a finite point not at the pole."""
        (a, b), (c, d) = self.m
        if is_inf(z):
            raise ValidationError("use the reversed chart for the derivative at infinity")
        den = c * z + d
        if den == 0:
            raise ValidationError("derivative requested at the Moebius pole")
        return (a * d - b * c) / den**2

    def __repr__(self) -> str:
        return f"Mobius({np.array2string(self.m, precision=6)})"


def mobius_from_triple(a: complex, b: complex, c: complex, tol: float = 1e-12) -> Mobius:
    """The Moebius map sending (a, b, c) to (0, INF, 1).

    Any one of the three points may be ``INF``.  Coincident inputs (in the
    chordal metric) are rejected.
    """
    pts = [a, b, c]
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal(pts[i], pts[j]) <= tol:
                raise ValidationError("mobius_from_triple needs pairwise distinct points")
    if is_inf(a):
        return Mobius([[0.0, c - b], [1.0, -b]])
    if is_inf(b):
        return Mobius([[1.0, -a], [0.0, c - a]])
    if is_inf(c):
        return Mobius([[1.0, -a], [1.0, -b]])
    return Mobius([[c - b, -a * (c - b)], [c - a, -b * (c - a)]])


# ---------------------------------------------------------------------------
# divisors on the projective line
# ---------------------------------------------------------------------------


@dataclass
class Divisor:
    """Formal integer combination of points of the projective line.

    Points must be pairwise distinct at the clustering tolerance; use
    :meth:`merged` to enforce that after concatenations.
    """

    points: list[tuple[complex, int]] = field(default_factory=list)

    def degree(self) -> int:
        return sum(m for _, m in self.points)

    def __add__(self, other: "Divisor") -> "Divisor":
        return Divisor(self.points + other.points)

    def __neg__(self) -> "Divisor":
        return Divisor([(z, -m) for z, m in self.points])

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def scaled(self, k: int) -> "Divisor":
        return Divisor([(z, k * m) for z, m in self.points])

    def merged(self, radius: float = DEFAULT_TOL.cluster_radius) -> "Divisor":
        """Merge nearby points, summing multiplicities; drop zeros."""
        out: list[tuple[complex, list[tuple[complex, int]]]] = []
        for z, m in self.points:
            for k, (rep, members) in enumerate(out):
                if chordal(z, rep) <= radius:
                    members.append((z, m))
                    break
            else:
                out.append((z, [(z, m)]))
        merged = []
        for rep, members in out:
            total = sum(m for _, m in members)
            if total == 0:
                continue
            finite = [z for z, _ in members if not is_inf(z)]
            if len(finite) == len(members):
                rep = complex(np.mean(np.asarray(finite)))
            else:
                rep = INF
            merged.append((rep, total))
        return Divisor(merged)

    def multiplicity_at(self, z: complex, radius: float = DEFAULT_TOL.cluster_radius) -> int:
        return sum(m for w, m in self.points if chordal(w, z) <= radius)

    def split_at(self, marks: list[complex], radius: float = DEFAULT_TOL.cluster_radius) -> tuple[list[int], "Divisor"]:
        """(multiplicities at the marks, remainder divisor off the marks)."""
        mults = [0] * len(marks)
        off: list[tuple[complex, int]] = []
        for z, m in self.merged(radius).points:
            for i, mk in enumerate(marks):
                if chordal(z, mk) <= radius:
                    mults[i] += m
                    break
            else:
                off.append((z, m))
        return mults, Divisor(off)


def rational_divisor(num: Poly, den: Poly, tol: float | None = None, cluster_radius: float | None = None) -> Divisor:
    """Divisor of the rational function num/den, infinity by degree deficit.

    Zeros of numerator and denominator are found separately and cancelled
    cluster-wise, so common factors (up to the root-finder accuracy) drop
    out.  The result always has total degree zero.
    """
    cluster_radius = DEFAULT_TOL.cluster_radius if cluster_radius is None else cluster_radius
    num = num.trim()
    den = den.trim()
    if num.is_zero() or den.is_zero():
        raise ValidationError("rational_divisor needs nonzero numerator and denominator")
    pts: list[tuple[complex, int]] = []
    if num.degree >= 1:
        pts += [(z, m) for z, m in poly_roots(num, tol=tol, cluster_radius=cluster_radius)]
    if den.degree >= 1:
        pts += [(z, -m) for z, m in poly_roots(den, tol=tol, cluster_radius=cluster_radius)]
    pts.append((INF, den.degree - num.degree))
    div = Divisor(pts).merged(cluster_radius)
    if div.degree() != 0:
        raise ValidationError("rational function divisor must have degree zero")
    return div


# ---------------------------------------------------------------------------
# finite-difference Jacobians
# ---------------------------------------------------------------------------


@dataclass
class FDJacobian:
    matrix: np.ndarray          # Richardson-extrapolated Jacobian
    coarse: np.ndarray          # step h
    fine: np.ndarray            # step h/2
    richardson_disagreement: float
    singular_values: np.ndarray
    rank: int


def _central_jacobian(f, x: np.ndarray, h: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        fp = np.asarray(f(x + e), dtype=float)
        fm = np.asarray(f(x - e), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise GuardError("jacobian-nan", "non-finite value during finite differencing")
        cols.append((fp - fm) / (2.0 * h))
    return np.stack(cols, axis=1)


def numerical_rank(matrix: np.ndarray, rank_tol: float = DEFAULT_TOL.rank_tol) -> tuple[int, np.ndarray]:
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, s
    return int(np.sum(s > rank_tol * s[0])), s


def finite_diff_jacobian(f, x, h: float | None = None, rank_tol: float | None = None) -> FDJacobian:
    """Central-difference Jacobian of a black-box map R^k -> R^m.

    Computes at steps h and h/2, Richardson-extrapolates, and reports the
    relative disagreement of the two estimates so callers can flag
    step-size instability.
    """
    h = DEFAULT_TOL.fd_step if h is None else h
    rank_tol = DEFAULT_TOL.rank_tol if rank_tol is None else rank_tol
    coarse = _central_jacobian(f, x, h)
    fine = _central_jacobian(f, x, h / 2.0)
    extrap = (4.0 * fine - coarse) / 3.0
    scale = max(float(np.max(np.abs(fine))), 1e-300)
    disagreement = float(np.max(np.abs(fine - coarse))) / scale
    rank, s = numerical_rank(extrap, rank_tol)
    return FDJacobian(extrap, coarse, fine, disagreement, s, rank)
