"""Piecewise-constant maps [0, 1] -> H^2 with the L^2 distance, and the cone at a point.

A point of L^2([0,1], H) is a finite list of atoms (w_i, h_i): the map equal
to h_i on consecutive intervals of length w_i.  Every formula used here is
exact on such maps.

Hyperbolic points are stored in polar form (rho, theta) around the base
point o = (1, 0, 0) of the hyperboloid x0^2 - x1^2 - x2^2 = 1, so that
distances between points far out (rho ~ 1e4) stay finite and accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from lstar.errors import (
    DegeneracyError,
    InvalidDirectionError,
    InvalidPointError,
    ParameterError,
)

COORD_RHO_MAX = 700.0     # cosh overflows a little past 710
WEIGHT_TOL = 1e-12


def lorentz(x, y) -> float:
    """-x0 y0 + x1 y1 + x2 y2."""
    return float(-x[0] * y[0] + x[1] * y[1] + x[2] * y[2])


def _log_sinh(x: float) -> float:
    if x <= 0:
        return -math.inf
    if x < 20:
        return math.log(math.sinh(x))
    return x - math.log(2.0) + math.log1p(-math.exp(-2 * x))


def _asinh_exp(u: float) -> float:
    """asinh(exp(u)) without overflow."""
    if u == -math.inf:
        return 0.0
    if u < 20:
        return math.asinh(math.exp(u))
    return u + math.log1p(math.sqrt(1.0 + math.exp(-2 * u)))


@dataclass(frozen=True)
class HypPoint:
    rho: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and math.isfinite(self.theta)) or self.rho < 0:
            raise InvalidPointError(f"bad polar coordinates ({self.rho}, {self.theta})")
        if self.rho == 0:
            object.__setattr__(self, "theta", 0.0)

    @property
    def coords(self) -> np.ndarray:
        if self.rho > COORD_RHO_MAX:
            raise InvalidPointError(f"rho = {self.rho} is too large for hyperboloid coordinates")
        sh = math.sinh(self.rho)
        return np.array([math.cosh(self.rho), sh * math.cos(self.theta), sh * math.sin(self.theta)])

    @classmethod
    def from_coords(cls, x, tol: float = 1e-9) -> "HypPoint":
        x = np.asarray(x, dtype=float)
        if x.shape != (3,) or not np.all(np.isfinite(x)):
            raise InvalidPointError("expected three finite coordinates")
        if x[0] <= 0 or abs(-lorentz(x, x) - 1.0) > tol * max(1.0, x[0] * x[0]):
            raise InvalidPointError(f"{x} is not on the upper sheet of the hyperboloid")
        return cls._unchecked(x)

    @classmethod
    def _unchecked(cls, x) -> "HypPoint":
        r = math.hypot(x[1], x[2])
        return cls(math.asinh(r), math.atan2(x[2], x[1]) if r > 0 else 0.0)


ORIGIN = HypPoint()


def hyp_distance(a: HypPoint, b: HypPoint) -> float:
    """Geodesic distance, from sinh^2(d/2) = sinh^2(drho/2) + sinh r1 sinh r2 sin^2(dtheta/2)."""
    t1 = 2 * _log_sinh(abs(a.rho - b.rho) / 2)
    s = abs(math.sin((a.theta - b.theta) / 2))
    t2 = (_log_sinh(a.rho) + _log_sinh(b.rho) + 2 * math.log(s)) if s > 0 else -math.inf
    log_s = np.logaddexp(t1, t2)
    return 2.0 * _asinh_exp(0.5 * float(log_s))


def hyp_geodesic(a: HypPoint, b: HypPoint, t: float) -> HypPoint:
    """Point at parameter t of the constant-speed geodesic from a (t=0) to b (t=1)."""
    if a.rho == 0:
        return HypPoint(t * b.rho, b.theta)
    if b.rho == 0:
        return HypPoint((1 - t) * a.rho, a.theta)
    if t == 0:
        return a
    if t == 1:
        return b
    x, y = a.coords, b.coords
    d = hyp_distance(a, b)
    if d < 1e-8:
        p = (1 - t) * x + t * y
        p = p / math.sqrt(-lorentz(p, p))
    else:
        p = (math.sinh((1 - t) * d) * x + math.sinh(t * d) * y) / math.sinh(d)
    return HypPoint._unchecked(p)


def hyp_symmetry(center: HypPoint, y: HypPoint) -> HypPoint:
    """Geodesic symmetry at ``center``: y -> -y - 2 <center, y> center."""
    if center.rho == 0:
        return HypPoint(y.rho, y.theta + math.pi) if y.rho else y
    h, x = center.coords, y.coords
    return HypPoint._unchecked(-x - 2 * lorentz(h, x) * h)


def tangent_basis(h: HypPoint) -> tuple[np.ndarray, np.ndarray]:
    """Lorentz-orthonormal basis (radial, angular) of the tangent plane at h."""
    c, s = math.cos(h.theta), math.sin(h.theta)
    ch, sh = math.cosh(h.rho), math.sinh(h.rho)
    return np.array([sh, ch * c, ch * s]), np.array([0.0, -s, c])


def tangent_vector(h: HypPoint, phi: float) -> np.ndarray:
    """Ambient unit tangent vector at h with frame angle phi."""
    e1, e2 = tangent_basis(h)
    return math.cos(phi) * e1 + math.sin(phi) * e2


def unit_log(h: HypPoint, y: HypPoint) -> float | None:
    """Frame angle at h of the unit tangent pointing to y (None if y == h).

    Tangent directions are angles with respect to :func:`tangent_basis`; at
    o this frame is the (x1, x2) axes, so the angle is the polar angle of y.
    """
    if hyp_distance(h, y) == 0:
        return None
    if h.rho == 0:
        return y.theta
    x, p = h.coords, y.coords
    v = p + lorentz(x, p) * x
    e1, e2 = tangent_basis(h)
    return math.atan2(lorentz(v, e2), lorentz(v, e1))


def hyp_exp(h: HypPoint, phi: float, t: float) -> HypPoint:
    """Point at distance t from h in the direction with frame angle phi."""
    if t == 0:
        return h
    if h.rho == 0:
        return HypPoint(t, phi)
    x = h.coords
    return HypPoint._unchecked(math.cosh(t) * x + math.sinh(t) * tangent_vector(h, phi))


def _angle_between(phi1: float, phi2: float) -> float:
    return abs(math.remainder(phi1 - phi2, 2 * math.pi))


def hyp_angle(h: HypPoint, y: HypPoint, z: HypPoint) -> float:
    """Riemannian angle at h between the geodesics to y and z."""
    u, w = unit_log(h, y), unit_log(h, z)
    if u is None or w is None:
        raise DegeneracyError("angle at a point coinciding with an endpoint")
    return _angle_between(u, w)


# -- L^2 maps -------------------------------------------------------------------

@dataclass(frozen=True)
class L2HypPoint:
    """Atoms ((w_1, h_1), ..., (w_k, h_k)) laid out left to right on [0, 1]."""

    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(w), h) for w, h in self.atoms)
        if not atoms:
            raise InvalidPointError("a point needs at least one atom")
        ws = np.array([w for w, _ in atoms])
        if np.any(ws <= 0) or abs(ws.sum() - 1.0) > WEIGHT_TOL:
            raise InvalidPointError("atom weights must be positive and sum to 1")
        if not all(isinstance(h, HypPoint) for _, h in atoms):
            raise InvalidPointError("atoms must carry HypPoint values")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def constant(cls, h: HypPoint) -> "L2HypPoint":
        return cls(((1.0, h),))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def points(self) -> list:
        return [h for _, h in self.atoms]


def _breaks(weights) -> np.ndarray:
    c = np.cumsum(weights)
    c[-1] = 1.0
    return c


def common_refinement(*objs) -> tuple[np.ndarray, list]:
    """Shared interval weights and, for each object, the atom index on every interval.

    ``objs`` may be L2HypPoints or ConeDirections (anything with ``weights``).
    """
    cuts = np.unique(np.concatenate([_breaks(o.weights) for o in objs]))
    # merge cut points closer than rounding noise
    keep = np.concatenate([[True], np.diff(cuts) > 1e-15])
    cuts = cuts[keep]
    cuts[-1] = 1.0
    left = np.concatenate([[0.0], cuts[:-1]])
    w = cuts - left
    mids = left + w / 2
    idx = [np.searchsorted(_breaks(o.weights), mids) for o in objs]
    idx = [np.minimum(i, len(o.weights) - 1) for i, o in zip(idx, objs)]
    return w, idx


def refine(x: L2HypPoint, y: L2HypPoint):
    """(weights, points of x, points of y) on the common refinement."""
    w, (ix, iy) = common_refinement(x, y)
    return w, [x.atoms[i][1] for i in ix], [y.atoms[i][1] for i in iy]


def l2_distance(x: L2HypPoint, y: L2HypPoint) -> float:
    w, xs, ys = refine(x, y)
    d = np.array([hyp_distance(a, b) for a, b in zip(xs, ys)])
    return float(math.sqrt(np.sum(w * d * d)))


def _collapse(w, pts) -> L2HypPoint:
    return L2HypPoint(tuple(zip(w.tolist(), pts)))


def l2_geodesic(x: L2HypPoint, y: L2HypPoint, s: float) -> L2HypPoint:
    """g(s)_t = g_t(s): every atom moves along its own geodesic at proportional speed."""
    if s == 0:
        return x
    if s == 1:
        return y
    w, xs, ys = refine(x, y)
    return _collapse(w, [hyp_geodesic(a, b, s) for a, b in zip(xs, ys)])


def l2_symmetry(x: L2HypPoint, y: L2HypPoint) -> L2HypPoint:
    """sigma_x(y)_t = S_{x_t}(y_t)."""
    w, xs, ys = refine(x, y)
    return _collapse(w, [hyp_symmetry(a, b) for a, b in zip(xs, ys)])


def l2_midpoint(x: L2HypPoint, y: L2HypPoint) -> L2HypPoint:
    return l2_geodesic(x, y, 0.5)


def comparison_angle_from_sides(a: float, b: float, c: float) -> float:
    """Euclidean angle opposite to side c in a triangle with sides a, b, c."""
    if a <= 0 or b <= 0:
        raise DegeneracyError("comparison angle needs y != x and z != x")
    cos = (a * a + b * b - c * c) / (2 * a * b)
    return math.acos(max(-1.0, min(1.0, cos)))


def comparison_angle(x: L2HypPoint, y: L2HypPoint, z: L2HypPoint) -> float:
    return comparison_angle_from_sides(l2_distance(x, y), l2_distance(x, z), l2_distance(y, z))


# -- directions and the tangent cone ------------------------------------------------

@dataclass(frozen=True)
class ConeDirection:
    """Atoms (w_i, phi_i, v_i) over the atoms of ``base``.

    ``phi_i`` is the frame angle of a unit tangent vector at the base atom
    (see :func:`tangent_vector`), ``v_i >= 0`` its speed, and
    sum w_i v_i^2 = 1.  The direction's intervals must refine the base's.
    """

    base: L2HypPoint
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(w), float(phi), float(v)) for w, phi, v in self.atoms)
        if not atoms:
            raise InvalidDirectionError("a direction needs at least one atom")
        ws = np.array([a[0] for a in atoms])
        vs = np.array([a[2] for a in atoms])
        if np.any(ws <= 0) or abs(ws.sum() - 1.0) > WEIGHT_TOL or np.any(vs < 0):
            raise InvalidDirectionError("weights must be positive summing to 1, speeds >= 0")
        if not all(math.isfinite(a[1]) for a in atoms):
            raise InvalidDirectionError("direction angles must be finite")
        if abs(float(np.sum(ws * vs * vs)) - 1.0) > 1e-9:
            raise InvalidDirectionError("speeds violate sum w v^2 = 1")
        w_ref, _ = common_refinement(self.base, _Weights(ws))
        if len(w_ref) != len(ws):
            raise InvalidDirectionError("direction atoms must refine the base point's atoms")
        object.__setattr__(self, "atoms", atoms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])


@dataclass(frozen=True)
class _Weights:
    weights: np.ndarray


def _base_points(d: ConeDirection) -> list:
    _, idx = common_refinement(d.base, d)
    return [d.base.atoms[i][1] for i in idx[0]]


def direction_to(x: L2HypPoint, y: L2HypPoint) -> tuple[float, ConeDirection]:
    """(d(x, y), direction at x of the geodesic to y)."""
    w, xs, ys = refine(x, y)
    d = np.array([hyp_distance(a, b) for a, b in zip(xs, ys)])
    D = float(math.sqrt(np.sum(w * d * d)))
    if D == 0:
        raise DegeneracyError("no direction from a point to itself")
    atoms = []
    for wi, a, b, di in zip(w, xs, ys, d):
        phi = unit_log(a, b)
        atoms.append((wi, 0.0 if phi is None else phi, di / D))
    return D, ConeDirection(_collapse(w, xs), tuple(atoms))


def join_cosine(d1: ConeDirection, d2: ConeDirection) -> float:
    """sum w_i v_i v'_i cos(theta_i): cosine of the integral-join distance."""
    w, (i1, i2) = common_refinement(d1, d2)
    b1, b2 = _base_points(d1), _base_points(d2)
    total = 0.0
    for wi, a, b in zip(w, i1, i2):
        _, u, v = d1.atoms[a]
        _, u2, v2 = d2.atoms[b]
        if v == 0 or v2 == 0:
            continue
        if b1[a] != b2[b]:
            raise InvalidDirectionError("directions are based at different points")
        total += wi * v * v2 * math.cos(u - u2)
    return max(-1.0, min(1.0, total))


def alexandrov_angle(d1: ConeDirection, d2: ConeDirection) -> float:
    return math.acos(join_cosine(d1, d2))


def alexandrov_angle_limit(x: L2HypPoint, y: L2HypPoint, z: L2HypPoint,
                           ss=(1e-2, 1e-3, 1e-4)) -> list:
    """Comparison angles at x of geodesic points at parameters ss (cross-check only)."""
    out = []
    for s in ss:
        out.append(comparison_angle(x, l2_geodesic(x, y, s), l2_geodesic(x, z, s)))
    return out


def cone_distance(lam1: float, d1: ConeDirection, lam2: float, d2: ConeDirection) -> float:
    c = join_cosine(d1, d2)
    return math.sqrt(max(0.0, lam1 * lam1 + lam2 * lam2 - 2 * lam1 * lam2 * c))


def _flat_image(lam: float, d: ConeDirection, idx) -> np.ndarray:
    """Phi(lam, dir) on each interval, in orthonormal tangent-frame coordinates."""
    phi = np.array([d.atoms[i][1] for i in idx])
    v = np.array([d.atoms[i][2] for i in idx])
    return lam * v[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)


def tangent_cone_check(samples) -> float:
    """Max over pairs of | d_cone^2 - d_flat^2 | for Phi(lam, (u, v)) = lam v u.

    ``samples`` is an iterable of ((lam, dir), (lam', dir')).  Squared
    distances are compared so that coincident points give exactly 0 rather
    than the sqrt of rounding noise.
    """
    worst = 0.0
    for (l1, d1), (l2, d2) in samples:
        cone2 = l1 * l1 + l2 * l2 - 2 * l1 * l2 * join_cosine(d1, d2)
        w, (i1, i2) = common_refinement(d1, d2)
        diff = _flat_image(l1, d1, i1) - _flat_image(l2, d2, i2)
        flat2 = float(np.sum(w * np.sum(diff * diff, axis=1)))
        worst = max(worst, abs(cone2 - flat2))
    return worst


def exp_map(lam: float, d: ConeDirection) -> L2HypPoint:
    """exp_x(lam, dir): atom i moves a distance lam * v_i along u_i."""
    if lam < 0:
        raise ParameterError("cone radius must be nonnegative")
    base = _base_points(d)
    w = d.weights
    pts = [h if lam * v == 0 else hyp_exp(h, u, lam * v) for h, (_, u, v) in zip(base, d.atoms)]
    return _collapse(w, pts)


def log_map(x: L2HypPoint, y: L2HypPoint) -> tuple[float, ConeDirection | None]:
    """Inverse of exp_map: (0, None) when y == x."""
    if l2_distance(x, y) == 0:
        return 0.0, None
    return direction_to(x, y)


# -- the bounded-curvature family ---------------------------------------------------

def ray_family(r: float, alpha: float, lam: float):
    """(x, y, z) with x = o and mass lam at distance r / sqrt(lam) on rays at +-alpha/2."""
    if not r > 0:
        raise ParameterError("r must be positive")
    if not 0 < alpha < math.pi:
        raise ParameterError("alpha must lie in (0, pi)")
    if not 0 < lam <= 1:
        raise ParameterError("lambda must lie in (0, 1]")
    rho = r / math.sqrt(lam)
    x = L2HypPoint.constant(ORIGIN)

    def far(theta):
        if lam == 1:
            return L2HypPoint.constant(HypPoint(rho, theta))
        return L2HypPoint(((lam, HypPoint(rho, theta)), (1 - lam, ORIGIN)))

    return x, far(alpha / 2), far(-alpha / 2)


def ray_direction(x: L2HypPoint, alpha_half: float, lam: float) -> ConeDirection:
    u = alpha_half
    if lam == 1:
        return ConeDirection(x, ((1.0, u, 1.0),))
    base = L2HypPoint(((lam, ORIGIN), (1 - lam, ORIGIN)))
    return ConeDirection(base, ((lam, u, 1 / math.sqrt(lam)), (1 - lam, u, 0.0)))


def bounded_curvature_experiment(r: float, alpha: float, lambdas) -> list:
    """Rows (lambda, d_xy, d_yz, comparison angle, Alexandrov angle, ratio)."""
    rows = []
    for lam in lambdas:
        x, y, z = ray_family(r, alpha, lam)
        dxy = l2_distance(x, y)
        dxz = l2_distance(x, z)
        dyz = l2_distance(y, z)
        comp = comparison_angle_from_sides(dxy, dxz, dyz)
        alex = alexandrov_angle(ray_direction(x, alpha / 2, lam), ray_direction(x, -alpha / 2, lam))
        rows.append(dict(lam=float(lam), d_xy=dxy, d_yz=dyz, comparison_angle_rad=comp,
                         alexandrov_angle_rad=alex, ratio=alex / comp))
    return rows


CSV_COLUMNS = ("lambda", "d_xy", "d_yz", "comparison_angle_rad", "alexandrov_angle_rad", "ratio")


def large_rho_oracle(rho: float, alpha: float) -> float:
    """2 rho + 2 log sin(alpha / 2): asymptotic distance of two points at radius rho."""
    return 2 * rho + 2 * math.log(math.sin(alpha / 2))


def exp_discontinuity_demo(r: float = 1.0, lambdas=(1e-2, 1e-4, 1e-6, 1e-8)) -> list:
    """Cone points whose distance tends to 0 while their exp images stay ~2r apart.

    For each lam: c = (r, dir) and c' = (r, dir') where dir, dir' put speed
    1/sqrt(lam) on a mass-lam atom along rays an angle alpha_lam apart, with
    alpha_lam = 2 asin(sqrt(lam) / 2), so the cone distance is r sqrt(lam).
    """
    rows = []
    for lam in lambdas:
        if not 0 < lam < 1:
            raise ParameterError("lambda must lie in (0, 1)")
        a = 2 * math.asin(math.sqrt(lam) / 2)
        x = L2HypPoint.constant(ORIGIN)
        d1 = ray_direction(x, a / 2, lam)
        d2 = ray_direction(x, -a / 2, lam)
        cone = cone_distance(r, d1, r, d2)
        e1, e2 = exp_map(r, d1), exp_map(r, d2)
        rows.append(dict(lam=float(lam), angle=a, cone_distance=cone,
                         exp_distance=l2_distance(e1, e2)))
    return rows


# -- Hilbertian products ----------------------------------------------------------

@dataclass(frozen=True)
class PointedFactor:
    distance: Callable
    base: object
    geodesic: Callable | None = None
    name: str = ""


def _check_factors(factors, *points):
    if not factors:
        raise ParameterError("at least one factor is required")
    for p in points:
        if len(p) != len(factors):
            raise ParameterError("one coordinate per factor is required")


def hilbertian_product_distance(factors: Sequence[PointedFactor], u, v) -> float:
    _check_factors(factors, u, v)
    return math.sqrt(sum(f.distance(a, b) ** 2 for f, a, b in zip(factors, u, v)))


def product_geodesic(factors: Sequence[PointedFactor], u, v, t: float) -> list:
    """Componentwise geodesics; component i moves at speed d_i / d relative to the product."""
    _check_factors(factors, u, v)
    out = []
    for f, a, b in zip(factors, u, v):
        if f.geodesic is None:
            raise ParameterError(f"factor {f.name or '?'} has no geodesic oracle")
        out.append(f.geodesic(a, b, t))
    return out


def base_point(factors: Sequence[PointedFactor]) -> list:
    _check_factors(factors)
    return [f.base for f in factors]


def multihomothety_check(scales, c: float, C: float) -> bool:
    """True iff every scale factor lies in [c, C]."""
    scales = list(scales)
    if not scales:
        raise ParameterError("no scale factors given")
    if not (0 < c <= C):
        raise ParameterError("need 0 < c <= C")
    return all(c <= s <= C for s in scales)


def hyperbolic_factor(name: str = "H") -> PointedFactor:
    return PointedFactor(hyp_distance, ORIGIN, hyp_geodesic, name)


def euclidean_factor(dim: int, name: str = "E") -> PointedFactor:
    return PointedFactor(lambda a, b: float(np.linalg.norm(np.subtract(a, b))),
                         np.zeros(dim),
                         lambda a, b, t: (1 - t) * np.asarray(a) + t * np.asarray(b), name)


def random_hyp_point(rng, max_rho: float = 3.0) -> HypPoint:
    return HypPoint(float(rng.uniform(0, max_rho)), float(rng.uniform(-math.pi, math.pi)))


def random_l2_point(rng, max_atoms: int = 4, max_rho: float = 3.0) -> L2HypPoint:
    k = int(rng.integers(1, max_atoms + 1))
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - w[:-1].sum()
    return L2HypPoint(tuple((float(wi), random_hyp_point(rng, max_rho)) for wi in w))


def random_direction(rng, x: L2HypPoint) -> ConeDirection:
    atoms = []
    v = rng.uniform(0, 1, len(x.atoms))
    if not np.any(v > 0):
        v[0] = 1.0
    v = v / math.sqrt(float(np.sum(x.weights * v * v)))
    for (w, _), vi in zip(x.atoms, v):
        atoms.append((w, float(rng.uniform(-math.pi, math.pi)), float(vi)))
    return ConeDirection(x, tuple(atoms))
