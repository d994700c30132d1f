"""Carrots attached to cuts, Koenigs linearization, and geometry estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .angles import Angle, reduce_offset
from .bottcher import SpiralArc, equipotential_arc, trace_spiral
from .cuts import Cut, CutFamily
from .errors import CarrotOverlap, InsufficientSamples, NonConvergence, \
    OutsideLinearizationDomain, WrongPullback
from .poly import Cycle, Polynomial

SIDE_ROOT_TOL = 1e-6
# at a critical root the side tip approaches like t^(log lambda / (k log d));
# 1e-12 leaves comfortable margin under the 1e-6 termination tolerance
SIDE_T_MIN = 1e-12
SIDE_SUBSTEPS = 16
ARC_MAX_STEP = 1.0 / 6144  # keeps chordal error of equip arcs below 1e-6


@dataclass(frozen=True)
class ProtoCarrot:
    """Model carrot in the disk: rho0 <= rho <= exp(-|theta - theta0|)."""

    rho0: float
    theta0: Angle

    def __post_init__(self) -> None:
        if not (0.0 < self.rho0 < 1.0):
            raise ValueError("rho0 must lie in (0, 1)")

    @property
    def half_span(self) -> float:
        """Angular reach of the spiral arms (turns)."""
        return -math.log(self.rho0)


def proto_contains(pc: ProtoCarrot, rho: float, theta: float) -> bool:
    """Membership in polar coordinates; theta - theta0 reduced to (-1/2, 1/2]."""
    off = reduce_offset(theta - pc.theta0.as_float())
    return pc.rho0 <= rho <= math.exp(-abs(off))


def proto_boundary(pc: ProtoCarrot, samples: int) -> list[tuple[float, float]]:
    """Boundary as (rho, theta) pairs: arm, inner arc, arm, back to the tip."""
    lam = pc.half_span
    t0 = pc.theta0.as_float()
    out: list[tuple[float, float]] = []
    m = max(8, samples // 3)
    for k in range(m + 1):  # + arm from tip to corner
        a = lam * k / m
        out.append((math.exp(-a), t0 + a))
    for k in range(1, m + 1):  # inner arc from +corner to -corner
        a = lam - 2 * lam * k / m
        out.append((pc.rho0, t0 + a))
    for k in range(1, m + 1):  # - arm back to the tip
        a = lam * (1 - k / m)
        out.append((math.exp(-a), t0 - a))
    return out


def proto_image_check(pc: ProtoCarrot, d: int, samples: int = 1000) -> float:
    """Max distance from mapped boundary points to the image proto-carrot's
    boundary under (rho, theta) -> (rho^d, d theta)."""
    if pc.rho0 < 0.9:
        raise ValueError("rho0 must be at least 0.9 for the equivariance check")
    img = ProtoCarrot(pc.rho0**d, pc.theta0.times(d))
    worst = 0.0
    for rho, theta in proto_boundary(pc, samples):
        r2 = rho**d
        t2 = theta * d
        z = r2 * np.exp(2j * np.pi * t2)
        worst = max(worst, _proto_boundary_distance(img, z, r2, t2))
    return worst


def _proto_boundary_distance(pc: ProtoCarrot, z: complex, rho: float, theta: float) -> float:
    off = reduce_offset(theta - pc.theta0.as_float())
    cands = []
    if abs(off) <= pc.half_span:
        # same-angle points on the spiral roof and on the inner arc
        cands.append(math.exp(-abs(off)) * np.exp(2j * np.pi * theta))
        cands.append(pc.rho0 * np.exp(2j * np.pi * theta))
    tip = np.exp(2j * np.pi * pc.theta0.as_float())
    cands.append(tip)
    for s in (-1.0, 1.0):
        corner_angle = pc.theta0.as_float() + s * pc.half_span
        cands.append(pc.rho0 * np.exp(2j * np.pi * corner_angle))
    return min(abs(z - c) for c in cands)


@dataclass
class Carrot:
    """Dynamical carrot of a cut: two spiral sides plus an equipotential arc.

    Sides are ordered by decreasing potential with the root appended last.
    `arc_lo/arc_hi` are lifted angles of the equipotential arc (ccw).
    """

    cut: Cut
    rho: float
    g0: float
    side_r: SpiralArc
    side_l: SpiralArc
    equip_arc: np.ndarray
    arc_lo: float
    arc_hi: float

    def boundary(self) -> np.ndarray:
        """Simple closed polygon: root, side_r up, arc, side_l down, root."""
        sr = self.side_r.points[::-1]
        sl = self.side_l.points
        if self.cut.degenerate:
            # arc stored lo->hi; side_r tops out at the high end
            arc = self.equip_arc[::-1]
        else:
            arc = self.equip_arc
        return np.concatenate([
            np.array([self.cut.root]),
            sr,                    # rising potential to g0
            arc[1:-1],
            sl,                    # falling potential back to the root
            np.array([self.cut.root]),
        ])

    def contains(self, z: complex) -> bool:
        from .cuts import _crossing_parity
        return _crossing_parity(self._poly_cache(), z)

    def contains_many(self, zs: np.ndarray) -> np.ndarray:
        return np.array([self.contains(z) for z in zs])

    def _poly_cache(self) -> np.ndarray:
        if not hasattr(self, "_poly"):
            self._poly = self.boundary()
        return self._poly

    def angles_at_g0(self) -> tuple[float, float]:
        return self.arc_lo, self.arc_hi

    def side_pair_points(self) -> np.ndarray:
        """The union side_r + root + side_l as one simple arc (root in the middle)."""
        return np.concatenate([
            self.side_r.points,              # equip end ... toward root
            np.array([self.cut.root]),
            self.side_l.points[::-1],        # root ... back out to equip end
        ])


def build_carrot(P: Polynomial, family: CutFamily, cut: Cut, rho: float, *,
                 substeps: int = SIDE_SUBSTEPS, t_min: float = SIDE_T_MIN) -> Carrot:
    """Carrot of a cut at parameter rho.

    Both cases share one construction: the sides are the slope-one spirals
    through theta_r (positive sense) and theta_l (negative sense); pullbacks
    of spirals are spirals, so the preperiodic case needs no separate
    continuation machinery.  The landing condition is checked a posteriori.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie in (0, 1)")
    g0 = -math.log(rho)
    width = float(cut.arc_width())
    if not cut.degenerate and width - 2 * g0 <= 1e-9:
        raise CarrotOverlap(
            f"carrot sides of cut ({cut.theta_r},{cut.theta_l}) cross before "
            f"reaching the equipotential: need g0 < {width / 2:.4g}, got {g0:.4g}")
    side_r = trace_spiral(P, cut.theta_r, +1, g0, t_min, substeps)
    side_l = trace_spiral(P, cut.theta_l, -1, g0, t_min, substeps)
    for name, side in (("right", side_r), ("left", side_l)):
        gap = abs(side.points[-1] - cut.root)
        if gap > SIDE_ROOT_TOL:
            raise WrongPullback(
                f"{name} side spiral of cut ({cut.theta_r},{cut.theta_l}) "
                f"ends {gap:.3g} from the root")
    if cut.degenerate:
        lo = cut.theta_r.as_float() - g0
        hi = cut.theta_r.as_float() + g0
    else:
        lo = cut.theta_r.as_float() + g0
        hi = cut.theta_r.as_float() + width - g0
    arc = equipotential_arc(P, g0, cut.theta_r.fraction(),
                            lo - cut.theta_r.as_float(), hi - cut.theta_r.as_float(),
                            max_step=ARC_MAX_STEP)
    if cut.degenerate:
        arc[0] = side_l.points[0]
        arc[-1] = side_r.points[0]
    else:
        arc[0] = side_r.points[0]
        arc[-1] = side_l.points[0]
    return Carrot(cut, rho, g0, side_r, side_l, arc, lo, hi)


def build_carrots(P: Polynomial, family: CutFamily, rho: float, **kw) -> list[Carrot]:
    """Carrots for the whole family, image cuts first along each orbit."""
    order: list[int] = []
    remaining = set(range(len(family)))
    while remaining:
        progressed = False
        for i in sorted(remaining):
            tgt = family.forward_map[i]
            if tgt is None or tgt == i or tgt in order:
                order.append(i)
                remaining.discard(i)
                progressed = True
        if not progressed:  # cycle of cuts; order within it is immaterial
            i = sorted(remaining)[0]
            order.append(i)
            remaining.discard(i)
    carrots: list[Optional[Carrot]] = [None] * len(family)
    for i in order:
        carrots[i] = build_carrot(P, family, family.cuts[i], rho, **kw)
    return carrots  # type: ignore[return-value]


def carrots_disjoint(carrots: Sequence[Carrot], samples: int = 160) -> bool:
    """Sampled pairwise disjointness of carrot regions."""
    for i, a in enumerate(carrots):
        for b in carrots[i + 1:]:
            pts = b.boundary()
            idx = np.unique(np.linspace(0, len(pts) - 1, samples).astype(int))
            probe = pts[idx]
            # skip shared root contacts
            probe = probe[np.abs(probe - a.cut.root) > 1e-9]
            if a.contains_many(probe).any():
                return False
            if a.contains(_interior_probe(b)):
                return False
    return True


def _interior_probe(c: Carrot) -> complex:
    k = len(c.side_r.points) // 3
    return 0.5 * (c.side_r.points[k] + c.side_l.points[k])


_radius_cache: dict[tuple, float] = {}


def koenigs_radius(P: Polynomial, cycle: Cycle) -> float:
    """Largest tested radius on which the inverse branch fixing the point
    contracts (sampled); conservative by 10 percent."""
    z0 = cycle.points[0]
    lam = cycle.multiplier
    key = (P.coeffs, round(z0.real, 12), round(z0.imag, 12))
    if key in _radius_cache:
        return _radius_cache[key]
    others = [complex(r) for r in np.roots(_minus_const(P, z0))]
    others = [r for r in others if abs(r - z0) > 1e-9]
    r = 0.5 * min((abs(r - z0) for r in others), default=1.0)
    from .bottcher import _newton_preimage
    for _ in range(40):
        ok = True
        for k in range(12):
            w = z0 + r * np.exp(2j * np.pi * k / 12)
            try:
                y = _newton_preimage(P, w, z0 + (w - z0) / lam)
            except NonConvergence:
                ok = False
                break
            if abs(y - z0) > abs(w - z0):
                ok = False
                break
        if ok:
            break
        r *= 0.8
    result = 0.9 * r
    _radius_cache[key] = result
    return result


def _minus_const(P: Polynomial, c: complex) -> np.ndarray:
    arr = np.array(P.coeffs[::-1], dtype=complex)
    arr[-1] -= c
    return arr


def _shifted_coeffs(P: Polynomial, z0: complex) -> list[complex]:
    """Taylor coefficients of w -> P(z0 + w) - z0 by synthetic division; the
    constant term is dropped exactly (z0 is a fixed point to working
    precision), which avoids the catastrophic cancellation of evaluating
    P(y) - z0 for y near z0."""
    a = list(P.coeffs)
    out = []
    for _ in range(len(a)):
        # a(w) mod (w): value at z0, then deflate
        acc = 0j
        for c in reversed(a):
            acc = acc * z0 + c
        out.append(acc)
        new = []
        carry = 0j
        for c in reversed(a[1:]):
            carry = carry * z0 + c
            new.append(carry)
        a = new[::-1]
        if not a:
            break
    out[0] = 0j  # fixed-point residual, below working precision
    return out


def koenigs_coordinate(P: Polynomial, cycle: Cycle, z: complex, *,
                       tol: float = 1e-13, max_n: int = 400) -> complex:
    """Koenigs linearizing coordinate at a repelling fixed point.

    u = lim lambda^n (P^{-n}(z) - z0) along the inverse branch fixing z0;
    satisfies u(P(z)) = lambda * u(z) on the linearization disk.  Pullbacks
    run in the shifted coordinate w = z - z0 so the limit keeps full relative
    precision.
    """
    if cycle.period != 1:
        raise ValueError("koenigs_coordinate expects a fixed point; "
                         "compose the polynomial for longer cycles")
    if abs(cycle.multiplier) <= 1:
        raise ValueError("fixed point must be repelling")
    z0 = cycle.points[0]
    lam = cycle.multiplier
    if z == z0:
        return 0j
    if abs(z - z0) > koenigs_radius(P, cycle):
        raise OutsideLinearizationDomain(
            f"|z - z0| = {abs(z - z0):.3g} exceeds the linearization radius")
    bs = _shifted_coeffs(P, z0)

    def ps(w: complex) -> complex:
        acc = 0j
        for c in reversed(bs):
            acc = acc * w + c
        return acc

    def dps(w: complex) -> complex:
        acc = 0j
        for k in range(len(bs) - 1, 0, -1):
            acc = acc * w + k * bs[k]
        return acc

    w = z - z0
    power = 1.0 + 0.0j
    u_prev: Optional[complex] = None
    best: Optional[complex] = None
    best_diff = math.inf
    for _ in range(max_n):
        target = w
        w = w / lam
        for _ in range(60):
            step = (ps(w) - target) / dps(w)
            w -= step
            if abs(step) <= 1e-16 * max(1e-300, abs(w)):
                break
        power *= lam
        u = power * w
        if u_prev is not None:
            diff = abs(u - u_prev)
            if diff < tol * max(1e-300, abs(u)):
                return u
            if diff < best_diff:
                best, best_diff = u, diff
            elif best is not None and diff > 4 * best_diff:
                return best  # noise floor reached; best estimate wins
        u_prev = u
    raise NonConvergence("Koenigs limit did not stabilize")


# ---------------------------------------------------------------------------
# geometry estimators


@dataclass(frozen=True)
class GeometryEstimate:
    quasi_arc_C: float
    transversality_gap: float
    weak_qs_kappa: float
    sample_count: int


def _subsample(pts: np.ndarray, samples: int) -> np.ndarray:
    pts = np.asarray(pts, dtype=complex)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.abs(np.diff(pts)) > 0
    pts = pts[keep]
    if len(pts) <= samples:
        return pts
    idx = np.unique(np.linspace(0, len(pts) - 1, samples).astype(int))
    return pts[idx]


def quasi_arc_constant(polyline: np.ndarray, samples: int = 200) -> float:
    """Lower three-point bound: min over ordered triples x<=y<=z (arc order)
    of |x-z| / |x-y|.

    The polyline's geometric potential ladder already concentrates samples
    near the root endpoint, which is where the constant is decided.
    """
    pts = _subsample(polyline, samples)
    m = len(pts)
    if m < 3:
        raise InsufficientSamples("need at least 3 distinct points")
    D = np.abs(pts[:, None] - pts[None, :])
    # suffmin[i, j] = min over k >= j of D[i, k]
    suffmin = np.minimum.accumulate(D[:, ::-1], axis=1)[:, ::-1]
    iu, ju = np.triu_indices(m, k=1)
    denom = D[iu, ju]
    ok = denom > 0
    ratios = suffmin[iu[ok], ju[ok]] / denom[ok]
    return float(ratios.min())


def transversality_profile(R_pts: np.ndarray, L_pts: np.ndarray, a: complex, *,
                           r_min: float = 1e-8, band: float = 0.1
                           ) -> list[tuple[float, float]]:
    """Per-dyadic-scale minima of |(u-a)/(v-a) - 1| over radius-matched pairs."""
    ru = np.asarray(R_pts, dtype=complex) - a
    lv = np.asarray(L_pts, dtype=complex) - a
    ru = ru[np.abs(ru) > 0]
    lv = lv[np.abs(lv) > 0]
    if len(ru) == 0 or len(lv) == 0:
        raise InsufficientSamples("empty arcs")
    r_max = min(np.abs(ru).max(), np.abs(lv).max())
    out: list[tuple[float, float]] = []
    s = r_max / 2.0
    while s >= r_min:
        us = ru[(np.abs(ru) >= s) & (np.abs(ru) < 2 * s)]
        vs = lv[(np.abs(lv) >= s) & (np.abs(lv) < 2 * s)]
        if len(us) and len(vs):
            ratio = np.abs(us[:, None]) / np.abs(vs[None, :])
            pair_ok = np.abs(ratio - 1.0) < band
            if pair_ok.any():
                q = us[:, None] / vs[None, :]
                gap = float(np.abs(q - 1.0)[pair_ok].min())
                out.append((s, gap))
        s /= 2.0
    if not out:
        raise InsufficientSamples("no radius-matched pairs at any dyadic scale")
    return out


def transversality_gap(R_pts: np.ndarray, L_pts: np.ndarray, a: complex, *,
                       r_min: float = 1e-8, band: float = 0.1) -> float:
    """min over scales of the per-scale transversality minima; > 0 certifies
    nothing but 0 is approached by tangential pairs."""
    prof = transversality_profile(R_pts, L_pts, a, r_min=r_min, band=band)
    return min(g for _, g in prof)


def weak_qs_constant(samples: Sequence[tuple[complex, complex]]) -> float:
    """kappa-hat = max over triples with d(x,y) <= d(x,z) of d(fx,fy)/d(fx,fz)."""
    if len(samples) < 100:
        raise InsufficientSamples("need at least 100 samples")
    x = np.array([p[0] for p in samples], dtype=complex)
    f = np.array([p[1] for p in samples], dtype=complex)
    m = len(x)
    Dx = np.abs(x[:, None] - x[None, :])
    Df = np.abs(f[:, None] - f[None, :])
    kappa = 0.0
    for i in range(m):
        dy = Dx[i]
        fy = Df[i]
        valid = np.ones(m, dtype=bool)
        valid[i] = False
        cond = (dy[:, None] <= dy[None, :]) & valid[:, None] & valid[None, :]
        denom = fy[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(cond & (denom > 0), fy[:, None] / denom, 0.0)
        kappa = max(kappa, float(ratio.max()))
    return kappa


def carrot_geometry(P: Polynomial, carrot: Carrot, samples: int = 200) -> GeometryEstimate:
    """Bundle the three estimators for one carrot's side pair."""
    pair = carrot.side_pair_points()
    C = quasi_arc_constant(pair, samples)
    gap = transversality_gap(carrot.side_r.points, carrot.side_l.points,
                             carrot.cut.root, r_min=1e-8)
    pts = _subsample(pair, max(samples, 120))
    kappa = weak_qs_constant([(complex(z), complex(P(z))) for z in pts])
    return GeometryEstimate(C, gap, kappa, samples)
