"""Cuts, wedges and cut families: admissibility, legality, root classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .angles import Angle, angle_in_arc, tuple_orbit
from .bottcher import RayPolyline, equipotential_arc, external_angle, land_ray
from .errors import NoColanding, RayNotConverged
from .poly import Cycle, Polynomial, critical_points, find_cycles, green_potential

COLAND_TOL = 1e-5
ROOT_MATCH_TOL = 1e-6
BOUNDARY_EPS = 1e-9
PETAL_RADIUS = 1e-4


@dataclass(frozen=True)
class Cut:
    """Two co-landing external rays with their common root point.

    Degenerate when both angles coincide; then the cut is the single ray and
    it bounds no wedge.
    """

    theta_r: Angle
    theta_l: Angle
    root: complex
    degenerate: bool
    ray_r: RayPolyline
    ray_l: RayPolyline

    @property
    def pair(self) -> tuple[Angle, Angle]:
        return (self.theta_r, self.theta_l)

    def image_pair(self, d: int) -> tuple[Angle, Angle]:
        return (self.theta_r.times(d), self.theta_l.times(d))

    def arc_width(self) -> Fraction:
        """ccw arc from theta_r to theta_l (the wedge side); 0 if degenerate."""
        return Fraction(0) if self.degenerate else self.theta_r.ccw_to(self.theta_l)


def build_cut(P: Polynomial, theta_r: Angle, theta_l: Angle, *,
              g_start: float = 2.0, substeps: int = 8) -> Cut:
    """Trace both rays, verify co-landing, and assemble the cut.

    The bounded wedge is the side whose external angles lie on the ccw arc
    from theta_r to theta_l, so the caller's argument order fixes orientation.
    """
    ray_r = land_ray(P, theta_r, g_start=g_start, substeps=substeps)
    if not ray_r.landing.converged:
        raise RayNotConverged(f"ray {theta_r} did not land")
    if theta_r == theta_l:
        return Cut(theta_r, theta_l, ray_r.landing.point, True, ray_r, ray_r)
    ray_l = land_ray(P, theta_l, g_start=g_start, substeps=substeps)
    if not ray_l.landing.converged:
        raise RayNotConverged(f"ray {theta_l} did not land")
    gap = abs(ray_r.landing.point - ray_l.landing.point)
    if gap > COLAND_TOL:
        raise NoColanding(
            f"rays {theta_r} and {theta_l} land {gap:.3g} apart "
            f"({ray_r.landing.point:.6g} vs {ray_l.landing.point:.6g})")
    return Cut(theta_r, theta_l, ray_r.landing.point, False, ray_r, ray_l)


@dataclass
class Wedge:
    """The complementary component of a nondegenerate cut selected by the
    ccw angle arc (theta_r, theta_l); empty for degenerate cuts."""

    P: Polynomial
    cut: Cut
    g0: float
    boundary: Optional[np.ndarray]  # closed polygon, None when empty

    @classmethod
    def build(cls, P: Polynomial, cut: Cut, g0: float) -> "Wedge":
        if cut.degenerate:
            return cls(P, cut, g0, None)
        ray_r = _ray_with_potential_point(P, cut.ray_r, g0)
        ray_l = _ray_with_potential_point(P, cut.ray_l, g0)
        arc = equipotential_arc(P, g0, cut.theta_r.fraction(), 0.0,
                                float(cut.arc_width()))
        arc[0] = ray_r.points[0]
        arc[-1] = ray_l.points[0]
        poly = np.concatenate([
            ray_r.points,                # g0 down to the tail
            np.array([cut.root]),
            ray_l.points[::-1],          # tail back up to g0
            arc[::-1],                   # from theta_l back to theta_r
        ])
        return cls(P, cut, g0, poly)

    def contains(self, z: complex) -> bool:
        """Even-odd membership; points within 1e-9 of the boundary count as
        outside, and beyond the truncation potential the angle arc decides."""
        if self.boundary is None:
            return False
        g = green_potential(self.P, z)
        if g > self.g0 * (1.0 + 1e-9) + 1e-12:
            theta = external_angle(self.P, z, g=g)
            return angle_in_arc(theta, self.cut.theta_r.as_float(),
                                self.cut.theta_l.as_float(), margin=1e-9)
        if not _crossing_parity(self.boundary, z):
            return False
        return _distance_to_polyline(self.boundary, z) > BOUNDARY_EPS

    def contains_many(self, zs: np.ndarray) -> np.ndarray:
        """Vectorized membership for bounded points (no angle fallback)."""
        if self.boundary is None:
            return np.zeros(len(zs), dtype=bool)
        return np.array([self.contains(z) for z in zs])


def _ray_with_potential_point(P: Polynomial, ray: RayPolyline, g0: float) -> RayPolyline:
    """The ray truncated at g0, with an exactly solved point at potential g0."""
    from .bottcher import bottcher_point

    keep = ray.potentials < g0 * (1 - 1e-12)
    pts = ray.points[keep]
    pot = ray.potentials[keep]
    top = bottcher_point(P, g0, ray.angle)
    return RayPolyline(ray.angle, np.concatenate([[top], pts]),
                       np.concatenate([[g0], pot]), ray.landing)


def _crossing_parity(poly: np.ndarray, z: complex) -> bool:
    x, y = z.real, z.imag
    xs, ys = poly.real, poly.imag
    x0, y0 = xs[:-1], ys[:-1]
    x1, y1 = xs[1:], ys[1:]
    hit = (y0 <= y) != (y1 <= y)
    if not hit.any():
        return False
    xcross = x0[hit] + (y - y0[hit]) * (x1[hit] - x0[hit]) / (y1[hit] - y0[hit])
    return bool(np.count_nonzero(xcross > x) % 2)


def _distance_to_polyline(poly: np.ndarray, z: complex) -> float:
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    denom[denom == 0] = 1.0
    t = np.clip(((z - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    proj = a + t * ab
    return float(np.abs(proj - z).min())


def wedge_contains(w: Wedge, z: complex) -> bool:
    return w.contains(z)


@dataclass(frozen=True)
class CutFlags:
    periodic: bool
    preperiodic: bool
    critical_root: bool
    fictitious: bool


@dataclass
class CutFamily:
    """A finite forward-invariant family of cuts with classification data."""

    P: Polynomial
    cuts: tuple[Cut, ...]
    g0: float
    wedges: tuple[Wedge, ...]
    forward_map: tuple[Optional[int], ...]
    flags: tuple[CutFlags, ...]
    cycles: tuple[Cycle, ...]
    root_class: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.cuts)

    def wedge_hit(self, z: complex) -> bool:
        return any(w.contains(z) for w in self.wedges)

    def critical_indices(self) -> list[int]:
        return [i for i, (c, f) in enumerate(zip(self.cuts, self.flags))
                if f.critical_root and not c.degenerate]


def build_family(P: Polynomial, pairs: Sequence[tuple[Angle, Angle]], *,
                 g0: float, g_start: float = 2.0, substeps: int = 8) -> CutFamily:
    cuts = [build_cut(P, tr, tl, g_start=max(g_start, 2 * g0), substeps=substeps)
            for tr, tl in pairs]
    d = P.degree
    index = {c.pair: i for i, c in enumerate(cuts)}
    forward = tuple(index.get(c.image_pair(d)) for c in cuts)

    crit = critical_points(P)
    max_angle_period = 1
    periodic_flags = []
    for c in cuts:
        pre_r, per_r, _ = tuple_orbit(c.theta_r, d)
        pre_l, per_l, _ = tuple_orbit(c.theta_l, d)
        periodic_flags.append(pre_r == 0 and pre_l == 0)
        max_angle_period = max(max_angle_period, per_r, per_l)
    cycles = tuple(find_cycles(P, max_angle_period))

    # fictitious: degenerate cuts with no nondegenerate cut in their in-family
    # backward orbit
    reaches_nondeg = [not c.degenerate for c in cuts]
    changed = True
    while changed:
        changed = False
        for i, tgt in enumerate(forward):
            if tgt is not None and reaches_nondeg[i] and not reaches_nondeg[tgt]:
                reaches_nondeg[tgt] = True
                changed = True

    flags = []
    for i, c in enumerate(cuts):
        critical_root = min((abs(c.root - cp) for cp in crit), default=math.inf) < ROOT_MATCH_TOL
        fict = c.degenerate and not reaches_nondeg[i]
        flags.append(CutFlags(periodic=periodic_flags[i],
                              preperiodic=not periodic_flags[i],
                              critical_root=critical_root,
                              fictitious=fict))
    wedges = tuple(Wedge.build(P, c, g0) for c in cuts)
    fam = CutFamily(P, tuple(cuts), g0, wedges, forward, tuple(flags), cycles)
    fam.root_class = tuple(classify_root(P, fam, c) for c in cuts)
    return fam


def _terminal_cycle(P: Polynomial, family: CutFamily, cut: Cut) -> Optional[Cycle]:
    """The cycle the cut's root eventually lands on, matched numerically."""
    pre_r, per_r, _ = tuple_orbit(cut.theta_r, P.degree)
    z = cut.root
    for _ in range(pre_r):
        z = P(z)
    for cyc in family.cycles:
        if cyc.contains(z, tol=1e-5):
            return cyc
    return None


def classify_root(P: Polynomial, family: CutFamily, cut: Cut) -> str:
    """outward-repelling / outward-parabolic / unresolved.

    A parabolic terminal cycle is probed through its attracting directions: if
    a direction vector at the root points into some wedge of the family the
    root is outward-parabolic.
    """
    cyc = _terminal_cycle(P, family, cut)
    if cyc is None:
        return "unresolved"
    if cyc.kind == "repelling":
        return "outward-repelling"
    if cyc.kind != "parabolic":
        return "unresolved"
    # the root itself must be on the parabolic cycle for petals to be attached
    on_cycle = cyc.contains(cut.root, tol=1e-5)
    if not on_cycle:
        return "outward-repelling"
    dirs = _attracting_directions(P, cyc, cut.root)
    if dirs is None:
        return "unresolved"
    for v in dirs:
        probe = cut.root + PETAL_RADIUS * v
        if any(w.contains(probe) for w in family.wedges):
            return "outward-parabolic"
    return "outward-repelling"


def _attracting_directions(P: Polynomial, cyc: Cycle, a: complex) -> Optional[list[complex]]:
    """Attracting direction vectors of the parabolic point a.

    Fits the leading term of P^(m q)(a + w) - (a + w) ~ C w^(k+1) from two
    probe radii; k integer within 0.2 is required, otherwise None.
    """
    lam = cyc.multiplier
    q = _root_of_unity_order(lam)
    if q is None:
        return None
    m = cyc.period * q
    r1, r2 = 1e-4, 2e-4
    n_dir = 16

    def mean_abs(r: float) -> float:
        vals = []
        for j in range(n_dir):
            w = r * np.exp(2j * np.pi * j / n_dir)
            vals.append(abs(P.iterate(a + w, m) - (a + w)))
        return float(np.mean(vals))

    g1, g2 = mean_abs(r1), mean_abs(r2)
    if g1 == 0 or g2 == 0:
        return None
    slope = math.log(g2 / g1) / math.log(r2 / r1)
    kp1 = round(slope)
    if abs(slope - kp1) > 0.2 or kp1 < 2:
        return None
    k = kp1 - 1
    # average C over directions
    cs = []
    for j in range(n_dir):
        w = r1 * np.exp(2j * np.pi * (j + 0.37) / n_dir)
        cs.append((P.iterate(a + w, m) - (a + w)) / w**kp1)
    C = complex(np.mean(cs))
    if C == 0:
        return None
    base = (math.pi - np.angle(C)) / k
    return [np.exp(1j * (base + 2 * math.pi * j / k)) for j in range(k)]


def _root_of_unity_order(lam: complex) -> Optional[int]:
    for q in range(1, 65):
        if abs(lam**q - 1) < 1e-4:
            return q
    return None


@dataclass
class CheckRow:
    check: str
    subject: str
    ok: bool
    detail: str


@dataclass
class FamilyReport:
    rows: list[CheckRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.ok]


def check_admissible(P: Polynomial, family: CutFamily, g0: Optional[float] = None) -> FamilyReport:
    """Forward invariance plus the principal-component condition.

    The latter is sampled: no cut's root or ray points may lie strictly inside
    another cut's wedge.
    """
    rows: list[CheckRow] = []
    if len(family) == 0:
        rows.append(CheckRow("admissible", "family", True,
                             "empty family; avoiding set equals the filled Julia set"))
        return FamilyReport(rows)
    for i, (cut, tgt) in enumerate(zip(family.cuts, family.forward_map)):
        pair = cut.image_pair(P.degree)
        rows.append(CheckRow(
            "forward-invariance", f"cut{i}({cut.theta_r},{cut.theta_l})", tgt is not None,
            f"image angles ({pair[0]},{pair[1]}) "
            + (f"found at index {tgt}" if tgt is not None else "missing from family")))
    for i, cut in enumerate(family.cuts):
        samples = _cut_samples(cut)
        for j, w in enumerate(family.wedges):
            if i == j or w.boundary is None:
                continue
            # shared root points (several cuts landing together) sit on the
            # other wedge's boundary; membership there is not decidable
            probe = [z for z in samples if abs(z - w.cut.root) > 1e-5]
            inside = [z for z in probe if w.contains(z)]
            rows.append(CheckRow(
                "principal-component", f"cut{i} vs wedge{j}", len(inside) == 0,
                "disjoint" if not inside else f"{len(inside)} sample(s) inside, e.g. {inside[0]:.4g}"))
    return FamilyReport(rows)


def _cut_samples(cut: Cut, per_ray: int = 36) -> list[complex]:
    out = [cut.root]
    for ray in ([cut.ray_r] if cut.degenerate else [cut.ray_r, cut.ray_l]):
        pts = ray.points
        idx = np.unique(np.linspace(0, len(pts) - 1, per_ray).astype(int))
        out.extend(complex(p) for p in pts[idx])
    return out


def check_legal(P: Polynomial, family: CutFamily) -> FamilyReport:
    """Legality: no fictitious cuts, no nondegenerate periodic cuts, and every
    nondegenerate cut is (pre)critical with a repelling degenerate terminus."""
    rows: list[CheckRow] = []
    for i, (cut, fl) in enumerate(zip(family.cuts, family.flags)):
        subj = f"cut{i}({cut.theta_r},{cut.theta_l})"
        if fl.fictitious:
            rows.append(CheckRow("fictitious", subj, False,
                                 "degenerate cut with no nondegenerate preimage in the family"))
        if not cut.degenerate and fl.periodic:
            rows.append(CheckRow("periodic-nondegenerate", subj, False,
                                 "nondegenerate periodic cut (member of Z_pc)"))
    rows.append(CheckRow("Z_pc-empty", "family",
                         not any(r.check == "periodic-nondegenerate" for r in rows),
                         "no nondegenerate periodic cuts"
                         if not any(r.check == "periodic-nondegenerate" for r in rows)
                         else "Z_pc is nonempty"))
    for i, (cut, fl) in enumerate(zip(family.cuts, family.flags)):
        if cut.degenerate:
            continue
        subj = f"cut{i}({cut.theta_r},{cut.theta_l})"
        # walk the forward orbit within the family
        seen = set()
        j: Optional[int] = i
        hits_critical = fl.critical_root
        terminal: Optional[int] = None
        while j is not None and j not in seen:
            seen.add(j)
            if family.flags[j].critical_root:
                hits_critical = True
            if family.cuts[j].degenerate:
                terminal = j
                break
            j = family.forward_map[j]
        rows.append(CheckRow("precritical", subj, hits_critical,
                             f"root {cut.root:.6g} "
                             + ("is (or maps onto) a critical root"
                                if hits_critical else "never meets a critical root")))
        if terminal is None:
            rows.append(CheckRow("terminus", subj, False,
                                 "forward orbit reaches no degenerate cut"))
        else:
            tcut = family.cuts[terminal]
            cyc = _terminal_cycle(P, family, tcut)
            ok = cyc is not None and cyc.kind == "repelling"
            lam = cyc.multiplier if cyc is not None else float("nan")
            rows.append(CheckRow(
                "terminus", subj, ok,
                f"root {cut.root:.6g} maps to degenerate cut at {tcut.root:.6g}; "
                + (f"terminal cycle multiplier {lam:.6g} ({cyc.kind})" if cyc is not None
                   else "terminal cycle unidentified")))
    for i, cls in enumerate(family.root_class):
        rows.append(CheckRow("outward-class", f"cut{i}", cls != "outward-parabolic",
                             cls))
    return FamilyReport(rows)
