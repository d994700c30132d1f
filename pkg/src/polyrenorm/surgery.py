"""The carrot modification: a quasi-regular degree-d_c replacement for P.

Inside the outer equipotential the map equals P except on the critical
carrots, where it is replaced by a boundary-respecting blend onto the image
carrot.  Beyond the equipotential an exterior cap interpolates, in
potential-angle coordinates, between the boundary trace of the modified map
and pure degree-d_c stretching, so the assembled map is a d_c-to-1 branched
cover of the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bottcher import bottcher_point, equipotential_polyline, external_angle
from .carrots import Carrot, build_carrots, carrots_disjoint
from .cuts import CutFamily, check_legal
from .errors import CarrotOverlap, ContinuityGap, DegreeMismatch, RenormError
from .grid import GridSpec, Mask, PixelRaster, estimate_bounded_box, run_row_blocks
from .poly import Polynomial, green_potential

RASTER_RES = 4096


def degree_dc(P: Polynomial, family: CutFamily) -> int:
    """d_c = d - sum over critical cuts of d*|I|, each term an exact integer
    because the arc endpoints of a critical cut have the same image angle."""
    d = P.degree
    drop = 0
    for i in family.critical_indices():
        k = family.cuts[i].arc_width() * d
        if k.denominator != 1:
            raise DegreeMismatch(
                f"cut {i}: d*|I| = {k} is not an integer; angles are not a critical pair")
        drop += int(k)
    dc = d - drop
    if dc < 2:
        raise DegreeMismatch(
            f"modified degree would be {dc} < 2; the restriction to the "
            "avoiding set would be injective and the construction degenerates")
    return dc


def _interp_edge(arr: np.ndarray, t: float) -> complex:
    """Linear interpolation along a polyline by normalized parameter."""
    m = len(arr) - 1
    x = min(max(t, 0.0), 1.0) * m
    i = min(int(x), m - 1)
    f = x - i
    return complex(arr[i] * (1.0 - f) + arr[i + 1] * f)


@dataclass
class CoonsPatch:
    """Interior extension over one critical carrot.

    The source carrot (which contains filled-set decorations and therefore
    has no global potential-angle chart) is parametrized by a transfinite
    blend of its boundary arcs: left = side_r from root to equipotential,
    right = side_l, top = the equipotential arc, bottom = the root point.

    The target is the image carrot; there the parametrization is analytic in
    potential-angle coordinates (radial coordinate matched to the source side
    ladder, angle affine between the two spiral sides), so patch images stay
    inside the image carrot by construction -- a plane blend would overshoot
    badly because image carrots wrap a macroscopic angle around the filled
    set.  On the boundary this reduces to P on the sides and to the
    angle-proportional correspondence on the arc.  The range is the image
    carrot minus its own decorations, which suffices for every escape-dynamics
    use of the modified map.
    """

    P: Polynomial
    src_left: np.ndarray   # root ... equip end (side_r)
    src_right: np.ndarray  # root ... equip end (side_l)
    src_top: np.ndarray    # side_r end ... side_l end
    tgt_left: np.ndarray   # image side nodes, for agreement checks
    tgt_right: np.ndarray
    tgt_g: np.ndarray      # radial coordinate: 0 (root) ... d*g0, per edge index
    tgt_th_r: float        # lifted angle of the image side through theta_r
    tgt_th_l: float
    tgt_root: complex

    @classmethod
    def build(cls, P: Polynomial, src: Carrot, tgt: Carrot) -> "CoonsPatch":
        n = min(len(src.side_r.points), len(tgt.side_r.points),
                len(src.side_l.points), len(tgt.side_l.points))
        # sides stored equip-first; edges run root -> equip
        src_left = np.concatenate([[src.cut.root], src.side_r.points[:n][::-1]])
        src_right = np.concatenate([[src.cut.root], src.side_l.points[:n][::-1]])
        tgt_left = np.concatenate([[tgt.cut.root], tgt.side_r.points[:n][::-1]])
        tgt_right = np.concatenate([[tgt.cut.root], tgt.side_l.points[:n][::-1]])
        src_top = src.equip_arc if not src.cut.degenerate else src.equip_arc[::-1]
        tgt_g = np.concatenate([[0.0], tgt.side_r.potentials[:n][::-1]])
        th_r = tgt.cut.theta_r.as_float()
        th_l = th_r + float(tgt.cut.arc_width())
        return cls(P, src_left, src_right, src_top,
                   tgt_left, tgt_right, tgt_g, th_r, th_l, tgt.cut.root)

    def phi_src(self, s: float, t: float) -> complex:
        L = _interp_edge(self.src_left, t)
        R = _interp_edge(self.src_right, t)
        T = _interp_edge(self.src_top, s)
        T0 = complex(self.src_top[0])
        T1 = complex(self.src_top[-1])
        return (1 - s) * L + s * R + t * (T - (1 - s) * T0 - s * T1)

    def phi_tgt(self, s: float, t: float) -> complex:
        g = self._tgt_g_at(t)
        if g <= 0.0:
            return self.tgt_root
        s = min(max(s, 0.0), 1.0)
        theta = (1.0 - s) * (self.tgt_th_r + g) + s * (self.tgt_th_l - g)
        return bottcher_point(self.P, g, theta)

    def invert_src(self, z: complex, tol: float = 1e-9) -> tuple[float, float]:
        """Numerically invert the source blend; best-effort on folds."""
        best = (0.5, 0.5)
        best_d = abs(self.phi_src(0.5, 0.5) - z)
        for k in range(22):
            for m in range(22):
                s, t = k / 21.0, m / 21.0
                dd = abs(self.phi_src(s, t) - z)
                if dd < best_d:
                    best_d, best = dd, (s, t)
        s, t = best
        h = 1e-6
        for _ in range(50):
            f = self.phi_src(s, t) - z
            if abs(f) < tol:
                break
            fs = (self.phi_src(min(s + h, 1.0), t) - self.phi_src(max(s - h, 0.0), t)) / (
                min(s + h, 1.0) - max(s - h, 0.0))
            ft = (self.phi_src(s, min(t + h, 1.0)) - self.phi_src(s, max(t - h, 0.0))) / (
                min(t + h, 1.0) - max(t - h, 0.0))
            a, b_ = fs.real, ft.real
            c, d_ = fs.imag, ft.imag
            det = a * d_ - b_ * c
            if det == 0:
                break
            ds = (-f.real * d_ + f.imag * b_) / det
            dt = (-a * f.imag + c * f.real) / det
            step = max(abs(ds), abs(dt))
            if step > 0.25:
                ds *= 0.25 / step
                dt *= 0.25 / step
            s = min(max(s + ds, 0.0), 1.0)
            t = min(max(t + dt, 0.0), 1.0)
            if max(abs(ds), abs(dt)) < 1e-13:
                break
        return s, t

    def forward(self, z: complex) -> complex:
        s, t = self.invert_src(z)
        return self.phi_tgt(s, t)

    def _tgt_g_at(self, t: float) -> float:
        m = len(self.tgt_g) - 1
        x = min(max(t, 0.0), 1.0) * m
        i = min(int(x), m - 1)
        f = x - i
        return float(self.tgt_g[i] * (1.0 - f) + self.tgt_g[i + 1] * f)

    def _tgt_rows(self, ss: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """phi_tgt on a grid, one warm equipotential sweep per t-row."""
        from fractions import Fraction

        from .bottcher import _descend_chain, _trace_angular, anchor_potential

        anchor = anchor_potential(self.P)
        out = np.empty((len(ss), len(ts)), dtype=complex)
        for j, t in enumerate(ts):
            g = self._tgt_g_at(float(t))
            if g <= 0.0:
                out[:, j] = self.tgt_root
                continue
            a0 = self.tgt_th_r + g
            a1 = self.tgt_th_l - g
            offs = [(1.0 - float(s)) * a0 + float(s) * a1 for s in ss]
            flip = offs[0] > offs[-1]
            if flip:
                offs = offs[::-1]
            ch = _descend_chain(self.P, g, Fraction(0), offs[0], 0, anchor)
            pts, _ = _trace_angular(self.P, g, Fraction(0), offs, ch, anchor)
            out[:, j] = pts[::-1] if flip else pts
        return out

    def dilatation_grid(self, n: int = 32) -> tuple[float, float]:
        """(max singular-value ratio, fraction of orientation-reversing cells)
        of the parametric map target-of(source^{-1}), finite-differenced on a
        shared (s, t) grid so the target map is evaluated once per node."""
        ss = np.linspace(0.0, 1.0, n + 1)
        zs = np.empty((n + 1, n + 1), dtype=complex)
        for i, s in enumerate(ss):
            for j, t in enumerate(ss):
                zs[i, j] = self.phi_src(s, t)
        zt = self._tgt_rows(ss, ss)
        worst = 0.0
        neg = 0
        total = 0
        for i in range(1, n):
            for j in range(1, n):
                js = _grid_jac(zs, i, j)
                jt = _grid_jac(zt, i, j)
                det_s = np.linalg.det(js)
                if abs(det_s) < 1e-14:
                    continue
                A = jt @ np.linalg.inv(js)
                sv = np.linalg.svd(A, compute_uv=False)
                if sv[1] <= 0:
                    continue
                worst = max(worst, float(sv[0] / sv[1]))
                if np.linalg.det(A) < 0:
                    neg += 1
                total += 1
        return worst, (neg / total if total else 0.0)


def _grid_jac(z: np.ndarray, i: int, j: int) -> np.ndarray:
    fs = (z[i + 1, j] - z[i - 1, j]) / 2.0
    ft = (z[i, j + 1] - z[i, j - 1]) / 2.0
    return np.array([[fs.real, ft.real], [fs.imag, ft.imag]])


@dataclass
class ExteriorCap:
    """Annulus blend in potential-angle coordinates.

    Over G in [g0, d*g0] the angle map interpolates between the boundary
    trace of the modified map (a continuous lift alpha, piecewise affine in
    theta) and theta -> d_c * theta, while the new potential interpolates
    d*g0 -> d_c*d*g0; the cap is then continuous against the modified map on
    the inner edge and against pure degree-d_c stretching on the outer edge.
    """

    P: Polynomial
    g0: float
    dc: int
    T0: int
    start: float
    segments: list[tuple[float, float, float, float]]  # (t0, t1, A, B): lift = A + B*theta

    @classmethod
    def build(cls, P: Polynomial, family: CutFamily, carrots: Sequence[Carrot],
              critical: Sequence[int], image_carrots: dict[int, "Carrot"],
              g0: float, dc: int) -> "ExteriorCap":
        d = P.degree
        arcs = []
        for i in critical:
            c = carrots[i]
            lo = c.arc_lo % 1.0
            width = c.arc_hi - c.arc_lo
            tgt = image_carrots[i]
            if tgt.cut.degenerate:
                a0, a1 = tgt.arc_hi, tgt.arc_lo
            else:
                a0, a1 = tgt.arc_lo, tgt.arc_hi
            arcs.append((lo, width, a0, a1))
        segments: list[tuple[float, float, float, float]] = []
        if not arcs:
            if dc != d:
                raise DegreeMismatch("no critical carrots but d_c differs from d")
            return cls(P, g0, dc, 1, 0.0, [(0.0, 1.0, 0.0, float(d))])
        arcs.sort(key=lambda a: a[0])
        start = arcs[0][0]
        pos = start
        lift = arcs[0][2]
        lift0 = lift
        for lo, width, a0, a1 in arcs:
            lo_l = lo if lo >= pos - 1e-12 else lo + 1.0
            if lo_l > pos + 1e-15:
                segments.append((pos, lo_l, lift - d * pos, float(d)))
                lift += d * (lo_l - pos)
                pos = lo_l
            slope = (a1 - a0) / width
            segments.append((pos, pos + width, lift - slope * pos, slope))
            lift += a1 - a0
            pos += width
        if pos < start + 1.0 - 1e-15:
            segments.append((pos, start + 1.0, lift - d * pos, float(d)))
            lift += d * (start + 1.0 - pos)
        if abs((lift - lift0) - dc) > 1e-9:
            raise DegreeMismatch(
                f"boundary trace winds {lift - lift0:.8f}, expected d_c = {dc}")
        return cls(P, g0, dc, 1, start, segments)

    def boundary_lift(self, theta: float) -> float:
        thw = self.start + (theta - self.start) % 1.0
        for t0, t1, A, B in self.segments:
            if t0 - 1e-12 <= thw <= t1 + 1e-12:
                return A + B * thw
        raise RuntimeError("angle not covered by the boundary trace")

    def apply(self, g: float, theta: float) -> complex:
        d = self.P.degree
        g_outer = d ** self.T0 * self.g0
        if g >= g_outer:
            return bottcher_point(self.P, self.dc * g, (self.dc * theta) % 1.0)
        s = (g - self.g0) / (g_outer - self.g0)
        ghat = d * self.g0 + s * (self.dc * g_outer - d * self.g0)
        thw = self.start + (theta - self.start) % 1.0
        alpha = (1.0 - s) * self.boundary_lift(theta) + s * self.dc * thw
        return bottcher_point(self.P, ghat, alpha % 1.0)


@dataclass
class SurgeryMap:
    """Assembled carrot modification with its exterior cap.

    `carrots` live at parameter rho (the modification domains); each critical
    cut also carries its image carrot at parameter rho^d, the range of the
    interior extension.
    """

    P: Polynomial
    family: CutFamily
    carrots: list[Carrot]
    critical: list[int]
    rho: float
    g0: float
    d_c: int
    patches: dict[int, CoonsPatch]
    image_carrots: dict[int, Carrot]
    cap: ExteriorCap
    side_agreement_max: float
    continuity_max_gap: float
    _rasters: dict = field(default_factory=dict, repr=False)

    # -- rasters ------------------------------------------------------------
    def _base_window(self) -> GridSpec:
        if "window" in self._rasters:
            return self._rasters["window"]
        center, half = estimate_bounded_box(self.P)
        pts = [equipotential_polyline(self.P, self.P.degree * self.g0, 256)]
        for c in self.carrots:
            pts.append(c.boundary())
        for arr in pts:
            half = max(half,
                       abs(arr.real.max() - center.real), abs(arr.real.min() - center.real),
                       abs(arr.imag.max() - center.imag), abs(arr.imag.min() - center.imag))
        win = GridSpec(center, 2.0 * half * 1.02, RASTER_RES)
        self._rasters["window"] = win
        return win

    def _raster(self, key: str) -> PixelRaster:
        if key in self._rasters:
            return self._rasters[key]
        win = self._base_window()
        r = PixelRaster(win)
        if key == "crit":
            for i in self.critical:
                r.add_polygon(self.carrots[i].boundary())
        elif key == "u_rho":
            r.add_polygon(equipotential_polyline(self.P, self.g0, 1024))
        elif key == "u_rho_d":
            r.add_polygon(equipotential_polyline(self.P, self.P.degree * self.g0, 1024))
        else:
            raise KeyError(key)
        self._rasters[key] = r
        return r

    # -- evaluation ---------------------------------------------------------
    def evaluate(self, z: complex) -> complex:
        g = green_potential(self.P, z)
        if g < self.g0 * (1.0 - 1e-12):
            for i in self.critical:
                if self.carrots[i].contains(z):
                    return self.patches[i].forward(z)
            return self.P(z)
        theta = external_angle(self.P, z, g=g)
        return self.cap.apply(g, theta)

    def preimage_count(self, w: complex) -> int:
        arr = np.array(self.P.coeffs[::-1], dtype=complex)
        arr[-1] -= w
        count = 0
        for r in np.roots(arr):
            r = complex(r)
            if green_potential(self.P, r) >= self.g0 * (1.0 - 1e-12):
                continue
            if any(self.carrots[i].contains(r) for i in self.critical):
                continue
            count += 1
        for i in self.critical:
            if self.image_carrots[i].contains(w):
                count += 1
        return count


def evaluate_f(S: SurgeryMap, z: complex) -> complex:
    return S.evaluate(z)


def preimage_count_of(S: SurgeryMap, w: complex) -> int:
    return S.preimage_count(w)


def build_surgery(P: Polynomial, family: CutFamily, rho: float, *,
                  checks: bool = True, boundary_samples: int = 1000) -> SurgeryMap:
    """Assemble the carrot modification at parameter rho.

    Verifies legality, carrot disjointness, side-arc agreement with P,
    boundary-trace winding, and cross-validates d_c by preimage counting at
    generic equipotential points (away from the image carrots, where the
    count is the topological degree).
    """
    legal = check_legal(P, family)
    hard = [r for r in legal.failures() if r.check != "fictitious"]
    if hard:
        msgs = "; ".join(f"{r.check}[{r.subject}]" for r in hard)
        raise RenormError(f"family is not legal: {msgs}")
    g0 = -math.log(rho)
    carrots = build_carrots(P, family, rho)
    if not carrots_disjoint(carrots):
        raise CarrotOverlap("carrots are not pairwise disjoint; increase rho")
    critical = family.critical_indices()
    d_c = degree_dc(P, family)

    from .carrots import build_carrot

    patches: dict[int, CoonsPatch] = {}
    image_carrots: dict[int, Carrot] = {}
    side_worst = 0.0
    rho_d = rho ** P.degree
    for i in critical:
        tgt_idx = family.forward_map[i]
        if tgt_idx is None:
            raise RenormError(f"critical cut {i} has no image cut in the family")
        image = build_carrot(P, family, family.cuts[tgt_idx], rho_d)
        image_carrots[i] = image
        patch = CoonsPatch.build(P, carrots[i], image)
        patches[i] = patch
        if checks:
            n = len(patch.src_left)
            idx = np.unique(np.linspace(0, n - 1, min(boundary_samples, n)).astype(int))
            for edge_s, edge_t in ((patch.src_left, patch.tgt_left),
                                   (patch.src_right, patch.tgt_right)):
                gap = np.abs(P(edge_s[idx]) - edge_t[idx]).max()
                side_worst = max(side_worst, float(gap))
    if checks and side_worst > 1e-6:
        raise ContinuityGap(f"side arcs disagree with P by {side_worst:.3g}")

    cap = ExteriorCap.build(P, family, carrots, critical, image_carrots,
                            g0, d_c)

    cont_gap = 0.0
    if checks:
        cont_gap = _cap_continuity_gap(P, carrots, critical, patches, cap, g0,
                                       samples=max(64, boundary_samples // 4))
        if cont_gap > 1e-6:
            raise ContinuityGap(f"cap mismatch {cont_gap:.3g} across the outer equipotential")

    S = SurgeryMap(P, family, carrots, critical, rho, g0, d_c, patches,
                   image_carrots, cap, side_worst, cont_gap)

    if checks:
        _preimage_cross_check(S)
    return S


def _cap_continuity_gap(P, carrots, critical, patches, cap: ExteriorCap,
                        g0: float, samples: int) -> float:
    """Compare the cap on E(rho) against the inside limit of the modified map."""
    worst = 0.0
    for k in range(samples):
        th = (k + 0.31) / samples
        inner = None
        for i in critical:
            c = carrots[i]
            pos = (th - c.arc_lo % 1.0) % 1.0
            width = c.arc_hi - c.arc_lo
            if pos <= width:
                # inside limit on a carrot arc is the patch's top edge value
                inner = patches[i].phi_tgt(pos / width, 1.0)
                break
        if inner is None:
            inner = P(bottcher_point(P, g0, th))
        outer = cap.apply(g0 * (1 + 1e-9), th)
        worst = max(worst, abs(inner - outer))
    return float(worst)


def _preimage_cross_check(S: SurgeryMap, n_points: int = 20) -> None:
    """Count preimages of generic equipotential points.

    Points inside an image carrot are not generic for this purpose (there the
    interior extension and the sheets of P cover jointly); away from the image
    carrots' angular sectors the count is the topological degree.
    """
    d = S.P.degree
    g_test = 0.9 * d * S.g0
    margin = 0.02
    image_arcs = []
    for i in S.critical:
        tgt = S.image_carrots[i]
        lo = (tgt.arc_lo - margin) % 1.0
        image_arcs.append((lo, (tgt.arc_hi - tgt.arc_lo) + 2 * margin))
    tried = 0
    k = 0
    while tried < n_points and k < 16 * n_points:
        th = ((k + 0.123) * 0.61803398875) % 1.0
        k += 1
        if any(((th - lo) % 1.0) <= width for lo, width in image_arcs):
            continue
        w = bottcher_point(S.P, g_test, th)
        cnt = S.preimage_count(w)
        if cnt != S.d_c:
            raise DegreeMismatch(
                f"preimage count {cnt} at angle {th:.4f} differs from d_c = {S.d_c}")
        tried += 1
    if tried == 0:
        raise DegreeMismatch("no generic test angles available for the degree check")


@dataclass
class VisitReport:
    max_visits_crit: int
    max_visits_blend: int
    max_visits_total: int
    t_cr: int
    t_bound: int
    n_seeds: int
    max_iter: int
    seed: int

    @property
    def within_bounds(self) -> bool:
        return self.max_visits_crit <= self.t_cr


def visit_count_experiment(S: SurgeryMap, n_seeds: int, max_iter: int, *,
                           window: Optional[GridSpec] = None,
                           seed: int = 0x5EEDC0DE) -> VisitReport:
    """Count orbit visits to the critical carrots and to the blend annulus.

    Seeds are pseudo-random in the window with a fixed recorded seed.  Orbits
    iterate by P; a visit to a critical carrot applies the interior patch
    (that is where f differs from P on bounded sets), after which the orbit
    escapes through the annulus.  Points that leave the outer annulus can
    never return to either region and are retired.
    """
    win = window or S._base_window()
    rng = np.random.default_rng(seed)
    re = rng.uniform(win.center.real - win.width / 2, win.center.real + win.width / 2, n_seeds)
    im = rng.uniform(win.center.imag - win.width / 2, win.center.imag + win.width / 2, n_seeds)
    z = re + 1j * im
    crit = S._raster("crit")
    u_rho = S._raster("u_rho")
    u_rho_d = S._raster("u_rho_d")
    visits_crit = np.zeros(n_seeds, dtype=np.int32)
    visits_blend = np.zeros(n_seeds, dtype=np.int32)
    live = np.arange(n_seeds)
    zz = z.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iter):
            if live.size == 0:
                break
            in_crit = crit.lookup(zz)
            in_ud = u_rho_d.lookup(zz)
            in_u = u_rho.lookup(zz)
            blend = in_ud & ~in_u & ~in_crit
            visits_crit[live[in_crit]] += 1
            visits_blend[live[blend]] += 1
            # retire orbits beyond the outer annulus
            keep = in_ud
            if in_crit.any():
                idx = np.nonzero(in_crit)[0]
                for k in idx:
                    zz[k] = _patch_forward(S, complex(zz[k]))
                mapped = np.zeros(len(zz), dtype=bool)
                mapped[idx] = True
            else:
                mapped = np.zeros(len(zz), dtype=bool)
            out = np.where(mapped, zz, 0)
            nz = ~mapped
            out = np.array(out)
            out[nz] = S.P(zz[nz])
            good = np.isfinite(out.real) & np.isfinite(out.imag) & keep
            live = live[good]
            zz = out[good]
    t_cr = len(S.critical)
    return VisitReport(int(visits_crit.max(initial=0)), int(visits_blend.max(initial=0)),
                       int((visits_crit + visits_blend).max(initial=0)),
                       t_cr, t_cr + S.cap.T0, n_seeds, max_iter, seed)


def _patch_forward(S: SurgeryMap, z: complex) -> complex:
    for i in S.critical:
        if S.carrots[i].contains(z):
            return S.patches[i].forward(z)
    return S.P(z)  # raster edge effect: treat as unmodified


def nonescaping_mask(S: SurgeryMap, grid: GridSpec, max_iter: int, *,
                     threads: int = 1) -> Mask:
    """Pixels whose orbit under the modified map stays bounded.

    Leaving the outer equipotential means monotone potential growth under the
    cap, and entering a critical carrot lands the orbit in the image carrot
    family, which escapes as well; both are terminal events, so the sweep
    only ever iterates P.
    """
    crit = S._raster("crit")
    u_rho = S._raster("u_rho")
    n = grid.resolution
    bits = np.zeros((n, n), dtype=bool)

    def block(i0: int, i1: int):
        zz = grid.rows_centers(i0, i1).ravel()
        nloc = zz.size
        alive = np.ones(nloc, dtype=bool)
        live = np.arange(nloc)
        z = zz.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(max_iter):
                if live.size == 0:
                    break
                inside = u_rho.lookup(z) & ~crit.lookup(z)
                if not inside.all():
                    alive[live[~inside]] = False
                    live = live[inside]
                    z = z[inside]
                    if live.size == 0:
                        break
                z = S.P(z)
                bad = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
                if bad.any():
                    alive[live[bad]] = False
                    live = live[~bad]
                    z = z[~bad]
        bits[i0:i1, :] = alive.reshape(i1 - i0, grid.resolution)

    run_row_blocks(block, n, threads)
    return Mask(grid, bits)


@dataclass
class DilatationReport:
    per_patch: dict[int, tuple[float, float]]  # (max ratio, reversed fraction)

    @property
    def max_ratio(self) -> float:
        return max((r for r, _ in self.per_patch.values()), default=1.0)

    @property
    def flagged(self) -> bool:
        return self.max_ratio > 100.0


def dilatation_report(S: SurgeryMap, n: int = 64) -> DilatationReport:
    return DilatationReport({i: S.patches[i].dilatation_grid(n) for i in S.critical})
