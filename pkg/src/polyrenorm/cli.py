"""Scene-driven command line front end.

Exit codes: 0 when all verdicts pass, 2 when a check fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import Optional

from . import render
from .angles import Angle
from .avoiding import compare_masks, connected_components, escape_analysis
from .bottcher import land_ray
from .carrots import build_carrots, carrot_geometry
from .cuts import build_family, check_admissible, check_legal, FamilyReport
from .errors import RenormError, SceneError
from .grid import GridSpec, PixelRaster, save_mask_raw
from .scene import Scene, figure1_scene, load_scene
from .surgery import build_surgery, dilatation_report, nonescaping_mask, visit_count_experiment
from .verify import conjugacy_report


def _resolve_threads(value: Optional[int]) -> int:
    if value is None:
        env = os.environ.get("RENORM_THREADS")
        value = int(env) if env else 1
    if value == 0:
        value = os.cpu_count() or 1
    return max(1, value)


def _load(args) -> Scene:
    if getattr(args, "scene", None):
        scene = load_scene(args.scene)
    else:
        scene = figure1_scene()
    if args.resolution:
        scene.grid = GridSpec(scene.grid.center, scene.grid.width, args.resolution)
    if args.max_iter:
        scene.max_iter = args.max_iter
    return scene


def _write_rows(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _report_rows(report: FamilyReport) -> list[list]:
    return [[r.check, r.subject, "PASS" if r.ok else "FAIL", r.detail] for r in report.rows]


def _family_from_scene(scene: Scene):
    return build_family(scene.polynomial, scene.cuts, g0=scene.g0)


def cmd_julia(args) -> int:
    scene = _load(args)
    threads = _resolve_threads(args.threads)
    res = escape_analysis(scene.polynomial, None, scene.grid, scene.max_iter,
                          threads=threads, supersample=args.supersample)
    os.makedirs(args.out, exist_ok=True)
    render.write_ppm(os.path.join(args.out, "julia.ppm"),
                     render.render_mask(res.kp, res.esc_steps))
    save_mask_raw(res.kp, os.path.join(args.out, "julia_mask.raw"))
    comp = connected_components(res.kp)
    print(f"filled Julia mask: {res.kp.count()} pixels, "
          f"{comp.count} component(s) after closing")
    return 0


def cmd_ray(args) -> int:
    scene = _load(args)
    P = scene.polynomial
    angles = [Angle.parse(a) for a in args.angle] or [tr for tr, _ in scene.cuts]
    rows = []
    ok = True
    for theta in angles:
        ray = land_ray(P, theta, g_start=scene.g_start)
        for t, z in zip(ray.potentials, ray.points):
            rows.append([theta.num, theta.den, repr(float(t)),
                         repr(float(z.real)), repr(float(z.imag))])
        stat = "lands" if ray.landing.converged else "does not certifiably land"
        print(f"ray {theta}: {stat} at {ray.landing.point:.9g} ({ray.landing.method})")
        ok = ok and ray.landing.converged
    os.makedirs(args.out, exist_ok=True)
    _write_rows(os.path.join(args.out, "rays.csv"),
                ["angle_num", "angle_den", "potential", "re", "im"], rows)
    return 0 if ok else 2


def cmd_cuts_check(args) -> int:
    scene = _load(args)
    family = _family_from_scene(scene)
    adm = check_admissible(scene.polynomial, family)
    leg = check_legal(scene.polynomial, family)
    os.makedirs(args.out, exist_ok=True)
    _write_rows(os.path.join(args.out, "checks.csv"),
                ["check", "subject", "verdict", "detail"],
                _report_rows(adm) + _report_rows(leg))
    for r in adm.rows + leg.rows:
        print(f"[{'PASS' if r.ok else 'FAIL'}] {r.check} {r.subject}: {r.detail}")
    return 0 if adm.ok and leg.ok else 2


def cmd_avoid(args) -> int:
    scene = _load(args)
    threads = _resolve_threads(args.threads)
    family = _family_from_scene(scene)
    res = escape_analysis(scene.polynomial, family, scene.grid, scene.max_iter,
                          threads=threads, supersample=args.supersample)
    comp = connected_components(res.avoiding)
    os.makedirs(args.out, exist_ok=True)
    render.write_ppm(os.path.join(args.out, "avoiding.ppm"),
                     render.render_scene_image(res.kp, res.avoiding, res.esc_steps))
    save_mask_raw(res.avoiding, os.path.join(args.out, "avoiding_mask.raw"))
    strict_subset = (res.avoiding.bits <= res.kp.bits).all() \
        and res.avoiding.count() < res.kp.count()
    print(f"avoiding set: {res.avoiding.count()} pixels "
          f"(filled set {res.kp.count()}), {comp.count} component(s) after closing")
    return 0 if comp.count == 1 and strict_subset else 2


def cmd_carrot(args) -> int:
    scene = _load(args)
    family = _family_from_scene(scene)
    carrots = build_carrots(scene.polynomial, family, scene.rho)
    os.makedirs(args.out, exist_ok=True)
    brows, grows = [], []
    for i, c in enumerate(carrots):
        for z in c.boundary():
            brows.append([i, repr(float(z.real)), repr(float(z.imag))])
        est = carrot_geometry(scene.polynomial, c)
        grows.append([i, str(c.cut.theta_r), str(c.cut.theta_l),
                      repr(est.quasi_arc_C), repr(est.transversality_gap),
                      repr(est.weak_qs_kappa), est.sample_count])
        print(f"carrot {i} ({c.cut.theta_r},{c.cut.theta_l}): "
              f"C={est.quasi_arc_C:.4g} gap={est.transversality_gap:.4g} "
              f"kappa={est.weak_qs_kappa:.4g}")
    _write_rows(os.path.join(args.out, "carrot_boundaries.csv"),
                ["carrot", "re", "im"], brows)
    _write_rows(os.path.join(args.out, "geometry.csv"),
                ["carrot", "theta_r", "theta_l", "quasi_arc_C",
                 "transversality_gap", "weak_qs_kappa", "samples"], grows)
    return 0


def cmd_surgery(args) -> int:
    scene = _load(args)
    threads = _resolve_threads(args.threads)
    family = _family_from_scene(scene)
    S = build_surgery(scene.polynomial, family, scene.rho)
    visits = visit_count_experiment(S, args.seeds, scene.max_iter,
                                    window=scene.grid, seed=scene.seed)
    res = escape_analysis(scene.polynomial, family, scene.grid, scene.max_iter,
                          threads=threads)
    fmask = nonescaping_mask(S, scene.grid, scene.max_iter, threads=threads)
    cmp_ = compare_masks(fmask, res.avoiding, band=2)
    dil = dilatation_report(S, n=32)
    os.makedirs(args.out, exist_ok=True)
    save_mask_raw(fmask, os.path.join(args.out, "nonescaping_mask.raw"))
    render.write_ppm(os.path.join(args.out, "nonescaping.ppm"), render.render_mask(fmask))
    rows = [
        ["degree", S.P.degree],
        ["degree_dc", S.d_c],
        ["t_cr", visits.t_cr],
        ["t0", S.cap.T0],
        ["max_visits_critical", visits.max_visits_crit],
        ["max_visits_blend", visits.max_visits_blend],
        ["max_visits_total", visits.max_visits_total],
        ["rng_seed", visits.seed],
        ["side_agreement_max", repr(S.side_agreement_max)],
        ["continuity_max_gap", repr(S.continuity_max_gap)],
        ["dilatation_max", repr(dil.max_ratio)],
        ["dilatation_flagged", dil.flagged],
        ["mask_agreement", repr(cmp_.agreement)],
        ["mask_agreement_outside_band", repr(cmp_.agreement_outside_band)],
    ]
    _write_rows(os.path.join(args.out, "surgery.csv"), ["key", "value"], rows)
    for k, v in rows:
        print(f"{k}: {v}")
    ok = visits.within_bounds and cmp_.agreement_outside_band >= 0.97
    return 0 if ok else 2


def cmd_verify(args) -> int:
    scene = _load(args)
    if scene.candidate_q is None:
        print("scene has no candidate_q polynomial", file=sys.stderr)
        return 1
    family = _family_from_scene(scene)
    rep = conjugacy_report(scene.polynomial, family, scene.candidate_q,
                           args.max_period)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for r in rep.rows:
        rows.append([r.period, r.count_restricted, r.count_candidate,
                     "PASS" if r.counts_match else "FAIL",
                     "PASS" if r.multipliers_match else "FAIL",
                     ";".join(f"{m:.9g}" for m in r.nonrep_restricted),
                     ";".join(f"{m:.9g}" for m in r.nonrep_candidate)])
    _write_rows(os.path.join(args.out, "conjugacy.csv"),
                ["period", "count_restricted", "count_candidate",
                 "counts", "multipliers", "nonrep_restricted", "nonrep_candidate"],
                rows)
    lines = [f"conjugacy evidence: {'PASS' if rep.verdict else 'FAIL'} "
             f"(candidate degree {rep.degree}, {len(rep.ambiguous)} ambiguous cycle(s))"]
    for r in rep.rows:
        lines.append(
            f"  period {r.period}: {r.count_restricted} restricted vs "
            f"{r.count_candidate} candidate cycles "
            f"[counts {'ok' if r.counts_match else 'MISMATCH'}, "
            f"non-repelling multipliers {'ok' if r.multipliers_match else 'MISMATCH'}]")
    with open(os.path.join(args.out, "conjugacy.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(lines[0])
    return 0 if rep.verdict else 2


def cmd_figure1(args) -> int:
    scene = figure1_scene(resolution=args.resolution or 1024,
                          max_iter=args.max_iter or 512)
    threads = _resolve_threads(args.threads)
    P = scene.polynomial
    os.makedirs(args.out, exist_ok=True)
    verdicts: list[tuple[str, bool, str]] = []

    family = _family_from_scene(scene)
    adm = check_admissible(P, family)
    leg = check_legal(P, family)
    verdicts.append(("admissible", adm.ok, f"{len(adm.rows)} checks"))
    verdicts.append(("legal", leg.ok, f"{len(leg.rows)} checks"))
    _write_rows(os.path.join(args.out, "checks.csv"),
                ["check", "subject", "verdict", "detail"],
                _report_rows(adm) + _report_rows(leg))

    ray_rows = []
    for cut in family.cuts:
        for ray in ((cut.ray_r,) if cut.degenerate else (cut.ray_r, cut.ray_l)):
            for t, z in zip(ray.potentials, ray.points):
                ray_rows.append([ray.angle.num, ray.angle.den, repr(float(t)),
                                 repr(float(z.real)), repr(float(z.imag))])
    _write_rows(os.path.join(args.out, "rays.csv"),
                ["angle_num", "angle_den", "potential", "re", "im"], ray_rows)

    res = escape_analysis(P, family, scene.grid, scene.max_iter,
                          threads=threads, supersample=args.supersample)
    comp = connected_components(res.avoiding)
    subset = bool((res.avoiding.bits <= res.kp.bits).all()
                  and res.avoiding.count() < res.kp.count())
    verdicts.append(("avoiding-strict-subset", subset,
                     f"{res.avoiding.count()} of {res.kp.count()} pixels"))
    verdicts.append(("avoiding-connected", comp.count == 1,
                     f"{comp.count} component(s) after closing"))

    carrots = build_carrots(P, family, scene.rho)
    grows = []
    for i, c in enumerate(carrots):
        est = carrot_geometry(P, c)
        grows.append([i, str(c.cut.theta_r), str(c.cut.theta_l),
                      repr(est.quasi_arc_C), repr(est.transversality_gap),
                      repr(est.weak_qs_kappa), est.sample_count])
    _write_rows(os.path.join(args.out, "geometry.csv"),
                ["carrot", "theta_r", "theta_l", "quasi_arc_C",
                 "transversality_gap", "weak_qs_kappa", "samples"], grows)

    try:
        S = build_surgery(P, family, scene.rho)
        verdicts.append(("surgery-degree",
                         True, f"d_c = {S.d_c} by formula and preimage count"))
    except RenormError as exc:
        verdicts.append(("surgery-degree", False, str(exc)))
        S = None
    if S is not None:
        visits = visit_count_experiment(S, args.seeds, 512, window=scene.grid,
                                        seed=scene.seed)
        verdicts.append(("visit-bound", visits.within_bounds,
                         f"max critical-carrot visits {visits.max_visits_crit} "
                         f"<= T_cr = {visits.t_cr}"))
        fres = min(scene.grid.resolution, 512)
        fgrid = GridSpec(scene.grid.center, scene.grid.width, fres)
        if fres == scene.grid.resolution:
            a512 = res.avoiding
        else:
            a512 = escape_analysis(P, family, fgrid, scene.max_iter,
                                   threads=threads).avoiding
        fmask = nonescaping_mask(S, fgrid, scene.max_iter, threads=threads)
        cmp_ = compare_masks(fmask, a512, band=2)
        verdicts.append(("nonescaping-agreement",
                         cmp_.agreement_outside_band >= 0.97,
                         f"{cmp_.agreement_outside_band:.4f} outside 2-pixel band"))
        dil = dilatation_report(S, n=32)
        _write_rows(os.path.join(args.out, "surgery.csv"), ["key", "value"], [
            ["degree", P.degree], ["degree_dc", S.d_c],
            ["t_cr", visits.t_cr], ["t0", S.cap.T0],
            ["max_visits_critical", visits.max_visits_crit],
            ["max_visits_blend", visits.max_visits_blend],
            ["rng_seed", visits.seed],
            ["side_agreement_max", repr(S.side_agreement_max)],
            ["continuity_max_gap", repr(S.continuity_max_gap)],
            ["dilatation_max", repr(dil.max_ratio)],
            ["mask_agreement_outside_band", repr(cmp_.agreement_outside_band)],
        ])
        save_mask_raw(fmask, os.path.join(args.out, "nonescaping_mask.raw"))

    rep = conjugacy_report(P, family, scene.candidate_q, 3)
    verdicts.append(("conjugacy", rep.verdict,
                     "cycle counts and non-repelling multipliers match"))
    _write_rows(os.path.join(args.out, "conjugacy.csv"),
                ["period", "count_restricted", "count_candidate",
                 "counts", "multipliers", "nonrep_restricted", "nonrep_candidate"],
                [[r.period, r.count_restricted, r.count_candidate,
                  "PASS" if r.counts_match else "FAIL",
                  "PASS" if r.multipliers_match else "FAIL",
                  ";".join(f"{m:.9g}" for m in r.nonrep_restricted),
                  ";".join(f"{m:.9g}" for m in r.nonrep_candidate)]
                 for r in rep.rows])

    wedges = PixelRaster(scene.grid)
    for w in family.wedges:
        if w.boundary is not None:
            wedges.add_polygon(w.boundary)
    img = render.render_scene_image(res.kp, res.avoiding, res.esc_steps, wedges.bits)
    for cut in family.cuts:
        render.draw_polyline(img, scene.grid, cut.ray_r.points, render.COLOR_RAY)
        if not cut.degenerate:
            render.draw_polyline(img, scene.grid, cut.ray_l.points, render.COLOR_RAY)
    for c in carrots:
        render.draw_polyline(img, scene.grid, c.boundary(), render.COLOR_CARROT)
    render.write_ppm(os.path.join(args.out, "figure1.ppm"), img)
    save_mask_raw(res.avoiding, os.path.join(args.out, "avoiding_mask.raw"))

    lines = []
    for name, ok, detail in verdicts:
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        print(lines[-1])
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0 if all(ok for _, ok, _ in verdicts) else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyrenorm",
                                description="Julia sets, external rays, cuts, "
                                            "carrots and carrot surgery")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scene_required=True):
        sp.add_argument("--scene", help="scene JSON path", default=None,
                        required=scene_required)
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--resolution", type=int, default=None)
        sp.add_argument("--max-iter", type=int, default=None, dest="max_iter")
        sp.add_argument("--threads", type=int, default=None,
                        help="0 = auto; RENORM_THREADS as fallback")
        sp.add_argument("--supersample", type=int, choices=(1, 2), default=1)

    sp = sub.add_parser("julia", help="filled Julia set image")
    common(sp)
    sp.set_defaults(fn=cmd_julia)

    sp = sub.add_parser("ray", help="trace external rays to CSV")
    common(sp)
    sp.add_argument("--angle", action="append", default=[],
                    help="angle as p/q; repeatable")
    sp.set_defaults(fn=cmd_ray)

    sp = sub.add_parser("cuts-check", help="admissibility and legality report")
    common(sp)
    sp.set_defaults(fn=cmd_cuts_check)

    sp = sub.add_parser("avoid", help="avoiding-set image and connectivity")
    common(sp)
    sp.set_defaults(fn=cmd_avoid)

    sp = sub.add_parser("carrot", help="carrot boundaries and geometry estimates")
    common(sp)
    sp.set_defaults(fn=cmd_carrot)

    sp = sub.add_parser("surgery", help="carrot modification and experiments")
    common(sp)
    sp.add_argument("--seeds", type=int, default=10000)
    sp.set_defaults(fn=cmd_surgery)

    sp = sub.add_parser("verify", help="conjugacy evidence against candidate_q")
    common(sp)
    sp.add_argument("--max-period", type=int, default=3, dest="max_period")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("figure1", help="end-to-end pipeline on the built-in scene")
    common(sp, scene_required=False)
    sp.add_argument("--seeds", type=int, default=10000)
    sp.set_defaults(fn=cmd_figure1)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SceneError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return 1
    except RenormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
