"""Scene files: JSON descriptions of a polynomial, cuts, grid and budgets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from .angles import Angle
from .errors import SceneError
from .grid import GridSpec
from .poly import Polynomial

DEFAULT_RHO = math.exp(-0.125)  # outer equipotential at potential 1/8
DEFAULT_SEED = 0x5EEDC0DE


@dataclass
class Scene:
    name: str
    polynomial: Polynomial
    cuts: list[tuple[Angle, Angle]]
    grid: GridSpec
    max_iter: int
    rho: float
    candidate_q: Optional[Polynomial] = None
    seed: int = DEFAULT_SEED
    palette: str = "figure"
    substeps: int = 8
    g_start: float = 2.0

    @property
    def g0(self) -> float:
        return -math.log(self.rho)


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise SceneError(path, msg)


def _parse_poly(data: Any, path: str) -> Polynomial:
    _expect(isinstance(data, dict), path, "expected an object")
    coeffs = data.get("coeffs")
    _expect(isinstance(coeffs, list) and len(coeffs) >= 3, f"{path}.coeffs",
            "expected a list of at least 3 [re, im] pairs (degree >= 2)")
    for k, c in enumerate(coeffs):
        _expect(isinstance(c, list) and len(c) == 2
                and all(isinstance(v, (int, float)) for v in c),
                f"{path}.coeffs[{k}]", "expected [re, im]")
    lead = coeffs[-1]
    _expect(abs(lead[0] - 1.0) < 1e-12 and abs(lead[1]) < 1e-12,
            f"{path}.coeffs[{len(coeffs) - 1}]",
            "leading coefficient must be [1, 0] (monic)")
    return Polynomial.from_json_coeffs(coeffs)


def _parse_angle(text: Any, path: str) -> Angle:
    _expect(isinstance(text, str), path, "angles are strings like \"1/3\"")
    try:
        return Angle.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SceneError(path, f"bad angle: {exc}") from exc


def scene_from_dict(data: dict, base: str = "scene") -> Scene:
    _expect(isinstance(data, dict), base, "expected a JSON object")
    poly = _parse_poly(data.get("polynomial"), f"{base}.polynomial")

    cuts = []
    raw_cuts = data.get("cuts", [])
    _expect(isinstance(raw_cuts, list), f"{base}.cuts", "expected a list")
    for k, rc in enumerate(raw_cuts):
        _expect(isinstance(rc, dict), f"{base}.cuts[{k}]", "expected an object")
        tr = _parse_angle(rc.get("theta_r"), f"{base}.cuts[{k}].theta_r")
        tl = _parse_angle(rc.get("theta_l"), f"{base}.cuts[{k}].theta_l")
        cuts.append((tr, tl))

    g = data.get("grid")
    _expect(isinstance(g, dict), f"{base}.grid", "expected an object")
    center = g.get("center")
    _expect(isinstance(center, list) and len(center) == 2,
            f"{base}.grid.center", "expected [re, im]")
    width = g.get("width")
    _expect(isinstance(width, (int, float)) and width > 0,
            f"{base}.grid.width", "expected a positive number")
    res = g.get("resolution")
    _expect(isinstance(res, int) and res >= 16,
            f"{base}.grid.resolution", "expected an integer >= 16")
    grid = GridSpec(complex(center[0], center[1]), float(width), res)

    max_iter = data.get("max_iter", 512)
    _expect(isinstance(max_iter, int) and max_iter >= 1,
            f"{base}.max_iter", "expected a positive integer")
    rho = data.get("rho", DEFAULT_RHO)
    _expect(isinstance(rho, (int, float)) and 0 < rho < 1,
            f"{base}.rho", "expected a number in (0, 1)")

    q = None
    if data.get("candidate_q") is not None:
        q = _parse_poly(data["candidate_q"], f"{base}.candidate_q")

    seed = data.get("seed", DEFAULT_SEED)
    _expect(isinstance(seed, int), f"{base}.seed", "expected an integer")
    palette = data.get("palette", "figure")
    _expect(palette in ("figure", "grey"), f"{base}.palette",
            "expected \"figure\" or \"grey\"")
    return Scene(
        name=str(data.get("name", "scene")),
        polynomial=poly,
        cuts=cuts,
        grid=grid,
        max_iter=max_iter,
        rho=float(rho),
        candidate_q=q,
        seed=seed,
        palette=palette,
    )


def load_scene(path: str) -> Scene:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SceneError(path, f"invalid JSON: {exc}") from exc
    return scene_from_dict(data, base=path)


def figure1_scene(resolution: int = 1024, max_iter: int = 512) -> Scene:
    """Built-in scene: the cubic z(z+2)^2 with the cut pair (1/3, 2/3) and the
    degenerate cut at angle 0; candidate quadratic z^2 - z."""
    return scene_from_dict({
        "name": "figure1",
        "polynomial": {"coeffs": [[0, 0], [4, 0], [4, 0], [1, 0]]},
        "cuts": [
            {"theta_r": "1/3", "theta_l": "2/3"},
            {"theta_r": "0", "theta_l": "0"},
        ],
        "grid": {"center": [-1.25, 0.0], "width": 4.5, "resolution": resolution},
        "max_iter": max_iter,
        "rho": DEFAULT_RHO,
        "candidate_q": {"coeffs": [[0, 0], [-1, 0], [1, 0]]},
        "seed": DEFAULT_SEED,
        "palette": "figure",
    })
