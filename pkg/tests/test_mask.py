import numpy as np
import pytest
from scipy import ndimage

from polyrenorm import (GridSpec, Mask, compare_masks, compute_mask,
                        connected_components, escape_analysis, load_mask_raw,
                        save_mask_raw)
from polyrenorm.errors import GridMismatch

from conftest import CUBIC, SQUARE


def test_square_julia_is_unit_disk():
    grid = GridSpec(0j, 4.0, 256)
    mask = compute_mask(SQUARE, None, grid, 128)
    exact = np.abs(grid.centers()) <= 1.0
    assert (mask.bits ^ exact).mean() < 0.01


def test_grid_affine_contract():
    grid = GridSpec(complex(-1.0, 0.5), 4.0, 64)
    px = grid.pixel
    assert grid.center_of(0, 0) == complex(-1.0 - 2.0 + px / 2, 0.5 + 2.0 - px / 2)
    assert grid.center_of(63, 63) == pytest.approx(
        complex(-1.0 + 2.0 - px / 2, 0.5 - 2.0 + px / 2))
    centers = grid.centers()
    assert centers[0, 0] == grid.center_of(0, 0)
    assert centers[63, 0] == grid.center_of(63, 0)
    i, j = grid.index_arrays(np.array([grid.center_of(10, 20)]))
    assert (i[0], j[0]) == (10, 20)


def test_avoiding_subset_and_empty_family(fig1_masks, fig1_grid, fig1_family):
    kp, av = fig1_masks.kp, fig1_masks.avoiding
    assert (av.bits <= kp.bits).all()
    assert av.count() < kp.count()
    # empty family: avoiding mask equals the plain filled-Julia mask
    from polyrenorm import build_family
    empty = build_family(CUBIC, [], g0=0.125)
    res = escape_analysis(CUBIC, empty, fig1_grid, 256)
    assert (res.avoiding.bits == res.kp.bits).all()


def test_forward_invariance_at_pixel_scale(fig1_masks, fig1_grid):
    av = fig1_masks.avoiding
    rows, cols = np.nonzero(av.bits)
    z = np.array([fig1_grid.center_of(i, j) for i, j in zip(rows, cols)])
    w = CUBIC(z)
    dilated = ndimage.binary_dilation(av.bits, structure=np.ones((3, 3)))
    i, j = fig1_grid.index_arrays(w)
    n = fig1_grid.resolution
    ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
    hits = dilated[i[ok], j[ok]]
    assert hits.mean() >= 0.99


def test_wedge_exclusion(fig1_masks, fig1_grid, fig1_family):
    av = fig1_masks.avoiding
    rows, cols = np.nonzero(av.bits)
    idx = np.linspace(0, len(rows) - 1, 200).astype(int)
    w = fig1_family.wedges[0]
    from polyrenorm.cuts import _distance_to_polyline
    for k in idx:
        z = fig1_grid.center_of(int(rows[k]), int(cols[k]))
        if w.contains(z):
            # violations may only sit within raster granularity of the boundary
            assert _distance_to_polyline(w.boundary, z) < 2 * fig1_grid.pixel


def test_connected_components_basics():
    grid = GridSpec(0j, 1.0, 16)
    full = Mask(grid, np.ones((16, 16), dtype=bool))
    rep = connected_components(full)
    assert rep.count == 1 and rep.sizes == [256]

    bits = np.zeros((16, 16), dtype=bool)
    bits[2:5, 2:5] = True
    bits[10:13, 10:13] = True
    rep = connected_components(Mask(grid, bits))
    assert rep.count == 2
    assert rep.sizes == [9, 9]


def test_closing_bridges_one_pixel_gap():
    grid = GridSpec(0j, 1.0, 16)
    bits = np.zeros((16, 16), dtype=bool)
    bits[8, 2:7] = True
    bits[8, 8:13] = True  # one-pixel gap at column 7
    rep = connected_components(Mask(grid, bits))
    assert rep.raw_count == 2
    assert rep.count == 1


def test_compare_masks():
    grid = GridSpec(0j, 1.0, 32)
    a = Mask(grid, np.ones((32, 32), dtype=bool))
    b = Mask(grid, np.ones((32, 32), dtype=bool))
    cmp_ = compare_masks(a, b, band=1)
    assert cmp_.agreement == 1.0 and cmp_.symdiff_outside_band == 0

    empty = Mask(grid, np.zeros((32, 32), dtype=bool))
    assert compare_masks(a, empty).agreement == 0.0

    with pytest.raises(GridMismatch):
        compare_masks(a, Mask(GridSpec(0j, 2.0, 32), np.ones((32, 32), dtype=bool)))


def test_kp_vs_avoiding_disagree(fig1_masks):
    cmp_ = compare_masks(fig1_masks.kp, fig1_masks.avoiding, band=0)
    assert cmp_.agreement < 1.0  # decorations removed


def test_supersample_mode(fig1_family, fig1_grid):
    res = escape_analysis(CUBIC, fig1_family, fig1_grid, 128, supersample=2)
    assert res.avoiding.bits.shape == (256, 256)
    assert (res.avoiding.bits <= res.kp.bits).all()


def test_threads_deterministic(fig1_family, fig1_grid):
    a = escape_analysis(CUBIC, fig1_family, fig1_grid, 128, threads=1)
    b = escape_analysis(CUBIC, fig1_family, fig1_grid, 128, threads=8)
    assert (a.kp.bits == b.kp.bits).all()
    assert (a.avoiding.bits == b.avoiding.bits).all()
    assert (a.esc_steps == b.esc_steps).all()


def test_mask_raw_roundtrip(tmp_path, fig1_masks, fig1_grid):
    path = str(tmp_path / "m.raw")
    save_mask_raw(fig1_masks.avoiding, path)
    back = load_mask_raw(path, fig1_grid)
    assert (back.bits == fig1_masks.avoiding.bits).all()
    with open(path, "rb") as fh:
        head = fh.read(16)
    assert head[:8] == b"APLMASK1"
    assert int.from_bytes(head[8:12], "little") == fig1_grid.resolution
