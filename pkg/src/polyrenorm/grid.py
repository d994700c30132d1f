"""Pixel grids, boolean masks, polygon rasterization and mask I/O."""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch

MASK_MAGIC = b"APLMASK1"


@dataclass(frozen=True)
class GridSpec:
    """Square pixel window: n x n pixels, row-major, top row = max imaginary.

    Pixel (i, j) has center  re = cx - w/2 + (j+0.5)*w/n,
                             im = cy + w/2 - (i+0.5)*w/n.
    """

    center: complex
    width: float
    resolution: int

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.resolution < 16:
            raise ValueError("resolution must be at least 16")

    @property
    def pixel(self) -> float:
        return self.width / self.resolution

    def centers(self) -> np.ndarray:
        n = self.resolution
        px = self.pixel
        re = self.center.real - self.width / 2 + (np.arange(n) + 0.5) * px
        im = self.center.imag + self.width / 2 - (np.arange(n) + 0.5) * px
        return re[np.newaxis, :] + 1j * im[:, np.newaxis]

    def rows_centers(self, i0: int, i1: int) -> np.ndarray:
        n = self.resolution
        px = self.pixel
        re = self.center.real - self.width / 2 + (np.arange(n) + 0.5) * px
        im = self.center.imag + self.width / 2 - (np.arange(i0, i1) + 0.5) * px
        return re[np.newaxis, :] + 1j * im[:, np.newaxis]

    def center_of(self, i: int, j: int) -> complex:
        px = self.pixel
        return complex(self.center.real - self.width / 2 + (j + 0.5) * px,
                       self.center.imag + self.width / 2 - (i + 0.5) * px)

    def index_arrays(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        px = self.pixel
        j = np.floor((z.real - (self.center.real - self.width / 2)) / px).astype(np.int64)
        i = np.floor(((self.center.imag + self.width / 2) - z.imag) / px).astype(np.int64)
        return i, j

    def subdivide(self, factor: int) -> "GridSpec":
        return GridSpec(self.center, self.width, self.resolution * factor)


@dataclass
class Mask:
    """Boolean pixel mask over a grid window."""

    grid: GridSpec
    bits: np.ndarray

    def __post_init__(self) -> None:
        n = self.grid.resolution
        if self.bits.shape != (n, n):
            raise ValueError("mask dimensions must match the grid")
        self.bits = self.bits.astype(bool)

    def count(self) -> int:
        return int(self.bits.sum())


def save_mask_raw(mask: Mask, path: str) -> None:
    """16-byte header (magic, u32 width, u32 height, little endian), then
    row-major bits packed MSB-first with rows padded to whole bytes."""
    n = mask.grid.resolution
    header = MASK_MAGIC + struct.pack("<II", n, n)
    packed = np.packbits(mask.bits, axis=1, bitorder="big")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(packed.tobytes())


def load_mask_raw(path: str, grid: GridSpec) -> Mask:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if header[:8] != MASK_MAGIC:
            raise ValueError("bad mask magic")
        w, h = struct.unpack("<II", header[8:16])
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    row_bytes = (w + 7) // 8
    bits = np.unpackbits(data.reshape(h, row_bytes), axis=1, bitorder="big")[:, :w]
    if (w, h) != (grid.resolution, grid.resolution):
        raise GridMismatch("stored mask size differs from grid")
    return Mask(grid, bits.astype(bool))


def fill_polygon(bits: np.ndarray, grid: GridSpec, polygon: np.ndarray) -> None:
    """OR the even-odd interior of a closed polygon into `bits` (pixel centers)."""
    pts = np.asarray(polygon, dtype=complex)
    if abs(pts[0] - pts[-1]) > 0:
        pts = np.append(pts, pts[0])
    x0, y0 = pts[:-1].real, pts[:-1].imag
    x1, y1 = pts[1:].real, pts[1:].imag
    keep = y0 != y1
    x0, y0, x1, y1 = x0[keep], y0[keep], x1[keep], y1[keep]
    if len(x0) == 0:
        return
    n = grid.resolution
    px = grid.pixel
    left = grid.center.real - grid.width / 2
    top = grid.center.imag + grid.width / 2
    ymin = min(y0.min(), y1.min())
    ymax = max(y0.max(), y1.max())
    i_lo = max(0, int(np.floor((top - ymax) / px - 0.5)))
    i_hi = min(n - 1, int(np.ceil((top - ymin) / px - 0.5)))
    slope = (x1 - x0) / (y1 - y0)
    for i in range(i_lo, i_hi + 1):
        y = top - (i + 0.5) * px
        hit = (y0 <= y) != (y1 <= y)
        if not hit.any():
            continue
        xs = np.sort(x0[hit] + (y - y0[hit]) * slope[hit])
        for k in range(0, len(xs) - 1, 2):
            ja = int(np.ceil((xs[k] - left) / px - 0.5))
            jb = int(np.floor((xs[k + 1] - left) / px - 0.5))
            if jb < 0 or ja > n - 1 or jb < ja:
                continue
            bits[i, max(ja, 0):min(jb, n - 1) + 1] = True


@dataclass
class PixelRaster:
    """Shared lookup raster; points outside the window read False."""

    grid: GridSpec
    bits: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.bits is None:
            n = self.grid.resolution
            self.bits = np.zeros((n, n), dtype=bool)

    def add_polygon(self, polygon: np.ndarray) -> None:
        fill_polygon(self.bits, self.grid, polygon)

    def lookup(self, z: np.ndarray) -> np.ndarray:
        i, j = self.grid.index_arrays(np.asarray(z))
        n = self.grid.resolution
        ok = (i >= 0) & (i < n) & (j >= 0) & (j < n)
        out = np.zeros(z.shape, dtype=bool)
        if ok.any():
            out[ok] = self.bits[i[ok], j[ok]]
        return out

    def lookup_scalar(self, z: complex) -> bool:
        return bool(self.lookup(np.array([z]))[0])


def estimate_bounded_box(P, resolution: int = 160, max_iter: int = 96,
                         margin: float = 0.5) -> tuple[complex, float]:
    """Coarse bounding square of the non-escaping set (center, halfwidth)."""
    R = P.escape_radius
    g = GridSpec(0j, 2.0 * R, max(resolution, 16))
    z = g.centers()
    bounded = np.ones(z.shape, dtype=bool)
    w = z.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iter):
            w = P(w)
            esc = np.abs(w) > R
            bounded &= ~esc
            np.copyto(w, 0.0, where=esc)
    if not bounded.any():
        return 0j, 1.0
    rows, cols = np.nonzero(bounded)
    zs = z[rows, cols]
    re_lo, re_hi = zs.real.min(), zs.real.max()
    im_lo, im_hi = zs.imag.min(), zs.imag.max()
    cx = (re_lo + re_hi) / 2
    cy = (im_lo + im_hi) / 2
    half = max(re_hi - re_lo, im_hi - im_lo) / 2 + margin
    return complex(cx, cy), half


def run_row_blocks(fn, n_rows: int, threads: int, block: int = 64) -> list:
    """Apply fn(i0, i1) over row blocks; deterministic assembly by block order."""
    spans = [(i, min(i + block, n_rows)) for i in range(0, n_rows, block)]
    if threads <= 1 or len(spans) == 1:
        return [fn(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        futures = [ex.submit(fn, a, b) for a, b in spans]
        return [f.result() for f in futures]
