"""Pure-Python (numpy) mask kernels.

Fallback implementations of the hot kernels normally provided by the
compiled extension ``vqaedit.masks._core``.  Both backends expose the
same four functions and must produce bit-identical results; the test
suite runs the oracle checks against whichever backend is active and
the benchmark script compares the two directly.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def fill_polygons(polygons: list[np.ndarray], width: int, height: int) -> np.ndarray:
    """Even-odd scanline fill of float polygons, sampled at pixel centers.

    ``polygons`` is a list of (n, 2) float arrays of (x, y) vertices.
    Multiple polygons are unioned.  Pixels outside bounds are clipped.
    """
    mask = np.zeros((height, width), dtype=np.uint8)
    for verts in polygons:
        xs = verts[:, 0]
        ys = verts[:, 1]
        n = len(verts)
        ymin = max(0, int(np.floor(ys.min() - 0.5)))
        ymax = min(height - 1, int(np.ceil(ys.max())))
        for row in range(ymin, ymax + 1):
            yc = row + 0.5
            crossings = []
            for i in range(n):
                x0, y0 = xs[i], ys[i]
                x1, y1 = xs[(i + 1) % n], ys[(i + 1) % n]
                # half-open rule [min, max) avoids double counting at vertices
                if (y0 <= yc < y1) or (y1 <= yc < y0):
                    crossings.append(x0 + (yc - y0) * (x1 - x0) / (y1 - y0))
            crossings.sort()
            for k in range(0, len(crossings) - 1, 2):
                xa, xb = crossings[k], crossings[k + 1]
                # pixel centers c + 0.5 with xa <= c + 0.5 < xb
                c0 = max(0, int(np.ceil(xa - 0.5)))
                c1 = min(width, int(np.ceil(xb - 0.5)))
                if c1 > c0:
                    mask[row, c0:c1] = 1
    return mask


def dilate_square(mask: np.ndarray, radius: int) -> np.ndarray:
    """Morphological dilation with a (2r+1) x (2r+1) square element."""
    if radius == 0:
        return mask.copy()
    out = mask.astype(bool)
    # separable: horizontal segment then vertical segment
    acc = out.copy()
    for s in range(1, radius + 1):
        acc[:, s:] |= out[:, :-s]
        acc[:, :-s] |= out[:, s:]
    out = acc.copy()
    for s in range(1, radius + 1):
        out[s:, :] |= acc[:-s, :]
        out[:-s, :] |= acc[s:, :]
    return out.astype(np.uint8)


def decode_counts(counts: np.ndarray, height: int, width: int) -> np.ndarray:
    """Expand column-major alternating run counts (zeros first) to a mask."""
    values = np.zeros(len(counts), dtype=np.uint8)
    values[1::2] = 1
    flat = np.repeat(values, counts)
    return flat.reshape((height, width), order="F")


def encode_counts(mask: np.ndarray) -> np.ndarray:
    """Inverse of :func:`decode_counts`; always starts with a zero run."""
    flat = np.ascontiguousarray(mask.ravel(order="F"), dtype=np.uint8)
    if flat.size == 0:
        return np.zeros(0, dtype=np.int64)
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    counts = np.diff(edges).astype(np.int64)
    if flat[0] == 1:
        counts = np.concatenate(([0], counts))
    return counts
