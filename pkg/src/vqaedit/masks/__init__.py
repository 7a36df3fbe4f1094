"""Binary segmentation masks: rasterization, run-length coding, dilation,
area measurement and the overlap score used to gate removals.

The hot kernels live in a compiled extension (``_core``) with a numpy
fallback (``_pycore``).  The active backend is chosen at import time;
set ``VQAEDIT_MASK_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

if os.environ.get("VQAEDIT_MASK_BACKEND") == "python":
    from vqaedit.masks import _pycore as _impl
else:
    try:
        from vqaedit.masks import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from vqaedit.masks import _pycore as _impl  # type: ignore[no-redef]


def backend_name() -> str:
    """Name of the active kernel backend: "compiled" or "python"."""
    return _impl.BACKEND_NAME


class MaskError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentationMask:
    """A width x height binary mask, row-major, immutable after construction."""

    width: int
    height: int
    bits: np.ndarray = field(compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if arr.shape != (self.height, self.width):
            raise MaskError(
                f"mask grid {arr.shape} does not match {self.height}x{self.width}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @classmethod
    def empty(cls, width: int, height: int) -> "SegmentationMask":
        return cls(width, height, np.zeros((height, width), dtype=np.uint8))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "SegmentationMask":
        arr = np.asarray(arr)
        return cls(arr.shape[1], arr.shape[0], (arr != 0).astype(np.uint8))

    def pixel_count(self) -> int:
        return int(self.bits.sum())

    def same_shape(self, other: "SegmentationMask") -> bool:
        return self.width == other.width and self.height == other.height

    def __eq__(self, other) -> bool:
        if not isinstance(other, SegmentationMask):
            return NotImplemented
        return self.same_shape(other) and bool(np.array_equal(self.bits, other.bits))


def rasterize_polygon(
    polygons: list[list[float]], width: int, height: int
) -> SegmentationMask:
    """Rasterize COCO-style flat [x0, y0, x1, y1, ...] polygons.

    Even-odd scanline fill sampled at pixel centers; multiple polygons
    are unioned; out-of-bounds pixels are clipped.
    """
    arrays = []
    for poly in polygons:
        if len(poly) < 6 or len(poly) % 2 != 0:
            raise MaskError(
                f"degenerate polygon with {len(poly) // 2} vertices (need >= 3)"
            )
        arrays.append(np.asarray(poly, dtype=np.float64).reshape(-1, 2))
    return SegmentationMask(width, height, _impl.fill_polygons(arrays, width, height))


def decode_rle(counts: list[int], width: int, height: int) -> SegmentationMask:
    """Decode column-major alternating run counts (zero runs first)."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size and counts.min() < 0:
        raise MaskError("negative run count")
    total = int(counts.sum())
    if total != width * height:
        raise MaskError(f"run counts sum to {total}, expected {width * height}")
    return SegmentationMask(width, height, _impl.decode_counts(counts, height, width))


def encode_rle(mask: SegmentationMask) -> list[int]:
    """Encode a mask as column-major run counts; inverse of decode_rle."""
    return [int(c) for c in _impl.encode_counts(mask.bits)]


def encode_rle_string(mask: SegmentationMask) -> str:
    """Compact COCO-style compressed run-length string."""
    return _counts_to_string(encode_rle(mask))


def decode_rle_string(s: str, width: int, height: int) -> SegmentationMask:
    return decode_rle(_string_to_counts(s), width, height)


def _counts_to_string(counts: list[int]) -> str:
    # LEB128-style base-32 coding with 6-bit printable chars, runs after the
    # second stored as deltas from the same-parity predecessor
    chars = []
    for i, cnt in enumerate(counts):
        x = cnt
        if i > 2:
            x -= counts[i - 2]
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            chars.append(chr(c + 48))
    return "".join(chars)


def _string_to_counts(s: str) -> list[int]:
    counts: list[int] = []
    p = 0
    while p < len(s):
        x = 0
        k = 0
        more = True
        while more:
            c = ord(s[p]) - 48
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            p += 1
            k += 1
            if not more and (c & 0x10):
                x |= -1 << (5 * k)
        if len(counts) > 2:
            x += counts[-2]
        counts.append(x)
    return counts


def dilate(mask: SegmentationMask, radius: int) -> SegmentationMask:
    """Dilate with a square structuring element of side 2*radius + 1."""
    if radius < 0:
        raise MaskError("dilation radius must be >= 0")
    return SegmentationMask(
        mask.width, mask.height, _impl.dilate_square(mask.bits, radius)
    )


def area_fraction(mask: SegmentationMask) -> float:
    """Set-pixel count over total image area, in [0, 1]."""
    return mask.pixel_count() / (mask.width * mask.height)


def overlap_score(target_mask: SegmentationMask, qa_mask: SegmentationMask) -> float:
    """|target ∩ qa| / |qa|.

    Inputs are expected to be already dilated; the score itself is a plain
    pixel-count ratio and is exact up to float division.
    """
    if not target_mask.same_shape(qa_mask):
        raise MaskError(
            f"mask dimensions differ: {target_mask.width}x{target_mask.height} "
            f"vs {qa_mask.width}x{qa_mask.height}"
        )
    qa_pixels = qa_mask.pixel_count()
    if qa_pixels == 0:
        raise MaskError("overlap score undefined for an empty QA mask")
    inter = int(np.count_nonzero(target_mask.bits & qa_mask.bits))
    return inter / qa_pixels


def union_masks(
    masks: list[SegmentationMask], width: int | None = None, height: int | None = None
) -> SegmentationMask:
    """Bitwise union; an empty list needs explicit dimensions."""
    if not masks:
        if width is None or height is None:
            raise MaskError("union of an empty list needs explicit dimensions")
        return SegmentationMask.empty(width, height)
    first = masks[0]
    acc = first.bits.copy()
    for m in masks[1:]:
        if not m.same_shape(first):
            raise MaskError("union over masks of differing dimensions")
        acc |= m.bits
    return SegmentationMask(first.width, first.height, acc)
