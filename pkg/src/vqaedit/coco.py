"""COCO-style instance annotation ingestion.

Parses the documented annotation format (see FORMATS.md) into typed,
immutable records and builds the per-image object index.  Segmentations
stay in their source form (polygon or run-length) and rasterize on
demand; declared areas are retained but all area logic downstream uses
rasterized pixel counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from vqaedit import masks
from vqaedit.errors import FormatError, IntegrityError


@dataclass(frozen=True)
class CategoryTable:
    entries: tuple[tuple[int, str], ...]

    def __post_init__(self):
        ids = [cid for cid, _ in self.entries]
        names = [name for _, name in self.entries]
        if len(set(ids)) != len(ids):
            raise IntegrityError("duplicate category ids")
        if len(set(names)) != len(names):
            raise IntegrityError("duplicate category names after lowercasing")
        if not self.entries:
            raise IntegrityError("category table must not be empty")

    def ids(self) -> set[int]:
        return {cid for cid, _ in self.entries}

    def name(self, category_id: int) -> str:
        for cid, name in self.entries:
            if cid == category_id:
                return name
        raise KeyError(category_id)

    def id_for(self, name: str) -> int:
        lowered = name.lower()
        for cid, cname in self.entries:
            if cname == lowered:
                return cid
        raise KeyError(name)


@dataclass(frozen=True)
class ImageRecord:
    image_id: int
    width: int
    height: int
    file_name: str

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise FormatError(
                f"image {self.image_id}: non-positive dimensions "
                f"{self.width}x{self.height}"
            )


@dataclass(frozen=True)
class InstanceAnnotation:
    instance_id: int
    image_id: int
    category_id: int
    segmentation: object  # polygon list or {"size": [h, w], "counts": ...}
    declared_area: float
    bbox: tuple[float, float, float, float]

    def rasterize(self, image: ImageRecord) -> masks.SegmentationMask:
        """Rasterize the source segmentation onto the image grid."""
        seg = self.segmentation
        if isinstance(seg, dict):
            h, w = seg["size"]
            if (w, h) != (image.width, image.height):
                raise IntegrityError(
                    f"instance {self.instance_id}: RLE size {w}x{h} does not "
                    f"match image {image.width}x{image.height}"
                )
            counts = seg["counts"]
            if isinstance(counts, str):
                return masks.decode_rle_string(counts, w, h)
            return masks.decode_rle(list(counts), w, h)
        try:
            return masks.rasterize_polygon(seg, image.width, image.height)
        except masks.MaskError as exc:
            raise FormatError(f"instance {self.instance_id}: {exc}") from exc


@dataclass(frozen=True)
class ImageObjectIndex:
    """Per image: the category set O_I and instance ids per category."""

    categories: dict[int, frozenset[int]] = field(default_factory=dict)
    instances: dict[int, dict[int, tuple[int, ...]]] = field(default_factory=dict)

    def present(self, image_id: int) -> frozenset[int]:
        return self.categories.get(image_id, frozenset())

    def instance_ids(self, image_id: int, category_id: int) -> tuple[int, ...]:
        return self.instances.get(image_id, {}).get(category_id, ())


def load_annotations(
    path,
) -> tuple[CategoryTable, list[ImageRecord], list[InstanceAnnotation]]:
    """Load and validate a COCO-instances-style annotation file.

    Returns (categories, images, instances) and prints nothing; callers
    wanting a load summary use :func:`load_summary`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{path}: JSON parse failure at byte {exc.pos} (line {exc.lineno}): "
            f"{exc.msg}"
        ) from exc

    for key in ("images", "annotations", "categories"):
        if key not in raw:
            raise FormatError(f"{path}: missing top-level '{key}' array")

    try:
        table = CategoryTable(
            tuple((int(c["id"]), str(c["name"]).lower()) for c in raw["categories"])
        )
        images = [
            ImageRecord(int(i["id"]), int(i["width"]), int(i["height"]), i["file_name"])
            for i in raw["images"]
        ]
        instances = [
            InstanceAnnotation(
                instance_id=int(a["id"]),
                image_id=int(a["image_id"]),
                category_id=int(a["category_id"]),
                segmentation=a["segmentation"],
                declared_area=float(a.get("area", 0.0)),
                bbox=tuple(a.get("bbox", (0.0, 0.0, 0.0, 0.0))),
            )
            for a in raw["annotations"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed record field: {exc!r}") from exc

    image_ids = {i.image_id for i in images}
    if len(image_ids) != len(images):
        raise IntegrityError(f"{path}: duplicate image ids")
    known_cats = table.ids()
    bad_cat = [a.instance_id for a in instances if a.category_id not in known_cats]
    bad_img = [a.instance_id for a in instances if a.image_id not in image_ids]
    if bad_cat:
        raise IntegrityError(
            f"{path}: instances referencing unknown categories: {sorted(bad_cat)}"
        )
    if bad_img:
        raise IntegrityError(
            f"{path}: instances referencing unknown images: {sorted(bad_img)}"
        )
    return table, images, instances


def load_summary(
    table: CategoryTable,
    images: list[ImageRecord],
    instances: list[InstanceAnnotation],
) -> str:
    return (
        f"loaded {len(images)} images, {len(instances)} instances, "
        f"{len(table.entries)} categories"
    )


def build_object_index(
    images: list[ImageRecord], instances: list[InstanceAnnotation]
) -> ImageObjectIndex:
    """Build O_I sets and deterministic per-category instance lists."""
    per_image: dict[int, dict[int, list[int]]] = {i.image_id: {} for i in images}
    for ann in instances:
        per_image[ann.image_id].setdefault(ann.category_id, []).append(
            ann.instance_id
        )
    categories = {
        img_id: frozenset(cats) for img_id, cats in per_image.items()
    }
    inst = {
        img_id: {cat: tuple(sorted(ids)) for cat, ids in cats.items()}
        for img_id, cats in per_image.items()
    }
    return ImageObjectIndex(categories=categories, instances=inst)


def serialize_corpus(
    table: CategoryTable,
    images: list[ImageRecord],
    instances: list[InstanceAnnotation],
) -> dict:
    """Re-serialize loaded records to the input format (round-trip safe)."""
    return {
        "categories": [{"id": cid, "name": name} for cid, name in table.entries],
        "images": [
            {
                "id": i.image_id,
                "width": i.width,
                "height": i.height,
                "file_name": i.file_name,
            }
            for i in images
        ],
        "annotations": [
            {
                "id": a.instance_id,
                "image_id": a.image_id,
                "category_id": a.category_id,
                "segmentation": a.segmentation,
                "area": a.declared_area,
                "bbox": list(a.bbox),
            }
            for a in instances
        ],
    }
