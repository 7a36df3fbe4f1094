"""Invariant (IV) and covariant (CV) edit selection.

IV: remove every instance of a category present in the image but not
mentioned in the QA, provided its largest instance is small enough and
its dilated mask barely overlaps the dilated QA-object masks.  The
answer is unchanged.

CV: for counting questions whose instance count matches the answer,
remove one instance at a time, provided it is small and its dilated mask
does not touch the other instances of the counted category.  The answer
drops by one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from vqaedit import masks as mops
from vqaedit.coco import ImageObjectIndex
from vqaedit.errors import ConfigError, FormatError, IntegrityError
from vqaedit.masks import SegmentationMask
from vqaedit.vocab import QaObjectSet
from vqaedit.vqa import IqaTriplet

MANIFEST_SCHEMA = 1


@dataclass(frozen=True)
class SelectionConfig:
    area_threshold: float = 0.10
    iv_overlap_threshold: float = 0.10
    cv_overlap_threshold: float = 0.0
    dilate_radius: int = 3
    strict_iv: bool = False
    dilate_both: bool = True  # dilate target and QA masks; False: target only
    qa_overlap_per_category: bool = False  # max over per-category QA masks

    def __post_init__(self):
        for name in ("area_threshold", "iv_overlap_threshold", "cv_overlap_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.dilate_radius < 0:
            raise ConfigError("dilate_radius must be >= 0")


@dataclass(frozen=True)
class EditRecord:
    edit_id: str
    question_id: int
    image_id: int
    mode: str  # "IV" or "CV"
    target_category_id: int
    removed_instance_ids: tuple[int, ...]
    removal_mask: SegmentationMask = field(compare=False)
    expected_answer: str
    overlap: float
    area: float
    provenance: tuple[tuple[str, int], ...] = ()
    image_file: str = ""


def _require_masks(
    instance_ids, instance_masks: dict[int, SegmentationMask], image_id: int
):
    missing = [i for i in instance_ids if i not in instance_masks]
    if missing:
        raise IntegrityError(
            f"image {image_id}: missing masks for instances {sorted(missing)}"
        )


def _qa_masks(
    triplet: IqaTriplet,
    index: ImageObjectIndex,
    qa: QaObjectSet,
    instance_masks: dict[int, SegmentationMask],
) -> list[SegmentationMask]:
    """Union mask per QA category that is actually present in the image."""
    out = []
    for cat in sorted(qa.categories):
        ids = index.instance_ids(triplet.image_id, cat)
        if ids:
            _require_masks(ids, instance_masks, triplet.image_id)
            out.append(mops.union_masks([instance_masks[i] for i in ids]))
    return out


def _overlap_against_qa(
    target: SegmentationMask,
    qa_masks: list[SegmentationMask],
    config: SelectionConfig,
) -> float:
    if not qa_masks:
        return 0.0
    dilated_target = mops.dilate(target, config.dilate_radius)

    def against(qa_mask: SegmentationMask) -> float:
        if config.dilate_both:
            qa_mask = mops.dilate(qa_mask, config.dilate_radius)
        if qa_mask.pixel_count() == 0:
            return 0.0
        return mops.overlap_score(dilated_target, qa_mask)

    if config.qa_overlap_per_category:
        return max(against(m) for m in qa_masks)
    return against(mops.union_masks(qa_masks))


def select_iv(
    triplet: IqaTriplet,
    index: ImageObjectIndex,
    qa: QaObjectSet,
    instance_masks: dict[int, SegmentationMask],
    config: SelectionConfig,
    image_file: str = "",
) -> list[EditRecord]:
    """One record per eligible category in O_I - O_QA; removes all instances."""
    if not triplet.uniform:
        return []
    present = index.present(triplet.image_id)
    targets = sorted(present - qa.categories)
    if not targets:
        return []

    for cat in targets:
        _require_masks(
            index.instance_ids(triplet.image_id, cat), instance_masks, triplet.image_id
        )
    qa_cat_masks = _qa_masks(triplet, index, qa, instance_masks)

    records = []
    for cat in targets:
        ids = index.instance_ids(triplet.image_id, cat)
        cat_masks = [instance_masks[i] for i in ids]
        largest = max(mops.area_fraction(m) for m in cat_masks)
        if largest >= config.area_threshold:
            continue
        union = mops.union_masks(cat_masks)
        overlap = _overlap_against_qa(union, qa_cat_masks, config)
        limit_ok = overlap == 0.0 if config.strict_iv else overlap < config.iv_overlap_threshold
        if not limit_ok:
            continue
        records.append(
            EditRecord(
                edit_id=f"{triplet.question_id:012d}-iv-c{cat:03d}-all",
                question_id=triplet.question_id,
                image_id=triplet.image_id,
                mode="IV",
                target_category_id=cat,
                removed_instance_ids=tuple(ids),
                removal_mask=union,
                expected_answer=triplet.majority_answer,
                overlap=overlap,
                area=largest,
                provenance=tuple(qa.matched_phrases),
                image_file=image_file,
            )
        )
    return records


def select_cv(
    triplet: IqaTriplet,
    index: ImageObjectIndex,
    qa: QaObjectSet,
    instance_masks: dict[int, SegmentationMask],
    config: SelectionConfig,
    image_file: str = "",
    audit: list | None = None,
) -> list[EditRecord]:
    """At most one record per instance of the counted category.

    Proceeds only when the category resolves unambiguously from the
    question and the image's instance count equals the answer; skip
    reasons are appended to ``audit`` when given.
    """

    def skip(reason: str) -> list[EditRecord]:
        if audit is not None:
            audit.append((triplet.question_id, reason))
        return []

    if not (triplet.counting and triplet.uniform):
        return skip("not a uniform counting triplet")
    if triplet.numeric_answer is None:
        return skip("answer is not numeric")
    if len(qa.categories) != 1:
        return skip(
            "counted category unresolvable from question "
            f"(matched {sorted(qa.categories)})"
        )
    (cat,) = qa.categories
    ids = index.instance_ids(triplet.image_id, cat)
    if len(ids) != triplet.numeric_answer:
        return skip(
            f"instance count {len(ids)} does not match answer {triplet.numeric_answer}"
        )
    if not ids:
        return skip("no instances of the counted category")
    _require_masks(ids, instance_masks, triplet.image_id)

    records = []
    for inst in ids:
        inst_mask = instance_masks[inst]
        area = mops.area_fraction(inst_mask)
        if area >= config.area_threshold:
            continue
        others = [instance_masks[i] for i in ids if i != inst]
        if others:
            dilated = mops.dilate(inst_mask, config.dilate_radius)
            others_union = mops.dilate(
                mops.union_masks(others), config.dilate_radius
            )
            overlap = mops.overlap_score(dilated, others_union)
        else:
            overlap = 0.0
        if overlap > config.cv_overlap_threshold:
            continue
        records.append(
            EditRecord(
                edit_id=f"{triplet.question_id:012d}-cv-c{cat:03d}-i{inst:09d}",
                question_id=triplet.question_id,
                image_id=triplet.image_id,
                mode="CV",
                target_category_id=cat,
                removed_instance_ids=(inst,),
                removal_mask=inst_mask,
                expected_answer=str(triplet.numeric_answer - 1),
                overlap=overlap,
                area=area,
                provenance=tuple(qa.matched_phrases),
                image_file=image_file,
            )
        )
    return records


def record_to_json(record: EditRecord) -> dict:
    return {
        "schema": MANIFEST_SCHEMA,
        "edit_id": record.edit_id,
        "question_id": record.question_id,
        "image_id": record.image_id,
        "mode": record.mode,
        "target_category_id": record.target_category_id,
        "removed_instance_ids": list(record.removed_instance_ids),
        "mask_rle": mops.encode_rle_string(record.removal_mask),
        "mask_width": record.removal_mask.width,
        "mask_height": record.removal_mask.height,
        "expected_answer": record.expected_answer,
        "overlap": record.overlap,
        "area": record.area,
        "provenance": [[p, c] for p, c in record.provenance],
        "image_file": record.image_file,
    }


def record_from_json(obj: dict) -> EditRecord:
    if obj.get("schema") != MANIFEST_SCHEMA:
        raise FormatError(f"unsupported manifest schema {obj.get('schema')!r}")
    mask = mops.decode_rle_string(
        obj["mask_rle"], obj["mask_width"], obj["mask_height"]
    )
    return EditRecord(
        edit_id=obj["edit_id"],
        question_id=obj["question_id"],
        image_id=obj["image_id"],
        mode=obj["mode"],
        target_category_id=obj["target_category_id"],
        removed_instance_ids=tuple(obj["removed_instance_ids"]),
        removal_mask=mask,
        expected_answer=obj["expected_answer"],
        overlap=obj["overlap"],
        area=obj["area"],
        provenance=tuple((p, c) for p, c in obj.get("provenance", [])),
        image_file=obj.get("image_file", ""),
    )


def emit_manifest(
    records: list[EditRecord], path, triplets: list[IqaTriplet] | None = None
) -> dict:
    """Write a deterministic line-delimited manifest; returns summary counts.

    Summary mirrors the real / realNE / edit partition: realNE counts the
    uniform triplets that yielded no edit record.
    """
    ordered = sorted(records, key=lambda r: r.edit_id)
    seen = set()
    for r in ordered:
        if r.edit_id in seen:
            raise IntegrityError(f"duplicate edit_id {r.edit_id}")
        seen.add(r.edit_id)
    with open(path, "w", encoding="utf-8") as fh:
        for r in ordered:
            fh.write(json.dumps(record_to_json(r), sort_keys=True) + "\n")

    summary = {"edit": len(ordered)}
    if triplets is not None:
        uniform = [t for t in triplets if t.uniform]
        edited_qids = {r.question_id for r in ordered}
        summary["real"] = len(uniform)
        summary["realNE"] = sum(1 for t in uniform if t.question_id not in edited_qids)
    return summary


def load_manifest(path) -> list[EditRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise FormatError(f"{path}:{line_no}: bad manifest line: {exc!r}") from exc
    return records
