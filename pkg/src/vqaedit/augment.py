"""Fine-tuning manifests per question type and relative-improvement summaries."""

from __future__ import annotations

import json
from dataclasses import dataclass

from vqaedit.errors import IntegrityError
from vqaedit.metrics import ConsistencyReport
from vqaedit.selection import EditRecord
from vqaedit.textnorm import normalize
from vqaedit.vqa import IqaTriplet, detect_counting

COMPOSITIONS = ("real", "real+IV", "real+CV", "real+CV+IV")

DEFAULT_FILTERS = (
    ("what color is the", ("what color is the",)),
    ("is there a", ("is there a",)),
    ("is this a", ("is this a",)),
    ("how many", ("how many",)),
    ("counting", ()),  # uses the counting-cue detector, not a prefix
)


@dataclass(frozen=True)
class QuestionTypeFilter:
    name: str
    match: tuple[str, ...]

    def accepts(self, triplet: IqaTriplet) -> bool:
        if self.name == "counting" and not self.match:
            return detect_counting(triplet.question_text, triplet.majority_answer)
        question = normalize(triplet.question_text)
        return any(question.startswith(prefix) for prefix in self.match)


@dataclass(frozen=True)
class AugmentationManifest:
    name: str
    real_question_ids: tuple[int, ...]
    edit_ids: tuple[str, ...]
    composition: str
    strict: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "composition": self.composition,
            "strict": self.strict,
            "real_question_ids": list(self.real_question_ids),
            "edit_ids": list(self.edit_ids),
        }


@dataclass(frozen=True)
class RelativeSummary:
    flip_reduction_relative: float | None  # None when base flips are zero
    accuracy_delta: float

    def to_json(self) -> dict:
        return {
            "flip_reduction_relative": self.flip_reduction_relative,
            "accuracy_delta": self.accuracy_delta,
        }


def filter_question_type(
    triplets: list[IqaTriplet], qfilter: QuestionTypeFilter
) -> list[IqaTriplet]:
    return [t for t in triplets if qfilter.accepts(t)]


def build_manifest(
    real_subset: list[IqaTriplet],
    edits: list[EditRecord],
    composition: str,
    strict: bool = False,
    name: str = "",
) -> AugmentationManifest:
    """Assemble a deterministic training manifest for one composition.

    Strict manifests keep only edits with an overlap score of exactly zero.
    """
    if composition not in COMPOSITIONS:
        raise ValueError(f"composition must be one of {COMPOSITIONS}")
    qids = {t.question_id for t in real_subset}
    dangling = [e.edit_id for e in edits if e.question_id not in qids]
    if dangling:
        raise IntegrityError(
            f"edits referencing questions outside the subset: {sorted(dangling)[:5]}"
        )

    wanted_modes = set()
    if "IV" in composition:
        wanted_modes.add("IV")
    if "CV" in composition:
        wanted_modes.add("CV")
    chosen = [e for e in edits if e.mode in wanted_modes]
    if strict:
        chosen = [e for e in chosen if e.overlap == 0.0]
    return AugmentationManifest(
        name=name or composition,
        real_question_ids=tuple(sorted(qids)),
        edit_ids=tuple(sorted({e.edit_id for e in chosen})),
        composition=composition,
        strict=strict,
    )


def write_manifest(manifest: AugmentationManifest, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest.to_json(), sort_keys=True) + "\n")


def relative_summary(
    base_report: ConsistencyReport, aug_report: ConsistencyReport
) -> RelativeSummary:
    """(flips_base - flips_aug) / flips_base and the accuracy delta in points."""
    if base_report.overall.n_pairs != aug_report.overall.n_pairs:
        raise IntegrityError(
            f"reports cover different pair sets: {base_report.overall.n_pairs} "
            f"vs {aug_report.overall.n_pairs}"
        )
    base_flips = base_report.overall.percentages()["flipped"]
    aug_flips = aug_report.overall.percentages()["flipped"]
    reduction = None if base_flips == 0.0 else (base_flips - aug_flips) / base_flips
    return RelativeSummary(
        flip_reduction_relative=reduction,
        accuracy_delta=aug_report.accuracy_orig - base_report.accuracy_orig,
    )


def relative_summary_from_rates(
    base_flip_pct: float, aug_flip_pct: float, base_acc: float = 0.0, aug_acc: float = 0.0
) -> RelativeSummary:
    """Same arithmetic from bare percentages (for externally produced reports)."""
    reduction = (
        None if base_flip_pct == 0.0 else (base_flip_pct - aug_flip_pct) / base_flip_pct
    )
    return RelativeSummary(
        flip_reduction_relative=reduction, accuracy_delta=aug_acc - base_acc
    )
