"""File-level pipeline steps shared by the CLI subcommands."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import vqaedit
from vqaedit import coco, masks, selection, vocab, vqa


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_provenance(out_dir, config: dict, inputs: dict[str, str]):
    """Record config + tool version + input digests next to the outputs.

    Content is fully deterministic so reruns stay byte-identical.
    """
    record = {
        "tool": "vqaedit",
        "version": vqaedit.__version__,
        "config": config,
        "input_digests": {name: sha256_file(p) for name, p in sorted(inputs.items())},
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "provenance.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


class Corpus:
    """Loaded annotation corpus plus derived indexes and lazy mask cache."""

    def __init__(self, annotations_path, questions_path, vqa_annotations_path,
                 vocab_path=None, answers_per_question: int = 10):
        self.table, self.images, self.instances = coco.load_annotations(
            annotations_path
        )
        self.index = coco.build_object_index(self.images, self.instances)
        self.triplets = vqa.load_questions_and_answers(
            questions_path, vqa_annotations_path, answers_per_question
        )
        self.vocab = vocab.load_vocabulary(
            vocab_path or vocab.default_vocabulary_path(), self.table
        )
        self.images_by_id = {i.image_id: i for i in self.images}
        self.instances_by_image: dict[int, list[coco.InstanceAnnotation]] = {}
        for ann in self.instances:
            self.instances_by_image.setdefault(ann.image_id, []).append(ann)
        self._mask_cache: dict[int, dict[int, masks.SegmentationMask]] = {}

    def instance_masks(self, image_id: int) -> dict[int, masks.SegmentationMask]:
        cached = self._mask_cache.get(image_id)
        if cached is None:
            image = self.images_by_id[image_id]
            cached = {
                ann.instance_id: ann.rasterize(image)
                for ann in self.instances_by_image.get(image_id, [])
            }
            self._mask_cache[image_id] = cached
        return cached

    def qa_objects(self, triplet: vqa.IqaTriplet, question_only: bool = False):
        answer = "" if question_only else triplet.majority_answer
        return vocab.extract_qa_objects(
            triplet.question_text, answer, self.vocab, triplet.question_id
        )


def run_selection(
    corpus: Corpus, mode: str, config: selection.SelectionConfig
) -> tuple[list[selection.EditRecord], list]:
    """Apply IV or CV selection to every eligible triplet in the corpus."""
    records: list[selection.EditRecord] = []
    audit: list = []
    for triplet in corpus.triplets:
        if not triplet.uniform:
            continue
        if triplet.image_id not in corpus.images_by_id:
            continue
        image = corpus.images_by_id[triplet.image_id]
        inst_masks = corpus.instance_masks(triplet.image_id)
        if mode == "iv":
            qa = corpus.qa_objects(triplet)
            records.extend(
                selection.select_iv(
                    triplet, corpus.index, qa, inst_masks, config,
                    image_file=image.file_name,
                )
            )
        else:
            if not triplet.counting:
                continue
            qa = corpus.qa_objects(triplet, question_only=True)
            records.extend(
                selection.select_cv(
                    triplet, corpus.index, qa, inst_masks, config,
                    image_file=image.file_name, audit=audit,
                )
            )
    return records, audit
