"""VQA question/annotation ingestion, answer flags, and split conventions."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass

from vqaedit.errors import FormatError, IntegrityError
from vqaedit.textnorm import normalize, parse_number, tokenize


@dataclass(frozen=True)
class IqaTriplet:
    question_id: int
    image_id: int
    question_text: str
    answers: tuple[str, ...]
    question_type: str
    majority_answer: str
    uniform: bool
    counting: bool
    numeric_answer: int | None


@dataclass(frozen=True)
class CorpusSplit:
    name: str
    question_ids: tuple[int, ...]


def detect_counting(question_text: str, majority_answer: str) -> bool:
    """True iff the question carries a counting cue and the answer is numeric.

    Cues: the token "many" or the phrase "number of".
    """
    tokens = tokenize(question_text)
    has_cue = "many" in tokens or any(
        a == "number" and b == "of" for a, b in zip(tokens, tokens[1:])
    )
    return has_cue and parse_number(majority_answer) is not None


def _majority(answers: tuple[str, ...]) -> str:
    # ties broken lexicographically; irrelevant for uniform triplets
    counts = Counter(answers)
    best = max(counts.values())
    return min(a for a, c in counts.items() if c == best)


def make_triplet(
    question_id: int,
    image_id: int,
    question_text: str,
    answers: list[str],
    question_type: str = "",
) -> IqaTriplet:
    normalized = tuple(normalize(a) for a in answers)
    majority = _majority(normalized)
    uniform = all(a == majority for a in normalized)
    counting = detect_counting(question_text, majority)
    return IqaTriplet(
        question_id=question_id,
        image_id=image_id,
        question_text=question_text,
        answers=normalized,
        question_type=question_type,
        majority_answer=majority,
        uniform=uniform,
        counting=counting,
        numeric_answer=parse_number(majority),
    )


def load_questions_and_answers(
    questions_path, annotations_path, answers_per_question: int = 10
) -> list[IqaTriplet]:
    """Load VQA-v2-style question and annotation files into triplets."""
    questions = _load_json(questions_path).get("questions")
    annotations = _load_json(annotations_path).get("annotations")
    if questions is None:
        raise FormatError(f"{questions_path}: missing 'questions' array")
    if annotations is None:
        raise FormatError(f"{annotations_path}: missing 'annotations' array")

    by_qid = {int(a["question_id"]): a for a in annotations}
    missing = [int(q["question_id"]) for q in questions if int(q["question_id"]) not in by_qid]
    if missing:
        raise IntegrityError(f"questions without annotations: {sorted(missing)}")

    triplets = []
    for q in questions:
        qid = int(q["question_id"])
        ann = by_qid[qid]
        raw_answers = [a["answer"] if isinstance(a, dict) else a for a in ann["answers"]]
        if len(raw_answers) != answers_per_question:
            raise FormatError(
                f"question {qid}: {len(raw_answers)} answers, expected "
                f"{answers_per_question} (override with --answers-per-question)"
            )
        triplets.append(
            make_triplet(
                question_id=qid,
                image_id=int(q["image_id"]),
                question_text=q["question"],
                answers=raw_answers,
                question_type=ann.get("question_type", ""),
            )
        )
    return triplets


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: JSON parse failure at byte {exc.pos}: {exc.msg}") from exc


def filter_uniform(triplets: list[IqaTriplet]) -> list[IqaTriplet]:
    return [t for t in triplets if t.uniform]


def split_val(
    triplets: list[IqaTriplet], ratio: float, seed: int
) -> tuple[CorpusSplit, CorpusSplit]:
    """Split triplets into (test, val) by image so no image straddles sides.

    Deterministic for a fixed seed; the test side holds approximately
    round(ratio * n) triplets (exact when images carry one triplet each).
    """
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    by_image: dict[int, list[int]] = {}
    for t in triplets:
        by_image.setdefault(t.image_id, []).append(t.question_id)
    image_ids = sorted(by_image)
    random.Random(seed).shuffle(image_ids)

    target = round(ratio * len(triplets))
    test_qids: list[int] = []
    val_qids: list[int] = []
    count = 0
    for img in image_ids:
        qids = by_image[img]
        if count < target:
            test_qids.extend(qids)
            count += len(qids)
        else:
            val_qids.extend(qids)
    return (
        CorpusSplit("test", tuple(sorted(test_qids))),
        CorpusSplit("val", tuple(sorted(val_qids))),
    )
