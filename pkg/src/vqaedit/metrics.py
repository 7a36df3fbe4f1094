"""Accuracy and flip-taxonomy reports over original/edited prediction pairs.

A pair is "flipped" when the edited prediction breaks the expected
relation to the original one: equality for IV edits, minus-one for CV
edits.  Flips decompose exactly into pos->neg, neg->pos and neg->neg by
correctness against ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from vqaedit.errors import FormatError, IntegrityError
from vqaedit.selection import EditRecord
from vqaedit.textnorm import normalize, parse_number
from vqaedit.vqa import IqaTriplet


class FlipOutcome(Enum):
    CONSISTENT = "consistent"
    POS_TO_NEG = "pos_to_neg"
    NEG_TO_POS = "neg_to_pos"
    NEG_TO_NEG = "neg_to_neg"


@dataclass(frozen=True)
class PredictionSet:
    entries: dict[str, str]
    model_name: str = ""

    @classmethod
    def load(cls, path, model_name: str = "") -> "PredictionSet":
        entries: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    key = str(obj["id"])
                    answer = normalize(str(obj["answer"]))
                except (json.JSONDecodeError, KeyError) as exc:
                    raise FormatError(f"{path}:{line_no}: bad prediction line: {exc!r}") from exc
                if key in entries:
                    raise IntegrityError(f"{path}:{line_no}: duplicate id {key}")
                entries[key] = answer
        return cls(entries=entries, model_name=model_name)


def classify_iv(orig_pred: str, edit_pred: str, ground_truth: str) -> FlipOutcome:
    orig, edit, gt = normalize(orig_pred), normalize(edit_pred), normalize(ground_truth)
    if edit == orig:
        return FlipOutcome.CONSISTENT
    if orig == gt:
        return FlipOutcome.POS_TO_NEG
    if edit == gt:
        return FlipOutcome.NEG_TO_POS
    return FlipOutcome.NEG_TO_NEG


def classify_cv(orig_pred: str, edit_pred: str, ground_truth_n: int) -> FlipOutcome:
    """n / n-1 consistency: the edited count must be one less than the
    original prediction.  Non-numeric predictions are never consistent."""
    orig = parse_number(orig_pred)
    edit = parse_number(edit_pred)
    if orig is not None and edit is not None and edit == orig - 1:
        return FlipOutcome.CONSISTENT
    if orig == ground_truth_n:
        return FlipOutcome.POS_TO_NEG
    if edit == ground_truth_n - 1:
        return FlipOutcome.NEG_TO_POS
    return FlipOutcome.NEG_TO_NEG


@dataclass
class FlipTally:
    n_pairs: int = 0
    pos_to_neg: int = 0
    neg_to_pos: int = 0
    neg_to_neg: int = 0

    def add(self, outcome: FlipOutcome):
        self.n_pairs += 1
        if outcome is FlipOutcome.POS_TO_NEG:
            self.pos_to_neg += 1
        elif outcome is FlipOutcome.NEG_TO_POS:
            self.neg_to_pos += 1
        elif outcome is FlipOutcome.NEG_TO_NEG:
            self.neg_to_neg += 1

    @property
    def flipped(self) -> int:
        return self.pos_to_neg + self.neg_to_pos + self.neg_to_neg

    def percentages(self) -> dict[str, float]:
        n = self.n_pairs
        if n == 0:
            return {"flipped": 0.0, "pos_to_neg": 0.0, "neg_to_pos": 0.0, "neg_to_neg": 0.0}
        return {
            "flipped": 100.0 * self.flipped / n,
            "pos_to_neg": 100.0 * self.pos_to_neg / n,
            "neg_to_pos": 100.0 * self.neg_to_pos / n,
            "neg_to_neg": 100.0 * self.neg_to_neg / n,
        }


N_AREA_BINS = 10
AREA_BIN_SPAN = 0.10  # bins of 1% of image area over (0, 10%]


def area_bin(area: float) -> int:
    """Bin index in [0, 9] for an area fraction; values beyond 10% clamp."""
    if area <= 0.0:
        return 0
    return min(N_AREA_BINS - 1, math.ceil(area * 100.0) - 1)


@dataclass
class ConsistencyReport:
    mode: str
    model_name: str
    accuracy_orig: float
    n_orig: int
    overall: FlipTally
    per_question_type: dict[str, FlipTally] = field(default_factory=dict)
    per_area_bin: list[FlipTally] = field(default_factory=list)
    missing_pairs: int = 0
    random_baseline: float = 0.0
    nonnumeric_predictions: int = 0

    def to_json(self) -> dict:
        def tally(t: FlipTally) -> dict:
            return {"n_pairs": t.n_pairs, **{k: v for k, v in t.percentages().items()}}

        return {
            "mode": self.mode,
            "model_name": self.model_name,
            "accuracy_orig": self.accuracy_orig,
            "n_orig": self.n_orig,
            "overall": tally(self.overall),
            "per_question_type": {
                k: tally(v) for k, v in sorted(self.per_question_type.items())
            },
            "per_area_bin": [tally(t) for t in self.per_area_bin],
            "missing_pairs": self.missing_pairs,
            "random_baseline": self.random_baseline,
            "nonnumeric_predictions": self.nonnumeric_predictions,
        }

    def render_text(self) -> str:
        pct = self.overall.percentages()
        lines = [
            f"Consistency report ({self.mode}, model={self.model_name or '-'})",
            f"Accuracy orig       {self.accuracy_orig:.2f}  (n={self.n_orig})",
            f"Predictions flipped {pct['flipped']:.2f}  (pairs={self.overall.n_pairs})",
            f"pos->neg            {pct['pos_to_neg']:.2f}",
            f"neg->pos            {pct['neg_to_pos']:.2f}",
            f"neg->neg            {pct['neg_to_neg']:.2f}",
            f"random neg->pos baseline {self.random_baseline:.5f}",
            f"pairs missing a prediction: {self.missing_pairs}",
        ]
        if self.mode == "cv":
            lines.append(
                f"non-numeric predictions (counted as flips): {self.nonnumeric_predictions}"
            )
        for qtype, t in sorted(self.per_question_type.items()):
            p = t.percentages()
            lines.append(
                f"  [{qtype or 'unknown'}] flipped {p['flipped']:.2f} "
                f"({p['pos_to_neg']:.2f}/{p['neg_to_pos']:.2f}/{p['neg_to_neg']:.2f}, "
                f"n={t.n_pairs})"
            )
        for i, t in enumerate(self.per_area_bin):
            if t.n_pairs:
                lines.append(
                    f"  area ({i}%,{i + 1}%] flip rate {t.percentages()['flipped']:.2f} "
                    f"(n={t.n_pairs})"
                )
        return "\n".join(lines)


def random_flip_baseline(answer_vocab_size: int, orig_error_rate: float) -> float:
    """Chance rate (in percent) of a neg->pos flip under uniform perturbation."""
    if answer_vocab_size < 1:
        raise ValueError("answer vocabulary size must be >= 1")
    if not 0.0 <= orig_error_rate <= 1.0:
        raise ValueError("error rate must be in [0, 1]")
    return 100.0 * orig_error_rate / answer_vocab_size


def compute_report(
    orig_preds: PredictionSet,
    edit_preds: PredictionSet,
    manifest: list[EditRecord],
    triplets: list[IqaTriplet],
    mode: str,
    answer_vocab_size: int = 3000,
) -> ConsistencyReport:
    """Build the accuracy-flipping report for one model and edit mode."""
    if mode not in ("iv", "cv"):
        raise ValueError(f"mode must be 'iv' or 'cv', got {mode!r}")
    by_qid = {t.question_id: t for t in triplets}
    records = [r for r in manifest if r.mode.lower() == mode]

    # accuracy over uniform originals that have a prediction
    uniform = [t for t in triplets if t.uniform]
    scored = [t for t in uniform if str(t.question_id) in orig_preds.entries]
    correct = sum(
        1 for t in scored if orig_preds.entries[str(t.question_id)] == t.majority_answer
    )
    accuracy = 100.0 * correct / len(scored) if scored else 0.0

    overall = FlipTally()
    per_type: dict[str, FlipTally] = {}
    per_bin = [FlipTally() for _ in range(N_AREA_BINS)]
    missing = 0
    nonnumeric = 0
    for rec in records:
        triplet = by_qid.get(rec.question_id)
        if triplet is None:
            raise IntegrityError(
                f"manifest edit {rec.edit_id} references unknown question "
                f"{rec.question_id}"
            )
        orig = orig_preds.entries.get(str(rec.question_id))
        edit = edit_preds.entries.get(rec.edit_id)
        if orig is None or edit is None:
            missing += 1
            continue
        if mode == "iv":
            outcome = classify_iv(orig, edit, triplet.majority_answer)
        else:
            if triplet.numeric_answer is None:
                raise IntegrityError(
                    f"CV edit {rec.edit_id} on non-numeric ground truth"
                )
            if parse_number(orig) is None or parse_number(edit) is None:
                nonnumeric += 1
            outcome = classify_cv(orig, edit, triplet.numeric_answer)
        overall.add(outcome)
        per_type.setdefault(triplet.question_type, FlipTally()).add(outcome)
        per_bin[area_bin(rec.area)].add(outcome)

    if overall.n_pairs == 0:
        raise IntegrityError("no matched (original, edit) prediction pairs")

    return ConsistencyReport(
        mode=mode,
        model_name=orig_preds.model_name or edit_preds.model_name,
        accuracy_orig=accuracy,
        n_orig=len(scored),
        overall=overall,
        per_question_type=per_type,
        per_area_bin=per_bin,
        missing_pairs=missing,
        random_baseline=random_flip_baseline(
            answer_vocab_size, 1.0 - accuracy / 100.0
        ),
        nonnumeric_predictions=nonnumeric,
    )


@dataclass
class AgreementReport:
    """Per-user and combined yes/no/ambiguous percentages over an item universe.

    All percentages use the full universe as denominator; items a user did
    not label are tracked in ``missing`` and count toward no percentage.
    """

    n_items: int
    per_user: dict[str, dict[str, float]]
    intersection: dict[str, float]
    union: dict[str, float]
    missing: dict[str, int]

    def to_json(self) -> dict:
        return {
            "n_items": self.n_items,
            "per_user": self.per_user,
            "intersection": self.intersection,
            "union": self.union,
            "missing": self.missing,
        }

    def render_text(self) -> str:
        users = sorted(self.per_user)
        lines = [f"Human validation ({self.n_items} items)"]
        lines.append(f"{'':24s} {'Yes(%)':>8s} {'No(%)':>8s} {'Ambiguous(%)':>12s}")
        for u in users:
            p = self.per_user[u]
            lines.append(
                f"{u:24s} {p['yes']:8.2f} {p['no']:8.2f} {p['ambiguous']:12.2f}"
            )
        inter_label = " ∩ ".join(users)
        union_label = " ∪ ".join(users)
        lines.append(
            f"{inter_label:24s} {self.intersection['yes']:8.2f} "
            f"{self.intersection['no']:8.2f} {self.intersection['ambiguous']:12.2f}"
        )
        lines.append(
            f"{union_label:24s} {self.union['yes']:8.2f} "
            f"{self.union['no']:8.2f} {self.union['ambiguous']:12.2f}"
        )
        return "\n".join(lines)


LABELS = ("yes", "no", "ambiguous")


def agreement_stats(labels: dict[str, dict[str, str]]) -> AgreementReport:
    """Compute agreement over per-user ``{edit_id: label}`` maps."""
    if not labels:
        raise ValueError("need at least one user with labels")
    universe = sorted({item for per_user in labels.values() for item in per_user})
    n = len(universe)
    for user, per_user in labels.items():
        bad = [v for v in per_user.values() if v not in LABELS]
        if bad:
            raise ValueError(f"user {user}: invalid labels {bad}")

    def pct(count: int) -> float:
        return 100.0 * count / n if n else 0.0

    per_user_pct = {}
    missing = {}
    for user, per in labels.items():
        per_user_pct[user] = {
            lab: pct(sum(1 for i in universe if per.get(i) == lab)) for lab in LABELS
        }
        missing[user] = sum(1 for i in universe if i not in per)

    intersection = {
        lab: pct(
            sum(1 for i in universe if all(per.get(i) == lab for per in labels.values()))
        )
        for lab in LABELS
    }
    union = {
        lab: pct(
            sum(1 for i in universe if any(per.get(i) == lab for per in labels.values()))
        )
        for lab in LABELS
    }
    return AgreementReport(
        n_items=n,
        per_user=per_user_pct,
        intersection=intersection,
        union=union,
        missing=missing,
    )
