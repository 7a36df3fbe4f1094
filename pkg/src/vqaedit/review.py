"""HTTP review workflow for human validation of edited items.

Annotators step through a deterministic per-user shuffle of the sampled
edits and answer yes/no/ambiguous.  Labels persist in an append-only
jsonl store (crash-safe, replayable); agreement statistics delegate to
:func:`vqaedit.metrics.agreement_stats`.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from vqaedit.metrics import LABELS, agreement_stats
from vqaedit.selection import EditRecord


@dataclass(frozen=True)
class ReviewSample:
    edit_ids: tuple[str, ...]
    per_type_cap: int
    seed: int


def build_sample(
    manifest: list[EditRecord],
    question_types: dict[int, str],
    flip_sources: list[set[str]] | None = None,
    per_type_cap: int = 100,
    seed: int = 0,
) -> ReviewSample:
    """Sample edits for validation, optionally restricted to flipped ones.

    ``flip_sources`` holds, per model, the set of edit_ids whose label
    flipped; an edit qualifies if it flipped under any source.  The
    survivors are capped per question type with seeded sampling.
    """
    pool = [r for r in manifest]
    if flip_sources:
        flipped = set().union(*flip_sources)
        pool = [r for r in pool if r.edit_id in flipped]

    by_type: dict[str, list[str]] = {}
    for rec in sorted(pool, key=lambda r: r.edit_id):
        by_type.setdefault(question_types.get(rec.question_id, ""), []).append(
            rec.edit_id
        )

    rng = random.Random(seed)
    chosen: list[str] = []
    for qtype in sorted(by_type):
        ids = by_type[qtype]
        if len(ids) > per_type_cap:
            ids = rng.sample(ids, per_type_cap)
        chosen.extend(ids)
    return ReviewSample(
        edit_ids=tuple(sorted(chosen)), per_type_cap=per_type_cap, seed=seed
    )


def user_order(sample: ReviewSample, user_id: str) -> list[str]:
    """Deterministic per-user shuffle of the sample."""
    digest = hashlib.sha256(f"{sample.seed}:{user_id}".encode()).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    order = list(sample.edit_ids)
    rng.shuffle(order)
    return order


class LabelStore:
    """Append-only jsonl of (user, edit_id, label); first write wins."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._labels: dict[str, dict[str, str]] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        entry = json.loads(line)
                        self._labels.setdefault(entry["user"], {}).setdefault(
                            entry["edit_id"], entry["label"]
                        )

    def get(self, user_id: str) -> dict[str, str]:
        return dict(self._labels.get(user_id, {}))

    def all_labels(self) -> dict[str, dict[str, str]]:
        return {u: dict(items) for u, items in self._labels.items()}

    def submit(self, user_id: str, edit_id: str, label: str):
        if label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}")
        with self._lock:
            if edit_id in self._labels.get(user_id, {}):
                raise KeyError(f"{user_id} already labeled {edit_id}")
            entry = {
                "user": user_id,
                "edit_id": edit_id,
                "label": label,
                "ts": time.time(),
            }
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
            self._labels.setdefault(user_id, {})[edit_id] = label


class LabelRequest(BaseModel):
    user: str
    edit_id: str
    label: str


def create_app(
    sample: ReviewSample,
    items: dict[str, dict],
    store: LabelStore,
    images_dir=None,
    ui_dir=None,
) -> FastAPI:
    """Build the review app.

    ``items`` maps edit_id to its payload: image url/path, question text
    and expected answer.
    """
    app = FastAPI(title="vqaedit review")

    def session_state(user_id: str):
        order = user_order(sample, user_id)
        labeled = store.get(user_id)
        return order, labeled

    @app.get("/api/next")
    def next_item(user: str):
        if not user:
            raise HTTPException(status_code=400, detail="missing user id")
        order, labeled = session_state(user)
        for idx, edit_id in enumerate(order):
            if edit_id not in labeled:
                payload = dict(items.get(edit_id, {}))
                payload.update(
                    edit_id=edit_id,
                    progress={"labeled": len(labeled), "total": len(order)},
                    done=False,
                )
                return payload
        return {"done": True, "progress": {"labeled": len(labeled), "total": len(order)}}

    @app.post("/api/label")
    def submit_label(req: LabelRequest):
        if req.label not in LABELS:
            raise HTTPException(status_code=400, detail=f"label must be one of {LABELS}")
        if req.edit_id not in sample.edit_ids:
            raise HTTPException(status_code=404, detail=f"unknown item {req.edit_id}")
        try:
            store.submit(req.user, req.edit_id, req.label)
        except KeyError:
            raise HTTPException(
                status_code=409, detail=f"{req.edit_id} already labeled by {req.user}"
            ) from None
        return {"ok": True}

    @app.get("/api/agreement")
    def agreement():
        labels = store.all_labels()
        if not any(labels.values()):
            return JSONResponse({"empty": True})
        return agreement_stats(labels).to_json()

    @app.get("/api/item/{edit_id}")
    def get_item(edit_id: str):
        if edit_id not in sample.edit_ids:
            raise HTTPException(status_code=404, detail=f"unknown item {edit_id}")
        payload = dict(items.get(edit_id, {}))
        payload["edit_id"] = edit_id
        return payload

    if images_dir is not None:
        app.mount("/images", StaticFiles(directory=str(images_dir)), name="images")

    index_html = Path(ui_dir) / "index.html" if ui_dir else None

    @app.get("/", response_class=HTMLResponse)
    def root():
        if index_html is not None and index_html.exists():
            return FileResponse(index_html)
        return HTMLResponse(
            "<html><body><h1>vqaedit review</h1>"
            "<p>No UI bundle installed; use the /api endpoints.</p></body></html>"
        )

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/ui", StaticFiles(directory=str(ui_dir)), name="ui")

    return app


def items_from_manifest(
    manifest: list[EditRecord], questions: dict[int, str]
) -> dict[str, dict]:
    return {
        r.edit_id: {
            "image_url": f"/images/edited/{r.edit_id}.png",
            "question": questions.get(r.question_id, ""),
            "expected_answer": r.expected_answer,
        }
        for r in manifest
    }
