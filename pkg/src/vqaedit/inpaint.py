"""Bridge to an external object-removal tool.

Writes one 1-bit mask image per edit record, then runs a user-supplied
command template per job with bounded parallelism.  Job status is kept
in an append-only line-delimited ledger so interrupted runs resume
without redoing finished work.  The tool's output is only checked for
existence and matching dimensions; visual quality is its own concern.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from PIL import Image

from vqaedit.errors import ConfigError
from vqaedit.selection import EditRecord

PLACEHOLDERS = ("{image}", "{mask}", "{out}")


@dataclass(frozen=True)
class RemovalJob:
    edit_id: str
    input_image_path: str
    mask_image_path: str
    output_image_path: str
    status: str = "pending"  # pending | done | failed
    tool_exit_code: int | None = None
    reason: str = ""


def write_mask_image(record: EditRecord, path: Path):
    img = Image.fromarray((record.removal_mask.bits * 255).astype("uint8"), mode="L")
    img.convert("1").save(path)


def render_jobs(
    manifest: list[EditRecord], image_root, out_root
) -> list[RemovalJob]:
    """Write mask files and build one pending job per record.

    Records whose source image is missing come back already failed; the
    rest of the pipeline continues.
    """
    image_root = Path(image_root)
    out_root = Path(out_root)
    (out_root / "masks").mkdir(parents=True, exist_ok=True)
    (out_root / "edited").mkdir(parents=True, exist_ok=True)

    jobs = []
    for rec in sorted(manifest, key=lambda r: r.edit_id):
        mask_path = out_root / "masks" / f"{rec.edit_id}.png"
        out_path = out_root / "edited" / f"{rec.edit_id}.png"
        input_path = image_root / rec.image_file if rec.image_file else None
        write_mask_image(rec, mask_path)
        if input_path is None or not input_path.exists():
            jobs.append(
                RemovalJob(
                    edit_id=rec.edit_id,
                    input_image_path=str(input_path or ""),
                    mask_image_path=str(mask_path),
                    output_image_path=str(out_path),
                    status="failed",
                    reason=f"source image not found: {input_path}",
                )
            )
        else:
            jobs.append(
                RemovalJob(
                    edit_id=rec.edit_id,
                    input_image_path=str(input_path),
                    mask_image_path=str(mask_path),
                    output_image_path=str(out_path),
                )
            )
    return jobs


class JobLedger:
    """Append-only jsonl status log; replay reconstructs the latest status."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, job: RemovalJob):
        entry = {
            "edit_id": job.edit_id,
            "status": job.status,
            "exit_code": job.tool_exit_code,
            "reason": job.reason,
        }
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()

    def replay(self) -> dict[str, dict]:
        statuses: dict[str, dict] = {}
        if not self.path.exists():
            return statuses
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entry = json.loads(line)
                    statuses[entry["edit_id"]] = entry
        return statuses


def _expected_dimensions(job: RemovalJob) -> tuple[int, int]:
    with Image.open(job.input_image_path) as img:
        return img.size


def _run_one(job: RemovalJob, command_template: str) -> RemovalJob:
    cmd = [
        part.format(
            image=job.input_image_path,
            mask=job.mask_image_path,
            out=job.output_image_path,
        )
        for part in shlex.split(command_template)
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        return replace(
            job,
            status="failed",
            tool_exit_code=proc.returncode,
            reason=f"tool exited {proc.returncode}: {proc.stderr.strip()[:200]}",
        )
    out = Path(job.output_image_path)
    if not out.exists():
        return replace(
            job, status="failed", tool_exit_code=0, reason="tool produced no output"
        )
    expected = _expected_dimensions(job)
    with Image.open(out) as img:
        actual = img.size
    if actual != expected:
        return replace(
            job,
            status="failed",
            tool_exit_code=0,
            reason=f"output dimensions {actual} differ from input {expected}",
        )
    return replace(job, status="done", tool_exit_code=0)


def invoke_tool(
    jobs: list[RemovalJob],
    command_template: str,
    parallelism: int = 1,
    ledger: JobLedger | None = None,
) -> list[RemovalJob]:
    """Run the template for each pending job; done jobs are skipped on rerun."""
    missing = [p for p in PLACEHOLDERS if p not in command_template]
    if missing:
        raise ConfigError(
            f"command template missing placeholders: {' '.join(missing)}"
        )

    previous = ledger.replay() if ledger else {}
    results: dict[str, RemovalJob] = {}
    to_run = []
    for job in jobs:
        prior = previous.get(job.edit_id)
        if job.status == "failed":
            results[job.edit_id] = job
            if ledger:
                ledger.append(job)
        elif prior and prior["status"] == "done":
            results[job.edit_id] = replace(
                job, status="done", tool_exit_code=prior.get("exit_code")
            )
        else:
            to_run.append(job)

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        for finished in pool.map(lambda j: _run_one(j, command_template), to_run):
            results[finished.edit_id] = finished
            if ledger:
                ledger.append(finished)
    return [results[j.edit_id] for j in jobs]
