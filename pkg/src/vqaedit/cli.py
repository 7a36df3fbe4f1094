"""Command-line entry point.

Subcommands compose through files so every stage can be rerun and tested
independently: ingest-stats, select-iv, select-cv, inpaint, consistency,
augment-plan, compare-reports, sample-review, serve-review.

``CVF_CONFIG`` may point at a JSON config file supplying defaults for
the shared flags; explicit flags override it.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from vqaedit import augment, inpaint, metrics, pipeline, selection, vqa
from vqaedit.errors import ConfigError, FormatError, IntegrityError, VqaEditError

CONFIG_ENV = "CVF_CONFIG"


def _env_defaults() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from exc


def _fail(category: str, exc: Exception, code: int = 1):
    click.echo(f"error:{category}: {exc}", err=True)
    sys.exit(code)


def _guard(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail("config", exc, 2)
        except FormatError as exc:
            _fail("format", exc)
        except IntegrityError as exc:
            _fail("integrity", exc)
        except VqaEditError as exc:
            _fail("internal", exc)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


corpus_options = [
    click.option("--annotations", required=True, type=click.Path(exists=True),
                 help="COCO-instances-style annotation file."),
    click.option("--questions", required=True, type=click.Path(exists=True),
                 help="VQA-style questions file."),
    click.option("--vqa-annotations", required=True, type=click.Path(exists=True),
                 help="VQA-style answers/annotations file."),
    click.option("--vocab", type=click.Path(exists=True), default=None,
                 help="Vocabulary mapping file (default: bundled table)."),
    click.option("--answers-per-question", type=int, default=10, show_default=True),
]


def with_options(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return deco


def _load_corpus(annotations, questions, vqa_annotations, vocab, answers_per_question):
    defaults = _env_defaults()
    return pipeline.Corpus(
        annotations_path=annotations or defaults.get("annotations"),
        questions_path=questions or defaults.get("questions"),
        vqa_annotations_path=vqa_annotations or defaults.get("vqa_annotations"),
        vocab_path=vocab or defaults.get("vocab"),
        answers_per_question=answers_per_question,
    )


def _selection_config(area_threshold, overlap_threshold, strict, dilate_radius, mode):
    kwargs = {
        "area_threshold": area_threshold,
        "dilate_radius": dilate_radius,
        "strict_iv": strict,
    }
    if mode == "iv":
        kwargs["iv_overlap_threshold"] = overlap_threshold
    else:
        kwargs["cv_overlap_threshold"] = overlap_threshold
    return selection.SelectionConfig(**kwargs)


@click.group()
def main():
    """Curation and robustness evaluation for semantically edited VQA corpora."""


@main.command("ingest-stats")
@with_options(corpus_options)
@click.option("--split-ratio", type=float, default=0.9, show_default=True)
@click.option("--split-seed", type=int, default=0, show_default=True)
@_guard
def ingest_stats(annotations, questions, vqa_annotations, vocab,
                 answers_per_question, split_ratio, split_seed):
    """Load the corpora and print counts, flags and the test/val split."""
    corpus = _load_corpus(annotations, questions, vqa_annotations, vocab,
                          answers_per_question)
    uniform = vqa.filter_uniform(corpus.triplets)
    counting = [t for t in corpus.triplets if t.counting]
    test, val = vqa.split_val(corpus.triplets, split_ratio, split_seed)
    click.echo(
        f"images={len(corpus.images)} instances={len(corpus.instances)} "
        f"categories={len(corpus.table.entries)}"
    )
    click.echo(
        f"triplets={len(corpus.triplets)} uniform={len(uniform)} "
        f"counting={len(counting)}"
    )
    click.echo(f"split test={len(test.question_ids)} val={len(val.question_ids)}")


def _select_command(mode: str):
    @with_options(corpus_options)
    @click.option("--area-threshold", type=float, default=0.10, show_default=True)
    @click.option("--overlap-threshold", type=float,
                  default=0.10 if mode == "iv" else 0.0, show_default=True)
    @click.option("--dilate-radius", type=int, default=3, show_default=True)
    @click.option("--strict", is_flag=True, help="Require overlap exactly zero.")
    @click.option("--out", required=True, type=click.Path(),
                  help="Manifest output path (jsonl).")
    @_guard
    def cmd(annotations, questions, vqa_annotations, vocab, answers_per_question,
            area_threshold, overlap_threshold, dilate_radius, strict, out):
        try:
            config = _selection_config(area_threshold, overlap_threshold, strict,
                                       dilate_radius, mode)
        except ConfigError as exc:
            _fail("config", exc, 2)
        corpus = _load_corpus(annotations, questions, vqa_annotations, vocab,
                              answers_per_question)
        records, audit = pipeline.run_selection(corpus, mode, config)
        summary = selection.emit_manifest(records, out, corpus.triplets)
        pipeline.write_provenance(
            Path(out).parent,
            config={"mode": mode, "area_threshold": area_threshold,
                    "overlap_threshold": overlap_threshold,
                    "dilate_radius": dilate_radius, "strict": strict},
            inputs={"annotations": annotations, "questions": questions,
                    "vqa_annotations": vqa_annotations},
        )
        click.echo(
            f"real={summary.get('real', 0)} realNE={summary.get('realNE', 0)} "
            f"edit={summary['edit']}"
        )
        if audit:
            click.echo(f"skipped {len(audit)} triplets (see audit reasons)", err=True)

    cmd.__doc__ = (
        "Emit the invariant-edit manifest." if mode == "iv"
        else "Emit the covariant (counting) edit manifest."
    )
    return cmd


main.command("select-iv")(_select_command("iv"))
main.command("select-cv")(_select_command("cv"))


@main.command("inpaint")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--images", "image_root", required=True, type=click.Path(exists=True))
@click.option("--out", "out_root", required=True, type=click.Path())
@click.option("--template", required=True,
              help="Removal tool command with {image} {mask} {out} placeholders.")
@click.option("--jobs", "parallelism", type=int, default=1, show_default=True)
@_guard
def inpaint_cmd(manifest, image_root, out_root, template, parallelism):
    """Render masks and drive the external object-removal tool."""
    records = selection.load_manifest(manifest)
    jobs = inpaint.render_jobs(records, image_root, out_root)
    ledger = inpaint.JobLedger(Path(out_root) / "jobs.jsonl")
    done_jobs = inpaint.invoke_tool(jobs, template, parallelism, ledger)
    done = sum(1 for j in done_jobs if j.status == "done")
    failed = sum(1 for j in done_jobs if j.status == "failed")
    click.echo(f"jobs={len(done_jobs)} done={done} failed={failed}")
    if failed:
        sys.exit(1)


@main.command("consistency")
@click.option("--orig", required=True, type=click.Path(exists=True),
              help="Predictions on original questions (jsonl id/answer).")
@click.option("--edit", required=True, type=click.Path(exists=True),
              help="Predictions on edited items (jsonl id/answer).")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--questions", required=True, type=click.Path(exists=True))
@click.option("--vqa-annotations", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["iv", "cv"]), required=True)
@click.option("--answer-vocab-size", type=int, default=3000, show_default=True)
@click.option("--model-name", default="")
@click.option("--out", type=click.Path(), default=None,
              help="Also write the report as JSON.")
@_guard
def consistency(orig, edit, manifest, questions, vqa_annotations, mode,
                answer_vocab_size, model_name, out):
    """Compute the accuracy/flip report for one model."""
    triplets = vqa.load_questions_and_answers(questions, vqa_annotations)
    records = selection.load_manifest(manifest)
    report = metrics.compute_report(
        metrics.PredictionSet.load(orig, model_name),
        metrics.PredictionSet.load(edit, model_name),
        records, triplets, mode, answer_vocab_size,
    )
    click.echo(report.render_text())
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@main.command("augment-plan")
@click.option("--questions", required=True, type=click.Path(exists=True))
@click.option("--vqa-annotations", required=True, type=click.Path(exists=True))
@click.option("--manifest", "manifests", multiple=True, required=True,
              type=click.Path(exists=True), help="Edit manifests (IV and/or CV).")
@click.option("--question-type", "qtype", default=None,
              help="Named filter (e.g. 'is there a', 'counting'); default: all.")
@click.option("--composition", type=click.Choice(augment.COMPOSITIONS),
              default="real+IV", show_default=True)
@click.option("--strict", is_flag=True, help="Keep only zero-overlap edits.")
@click.option("--out", required=True, type=click.Path())
@_guard
def augment_plan(questions, vqa_annotations, manifests, qtype, composition,
                 strict, out):
    """Build a fine-tuning manifest for one question-type split."""
    triplets = vqa.load_questions_and_answers(questions, vqa_annotations)
    subset = vqa.filter_uniform(triplets)
    if qtype:
        known = dict(augment.DEFAULT_FILTERS)
        match = known.get(qtype, (qtype,))
        subset = augment.filter_question_type(
            subset, augment.QuestionTypeFilter(qtype, tuple(match))
        )
    edits = [r for m in manifests for r in selection.load_manifest(m)]
    qids = {t.question_id for t in subset}
    edits = [e for e in edits if e.question_id in qids]
    manifest = augment.build_manifest(subset, edits, composition, strict,
                                      name=qtype or "all")
    augment.write_manifest(manifest, out)
    click.echo(
        f"manifest {manifest.name}: real={len(manifest.real_question_ids)} "
        f"edits={len(manifest.edit_ids)} composition={composition}"
    )


@main.command("compare-reports")
@click.option("--base", required=True, type=click.Path(exists=True),
              help="Baseline consistency report (JSON).")
@click.option("--augmented", required=True, type=click.Path(exists=True),
              help="Post-augmentation consistency report (JSON).")
@_guard
def compare_reports(base, augmented):
    """Relative flip reduction and accuracy delta between two reports."""
    with open(base, encoding="utf-8") as fh:
        b = json.load(fh)
    with open(augmented, encoding="utf-8") as fh:
        a = json.load(fh)
    if b["overall"]["n_pairs"] != a["overall"]["n_pairs"]:
        _fail("integrity", IntegrityError("reports cover different pair sets"))
    summary = augment.relative_summary_from_rates(
        b["overall"]["flipped"], a["overall"]["flipped"],
        b["accuracy_orig"], a["accuracy_orig"],
    )
    red = summary.flip_reduction_relative
    red_str = "undefined" if red is None else f"{100.0 * red:.1f}%"
    click.echo(f"flip reduction: {red_str}  accuracy delta: "
               f"{summary.accuracy_delta:+.2f} points")


@main.command("sample-review")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--questions", required=True, type=click.Path(exists=True))
@click.option("--vqa-annotations", required=True, type=click.Path(exists=True))
@click.option("--flipped-ids", "flip_files", multiple=True, type=click.Path(exists=True),
              help="Files of edit_ids (one per line) that flipped for a model.")
@click.option("--per-type-cap", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_guard
def sample_review(manifest, questions, vqa_annotations, flip_files, per_type_cap,
                  seed, out):
    """Draw the validation sample and write its edit_ids."""
    from vqaedit import review

    records = selection.load_manifest(manifest)
    triplets = vqa.load_questions_and_answers(questions, vqa_annotations)
    qtypes = {t.question_id: t.question_type for t in triplets}
    sources = None
    if flip_files:
        sources = []
        for path in flip_files:
            with open(path, encoding="utf-8") as fh:
                sources.append({line.strip() for line in fh if line.strip()})
    sample = review.build_sample(records, qtypes, sources, per_type_cap, seed)
    with open(out, "w", encoding="utf-8") as fh:
        for edit_id in sample.edit_ids:
            fh.write(edit_id + "\n")
    click.echo(f"sampled {len(sample.edit_ids)} items")


@main.command("serve-review")
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--questions", required=True, type=click.Path(exists=True))
@click.option("--vqa-annotations", required=True, type=click.Path(exists=True))
@click.option("--images", "images_dir", type=click.Path(exists=True), default=None)
@click.option("--sample", "sample_path", type=click.Path(exists=True), default=None,
              help="edit_id list from sample-review; default: whole manifest.")
@click.option("--labels", "labels_path", type=click.Path(), default="labels.jsonl",
              show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Directory holding the built UI bundle.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_guard
def serve_review(manifest, questions, vqa_annotations, images_dir, sample_path,
                 labels_path, ui_dir, host, port):
    """Serve the human-validation workflow over HTTP."""
    import uvicorn

    from vqaedit import review

    records = selection.load_manifest(manifest)
    triplets = vqa.load_questions_and_answers(questions, vqa_annotations)
    if sample_path:
        with open(sample_path, encoding="utf-8") as fh:
            wanted = {line.strip() for line in fh if line.strip()}
        records = [r for r in records if r.edit_id in wanted]
    sample = review.ReviewSample(
        edit_ids=tuple(sorted(r.edit_id for r in records)), per_type_cap=0, seed=0
    )
    items = review.items_from_manifest(
        records, {t.question_id: t.question_text for t in triplets}
    )
    app = review.create_app(
        sample, items, review.LabelStore(labels_path), images_dir, ui_dir
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
