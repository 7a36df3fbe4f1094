import random

import pytest

from vqaedit import coco, masks as mops, selection
from vqaedit.errors import ConfigError, IntegrityError
from vqaedit.pipeline import Corpus, run_selection
from vqaedit.selection import SelectionConfig
from vqaedit.vocab import QaObjectSet
from vqaedit.vqa import make_triplet

W, H = 64, 48


@pytest.fixture(scope="module")
def fixture_corpus(fixture_paths):
    return Corpus(
        fixture_paths["coco"],
        fixture_paths["questions"],
        fixture_paths["vqa_annotations"],
        fixture_paths["vocab"],
    )


@pytest.fixture(scope="module")
def iv_records(fixture_corpus):
    records, _ = run_selection(fixture_corpus, "iv", SelectionConfig())
    return records


@pytest.fixture(scope="module")
def cv_results(fixture_corpus):
    return run_selection(fixture_corpus, "cv", SelectionConfig())


# ---------------------------------------------------------- IV hand table


def test_iv_record_set(iv_records):
    # q501: person eligible (cup is QA); q502: person+dog (cat is QA);
    # q506: person+cup (bottle is QA); q508 blocked by area; q510 by overlap.
    assert sorted(r.edit_id for r in iv_records) == [
        "000000000501-iv-c001-all",
        "000000000502-iv-c001-all",
        "000000000502-iv-c018-all",
        "000000000506-iv-c001-all",
        "000000000506-iv-c047-all",
    ]


def test_iv_record_payloads(iv_records):
    by_id = {r.edit_id: r for r in iv_records}
    r = by_id["000000000501-iv-c001-all"]
    assert r.mode == "IV" and r.image_id == 1
    assert r.removed_instance_ids == (1001,)
    assert r.expected_answer == "red"
    assert r.overlap == 0.0
    assert r.area == pytest.approx(100 / (W * H))
    assert r.removal_mask.pixel_count() == 100
    r2 = by_id["000000000502-iv-c018-all"]
    assert r2.removed_instance_ids == (2001,) and r2.expected_answer == "yes"


def test_iv_area_gate_blocks_q508(iv_records):
    # dog on image 8 is 24x16 = 384 px > 10% of 3072
    assert not any(r.question_id == 508 for r in iv_records)


def test_iv_overlap_gate_blocks_q510(fixture_corpus):
    # dilated dog vs dilated cat on image 10 overlap by 80/256 = 0.3125
    t = next(t for t in fixture_corpus.triplets if t.question_id == 510)
    qa = fixture_corpus.qa_objects(t)
    recs = selection.select_iv(
        t, fixture_corpus.index, qa, fixture_corpus.instance_masks(10),
        SelectionConfig(),
    )
    assert recs == []
    # a looser threshold admits it, confirming the overlap is the blocker
    loose = selection.select_iv(
        t, fixture_corpus.index, qa, fixture_corpus.instance_masks(10),
        SelectionConfig(iv_overlap_threshold=0.5),
    )
    assert [r.target_category_id for r in loose] == [18]
    assert loose[0].overlap == pytest.approx(80 / 256)


def test_iv_strict_mode_subset(fixture_corpus, iv_records):
    strict, _ = run_selection(fixture_corpus, "iv", SelectionConfig(strict_iv=True))
    assert {r.edit_id for r in strict} <= {r.edit_id for r in iv_records}
    assert all(r.overlap == 0.0 for r in strict)
    # all five default records already have zero overlap on this corpus
    assert len(strict) == 5


def test_iv_non_uniform_excluded(fixture_corpus, iv_records):
    uniform_qids = {t.question_id for t in fixture_corpus.triplets if t.uniform}
    assert all(r.question_id in uniform_qids for r in iv_records)


# ---------------------------------------------------------- CV hand table


def test_cv_record_set(cv_results):
    records, _ = cv_results
    per_qid = {}
    for r in records:
        per_qid.setdefault(r.question_id, []).append(r)
    assert {q: len(rs) for q, rs in per_qid.items()} == {
        503: 2, 507: 3, 511: 5, 515: 3, 518: 3,
    }
    assert len(records) == 16


def test_cv_expected_answers(cv_results):
    records, _ = cv_results
    expect = {503: "1", 507: "2", 511: "4", 515: "2", 518: "2"}
    for r in records:
        assert r.mode == "CV"
        assert r.expected_answer == expect[r.question_id]
        assert len(r.removed_instance_ids) == 1
        assert r.overlap == 0.0


def test_cv_word_number_answer(cv_results):
    # q515's uniform answer is the word "three"
    records, _ = cv_results
    q515 = [r for r in records if r.question_id == 515]
    assert sorted(r.removed_instance_ids[0] for r in q515) == [15001, 15002, 15003]
    assert all(r.expected_answer == "2" for r in q515)


def test_cv_audit_reports_count_mismatch(cv_results):
    _, audit = cv_results
    assert len(audit) == 1
    qid, reason = audit[0]
    assert qid == 504 and "3" in reason and "2" in reason


def test_cv_touching_instances_blocked(fixture_corpus):
    # image 5 dogs are 2 px apart; radius-3 dilation makes them touch
    t = next(t for t in fixture_corpus.triplets if t.question_id == 505)
    qa = fixture_corpus.qa_objects(t, question_only=True)
    recs = selection.select_cv(
        t, fixture_corpus.index, qa, fixture_corpus.instance_masks(5),
        SelectionConfig(),
    )
    assert recs == []
    # with no dilation the gap keeps them disjoint
    recs0 = selection.select_cv(
        t, fixture_corpus.index, qa, fixture_corpus.instance_masks(5),
        SelectionConfig(dilate_radius=0),
    )
    assert len(recs0) == 2


def test_cv_edit_id_format(cv_results):
    records, _ = cv_results
    r = min(records, key=lambda r: r.edit_id)
    assert r.edit_id == "000000000503-cv-c024-i000003001"


# ---------------------------------------------------------- manifest


def test_manifest_summary_counts(fixture_corpus, iv_records, cv_results, tmp_path):
    cv_records, _ = cv_results
    iv_summary = selection.emit_manifest(
        iv_records, tmp_path / "iv.jsonl", fixture_corpus.triplets
    )
    assert iv_summary == {"edit": 5, "real": 13, "realNE": 10}
    cv_summary = selection.emit_manifest(
        cv_records, tmp_path / "cv.jsonl", fixture_corpus.triplets
    )
    assert cv_summary == {"edit": 16, "real": 13, "realNE": 8}


def test_manifest_round_trip_and_determinism(iv_records, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    selection.emit_manifest(iv_records, a)
    selection.emit_manifest(list(reversed(iv_records)), b)
    assert a.read_bytes() == b.read_bytes()
    loaded = selection.load_manifest(a)
    assert [r.edit_id for r in loaded] == sorted(r.edit_id for r in iv_records)
    by_id = {r.edit_id: r for r in iv_records}
    for r in loaded:
        orig = by_id[r.edit_id]
        assert r == orig
        assert r.removal_mask == orig.removal_mask


def test_manifest_duplicate_rejected(iv_records, tmp_path):
    with pytest.raises(IntegrityError, match="duplicate"):
        selection.emit_manifest(iv_records + [iv_records[0]], tmp_path / "dup.jsonl")


# ---------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ConfigError):
        SelectionConfig(area_threshold=1.5)
    with pytest.raises(ConfigError):
        SelectionConfig(iv_overlap_threshold=-0.1)
    with pytest.raises(ConfigError):
        SelectionConfig(dilate_radius=-1)


# ---------------------------------------------------------- fuzz

def random_scene(rng, n_rects=6):
    """Random rectangles on a 64x48 grid, split into 2-3 categories."""
    anns = []
    for i in range(n_rects):
        w = rng.randint(3, 20)
        h = rng.randint(3, 20)
        x = rng.randint(0, W - w)
        y = rng.randint(0, H - h)
        cat = rng.choice([1, 2, 3])
        anns.append((100 + i, cat, x, y, w, h))
    return anns


def build_scene(anns):
    image = coco.ImageRecord(1, W, H, "img.png")
    instances = [
        coco.InstanceAnnotation(
            instance_id=iid, image_id=1, category_id=cat,
            segmentation=[[float(x), float(y), float(x + w), float(y),
                           float(x + w), float(y + h), float(x), float(y + h)]],
            declared_area=float(w * h), bbox=(x, y, w, h),
        )
        for iid, cat, x, y, w, h in anns
    ]
    index = coco.build_object_index([image], instances)
    inst_masks = {a.instance_id: a.rasterize(image) for a in instances}
    return index, inst_masks


def test_iv_fuzz_gates_hold():
    rng = random.Random(20240817)
    config = SelectionConfig()
    for trial in range(60):
        anns = random_scene(rng)
        index, inst_masks = build_scene(anns)
        qa_cats = frozenset(rng.sample([1, 2, 3], rng.randint(0, 2)))
        qa = QaObjectSet(1, qa_cats, ())
        t = make_triplet(1, 1, "Is there something?", ["yes"] * 10)
        records = selection.select_iv(t, index, qa, inst_masks, config)
        for r in records:
            # target never a QA category; re-check every gate from raw masks
            assert r.target_category_id not in qa_cats
            cat_ids = index.instance_ids(1, r.target_category_id)
            assert r.removed_instance_ids == cat_ids
            largest = max(mops.area_fraction(inst_masks[i]) for i in cat_ids)
            assert largest == r.area < config.area_threshold
            qa_union = [
                inst_masks[i]
                for c in qa_cats
                for i in index.instance_ids(1, c)
            ]
            if qa_union:
                recomputed = mops.overlap_score(
                    mops.dilate(r.removal_mask, 3),
                    mops.dilate(mops.union_masks(qa_union), 3),
                )
            else:
                recomputed = 0.0
            assert recomputed == r.overlap < config.iv_overlap_threshold


def test_cv_fuzz_gates_hold():
    rng = random.Random(99)
    config = SelectionConfig()
    for trial in range(60):
        anns = [a for a in random_scene(rng, n_rects=5) if a[1] == 1] or [
            (100, 1, 4, 4, 5, 5)
        ]
        index, inst_masks = build_scene(anns)
        n = len(anns)
        t = make_triplet(7, 1, "How many things?", [str(n)] * 10)
        qa = QaObjectSet(7, frozenset({1}), ())
        records = selection.select_cv(t, index, qa, inst_masks, config)
        for r in records:
            (inst,) = r.removed_instance_ids
            assert mops.area_fraction(inst_masks[inst]) < config.area_threshold
            others = [inst_masks[i[0]] for i in anns if i[0] != inst]
            if others:
                score = mops.overlap_score(
                    mops.dilate(inst_masks[inst], 3),
                    mops.dilate(mops.union_masks(others), 3),
                )
                assert score == r.overlap <= config.cv_overlap_threshold
            assert r.expected_answer == str(n - 1)


def test_iv_threshold_monotone():
    rng = random.Random(5)
    for trial in range(30):
        anns = random_scene(rng)
        index, inst_masks = build_scene(anns)
        qa = QaObjectSet(1, frozenset({3}), ())
        t = make_triplet(1, 1, "Is there something?", ["yes"] * 10)
        tight = selection.select_iv(
            t, index, qa, inst_masks,
            SelectionConfig(area_threshold=0.05, iv_overlap_threshold=0.05),
        )
        loose = selection.select_iv(t, index, qa, inst_masks, SelectionConfig())
        assert {r.edit_id for r in tight} <= {r.edit_id for r in loose}
