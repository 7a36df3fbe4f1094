import json

import pytest

from vqaedit import coco
from vqaedit.errors import FormatError, IntegrityError

# O_I per image, transcribed by hand from the fixture layout
EXPECTED_OI = {
    1: {1, 47}, 2: {1, 17, 18}, 3: {24}, 4: {24}, 5: {18},
    6: {1, 44, 47}, 7: {25}, 8: {18, 47}, 9: {1, 2}, 10: {17, 18},
    11: {1}, 12: {1, 44, 47}, 13: {17, 18, 24, 25}, 14: {1, 18},
    15: {44}, 16: {17}, 17: {1, 2}, 18: {18}, 19: {24, 25},
    20: {1, 17, 18, 44, 47},
}


def test_fixture_counts(corpus):
    table, images, instances = corpus
    assert len(images) == 20
    assert len(instances) == 63
    assert len(table.entries) == 8


def test_minimal_corpus(tmp_path):
    path = tmp_path / "mini.json"
    path.write_text(json.dumps({
        "images": [{"id": 1, "width": 8, "height": 8, "file_name": "a.png"}],
        "annotations": [{
            "id": 10, "image_id": 1, "category_id": 3,
            "segmentation": [[0.0, 0.0, 4.0, 0.0, 4.0, 4.0, 0.0, 4.0]],
            "area": 16.0, "bbox": [0, 0, 4, 4],
        }],
        "categories": [{"id": 3, "name": "cat"}],
    }))
    table, images, instances = coco.load_annotations(path)
    assert len(images) == 1 and len(instances) == 1
    assert instances[0].rasterize(images[0]).pixel_count() == 16


def test_unknown_category_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "images": [{"id": 1, "width": 8, "height": 8, "file_name": "a.png"}],
        "annotations": [{
            "id": 77, "image_id": 1, "category_id": 999,
            "segmentation": [[0, 0, 4, 0, 4, 4]], "area": 8.0,
        }],
        "categories": [{"id": 3, "name": "cat"}],
    }))
    with pytest.raises(IntegrityError, match="77"):
        coco.load_annotations(path)


def test_parse_failure_reports_position(tmp_path):
    path = tmp_path / "trunc.json"
    path.write_text('{"images": [')
    with pytest.raises(FormatError, match="byte"):
        coco.load_annotations(path)


def test_object_index_matches_hand_table(object_index):
    for image_id, expected in EXPECTED_OI.items():
        assert set(object_index.present(image_id)) == expected, image_id


def test_object_index_set_semantics(corpus):
    _, images, instances = corpus
    index = coco.build_object_index(images, instances)
    # multiple instances of one category collapse into a single O_I entry
    assert set(index.present(3)) == {24}
    assert index.instance_ids(3, 24) == (3001, 3002)
    # instance lists are ascending
    for img in EXPECTED_OI:
        for cat in index.present(img):
            ids = index.instance_ids(img, cat)
            assert list(ids) == sorted(ids)


def test_empty_image_has_empty_oi(corpus):
    _, images, _ = corpus
    index = coco.build_object_index(images, [])
    assert index.present(1) == frozenset()


def test_oi_invariants(corpus, object_index):
    _, images, instances = corpus
    per_image_count = {}
    for ann in instances:
        per_image_count[ann.image_id] = per_image_count.get(ann.image_id, 0) + 1
        assert ann.category_id in object_index.present(ann.image_id)
    for img, count in per_image_count.items():
        assert len(object_index.present(img)) <= count


def test_load_idempotent_and_round_trip(fixture_paths, tmp_path, corpus):
    again = coco.load_annotations(fixture_paths["coco"])
    assert again == coco.load_annotations(fixture_paths["coco"])
    table, images, instances = corpus
    out = tmp_path / "roundtrip.json"
    out.write_text(json.dumps(coco.serialize_corpus(table, images, instances)))
    assert coco.load_annotations(out) == (table, images, instances)


def test_rasterized_masks_nonempty(corpus):
    _, images, instances = corpus
    by_id = {i.image_id: i for i in images}
    for ann in instances:
        mask = ann.rasterize(by_id[ann.image_id])
        assert mask.pixel_count() > 0
        # fixture rectangles have exact integer pixel areas
        assert mask.pixel_count() == int(ann.declared_area)
