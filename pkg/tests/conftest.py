from pathlib import Path

import pytest

from vqaedit import coco, vqa
from vqaedit.vocab import load_vocabulary

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_paths():
    return {
        "coco": FIXTURES / "mini_coco.json",
        "questions": FIXTURES / "mini_questions.json",
        "vqa_annotations": FIXTURES / "mini_vqa_annotations.json",
        "vocab": FIXTURES / "fixture_vocab.txt",
    }


@pytest.fixture(scope="session")
def corpus(fixture_paths):
    table, images, instances = coco.load_annotations(fixture_paths["coco"])
    return table, images, instances


@pytest.fixture(scope="session")
def object_index(corpus):
    _, images, instances = corpus
    return coco.build_object_index(images, instances)


@pytest.fixture(scope="session")
def triplets(fixture_paths):
    return vqa.load_questions_and_answers(
        fixture_paths["questions"], fixture_paths["vqa_annotations"]
    )


@pytest.fixture(scope="session")
def vocab_table(corpus, fixture_paths):
    table, _, _ = corpus
    return load_vocabulary(fixture_paths["vocab"], table)
