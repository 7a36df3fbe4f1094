"""Vocabulary mapping from question/answer text onto object categories.

A mapping file lists, per category, the synonyms used in QA text
(``canonical_name: synonym, synonym, ...``).  Matching is greedy
longest-phrase-first over the token stream, with naive plurals handled
automatically; the shipped default file covers the published example
rows plus every canonical name.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from vqaedit.coco import CategoryTable
from vqaedit.errors import FormatError
from vqaedit.textnorm import tokenize


@dataclass(frozen=True)
class VocabularyTable:
    rules: tuple[tuple[tuple[str, ...], int], ...]  # (phrase tokens, category_id)
    source: str

    def __post_init__(self):
        # longest-phrase-first, then lexicographic: matching is independent
        # of the file's row order
        ordered = tuple(
            sorted(self.rules, key=lambda r: (-len(r[0]), r[0], r[1]))
        )
        object.__setattr__(self, "rules", ordered)


@dataclass(frozen=True)
class QaObjectSet:
    question_id: int
    categories: frozenset[int]
    matched_phrases: tuple[tuple[str, int], ...]


def default_vocabulary_path() -> str:
    return str(resources.files("vqaedit.data") / "default_vocab.txt")


def load_vocabulary(path, table: CategoryTable) -> VocabularyTable:
    """Load a mapping file; every category's canonical name maps to itself."""
    rules: dict[tuple[str, ...], int] = {}

    def add(phrase_tokens: tuple[str, ...], cat: int, line_no: int):
        if not phrase_tokens:
            raise FormatError(f"{path}:{line_no}: empty phrase")
        if phrase_tokens in rules and rules[phrase_tokens] != cat:
            raise FormatError(
                f"{path}:{line_no}: phrase {' '.join(phrase_tokens)!r} already "
                f"mapped to category {rules[phrase_tokens]}"
            )
        rules[phrase_tokens] = cat

    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise FormatError(f"{path}:{line_no}: expected 'name: syn, syn'")
            name, _, rest = line.partition(":")
            try:
                cat = table.id_for(name.strip())
            except KeyError:
                raise FormatError(
                    f"{path}:{line_no}: unknown category name {name.strip()!r}"
                ) from None
            add(tuple(tokenize(name)), cat, line_no)
            for syn in rest.split(","):
                syn = syn.strip()
                if syn:
                    add(tuple(tokenize(syn)), cat, line_no)

    # canonical names always map to themselves even if the file omits them
    for cid, cname in table.entries:
        rules.setdefault(tuple(tokenize(cname)), cid)
    return VocabularyTable(rules=tuple(rules.items()), source=str(path))


def _phrase_matches(phrase: tuple[str, ...], tokens: list[str], pos: int) -> bool:
    if pos + len(phrase) > len(tokens):
        return False
    for i, word in enumerate(phrase):
        tok = tokens[pos + i]
        if tok == word:
            continue
        # naive plural of the phrase's last word
        if i == len(phrase) - 1 and tok in (word + "s", word + "es"):
            continue
        return False
    return True


def _scan(tokens: list[str], table: VocabularyTable):
    pos = 0
    while pos < len(tokens):
        for phrase, cat in table.rules:
            if _phrase_matches(phrase, tokens, pos):
                yield " ".join(phrase), cat
                pos += len(phrase)
                break
        else:
            pos += 1


def extract_qa_objects(
    question_text: str,
    answer_text: str,
    table: VocabularyTable,
    question_id: int = -1,
) -> QaObjectSet:
    """Map referrals in question and answer onto categories (O_QA).

    Question and answer are scanned independently and the results unioned;
    a longer matched phrase suppresses shorter matches inside it.
    """
    matched: list[tuple[str, int]] = []
    for text in (question_text, answer_text):
        matched.extend(_scan(tokenize(text), table))
    return QaObjectSet(
        question_id=question_id,
        categories=frozenset(cat for _, cat in matched),
        matched_phrases=tuple(matched),
    )
