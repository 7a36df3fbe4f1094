"""Text normalization shared by answer handling and vocabulary matching."""

from __future__ import annotations

import re

_PUNCT = re.compile(r"[^\w\s]")
_WS = re.compile(r"\s+")

# Fixed number-word table; digit strings 0-99 are accepted as well.
NUMBER_WORDS = {
    "zero": 0,
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
    "eleven": 11,
    "twelve": 12,
    "thirteen": 13,
    "fourteen": 14,
    "fifteen": 15,
    "sixteen": 16,
    "seventeen": 17,
    "eighteen": 18,
    "nineteen": 19,
    "twenty": 20,
}


def normalize(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace."""
    return _WS.sub(" ", text.strip().lower())


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _PUNCT.sub(" ", text.lower()).split()


def parse_number(answer: str) -> int | None:
    """Parse an answer as a non-negative integer, or None.

    Accepts digit strings "0".."99" and the English words zero..twenty.
    """
    norm = normalize(answer)
    if norm.isdigit() and len(norm) <= 2:
        return int(norm)
    return NUMBER_WORDS.get(norm)
