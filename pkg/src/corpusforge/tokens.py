"""Whitespace tokenization and Unicode-category token classifiers.

Every module tokenizes the same way: split on whitespace, casefold where the
operation calls for case-insensitive matching. Token classes are defined by
Unicode general categories so they behave identically for ASCII and
non-ASCII text (Arabic-Indic digits, typographic punctuation, ...).
"""

from __future__ import annotations

import unicodedata
from typing import Iterable, Iterator, Sequence


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of ``text``."""
    return text.split()


def casefold_tokens(text: str) -> list[str]:
    """Casefolded whitespace tokens of ``text``."""
    return text.casefold().split()


def has_letter(text: str) -> bool:
    """True if any character is a Unicode letter (category L*)."""
    return any(unicodedata.category(ch).startswith("L") for ch in text)


def is_numeric_token(token: str) -> bool:
    """True if every character is a Unicode number (category N*)."""
    return bool(token) and all(unicodedata.category(ch).startswith("N") for ch in token)


def is_punctuation_token(token: str) -> bool:
    """True if every character is Unicode punctuation or a symbol (P*, S*)."""
    return bool(token) and all(unicodedata.category(ch)[0] in "PS" for ch in token)


def is_content_token(token: str) -> bool:
    """True for tokens counted by the short-sentence rule.

    A token does not count when it is made up entirely of numbers,
    punctuation and symbols (categories N*, P*, S*); this covers pure
    numbers ("1984"), pure punctuation ("!?"), and mixtures ("3%", "1,000").
    """
    return bool(token) and not all(unicodedata.category(ch)[0] in "NPS" for ch in token)


def word_ngrams(tokens: Sequence[str], order: int) -> Iterator[tuple[str, ...]]:
    """All contiguous ``order``-grams of ``tokens`` in position order."""
    for i in range(len(tokens) - order + 1):
        yield tuple(tokens[i : i + order])


def distinct_word_ngrams(tokens: Sequence[str], order: int) -> set[tuple[str, ...]]:
    """Set of distinct ``order``-grams of ``tokens``."""
    return set(word_ngrams(tokens, order))


def count_content_tokens(text: str) -> int:
    """Number of whitespace tokens that pass :func:`is_content_token`."""
    return sum(1 for tok in text.split() if is_content_token(tok))


def iter_token_positions(tokens: Iterable[str], vocabulary) -> Iterator[int]:
    """Indices of tokens whose casefolded form is in ``vocabulary``."""
    for i, tok in enumerate(tokens):
        if tok.casefold() in vocabulary:
            yield i
