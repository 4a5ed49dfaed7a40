"""Automatic filtering rules for noisy bitext.

Cleaning is applied mainly on the English (source) side by default and can
be widened to both sides. The rules, in charging order:

  empty        either side has no text
  short        fewer than three counted tokens on the inspected side(s),
               where numeric/punctuation/symbol-only tokens do not count
  nonsentence  the inspected side contains no Unicode letters
  identical    source equals target after casefolding and removing
               whitespace

Before the rules run, both sides are detokenized with a frozen rule set
(documented on :func:`detokenize`) so corpora from differently tokenized
sources compare consistently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

from corpusforge.core import CorpusError, ParallelCorpus, Sentence, SentencePair
from corpusforge.tokens import has_letter, is_content_token

Side = Literal["source", "target", "both"]

RULE_ORDER = ("empty", "short", "nonsentence", "identical")

MIN_CONTENT_TOKENS = 3


@dataclass(frozen=True)
class TokenizationProfile:
    """Token classifiers used by the short-sentence rule.

    The defaults implement Unicode-category classification (N* numeric,
    P*/S* punctuation and symbols, L* letters); replace the callables to
    experiment with other definitions.
    """

    counts_token: Callable[[str], bool] = is_content_token
    contains_letter: Callable[[str], bool] = has_letter

    def content_token_count(self, text: str) -> int:
        return sum(1 for tok in text.split() if self.counts_token(tok))


DEFAULT_PROFILE = TokenizationProfile()


def _inspected(pair: SentencePair, side: Side) -> list[str]:
    if side == "source":
        return [pair.source.text]
    if side == "target":
        return [pair.target.text]
    return [pair.source.text, pair.target.text]


def filter_empty(pair: SentencePair) -> bool:
    """True (remove) when either side is empty or whitespace-only."""
    return not pair.source.text.strip() or not pair.target.text.strip()


def filter_short(
    pair: SentencePair,
    side: Side = "source",
    profile: TokenizationProfile = DEFAULT_PROFILE,
) -> bool:
    """True (remove) when an inspected side has fewer than three counted tokens.

    Also removes pairs with an empty side, which trivially fail the count.
    """
    if filter_empty(pair):
        return True
    return any(
        profile.content_token_count(text) < MIN_CONTENT_TOKENS
        for text in _inspected(pair, side)
    )


def filter_nonsentence(
    pair: SentencePair,
    side: Side = "source",
    profile: TokenizationProfile = DEFAULT_PROFILE,
) -> bool:
    """True (remove) when an inspected side contains no Unicode letters."""
    return any(not profile.contains_letter(text) for text in _inspected(pair, side))


def _identity_key(text: str) -> str:
    return "".join(text.split()).casefold()


def filter_identical(pair: SentencePair) -> bool:
    """True (remove) when both sides are equal after casefolding and
    whitespace removal."""
    return _identity_key(pair.source.text) == _identity_key(pair.target.text)


# Detokenizer rule set, frozen for bit-exact outputs:
#   * a token made only of closing punctuation attaches to the previous word
#   * a token made only of opening punctuation attaches to the next word
#   * straight double quotes alternate: 1st/3rd/... open, 2nd/4th/... close
#   * contractions ("n't", tokens starting with an apostrophe + letter)
#     attach to the previous word, joining e.g. "do n't" into "don't"
_CLOSING = set(".,!?;:%)]}»")
_OPENING = set("([{«")


def _is_contraction(token: str) -> bool:
    low = token.casefold()
    if low == "n't":
        return True
    return len(token) >= 2 and token[0] == "'" and token[1].isalpha()


def detokenize(text: str) -> str:
    """Join tokenization artifacts back into normal orthography.

    Idempotent: running it on its own output is a no-op.
    """
    words: list[str] = []
    glue_next = False
    quotes_seen = 0
    for token in text.split():
        attach_left = False
        if token and all(ch in _CLOSING for ch in token):
            attach_left = True
        elif token and all(ch in _OPENING for ch in token):
            if glue_next and words:
                words[-1] += token
            else:
                words.append(token)
            glue_next = True
            continue
        elif token == '"':
            opening = quotes_seen % 2 == 0
            quotes_seen += 1
            if opening:
                if glue_next and words:
                    words[-1] += token
                else:
                    words.append(token)
                glue_next = True
                continue
            attach_left = True
        elif _is_contraction(token):
            attach_left = True

        if (attach_left or glue_next) and words:
            words[-1] += token
        else:
            words.append(token)
        glue_next = False
    return " ".join(words)


def _detokenize_pair(pair: SentencePair) -> SentencePair:
    return SentencePair(
        pair.id,
        Sentence(pair.source.id, detokenize(pair.source.text), pair.source.lang),
        Sentence(pair.target.id, detokenize(pair.target.text), pair.target.lang),
        pair.provenance,
    )


@dataclass
class FilterReport:
    """Accounting of a filtering run; every input pair is charged once."""

    input_pairs: int = 0
    output_pairs: int = 0
    removed_by_rule: dict[str, int] = field(default_factory=dict)
    removed_ids: dict[str, list[int]] = field(default_factory=dict)
    side: str = "source"

    def check_conservation(self) -> None:
        removed = sum(self.removed_by_rule.values())
        if self.input_pairs != self.output_pairs + removed:
            raise CorpusError(
                f"filter accounting broken: {self.input_pairs} != "
                f"{self.output_pairs} + {removed}"
            )

    def to_dict(self) -> dict:
        return {
            "input_pairs": self.input_pairs,
            "output_pairs": self.output_pairs,
            "removed_by_rule": dict(self.removed_by_rule),
            "removed_ids": {k: list(v) for k, v in self.removed_ids.items()},
            "side": self.side,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")


def run_filters(
    corpus: ParallelCorpus,
    side: Side = "source",
    profile: TokenizationProfile = DEFAULT_PROFILE,
) -> tuple[ParallelCorpus, FilterReport]:
    """Detokenize both sides, then apply the removal rules in charging order.

    Decisions depend only on pair content, so the surviving set is invariant
    under permutations of the input.
    """
    report = FilterReport(
        input_pairs=len(corpus),
        removed_by_rule={rule: 0 for rule in RULE_ORDER},
        removed_ids={rule: [] for rule in RULE_ORDER},
        side=side,
    )
    survivors: list[SentencePair] = []
    for pair in corpus:
        pair = _detokenize_pair(pair)
        if filter_empty(pair):
            charged = "empty"
        elif filter_short(pair, side, profile):
            charged = "short"
        elif filter_nonsentence(pair, side, profile):
            charged = "nonsentence"
        elif filter_identical(pair):
            charged = "identical"
        else:
            survivors.append(pair)
            continue
        report.removed_by_rule[charged] += 1
        report.removed_ids[charged].append(pair.id)
    report.output_pairs = len(survivors)
    report.check_conservation()
    return ParallelCorpus(tuple(survivors), corpus.src_lang, corpus.tgt_lang), report
