"""Noun-class translation accuracy via POS label projection.

The target languages have no POS taggers, so tags come from the English
side: an external tagger annotates the source, a word alignment carries each
tag over to its target word, and nouns are bucketed by word prefix (the
noun-class marker in Niger-Congo languages). A noun counts as correctly
translated when the exact casefolded token appears in the system's
hypothesis sentence.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from corpusforge.align import Alignment
from corpusforge.core import CorpusError, CorpusFormatError, Sentence

# Universal POS tags plus the projection filler for unlinked words.
UPOS_TAGS = frozenset(
    {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    }
)
OTHER_TAG = "OTHER"


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.tags):
            raise CorpusError(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )

    def __len__(self) -> int:
        return len(self.tokens)


def ingest_tags(path: str | Path, label_set: frozenset[str] = UPOS_TAGS) -> list[TaggedSentence]:
    """Parse token/TAG lines ("The/DET cat/NOUN sat/VERB"), one sentence each."""
    sentences: list[TaggedSentence] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            tokens: list[str] = []
            tags: list[str] = []
            for item in line.split():
                parts = item.split("/")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: malformed token/TAG item {item!r}"
                    )
                token, tag = parts
                if tag not in label_set:
                    raise CorpusFormatError(
                        f"{path}:{lineno}: unknown POS tag {tag!r}"
                    )
                tokens.append(token)
                tags.append(tag)
            sentences.append(TaggedSentence(tuple(tokens), tuple(tags)))
    return sentences


def project_tags(
    src: TaggedSentence, tgt: Sentence | str, alignment: Alignment
) -> TaggedSentence:
    """Carry source tags to aligned target tokens; unlinked tokens get OTHER."""
    tgt_tokens = (tgt.text if isinstance(tgt, Sentence) else tgt).split()
    tags = [OTHER_TAG] * len(tgt_tokens)
    for i, j in alignment.links:
        if i >= len(src) or j >= len(tgt_tokens):
            raise CorpusError(
                f"alignment link {i}-{j} out of bounds for "
                f"{len(src)}x{len(tgt_tokens)} sentence pair"
            )
        tags[j] = src.tags[i]
    return TaggedSentence(tuple(tgt_tokens), tuple(tags))


@dataclass(frozen=True)
class NounClassBucket:
    prefix: str
    total: int
    correct: int
    members: tuple[str, ...]  # distinct noun tokens, sorted

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0


@dataclass(frozen=True)
class AnalysisReport:
    prefix_len: int
    tag: str
    buckets: tuple[NounClassBucket, ...]  # sorted by frequency descending

    @property
    def macro_accuracy(self) -> float:
        if not self.buckets:
            return 0.0
        return sum(b.accuracy for b in self.buckets) / len(self.buckets)

    def prefixes(self) -> tuple[str, ...]:
        return tuple(b.prefix for b in self.buckets)

    def to_dict(self) -> dict:
        return {
            "prefix_len": self.prefix_len,
            "tag": self.tag,
            "macro_accuracy": self.macro_accuracy,
            "buckets": [
                {
                    "prefix": b.prefix,
                    "total": b.total,
                    "correct": b.correct,
                    "accuracy": b.accuracy,
                    "members": list(b.members),
                }
                for b in self.buckets
            ],
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")


def nounclass_accuracy(
    ref_tagged: Sequence[TaggedSentence],
    hypotheses: Sequence[str],
    prefix_len: int = 2,
    tag: str = "NOUN",
    top: int = 10,
) -> AnalysisReport:
    """Translation accuracy of reference nouns, bucketed by word prefix.

    Buckets are the ``top`` most frequent prefixes of length ``prefix_len``
    (ties broken lexicographically); each occurrence of a reference noun is
    correct when its casefolded form appears as a token of the corresponding
    hypothesis. Tokens shorter than the prefix length are skipped. ``tag``
    may name any POS tag; nouns are the default analysis.
    """
    if len(ref_tagged) != len(hypotheses):
        raise CorpusError(
            f"reference/hypothesis length mismatch: {len(ref_tagged)} vs "
            f"{len(hypotheses)}"
        )
    if prefix_len < 1:
        raise CorpusError("prefix_len must be >= 1")

    freq: Counter = Counter()
    stats: dict[str, list[int]] = defaultdict(lambda: [0, 0])  # total, correct
    members: dict[str, set[str]] = defaultdict(set)
    for tagged, hyp in zip(ref_tagged, hypotheses):
        hyp_tokens = set(hyp.casefold().split())
        for token, token_tag in zip(tagged.tokens, tagged.tags):
            if token_tag != tag:
                continue
            word = token.casefold()
            if len(word) < prefix_len:
                continue
            prefix = word[:prefix_len]
            freq[prefix] += 1
            stats[prefix][0] += 1
            stats[prefix][1] += int(word in hyp_tokens)
            members[prefix].add(word)

    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    buckets = tuple(
        NounClassBucket(
            prefix=prefix,
            total=stats[prefix][0],
            correct=stats[prefix][1],
            members=tuple(sorted(members[prefix])),
        )
        for prefix, _count in ranked
    )
    return AnalysisReport(prefix_len=prefix_len, tag=tag, buckets=buckets)


@dataclass(frozen=True)
class SystemDelta:
    """Accuracy difference between two systems, in percentage points."""

    prefixes: tuple[str, ...]
    bucket_deltas: dict[str, float]
    macro_delta: float

    def to_dict(self) -> dict:
        return {
            "prefixes": list(self.prefixes),
            "bucket_deltas": dict(self.bucket_deltas),
            "macro_delta": self.macro_delta,
        }


def compare_systems(report_a: AnalysisReport, report_b: AnalysisReport) -> SystemDelta:
    """Per-bucket and macro-average accuracy deltas (system b minus a)."""
    if set(report_a.prefixes()) != set(report_b.prefixes()):
        raise CorpusError(
            f"bucket mismatch: {sorted(report_a.prefixes())} vs "
            f"{sorted(report_b.prefixes())}"
        )
    acc_a = {b.prefix: b.accuracy for b in report_a.buckets}
    acc_b = {b.prefix: b.accuracy for b in report_b.buckets}
    deltas = {
        prefix: 100.0 * (acc_b[prefix] - acc_a[prefix])
        for prefix in report_a.prefixes()
    }
    macro = 100.0 * (report_b.macro_accuracy - report_a.macro_accuracy)
    return SystemDelta(
        prefixes=report_a.prefixes(), bucket_deltas=deltas, macro_delta=macro
    )
