"""Leakage-safe train/valid/test construction and leakage auditing.

Held-out sets are the sentences whose word four-grams recur least elsewhere
in the corpus, so near-copies of training material cannot end up in
valid/test. The audit re-checks a finished split with the same similarity
score used for deduplication.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from corpusforge.core import CorpusError, ParallelCorpus, Seed
from corpusforge.dedup import DedupPlan, _bucket_pairs, _window_pairs
from corpusforge.similarity import similarity, similarity_upper_bound
from corpusforge.tokens import distinct_word_ngrams


@dataclass(frozen=True)
class SplitSpec:
    """Held-out sizes and assignment policy.

    Selection is fully deterministic (sort by overlap score, ties by id);
    ``seed`` is carried for manifest uniformity but never consumed.
    """

    valid_size: int = 3000
    test_size: int = 3000
    assignment: Literal["alternating", "contiguous"] = "alternating"
    seed: Seed = Seed(0)
    statistic: Literal["fraction", "count"] = "fraction"

    def __post_init__(self) -> None:
        if self.valid_size < 0 or self.test_size < 0:
            raise CorpusError("split sizes must be non-negative")
        if self.assignment not in ("alternating", "contiguous"):
            raise CorpusError(f"unknown assignment {self.assignment!r}")
        if self.statistic not in ("fraction", "count"):
            raise CorpusError(f"unknown overlap statistic {self.statistic!r}")


def overlap_scores(
    corpus: ParallelCorpus, order: int = 4, statistic: str = "fraction"
) -> list[tuple[int, float]]:
    """Per-pair four-gram overlap with the rest of the corpus (English side).

    fraction: share of the sentence's distinct four-grams that occur in at
    least one other sentence; 0.0 when the sentence has no four-grams.
    count: the raw number of such repeated four-grams.
    """
    grams_by_id: dict[int, set] = {}
    doc_freq: dict = defaultdict(int)
    for pair in corpus:
        grams = distinct_word_ngrams(pair.source.text.casefold().split(), order)
        grams_by_id[pair.id] = grams
        for gram in grams:
            doc_freq[gram] += 1
    scores: list[tuple[int, float]] = []
    for pair in corpus:
        grams = grams_by_id[pair.id]
        repeated = sum(1 for g in grams if doc_freq[g] > 1)
        if statistic == "count":
            scores.append((pair.id, float(repeated)))
        else:
            scores.append((pair.id, repeated / len(grams) if grams else 0.0))
    return scores


@dataclass(frozen=True)
class SplitResult:
    train: ParallelCorpus
    valid: ParallelCorpus
    test: ParallelCorpus

    def ids(self) -> dict[str, list[int]]:
        return {
            "train": [p.id for p in self.train],
            "valid": [p.id for p in self.valid],
            "test": [p.id for p in self.test],
        }

    def write_manifest(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.ids(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def make_split(corpus: ParallelCorpus, spec: SplitSpec = SplitSpec()) -> SplitResult:
    """Partition a corpus into train/valid/test by least four-gram overlap.

    The ``valid_size + test_size`` lowest-overlap pairs form the held-out
    pool; alternating assignment puts even ranks in valid and odd ranks in
    test, contiguous assignment fills valid first. Splits keep original id
    order.
    """
    heldout_size = spec.valid_size + spec.test_size
    if heldout_size > len(corpus):
        raise CorpusError(
            f"corpus too small: need {spec.valid_size}+{spec.test_size} pairs, "
            f"have {len(corpus)}"
        )
    ranked = sorted(overlap_scores(corpus, statistic=spec.statistic), key=lambda s: (s[1], s[0]))
    pool = [pid for pid, _ in ranked[:heldout_size]]
    valid_ids: list[int] = []
    test_ids: list[int] = []
    if spec.assignment == "alternating":
        # even ranks to valid, odd to test, spilling over once a side is full
        for rank, pid in enumerate(pool):
            if rank % 2 == 0:
                (valid_ids if len(valid_ids) < spec.valid_size else test_ids).append(pid)
            else:
                (test_ids if len(test_ids) < spec.test_size else valid_ids).append(pid)
    else:
        valid_ids = pool[: spec.valid_size]
        test_ids = pool[spec.valid_size :]
    heldout = set(pool)
    train_ids = [p.id for p in corpus if p.id not in heldout]
    return SplitResult(
        train=corpus.subset(train_ids),
        valid=corpus.subset(valid_ids),
        test=corpus.subset(test_ids),
    )


@dataclass
class LeakageReport:
    """How many held-out sentences have a near-copy in train."""

    heldout_name: str
    train_size: int
    heldout_size: int
    threshold: float
    leaked: int = 0
    max_score: float = 0.0
    max_pair: tuple[int, int] | None = None  # (heldout id, train id)
    witnesses: list[tuple[int, int, float]] = field(default_factory=list)
    comparisons: int = 0

    def to_dict(self) -> dict:
        return {
            "heldout_name": self.heldout_name,
            "train_size": self.train_size,
            "heldout_size": self.heldout_size,
            "threshold": self.threshold,
            "leaked": self.leaked,
            "max_score": self.max_score,
            "max_pair": list(self.max_pair) if self.max_pair else None,
            "witnesses": [list(w) for w in self.witnesses],
            "comparisons": self.comparisons,
        }


def _english_entries(corpus: ParallelCorpus) -> list[tuple[int, str]]:
    return [(p.id, p.source.text) for p in corpus]


def audit_leakage(
    train: ParallelCorpus,
    heldout: ParallelCorpus,
    threshold: float = 60.0,
    heldout_name: str = "heldout",
    plan: DedupPlan | None = None,
    exhaustive: bool = False,
) -> LeakageReport:
    """Score held-out sentences against train and count near-duplicates.

    Candidate train sentences come from the dedup heuristics (sorted window
    and shared four-gram buckets over the combined corpus); ``exhaustive``
    scores all cross pairs instead, for small corpora or verification.
    """
    if (train.src_lang, train.tgt_lang) != (heldout.src_lang, heldout.tgt_lang):
        raise CorpusError("train and heldout must share the language pair")
    plan = plan or DedupPlan(threshold=threshold)
    train_entries = _english_entries(train)
    heldout_entries = _english_entries(heldout)
    report = LeakageReport(
        heldout_name=heldout_name,
        train_size=len(train_entries),
        heldout_size=len(heldout_entries),
        threshold=threshold,
    )

    # combined entry list; positions < len(train) are train sentences
    combined = [(k, text) for k, (_sid, text) in enumerate(train_entries)]
    combined += [
        (len(train_entries) + k, text) for k, (_sid, text) in enumerate(heldout_entries)
    ]
    boundary = len(train_entries)

    if exhaustive:
        cross = [
            (i, boundary + j)
            for j in range(len(heldout_entries))
            for i in range(boundary)
        ]
    else:
        seen: set[tuple[int, int]] = set()
        cross = []
        for i, j in _window_pairs(combined, plan) + _bucket_pairs(combined, plan):
            lo, hi = min(i, j), max(i, j)
            if lo < boundary <= hi and (lo, hi) not in seen:
                seen.add((lo, hi))
                cross.append((lo, hi))

    best: dict[int, tuple[float, int]] = {}
    for i, j in cross:
        report.comparisons += 1
        train_id, train_text = train_entries[i]
        held_id, held_text = heldout_entries[j - boundary]
        if similarity_upper_bound(len(train_text), len(held_text)) <= threshold:
            continue
        score = similarity(train_text, held_text)
        prev = best.get(held_id)
        if prev is None or score > prev[0]:
            best[held_id] = (score, train_id)

    for held_id in sorted(best):
        score, train_id = best[held_id]
        if score > report.max_score:
            report.max_score = score
            report.max_pair = (held_id, train_id)
        if score > threshold:
            report.leaked += 1
            report.witnesses.append((held_id, train_id, score))
    return report
