"""Near-duplicate removal with two scalability heuristics.

Scoring every sentence against every other grows quadratically, so candidate
pairs come from (1) a sliding window over the alphabetically sorted corpus
and (2) buckets of sentences sharing one of the most frequent word
four-grams. Candidates are scored with the indel similarity and the later-id
member of any pair scoring strictly above the threshold is dropped.

Removal is sound by construction (every removal carries a re-checkable
witness); completeness matches the brute-force all-pairs oracle whenever
duplicates either sort within the window or share a top four-gram.

For bitext the similarity is computed on the source (English) side and the
whole pair is removed.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

from corpusforge.core import CorpusError, MonolingualCorpus, ParallelCorpus
from corpusforge.similarity import similarity, similarity_upper_bound
from corpusforge.tokens import word_ngrams

Entry = tuple[int, str]
Corpus = Union[ParallelCorpus, MonolingualCorpus, Sequence[Entry]]


@dataclass(frozen=True)
class DedupPlan:
    """Thresholds and heuristic sizes; defaults follow the cleaning recipe."""

    threshold: float = 60.0
    window: int = 50
    top_ngrams: int = 100_000
    ngram_order: int = 4
    bucket_cap: int = 10_000

    def __post_init__(self) -> None:
        if not 0 < self.threshold <= 100:
            raise CorpusError("threshold must be in (0,100]")
        if self.window < 1:
            raise CorpusError("window must be >= 1")
        if self.top_ngrams < 1:
            raise CorpusError("top_ngrams must be >= 1")
        if self.ngram_order < 1:
            raise CorpusError("ngram_order must be >= 1")
        if self.bucket_cap < 2:
            raise CorpusError("bucket_cap must be >= 2")


@dataclass(frozen=True)
class Removal:
    """Witness for one removed sentence: the kept twin and their score."""

    kept_id: int
    score: float
    heuristic: str


@dataclass
class DedupReport:
    input_size: int = 0
    output_size: int = 0
    removals: dict[int, Removal] = field(default_factory=dict)
    comparisons: int = 0
    bucket_count: int = 0
    largest_bucket: int = 0
    capped_buckets: list[str] = field(default_factory=list)

    def removed_ids(self) -> list[int]:
        return sorted(self.removals)

    def check_witnesses(self, threshold: float) -> None:
        for removed, w in self.removals.items():
            if not w.score > threshold:
                raise CorpusError(
                    f"removal {removed} witness score {w.score} <= {threshold}"
                )

    def to_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "comparisons": self.comparisons,
            "bucket_count": self.bucket_count,
            "largest_bucket": self.largest_bucket,
            "capped_buckets": list(self.capped_buckets),
            "removals": {
                str(rid): {
                    "kept_id": w.kept_id,
                    "score": w.score,
                    "heuristic": w.heuristic,
                }
                for rid, w in sorted(self.removals.items())
            },
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")


def _entries(corpus: Corpus) -> list[Entry]:
    if isinstance(corpus, ParallelCorpus):
        return [(p.id, p.source.text) for p in corpus]
    if isinstance(corpus, MonolingualCorpus):
        return [(s.id, s.text) for s in corpus]
    return [(int(i), str(t)) for i, t in corpus]


def _window_pairs(entries: list[Entry], plan: DedupPlan) -> list[tuple[int, int]]:
    """Candidate entry-index pairs from the sorted-window heuristic."""
    order = sorted(range(len(entries)), key=lambda k: (entries[k][1], entries[k][0]))
    pairs: list[tuple[int, int]] = []
    for pos, k in enumerate(order):
        for prev in order[max(0, pos - plan.window) : pos]:
            pairs.append((prev, k))
    return pairs


def _bucket_pairs(
    entries: list[Entry], plan: DedupPlan, report: DedupReport | None = None
) -> list[tuple[int, int]]:
    """Candidate entry-index pairs from top-four-gram buckets."""
    freq: Counter = Counter()
    membership: dict[tuple[str, ...], list[int]] = defaultdict(list)
    for k, (_sid, text) in enumerate(entries):
        grams = list(word_ngrams(text.casefold().split(), plan.ngram_order))
        freq.update(grams)
        for gram in set(grams):
            membership[gram].append(k)
    top = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[: plan.top_ngrams]
    if report is not None:
        report.bucket_count = len(top)
        report.largest_bucket = max((len(membership[g]) for g, _ in top), default=0)
    pairs: list[tuple[int, int]] = []
    for gram, _count in top:
        members = sorted(membership[gram], key=lambda k: entries[k][0])
        if len(members) > plan.bucket_cap:
            if report is not None:
                report.capped_buckets.append(" ".join(gram))
            members = members[: plan.bucket_cap]
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                pairs.append((members[x], members[y]))
    return pairs


def _score_many(
    entries: list[Entry],
    candidates: list[tuple[int, int, str]],
    plan: DedupPlan,
    threads: int,
) -> list[float]:
    """Similarity for each candidate, -1.0 where lengths rule the pair out.

    Chunks are merged in submission order, so the result is identical for
    every thread count.
    """

    def score_chunk(chunk: list[tuple[int, int, str]]) -> list[float]:
        out = []
        for lo, hi, _label in chunk:
            a, b = entries[lo][1], entries[hi][1]
            if similarity_upper_bound(len(a), len(b)) <= plan.threshold:
                out.append(-1.0)
            else:
                out.append(similarity(a, b))
        return out

    if threads <= 1 or len(candidates) < 256:
        return score_chunk(candidates)
    size = max(128, -(-len(candidates) // (threads * 4)))
    chunks = [candidates[i : i + size] for i in range(0, len(candidates), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        scored = list(pool.map(score_chunk, chunks))
    return [s for chunk in scored for s in chunk]


def _find_removals(
    entries: list[Entry],
    plan: DedupPlan,
    heuristics: tuple[str, ...],
    threads: int = 1,
    report: DedupReport | None = None,
) -> dict[int, Removal]:
    seen: set[tuple[int, int]] = set()
    candidates: list[tuple[int, int, str]] = []

    def add(i: int, j: int, label: str) -> None:
        a, b = entries[i][0], entries[j][0]
        if a == b:
            return
        lo, hi = (i, j) if a < b else (j, i)
        key = (entries[lo][0], entries[hi][0])
        if key in seen:
            return
        seen.add(key)
        candidates.append((lo, hi, label))

    if "window" in heuristics:
        for i, j in _window_pairs(entries, plan):
            add(i, j, "window")
    if "ngram" in heuristics:
        for i, j in _bucket_pairs(entries, plan, report):
            add(i, j, "ngram")

    scores = _score_many(entries, candidates, plan, threads)
    removals: dict[int, Removal] = {}
    for (lo, hi, label), score in zip(candidates, scores):
        if score > plan.threshold:
            hi_id = entries[hi][0]
            if hi_id not in removals:
                removals[hi_id] = Removal(entries[lo][0], score, label)
    if report is not None:
        report.comparisons = len(candidates)
    return removals


def dedup_window(corpus: Corpus, plan: DedupPlan = DedupPlan()) -> dict[int, Removal]:
    """Removal set from the sorted-window heuristic alone."""
    return _find_removals(_entries(corpus), plan, ("window",))


def dedup_ngram_buckets(
    corpus: Corpus, plan: DedupPlan = DedupPlan()
) -> dict[int, Removal]:
    """Removal set from the four-gram bucket heuristic alone."""
    return _find_removals(_entries(corpus), plan, ("ngram",))


def dedup(
    corpus: Corpus, plan: DedupPlan = DedupPlan(), threads: int = 1
) -> tuple[Corpus, DedupReport]:
    """Apply both heuristics and drop flagged sentences (or whole pairs)."""
    entries = _entries(corpus)
    report = DedupReport(input_size=len(entries))
    removals = _find_removals(entries, plan, ("window", "ngram"), threads, report)
    report.removals = removals
    report.check_witnesses(plan.threshold)
    keep = [sid for sid, _ in entries if sid not in removals]
    report.output_size = len(keep)
    if isinstance(corpus, (ParallelCorpus, MonolingualCorpus)):
        return corpus.subset(keep), report
    keep_set = set(keep)
    return [e for e in entries if e[0] in keep_set], report
