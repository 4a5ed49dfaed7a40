"""EM-trained lexical translation model with optional diagonal prior.

One aligner serves both consumers: dictionary extraction (pure lexical
model, diagonal strength 0) and POS label projection (diagonal prior
encouraging monotone alignments). Tokens are casefolded whitespace tokens;
a distinguished NULL source word absorbs target words with no counterpart.

The E-step posterior of target position j aligning to source position i is
proportional to t(e_i, f_j) * prior(i, j); the prior is uniform at strength
0 and proportional to exp(-lambda * |i/m - j/n|) otherwise, with the NULL
word carrying the weight of a half-span offset, exp(-lambda/2).
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from corpusforge.core import CorpusError, ParallelCorpus, Seed, SentencePair

# Uppercase cannot collide with casefolded corpus tokens.
NULL_WORD = "<NULL>"

_PRUNE_THRESHOLD = 1e-12
_CHUNK_SIZE = 512


@dataclass
class LexiconModel:
    """Translation probabilities t(target | source) plus Viterbi decoding."""

    t: dict[str, dict[str, float]]
    src_vocab: frozenset[str]
    tgt_vocab: frozenset[str]
    diagonal_strength: float = 0.0
    em_iterations: int = 0
    log_likelihoods: tuple[float, ...] = ()

    def prob(self, src: str, tgt: str) -> float:
        row = self.t.get(src)
        return row.get(tgt, 0.0) if row else 0.0

    def check_row_sums(self, tol: float = 1e-9) -> None:
        for src, row in self.t.items():
            total = sum(row.values())
            if abs(total - 1.0) > tol:
                raise CorpusError(f"row for {src!r} sums to {total}, not 1")

    def to_tsv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(
                f"#corpusforge-lexicon\tlambda={self.diagonal_strength!r}"
                f"\titerations={self.em_iterations}\n"
            )
            for src in sorted(self.t):
                row = self.t[src]
                for tgt in sorted(row):
                    fh.write(f"{src}\t{tgt}\t{row[tgt]!r}\n")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "LexiconModel":
        t: dict[str, dict[str, float]] = {}
        diagonal = 0.0
        iterations = 0
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    for part in line.split("\t")[1:]:
                        key, _, value = part.partition("=")
                        if key == "lambda":
                            diagonal = float(value)
                        elif key == "iterations":
                            iterations = int(value)
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise CorpusError(f"{path}:{lineno}: expected 3 TSV fields")
                src, tgt, prob = fields
                t.setdefault(src, {})[tgt] = float(prob)
        tgt_vocab = frozenset(tgt for row in t.values() for tgt in row)
        return cls(
            t=t,
            src_vocab=frozenset(t),
            tgt_vocab=tgt_vocab,
            diagonal_strength=diagonal,
            em_iterations=iterations,
        )


@dataclass(frozen=True)
class Alignment:
    """Links (src_index, tgt_index); NULL-aligned target words carry none."""

    links: tuple[tuple[int, int], ...]
    src_len: int
    tgt_len: int

    def __post_init__(self) -> None:
        seen_tgt: set[int] = set()
        for i, j in self.links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise CorpusError(f"link {i}-{j} out of bounds ({self.src_len}x{self.tgt_len})")
            if j in seen_tgt:
                raise CorpusError(f"target index {j} linked twice")
            seen_tgt.add(j)

    def source_of(self, tgt_index: int) -> int | None:
        for i, j in self.links:
            if j == tgt_index:
                return i
        return None

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in self.links)

    @classmethod
    def from_pharaoh(cls, line: str, src_len: int, tgt_len: int) -> "Alignment":
        links = []
        for item in line.split():
            left, _, right = item.partition("-")
            try:
                links.append((int(left), int(right)))
            except ValueError as exc:
                raise CorpusError(f"bad alignment token {item!r}") from exc
        return cls(tuple(links), src_len, tgt_len)


def _prior_weights(m: int, n: int, j: int, lam: float) -> tuple[list[float], float]:
    """Normalized prior over source positions 0..m-1 plus NULL."""
    if lam == 0.0:
        weights = [1.0] * m
        null_weight = 1.0
    else:
        weights = [math.exp(-lam * abs(i / m - j / n)) for i in range(m)]
        null_weight = math.exp(-lam * 0.5)
    z = sum(weights) + null_weight
    return [w / z for w in weights], null_weight / z


def _tokenized(corpus: Iterable[SentencePair]) -> list[tuple[list[str], list[str]]]:
    return [
        (pair.source.text.casefold().split(), pair.target.text.casefold().split())
        for pair in corpus
    ]


def _chunk_expectations(
    chunk: Sequence[tuple[list[str], list[str]]],
    t: dict[str, dict[str, float]] | None,
    uniform: float,
    lam: float,
) -> tuple[dict[tuple[str, str], float], float]:
    """Expected link counts and log-likelihood for a slice of the corpus."""

    counts: dict[tuple[str, str], float] = defaultdict(float)
    ll = 0.0
    for e_toks, f_toks in chunk:
        m, n = len(e_toks), len(f_toks)
        if n == 0:
            continue
        for j, f in enumerate(f_toks):
            weights, null_weight = _prior_weights(m, n, j, lam)
            if t is None:
                terms = [uniform * w for w in weights]
                null_term = uniform * null_weight
            else:
                terms = [
                    t.get(e, {}).get(f, 0.0) * w for e, w in zip(e_toks, weights)
                ]
                null_term = t.get(NULL_WORD, {}).get(f, 0.0) * null_weight
            denom = sum(terms) + null_term
            ll += math.log(denom)
            for e, term in zip(e_toks, terms):
                if term:
                    counts[(e, f)] += term / denom
            if null_term:
                counts[(NULL_WORD, f)] += null_term / denom
    return counts, ll


def train_lexicon(
    corpus: ParallelCorpus,
    iterations: int = 5,
    diagonal_strength: float = 0.0,
    seed: Seed | None = None,
    threads: int = 1,
) -> LexiconModel:
    """EM training of the lexical model.

    Deterministic for any thread count: the corpus is cut into fixed-size
    chunks and expected counts are merged in chunk order. ``seed`` is
    accepted for pipeline uniformity; initialization is uniform, so no
    randomness is consumed. Log-likelihood is recorded each iteration and is
    non-decreasing.
    """
    if len(corpus) == 0:
        raise CorpusError("cannot train a lexicon on an empty corpus")
    if iterations < 1:
        raise CorpusError("iterations must be >= 1")
    data = _tokenized(corpus)
    tgt_vocab = frozenset(tok for _, f in data for tok in f)
    src_vocab = frozenset(tok for e, _ in data for tok in e) | {NULL_WORD}
    if not tgt_vocab:
        raise CorpusError("corpus has no target tokens")
    uniform = 1.0 / len(tgt_vocab)

    chunks = [data[i : i + _CHUNK_SIZE] for i in range(0, len(data), _CHUNK_SIZE)]
    t: dict[str, dict[str, float]] | None = None
    history: list[float] = []
    for _ in range(iterations):
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(
                    pool.map(
                        lambda c: _chunk_expectations(c, t, uniform, diagonal_strength),
                        chunks,
                    )
                )
        else:
            results = [
                _chunk_expectations(c, t, uniform, diagonal_strength) for c in chunks
            ]
        counts: dict[tuple[str, str], float] = defaultdict(float)
        ll = 0.0
        for chunk_counts, chunk_ll in results:
            ll += chunk_ll
            for key, value in chunk_counts.items():
                counts[key] += value
        history.append(ll)

        totals: dict[str, float] = defaultdict(float)
        for (src, _tgt), value in counts.items():
            totals[src] += value
        t = {}
        for (src, tgt), value in counts.items():
            t.setdefault(src, {})[tgt] = value / totals[src]

    assert t is not None
    _prune_and_renormalize(t)
    return LexiconModel(
        t=t,
        src_vocab=src_vocab,
        tgt_vocab=tgt_vocab,
        diagonal_strength=diagonal_strength,
        em_iterations=iterations,
        log_likelihoods=tuple(history),
    )


def _prune_and_renormalize(t: dict[str, dict[str, float]]) -> None:
    """Drop negligible entries, keeping every row a distribution."""
    for src, row in t.items():
        kept = {tgt: p for tgt, p in row.items() if p >= _PRUNE_THRESHOLD}
        if not kept:  # keep the single largest entry rather than an empty row
            best = max(row, key=lambda tgt: (row[tgt], tgt))
            kept = {best: row[best]}
        total = sum(kept.values())
        t[src] = {tgt: p / total for tgt, p in kept.items()}


def viterbi_align(model: LexiconModel, pair: SentencePair) -> Alignment:
    """Link each target word to its argmax source position, or to NULL.

    NULL wins ties, so target words unseen in training stay unlinked; ties
    between source positions go to the smaller index.
    """
    e_toks = pair.source.text.casefold().split()
    f_toks = pair.target.text.casefold().split()
    m, n = len(e_toks), len(f_toks)
    links: list[tuple[int, int]] = []
    for j, f in enumerate(f_toks):
        weights, null_weight = _prior_weights(m, n, j, model.diagonal_strength)
        best_score = model.prob(NULL_WORD, f) * null_weight
        best_i = -1
        for i, e in enumerate(e_toks):
            score = model.prob(e, f) * weights[i]
            if score > best_score:
                best_score = score
                best_i = i
        if best_i >= 0:
            links.append((best_i, j))
    return Alignment(tuple(links), m, n)


def align_corpus(model: LexiconModel, corpus: ParallelCorpus) -> list[Alignment]:
    return [viterbi_align(model, pair) for pair in corpus]


def write_alignments(alignments: Iterable[Alignment], path: str | Path) -> None:
    """One 'i-j i-j ...' line per sentence pair."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for alignment in alignments:
            fh.write(alignment.to_pharaoh())
            fh.write("\n")
