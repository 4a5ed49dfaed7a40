"""Detokenized BLEU and chrF, computed compatibly with the standard scorer.

BLEU uses the international tokenizer (punctuation and symbols split from
words by Unicode category, with digit-adjacent punctuation kept attached)
and exponential smoothing for zero n-gram matches. chrF works on character
n-grams of the whitespace-stripped text. Both are corpus-level, pure
functions of their inputs, and emit a signature string pinning every
parameter that affects the score.
"""

from __future__ import annotations

import functools
import math
import re
import sys
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from corpusforge import __version__
from corpusforge.core import CorpusError

BLEU_ORDER = 4
CHRF_ORDER = 6
CHRF_BETA = 2.0

_LOG_ZERO = -9999999999.0


@functools.lru_cache(maxsize=None)
def _category_chars(prefix: str) -> str:
    return "".join(
        chr(cp)
        for cp in range(sys.maxunicode)
        if unicodedata.category(chr(cp)).startswith(prefix)
    )


@functools.lru_cache(maxsize=1)
def _intl_regexes() -> tuple[re.Pattern, re.Pattern, re.Pattern]:
    punct = re.escape(_category_chars("P"))
    symbols = re.escape(_category_chars("S"))
    return (
        re.compile(r"([^\d])([" + punct + r"])"),
        re.compile(r"([" + punct + r"])([^\d])"),
        re.compile(r"([" + symbols + r"])"),
    )


def tokenize_intl(text: str) -> list[str]:
    """International tokenization: split punctuation/symbols from words,
    keeping punctuation between digits (decimal and thousands separators)."""
    nondigit_punct, punct_nondigit, symbol = _intl_regexes()
    text = nondigit_punct.sub(r"\1 \2 ", text)
    text = punct_nondigit.sub(r" \1 \2", text)
    text = symbol.sub(r" \1 ", text)
    return text.split()


def _ngram_counts(tokens: Sequence[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for order in range(1, max_order + 1):
        for i in range(len(tokens) - order + 1):
            counts[tuple(tokens[i : i + order])] += 1
    return counts


@dataclass(frozen=True)
class BleuScore:
    score: float
    precisions: tuple[float, float, float, float]  # fractions in [0, 1]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    signature: str

    def recompute(self) -> float:
        """Score from this object's own fields (the defining identity)."""
        logs = [math.log(p) if p > 0.0 else _LOG_ZERO for p in self.precisions]
        return self.brevity_penalty * math.exp(sum(logs) / BLEU_ORDER) * 100.0

    def __str__(self) -> str:
        return f"BLEU = {self.score:.2f} ({self.signature})"


@dataclass(frozen=True)
class ChrfScore:
    score: float
    order: int
    beta: float
    signature: str

    def __str__(self) -> str:
        return f"chrF{self.beta:g} = {self.score:.2f} ({self.signature})"


def _check_streams(hypotheses: Sequence[str], references: Sequence[str]) -> None:
    if len(hypotheses) != len(references):
        raise CorpusError(
            f"hypothesis/reference length mismatch: {len(hypotheses)} vs "
            f"{len(references)}"
        )
    if not hypotheses:
        raise CorpusError("cannot score an empty corpus")


def bleu(
    hypotheses: Sequence[str],
    references: Sequence[str],
    lowercase: bool = False,
) -> BleuScore:
    """Corpus-level detokenized BLEU with exponential smoothing.

    Modified n-gram precision with clipping per order 1..4; brevity penalty
    min(1, exp(1 - ref_len/hyp_len)); orders with zero matches fall back to
    1 / (2^k * total) with k counting the zero orders so far.
    """
    _check_streams(hypotheses, references)
    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        if lowercase:
            hyp, ref = hyp.lower(), ref.lower()
        hyp_tokens = tokenize_intl(hyp.rstrip())
        ref_tokens = tokenize_intl(ref.rstrip())
        hyp_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        hyp_ngrams = _ngram_counts(hyp_tokens, BLEU_ORDER)
        ref_ngrams = _ngram_counts(ref_tokens, BLEU_ORDER)
        for ngram, count in hyp_ngrams.items():
            order = len(ngram)
            total[order - 1] += count
            correct[order - 1] += min(count, ref_ngrams.get(ngram, 0))

    precisions = [0.0] * BLEU_ORDER
    smoother = 1.0
    for n in range(1, BLEU_ORDER + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smoother *= 2.0
            precisions[n - 1] = 1.0 / (smoother * total[n - 1])
        else:
            precisions[n - 1] = correct[n - 1] / total[n - 1]

    if hyp_len == 0:
        brevity_penalty = 0.0
    elif hyp_len < ref_len:
        brevity_penalty = math.exp(1.0 - ref_len / hyp_len)
    else:
        brevity_penalty = 1.0

    logs = [math.log(p) if p > 0.0 else _LOG_ZERO for p in precisions]
    score = brevity_penalty * math.exp(sum(logs) / BLEU_ORDER) * 100.0
    signature = (
        f"BLEU|nrefs:1|case:{'lc' if lowercase else 'mixed'}|tok:intl|"
        f"smooth:exp|version:corpusforge-{__version__}"
    )
    return BleuScore(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=brevity_penalty,
        hyp_len=hyp_len,
        ref_len=ref_len,
        signature=signature,
    )


def _char_ngrams(text: str, order: int) -> Counter:
    return Counter(text[i : i + order] for i in range(len(text) - order + 1))


def chrf(
    hypotheses: Sequence[str],
    references: Sequence[str],
    order: int = CHRF_ORDER,
    beta: float = CHRF_BETA,
    remove_whitespace: bool = True,
) -> ChrfScore:
    """Corpus-level chrF: character n-gram F-score, orders 1..``order``.

    Per-order precision and recall are aggregated over the corpus and
    averaged arithmetically over the orders present (non-zero hypothesis and
    reference n-gram totals); the F-beta combination weighs recall
    beta^2 times as much as precision.
    """
    _check_streams(hypotheses, references)
    hyp_totals = [0] * order
    ref_totals = [0] * order
    matched = [0] * order
    for hyp, ref in zip(hypotheses, references):
        if remove_whitespace:
            hyp = "".join(hyp.split())
            ref = "".join(ref.split())
        for n in range(1, order + 1):
            hyp_ngrams = _char_ngrams(hyp, n)
            ref_ngrams = _char_ngrams(ref, n)
            hyp_totals[n - 1] += sum(hyp_ngrams.values())
            ref_totals[n - 1] += sum(ref_ngrams.values())
            matched[n - 1] += sum((hyp_ngrams & ref_ngrams).values())

    avg_precision = 0.0
    avg_recall = 0.0
    effective_orders = 0
    for n in range(order):
        if hyp_totals[n] > 0 and ref_totals[n] > 0:
            avg_precision += matched[n] / hyp_totals[n]
            avg_recall += matched[n] / ref_totals[n]
            effective_orders += 1
    if effective_orders:
        avg_precision /= effective_orders
        avg_recall /= effective_orders

    if avg_precision + avg_recall == 0.0:
        fscore = 0.0
    else:
        beta_sq = beta**2
        fscore = (
            (1 + beta_sq)
            * avg_precision
            * avg_recall
            / (beta_sq * avg_precision + avg_recall)
        )
    signature = (
        f"chrF{beta:g}|nrefs:1|case:mixed|nc:{order}|space:"
        f"{str(not remove_whitespace).lower()}|version:corpusforge-{__version__}"
    )
    return ChrfScore(score=100.0 * fscore, order=order, beta=beta, signature=signature)
