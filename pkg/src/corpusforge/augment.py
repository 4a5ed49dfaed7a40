"""Data augmentation: bilingual dictionaries, code-switching, corpus mixing.

The dictionary is read off Viterbi alignments (link types seen more than a
count threshold). Code-switching replaces a share of dictionary-matching
tokens in high-resource sentences with their translations. Mixtures
re-sample languages with exponentially smoothed probabilities so
low-resource corpora are seen more often than their size alone would allow.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from corpusforge.align import LexiconModel, viterbi_align
from corpusforge.core import (
    CorpusError,
    MonolingualCorpus,
    ParallelCorpus,
    Seed,
    Sentence,
    sha256_file,
)
from corpusforge.tokens import has_letter


@dataclass(frozen=True)
class BilingualDictionary:
    """High-resource term -> low-resource terms with alignment counts."""

    entries: Mapping[str, Mapping[str, int]]
    hrl_lang: str
    lrl_lang: str

    @property
    def size(self) -> int:
        """Number of (HRL term, LRL term) pairs."""
        return sum(len(translations) for translations in self.entries.values())

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def translations(self, term: str) -> list[str]:
        """LRL terms for an HRL term, in stable (sorted) order."""
        return sorted(self.entries.get(term, {}))

    def to_tsv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"#corpusforge-dictionary\thrl={self.hrl_lang}\tlrl={self.lrl_lang}\n")
            for hrl in sorted(self.entries):
                for lrl in sorted(self.entries[hrl]):
                    fh.write(f"{hrl}\t{lrl}\t{self.entries[hrl][lrl]}\n")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "BilingualDictionary":
        entries: dict[str, dict[str, int]] = {}
        hrl_lang = lrl_lang = ""
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    for part in line.split("\t")[1:]:
                        key, _, value = part.partition("=")
                        if key == "hrl":
                            hrl_lang = value
                        elif key == "lrl":
                            lrl_lang = value
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise CorpusError(f"{path}:{lineno}: expected 3 TSV fields")
                hrl, lrl, count = fields
                entries.setdefault(hrl, {})[lrl] = int(count)
        return cls(entries=entries, hrl_lang=hrl_lang, lrl_lang=lrl_lang)


def extract_dictionary(
    model: LexiconModel,
    corpus: ParallelCorpus,
    min_count: int = 20,
) -> BilingualDictionary:
    """Count Viterbi link types over the corpus and keep frequent ones.

    An entry survives only with count strictly greater than ``min_count``
    ("over 20 times"). Terms without a single letter (pure numbers,
    punctuation, symbols) are excluded from both sides.
    """
    link_counts: Counter = Counter()
    for pair in corpus:
        src_toks = pair.source.text.casefold().split()
        tgt_toks = pair.target.text.casefold().split()
        alignment = viterbi_align(model, pair)
        for i, j in alignment.links:
            link_counts[(src_toks[i], tgt_toks[j])] += 1
    entries: dict[str, dict[str, int]] = {}
    for (hrl, lrl), count in link_counts.items():
        if count > min_count and has_letter(hrl) and has_letter(lrl):
            entries.setdefault(hrl, {})[lrl] = count
    return BilingualDictionary(
        entries=entries, hrl_lang=corpus.src_lang, lrl_lang=corpus.tgt_lang
    )


@dataclass(frozen=True)
class AugmentSpec:
    replacement_rate: float = 0.30
    seed: Seed = Seed(0)

    def __post_init__(self) -> None:
        if not 0.0 <= self.replacement_rate <= 1.0:
            raise CorpusError("replacement rate must be in [0,1]")


def _replacement_count(rate: float, matches: int) -> int:
    """ceil(rate * matches), with binary-float fuzz cancelled.

    0.30 * 10 evaluates to 3.0000000000000004 in IEEE doubles; rounding the
    product to 9 decimals before the ceiling keeps the advertised exact
    ceiling semantics.
    """
    return math.ceil(round(rate * matches, 9))


def code_switch(
    corpus: MonolingualCorpus,
    dictionary: BilingualDictionary,
    spec: AugmentSpec = AugmentSpec(),
) -> MonolingualCorpus:
    """Replace a share of dictionary-matching tokens with translations.

    Per sentence: the positions whose casefolded token is a dictionary key
    are found, ceil(rate * matches) of them are drawn uniformly at random,
    and each drawn token is swapped for a uniformly random member of its
    translation set. Token counts never change, untouched tokens keep their
    original form, and every random draw flows from (seed, sentence id), so
    output is independent of processing order.
    """
    if corpus.lang != dictionary.hrl_lang:
        raise CorpusError(
            f"corpus language {corpus.lang!r} does not match dictionary "
            f"HRL side {dictionary.hrl_lang!r}"
        )
    out: list[Sentence] = []
    for sentence in corpus:
        tokens = sentence.text.split()
        matches = [i for i, tok in enumerate(tokens) if tok.casefold() in dictionary]
        k = _replacement_count(spec.replacement_rate, len(matches))
        if k == 0:
            out.append(sentence)
            continue
        rng = spec.seed.rng("code-switch", sentence.id)
        chosen = sorted(rng.sample(matches, k))
        for position in chosen:
            options = dictionary.translations(tokens[position].casefold())
            tokens[position] = rng.choice(options)
        out.append(Sentence(sentence.id, " ".join(tokens), sentence.lang))
    return MonolingualCorpus(tuple(out), corpus.lang, "code_switched")


@dataclass(frozen=True)
class SamplingSpec:
    """Per-language sampling weights plus the smoothing exponent.

    ``weights`` are the raw p_k (any positive scale; normalized internally).
    When mixing dictionary-augmented corpora, keep the weights proportional
    to the original, pre-augmentation data sizes.
    """

    weights: Mapping[str, float]
    alpha: float = 0.25
    epoch_size: int = 0
    seed: Seed = Seed(0)

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise CorpusError("alpha must be > 0")
        if any(w < 0 for w in self.weights.values()):
            raise CorpusError("language weights must be non-negative")
        if not self.weights or not any(self.weights.values()):
            raise CorpusError("at least one language weight must be positive")
        if self.epoch_size < 0:
            raise CorpusError("epoch_size must be non-negative")


def exp_sample_weights(spec: SamplingSpec) -> dict[str, float]:
    """q_k = p_k^alpha / sum_j p_j^alpha over the normalized weights."""
    total = sum(spec.weights.values())
    powered = {lang: (w / total) ** spec.alpha for lang, w in spec.weights.items()}
    z = sum(powered.values())
    return {lang: value / z for lang, value in powered.items()}


@dataclass(frozen=True)
class MixtureItem:
    text: str
    lang: str
    origin: str


def build_mixture(
    corpora: Sequence[MonolingualCorpus],
    spec: SamplingSpec,
) -> list[MixtureItem]:
    """Draw an epoch of sentences with exponentially smoothed language choice.

    Within a language, sentences are visited in seeded shuffled order and
    reshuffled on exhaustion, so heavily oversampled low-resource corpora
    recycle rather than run dry.
    """
    if not corpora:
        raise CorpusError("mixture needs at least one corpus")
    by_lang: dict[str, MonolingualCorpus] = {}
    for corpus in corpora:
        if len(corpus) == 0:
            raise CorpusError(f"corpus for {corpus.lang!r} is empty")
        if corpus.lang in by_lang:
            raise CorpusError(f"duplicate corpus for language {corpus.lang!r}")
        by_lang[corpus.lang] = corpus
    missing = set(spec.weights) - set(by_lang)
    if missing:
        raise CorpusError(f"weights name languages with no corpus: {sorted(missing)}")

    q = exp_sample_weights(spec)
    langs = sorted(q)
    cumulative: list[tuple[float, str]] = []
    acc = 0.0
    for lang in langs:
        acc += q[lang]
        cumulative.append((acc, lang))

    choice_rng = spec.seed.rng("mixture", "language-choice")
    shufflers = {lang: spec.seed.rng("mixture", "order", lang) for lang in langs}
    orders = {lang: list(range(len(by_lang[lang]))) for lang in langs}
    for lang in langs:
        shufflers[lang].shuffle(orders[lang])
    cursors = {lang: 0 for lang in langs}

    stream: list[MixtureItem] = []
    for _ in range(spec.epoch_size):
        u = choice_rng.random()
        lang = langs[-1]
        for bound, candidate in cumulative:
            if u < bound:
                lang = candidate
                break
        corpus = by_lang[lang]
        if cursors[lang] == len(orders[lang]):
            shufflers[lang].shuffle(orders[lang])
            cursors[lang] = 0
        index = orders[lang][cursors[lang]]
        cursors[lang] += 1
        stream.append(
            MixtureItem(
                text=corpus.sentences[index].text,
                lang=lang,
                origin=corpus.origins[index],
            )
        )
    return stream


def write_mixture_jsonl(stream: Iterable[MixtureItem], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for item in stream:
            fh.write(
                json.dumps(
                    {"text": item.text, "lang": item.lang, "origin": item.origin},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def merge_pseudo(
    gold: MonolingualCorpus, translated: MonolingualCorpus
) -> MonolingualCorpus:
    """Concatenate gold data with machine-translated pseudo data.

    The translated corpus is produced by an external MT system and ingested
    as a file; this only joins the two, re-numbering ids while preserving
    per-sentence origin tags.
    """
    if gold.lang != translated.lang:
        raise CorpusError(
            f"language mismatch: gold is {gold.lang!r}, translated is "
            f"{translated.lang!r}"
        )
    if any(tag != "pseudo" for tag in translated.origins):
        raise CorpusError("translated corpus must carry origin=pseudo")
    sentences: list[Sentence] = []
    origins: list[str] = []
    next_id = 0
    for corpus in (gold, translated):
        for sentence, tag in zip(corpus.sentences, corpus.origins):
            sentences.append(Sentence(next_id, sentence.text, corpus.lang))
            origins.append(tag)
            next_id += 1
    distinct = set(origins)
    origin = distinct.pop() if len(distinct) == 1 else "mixed"
    return MonolingualCorpus(tuple(sentences), gold.lang, origin, tuple(origins))


@dataclass(frozen=True)
class IterationStep:
    name: str
    kind: str  # "internal" | "external"
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    input_hashes: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "input_hashes": dict(self.input_hashes),
        }


def plan_iteration(round_index: int, manifest: Mapping) -> list[IterationStep]:
    """Ordered steps for one pretraining round.

    Round 1 exports the gold-only mixture; later rounds first ingest the
    previous round's externally produced translations (hash-checked when
    the manifest records a digest) and merge them into the pseudo corpus
    before rebuilding the mixture. The neural steps themselves are external
    and appear as placeholders so the cycle is auditable end to end.
    """
    if round_index < 1:
        raise CorpusError("round must be >= 1")
    lrl = manifest.get("lrl", "lrl")
    steps: list[IterationStep] = []
    if round_index > 1:
        rounds = manifest.get("rounds", {})
        info = rounds.get(str(round_index)) or rounds.get(round_index)
        if not info or "translations" not in info:
            raise CorpusError(
                f"round {round_index} needs ingested translations from round "
                f"{round_index - 1}; none recorded in the manifest"
            )
        translations = info["translations"]
        if not Path(translations).exists():
            raise CorpusError(f"missing ingest file for round {round_index}: {translations}")
        digest = sha256_file(translations)
        expected = info.get("sha256")
        if expected and digest != expected:
            raise CorpusError(
                f"ingest hash mismatch for {translations}: expected {expected}, "
                f"got {digest}"
            )
        steps.append(
            IterationStep(
                name="ingest-translations",
                kind="internal",
                inputs=(str(translations),),
                input_hashes={str(translations): digest},
            )
        )
        steps.append(
            IterationStep(
                name="merge-pseudo",
                kind="internal",
                inputs=(str(translations), str(manifest.get("gold", {}).get(lrl, ""))),
                outputs=(f"round{round_index}/merged.{lrl}.jsonl",),
            )
        )
    steps.append(
        IterationStep(
            name="export-mixture",
            kind="internal",
            inputs=tuple(str(p) for p in manifest.get("gold", {}).values()),
            outputs=(f"round{round_index}/mixture.jsonl",),
        )
    )
    steps.extend(
        IterationStep(name=name, kind="external")
        for name in ("pretrain", "finetune", "translate-hrl")
    )
    return steps
