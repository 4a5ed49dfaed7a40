"""Canonical data model, file I/O, language registry, deterministic RNG.

All downstream stages consume these types; nothing else re-reads raw files.
Text is NFC-normalized at ingestion and corpora are immutable after
construction, so n-gram and edit-distance comparisons are well-defined and
corpora can be shared freely across threads.
"""

from __future__ import annotations

import hashlib
import json
import random
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator


class CorpusError(Exception):
    """Base class for corpus construction and I/O failures."""


class CorpusFormatError(CorpusError):
    """Raised for malformed input files; message carries path and line."""


# Benchmark languages plus the extra pretraining languages; extendable at
# runtime for other corpora.
DEFAULT_LANGUAGES = frozenset(
    {"en", "af", "bem", "ln", "run", "st", "sw", "xh", "zu", "fr", "nl"}
)

_registry: set[str] = set(DEFAULT_LANGUAGES)

ORIGINS = ("gold", "pseudo", "code_switched")


def register_language(code: str) -> str:
    """Add ``code`` to the language registry and return it."""
    code = check_language(code, registered=False)
    _registry.add(code)
    return code


def check_language(code: str, registered: bool = True) -> str:
    """Validate an ISO-639-style language code."""
    if not code or code.lower() != code or not code.isascii() or not code.isalpha():
        raise CorpusError(f"invalid language code: {code!r}")
    if registered and code not in _registry:
        raise CorpusError(
            f"unknown language code {code!r}; register it with register_language()"
        )
    return code


@dataclass(frozen=True)
class Seed:
    """Root seed; any fixed value yields byte-identical pipeline outputs."""

    value: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.value < 2**64:
            raise CorpusError(f"seed must be a 64-bit unsigned integer, got {self.value}")

    def rng(self, *scope: object) -> random.Random:
        """Child RNG for a named scope, stable across platforms and runs.

        Scopes keep randomness independent per use site (e.g. one stream per
        sentence id), so results do not depend on processing order.
        """
        material = ":".join(["corpusforge", str(self.value), *map(str, scope)])
        digest = hashlib.sha256(material.encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))


@dataclass(frozen=True)
class Sentence:
    """One sentence with a stable id. Text is NFC, single line."""

    id: int
    text: str
    lang: str

    def __post_init__(self) -> None:
        if self.id < 0:
            raise CorpusError(f"sentence id must be non-negative, got {self.id}")
        if "\n" in self.text or "\r" in self.text:
            raise CorpusError(f"sentence {self.id} contains a line break")
        object.__setattr__(self, "text", unicodedata.normalize("NFC", self.text))
        check_language(self.lang)


@dataclass(frozen=True)
class SentencePair:
    """Aligned source/target sentences with a provenance tag.

    Empty sides are representable: they arrive in raw bitext and it is the
    filter stage's job to remove them, not the constructor's.
    """

    id: int
    source: Sentence
    target: Sentence
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.source.lang == self.target.lang:
            raise CorpusError(
                f"pair {self.id}: source and target share language {self.source.lang!r}"
            )


@dataclass(frozen=True)
class ParallelCorpus:
    """Ordered sentence pairs sharing one language direction."""

    pairs: tuple[SentencePair, ...]
    src_lang: str
    tgt_lang: str

    def __post_init__(self) -> None:
        check_language(self.src_lang)
        check_language(self.tgt_lang)
        last = -1
        for pair in self.pairs:
            if pair.source.lang != self.src_lang or pair.target.lang != self.tgt_lang:
                raise CorpusError(
                    f"pair {pair.id} has languages "
                    f"{pair.source.lang}-{pair.target.lang}, corpus is "
                    f"{self.src_lang}-{self.tgt_lang}"
                )
            if pair.id <= last:
                raise CorpusError(f"pair ids not strictly increasing at id {pair.id}")
            last = pair.id

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def subset(self, ids: Iterable[int]) -> "ParallelCorpus":
        """Corpus restricted to ``ids``, original order preserved."""
        keep = set(ids)
        return ParallelCorpus(
            tuple(p for p in self.pairs if p.id in keep), self.src_lang, self.tgt_lang
        )


@dataclass(frozen=True)
class MonolingualCorpus:
    """Ordered sentences in one language with per-sentence origin markers.

    ``origin`` is the corpus-level marker; for corpora merged from gold and
    pseudo data it reads "mixed" and ``origins`` carries the per-sentence
    tags, which the JSONL format round-trips.
    """

    sentences: tuple[Sentence, ...]
    lang: str
    origin: str = "gold"
    origins: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        check_language(self.lang)
        if not self.origins:
            object.__setattr__(self, "origins", (self.origin,) * len(self.sentences))
        if len(self.origins) != len(self.sentences):
            raise CorpusError("origins and sentences differ in length")
        for tag in self.origins:
            if tag not in ORIGINS:
                raise CorpusError(f"unknown origin marker {tag!r}")
        distinct = set(self.origins)
        expected = distinct.pop() if len(distinct) == 1 else "mixed"
        if self.sentences and self.origin != expected:
            raise CorpusError(
                f"corpus origin {self.origin!r} does not match sentence tags ({expected})"
            )
        seen: set[int] = set()
        for sent in self.sentences:
            if sent.lang != self.lang:
                raise CorpusError(
                    f"sentence {sent.id} has language {sent.lang}, corpus is {self.lang}"
                )
            if sent.id in seen:
                raise CorpusError(f"duplicate sentence id {sent.id}")
            seen.add(sent.id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def origin_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for tag in self.origins:
            counts[tag] = counts.get(tag, 0) + 1
        return counts

    def subset(self, ids: Iterable[int]) -> "MonolingualCorpus":
        """Corpus restricted to ``ids``, original order and tags preserved."""
        keep = set(ids)
        kept = [
            (s, tag) for s, tag in zip(self.sentences, self.origins) if s.id in keep
        ]
        tags = tuple(tag for _, tag in kept)
        distinct = set(tags)
        origin = distinct.pop() if len(distinct) == 1 else self.origin
        return MonolingualCorpus(tuple(s for s, _ in kept), self.lang, origin, tags)


def _read_lines(path: Path) -> list[str]:
    """Decode a one-sentence-per-line file, tolerant of CRLF endings."""
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorpusFormatError(f"{path}: {exc}") from exc
    lines: list[str] = []
    for lineno, chunk in enumerate(raw.split(b"\n"), start=1):
        try:
            text = chunk.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusFormatError(f"{path}:{lineno}: invalid UTF-8 ({exc})") from exc
        lines.append(text.rstrip("\r"))
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline, not an empty sentence
    return lines


def read_corpus(path: str | Path, lang: str, origin: str = "gold") -> MonolingualCorpus:
    """Read a plain-text corpus; ids are assigned 0..n-1 in file order."""
    lines = _read_lines(Path(path))
    sentences = tuple(Sentence(i, text, lang) for i, text in enumerate(lines))
    return MonolingualCorpus(sentences, lang, origin)


def read_bitext(
    src_path: str | Path,
    tgt_path: str | Path,
    src_lang: str,
    tgt_lang: str,
    provenance: str = "",
) -> ParallelCorpus:
    """Read parallel files; pair i joins line i of each file."""
    src_lines = _read_lines(Path(src_path))
    tgt_lines = _read_lines(Path(tgt_path))
    if len(src_lines) != len(tgt_lines):
        raise CorpusFormatError(
            f"line count mismatch {len(src_lines)} vs {len(tgt_lines)} "
            f"({src_path} vs {tgt_path})"
        )
    pairs = tuple(
        SentencePair(
            i,
            Sentence(i, src, src_lang),
            Sentence(i, tgt, tgt_lang),
            provenance,
        )
        for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines))
    )
    return ParallelCorpus(pairs, src_lang, tgt_lang)


def _write_lines(lines: Iterable[str], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def write_corpus(corpus: MonolingualCorpus, path: str | Path) -> None:
    """Write one sentence per line, LF endings, UTF-8; deterministic bytes."""
    _write_lines((s.text for s in corpus), Path(path))


def write_bitext(corpus: ParallelCorpus, src_path: str | Path, tgt_path: str | Path) -> None:
    """Write the two sides of a parallel corpus as aligned text files."""
    _write_lines((p.source.text for p in corpus), Path(src_path))
    _write_lines((p.target.text for p in corpus), Path(tgt_path))


def write_corpus_jsonl(corpus: MonolingualCorpus, path: str | Path) -> None:
    """Archival JSONL with per-sentence origin tags."""
    records = (
        json.dumps(
            {"id": s.id, "text": s.text, "lang": s.lang, "origin": tag},
            ensure_ascii=False,
        )
        for s, tag in zip(corpus.sentences, corpus.origins)
    )
    _write_lines(records, Path(path))


def read_corpus_jsonl(path: str | Path) -> MonolingualCorpus:
    """Read a corpus written by :func:`write_corpus_jsonl`."""
    sentences: list[Sentence] = []
    origins: list[str] = []
    lang: str | None = None
    for lineno, line in enumerate(_read_lines(Path(path)), start=1):
        if not line:
            continue
        try:
            record = json.loads(line)
            sentences.append(Sentence(record["id"], record["text"], record["lang"]))
            origins.append(record["origin"])
        except (KeyError, ValueError) as exc:
            raise CorpusFormatError(f"{path}:{lineno}: bad record ({exc})") from exc
        lang = record["lang"]
        if lang != sentences[0].lang:
            raise CorpusFormatError(f"{path}:{lineno}: mixed languages in corpus")
    if lang is None:
        raise CorpusFormatError(f"{path}: empty JSONL corpus has no language")
    distinct = set(origins)
    origin = distinct.pop() if len(distinct) == 1 else "mixed"
    return MonolingualCorpus(tuple(sentences), lang, origin, tuple(origins))


def write_bitext_jsonl(corpus: ParallelCorpus, path: str | Path) -> None:
    """Archival JSONL for bitext with provenance tags."""
    records = (
        json.dumps(
            {
                "id": p.id,
                "src_text": p.source.text,
                "tgt_text": p.target.text,
                "src_lang": p.source.lang,
                "tgt_lang": p.target.lang,
                "provenance": p.provenance,
            },
            ensure_ascii=False,
        )
        for p in corpus
    )
    _write_lines(records, Path(path))


def read_bitext_jsonl(path: str | Path) -> ParallelCorpus:
    """Read bitext written by :func:`write_bitext_jsonl`."""
    pairs: list[SentencePair] = []
    for lineno, line in enumerate(_read_lines(Path(path)), start=1):
        if not line:
            continue
        try:
            r = json.loads(line)
            pairs.append(
                SentencePair(
                    r["id"],
                    Sentence(r["id"], r["src_text"], r["src_lang"]),
                    Sentence(r["id"], r["tgt_text"], r["tgt_lang"]),
                    r.get("provenance", ""),
                )
            )
        except (KeyError, ValueError) as exc:
            raise CorpusFormatError(f"{path}:{lineno}: bad record ({exc})") from exc
    if not pairs:
        raise CorpusFormatError(f"{path}: empty JSONL bitext")
    return ParallelCorpus(tuple(pairs), pairs[0].source.lang, pairs[0].target.lang)


def sha256_file(path: str | Path) -> str:
    """Hex digest guarding pipeline file boundaries."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
