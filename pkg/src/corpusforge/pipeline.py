"""Pipeline manifests, validation, and end-to-end benchmark construction.

A run is fully described by one JSON manifest: inputs, ordered stages with
their parameters, a seed, and optional content hashes guarding externally
produced files. Outputs are byte-reproducible for a fixed manifest across
runs and thread counts; every consumed and produced file's digest lands in
the run report.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from corpusforge import __version__
from corpusforge.align import align_corpus, train_lexicon, write_alignments
from corpusforge.augment import (
    AugmentSpec,
    SamplingSpec,
    build_mixture,
    code_switch,
    extract_dictionary,
    write_mixture_jsonl,
)
from corpusforge.core import (
    CorpusError,
    MonolingualCorpus,
    ParallelCorpus,
    Seed,
    Sentence,
    read_corpus,
    read_bitext,
    sha256_file,
    write_bitext,
)
from corpusforge.dedup import DedupPlan, dedup
from corpusforge.filtering import run_filters
from corpusforge.metrics import bleu, chrf
from corpusforge.nounclass import ingest_tags, nounclass_accuracy, project_tags
from corpusforge.align import Alignment
from corpusforge.split import SplitSpec, SplitResult, audit_leakage, make_split

STAGE_ORDER = (
    "filter",
    "dedup",
    "split",
    "align",
    "extract-dict",
    "augment",
    "sample",
    "evaluate",
    "analyze",
)

# name -> {key: (default, validator, message)}
_RANGES: dict[str, dict[str, tuple[Any, Any, str]]] = {
    "filter": {
        "side": ("source", lambda v: v in ("source", "target", "both"),
                 "side must be source|target|both"),
    },
    "dedup": {
        "threshold": (60.0, lambda v: isinstance(v, (int, float)) and 0 < v <= 100,
                      "threshold must be in (0,100]"),
        "window": (50, lambda v: isinstance(v, int) and v >= 1, "window must be >= 1"),
        "top_ngrams": (100_000, lambda v: isinstance(v, int) and v >= 1,
                       "top_ngrams must be >= 1"),
        "bucket_cap": (10_000, lambda v: isinstance(v, int) and v >= 2,
                       "bucket_cap must be >= 2"),
    },
    "split": {
        "valid_size": (3000, lambda v: isinstance(v, int) and v >= 0,
                       "valid_size must be >= 0"),
        "test_size": (3000, lambda v: isinstance(v, int) and v >= 0,
                      "test_size must be >= 0"),
        "assignment": ("alternating", lambda v: v in ("alternating", "contiguous"),
                       "assignment must be alternating|contiguous"),
        "statistic": ("fraction", lambda v: v in ("fraction", "count"),
                      "statistic must be fraction|count"),
        "audit_threshold": (None, lambda v: v is None or 0 < v <= 100,
                            "audit_threshold must be in (0,100]"),
    },
    "align": {
        "iterations": (5, lambda v: isinstance(v, int) and v >= 1,
                       "iterations must be >= 1"),
        "diagonal_strength": (0.0, lambda v: isinstance(v, (int, float)) and v >= 0,
                              "diagonal_strength must be >= 0"),
    },
    "extract-dict": {
        "min_count": (20, lambda v: isinstance(v, int) and v >= 0,
                      "min_count must be >= 0"),
    },
    "augment": {
        "rate": (0.30, lambda v: isinstance(v, (int, float)) and 0 <= v <= 1,
                 "rate must be in [0,1]"),
        "mono": (None, lambda v: v is None or isinstance(v, str), "mono must be a path"),
    },
    "sample": {
        "alpha": (0.25, lambda v: isinstance(v, (int, float)) and v > 0,
                  "alpha must be > 0"),
        "epoch_size": (1000, lambda v: isinstance(v, int) and v > 0,
                       "epoch_size must be > 0"),
        "weights": (None, lambda v: v is None or isinstance(v, dict),
                    "weights must be a mapping"),
    },
    "evaluate": {
        "hyp": (None, lambda v: isinstance(v, str), "hyp path is required"),
        "ref": (None, lambda v: isinstance(v, str), "ref path is required"),
        "lowercase": (False, lambda v: isinstance(v, bool), "lowercase must be boolean"),
    },
    "analyze": {
        "hyp": (None, lambda v: isinstance(v, str), "hyp path is required"),
        "tags": (None, lambda v: isinstance(v, str), "tags path is required"),
        "alignments": (None, lambda v: isinstance(v, str), "alignments path is required"),
        "prefix_len": (2, lambda v: v in (2, 3), "prefix_len must be 2 or 3"),
        "tag": ("NOUN", lambda v: isinstance(v, str) and v.isupper(),
                "tag must be an uppercase POS label"),
    },
}

_STAGE_FILE_KEYS = {"augment": ("mono",), "evaluate": ("hyp", "ref"),
                    "analyze": ("hyp", "tags", "alignments")}

_TOP_KEYS = {"seed", "threads", "workdir", "inputs", "stages", "hashes"}
_INPUT_KEYS = {"src", "tgt", "src_lang", "tgt_lang", "provenance"}


@dataclass
class StageConfig:
    name: str
    params: dict[str, Any]


@dataclass
class PipelineManifest:
    seed: Seed
    threads: int
    workdir: Path
    inputs: dict[str, str]
    stages: list[StageConfig]
    hashes: dict[str, str]
    base_dir: Path

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def echo(self) -> dict:
        return {
            "seed": self.seed.value,
            "threads": self.threads,
            "workdir": str(self.workdir),
            "inputs": dict(self.inputs),
            "stages": [{"name": s.name, **s.params} for s in self.stages],
            "hashes": dict(self.hashes),
        }


def validate_config(
    source: str | Path | Mapping, base_dir: Path | None = None
) -> tuple[PipelineManifest | None, list[str]]:
    """Validate a manifest, reporting every problem at once.

    Returns (manifest, []) on success or (None, errors); defaults are filled
    for omitted stage parameters.
    """
    errors: list[str] = []
    if isinstance(source, (str, Path)):
        path = Path(source)
        base_dir = base_dir or path.parent
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            return None, [f"cannot read manifest {path}: {exc}"]
    else:
        raw = dict(source)
        base_dir = base_dir or Path.cwd()

    for key in raw:
        if key not in _TOP_KEYS:
            errors.append(f"unknown manifest key {key!r}")

    seed_value = raw.get("seed", 0)
    seed = Seed(0)
    if not isinstance(seed_value, int) or not 0 <= seed_value < 2**64:
        errors.append("seed must be a 64-bit unsigned integer")
    else:
        seed = Seed(seed_value)

    threads = raw.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        errors.append("threads must be >= 1")
        threads = 1

    inputs = raw.get("inputs")
    clean_inputs: dict[str, str] = {}
    if not isinstance(inputs, dict):
        errors.append("inputs section is required")
    else:
        for key in inputs:
            if key not in _INPUT_KEYS:
                errors.append(f"unknown inputs key {key!r}")
        for key in ("src", "tgt", "src_lang", "tgt_lang"):
            if key not in inputs:
                errors.append(f"inputs.{key} is required")
        clean_inputs = {k: str(v) for k, v in inputs.items() if k in _INPUT_KEYS}
        clean_inputs.setdefault("provenance", "")
        for key in ("src", "tgt"):
            if key in clean_inputs:
                path = Path(clean_inputs[key])
                resolved = path if path.is_absolute() else base_dir / path
                if not resolved.exists():
                    errors.append(f"inputs.{key}: no such file {clean_inputs[key]!r}")

    raw_stages = raw.get("stages")
    stages: list[StageConfig] = []
    if not isinstance(raw_stages, list) or not raw_stages:
        errors.append("stages must be a non-empty list")
        raw_stages = []
    names: list[str] = []
    for index, raw_stage in enumerate(raw_stages):
        if not isinstance(raw_stage, dict) or "name" not in raw_stage:
            errors.append(f"stages[{index}] needs a name")
            continue
        name = raw_stage["name"]
        if name not in _RANGES:
            errors.append(f"stages[{index}]: unknown stage {name!r}")
            continue
        names.append(name)
        spec = _RANGES[name]
        params: dict[str, Any] = {}
        for key, value in raw_stage.items():
            if key == "name":
                continue
            if key not in spec:
                errors.append(f"stage {name}: unknown key {key!r}")
                continue
            _default, check, message = spec[key]
            if not check(value):
                errors.append(f"stage {name}: {message}")
            else:
                params[key] = value
        for key, (default, check, message) in spec.items():
            if key in params:
                continue
            if default is None and name in _STAGE_FILE_KEYS and key in _STAGE_FILE_KEYS[name] and key != "mono":
                errors.append(f"stage {name}: {message}")
            params.setdefault(key, default)
        for key in _STAGE_FILE_KEYS.get(name, ()):
            value = params.get(key)
            if isinstance(value, str):
                path = Path(value)
                resolved = path if path.is_absolute() else base_dir / path
                if not resolved.exists():
                    errors.append(f"stage {name}: no such file {value!r}")
        stages.append(StageConfig(name, params))

    # order constraint: a contiguous, in-order subset of the canonical chain
    positions = []
    for name in names:
        positions.append(STAGE_ORDER.index(name))
    if len(set(names)) != len(names):
        errors.append("stage order: duplicate stages")
    elif positions:
        if positions != sorted(positions):
            errors.append(
                "stage order: stages must follow " + " -> ".join(STAGE_ORDER)
            )
        elif positions != list(range(positions[0], positions[0] + len(positions))):
            errors.append("stage order: stages must be contiguous in the chain")

    hashes = raw.get("hashes", {})
    if not isinstance(hashes, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in hashes.items()
    ):
        errors.append("hashes must map paths to hex digests")
        hashes = {}

    workdir = Path(raw.get("workdir", "forge-out"))
    if errors:
        return None, errors
    return (
        PipelineManifest(
            seed=seed,
            threads=threads,
            workdir=workdir if workdir.is_absolute() else base_dir / workdir,
            inputs=clean_inputs,
            stages=stages,
            hashes={str(k): str(v) for k, v in hashes.items()},
            base_dir=base_dir,
        ),
        [],
    )


@dataclass
class StageRunReport:
    name: str
    seconds: float
    counts: dict[str, Any] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)  # relpath -> sha256

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "seconds": self.seconds,
            "counts": self.counts,
            "outputs": self.outputs,
        }


@dataclass
class RunReport:
    tool_version: str
    seed: int
    threads: int
    config: dict
    stages: list[StageRunReport] = field(default_factory=list)
    consumed: dict[str, str] = field(default_factory=dict)  # path -> sha256

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "seed": self.seed,
            "threads": self.threads,
            "config": self.config,
            "consumed": self.consumed,
            "stages": [s.to_dict() for s in self.stages],
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")


class PipelineStageError(CorpusError):
    """A stage failed; carries the partial run report."""

    def __init__(self, stage: str, cause: Exception, report: RunReport):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.report = report


class _PipelineState:
    corpus: ParallelCorpus | None = None
    splits: SplitResult | None = None
    model = None
    dictionary = None
    augmented: MonolingualCorpus | None = None


def _consume(manifest: PipelineManifest, report: RunReport, path: Path) -> None:
    """Record (and verify, when recorded in the manifest) an input digest."""
    digest = sha256_file(path)
    report.consumed[str(path)] = digest
    for key, expected in manifest.hashes.items():
        if manifest.resolve(key) == path and expected != digest:
            raise CorpusError(
                f"hash mismatch for {path}: manifest says {expected}, file is {digest}"
            )


def _mono_from_side(corpus: ParallelCorpus, side: str) -> MonolingualCorpus:
    if side == "source":
        sentences = tuple(
            Sentence(p.id, p.source.text, p.source.lang) for p in corpus
        )
        return MonolingualCorpus(sentences, corpus.src_lang, "gold")
    sentences = tuple(Sentence(p.id, p.target.text, p.target.lang) for p in corpus)
    return MonolingualCorpus(sentences, corpus.tgt_lang, "gold")


def run_pipeline(
    manifest: PipelineManifest, workdir: Path | None = None, threads: int | None = None
) -> RunReport:
    """Execute the manifest's stages in order.

    Any stage failure raises :class:`PipelineStageError` carrying the
    partial report. With a fixed manifest and seed, all written files are
    byte-identical across runs and thread counts.
    """
    workdir = Path(workdir) if workdir else manifest.workdir
    workdir.mkdir(parents=True, exist_ok=True)
    threads = threads if threads is not None else manifest.threads
    report = RunReport(
        tool_version=__version__,
        seed=manifest.seed.value,
        threads=threads,
        config=manifest.echo(),
    )
    state = _PipelineState()

    src = manifest.resolve(manifest.inputs["src"])
    tgt = manifest.resolve(manifest.inputs["tgt"])
    try:
        _consume(manifest, report, src)
        _consume(manifest, report, tgt)
        state.corpus = read_bitext(
            src,
            tgt,
            manifest.inputs["src_lang"],
            manifest.inputs["tgt_lang"],
            manifest.inputs.get("provenance", ""),
        )
    except Exception as exc:
        raise PipelineStageError("inputs", exc, report) from exc

    for stage in manifest.stages:
        started = time.perf_counter()
        stage_report = StageRunReport(name=stage.name, seconds=0.0)
        try:
            runner = _STAGE_RUNNERS[stage.name]
            runner(manifest, stage.params, state, workdir, threads, stage_report, report)
        except Exception as exc:
            stage_report.seconds = time.perf_counter() - started
            report.stages.append(stage_report)
            raise PipelineStageError(stage.name, exc, report) from exc
        stage_report.seconds = time.perf_counter() - started
        report.stages.append(stage_report)
    return report


def _register(stage_report: StageRunReport, workdir: Path, *paths: Path) -> None:
    for path in paths:
        stage_report.outputs[str(path.relative_to(workdir))] = sha256_file(path)


def _run_filter(manifest, params, state, workdir, threads, stage_report, report):
    corpus, filter_report = run_filters(state.corpus, side=params["side"])
    state.corpus = corpus
    out_src = workdir / "filtered.src.txt"
    out_tgt = workdir / "filtered.tgt.txt"
    write_bitext(corpus, out_src, out_tgt)
    report_path = workdir / "filter_report.json"
    filter_report.write_json(report_path)
    _register(stage_report, workdir, out_src, out_tgt, report_path)
    stage_report.counts = {
        "input_pairs": filter_report.input_pairs,
        "output_pairs": filter_report.output_pairs,
        "removed_by_rule": dict(filter_report.removed_by_rule),
    }


def _run_dedup(manifest, params, state, workdir, threads, stage_report, report):
    plan = DedupPlan(
        threshold=float(params["threshold"]),
        window=params["window"],
        top_ngrams=params["top_ngrams"],
        bucket_cap=params["bucket_cap"],
    )
    corpus, dedup_report = dedup(state.corpus, plan, threads=threads)
    state.corpus = corpus
    out_src = workdir / "deduped.src.txt"
    out_tgt = workdir / "deduped.tgt.txt"
    write_bitext(corpus, out_src, out_tgt)
    report_path = workdir / "dedup_report.json"
    dedup_report.write_json(report_path)
    _register(stage_report, workdir, out_src, out_tgt, report_path)
    stage_report.counts = {
        "input_size": dedup_report.input_size,
        "output_size": dedup_report.output_size,
        "removed": len(dedup_report.removals),
        "comparisons": dedup_report.comparisons,
    }


def _run_split(manifest, params, state, workdir, threads, stage_report, report):
    spec = SplitSpec(
        valid_size=params["valid_size"],
        test_size=params["test_size"],
        assignment=params["assignment"],
        seed=manifest.seed,
        statistic=params["statistic"],
    )
    splits = make_split(state.corpus, spec)
    state.splits = splits
    outputs = []
    for name, part in (("train", splits.train), ("valid", splits.valid), ("test", splits.test)):
        out_src = workdir / f"{name}.src.txt"
        out_tgt = workdir / f"{name}.tgt.txt"
        write_bitext(part, out_src, out_tgt)
        outputs += [out_src, out_tgt]
    manifest_path = workdir / "split_manifest.json"
    splits.write_manifest(manifest_path)
    outputs.append(manifest_path)
    stage_report.counts = {
        "train": len(splits.train),
        "valid": len(splits.valid),
        "test": len(splits.test),
    }
    threshold = params.get("audit_threshold")
    if threshold is not None:
        audit_path = workdir / "leakage_report.json"
        audits = {
            name: audit_leakage(splits.train, part, float(threshold), name).to_dict()
            for name, part in (("valid", splits.valid), ("test", splits.test))
        }
        with open(audit_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(audits, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.append(audit_path)
        stage_report.counts["leaked"] = {
            name: audits[name]["leaked"] for name in ("valid", "test")
        }
    _register(stage_report, workdir, *outputs)


def _training_corpus(state) -> ParallelCorpus:
    return state.splits.train if state.splits else state.corpus


def _run_align(manifest, params, state, workdir, threads, stage_report, report):
    train = _training_corpus(state)
    model = train_lexicon(
        train,
        iterations=params["iterations"],
        diagonal_strength=float(params["diagonal_strength"]),
        seed=manifest.seed,
        threads=threads,
    )
    state.model = model
    target = state.splits.test if state.splits else state.corpus
    alignments = align_corpus(model, target)
    model_path = workdir / "lexicon.tsv"
    model.to_tsv(model_path)
    align_path = workdir / "alignments.txt"
    write_alignments(alignments, align_path)
    _register(stage_report, workdir, model_path, align_path)
    stage_report.counts = {
        "training_pairs": len(train),
        "aligned_pairs": len(alignments),
        "source_vocab": len(model.src_vocab),
        "target_vocab": len(model.tgt_vocab),
        "final_log_likelihood": model.log_likelihoods[-1],
    }


def _run_extract_dict(manifest, params, state, workdir, threads, stage_report, report):
    if state.model is None:
        raise CorpusError("extract-dict needs the align stage before it")
    corpus = _training_corpus(state)
    dictionary = extract_dictionary(state.model, corpus, min_count=params["min_count"])
    state.dictionary = dictionary
    out = workdir / "dictionary.tsv"
    dictionary.to_tsv(out)
    _register(stage_report, workdir, out)
    stage_report.counts = {"entries": dictionary.size, "hrl_terms": len(dictionary.entries)}


def _run_augment(manifest, params, state, workdir, threads, stage_report, report):
    if state.dictionary is None:
        raise CorpusError("augment needs the extract-dict stage before it")
    if params["mono"]:
        mono_path = manifest.resolve(params["mono"])
        _consume(manifest, report, mono_path)
        mono = read_corpus(mono_path, state.dictionary.hrl_lang)
    else:
        mono = _mono_from_side(_training_corpus(state), "source")
    spec = AugmentSpec(replacement_rate=float(params["rate"]), seed=manifest.seed)
    augmented = code_switch(mono, state.dictionary, spec)
    state.augmented = augmented
    out = workdir / "code_switched.txt"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for sentence in augmented:
            fh.write(sentence.text)
            fh.write("\n")
    _register(stage_report, workdir, out)
    changed = sum(
        1
        for before, after in zip(mono.sentences, augmented.sentences)
        if before.text != after.text
    )
    stage_report.counts = {"sentences": len(augmented), "changed_sentences": changed}


def _run_sample(manifest, params, state, workdir, threads, stage_report, report):
    corpora: list[MonolingualCorpus] = []
    if state.augmented is not None:
        corpora.append(state.augmented)
    corpora.append(_mono_from_side(_training_corpus(state), "target"))
    weights = params["weights"] or {c.lang: float(len(c)) for c in corpora}
    spec = SamplingSpec(
        weights=weights,
        alpha=float(params["alpha"]),
        epoch_size=params["epoch_size"],
        seed=manifest.seed,
    )
    stream = build_mixture(corpora, spec)
    out = workdir / "mixture.jsonl"
    write_mixture_jsonl(stream, out)
    _register(stage_report, workdir, out)
    per_lang: dict[str, int] = {}
    for item in stream:
        per_lang[item.lang] = per_lang.get(item.lang, 0) + 1
    stage_report.counts = {"epoch_size": len(stream), "per_language": per_lang}


def _read_lines_for_eval(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").splitlines()


def _run_evaluate(manifest, params, state, workdir, threads, stage_report, report):
    hyp_path = manifest.resolve(params["hyp"])
    ref_path = manifest.resolve(params["ref"])
    _consume(manifest, report, hyp_path)
    _consume(manifest, report, ref_path)
    hyps = _read_lines_for_eval(hyp_path)
    refs = _read_lines_for_eval(ref_path)
    bleu_score = bleu(hyps, refs, lowercase=params["lowercase"])
    chrf_score = chrf(hyps, refs)
    out = workdir / "scores.json"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "bleu": {"score": bleu_score.score, "signature": bleu_score.signature},
                "chrf": {"score": chrf_score.score, "signature": chrf_score.signature},
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    _register(stage_report, workdir, out)
    stage_report.counts = {"bleu": bleu_score.score, "chrf": chrf_score.score}


def _run_analyze(manifest, params, state, workdir, threads, stage_report, report):
    if state.splits is None:
        raise CorpusError("analyze needs the split stage before it")
    test = state.splits.test
    hyp_path = manifest.resolve(params["hyp"])
    tags_path = manifest.resolve(params["tags"])
    align_path = manifest.resolve(params["alignments"])
    for path in (hyp_path, tags_path, align_path):
        _consume(manifest, report, path)
    hyps = _read_lines_for_eval(hyp_path)
    tagged = ingest_tags(tags_path)
    align_lines = _read_lines_for_eval(align_path)
    if not len(hyps) == len(tagged) == len(align_lines) == len(test):
        raise CorpusError(
            f"analyze inputs disagree on size: hyp={len(hyps)} tags={len(tagged)} "
            f"alignments={len(align_lines)} test={len(test)}"
        )
    projected = []
    for pair, tags, line in zip(test, tagged, align_lines):
        alignment = Alignment.from_pharaoh(
            line, len(tags), len(pair.target.text.split())
        )
        projected.append(project_tags(tags, pair.target, alignment))
    analysis = nounclass_accuracy(
        projected, hyps, prefix_len=params["prefix_len"], tag=params["tag"]
    )
    out = workdir / "analysis.json"
    analysis.write_json(out)
    _register(stage_report, workdir, out)
    stage_report.counts = {
        "buckets": len(analysis.buckets),
        "macro_accuracy": analysis.macro_accuracy,
    }


_STAGE_RUNNERS = {
    "filter": _run_filter,
    "dedup": _run_dedup,
    "split": _run_split,
    "align": _run_align,
    "extract-dict": _run_extract_dict,
    "augment": _run_augment,
    "sample": _run_sample,
    "evaluate": _run_evaluate,
    "analyze": _run_analyze,
}
