"""forge: command-line interface over the toolkit.

Exit codes: 0 success, 1 user error (bad arguments, malformed inputs,
failed validation), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from corpusforge import __version__
from corpusforge.align import (
    Alignment,
    LexiconModel,
    align_corpus,
    train_lexicon,
    write_alignments,
)
from corpusforge.augment import (
    AugmentSpec,
    BilingualDictionary,
    SamplingSpec,
    build_mixture,
    code_switch,
    extract_dictionary,
    merge_pseudo,
    plan_iteration,
    write_mixture_jsonl,
)
from corpusforge.core import (
    CorpusError,
    Seed,
    read_bitext,
    read_corpus,
    read_corpus_jsonl,
    write_bitext,
    write_corpus,
    write_corpus_jsonl,
)
from corpusforge.dedup import DedupPlan, dedup
from corpusforge.filtering import run_filters
from corpusforge.metrics import bleu, chrf
from corpusforge.nounclass import ingest_tags, nounclass_accuracy, project_tags
from corpusforge.pipeline import PipelineStageError, run_pipeline, validate_config
from corpusforge.split import SplitSpec, audit_leakage, make_split


def _default_threads() -> int:
    value = os.environ.get("FORGE_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _add_bitext_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--src", required=True, help="source-side text file")
    parser.add_argument("--tgt", required=True, help="target-side text file")
    parser.add_argument("--src-lang", required=True)
    parser.add_argument("--tgt-lang", required=True)
    parser.add_argument("--provenance", default="")


def _read_cli_bitext(args):
    return read_bitext(args.src, args.tgt, args.src_lang, args.tgt_lang, args.provenance)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge", description="corpus engineering toolkit"
    )
    parser.add_argument("--version", action="version", version=f"forge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="apply the automatic bitext filtering rules")
    _add_bitext_args(p)
    p.add_argument("--side", choices=["source", "target", "both"], default="source")
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)
    p.add_argument("--report", help="write the FilterReport as JSON")

    p = sub.add_parser("dedup", help="remove near-duplicate sentences")
    _add_bitext_args(p)
    p.add_argument("--threshold", type=float, default=60.0)
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--top-ngrams", type=int, default=100_000)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tgt", required=True)
    p.add_argument("--report", help="write the DedupReport as JSON")

    p = sub.add_parser("split", help="leakage-safe train/valid/test split")
    _add_bitext_args(p)
    p.add_argument("--valid", type=int, default=3000)
    p.add_argument("--test", type=int, default=3000)
    p.add_argument("--assignment", choices=["alternating", "contiguous"], default="alternating")
    p.add_argument("--outdir", required=True)
    p.add_argument("--audit-threshold", type=float, help="also audit the split for leakage")

    p = sub.add_parser("align", help="train the lexical aligner and align a corpus")
    _add_bitext_args(p)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--diagonal", type=float, default=0.0, metavar="LAMBDA")
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--model", required=True, help="write the lexicon TSV here")
    p.add_argument("--alignments", help="write Viterbi alignments (i-j lines) here")

    p = sub.add_parser("extract-dict", help="extract a bilingual dictionary")
    _add_bitext_args(p)
    p.add_argument("--model", help="trained lexicon TSV (retrains if omitted)")
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--min-count", type=int, default=20)
    p.add_argument("--out", required=True)

    p = sub.add_parser("augment", help="code-switch a monolingual corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--dict", dest="dictionary", required=True)
    p.add_argument("--rate", type=float, default=0.30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="build an exponentially smoothed mixture")
    p.add_argument(
        "--corpus",
        action="append",
        required=True,
        metavar="LANG=PATH[:ORIGIN]",
        help="repeatable; ORIGIN defaults to gold",
    )
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--epoch-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="mixture JSONL path")

    p = sub.add_parser("merge-pseudo", help="concatenate gold and pseudo corpora")
    p.add_argument("--gold", required=True)
    p.add_argument("--pseudo", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--out", required=True, help="merged corpus JSONL path")

    p = sub.add_parser("plan-iteration", help="plan one pretraining round")
    p.add_argument("--round", type=int, required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="write the step list as JSON (stdout otherwise)")

    p = sub.add_parser("evaluate", help="score hypotheses with BLEU and chrF")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--metric", default="bleu,chrf")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--json", action="store_true", dest="as_json")

    p = sub.add_parser("analyze", help="noun-class translation accuracy")
    p.add_argument("--ref", required=True, help="reference target-side text")
    p.add_argument("--hyp", required=True)
    p.add_argument("--tags", required=True, help="token/TAG file for the source side")
    p.add_argument("--alignments", required=True, help="i-j lines, source-target")
    p.add_argument("--prefix-len", type=int, choices=[2, 3], default=2)
    p.add_argument("--tag", default="NOUN")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--out", help="write the report JSON here")

    p = sub.add_parser("pipeline", help="run a manifest end to end")
    p.add_argument("--manifest", required=True)
    p.add_argument("--workdir", help="override the manifest's output directory")
    p.add_argument("--threads", type=int, help="override the manifest's thread count")
    p.add_argument("--validate-only", action="store_true")
    p.add_argument("--report", help="write the RunReport as JSON")

    return parser


def _cmd_filter(args) -> int:
    corpus, report = run_filters(_read_cli_bitext(args), side=args.side)
    write_bitext(corpus, args.out_src, args.out_tgt)
    if args.report:
        report.write_json(args.report)
    print(
        f"filter: kept {report.output_pairs}/{report.input_pairs} pairs "
        f"({json.dumps(report.removed_by_rule, sort_keys=True)})"
    )
    return 0


def _cmd_dedup(args) -> int:
    plan = DedupPlan(
        threshold=args.threshold, window=args.window, top_ngrams=args.top_ngrams
    )
    corpus, report = dedup(_read_cli_bitext(args), plan, threads=args.threads)
    write_bitext(corpus, args.out_src, args.out_tgt)
    if args.report:
        report.write_json(args.report)
    print(
        f"dedup: kept {report.output_size}/{report.input_size} pairs, "
        f"{report.comparisons} comparisons"
    )
    return 0


def _cmd_split(args) -> int:
    corpus = _read_cli_bitext(args)
    spec = SplitSpec(valid_size=args.valid, test_size=args.test, assignment=args.assignment)
    splits = make_split(corpus, spec)
    outdir = Path(args.outdir)
    for name, part in (("train", splits.train), ("valid", splits.valid), ("test", splits.test)):
        write_bitext(part, outdir / f"{name}.src.txt", outdir / f"{name}.tgt.txt")
    splits.write_manifest(outdir / "split_manifest.json")
    print(
        f"split: train={len(splits.train)} valid={len(splits.valid)} test={len(splits.test)}"
    )
    if args.audit_threshold is not None:
        for name, part in (("valid", splits.valid), ("test", splits.test)):
            audit = audit_leakage(splits.train, part, args.audit_threshold, name)
            print(
                f"leakage[{name}]: {audit.leaked}/{audit.heldout_size} above "
                f"{args.audit_threshold} (max {audit.max_score:.2f})"
            )
    return 0


def _cmd_align(args) -> int:
    corpus = _read_cli_bitext(args)
    model = train_lexicon(
        corpus,
        iterations=args.iterations,
        diagonal_strength=args.diagonal,
        threads=args.threads,
    )
    model.to_tsv(args.model)
    if args.alignments:
        write_alignments(align_corpus(model, corpus), args.alignments)
    print(
        f"align: {len(corpus)} pairs, |V_src|={len(model.src_vocab)}, "
        f"|V_tgt|={len(model.tgt_vocab)}, LL={model.log_likelihoods[-1]:.4f}"
    )
    return 0


def _cmd_extract_dict(args) -> int:
    corpus = _read_cli_bitext(args)
    if args.model:
        model = LexiconModel.from_tsv(args.model)
    else:
        model = train_lexicon(corpus, iterations=args.iterations)
    dictionary = extract_dictionary(model, corpus, min_count=args.min_count)
    dictionary.to_tsv(args.out)
    print(f"extract-dict: {dictionary.size} entries for {len(dictionary.entries)} terms")
    return 0


def _cmd_augment(args) -> int:
    corpus = read_corpus(args.input, args.lang)
    dictionary = BilingualDictionary.from_tsv(args.dictionary)
    spec = AugmentSpec(replacement_rate=args.rate, seed=Seed(args.seed))
    augmented = code_switch(corpus, dictionary, spec)
    if args.out.endswith(".jsonl"):
        write_corpus_jsonl(augmented, args.out)
    else:
        write_corpus(augmented, args.out)
    print(f"augment: wrote {len(augmented)} code-switched sentences")
    return 0


def _parse_corpus_flag(value: str):
    lang, _, rest = value.partition("=")
    if not rest:
        raise CorpusError(f"--corpus expects LANG=PATH[:ORIGIN], got {value!r}")
    path, _, origin = rest.rpartition(":")
    if not path:  # no origin suffix
        path, origin = rest, "gold"
    return lang, path, origin


def _cmd_sample(args) -> int:
    corpora = []
    weights = {}
    for flag in args.corpus:
        lang, path, origin = _parse_corpus_flag(flag)
        corpus = (
            read_corpus_jsonl(path)
            if path.endswith(".jsonl")
            else read_corpus(path, lang, origin)
        )
        corpora.append(corpus)
        weights[lang] = float(len(corpus))
    spec = SamplingSpec(
        weights=weights, alpha=args.alpha, epoch_size=args.epoch_size, seed=Seed(args.seed)
    )
    stream = build_mixture(corpora, spec)
    write_mixture_jsonl(stream, args.out)
    print(f"sample: wrote {len(stream)} sentences to {args.out}")
    return 0


def _cmd_merge_pseudo(args) -> int:
    gold = (
        read_corpus_jsonl(args.gold)
        if args.gold.endswith(".jsonl")
        else read_corpus(args.gold, args.lang, "gold")
    )
    pseudo = (
        read_corpus_jsonl(args.pseudo)
        if args.pseudo.endswith(".jsonl")
        else read_corpus(args.pseudo, args.lang, "pseudo")
    )
    merged = merge_pseudo(gold, pseudo)
    write_corpus_jsonl(merged, args.out)
    counts = merged.origin_counts()
    print(
        f"merge-pseudo: {len(merged)} sentences "
        f"({counts.get('gold', 0)} gold + {counts.get('pseudo', 0)} pseudo)"
    )
    return 0


def _cmd_plan_iteration(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    steps = plan_iteration(args.round, manifest)
    payload = json.dumps([s.to_dict() for s in steps], indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return 0


def _cmd_evaluate(args) -> int:
    hyps = Path(args.hyp).read_text(encoding="utf-8").splitlines()
    refs = Path(args.ref).read_text(encoding="utf-8").splitlines()
    metrics = [m.strip() for m in args.metric.split(",") if m.strip()]
    results = {}
    for metric in metrics:
        if metric == "bleu":
            score = bleu(hyps, refs, lowercase=args.lowercase)
            results["bleu"] = {"score": score.score, "signature": score.signature}
        elif metric == "chrf":
            score = chrf(hyps, refs)
            results["chrf"] = {"score": score.score, "signature": score.signature}
        else:
            raise CorpusError(f"unknown metric {metric!r}")
    if args.as_json:
        print(json.dumps(results, indent=2, sort_keys=True))
    else:
        for name, result in results.items():
            print(f"{name.upper()} = {result['score']:.2f} ({result['signature']})")
    return 0


def _cmd_analyze(args) -> int:
    refs = Path(args.ref).read_text(encoding="utf-8").splitlines()
    hyps = Path(args.hyp).read_text(encoding="utf-8").splitlines()
    tagged = ingest_tags(args.tags)
    align_lines = Path(args.alignments).read_text(encoding="utf-8").splitlines()
    if not len(refs) == len(hyps) == len(tagged) == len(align_lines):
        raise CorpusError(
            f"inputs disagree on size: ref={len(refs)} hyp={len(hyps)} "
            f"tags={len(tagged)} alignments={len(align_lines)}"
        )
    projected = []
    for ref, tags, line in zip(refs, tagged, align_lines):
        alignment = Alignment.from_pharaoh(line, len(tags), len(ref.split()))
        projected.append(project_tags(tags, ref, alignment))
    report = nounclass_accuracy(projected, hyps, prefix_len=args.prefix_len, tag=args.tag)
    if args.out:
        report.write_json(args.out)
    if args.as_json or not args.out:
        print(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    return 0


def _cmd_pipeline(args) -> int:
    manifest, errors = validate_config(args.manifest)
    if errors:
        for error in errors:
            print(f"manifest error: {error}", file=sys.stderr)
        return 1
    if args.validate_only:
        print("manifest OK")
        return 0
    workdir = Path(args.workdir) if args.workdir else None
    report = run_pipeline(manifest, workdir=workdir, threads=args.threads)
    if args.report:
        report.write_json(args.report)
    for stage in report.stages:
        print(f"{stage.name}: {json.dumps(stage.counts, sort_keys=True)}")
    return 0


_COMMANDS = {
    "filter": _cmd_filter,
    "dedup": _cmd_dedup,
    "split": _cmd_split,
    "align": _cmd_align,
    "extract-dict": _cmd_extract_dict,
    "augment": _cmd_augment,
    "sample": _cmd_sample,
    "merge-pseudo": _cmd_merge_pseudo,
    "plan-iteration": _cmd_plan_iteration,
    "evaluate": _cmd_evaluate,
    "analyze": _cmd_analyze,
    "pipeline": _cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CorpusError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
