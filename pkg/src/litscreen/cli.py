"""Operator command line wiring the modules into batch workflows.

Every subcommand reads one RunConfig assembled from defaults, an optional
TOML file, and command-line flags (flags win). Outputs land under --out
together with a run manifest recording inputs, digests, seed, and
timestamps; pass --frozen-time to make runs byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from litscreen.calibrate import (
    CalibrationError,
    ExperimentConfig,
    GridSpec,
    bundle_cascade_point,
    envelope_from_docs,
    grid_search_thresholds,
    read_report_json,
    run_repeated_experiments,
    write_aggregate_csv,
    write_plot_data,
    write_report_json,
    write_runs_csv,
)
from litscreen.corpus import (
    CorpusError,
    LabeledArticle,
    corpus_digest,
    generate_synthetic_corpus,
    ingest_articles,
    upsample_minority,
    write_corpus_jsonl,
)
from litscreen.explain import ExplanationError, ExplanationMode, explain_prediction
from litscreen.factsheet import (
    DisclosureTexts,
    FactsheetError,
    compute_digests,
    generate_factsheet,
    write_factsheet,
)
from litscreen.models.bundle import (
    BundleIntegrityError,
    ModelBundle,
    load_bundle,
    save_bundle,
)
from litscreen.models.scorers import train_scorer_a, train_scorer_b
from litscreen.models.vocab import build_vocabulary, featurize
from litscreen.pipeline import ScreeningEngine
from litscreen.preprocess import PatientPatternConfig, normalize_tokenize
from litscreen.rules import RuleThresholds, audit_line, prediction_to_dict
from litscreen.service import ServiceError, TriageService, create_app

_DEFAULT_TARGETS = (0.91, 0.93, 0.95, 0.97, 0.99)

_DEFAULT_INTENDED_USE = (
    "Recall-first screening support for literature monitoring: rank and "
    "route title/abstract records to human reviewers at a disclosed "
    "target recall. Every record stays reviewable regardless of the "
    "predicted label."
)
_DEFAULT_OUT_OF_SCOPE = (
    "Autonomous case processing without human review; clinical decision "
    "making; inputs outside the disclosed operating envelope (language, "
    "length, or rejected formats)."
)
_DEFAULT_LIMITATIONS = (
    "Operating characteristics are measured on held-out splits of the "
    "training corpus and transfer only to similar inputs. Out-of-envelope "
    "records are routed to review unconditionally instead of being scored. "
    "The share of true negatives filtered at each target equals one minus "
    "the mean test false-positive rate in the performance table; "
    "deployment requires at least 40% at the strictest target, a floor "
    "confirmed on the first full evaluation run."
)


class UsageError(Exception):
    """Bad invocation: missing required values or invalid config keys."""


@dataclass
class RunConfig:
    corpus: str | None = None
    bundle: str | None = None
    out: str | None = None
    seed: int = 0
    grid_step: float = 0.01
    target_recalls: tuple[float, ...] = ()
    runs: int = 10
    mode: str = "exhaustive_ablation"
    frozen_time: str | None = None
    size: int = 1000
    positive_rate: float = 0.3
    sample_count: int = 500
    envelope_min_tokens: int | None = None
    envelope_max_tokens: int | None = None
    envelope_languages: tuple[str, ...] | None = None
    port: int = 8000
    intended_use: str = _DEFAULT_INTENDED_USE
    out_of_scope_uses: str = _DEFAULT_OUT_OF_SCOPE
    limitations: str = _DEFAULT_LIMITATIONS


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}
_TUPLE_FIELDS = {"target_recalls", "envelope_languages"}


def load_config_file(path: str | Path) -> dict:
    """Parse a TOML config; unknown keys are rejected outright."""
    try:
        data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"invalid config file {path}: {exc}")
    unknown = sorted(set(data) - _CONFIG_FIELDS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key in _TUPLE_FIELDS & set(data):
        if not isinstance(data[key], list):
            raise UsageError(f"config key {key} must be a list")
        data[key] = tuple(data[key])
    return data


def _validate_config(cfg: RunConfig) -> None:
    if not 0.0 < cfg.grid_step <= 1.0:
        raise UsageError("grid step must be in (0, 1]")
    if any(not 0.0 < t <= 1.0 for t in cfg.target_recalls):
        raise UsageError("target recalls must lie in (0, 1]")
    if cfg.runs < 1:
        raise UsageError("runs must be >= 1")
    if cfg.mode not in tuple(m.value for m in ExplanationMode):
        raise UsageError(
            f"mode must be one of {tuple(m.value for m in ExplanationMode)}"
        )
    if cfg.size < 10:
        raise UsageError("synthetic corpus size must be >= 10")
    if not 0.0 < cfg.positive_rate < 1.0:
        raise UsageError("positive rate must be in (0, 1)")
    if cfg.sample_count < 1:
        raise UsageError("sample count must be >= 1")
    if not 1 <= cfg.port <= 65535:
        raise UsageError("port must be in [1, 65535]")


def _require(cfg: RunConfig, command: str, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) in (None, ()):
            flag = "--target-recall" if name == "target_recalls" else f"--{name}"
            raise UsageError(f"{command} requires {flag}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    overrides = {
        "corpus": getattr(args, "corpus", None),
        "bundle": getattr(args, "bundle", None),
        "out": getattr(args, "out", None),
        "seed": getattr(args, "seed", None),
        "grid_step": getattr(args, "grid_step", None),
        "runs": getattr(args, "runs", None),
        "mode": getattr(args, "mode", None),
        "frozen_time": getattr(args, "frozen_time", None),
        "size": getattr(args, "size", None),
        "positive_rate": getattr(args, "positive_rate", None),
    }
    if getattr(args, "target_recall", None):
        overrides["target_recalls"] = tuple(args.target_recall)
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**values)
    _validate_config(cfg)
    return cfg


def _utc_now(cfg: RunConfig) -> str:
    if cfg.frozen_time:
        return cfg.frozen_time
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(
    out: Path,
    command: str,
    cfg: RunConfig,
    inputs: Sequence[Path],
    outputs: Sequence[Path],
    started: str,
    finished: str,
) -> None:
    manifest = {
        "command": command,
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
        "inputs": compute_digests(inputs).to_dict(),
        "outputs": compute_digests(outputs).to_dict(),
        "started_utc": started,
        "finished_utc": finished,
    }
    (out / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_labeled(cfg: RunConfig, command: str) -> list[LabeledArticle]:
    result = ingest_articles(cfg.corpus)
    if result.rejects:
        print(f"{len(result.rejects)} records rejected", file=sys.stderr)
    if not result.labeled:
        raise CorpusError(f"{command} requires labeled records")
    return result.labeled


# -- subcommands ------------------------------------------------------------


def _cmd_ingest(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    result = ingest_articles(cfg.corpus)
    items = (
        result.labeled
        if len(result.labeled) == len(result.articles)
        else result.articles
    )
    corpus_path = out / "corpus.jsonl"
    write_corpus_jsonl(items, corpus_path)
    rejects_path = out / "rejects.jsonl"
    with rejects_path.open("w", encoding="utf-8") as fh:
        for reject in result.rejects:
            fh.write(
                json.dumps({"line": reject.line_no, "reason": reject.reason}) + "\n"
            )
    _write_manifest(
        out, "ingest", cfg, [Path(cfg.corpus)], [corpus_path, rejects_path],
        started, _utc_now(cfg),
    )
    print(
        f"ingested {len(result.articles)} articles "
        f"({len(result.labeled)} labeled, {len(result.rejects)} rejected)"
    )
    return 0


def _cmd_synth(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    corpus = generate_synthetic_corpus(cfg.size, cfg.positive_rate, seed=cfg.seed)
    corpus_path = out / "corpus.jsonl"
    write_corpus_jsonl(corpus, corpus_path)
    _write_manifest(
        out, "synth", cfg, [], [corpus_path], started, _utc_now(cfg)
    )
    print(f"wrote {len(corpus)} articles, digest {corpus_digest([la.article for la in corpus])}")
    return 0


def _train_bundle(
    labeled: Sequence[LabeledArticle], cfg: RunConfig, created_utc: str
) -> ModelBundle:
    docs = [normalize_tokenize(la.article) for la in labeled]
    envelope = envelope_from_docs(docs, (1.0, 99.0))
    replacements: dict = {}
    if cfg.envelope_min_tokens is not None:
        replacements["min_tokens"] = cfg.envelope_min_tokens
    if cfg.envelope_max_tokens is not None:
        replacements["max_tokens"] = cfg.envelope_max_tokens
    if cfg.envelope_languages is not None:
        replacements["allowed_languages"] = tuple(cfg.envelope_languages)
    if replacements:
        envelope = dataclasses.replace(envelope, **replacements)

    vocabulary = build_vocabulary(docs)
    balanced = upsample_minority(list(labeled), seed=cfg.seed)
    doc_by_id = {d.article_id: d for d in docs}
    feats = [featurize(doc_by_id[la.article.id], vocabulary) for la in balanced]
    labels = [la.label for la in balanced]
    digest = corpus_digest([la.article for la in labeled])
    common = {"dim": len(vocabulary), "corpus_digest": digest, "trained_utc": created_utc}
    return ModelBundle(
        vocabulary=vocabulary,
        scorer_a=train_scorer_a(feats, labels, seed=cfg.seed, **common),
        scorer_b=train_scorer_b(feats, labels, seed=cfg.seed + 1, **common),
        envelope=envelope,
        # uncalibrated bundles fail open: every in-envelope item is flagged
        thresholds=RuleThresholds(0.0, 0.0),
        patterns=PatientPatternConfig(),
        training_corpus_digest=digest,
        seed=cfg.seed,
        created_utc=created_utc,
    )


def _cmd_train(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    labeled = _read_labeled(cfg, "train")
    bundle = _train_bundle(labeled, cfg, started)
    bundle_dir = out / "bundle"
    save_bundle(bundle, bundle_dir)
    _write_manifest(
        out, "train", cfg, [Path(cfg.corpus)], [bundle_dir / "MANIFEST"],
        started, _utc_now(cfg),
    )
    print(
        f"trained on {len(labeled)} articles, vocabulary {len(bundle.vocabulary)}, "
        f"bundle digest {bundle.digest}"
    )
    return 0


def _cmd_calibrate(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    bundle = load_bundle(cfg.bundle)
    labeled = _read_labeled(cfg, "calibrate")
    points = [bundle_cascade_point(la, bundle) for la in labeled]

    rows = []
    for target in sorted(cfg.target_recalls):
        result = grid_search_thresholds(
            points, GridSpec.with_step(cfg.grid_step, target)
        )
        rows.append((target, result))
    csv_path = out / "calibration.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("target_recall,theta_a,theta_b,validation_recall,validation_fpr\n")
        for target, result in rows:
            fh.write(
                f"{target},{result.thresholds.theta_a},{result.thresholds.theta_b},"
                f"{result.validation_recall},{result.validation_fpr}\n"
            )
    # the strictest requested target becomes the bundle's operating point
    updated = bundle.with_thresholds(rows[-1][1].thresholds)
    save_bundle(updated, cfg.bundle)
    _write_manifest(
        out, "calibrate", cfg,
        [Path(cfg.corpus)], [csv_path, Path(cfg.bundle) / "MANIFEST"],
        started, _utc_now(cfg),
    )
    for target, result in rows:
        print(
            f"target {target}: theta_a={result.thresholds.theta_a} "
            f"theta_b={result.thresholds.theta_b} recall={result.validation_recall:.4f} "
            f"fpr={result.validation_fpr:.4f}"
        )
    return 0


def _cmd_predict(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    bundle = load_bundle(cfg.bundle)
    engine = ScreeningEngine(bundle)
    articles = ingest_articles(cfg.corpus).articles
    predictions_path = out / "predictions.jsonl"
    audit_path = out / "audit.log"
    counts: dict[str, int] = {}
    with predictions_path.open("w", encoding="utf-8") as pf, audit_path.open(
        "w", encoding="utf-8"
    ) as af:
        for article in articles:
            _, prediction = engine.screen(article)
            pf.write(json.dumps(prediction_to_dict(prediction), sort_keys=True) + "\n")
            af.write(audit_line(prediction, started) + "\n")
            counts[prediction.label.value] = counts.get(prediction.label.value, 0) + 1
    _write_manifest(
        out, "predict", cfg,
        [Path(cfg.corpus), Path(cfg.bundle) / "MANIFEST"],
        [predictions_path, audit_path],
        started, _utc_now(cfg),
    )
    print(f"screened {len(articles)} articles: {counts}")
    return 0


def _cmd_evaluate(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    labeled = _read_labeled(cfg, "evaluate")
    targets = cfg.target_recalls or _DEFAULT_TARGETS
    config = ExperimentConfig(grid_step=cfg.grid_step, created_utc=started)
    report, bundle = run_repeated_experiments(
        labeled, targets, runs=cfg.runs, base_seed=cfg.seed, config=config
    )
    bundle_dir = out / "bundle"
    save_bundle(bundle, bundle_dir)
    runs_path = out / "runs.csv"
    aggregate_path = out / "aggregate.csv"
    report_path = out / "report.json"
    write_runs_csv(report, runs_path)
    write_aggregate_csv(report, aggregate_path)
    write_plot_data(report, out)
    write_report_json(report, report_path)
    _write_manifest(
        out, "evaluate", cfg, [Path(cfg.corpus)],
        [
            runs_path, aggregate_path, report_path,
            out / "recall_curve.csv", out / "fpr_curve.csv",
            bundle_dir / "MANIFEST",
        ],
        started, _utc_now(cfg),
    )
    for agg in report.aggregates:
        print(
            f"target {agg.target_recall}: mean test fpr {agg.mean_fpr:.4f}, "
            f"median test recall {agg.median_recall:.4f}"
        )
    return 0


def _cmd_explain(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    bundle = load_bundle(cfg.bundle)
    articles = ingest_articles(cfg.corpus).articles
    explanations_path = out / "explanations.jsonl"
    skipped = 0
    with explanations_path.open("w", encoding="utf-8") as fh:
        for article in articles:
            doc = normalize_tokenize(article)
            try:
                explanation = explain_prediction(
                    doc,
                    bundle,
                    mode=ExplanationMode(cfg.mode),
                    sample_count=cfg.sample_count,
                    seed=cfg.seed,
                )
            except ExplanationError as exc:
                skipped += 1
                fh.write(
                    json.dumps({"article_id": article.id, "skipped": str(exc)}) + "\n"
                )
                continue
            fh.write(json.dumps(explanation.to_dict(), sort_keys=True) + "\n")
    _write_manifest(
        out, "explain", cfg,
        [Path(cfg.corpus), Path(cfg.bundle) / "MANIFEST"], [explanations_path],
        started, _utc_now(cfg),
    )
    print(f"explained {len(articles) - skipped} articles ({skipped} skipped)")
    return 0


def _cmd_factsheet(cfg: RunConfig) -> int:
    started = _utc_now(cfg)
    out = _out_dir(cfg)
    bundle = load_bundle(cfg.bundle)
    report_path = out / "report.json"
    if not report_path.exists():
        raise FactsheetError(
            f"no report.json under {out}; run evaluate into this directory first"
        )
    report = read_report_json(report_path)
    labeled = _read_labeled(cfg, "factsheet")
    texts = DisclosureTexts(
        intended_use=cfg.intended_use,
        out_of_scope_uses=cfg.out_of_scope_uses,
        limitations=cfg.limitations,
    )
    sheet = generate_factsheet(bundle, report, texts, labeled)
    json_path, md_path = write_factsheet(sheet, out)
    digests_path = out / "digests.json"
    manifest = compute_digests(
        [json_path, md_path, report_path, Path(cfg.bundle) / "MANIFEST"]
    )
    digests_path.write_text(
        json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _write_manifest(
        out, "factsheet", cfg,
        [Path(cfg.corpus), report_path, Path(cfg.bundle) / "MANIFEST"],
        [json_path, md_path, digests_path],
        started, _utc_now(cfg),
    )
    print(f"factsheet written, combined digest {manifest.combined}")
    return 0


def _cmd_serve(cfg: RunConfig) -> int:
    import uvicorn

    out = _out_dir(cfg)
    bundle = load_bundle(cfg.bundle) if cfg.bundle else None
    service = TriageService(out, bundle=bundle)
    sheet = out / "factsheet.json"
    app = create_app(service, factsheet_path=sheet if sheet.exists() else None)
    uvicorn.run(app, host="127.0.0.1", port=cfg.port, log_level="warning")
    return 0


_DISPATCH: dict[str, Callable[[RunConfig], int]] = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "calibrate": _cmd_calibrate,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "explain": _cmd_explain,
    "factsheet": _cmd_factsheet,
    "serve": _cmd_serve,
}

_REQUIRED: dict[str, tuple[str, ...]] = {
    "ingest": ("corpus", "out"),
    "synth": ("out",),
    "train": ("corpus", "out"),
    "calibrate": ("corpus", "bundle", "out", "target_recalls"),
    "predict": ("corpus", "bundle", "out"),
    "evaluate": ("corpus", "out"),
    "explain": ("corpus", "bundle", "out"),
    "factsheet": ("corpus", "bundle", "out"),
    "serve": ("out",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="litscreen",
        description="Recall-calibrated screening workflows.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, help_text: str, *flags: str) -> None:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--frozen-time", dest="frozen_time", help="fixed UTC timestamp")
        if "corpus" in flags:
            p.add_argument("--corpus", help="corpus file (JSONL)")
        if "bundle" in flags:
            p.add_argument("--bundle", help="bundle directory")
        if "out" in flags:
            p.add_argument("--out", help="output directory")
        if "seed" in flags:
            p.add_argument("--seed", type=int)
        if "grid_step" in flags:
            p.add_argument("--grid-step", dest="grid_step", type=float)
        if "target_recall" in flags:
            p.add_argument(
                "--target-recall", dest="target_recall", type=float, action="append"
            )
        if "runs" in flags:
            p.add_argument("--runs", type=int)
        if "mode" in flags:
            p.add_argument(
                "--mode", choices=tuple(m.value for m in ExplanationMode)
            )
        if "size" in flags:
            p.add_argument("--size", type=int)
            p.add_argument(
                "--positive-rate", dest="positive_rate", type=float
            )

    add("ingest", "validate and canonicalize a corpus file", "corpus", "out")
    add("synth", "generate a synthetic labeled corpus", "out", "seed", "size")
    add("train", "fit scorers and write a bundle", "corpus", "out", "seed")
    add(
        "calibrate", "grid-search thresholds on a labeled corpus",
        "corpus", "bundle", "out", "grid_step", "target_recall",
    )
    add("predict", "screen articles with a bundle", "corpus", "bundle", "out")
    add(
        "evaluate", "repeated-split evaluation protocol",
        "corpus", "out", "seed", "grid_step", "target_recall", "runs",
    )
    add(
        "explain", "sentence-level explanations for articles",
        "corpus", "bundle", "out", "seed", "mode",
    )
    add(
        "factsheet", "render the disclosure fact sheet",
        "corpus", "bundle", "out",
    )
    add("serve", "run the triage HTTP service", "bundle", "out")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = resolve_config(args)
        _require(cfg, args.command, *_REQUIRED[args.command])
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](cfg)
    except (
        CorpusError,
        CalibrationError,
        FactsheetError,
        BundleIntegrityError,
        ExplanationError,
        ServiceError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
