"""Triage service: screen incoming batches, queue every item for review,
and record reviewer decisions in append-only logs.

State lives in three JSONL logs (articles, predictions, decisions) plus a
bundle directory; startup replays the logs, so the service can be killed
and restarted without losing or mutating history. All writes go through
one lock; logs are only ever appended to.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from litscreen.corpus import Article, CorpusError, Label
from litscreen.explain import ExplanationError, ExplanationMode, explain_prediction
from litscreen.models.bundle import ModelBundle, load_bundle, save_bundle
from litscreen.pipeline import ScreeningEngine
from litscreen.preprocess import normalize_tokenize
from litscreen.rules import RuleId, prediction_to_dict

_STATUSES = ("pending", "reviewed")
_DECISIONS = ("relevant", "not_relevant")
_LABELS = tuple(label.value for label in Label)
_RULES = tuple(rule.value for rule in RuleId)

_EXPLAIN_SAMPLES = 256  # enumerates exhaustively for docs under 9 sentences


class ServiceError(Exception):
    """Carries an HTTP-ish status plus a machine-readable error code."""

    def __init__(self, status: int, error: str, detail: str) -> None:
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class ReviewDecision:
    article_id: str
    decision: str
    reviewer: str
    timestamp_utc: str
    note: str | None = None

    def __post_init__(self) -> None:
        if self.decision not in _DECISIONS:
            raise ServiceError(
                400, "malformed", f"decision must be one of {_DECISIONS}"
            )
        if not self.reviewer or not self.reviewer.strip():
            raise ServiceError(400, "malformed", "reviewer must be non-empty")
        if not self.timestamp_utc:
            raise ServiceError(400, "malformed", "timestamp_utc must be non-empty")

    def to_dict(self) -> dict:
        return {
            "article_id": self.article_id,
            "decision": self.decision,
            "reviewer": self.reviewer,
            "timestamp_utc": self.timestamp_utc,
            "note": self.note,
        }


@dataclass
class WorkItem:
    """One queued article. Reviewed exactly when a decision exists."""

    batch_id: int
    article: dict
    prediction: dict
    decisions: tuple[dict, ...] = ()

    @property
    def status(self) -> str:
        return "reviewed" if self.decisions else "pending"

    @property
    def latest_decision(self) -> dict | None:
        return self.decisions[-1] if self.decisions else None

    def to_dict(self) -> dict:
        return {
            "batch_id": self.batch_id,
            "article": self.article,
            "prediction": self.prediction,
            "status": self.status,
            "decision": self.latest_decision,
            "decision_count": len(self.decisions),
        }


def _article_to_dict(article: Article) -> dict:
    record = {"id": article.id, "title": article.title, "abstract": article.abstract}
    if article.source:
        record["source"] = article.source
    return record


def parse_articles_payload(raw: bytes) -> list[Article]:
    """Accepts a JSON array of article objects or JSONL, one object per line."""
    text = raw.decode("utf-8", errors="strict") if raw else ""
    stripped = text.strip()
    records: list = []
    if stripped.startswith("["):
        try:
            parsed = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ServiceError(400, "malformed", f"invalid JSON array: {exc}")
        if not isinstance(parsed, list):
            raise ServiceError(400, "malformed", "payload must be a JSON array")
        records = parsed
    else:
        for lineno, line in enumerate(stripped.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ServiceError(
                    400, "malformed", f"invalid JSON on line {lineno}: {exc}"
                )
    articles: list[Article] = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ServiceError(400, "malformed", f"record {i} is not an object")
        try:
            articles.append(
                Article(
                    id=str(rec["id"]),
                    title=str(rec["title"]),
                    abstract=str(rec["abstract"]),
                    source=str(rec["source"]) if rec.get("source") else None,
                )
            )
        except KeyError as exc:
            raise ServiceError(400, "malformed", f"record {i} missing key {exc}")
        except CorpusError as exc:
            raise ServiceError(400, "malformed", f"record {i}: {exc}")
    return articles


class TriageService:
    """Single-writer review queue over append-only logs."""

    def __init__(
        self,
        data_dir: str | Path,
        bundle: ModelBundle | None = None,
        clock: Callable[[], str] | None = None,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._articles_log = self.data_dir / "articles.log"
        self._predictions_log = self.data_dir / "predictions.log"
        self._decisions_log = self.data_dir / "decisions.log"
        self._bundle_dir = self.data_dir / "bundle"
        self._clock = clock or _utc_now
        self._lock = threading.Lock()

        if bundle is not None:
            self.bundle: ModelBundle | None = bundle
            save_bundle(bundle, self._bundle_dir)
        elif (self._bundle_dir / "MANIFEST").exists():
            self.bundle = load_bundle(self._bundle_dir)
        else:
            self.bundle = None
        self._engine = ScreeningEngine(self.bundle) if self.bundle else None

        self._items: dict[str, WorkItem] = {}
        self._order: list[str] = []
        self._next_batch = 1
        self._decision_count = 0
        self._explanations: dict[str, dict | None] = {}
        self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        if self._articles_log.exists():
            predictions: dict[str, dict] = {}
            if self._predictions_log.exists():
                for line in self._predictions_log.read_text("utf-8").splitlines():
                    rec = json.loads(line)
                    predictions[rec["article_id"]] = rec["prediction"]
            for line in self._articles_log.read_text("utf-8").splitlines():
                rec = json.loads(line)
                article = rec["article"]
                aid = article["id"]
                self._items[aid] = WorkItem(
                    batch_id=rec["batch_id"],
                    article=article,
                    prediction=predictions[aid],
                )
                self._order.append(aid)
                self._next_batch = max(self._next_batch, rec["batch_id"] + 1)
        if self._decisions_log.exists():
            for line in self._decisions_log.read_text("utf-8").splitlines():
                rec = json.loads(line)
                item = self._items.get(rec["article_id"])
                if item is None:
                    raise ServiceError(
                        409, "corrupt_store", f"decision for unknown {rec}"
                    )
                item.decisions = item.decisions + (rec,)
                self._decision_count += 1

    def _append(self, path: Path, record: dict) -> None:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            fh.flush()

    # -- operations -------------------------------------------------------

    def enqueue_batch(self, articles: Sequence[Article]) -> dict:
        if self.bundle is None or self._engine is None:
            raise ServiceError(409, "no_bundle", "no bundle loaded")
        with self._lock:
            seen: set[str] = set()
            for article in articles:
                if article.id in seen or article.id in self._items:
                    raise ServiceError(
                        400, "malformed", f"duplicate article id {article.id!r}"
                    )
                seen.add(article.id)
            batch_id = self._next_batch
            self._next_batch += 1
            timestamp = self._clock()
            labels = {value: 0 for value in _LABELS}
            rules = {value: 0 for value in _RULES}
            for article in articles:
                _, prediction = self._engine.screen(article)
                pred = prediction_to_dict(prediction)
                labels[pred["label"]] += 1
                rules[pred["fired_rule"]] += 1
                item = WorkItem(
                    batch_id=batch_id,
                    article=_article_to_dict(article),
                    prediction=pred,
                )
                self._append(
                    self._articles_log,
                    {"batch_id": batch_id, "article": item.article},
                )
                self._append(
                    self._predictions_log,
                    {
                        "article_id": article.id,
                        "batch_id": batch_id,
                        "timestamp_utc": timestamp,
                        "prediction": pred,
                    },
                )
                self._items[article.id] = item
                self._order.append(article.id)
            return {
                "batch_id": batch_id,
                "size": len(articles),
                "labels": labels,
                "rules": rules,
            }

    def next_items(
        self,
        status: str | None = None,
        label: str | None = None,
        fired_rule: str | None = None,
        page: int = 1,
        page_size: int = 20,
    ) -> tuple[list[WorkItem], int]:
        """Filtered page in ingest order, plus the filtered total."""
        if status is not None and status not in _STATUSES:
            raise ServiceError(400, "malformed", f"status must be one of {_STATUSES}")
        if label is not None and label not in _LABELS:
            raise ServiceError(400, "malformed", f"label must be one of {_LABELS}")
        if fired_rule is not None and fired_rule not in _RULES:
            raise ServiceError(400, "malformed", f"rule must be one of {_RULES}")
        if page < 1:
            raise ServiceError(400, "malformed", "page must be >= 1")
        if not 1 <= page_size <= 200:
            raise ServiceError(400, "malformed", "page_size must be in [1, 200]")
        matches = [
            item
            for item in (self._items[aid] for aid in self._order)
            if (status is None or item.status == status)
            and (label is None or item.prediction["label"] == label)
            and (fired_rule is None or item.prediction["fired_rule"] == fired_rule)
        ]
        start = (page - 1) * page_size
        return matches[start : start + page_size], len(matches)

    def get_item(self, article_id: str) -> WorkItem:
        item = self._items.get(article_id)
        if item is None:
            raise ServiceError(404, "not_found", f"unknown article id {article_id!r}")
        return item

    def record_decision(self, decision: ReviewDecision) -> dict:
        with self._lock:
            item = self.get_item(decision.article_id)
            record = decision.to_dict()
            self._append(self._decisions_log, record)
            item.decisions = item.decisions + (record,)
            self._decision_count += 1
            return {
                "article_id": decision.article_id,
                "status": item.status,
                "decision_count": len(item.decisions),
            }

    def explanation_for(self, article_id: str) -> dict | None:
        """Lazy per-article explanation; None when out of envelope."""
        item = self.get_item(article_id)
        if article_id in self._explanations:
            return self._explanations[article_id]
        assert self.bundle is not None
        article = Article(
            id=item.article["id"],
            title=item.article["title"],
            abstract=item.article["abstract"],
            source=item.article.get("source"),
        )
        doc = normalize_tokenize(article)
        try:
            explanation = explain_prediction(
                doc,
                self.bundle,
                mode=ExplanationMode.SAMPLED_LIME,
                sample_count=_EXPLAIN_SAMPLES,
                seed=0,
            ).to_dict()
        except ExplanationError:
            explanation = None
        self._explanations[article_id] = explanation
        return explanation

    def queue_stats(self) -> dict:
        by_status = {value: 0 for value in _STATUSES}
        by_label = {value: 0 for value in _LABELS}
        by_rule = {value: 0 for value in _RULES}
        confusion = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
        for aid in self._order:
            item = self._items[aid]
            by_status[item.status] += 1
            by_label[item.prediction["label"]] += 1
            by_rule[item.prediction["fired_rule"]] += 1
            latest = item.latest_decision
            if latest is None:
                continue
            predicted_suspect = (
                item.prediction["label"] == Label.SUSPECT_ADVERSE.value
            )
            gold_relevant = latest["decision"] == "relevant"
            if predicted_suspect and gold_relevant:
                confusion["tp"] += 1
            elif predicted_suspect:
                confusion["fp"] += 1
            elif gold_relevant:
                confusion["fn"] += 1
            else:
                confusion["tn"] += 1
        thresholds = None
        if self.bundle is not None:
            thresholds = {
                "theta_a": self.bundle.thresholds.theta_a,
                "theta_b": self.bundle.thresholds.theta_b,
            }
        return {
            "items": {"total": len(self._order), **by_status},
            "labels": by_label,
            "rules": by_rule,
            "decisions_recorded": self._decision_count,
            "confusion": confusion,
            "thresholds": thresholds,
            "bundle_digest": self.bundle.digest if self.bundle else None,
        }


def create_app(
    service: TriageService, factsheet_path: str | Path | None = None
) -> FastAPI:
    """HTTP layer over the service; every route lives under /v1."""
    app = FastAPI(title="litscreen triage", docs_url=None, redoc_url=None)
    sheet_path = Path(factsheet_path) if factsheet_path else None

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"error": exc.error, "detail": exc.detail},
        )

    @app.post("/v1/batches")
    async def post_batch(request: Request) -> JSONResponse:
        raw = await request.body()
        articles = parse_articles_payload(raw)
        summary = service.enqueue_batch(articles)
        return JSONResponse(
            status_code=201,
            content={"batch_id": summary["batch_id"], "summary": summary},
        )

    @app.get("/v1/queue")
    async def get_queue(
        status: str | None = None,
        label: str | None = None,
        rule: str | None = None,
        page: int = 1,
        page_size: int = 20,
    ) -> dict:
        items, total = service.next_items(
            status=status,
            label=label,
            fired_rule=rule,
            page=page,
            page_size=page_size,
        )
        return {
            "items": [item.to_dict() for item in items],
            "total": total,
            "page": page,
            "page_size": page_size,
        }

    @app.get("/v1/articles/{article_id}")
    async def get_article(article_id: str) -> dict:
        item = service.get_item(article_id)
        return {
            "article": item.article,
            "prediction": item.prediction,
            "trace": item.prediction["trace"],
            "explanation": service.explanation_for(article_id),
            "status": item.status,
            "decision": item.latest_decision,
        }

    @app.post("/v1/articles/{article_id}/decision")
    async def post_decision(article_id: str, request: Request) -> dict:
        raw = await request.body()
        try:
            body = json.loads(raw.decode("utf-8")) if raw else {}
        except json.JSONDecodeError as exc:
            raise ServiceError(400, "malformed", f"invalid JSON body: {exc}")
        if not isinstance(body, dict):
            raise ServiceError(400, "malformed", "decision body must be an object")
        unknown = set(body) - {"decision", "reviewer", "note", "timestamp_utc"}
        if unknown:
            raise ServiceError(400, "malformed", f"unknown keys: {sorted(unknown)}")
        decision = ReviewDecision(
            article_id=article_id,
            decision=str(body.get("decision", "")),
            reviewer=str(body.get("reviewer", "")),
            timestamp_utc=str(body.get("timestamp_utc") or service._clock()),
            note=str(body["note"]) if body.get("note") is not None else None,
        )
        return service.record_decision(decision)

    @app.get("/v1/stats")
    async def get_stats() -> dict:
        return service.queue_stats()

    @app.get("/v1/factsheet")
    async def get_factsheet() -> dict:
        if sheet_path is None or not sheet_path.exists():
            raise ServiceError(404, "not_found", "no factsheet published")
        return json.loads(sheet_path.read_text("utf-8"))

    return app
