"""HTTP facade: schema introspection, ranking, and disease details.

The service holds one immutable knowledge base, swapped atomically on an
explicit reload signal; request handlers never mutate shared state.  By
default numeric scores are stripped from every response so that clients
cannot present pseudo-probabilities to users; ``expose_scores`` re-enables
them for debugging and test clients only.
"""

from __future__ import annotations

import json
import logging
import signal
import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from dermrank.engine import RankingConfig, rank_all, select_diagnoses
from dermrank.kb.model import (
    CaseParseError,
    Diagnostic,
    Judgement,
    KbParseError,
    KnowledgeBase,
    Severity,
)
from dermrank.kb.parse import parse_case, parse_kb

logger = logging.getLogger("dermrank.service")

_CONFIG_KEYS = {"category_weights", "similarity_threshold", "rank_threshold", "max_results"}


class ServiceState:
    """Shared service state: the loaded knowledge base plus ranking defaults.

    ``kb`` may start as ``None`` (load pending or failed); handlers answer
    503 until a knowledge base is available.
    """

    def __init__(
        self,
        kb: KnowledgeBase | None,
        kb_path: str | None = None,
        listen_address: str | None = None,
        default_ranking: RankingConfig | None = None,
        expose_scores: bool = False,
    ):
        self.kb = kb
        self.kb_path = kb_path
        self.listen_address = listen_address
        self.default_ranking = default_ranking if default_ranking is not None else RankingConfig()
        self.expose_scores = expose_scores
        self._reload_lock = threading.Lock()

    def swap_kb(self, kb: KnowledgeBase) -> None:
        """Atomically replace the knowledge base for subsequent requests."""
        self.kb = kb

    def reload(self) -> bool:
        """Re-read the knowledge base from disk; keep the old one on failure."""
        if self.kb_path is None:
            return False
        with self._reload_lock:
            try:
                kb = parse_kb(Path(self.kb_path).read_bytes())
            except (OSError, KbParseError) as exc:
                logger.warning("reload of %s failed: %s", self.kb_path, exc)
                return False
            self.swap_kb(kb)
            logger.info("reloaded knowledge base from %s", self.kb_path)
            return True


def install_reload_handler(state: ServiceState) -> None:
    """Reload the knowledge base on SIGHUP, where the platform supports it."""
    if not hasattr(signal, "SIGHUP"):
        return
    try:
        signal.signal(signal.SIGHUP, lambda signum, frame: state.reload())
    except ValueError:
        # Not on the main thread (e.g. embedded in tests); reload stays manual.
        pass


def _diagnostics_response(status: int, diagnostics: list[Diagnostic]) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"diagnostics": [d.to_json_object() for d in diagnostics]},
    )


def _error(status: int, code: str, location: str, message: str) -> JSONResponse:
    return _diagnostics_response(status, [Diagnostic(Severity.ERROR, code, location, message)])


class _ConfigError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics


def _config_from_document(node: Any, kb: KnowledgeBase, base: RankingConfig) -> RankingConfig:
    """Merge a partial config override into ``base``; raise on bad values."""
    if node is None:
        return base

    def bad(message: str) -> _ConfigError:
        return _ConfigError([Diagnostic(Severity.ERROR, "INVALID_CONFIG", "config", message)])

    if not isinstance(node, dict):
        raise bad("'config' must be an object")
    for key in node:
        if key not in _CONFIG_KEYS:
            raise bad(f"unknown config field {key!r}")

    weights = dict(base.category_weights)
    if "category_weights" in node:
        raw = node["category_weights"]
        if not isinstance(raw, dict):
            raise bad("'category_weights' must be an object")
        known = {c.id for c in kb.categories}
        for category_id, value in raw.items():
            if category_id not in known:
                raise bad(f"unknown category {category_id!r} in category_weights")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise bad(f"weight for {category_id!r} must be a number")
            weights[category_id] = float(value)

    def number(key: str, default: float) -> float:
        if key not in node:
            return default
        value = node[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad(f"{key!r} must be a number")
        return float(value)

    max_results = base.max_results
    if "max_results" in node:
        value = node["max_results"]
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("'max_results' must be an integer")
        max_results = value

    try:
        return RankingConfig(
            category_weights=weights,
            similarity_threshold=number("similarity_threshold", base.similarity_threshold),
            rank_threshold=number("rank_threshold", base.rank_threshold),
            max_results=max_results,
        )
    except ValueError as exc:
        raise bad(str(exc))


def create_app(state: ServiceState, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="dermrank", docs_url=None, redoc_url=None)

    @app.get("/api/v1/schema")
    def get_schema() -> JSONResponse:
        kb = state.kb
        if kb is None:
            return _error(503, "KB_UNAVAILABLE", "service", "knowledge base is not loaded")
        categories = [
            {
                "id": c.id,
                "name": c.name,
                "step": c.step,
                "selection": c.selection.value,
                "symptoms": [{"id": s.id, "name": s.name} for s in c.symptoms],
            }
            for c in sorted(kb.categories, key=lambda c: c.step)
        ]
        return JSONResponse({"schema_version": kb.schema_version, "categories": categories})

    @app.post("/api/v1/rank")
    async def post_rank(request: Request) -> JSONResponse:
        kb = state.kb
        if kb is None:
            return _error(503, "KB_UNAVAILABLE", "service", "knowledge base is not loaded")
        raw = await request.body()
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            return _error(400, "SYNTAX_ERROR", f"line {exc.lineno}, column {exc.colno}", exc.msg)
        if not isinstance(body, dict):
            return _error(400, "INVALID_FIELD", "document", "request body must be a JSON object")

        try:
            config = _config_from_document(body.get("config"), kb, state.default_ranking)
        except _ConfigError as exc:
            return _diagnostics_response(422, exc.diagnostics)

        case_document = {k: v for k, v in body.items() if k != "config"}
        try:
            case = parse_case(json.dumps(case_document), kb)
        except CaseParseError as exc:
            return _diagnostics_response(400, exc.diagnostics)

        ranked = rank_all(kb, case, config)
        diagnoses = select_diagnoses(ranked, config)
        names = {d.id: d.name for d in kb.diseases}
        rows = []
        for r in diagnoses:
            row: dict[str, Any] = {"disease_id": r.disease, "name": names[r.disease], "severe": r.severe}
            if state.expose_scores:
                row["log_similarity"] = r.log_similarity
                row["log_rank"] = r.log_rank
            rows.append(row)
        excluded_count = sum(1 for r in ranked if r.excluded)
        return JSONResponse({"diagnoses": rows, "excluded_count": excluded_count})

    @app.get("/api/v1/diseases/{disease_id}")
    def get_disease(disease_id: str) -> JSONResponse:
        kb = state.kb
        if kb is None:
            return _error(503, "KB_UNAVAILABLE", "service", "knowledge base is not loaded")
        disease = kb.disease(disease_id)
        if disease is None:
            return _error(404, "UNKNOWN_DISEASE", disease_id, f"unknown disease {disease_id!r}")
        judgements = {}
        for symptom_id in kb.symptom_ids():
            entry = disease.judgements[symptom_id]
            if entry.judgement is Judgement.NO and entry.exclusive:
                judgements[symptom_id] = "no (exclusive)"
            else:
                judgements[symptom_id] = entry.judgement.value
        return JSONResponse(
            {
                "disease_id": disease.id,
                "name": disease.name,
                "severe": disease.severe,
                "frequency": disease.frequency.value,
                "sex_ratio": {"male": disease.sex_ratio.male, "female": disease.sex_ratio.female},
                "judgements": judgements,
            }
        )

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
