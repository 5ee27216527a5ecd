"""HTTP+JSON API over the store, the model registry, and the analytics.

All errors share one shape: {"code", "message", "field_errors": [...]}.
Authentication is a static bearer-token map from config; the admin
retrain endpoint uses a separate admin token. The model registry swap is
atomic per scope, so readers never observe a half-updated model/report
pair.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import analytics, forest
from .config import AppConfig
from .domain import (
    Friendship,
    MoodInput,
    MoodSource,
    SensorSample,
    decode_mood_state,
    utc_now,
)
from .errors import (
    ConfigurationError,
    HappimeterError,
    NotFoundError,
    SchedulingError,
    ValidationError,
)
from .features import (
    FEATURE_NAMES,
    AssembledFeatures,
    LabeledExample,
    assemble_features,
    build_labeled_example,
    resolve_zone,
)
from .forest import ModelScope
from .csvio import format_ts, parse_ts
from .sampling import due_prompt, generate_schedule
from .store import Store
from .weather import CachedWeather, make_weather

MAX_BATCH = 1000


class ApiError(HappimeterError):
    def __init__(
        self,
        status: int,
        code: str,
        message: str,
        field_errors: list[dict[str, str]] | None = None,
    ):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field_errors = field_errors or []


@dataclass(frozen=True)
class RegistryEntry:
    models: dict[str, forest.ForestModel]
    reports: dict[str, forest.EvaluationReport | None]
    trained_at: datetime


class ModelRegistry:
    """Per-scope latest models; swapped whole so reads are consistent."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._entries: dict[tuple[str, str | None], RegistryEntry] = {}

    def put(self, kind: str, user: str | None, entry: RegistryEntry) -> None:
        with self._lock:
            self._entries[(kind, user)] = entry

    def get(self, kind: str, user: str | None = None) -> RegistryEntry | None:
        with self._lock:
            return self._entries.get((kind, user))

    def for_user(self, user: str) -> tuple[RegistryEntry, str] | None:
        """The user's individual entry when present, else the general one."""
        with self._lock:
            entry = self._entries.get(("individual", user))
            if entry is not None:
                return entry, "individual"
            entry = self._entries.get(("general", None))
            if entry is not None:
                return entry, "general"
            return None


def _error_response(status: int, code: str, message: str, field_errors=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "field_errors": field_errors or []},
    )


def create_app(
    cfg: AppConfig,
    store: Store | None = None,
    weather: CachedWeather | None = None,
    clock: Callable[[], datetime] | None = None,
) -> FastAPI:
    store = store if store is not None else Store()
    weather = weather if weather is not None else make_weather(cfg.weather)
    clock = clock or utc_now
    registry = ModelRegistry()
    train_lock = threading.Lock()

    app = FastAPI(title="happimeter", docs_url=None, redoc_url=None)
    app.state.cfg = cfg
    app.state.store = store
    app.state.weather = weather
    app.state.registry = registry

    # -- plumbing -----------------------------------------------------------

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError) -> JSONResponse:
        return _error_response(exc.status, exc.code, exc.message, exc.field_errors)

    @app.exception_handler(ValidationError)
    async def _validation_error(_req: Request, exc: ValidationError) -> JSONResponse:
        return _error_response(400, "validation_error", str(exc))

    @app.exception_handler(NotFoundError)
    async def _not_found(_req: Request, exc: NotFoundError) -> JSONResponse:
        return _error_response(404, "not_found", str(exc))

    @app.exception_handler(ConfigurationError)
    async def _config_error(_req: Request, exc: ConfigurationError) -> JSONResponse:
        return _error_response(400, "configuration_error", str(exc))

    @app.exception_handler(SchedulingError)
    async def _scheduling_error(_req: Request, exc: SchedulingError) -> JSONResponse:
        return _error_response(400, "scheduling_error", str(exc))

    @app.exception_handler(Exception)
    async def _internal(_req: Request, exc: Exception) -> JSONResponse:
        return _error_response(500, "internal", f"{type(exc).__name__}: {exc}")

    def _bearer(request: Request) -> str | None:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            return None
        return header[7:].strip()

    def _auth(request: Request) -> str:
        token = _bearer(request)
        user = cfg.tokens.get(token) if token else None
        if user is None:
            raise ApiError(401, "unauthorized", "missing or unknown bearer token")
        return user

    def _auth_admin(request: Request) -> None:
        token = _bearer(request)
        if cfg.admin_token is None or token != cfg.admin_token:
            raise ApiError(401, "unauthorized", "admin token required")

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "malformed_body", "request body must be a JSON object")
        if not isinstance(body, dict):
            raise ApiError(400, "malformed_body", "request body must be a JSON object")
        return body

    def _zone_of(user: str) -> str:
        profile = store.profile_for(user)
        return profile.timezone if profile is not None else cfg.featurize.default_timezone

    # -- featurize/predict helpers -------------------------------------------

    def _assemble_now(user: str) -> AssembledFeatures:
        assembled = assemble_features(
            store.sensors_for(user),
            clock(),
            weather.lookup_or_none,
            cfg.featurize,
            _zone_of(user),
        )
        if isinstance(assembled, str):
            raise ApiError(
                409,
                "no_current_features",
                f"cannot build features right now ({assembled})",
            )
        return assembled

    def _predict_mood(user: str) -> dict[str, Any]:
        assembled = _assemble_now(user)
        located = registry.for_user(user)
        if located is None:
            raise ApiError(409, "no_model", "no trained model yet; run admin retrain")
        entry, scope_kind = located
        model = entry.models["mood_state"]
        prediction = forest.predict(model, assembled.features.as_array())
        pleasance, activation = decode_mood_state(prediction.label)
        return {
            "pleasance": pleasance,
            "activation": activation,
            "mood_state": prediction.label,
            "scope": scope_kind,
            "as_of": format_ts(clock()),
            "distribution": {str(k): v for k, v in sorted(prediction.distribution.items())},
        }

    def _examples_for(users: list[str]) -> list[LabeledExample]:
        out: list[LabeledExample] = []
        for u in users:
            history = store.sensors_for(u)
            zone = _zone_of(u)
            for mood in store.moods_for(u):
                ex = build_labeled_example(
                    mood, history, weather.lookup_or_none, cfg.featurize, zone
                )
                if isinstance(ex, LabeledExample):
                    out.append(ex)
        return out

    def _dataset(examples: list[LabeledExample], target: str) -> forest.Dataset:
        from .pipeline import dataset_for

        return dataset_for(examples, target)

    def _train_entry(
        kind: str,
        user: str | None,
        examples: list[LabeledExample],
        evaluate: bool,
        folds: int,
    ) -> dict[str, Any]:
        scope = ModelScope.general() if kind == "general" else ModelScope.individual(user)
        models: dict[str, forest.ForestModel] = {}
        reports: dict[str, forest.EvaluationReport | None] = {}
        evaluated = False
        for target in forest.TARGETS:
            data = _dataset(examples, target)
            models[target] = forest.train_forest(data, target, scope, cfg.forest, cfg.n_jobs)
            if evaluate and 2 <= folds <= len(data):
                reports[target] = forest.cross_validate(
                    data, target, cfg.forest, k=folds, scope=scope, n_jobs=cfg.n_jobs
                )
                evaluated = True
            else:
                reports[target] = None
        registry.put(kind, user, RegistryEntry(models, reports, clock()))
        return {
            "scope": kind,
            "user": user,
            "targets": list(forest.TARGETS),
            "n_examples": len(examples),
            "skipped": False,
            "reason": None,
            "evaluated": evaluated,
        }

    def _skipped(kind: str, user: str | None, reason: str) -> dict[str, Any]:
        return {
            "scope": kind,
            "user": user,
            "targets": [],
            "n_examples": 0,
            "skipped": True,
            "reason": reason,
            "evaluated": False,
        }

    # -- ingestion ------------------------------------------------------------

    @app.post("/api/sensors/batch")
    async def sensors_batch(request: Request) -> dict[str, Any]:
        user = _auth(request)
        body = await _json_body(request)
        samples = body.get("samples")
        if not isinstance(samples, list):
            raise ApiError(
                400, "validation_error", "body must contain a 'samples' array",
                [{"field": "samples", "error": "required array"}],
            )
        if len(samples) > MAX_BATCH:
            raise ApiError(
                400, "validation_error",
                f"batch too large: {len(samples)} > {MAX_BATCH}",
                [{"field": "samples", "error": f"at most {MAX_BATCH} items"}],
            )
        accepted = 0
        rejected: list[dict[str, Any]] = []
        for index, raw in enumerate(samples):
            try:
                if not isinstance(raw, dict):
                    raise ValidationError("sample must be an object")
                lat = raw.get("lat")
                lon = raw.get("lon")
                sample = SensorSample(
                    user=user,
                    timestamp=parse_ts(str(raw["timestamp_utc"]), "sample"),
                    heart_rate=float(raw["heart_rate_bpm"]),
                    activity=int(raw["activity_level"]),
                    vmc=float(raw["vmc"]),
                    light_level=int(raw["light_level"]),
                    latitude=float(lat) if lat is not None else None,
                    longitude=float(lon) if lon is not None else None,
                )
            except (KeyError, TypeError, ValueError, ValidationError) as exc:
                reason = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                rejected.append({"index": index, "reason": reason})
                continue
            store.append_sensor(sample)
            accepted += 1
        return {"accepted": accepted, "rejected": rejected}

    @app.post("/api/mood")
    async def submit_mood(request: Request) -> dict[str, Any]:
        user = _auth(request)
        body = await _json_body(request)
        field_errors = []
        for field_name in ("pleasance", "activation"):
            value = body.get(field_name)
            if not isinstance(value, int) or value not in (0, 1, 2):
                field_errors.append({"field": field_name, "error": "must be 0, 1 or 2"})
        source_raw = body.get("source", "manual")
        if source_raw not in ("manual", "prompted"):
            field_errors.append({"field": "source", "error": "must be manual or prompted"})
        if field_errors:
            raise ApiError(400, "validation_error", "invalid mood input", field_errors)

        now = clock()
        at = now
        if body.get("timestamp_utc") is not None:
            at = parse_ts(str(body["timestamp_utc"]), "mood")
        mood = MoodInput(
            user=user,
            timestamp=at,
            pleasance=body["pleasance"],
            activation=body["activation"],
            source=MoodSource(source_raw),
        )
        if mood.is_future_of(now):
            raise ApiError(
                400, "validation_error", "timestamp is in the future",
                [{"field": "timestamp_utc", "error": "beyond allowed clock skew"}],
            )
        store.append_mood(mood)

        answered_prompt = None
        if mood.source is MoodSource.PROMPTED:
            zone_id = _zone_of(user)
            local_day = mood.timestamp.astimezone(resolve_zone(zone_id)).date()
            schedule = generate_schedule(user, local_day, zone_id, cfg.seed, cfg.sampling)
            due = due_prompt(schedule, mood.timestamp, store.answered_prompts(user))
            if due is not None:
                store.mark_answered(user, due.prompt_id)
                answered_prompt = due.prompt_id

        example = build_labeled_example(
            mood, store.sensors_for(user), weather.lookup_or_none,
            cfg.featurize, _zone_of(user),
        )
        joined = isinstance(example, LabeledExample)
        return {
            "id": f"{user}/{format_ts(mood.timestamp)}",
            "mood_state": mood.mood_state,
            "joined": joined,
            "drop_reason": None if joined else example.reason,
            "answered_prompt": answered_prompt,
        }

    # -- prediction and friends -----------------------------------------------

    @app.get("/api/mood/predicted")
    async def predicted_mood(request: Request) -> dict[str, Any]:
        user = _auth(request)
        return _predict_mood(user)

    @app.get("/api/friends/moods")
    async def friends_moods(request: Request) -> dict[str, Any]:
        user = _auth(request)
        friends = []
        for friend in store.visible_friends(user):
            moods = store.moods_for(friend)
            payload: dict[str, Any] | None = None
            if moods:
                latest = moods[-1]
                payload = {
                    "kind": "input",
                    "pleasance": latest.pleasance,
                    "activation": latest.activation,
                    "mood_state": latest.mood_state,
                    "timestamp_utc": format_ts(latest.timestamp),
                }
            else:
                try:
                    predicted = _predict_mood(friend)
                    payload = {
                        "kind": "predicted",
                        "pleasance": predicted["pleasance"],
                        "activation": predicted["activation"],
                        "mood_state": predicted["mood_state"],
                        "timestamp_utc": predicted["as_of"],
                    }
                except ApiError:
                    payload = None
            friends.append({"user": friend, "mood": payload})
        return {"friends": friends}

    def _friendship_payload(f: Friendship) -> dict[str, Any]:
        return {
            "a": f.a,
            "b": f.b,
            "status": f.status.value,
            "share_mood_a_to_b": f.share_mood_a_to_b,
            "share_mood_b_to_a": f.share_mood_b_to_a,
            "requested_by": f.requested_by,
        }

    @app.post("/api/friends/{action}")
    async def friend_action(action: str, request: Request) -> dict[str, Any]:
        user = _auth(request)
        body = await _json_body(request)
        target = body.get("target")
        if not isinstance(target, str) or not target:
            raise ApiError(
                400, "validation_error", "missing friend target",
                [{"field": "target", "error": "required string"}],
            )
        if action == "request":
            return _friendship_payload(store.request_friend(user, target))
        if action == "accept":
            return _friendship_payload(store.accept_friend(user, target))
        if action == "unfriend":
            store.unfriend(user, target)
            return {"deleted": True, "target": target}
        if action == "set_sharing":
            share = body.get("share")
            if not isinstance(share, bool):
                raise ApiError(
                    400, "validation_error", "missing share flag",
                    [{"field": "share", "error": "required boolean"}],
                )
            return _friendship_payload(store.set_sharing(user, target, share))
        raise ApiError(400, "validation_error", f"unknown friend action {action!r}")

    # -- insights and stats ----------------------------------------------------

    @app.get("/api/insights")
    async def insights(request: Request) -> dict[str, Any]:
        user = _auth(request)

        importance_block: dict[str, Any] = {
            "scope": None, "fallback": False,
            "by_decrease": [], "by_nodes": [], "reason": None,
        }
        located = registry.for_user(user)
        if located is None:
            importance_block["reason"] = "no trained model yet"
        else:
            entry, scope_kind = located
            report = forest.feature_importance(entry.models["mood_state"])
            importance_block["scope"] = scope_kind
            importance_block["fallback"] = scope_kind == "general"
            importance_block["by_decrease"] = [
                {"feature": name, "value": value}
                for name, value in report.ranked_by_decrease()
            ]
            importance_block["by_nodes"] = [
                {"feature": name, "count": count}
                for name, count in report.ranked_by_nodes()
            ]
            if importance_block["fallback"]:
                importance_block["reason"] = "no individual model; showing the general model"

        influencer_block: dict[str, Any] = {"items": [], "reason": None}
        visible = store.visible_friends(user)
        if not visible:
            influencer_block["reason"] = "no friends sharing mood data"
        else:
            subject_moods = store.moods_for(user)
            subject_samples = store.sensors_for(user)
            pleasance = [m.pleasance for m in subject_moods]
            scores = []
            for friend in visible:
                indicators = analytics.copresence_events(
                    subject_moods,
                    subject_samples,
                    store.sensors_for(friend),
                    radius_m=cfg.influence.radius_m,
                    slack_s=cfg.influence.slack_minutes * 60.0,
                )
                score = analytics.friend_influence(
                    user, friend, pleasance, indicators,
                    min_events=cfg.influence.min_events,
                )
                if score is not None:
                    scores.append(score)
            if not scores:
                influencer_block["reason"] = "not enough co-presence data"
            influencer_block["items"] = [
                {
                    "friend": s.friend,
                    "r": s.r,
                    "n_events": s.n_events,
                    "direction": s.direction,
                }
                for s in analytics.rank_influences(scores)
            ]
        return {"importance": importance_block, "influencers": influencer_block}

    def _own_examples(user: str) -> list[LabeledExample]:
        return _examples_for([user])

    @app.get("/api/stats/descriptive")
    async def stats_descriptive(request: Request) -> dict[str, Any]:
        user = _auth(request)
        examples = _own_examples(user)
        if not examples:
            return {"available": False, "reason": "no joinable mood inputs yet"}
        report = analytics.descriptive_stats(
            [(ex.pleasance, ex.activation) for ex in examples]
        )
        def block(d):
            return {
                "counts": d.counts, "percentages": d.percentages,
                "mean": d.mean, "sd": d.sd, "n": d.n,
            }
        return {
            "available": True,
            "pleasance": block(report.pleasance),
            "activation": block(report.activation),
            "n": report.n,
        }

    @app.get("/api/stats/hourly")
    async def stats_hourly(request: Request) -> dict[str, Any]:
        user = _auth(request)
        examples = _own_examples(user)
        profile = analytics.hourly_profile(examples)
        return {
            "hours": [
                {
                    "hour": hour,
                    "mean_pleasance": point.mean_pleasance,
                    "mean_activation": point.mean_activation,
                    "n": point.n,
                }
                for hour, point in sorted(profile.items())
            ]
        }

    @app.get("/api/stats/correlations")
    async def stats_correlations(request: Request) -> dict[str, Any]:
        user = _auth(request)
        examples = _own_examples(user)
        if not examples:
            return {"available": False, "reason": "no joinable mood inputs yet", "cells": []}
        profile = store.profile_for(user)
        rows = analytics.build_correlation_rows(
            examples, {user: profile} if profile else {}
        )
        matrix = analytics.correlation_matrix(rows, analytics.TABLE_VARIABLES)
        cells = []
        for i, va in enumerate(matrix.variables):
            for j in range(i + 1, len(matrix.variables)):
                cell = matrix.cells[i][j]
                if cell is not None:
                    cells.append({
                        "a": va, "b": matrix.variables[j],
                        "r": cell.r, "stars": cell.stars, "n": cell.n,
                    })
        return {"available": True, "variables": list(matrix.variables), "cells": cells}

    # -- schedule ---------------------------------------------------------------

    @app.get("/api/schedule/today")
    async def schedule_today(request: Request) -> dict[str, Any]:
        user = _auth(request)
        zone_id = _zone_of(user)
        now = clock()
        local_day = now.astimezone(resolve_zone(zone_id)).date()
        schedule = generate_schedule(user, local_day, zone_id, cfg.seed, cfg.sampling)
        answered = store.answered_prompts(user)
        due = due_prompt(schedule, now, answered)
        return {
            "date": local_day.isoformat(),
            "zone": zone_id,
            "prompts": [
                {
                    "id": p.prompt_id,
                    "fire_at": format_ts(p.fire_at),
                    "expires_at": format_ts(p.expires_at),
                    "answered": p.prompt_id in answered,
                }
                for p in schedule.prompts
            ],
            "due": due.prompt_id if due is not None else None,
        }

    # -- admin ------------------------------------------------------------------

    @app.post("/api/admin/retrain")
    async def admin_retrain(request: Request) -> dict[str, Any]:
        _auth_admin(request)
        body = await _json_body(request)
        scope = body.get("scope", "general")
        if scope not in ("general", "individual", "all"):
            raise ApiError(
                400, "validation_error", "scope must be general, individual or all",
                [{"field": "scope", "error": "general|individual|all"}],
            )
        evaluate = bool(body.get("evaluate", True))
        folds = int(body.get("folds", 10))
        jobs: list[dict[str, Any]] = []
        with train_lock:
            if scope in ("general", "all"):
                examples = _examples_for(store.users())
                if examples:
                    jobs.append(_train_entry("general", None, examples, evaluate, folds))
                else:
                    jobs.append(_skipped("general", None, "no joinable examples"))
            if scope == "individual":
                user = body.get("user")
                if not isinstance(user, str) or not user:
                    raise ApiError(
                        400, "validation_error", "individual scope requires a user",
                        [{"field": "user", "error": "required string"}],
                    )
                jobs.append(_retrain_individual(user, evaluate, folds))
            elif scope == "all":
                for user in store.users():
                    jobs.append(_retrain_individual(user, evaluate, folds))
        return {"jobs": jobs}

    def _retrain_individual(user: str, evaluate: bool, folds: int) -> dict[str, Any]:
        examples = _examples_for([user])
        if len(examples) < cfg.min_train_examples:
            return _skipped(
                "individual", user,
                f"{len(examples)} joinable examples < min_train_examples="
                f"{cfg.min_train_examples}",
            )
        return _train_entry("individual", user, examples, evaluate, folds)

    return app


def run_server(cfg: AppConfig, host: str = "127.0.0.1") -> None:
    """Blocking serve-forever entry point used by the CLI."""
    import uvicorn
    from pathlib import Path

    store = Store(Path(cfg.data_dir) / "events.jsonl")
    app = create_app(cfg, store=store)
    uvicorn.run(app, host=host, port=cfg.port, log_level="warning")
