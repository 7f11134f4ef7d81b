"""HTTP surface for the tutoring journey, consumed by the web client and
scripted clients.

Every response carries an `X-Api-Version` header. Errors use one envelope:
`{"error": {"code": ..., "message": ..., ...extras}}` with conventional
status codes (400 validation, 401 auth, 404 unknown resource, 409 out of
phase or wrong state, 502/503 gateway trouble).
"""

from __future__ import annotations

import logging
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, Header, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bank import ItemBank, bundled_bank, load_bank
from .errors import (
    AuthorizationError,
    BankLoadError,
    ConfigurationError,
    EmptyInputError,
    ExhaustedConceptError,
    InvalidParameterError,
    NotFoundError,
    ProtocolError,
    ProviderProtocolError,
    ProviderUnavailableError,
    ScriptValidationError,
    StateError,
    TutorKitError,
    UndefinedAUCError,
    ValidationError,
)
from .gateway import GatewayConfig, bundled_demo_script, load_script, make_provider
from .orchestrator import OrchestratorConfig, SessionRunner
from .storage import EventStore
from .students import profile_to_doc

logger = logging.getLogger(__name__)

API_VERSION = "1"

_STATUS_BY_ERROR = (
    (AuthorizationError, 401, "unauthorized"),
    (NotFoundError, 404, "not_found"),
    (ProtocolError, 409, "out_of_phase"),
    (StateError, 409, "state_conflict"),
    (ExhaustedConceptError, 409, "exhausted_concept"),
    (ProviderUnavailableError, 503, "gateway_unavailable"),
    (ProviderProtocolError, 502, "gateway_protocol"),
    (ConfigurationError, 422, "configuration_error"),
    (ValidationError, 400, "validation_error"),
    (BankLoadError, 400, "bank_error"),
    (ScriptValidationError, 400, "script_error"),
    (InvalidParameterError, 400, "validation_error"),
    (EmptyInputError, 400, "validation_error"),
    (UndefinedAUCError, 400, "validation_error"),
)


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the service needs: bank, storage root, and gateway wiring."""

    bank_source: str | None = None
    data_dir: str = "tutorkit-data"
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    cors_origins: tuple[str, ...] = ("*",)


class ServiceContext:
    """Shared state behind the endpoints: bank, store, tokens, live runners.

    Access to one student's journey is serialized by a per-student lock;
    distinct students proceed independently.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.bank: ItemBank = (
            load_bank(config.bank_source) if config.bank_source else bundled_bank()
        )
        self.store = EventStore(config.data_dir)
        self.script = None
        if config.gateway.provider == "mock":
            self.script = (
                load_script(config.gateway.script_path)
                if config.gateway.script_path
                else bundled_demo_script()
            )
        self.tokens: dict[str, str] = self.store.read_tokens()
        self._runners: dict[str, SessionRunner] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry = threading.Lock()

    def provider(self):
        return make_provider(self.config.gateway, self.script)

    def lock_for(self, student_id: str) -> threading.Lock:
        with self._registry:
            return self._locks.setdefault(student_id, threading.Lock())

    def create_student(self, student_id: str | None) -> tuple[str, str]:
        with self._registry:
            sid = student_id or f"student-{secrets.token_hex(4)}"
            if self.store.has_student(sid) or sid in self.tokens.values():
                raise StateError(f"student {sid!r} already exists")
            self.store.append_events(sid, [])  # claims the directory
            token = secrets.token_urlsafe(24)
            self.tokens[token] = sid
            self.store.write_tokens(self.tokens)
            return sid, token

    def authorize(self, student_id: str, authorization: str | None):
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthorizationError("missing bearer token")
        token = authorization[len("Bearer "):].strip()
        if self.tokens.get(token) != student_id:
            raise AuthorizationError("token does not grant access to this student")

    def runner_for(self, student_id: str) -> SessionRunner:
        if not self.store.has_student(student_id):
            raise NotFoundError(f"unknown student {student_id!r}")
        with self._registry:
            runner = self._runners.get(student_id)
            if runner is None:
                runner = SessionRunner.resume(
                    student_id, self.bank, self.provider(), self.store,
                    self.config.orchestrator,
                )
                self._runners[student_id] = runner
            return runner


def _form_payload(form, bank: ItemBank) -> dict:
    """Test form as shown to the student: no answers, no explanations."""
    return {
        "kind": form.kind,
        "concepts": list(form.concepts),
        "items": [
            {
                "item_id": item_id,
                "concept": bank.get(item_id).concept,
                "stem": bank.get(item_id).stem,
                "choices": [
                    {"label": c.label, "text": c.text} for c in bank.get(item_id).choices
                ],
            }
            for item_id in form.item_ids
        ],
    }


def _exercise_payloads(runner: SessionRunner) -> list[dict]:
    """Exercises in play, student view (answer key withheld)."""
    payloads = []
    for item_id in runner.state.exercises_in_play:
        ex = runner.bank.get(item_id)
        payloads.append(
            {
                "item_id": ex.item_id,
                "concept": ex.concept,
                "stem": ex.stem,
                "choices": [{"label": c.label, "text": c.text} for c in ex.choices],
            }
        )
    return payloads


def _report_doc(report) -> dict:
    return {
        "concept": report.concept,
        "theta_pre": report.theta_pre,
        "theta_post": report.theta_post,
        "prob_pre": report.prob_pre,
        "prob_post": report.prob_post,
        "gain": report.gain,
    }


def _journey_view(runner: SessionRunner) -> dict:
    state = runner.state
    return {
        "phase": state.phase.value,
        "current_concept": state.current_concept,
        "completed_concepts": list(state.completed_concepts),
        "session_index": state.session_index,
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    """Build the service application around one ServiceContext."""
    ctx = ServiceContext(config or ServiceConfig())
    app = FastAPI(title="tutorkit", version=API_VERSION, docs_url=None, redoc_url=None)
    app.state.ctx = ctx

    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(ctx.config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def stamp_version(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        response.headers["X-Api-Version"] = API_VERSION
        duration_ms = (time.perf_counter() - started) * 1000.0
        logger.info(
            "request method=%s path=%s status=%d duration_ms=%.1f",
            request.method, request.url.path, response.status_code, duration_ms,
        )
        return response

    @app.exception_handler(TutorKitError)
    async def on_domain_error(request: Request, exc: TutorKitError):
        status, code = 400, "validation_error"
        for klass, klass_status, klass_code in _STATUS_BY_ERROR:
            if isinstance(exc, klass):
                status, code = klass_status, klass_code
                break
        body = {"error": {"code": code, "message": str(exc)}}
        if isinstance(exc, ProtocolError) and exc.expected_phase:
            body["error"]["expected_phase"] = exc.expected_phase
        headers = {"X-Api-Version": API_VERSION}
        if status == 503:
            headers["Retry-After"] = "1"
        return JSONResponse(body, status_code=status, headers=headers)

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        if first.get("type") == "json_invalid":
            message = "request body is not valid JSON"
        else:
            where = ".".join(str(part) for part in first.get("loc", ()))
            message = f"invalid request: {first.get('msg', 'malformed input')} at {where}"
        body = {"error": {"code": "validation_error", "message": message}}
        return JSONResponse(body, status_code=400, headers={"X-Api-Version": API_VERSION})

    def with_idempotency(runner, key: str | None, slot: str, produce):
        """Return the recorded response for a repeated submission key."""
        if key:
            cache = ctx.store.read_aux(runner.student_id, "idempotency")
            cached = cache.get(f"{slot}:{key}")
            if cached is not None:
                return cached
        body = produce()
        if key:
            cache = ctx.store.read_aux(runner.student_id, "idempotency")
            cache[f"{slot}:{key}"] = body
            ctx.store.write_aux(runner.student_id, "idempotency", cache)
        return body

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/readyz")
    def readyz():
        try:
            ctx.provider()
        except TutorKitError as exc:
            return JSONResponse(
                {"status": "not_ready", "reason": str(exc)}, status_code=503
            )
        return {
            "status": "ready",
            "provider": ctx.config.gateway.provider,
            "bank_items": len(ctx.bank.exercises),
            "concepts": list(ctx.bank.concepts),
        }

    @app.post("/students", status_code=201)
    def create_student(body: dict | None = Body(None)):
        body = body or {}
        sid, token = ctx.create_student(body.get("student_id"))
        return {"student_id": sid, "token": token}

    @app.post("/students/{student_id}/survey")
    def submit_survey(
        student_id: str,
        body: dict = Body(...),
        authorization: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            runner.submit_survey(body)
            return _journey_view(runner)

    @app.get("/students/{student_id}/pretest")
    def get_pretest(student_id: str, authorization: str | None = Header(None)):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            return {"form": _form_payload(runner.pretest_form(), ctx.bank)}

    @app.post("/students/{student_id}/pretest")
    def submit_pretest(
        student_id: str,
        body: dict = Body(...),
        authorization: str | None = Header(None),
        idempotency_key: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)

            def produce():
                runner.submit_pretest(body.get("answers"), body.get("first_concept"))
                view = _journey_view(runner)
                view["exercises"] = _exercise_payloads(runner)
                view["profile"] = profile_to_doc(runner.profile)
                return view

            return with_idempotency(runner, idempotency_key, "pretest", produce)

    @app.post("/students/{student_id}/session")
    def start_session(student_id: str, authorization: str | None = Header(None)):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            exercises, opening = runner.start_session()
            view = _journey_view(runner)
            view["exercises"] = _exercise_payloads(runner)
            view["tutor_message"] = opening
            view["finished"] = runner.state.phase.value != "TutoringSession"
            return view

    @app.post("/students/{student_id}/chat")
    def chat(
        student_id: str,
        body: dict = Body(...),
        authorization: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            reply, finished = runner.handle_student_message(body.get("text", ""))
            view = _journey_view(runner)
            view["reply"] = reply
            view["finished"] = finished
            return view

    @app.get("/students/{student_id}/posttest")
    def get_posttest(student_id: str, authorization: str | None = Header(None)):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            return {"form": _form_payload(runner.posttest_form(), ctx.bank)}

    @app.post("/students/{student_id}/posttest")
    def submit_posttest(
        student_id: str,
        body: dict = Body(...),
        authorization: str | None = Header(None),
        idempotency_key: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)

            def produce():
                concept = runner.state.current_concept
                runner.submit_posttest(body.get("answers"))
                view = _journey_view(runner)
                view["report"] = _report_doc(runner.report(concept))
                return view

            return with_idempotency(runner, idempotency_key, "posttest", produce)

    @app.get("/students/{student_id}/report")
    def report(
        student_id: str,
        concept: str = Query(...),
        authorization: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            return _report_doc(runner.report(concept))

    @app.post("/students/{student_id}/concept")
    def choose_concept(
        student_id: str,
        body: dict | None = Body(None),
        authorization: str | None = Header(None),
    ):
        ctx.authorize(student_id, authorization)
        body = body or {}
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            runner.choose_concept(body.get("concept"))
            view = _journey_view(runner)
            view["exercises"] = _exercise_payloads(runner)
            return view

    @app.get("/students/{student_id}/profile")
    def profile(student_id: str, authorization: str | None = Header(None)):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            runner = ctx.runner_for(student_id)
            if runner.profile is None:
                raise StateError("no profile recorded yet; submit the survey first")
            view = _journey_view(runner)
            view["profile"] = profile_to_doc(runner.profile)
            return view

    @app.get("/students/{student_id}/transcript")
    def transcript(student_id: str, authorization: str | None = Header(None)):
        ctx.authorize(student_id, authorization)
        with ctx.lock_for(student_id):
            ctx.runner_for(student_id)  # 404 on unknown student
            events = ctx.store.read_events(student_id)
            return {"events": [e.to_dict() for e in events]}

    return app
