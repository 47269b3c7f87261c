"""HTTP service for debate sessions.

Endpoints mutate a session, recompute strengths, bump the revision by
exactly one and persist a snapshot before replying, so stored strengths
always equal a fresh evaluation of the stored tree.  Slow gateway work
(builds, expansions, chat classification) runs outside the session lock
and is applied optimistically: if the revision moved meanwhile the
result is discarded and the client gets a conflict.

Error bodies are JSON {code, message, field?} with stable codes.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, File, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import builder, documents, gateway, qbaf, semantics, store
from .builder import BuildError, GenerationConfig, InvalidConfigError
from .documents import EncryptedPdfError, NotAPdfError, TooLargeError
from .gateway import BackendConfig, GatewayError, REDACTED
from .store import ChatEntry, Session, SessionStore, Settings, UnknownSessionError, now_iso

logger = logging.getLogger("argkit.service")

MAX_DOCUMENTS = 5


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None, extra: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field = field
        self.extra = extra or {}

    def body(self) -> dict:
        body = {"code": self.code, "message": str(self)}
        if self.field:
            body["field"] = self.field
        body.update(self.extra)
        return body


def _translate(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, UnknownSessionError):
        return ApiError(404, "unknown-session", str(exc))
    if isinstance(exc, qbaf.UnknownArgumentError):
        return ApiError(404, "unknown-argument", str(exc))
    if isinstance(exc, qbaf.DepthLimitError):
        return ApiError(409, "depth-limit-exceeded", str(exc))
    if isinstance(exc, qbaf.InvalidScoreError):
        return ApiError(422, "invalid-score", str(exc))
    if isinstance(exc, BuildError):
        return ApiError(502, "build-failed", str(exc), extra={"report": exc.report()})
    if isinstance(exc, InvalidConfigError):
        return ApiError(422, "invalid-config", str(exc))
    if isinstance(exc, TooLargeError):
        return ApiError(413, "too-large", str(exc))
    if isinstance(exc, NotAPdfError):
        return ApiError(415, "not-a-pdf", str(exc))
    if isinstance(exc, EncryptedPdfError):
        return ApiError(415, "encrypted-pdf", str(exc))
    if isinstance(exc, gateway.BackendConfigError):
        return ApiError(422, "invalid-backend-config", str(exc))
    if isinstance(exc, GatewayError):
        return ApiError(502, exc.code, str(exc))
    if isinstance(exc, store.StoreError):
        return ApiError(500, "storage-failure", str(exc))
    logger.exception("unhandled service error")
    return ApiError(500, "internal-error", str(exc))


def _require_str(payload: dict, key: str, code: str = "invalid-payload") -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ApiError(422, code, f"{key} must be a string", field=key)
    return value


def _parse_settings(payload, current: Settings) -> Settings:
    if not isinstance(payload, dict):
        raise ApiError(422, "invalid-settings", "settings body must be an object")
    semantics_id = payload.get("semantics", current.semantics)
    if semantics_id not in semantics.SEMANTICS_IDS:
        raise ApiError(422, "invalid-settings", f"semantics must be one of {list(semantics.SEMANTICS_IDS)}", field="semantics")
    depth = payload.get("depth", current.depth)
    if isinstance(depth, bool) or depth not in (1, 2):
        raise ApiError(422, "invalid-settings", "depth must be 1 or 2", field="depth")
    breadth = payload.get("breadth", current.breadth)
    if isinstance(breadth, bool) or breadth not in (1, 2, 3, 4):
        raise ApiError(422, "invalid-settings", "breadth must be between 1 and 4", field="breadth")

    backend = current.backend
    if "backend" in payload:
        obj = payload["backend"]
        if not isinstance(obj, dict):
            raise ApiError(422, "invalid-settings", "backend must be an object", field="backend")
        merged = store.backend_to_obj(current.backend, redact=False)
        merged.update(obj)
        # the wire sentinel means "keep the stored key"
        if merged.get("api_key") == REDACTED:
            merged["api_key"] = current.backend.api_key
        try:
            backend = store.backend_from_obj(merged)
        except (gateway.BackendConfigError, TypeError, ValueError) as exc:
            raise ApiError(422, "invalid-settings", str(exc), field="backend")
    return Settings(semantics=semantics_id, depth=depth, breadth=breadth, backend=backend)


def _generation_config(settings: Settings, docs: list[documents.Document]) -> GenerationConfig:
    return GenerationConfig(
        backend=settings.backend,
        semantics=settings.semantics,
        depth=settings.depth,
        breadth=settings.breadth,
        document_ids=tuple(d.id for d in docs),
    )


def create_app(
    store_dir: str,
    cors_origin: str | None = None,
    ui_dir: str | None = None,
    default_settings: Settings | None = None,
) -> FastAPI:
    app = FastAPI(title="argkit session service", docs_url=None, redoc_url=None)
    sessions = SessionStore(store_dir)
    app.state.store = sessions

    if cors_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(ApiError)
    def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(exc.body(), status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    def _payload_error(_request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "invalid-payload", "message": str(exc.errors()[:1])}, status_code=422)

    def _session(session_id: str) -> Session:
        try:
            return sessions.get(session_id)
        except Exception as exc:
            raise _translate(exc)

    def _apply_claim(session_id: str, text: str) -> Session:
        """Build a fresh tree for `text`; replaces any prior one."""
        if not text.strip():
            raise ApiError(422, "empty-claim", "claim text must be non-empty", field="text")
        lock = sessions.lock(session_id)
        with lock:
            session = _session(session_id)
            revision = session.revision
            settings = session.settings
            docs = list(session.documents)
        try:
            result = builder.build_qbaf(text, _generation_config(settings, docs), docs)
            strengths = semantics.evaluate(result.qbaf, settings.semantics)
        except Exception as exc:
            raise _translate(exc)
        with lock:
            session = _session(session_id)
            if session.revision != revision:
                raise ApiError(409, "conflict", "session changed while the tree was being built")
            session.qbaf = result.qbaf
            session.strengths = strengths
            session.score_flags = dict(result.score_flags)
            sigma = strengths[result.qbaf.root]
            label = store.verdict_of(strengths, result.qbaf.root)["label"]
            session.chat.append(ChatEntry("user", text, now_iso()))
            session.chat.append(
                ChatEntry(
                    "assistant",
                    f"Built an argument tree with {len(result.qbaf.arguments)} arguments. "
                    f"Final confidence in the claim: {sigma:.2f} ({label}).",
                    now_iso(),
                )
            )
            session.revision += 1
            sessions.save(session)
            return session

    @app.get("/healthz")
    def healthz():
        return PlainTextResponse("ok")

    @app.post("/sessions", status_code=201)
    def create_session():
        session = sessions.create(default_settings)
        return {"session": store.session_to_api(session)}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        with sessions.lock(session_id):
            return {"session": store.session_to_api(_session(session_id))}

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with sessions.lock(session_id):
            try:
                sessions.delete(session_id)
            except Exception as exc:
                raise _translate(exc)

    @app.put("/sessions/{session_id}/settings")
    def update_settings(session_id: str, payload: dict):
        with sessions.lock(session_id):
            session = _session(session_id)
            new_settings = _parse_settings(payload, session.settings)
            semantics_changed = new_settings.semantics != session.settings.semantics
            session.settings = new_settings
            if session.qbaf is not None and semantics_changed:
                session.strengths = semantics.evaluate(session.qbaf, new_settings.semantics)
            session.revision += 1
            sessions.save(session)
            return {"session": store.session_to_api(session)}

    @app.post("/sessions/{session_id}/claim")
    def submit_claim(session_id: str, payload: dict):
        text = _require_str(payload, "text")
        session = _apply_claim(session_id, text)
        return {"session": store.session_to_api(session)}

    @app.patch("/sessions/{session_id}/arguments/{argument_id}")
    def patch_base_score(session_id: str, argument_id: str, payload: dict):
        value = payload.get("base_score")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ApiError(422, "invalid-score", "base_score must be a number", field="base_score")
        with sessions.lock(session_id):
            session = _session(session_id)
            if session.qbaf is None:
                raise ApiError(409, "no-qbaf", "submit a claim before editing scores")
            before = session.strengths[session.qbaf.root]
            try:
                session.qbaf = qbaf.set_base_score(session.qbaf, argument_id, float(value))
            except Exception as exc:
                raise _translate(exc)
            session.strengths = semantics.evaluate(session.qbaf, session.settings.semantics)
            session.revision += 1
            sessions.save(session)
            after = session.strengths[session.qbaf.root]
            return {
                "session": store.session_to_api(session),
                "root_strength_before": before,
                "root_strength_after": after,
            }

    @app.post("/sessions/{session_id}/arguments")
    def add_argument(session_id: str, payload: dict):
        parent = _require_str(payload, "parent")
        polarity = _require_str(payload, "polarity")
        mode = _require_str(payload, "mode")
        if polarity not in qbaf.POLARITIES:
            raise ApiError(422, "invalid-payload", "polarity must be attack or support", field="polarity")
        if mode not in ("manual", "generate"):
            raise ApiError(422, "invalid-payload", "mode must be manual or generate", field="mode")
        manual_text = payload.get("text")
        manual_score = payload.get("base_score")
        if mode == "manual":
            if not isinstance(manual_text, str) or not manual_text.strip():
                raise ApiError(422, "invalid-payload", "manual mode requires text", field="text")
            manual_text = manual_text.strip()
            if manual_score is not None and (
                not isinstance(manual_score, (int, float)) or isinstance(manual_score, bool) or not 0.0 <= manual_score <= 1.0
            ):
                raise ApiError(422, "invalid-score", "base_score must be in [0,1]", field="base_score")

        def _attach(session: Session, tree, new_id: str, score_flag: str | None):
            session.qbaf = tree
            if score_flag:
                session.score_flags[new_id] = score_flag
            session.strengths = semantics.evaluate(tree, session.settings.semantics)
            session.revision += 1
            sessions.save(session)
            return {"session": store.session_to_api(session), "argument_id": new_id}

        lock = sessions.lock(session_id)
        with lock:
            session = _session(session_id)
            if session.qbaf is None:
                raise ApiError(409, "no-qbaf", "submit a claim before adding arguments")
            tree = session.qbaf
            try:
                parent_text = tree.argument(parent).text
            except qbaf.UnknownArgumentError as exc:
                raise ApiError(404, "unknown-parent", str(exc))
            if mode == "manual" and manual_score is not None:
                # no gateway work: serialise fully under the lock
                try:
                    new_tree = qbaf.add_argument(tree, parent, polarity, manual_text, float(manual_score), "user-added")
                except Exception as exc:
                    raise _translate(exc)
                return _attach(session, new_tree, new_tree.arguments[-1].id, None)
            revision = session.revision
            settings = session.settings
            docs = list(session.documents)

        # gateway-backed paths run outside the lock, applied optimistically
        try:
            if mode == "generate":
                result = builder.expand_argument(tree, parent, polarity, _generation_config(settings, docs), docs)
                new_tree, new_id = result.qbaf, result.new_ids[0]
                score_flag = result.score_flags[new_id]
            else:
                backend = gateway.make_backend(settings.backend)
                context = builder.resolve_context(_generation_config(settings, docs), docs)
                elicited = gateway.elicit_base_score(backend, manual_text, context=context, parent=parent_text)
                new_tree = qbaf.add_argument(tree, parent, polarity, manual_text, elicited.value, "user-added")
                new_id = new_tree.arguments[-1].id
                score_flag = "defaulted" if elicited.defaulted else "elicited"
        except Exception as exc:
            raise _translate(exc)

        with lock:
            session = _session(session_id)
            if session.revision != revision:
                raise ApiError(409, "conflict", "session changed while the argument was being prepared")
            return _attach(session, new_tree, new_id, score_flag)

    @app.post("/sessions/{session_id}/documents", status_code=201)
    def upload_document(session_id: str, file: UploadFile = File(...)):
        if file.content_type != "application/pdf":
            raise ApiError(415, "not-a-pdf", f"expected application/pdf, got {file.content_type}")
        data = file.file.read()
        if len(data) > documents.MAX_PDF_BYTES:
            raise ApiError(413, "too-large", f"{len(data)} bytes exceeds the {documents.MAX_PDF_BYTES} byte cap")
        with sessions.lock(session_id):
            session = _session(session_id)
            if len(session.documents) >= MAX_DOCUMENTS:
                raise ApiError(409, "document-limit", f"at most {MAX_DOCUMENTS} documents per session")
            try:
                doc = documents.pdf_to_markdown(data, filename=file.filename or "")
            except Exception as exc:
                raise _translate(exc)
            sessions.save_document(session_id, doc, data)
            session.documents.append(doc)
            session.chat.append(ChatEntry("system", f"[document attached: {doc.filename or doc.id}]", now_iso()))
            session.revision += 1
            sessions.save(session)
            body = {"session": store.session_to_api(session), "document": store.document_to_obj(doc, False)}
            if doc.extraction_empty:
                body["warning"] = "extraction-empty"
            return body

    @app.post("/sessions/{session_id}/chat")
    def post_chat(session_id: str, payload: dict):
        message = _require_str(payload, "message")
        if not message.strip():
            raise ApiError(422, "invalid-payload", "message must be non-empty", field="message")

        lock = sessions.lock(session_id)
        with lock:
            session = _session(session_id)
            has_tree = session.qbaf is not None
            revision = session.revision
            tree = session.qbaf
            strengths = dict(session.strengths or {})
            settings = session.settings
            docs = list(session.documents)
        if not has_tree:
            # first message on an empty session is the claim
            session = _apply_claim(session_id, message)
            return {"session": store.session_to_api(session), "reply": session.chat[-1].text, "applied": []}

        try:
            backend = gateway.make_backend(settings.backend)
            context = builder.resolve_context(_generation_config(settings, docs), docs)
            reply, contributions = gateway.classify_chat_contribution(backend, tree, strengths, message)
            scored = [
                (c, gateway.elicit_base_score(backend, c.text, context=context, parent=tree.argument(c.target).text))
                for c in contributions
            ]
        except Exception as exc:
            raise _translate(exc)

        with lock:
            session = _session(session_id)
            if session.revision != revision:
                raise ApiError(409, "conflict", "session changed while the message was being classified")
            applied = []
            new_tree = session.qbaf
            for contribution, score in scored:
                new_tree = qbaf.add_argument(
                    new_tree, contribution.target, contribution.polarity, contribution.text, score.value, "chat-derived"
                )
                new_id = new_tree.arguments[-1].id
                session.score_flags[new_id] = "defaulted" if score.defaulted else "elicited"
                applied.append(
                    {"target": contribution.target, "polarity": contribution.polarity, "argument_id": new_id}
                )
            session.qbaf = new_tree
            session.strengths = semantics.evaluate(new_tree, session.settings.semantics)
            session.chat.append(ChatEntry("user", message, now_iso()))
            session.chat.append(ChatEntry("assistant", reply, now_iso()))
            session.revision += 1
            sessions.save(session)
            return {"session": store.session_to_api(session), "reply": reply, "applied": applied}

    return app
