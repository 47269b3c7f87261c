"""Live debate sessions and their file-snapshot persistence.

One canonical-JSON snapshot per session, written atomically
(write-temp + rename) on every mutation, so a session reloaded after a
crash equals the in-memory one.  Uploaded documents keep their raw
bytes and extracted markdown side by side under the session's own
directory.  Mutations on one session serialise through a per-session
lock owned by the store.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import qbaf as qbaf_mod
from . import semantics
from .documents import Document
from .gateway import REDACTED, BackendConfig
from .qbaf import Qbaf

SNAPSHOT_VERSION = 1


class StoreError(Exception):
    code = "storage-failure"


class UnknownSessionError(StoreError):
    code = "unknown-session"


@dataclass(frozen=True)
class Settings:
    semantics: str = semantics.DF_QUAD
    depth: int = 2
    breadth: int = 1
    backend: BackendConfig = field(default_factory=BackendConfig)


@dataclass
class ChatEntry:
    role: str
    text: str
    ts: str


@dataclass
class Session:
    id: str
    settings: Settings
    qbaf: Qbaf | None = None
    strengths: dict[str, float] | None = None
    score_flags: dict[str, str] = field(default_factory=dict)
    documents: list[Document] = field(default_factory=list)
    chat: list[ChatEntry] = field(default_factory=list)
    revision: int = 0


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def default_settings() -> Settings:
    # df-quad at depth 2, breadth 1; deterministic mock until a key is configured
    return Settings(backend=BackendConfig(kind="mock", mock_seed=0))


def backend_to_obj(config: BackendConfig, redact: bool) -> dict:
    return {
        "kind": config.kind,
        "endpoint_url": config.endpoint_url,
        "model": config.model,
        "api_key": (REDACTED if config.api_key else "") if redact else config.api_key,
        "temperature": config.temperature,
        "timeout": config.timeout,
        "mock_seed": config.mock_seed,
        "mock_script": [list(pair) for pair in config.mock_script],
    }


def backend_from_obj(obj: dict) -> BackendConfig:
    return BackendConfig(
        kind=obj.get("kind", "mock"),
        endpoint_url=obj.get("endpoint_url", ""),
        model=obj.get("model", ""),
        api_key=obj.get("api_key", ""),
        temperature=obj.get("temperature", 0.0),
        timeout=obj.get("timeout", 30.0),
        mock_seed=obj.get("mock_seed", 0),
        mock_script=tuple((str(a), str(b)) for a, b in obj.get("mock_script", [])),
    )


def settings_to_obj(settings: Settings, redact: bool) -> dict:
    return {
        "semantics": settings.semantics,
        "depth": settings.depth,
        "breadth": settings.breadth,
        "backend": backend_to_obj(settings.backend, redact),
    }


def document_to_obj(doc: Document, include_markdown: bool) -> dict:
    obj = {
        "id": doc.id,
        "filename": doc.filename,
        "page_count": doc.page_count,
        "byte_size": doc.byte_size,
        "uploaded_at": doc.uploaded_at,
        "extraction_empty": doc.extraction_empty,
    }
    if include_markdown:
        obj["markdown"] = doc.markdown
    return obj


def verdict_of(strengths: dict[str, float] | None, root: str | None) -> dict | None:
    if strengths is None or root is None:
        return None
    sigma = strengths[root]
    label = "accept" if sigma > 0.5 else "reject" if sigma < 0.5 else "undecided"
    return {"root_strength": sigma, "label": label}


def session_to_api(session: Session) -> dict:
    """Wire view: backend api_key always redacted, documents metadata only."""
    tree = session.qbaf
    return {
        "id": session.id,
        "revision": session.revision,
        "settings": settings_to_obj(session.settings, redact=True),
        "qbaf": qbaf_mod.to_json_obj(tree) if tree is not None else None,
        "strengths": {k: session.strengths[k] for k in sorted(session.strengths)} if session.strengths else None,
        "verdict": verdict_of(session.strengths, tree.root if tree else None),
        "score_flags": {k: session.score_flags[k] for k in sorted(session.score_flags)},
        "documents": [document_to_obj(d, include_markdown=False) for d in session.documents],
        "chat": [{"role": e.role, "text": e.text, "ts": e.ts} for e in session.chat],
    }


def snapshot_obj(session: Session) -> dict:
    obj = session_to_api(session)
    obj["version"] = SNAPSHOT_VERSION
    obj["settings"] = settings_to_obj(session.settings, redact=False)
    obj["documents"] = [document_to_obj(d, include_markdown=True) for d in session.documents]
    return obj


def snapshot_bytes(session: Session) -> bytes:
    return json.dumps(snapshot_obj(session), ensure_ascii=False, separators=(",", ":"), sort_keys=True).encode("utf-8")


def _session_from_snapshot(obj: dict) -> Session:
    settings_obj = obj["settings"]
    settings = Settings(
        semantics=settings_obj["semantics"],
        depth=settings_obj["depth"],
        breadth=settings_obj["breadth"],
        backend=backend_from_obj(settings_obj["backend"]),
    )
    tree = qbaf_mod.from_json_obj(obj["qbaf"]) if obj.get("qbaf") else None
    documents = [
        Document(
            id=d["id"],
            filename=d["filename"],
            markdown=d.get("markdown", ""),
            page_count=d["page_count"],
            byte_size=d["byte_size"],
            uploaded_at=d["uploaded_at"],
            extraction_empty=d["extraction_empty"],
        )
        for d in obj.get("documents", [])
    ]
    return Session(
        id=obj["id"],
        settings=settings,
        qbaf=tree,
        strengths=dict(obj["strengths"]) if obj.get("strengths") else None,
        score_flags=dict(obj.get("score_flags", {})),
        documents=documents,
        chat=[ChatEntry(e["role"], e["text"], e["ts"]) for e in obj.get("chat", [])],
        revision=obj["revision"],
    )


class SessionStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        if not self.root.is_dir():
            raise StoreError(f"store path {self.root} is not a directory")
        self._cache: dict[str, Session] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._mutex = threading.Lock()

    def lock(self, session_id: str) -> threading.RLock:
        with self._mutex:
            return self._locks.setdefault(session_id, threading.RLock())

    def _snapshot_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def create(self, settings: Settings | None = None) -> Session:
        session = Session(id=uuid.uuid4().hex[:12], settings=settings or default_settings())
        with self.lock(session.id):
            self._cache[session.id] = session
            self.save(session)
        return session

    def get(self, session_id: str) -> Session:
        with self._mutex:
            if session_id in self._cache:
                return self._cache[session_id]
        path = self._snapshot_path(session_id)
        if not path.exists():
            raise UnknownSessionError(f"no session {session_id!r}")
        try:
            session = _session_from_snapshot(json.loads(path.read_text("utf-8")))
        except (ValueError, KeyError, qbaf_mod.QbafError) as exc:
            raise StoreError(f"corrupt snapshot for {session_id!r}: {exc}") from exc
        with self._mutex:
            return self._cache.setdefault(session_id, session)

    def save(self, session: Session):
        path = self._snapshot_path(session.id)
        tmp = path.with_suffix(f".tmp{os.getpid()}")
        tmp.write_bytes(snapshot_bytes(session))
        os.replace(tmp, path)
        with self._mutex:
            self._cache[session.id] = session

    def save_document(self, session_id: str, doc: Document, raw: bytes):
        """Raw bytes and markdown side by side under the session directory."""
        doc_dir = self.session_dir(session_id) / "documents"
        doc_dir.mkdir(parents=True, exist_ok=True)
        (doc_dir / f"{doc.id}.pdf").write_bytes(raw)
        (doc_dir / f"{doc.id}.md").write_text(doc.markdown, "utf-8")

    def delete(self, session_id: str):
        self.get(session_id)  # raises UnknownSessionError if absent
        with self._mutex:
            self._cache.pop(session_id, None)
        path = self._snapshot_path(session_id)
        if path.exists():
            path.unlink()
        doc_dir = self.session_dir(session_id)
        if doc_dir.is_dir():
            for child in sorted(doc_dir.rglob("*"), reverse=True):
                child.unlink() if child.is_file() else child.rmdir()
            doc_dir.rmdir()
