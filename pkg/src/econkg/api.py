"""HTTP service for the human curation workflow.

One editor drives candidate adjudication, duplicate confirmation and graph
preview against a corpus and an evolving lexicon. Every mutation is appended
to a JSONL event log and replayed at startup, so a crash between requests
loses nothing; idempotency keys make browser retries safe.
"""

from __future__ import annotations

import json
import os
import threading
import uuid

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bootstrap import BootstrapConfig, BootstrapError, BootstrapSession, LabelDecision
from .coref import CanonicalMap, MergeDecision, merge_entities, propose_duplicates
from .corpus import ingest_documents
from .kgraph import build_graph, export_graph, subgraph_around
from .lexicon import load_seed_lexicons
from .mentions import MentionFinder
from .triples import dedup_triples, extract_triples

__all__ = ["create_app"]


class ApiError(Exception):
    def __init__(self, status_code: int, detail: str):
        self.status_code = status_code
        self.detail = detail


class SessionCreate(BaseModel):
    threshold: float = 0.5
    k: int = 20
    max_iterations: int = 10
    seed: int = 0


class DecisionBody(BaseModel):
    candidate: str
    kind: str
    decision: str
    polarity: str | None = None
    canonical_name: str | None = None


class LabelsBody(BaseModel):
    batch_id: str
    decisions: list[DecisionBody] = Field(min_length=0)
    idempotency_key: str | None = None


class CorefDecisionBody(BaseModel):
    a: str
    b: str
    confirm: bool = True
    canonical: str | None = None


class CorefDecisionsBody(BaseModel):
    decisions: list[CorefDecisionBody]


def _batch_view(batch, corpus=None) -> dict | None:
    if batch is None:
        return None

    def example(doc_id, sent_idx):
        out = {"doc": doc_id, "sent": sent_idx}
        if corpus is not None:
            try:
                out["text"] = corpus.sentence(doc_id, sent_idx).raw
            except (KeyError, IndexError):
                pass
        return out

    return {
        "batch_id": batch.batch_id,
        "iteration": batch.iteration,
        "phase": batch.phase,
        "kind": batch.kind,
        "status": batch.status,
        "items": [
            {
                "text": item.text,
                "confidence": item.confidence,
                "examples": [example(d, s) for d, s in item.examples],
            }
            for item in batch.items
        ],
    }


class SessionRecord:
    def __init__(self, session_id: str, session: BootstrapSession, log_path: str):
        self.id = session_id
        self.session = session
        self.log_path = log_path
        self.lock = threading.Lock()
        self.responses: dict[str, dict] = {}  # idempotency key -> response

    def view(self) -> dict:
        s = self.session
        return {
            "id": self.id,
            "state": s.state,
            "iteration": s.iteration,
            "variables": len(s.lexicon.variables),
            "relations": len(s.lexicon.relations),
            "open_batch": _batch_view(s.open_batch, corpus=s.corpus),
        }

    def append_event(self, event: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())


class ServerState:
    def __init__(self, corpus_path, variables_path, relations_path, data_dir, token=None):
        self.corpus = ingest_documents(corpus_path)
        self.variables_path = variables_path
        self.relations_path = relations_path
        self.data_dir = data_dir
        self.token = token
        self.sessions: dict[str, SessionRecord] = {}
        self.session_order: list[str] = []
        self.coref_decisions: list[MergeDecision] = []
        os.makedirs(os.path.join(data_dir, "sessions"), exist_ok=True)
        self._coref_path = os.path.join(data_dir, "coref_decisions.jsonl")
        self._restore()

    def seed_lexicon(self):
        return load_seed_lexicons(self.variables_path, self.relations_path)

    # -- persistence ------------------------------------------------------

    def _session_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, "sessions", f"{session_id}.jsonl")

    def _restore(self) -> None:
        sessions_dir = os.path.join(self.data_dir, "sessions")
        for name in sorted(os.listdir(sessions_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(sessions_dir, name)
            with open(path, encoding="utf-8") as fh:
                events = [json.loads(line) for line in fh if line.strip()]
            if not events or events[0].get("event") != "created":
                continue
            record = self._create_session(events[0]["config"],
                                          session_id=events[0]["session_id"],
                                          persist=False)
            for event in events[1:]:
                if event.get("event") != "labels":
                    continue
                decisions = [LabelDecision(**d) for d in event["decisions"]]
                if record.session.state == "idle":
                    record.session.start()
                result = record.session.submit(decisions, batch_id=event["batch_id"])
                key = event.get("idempotency_key")
                if key:
                    response = record.view()
                    response["applied"] = {
                        "added_variables": result.added_variables,
                        "added_relations": result.added_relations,
                        "added_variants": result.added_variants,
                        "rejected": result.rejected,
                    }
                    record.responses[key] = response
        if os.path.exists(self._coref_path):
            with open(self._coref_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self.coref_decisions.append(MergeDecision(
                            a=rec["a"], b=rec["b"],
                            confirm=bool(rec.get("confirm", True)),
                            canonical=rec.get("canonical")))

    def _create_session(self, config: dict, session_id=None, persist=True) -> SessionRecord:
        session_id = session_id or uuid.uuid4().hex[:12]
        bconfig = BootstrapConfig(
            threshold=config.get("threshold", 0.5),
            k=config.get("k", 20),
            max_iterations=config.get("max_iterations", 10),
            seed=config.get("seed", 0),
        )
        session = BootstrapSession(self.corpus, self.seed_lexicon(), bconfig)
        record = SessionRecord(session_id, session, self._session_path(session_id))
        self.sessions[session_id] = record
        self.session_order.append(session_id)
        if persist:
            record.append_event({"event": "created", "session_id": session_id,
                                 "config": config})
        return record

    def get_session(self, session_id: str) -> SessionRecord:
        record = self.sessions.get(session_id)
        if record is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return record

    def current_lexicon(self):
        if self.session_order:
            return self.sessions[self.session_order[-1]].session.lexicon
        return self.seed_lexicon()

    def save_coref_decisions(self, decisions: list[MergeDecision]) -> None:
        self.coref_decisions.extend(decisions)
        with open(self._coref_path, "a", encoding="utf-8", newline="\n") as fh:
            for d in decisions:
                fh.write(json.dumps({"a": d.a, "b": d.b, "confirm": d.confirm,
                                     "canonical": d.canonical},
                                    ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def canonical_map(self, lexicon) -> CanonicalMap:
        base = dict(CanonicalMap.from_lexicon(lexicon).items())
        if self.coref_decisions:
            freq = {e.name: e.frequency for e in lexicon.variables.values()}
            merged = merge_entities(self.coref_decisions, frequencies=freq)
            for name, canonical in merged.items():
                base[name] = canonical
            # re-point lexicon aliases at their merged canonical names
            for name, canonical in list(base.items()):
                base[name] = merged(canonical)
        return CanonicalMap(base)


def create_app(corpus_path, variables_path, relations_path, data_dir,
               token: str | None = None) -> FastAPI:
    state = ServerState(corpus_path, variables_path, relations_path, data_dir, token)
    app = FastAPI(title="econkg curation service")
    app.state.server = state

    def auth(request: Request) -> None:
        if state.token and request.headers.get("X-Auth-Token") != state.token:
            raise ApiError(401, "missing or invalid X-Auth-Token")

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err.get("loc", ())),
             "message": err.get("msg", "invalid")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400,
                            content={"detail": "invalid request body", "errors": details})

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/session", dependencies=[Depends(auth)])
    def create_session(body: SessionCreate | None = None):
        config = (body or SessionCreate()).model_dump()
        record = state._create_session(config)
        return record.view()

    @app.get("/api/session/{session_id}", dependencies=[Depends(auth)])
    def get_session(session_id: str):
        return state.get_session(session_id).view()

    @app.get("/api/session/{session_id}/candidates", dependencies=[Depends(auth)])
    def get_candidates(session_id: str):
        record = state.get_session(session_id)
        with record.lock:
            if record.session.state == "idle":
                record.session.start()
            return record.view()

    @app.post("/api/session/{session_id}/iterate", dependencies=[Depends(auth)])
    def iterate(session_id: str):
        record = state.get_session(session_id)
        with record.lock:
            if record.session.state == "idle":
                record.session.start()
                return record.view()
            if record.session.state == "awaiting_labels":
                raise ApiError(409, "open batch awaits labels")
            return record.view()

    @app.post("/api/session/{session_id}/labels", dependencies=[Depends(auth)])
    def post_labels(session_id: str, body: LabelsBody):
        record = state.get_session(session_id)
        with record.lock:
            if body.idempotency_key and body.idempotency_key in record.responses:
                return record.responses[body.idempotency_key]
            session = record.session
            if session.state != "awaiting_labels" or session.open_batch is None:
                raise ApiError(409, f"no open batch (state={session.state})")
            if body.batch_id != session.open_batch.batch_id:
                raise ApiError(409, "stale batch id")
            known = {item.text.casefold() for item in session.open_batch.items}
            decisions = []
            for d in body.decisions:
                if d.kind != session.open_batch.kind or d.candidate.casefold() not in known:
                    raise ApiError(422, f"decision for unknown candidate {d.candidate!r}")
                try:
                    decisions.append(LabelDecision(
                        candidate=d.candidate, kind=d.kind, decision=d.decision,
                        polarity=d.polarity, canonical_name=d.canonical_name))
                except BootstrapError as exc:
                    raise ApiError(422, str(exc)) from exc
            if any(d.decision == "accept" and d.kind == "relation" and not d.polarity
                   for d in decisions):
                raise ApiError(422, "accepted relations require a polarity")
            batch_id = session.open_batch.batch_id
            try:
                result = session.submit(decisions, batch_id=batch_id)
            except BootstrapError as exc:
                raise ApiError(422, str(exc)) from exc
            response = record.view()
            response["applied"] = {
                "added_variables": result.added_variables,
                "added_relations": result.added_relations,
                "added_variants": result.added_variants,
                "rejected": result.rejected,
            }
            record.append_event({
                "event": "labels",
                "batch_id": batch_id,
                "idempotency_key": body.idempotency_key,
                "decisions": [d.model_dump() for d in body.decisions],
            })
            if body.idempotency_key:
                record.responses[body.idempotency_key] = response
            return response

    @app.get("/api/graph", dependencies=[Depends(auth)])
    def graph_preview(center: str | None = None, hops: int = 1,
                      session_id: str | None = None):
        lexicon = (state.get_session(session_id).session.lexicon
                   if session_id else state.current_lexicon())
        finder = MentionFinder(lexicon)
        triples = []
        for sentence in state.corpus.sentences():
            triples.extend(extract_triples(sentence, lexicon, finder))
        deduped = dedup_triples(triples, state.canonical_map(lexicon))
        graph = build_graph(deduped)
        if center:
            if center not in graph.nodes:
                raise ApiError(404, f"unknown center {center!r}")
            graph = subgraph_around(build_graph(deduped, centers=[center]),
                                    center, max(1, hops))
        return json.loads(export_graph(graph, "graph-JSON"))

    @app.get("/api/coref/proposals", dependencies=[Depends(auth)])
    def coref_proposals(tau: float = 0.15, session_id: str | None = None):
        lexicon = (state.get_session(session_id).session.lexicon
                   if session_id else state.current_lexicon())
        entities = sorted({s for e in lexicon.variables.values() for s in e.surfaces()})
        proposals = propose_duplicates(entities, None, tau=tau, lexicon=lexicon)
        return {"proposals": [{"a": a, "b": b, "score": score}
                              for a, b, score in proposals]}

    @app.post("/api/coref/decisions", dependencies=[Depends(auth)])
    def coref_decisions(body: CorefDecisionsBody):
        decisions = [MergeDecision(a=d.a, b=d.b, confirm=d.confirm,
                                   canonical=d.canonical)
                     for d in body.decisions]
        state.save_coref_decisions(decisions)
        lexicon = state.current_lexicon()
        canonical = state.canonical_map(lexicon)
        return {"confirmed": sum(1 for d in decisions if d.confirm),
                "mappings": dict(sorted(canonical.items()))}

    return app
