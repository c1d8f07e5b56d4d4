"""Local HTTP service that deals pairs to assessors and records judgments.

Endpoints (JSON request/response bodies):

* ``GET /api/next-pair?assessor=ID``: the next pair for this assessor with
  a lease token, or ``{"done": true}`` when nothing is pending.
* ``POST /api/judgment``: ``{"pair_id", "token", "winner": "a"|"b"}``;
  appends to the ledger.  An expired or unknown lease answers 409 and the
  client must re-fetch the pair.
* ``GET /api/progress``: per-topic stages and judgment counts.
* ``GET /api/export``: preference qrels for the finalized topics, as text.

In crowdsourced mode the lease unit is a whole batch, so two concurrent
assessors never hold the same batch; in tournament mode it is the single
pair the bracket needs next.  All state mutation funnels through one lock
around the campaign applier, and every accepted judgment is appended to the
on-disk ledger before the response goes out.
"""

from __future__ import annotations

import json
import random
import re
import secrets
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Mapping
from urllib.parse import parse_qs, urlparse

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.state import Campaign, CampaignError
from prefeval.trec_io import PreferenceJudgment, append_ledger, emit_preference_qrels


class LeaseError(Exception):
    """Expired, unknown, or conflicting lease; maps to HTTP 409."""


@dataclass
class _Lease:
    token: str
    assessor_id: str
    topic_id: str
    batch_id: str  # batch id in crowdsourced mode, topic id in tournament mode
    pair_id: str
    doc_a: str
    doc_b: str
    is_challenge: bool
    stage: str
    expires: float


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class JudgingService:
    """Lease bookkeeping and judgment recording over one campaign.

    Leases are transient (they are not part of the durable state): crashing
    and restarting the service re-derives the campaign from the ledger and
    simply forgets outstanding leases.
    """

    def __init__(
        self,
        campaign: Campaign,
        ledger_path: str | Path,
        docstore: Mapping[str, str] | None = None,
        questions: Mapping[str, str] | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.campaign = campaign
        self.ledger_path = Path(ledger_path)
        self.docstore = dict(docstore or {})
        self.questions = dict(questions or {})
        self.clock = clock
        self._lock = threading.Lock()
        self._by_token: dict[str, _Lease] = {}
        self._batch_owner: dict[str, _Lease] = {}

    # -- helpers ---------------------------------------------------------------

    def _expire(self) -> None:
        now = self.clock()
        for token, lease in list(self._by_token.items()):
            if lease.expires <= now:
                del self._by_token[token]
                owner = self._batch_owner.get(lease.batch_id)
                if owner is not None and owner.token == token:
                    del self._batch_owner[lease.batch_id]

    def _passage(self, doc_id: str) -> str:
        return self.docstore.get(doc_id, doc_id)

    def _question(self, topic_id: str) -> str:
        return self.questions.get(topic_id, topic_id)

    def _issue(self, lease: _Lease) -> dict[str, object]:
        self._by_token[lease.token] = lease
        self._batch_owner[lease.batch_id] = lease
        return {
            "pair_id": lease.pair_id,
            "topic": lease.topic_id,
            "question": self._question(lease.topic_id),
            "passage_a": self._passage(lease.doc_a),
            "passage_b": self._passage(lease.doc_b),
            "token": lease.token,
        }

    def _lease_ttl(self) -> float:
        return self.campaign.config.lease_seconds

    # -- endpoints ---------------------------------------------------------------

    def next_pair(self, assessor_id: str) -> dict[str, object]:
        """The next pair for this assessor, or {"done": true}."""
        if not assessor_id:
            raise ValueError("assessor id must not be empty")
        with self._lock:
            self._expire()
            if assessor_id in self.campaign.excluded_assessors:
                raise LeaseError(f"assessor {assessor_id!r} is excluded")
            if self.campaign.config.mode == "tournament":
                payload = self._next_tournament(assessor_id)
            else:
                payload = self._next_batch_pair(assessor_id)
            return payload if payload is not None else {"done": True}

    def _next_batch_pair(self, assessor_id: str) -> dict[str, object] | None:
        for batch in self.campaign.pending_batches():
            owner = self._batch_owner.get(batch.batch_id)
            if owner is not None and owner.assessor_id != assessor_id:
                continue  # leased to someone else
            attempt = self.campaign._attempts.get((batch.batch_id, assessor_id), {})
            state = self.campaign.states[batch.topic_id]
            pair = next((p for p in batch.pairs if p.pair_id not in attempt), None)
            if pair is None:
                continue
            lease = _Lease(
                token=secrets.token_hex(16),
                assessor_id=assessor_id,
                topic_id=batch.topic_id,
                batch_id=batch.batch_id,
                pair_id=pair.pair_id,
                doc_a=pair.doc_a,
                doc_b=pair.doc_b,
                is_challenge=pair.is_challenge,
                stage=state.stage_tag(),
                expires=self.clock() + self._lease_ttl(),
            )
            return self._issue(lease)
        return None

    def _next_tournament(self, assessor_id: str) -> dict[str, object] | None:
        for topic_id in self.campaign.topics:
            state = self.campaign.states[topic_id]
            if state.session is None or state.session.is_complete:
                continue
            owner = self._batch_owner.get(topic_id)
            if owner is not None and owner.assessor_id != assessor_id:
                continue
            nxt = state.session.next_pair()
            if nxt is None:
                continue
            doc_a, doc_b = nxt
            # Randomize sides per judgment, reproducibly from the seed.
            flip = random.Random(
                f"{self.campaign.config.seed}:{topic_id}:side:{state.session.judgments_used}"
            ).random() < 0.5
            if flip:
                doc_a, doc_b = doc_b, doc_a
            lease = _Lease(
                token=secrets.token_hex(16),
                assessor_id=assessor_id,
                topic_id=topic_id,
                batch_id=topic_id,
                pair_id=f"{topic_id}:t{state.session.judgments_used:04d}",
                doc_a=doc_a,
                doc_b=doc_b,
                is_challenge=False,
                stage="tournament",
                expires=self.clock() + self._lease_ttl(),
            )
            return self._issue(lease)
        return None

    def submit(self, pair_id: str, token: str, winner_side: str) -> dict[str, object]:
        """Record a judgment made under a live lease."""
        if winner_side not in ("a", "b"):
            raise ValueError(f"winner must be 'a' or 'b', got {winner_side!r}")
        with self._lock:
            self._expire()
            lease = self._by_token.get(token)
            if lease is None:
                raise LeaseError("lease expired or unknown; fetch the pair again")
            if lease.pair_id != pair_id:
                raise ValueError(
                    f"token was issued for pair {lease.pair_id!r}, not {pair_id!r}"
                )
            winner = lease.doc_a if winner_side == "a" else lease.doc_b
            record = PreferenceJudgment(
                topic_id=lease.topic_id,
                doc_a=lease.doc_a,
                doc_b=lease.doc_b,
                winner=winner,
                assessor_id=lease.assessor_id,
                stage=lease.stage,
                batch_id=lease.batch_id if self.campaign.config.mode != "tournament" else "tournament",
                is_challenge=lease.is_challenge,
                timestamp=_now_iso(),
            )
            self.campaign.apply(record)
            append_ledger(self.ledger_path, record)
            del self._by_token[token]
            owner = self._batch_owner.get(lease.batch_id)
            if owner is not None and owner.token == token:
                del self._batch_owner[lease.batch_id]
            excluded = lease.assessor_id in self.campaign.excluded_assessors
            return {"ok": True, "excluded": excluded}

    def progress(self) -> dict[str, object]:
        with self._lock:
            self._expire()
            status = self.campaign.status()
            return {
                "mode": self.campaign.config.mode,
                "complete": self.campaign.is_complete(),
                "judgments_applied": self.campaign.applied,
                "topics": status,
            }

    def export(self) -> str:
        with self._lock:
            return emit_preference_qrels(self.campaign.to_preference_qrels())


# ---------------------------------------------------------------------------
# HTTP wiring

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
}


def _make_handler(service: JudgingService, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt: str, *args) -> None:  # quiet by default
            pass

        def _send_json(self, status: int, payload: dict[str, object]) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_text(self, status: int, text: str, content_type: str) -> None:
            body = text.encode()
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _serve_static(self, path: str) -> None:
            assert ui_dir is not None
            name = path.lstrip("/") or "index.html"
            if not re.fullmatch(r"[A-Za-z0-9_./-]+", name) or ".." in name:
                self._send_json(404, {"error": "not found"})
                return
            target = (ui_dir / name).resolve()
            if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
                self._send_json(404, {"error": "not found"})
                return
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self._send_text(200, target.read_text(), ctype)

        def do_GET(self) -> None:
            url = urlparse(self.path)
            try:
                if url.path == "/api/next-pair":
                    query = parse_qs(url.query)
                    assessor = query.get("assessor", [""])[0]
                    self._send_json(200, service.next_pair(assessor))
                elif url.path == "/api/progress":
                    self._send_json(200, service.progress())
                elif url.path == "/api/export":
                    self._send_text(200, service.export(), "text/plain; charset=utf-8")
                elif ui_dir is not None:
                    self._serve_static(url.path)
                else:
                    self._send_json(404, {"error": "not found"})
            except LeaseError as exc:
                self._send_json(409, {"error": str(exc)})
            except (ValueError, CampaignError) as exc:
                self._send_json(400, {"error": str(exc)})

        def do_POST(self) -> None:
            url = urlparse(self.path)
            if url.path != "/api/judgment":
                self._send_json(404, {"error": "not found"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                payload = json.loads(self.rfile.read(length) or b"{}")
                result = service.submit(
                    pair_id=str(payload.get("pair_id", "")),
                    token=str(payload.get("token", "")),
                    winner_side=str(payload.get("winner", "")),
                )
                self._send_json(200, result)
            except LeaseError as exc:
                self._send_json(409, {"error": str(exc)})
            except (ValueError, CampaignError, json.JSONDecodeError) as exc:
                self._send_json(400, {"error": str(exc)})

    return Handler


def create_server(
    service: JudgingService,
    host: str = "127.0.0.1",
    port: int = 0,
    ui_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    """Bind (but do not start) the HTTP server; port 0 picks a free port."""
    handler = _make_handler(service, Path(ui_dir) if ui_dir else None)
    return ThreadingHTTPServer((host, port), handler)


def load_docstore(path: str | Path) -> dict[str, str]:
    """Read an ``id<TAB>text`` file; later lines win on duplicate ids."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        doc_id, sep, text = line.partition("\t")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'id<TAB>text'")
        out[doc_id] = text
    return out
