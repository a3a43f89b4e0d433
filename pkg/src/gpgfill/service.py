"""Newline-delimited JSON decision service.

Each request is one JSON object with ``"v": 1`` and ``"op"`` in
``open | decide | state | close``. A session holds the live inventory and
policy state; its decisions match :func:`gpgfill.model.run_policy` run with
the same seed on the same order and cost sequence.
"""

from __future__ import annotations

import json
import math
import os
import socketserver
import sys
import threading
import time
from pathlib import Path
from typing import IO, Optional

import numpy as np

from .baselines.myopic import MyopicPolicy
from .model import (
    REGIMES,
    TIME_INVARIANT,
    ConfigurationError,
    InstanceHeader,
    InventoryState,
    apply_plan,
    period_cost,
)
from .policies import POLICY_NAMES, make_policy
from .rng import Streams

VERSION = 1


class RequestError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def build_policy(name: str, params: Optional[dict] = None):
    params = dict(params or {})
    if name == "myopic":
        return MyopicPolicy(**params)
    if name not in POLICY_NAMES:
        raise ConfigurationError(f"unknown policy {name!r}")
    return make_policy(name, **params)


class Session:
    def __init__(self, session_id: str, header: InstanceHeader, policy_name: str, params: dict, seed: int):
        self.id = session_id
        self.header = header
        self.policy = build_policy(policy_name, params)
        self.seed = seed
        self.decider = self.policy.start(header, Streams(seed))
        self.state = InventoryState(levels=header.initial_inventory.copy())
        self.costs: list[float] = []
        self.gated = 0
        self.first_costs: Optional[np.ndarray] = None
        self.lock = threading.Lock()

    @property
    def cumulative_cost(self) -> float:
        return math.fsum(self.costs)

    def _parse_order(self, raw) -> np.ndarray:
        n = self.header.n
        if not isinstance(raw, list) or len(raw) != n:
            raise RequestError("bad_order", f"order must be a list of {n} integers")
        if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in raw):
            raise RequestError("bad_order", "order entries must be nonnegative integers")
        return np.asarray(raw, dtype=np.int64)

    def _parse_costs(self, raw) -> np.ndarray:
        h = self.header
        try:
            costs = np.asarray(raw, dtype=np.float64)
        except (TypeError, ValueError):
            raise RequestError("bad_costs", "costs must be a numeric matrix") from None
        if costs.shape != (h.K + 1, h.n):
            raise RequestError("bad_costs", f"costs must have shape {(h.K + 1, h.n)}")
        if not np.all(np.isfinite(costs)) or np.any(costs < 0):
            raise RequestError("bad_costs", "costs must be finite and nonnegative")
        if h.cost_bounds is not None:
            a, b = h.cost_bounds
            if np.any(costs < a) or np.any(costs > b):
                raise RequestError("bad_costs", f"costs must lie in [{a}, {b}]")
        if h.cost_regime == TIME_INVARIANT and self.first_costs is not None:
            if not np.array_equal(costs, self.first_costs):
                raise RequestError("bad_costs", "time-invariant session received different costs")
        return costs

    def decide(self, msg: dict) -> dict:
        order = self._parse_order(msg.get("order"))
        costs = self._parse_costs(msg.get("costs"))
        if self.header.T and len(self.costs) >= self.header.T:
            raise RequestError("bad_order", f"horizon of {self.header.T} periods already used")
        plan, gated = self.decider.decide(order, costs, self.state.levels.copy())
        self.state = apply_plan(self.state, plan, order)
        if self.first_costs is None:
            self.first_costs = costs
        cost = period_cost(plan, self.header.fixed_costs, costs)
        self.costs.append(cost)
        self.gated += bool(gated)
        return {"plan": np.asarray(plan).tolist(), "period_cost": cost, "gated": bool(gated)}

    def snapshot(self) -> dict:
        return {
            "session_id": self.id,
            "period": self.state.period,
            "inventory": self.state.levels.tolist(),
            "cumulative_cost": self.cumulative_cost,
        }

    def summary(self) -> dict:
        return {
            "session_id": self.id,
            "policy_id": self.policy.name,
            "seed": self.seed,
            "periods": len(self.costs),
            "total_cost": self.cumulative_cost,
            "period_costs": list(self.costs),
            "gated_period_count": self.gated,
            "notes": dict(getattr(self.decider, "notes", {}) or {}),
        }


def _header_from(msg: dict) -> InstanceHeader:
    h = msg.get("header")
    if not isinstance(h, dict):
        raise RequestError("bad_request", "open needs a header object")
    try:
        f = np.asarray(h["fixed_costs"], dtype=np.float64)
        K = len(f) - 1
        n = int(h["n"])
        inv = np.asarray(h["initial_inventory"], dtype=np.int64).reshape(K, n)
        regime = h.get("cost_regime", "time-varying")
        bounds = h.get("cost_bounds")
        T = int(h.get("T", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise RequestError("bad_request", f"malformed header: {exc}") from None
    if regime not in REGIMES:
        raise RequestError("bad_request", f"unknown cost regime {regime!r}")
    if np.any(f < 0) or np.any(inv < 0) or n < 1:
        raise RequestError("bad_request", "header values must be nonnegative")
    return InstanceHeader(
        n=n,
        K=K,
        T=T,
        fixed_costs=f,
        cost_regime=regime,
        cost_bounds=None if bounds is None else (float(bounds[0]), float(bounds[1])),
        initial_inventory=inv,
        meta=dict(h.get("meta", {})),
    )


class SessionStore:
    """All open sessions plus the optional journal."""

    def __init__(self, journal: Optional[str] = None):
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self.counter = 0
        self.journal_path = journal
        self._journal_lock = threading.Lock()

    def handle(self, message) -> dict:
        """Answer one request; errors come back as ``{"ok": false, "error": {...}}``."""
        raw = message
        try:
            if isinstance(message, (str, bytes)):
                try:
                    message = json.loads(message)
                except json.JSONDecodeError as exc:
                    raise RequestError("bad_request", f"invalid JSON: {exc}") from None
            if not isinstance(message, dict):
                raise RequestError("bad_request", "request must be a JSON object")
            if message.get("v") != VERSION:
                raise RequestError("bad_request", f'"v": {VERSION} is required')
            response = self._dispatch(message)
            response = {"v": VERSION, "ok": True, **response}
        except RequestError as exc:
            response = {"v": VERSION, "ok": False, "error": {"code": exc.code, "message": str(exc)}}
        if isinstance(message, dict) and "id" in message:
            response["id"] = message["id"]
        self._journal(raw, response)
        return response

    def _dispatch(self, msg: dict) -> dict:
        op = msg.get("op")
        if op == "open":
            return self._open(msg)
        if op not in ("decide", "state", "close"):
            raise RequestError("bad_request", f"unknown op {op!r}")
        sid = msg.get("session_id")
        with self.lock:
            session = self.sessions.get(sid)
        if session is None:
            raise RequestError("no_session", f"no open session {sid!r}")
        with session.lock:
            if op == "decide":
                return session.decide(msg)
            if op == "state":
                return session.snapshot()
            with self.lock:
                self.sessions.pop(sid, None)
            return {"summary": session.summary()}

    def _open(self, msg: dict) -> dict:
        header = _header_from(msg)
        seed = msg.get("seed", 0)
        if not isinstance(seed, int):
            raise RequestError("bad_request", "seed must be an integer")
        with self.lock:
            self.counter += 1
            sid = msg.get("session_id") or f"s{self.counter}"
            if sid in self.sessions:
                raise RequestError("bad_request", f"session {sid!r} already open")
        try:
            session = Session(sid, header, msg.get("policy", ""), msg.get("params") or {}, seed)
        except (ConfigurationError, TypeError) as exc:
            raise RequestError("bad_config", str(exc)) from None
        with self.lock:
            self.sessions[sid] = session
        return {"session_id": sid}

    def _journal(self, request, response: dict) -> None:
        if not self.journal_path:
            return
        if isinstance(request, bytes):
            request = request.decode("utf-8", "replace")
        if isinstance(request, str):
            try:
                request = json.loads(request)
            except json.JSONDecodeError:
                request = {"raw": request}
        record = dict(request) if isinstance(request, dict) else {"raw": request}
        record["ts"] = time.time()
        record["response"] = response
        line = json.dumps(record, separators=(",", ":"))
        with self._journal_lock, open(self.journal_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    @classmethod
    def replay(cls, journal: str, verify: bool = True, resume_journal: Optional[str] = None) -> "SessionStore":
        """Rebuild sessions from a journal; with ``verify`` every response must match."""
        store = cls()
        for lineno, line in enumerate(Path(journal).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            record = json.loads(line)
            expected = record.pop("response", None)
            record.pop("ts", None)
            got = store.handle(record.get("raw", record) if set(record) == {"raw"} else record)
            if verify and expected is not None and got != expected:
                raise RuntimeError(f"journal line {lineno} replayed to a different response")
        store.journal_path = resume_journal
        return store


def serve_stdio(store: SessionStore, stdin: IO[str] = None, stdout: IO[str] = None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(json.dumps(store.handle(line)) + "\n")
        stdout.flush()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            if not line.strip():
                continue
            reply = self.server.store.handle(line.decode("utf-8"))
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


class SocketServer(socketserver.ThreadingMixIn, socketserver.UnixStreamServer):
    daemon_threads = True

    def __init__(self, path: str, store: SessionStore):
        if os.path.exists(path):
            os.unlink(path)
        super().__init__(path, _Handler)
        self.store = store


def serve_socket(store: SessionStore, path: str) -> None:
    with SocketServer(path, store) as server:
        server.serve_forever()
