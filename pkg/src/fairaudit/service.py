"""Event-sourced audit sessions behind an HTTP+JSON API.

The append-only judgment log is the single source of truth: every state
change (session creation, tuple served, judgment) is one JSON line, and
replaying the log reconstructs the engine bit-exactly. In-memory state is
just a cache of the log.

Sessions hand an auditor one row at a time with the system's label;
verdict 0 accepts the label, verdict 1 flags it. For binary output
spaces a flagged verdict pins the auditor's own label to the other class,
which lets the live report refit a model of the auditor every ten
judgments and score it against the judged rows.
"""

# No `from __future__ import annotations` here: the HTTP endpoints are
# defined inside build_app with locally imported fastapi types, and stringified
# annotations would be unresolvable from module globals when the framework
# inspects the handlers.
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from .datasets import DataTable, EncodedView, Value, one_hot_encode, split_subsets
from .distances import resolve_metric
from .group_metrics import all_reports
from .learning import (
    FAMILY_LOGISTIC,
    TrainConfig,
    evaluate_accuracy,
    train_family,
)
from .similarity import CovarianceModel, fit_covariance, individual_fairness_check

LOG_VERSION = 1
REFIT_EVERY = 10


class AuditError(Exception):
    """Engine-level failure with a transport-agnostic code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code  # not-found | conflict | invalid | exhausted


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SessionState:
    session_id: str
    auditor_id: str
    dataset: str
    subset_index: int
    row_ids: tuple[int, ...]
    created_at: str
    served: list[int] = field(default_factory=list)
    judgments: dict[int, tuple[int | None, Value | None]] = field(default_factory=dict)
    session_seq: int = 0

    @property
    def cursor(self) -> int:
        return len(self.served)

    @property
    def status(self) -> str:
        return "complete" if len(self.judgments) == len(self.row_ids) else "active"

    def pending(self) -> list[int]:
        return [rid for rid in self.served if rid not in self.judgments]


class AuditEngine:
    """Core session logic, independent of the HTTP layer.

    All public methods are safe to call from multiple threads: a single
    engine lock serializes state transitions (sessions are short and the
    work per call is tiny), and log appends happen inside it, so records
    land in seq order.
    """

    def __init__(
        self,
        table: DataTable,
        dataset: str,
        log_path: str,
        system_labels: Sequence[Value],
        n_subsets: int = 20,
        subset_size: int = 50,
        seed: int = 0,
        delta: float = 0.0,
        attributes: Sequence[str] | None = None,
        allow_subset_reuse: bool = False,
        refit_every: int = REFIT_EVERY,
        train_config: TrainConfig | None = None,
        family: str = FAMILY_LOGISTIC,
        epsilon: float = 1.0,
        metric_name: str = "discrete",
    ):
        if table.encoded is None:
            table = one_hot_encode(table)
        self.table = table
        self.dataset = dataset
        self.log_path = log_path
        self.system_labels = list(system_labels)
        if len(self.system_labels) != len(table.rows):
            raise AuditError("invalid", "one system label per row required")
        self.delta = delta
        self.attributes = list(attributes) if attributes is not None else [
            name for name, _ in table.schema.protected
        ]
        self.allow_subset_reuse = allow_subset_reuse
        self.refit_every = refit_every
        self.train_config = train_config or TrainConfig()
        self.family = family
        self.epsilon = epsilon
        self.metric = resolve_metric(metric_name)

        self._row_index = {row.id: i for i, row in enumerate(table.rows)}
        self._subsets = [
            tuple(sub.row_ids()) for sub in split_subsets(table, n_subsets, subset_size, seed)
        ]
        self._covariance: CovarianceModel = fit_covariance(table.encoded.matrix)
        self._lock = threading.RLock()
        self._seq = 0
        self._sessions: dict[str, SessionState] = {}
        self._used_subsets: set[int] = set()
        self._report_cache: dict[tuple[str, int], dict] = {}

        outcome = table.schema.outcome
        self._output_space = tuple(table.schema.output_space)
        self._outcome_name = outcome[0] if outcome else None

        if os.path.exists(log_path) and os.path.getsize(log_path) > 0:
            self._replay()
        else:
            self._append({"kind": "log-header", "version": LOG_VERSION, "dataset": dataset})

    # -- log plumbing -------------------------------------------------------

    def _append(self, record: dict):
        line = json.dumps(record, ensure_ascii=False, separators=(", ", ": "))
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _replay(self):
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                kind = record.get("kind")
                if kind == "log-header":
                    continue
                self._seq = max(self._seq, record["seq"])
                if kind == "session_created":
                    state = SessionState(
                        session_id=record["session_id"],
                        auditor_id=record["auditor_id"],
                        dataset=record["dataset"],
                        subset_index=record["subset_index"],
                        row_ids=tuple(record["row_ids"]),
                        created_at=record["created_at"],
                    )
                    self._sessions[state.session_id] = state
                    self._used_subsets.add(state.subset_index)
                elif kind == "tuple_served":
                    state = self._sessions[record["session_id"]]
                    state.served.append(record["row_id"])
                    state.session_seq = record["session_seq"]
                elif kind == "judgment":
                    state = self._sessions[record["session_id"]]
                    state.judgments[record["row_id"]] = (
                        record["verdict"], record.get("label")
                    )
                    state.session_seq = record["session_seq"]

    # -- operations ---------------------------------------------------------

    def create_session(self, auditor_id: str, subset: int | None = None) -> SessionState:
        if not auditor_id or not isinstance(auditor_id, str):
            raise AuditError("invalid", "auditor_id must be a nonempty string")
        with self._lock:
            if subset is None:
                free = [i for i in range(len(self._subsets)) if i not in self._used_subsets]
                if not free:
                    if not self.allow_subset_reuse:
                        raise AuditError("exhausted", "all subsets are assigned")
                    index = len(self._sessions) % len(self._subsets)
                else:
                    index = free[0]
            else:
                if not 0 <= subset < len(self._subsets):
                    raise AuditError("invalid", f"subset must be in [0, {len(self._subsets)})")
                if subset in self._used_subsets and not self.allow_subset_reuse:
                    raise AuditError("conflict", f"subset {subset} already assigned")
                index = subset
            state = SessionState(
                session_id=uuid.uuid4().hex[:12],
                auditor_id=auditor_id,
                dataset=self.dataset,
                subset_index=index,
                row_ids=self._subsets[index],
                created_at=_now(),
            )
            self._sessions[state.session_id] = state
            self._used_subsets.add(index)
            self._append({
                "kind": "session_created",
                "seq": self._next_seq(),
                "session_id": state.session_id,
                "auditor_id": state.auditor_id,
                "dataset": state.dataset,
                "subset_index": state.subset_index,
                "row_ids": list(state.row_ids),
                "created_at": state.created_at,
            })
            return state

    def _get(self, session_id: str) -> SessionState:
        state = self._sessions.get(session_id)
        if state is None:
            raise AuditError("not-found", f"no session {session_id!r}")
        return state

    def _card(self, state: SessionState, row_id: int) -> dict:
        row = self.table.rows[self._row_index[row_id]]
        hide = {self._outcome_name}
        features = {k: v for k, v in row.values.items() if k not in hide}
        return {
            "row_id": row_id,
            "features": features,
            "system_label": self.system_labels[self._row_index[row_id]],
            "progress": {
                "served": state.cursor,
                "judged": len(state.judgments),
                "total": len(state.row_ids),
            },
        }

    def next_tuple(self, session_id: str) -> dict:
        with self._lock:
            state = self._get(session_id)
            if state.cursor >= len(state.row_ids):
                return {"status": "complete", "judged": len(state.judgments),
                        "total": len(state.row_ids)}
            row_id = state.row_ids[state.cursor]
            state.served.append(row_id)
            state.session_seq += 1
            self._append({
                "kind": "tuple_served",
                "seq": self._next_seq(),
                "session_id": session_id,
                "session_seq": state.session_seq,
                "row_id": row_id,
                "system_label": self.system_labels[self._row_index[row_id]],
                "served_at": _now(),
            })
            card = self._card(state, row_id)
            card["status"] = "ok"
            return card

    def submit_judgment(
        self,
        session_id: str,
        row_id: int,
        verdict: int | None = None,
        label: Value | None = None,
    ) -> dict:
        if verdict is None and label is None:
            raise AuditError("invalid", "judgment needs a verdict or a label")
        if verdict is not None and verdict not in (0, 1):
            raise AuditError("invalid", "verdict must be 0 or 1")
        if label is not None and label not in self._output_space:
            raise AuditError("invalid", f"label must be one of {list(self._output_space)}")
        with self._lock:
            state = self._get(session_id)
            if row_id not in state.served:
                raise AuditError("conflict", f"row {row_id} was not served in this session")
            if row_id in state.judgments:
                raise AuditError("conflict", f"row {row_id} already judged")
            if verdict is None:
                # label-elicitation mode: derive the verdict from the gap
                system = self.system_labels[self._row_index[row_id]]
                verdict = 1 if self.metric(label, system) >= self.epsilon else 0
            state.judgments[row_id] = (verdict, label)
            state.session_seq += 1
            self._append({
                "kind": "judgment",
                "seq": self._seq + 1,
                "session_id": session_id,
                "session_seq": state.session_seq,
                "row_id": row_id,
                "system_label": self.system_labels[self._row_index[row_id]],
                "verdict": verdict,
                "label": label,
                "judged_at": _now(),
            })
            self._next_seq()
            return {
                "seq": self._seq,
                "session_seq": state.session_seq,
                "judged": len(state.judgments),
                "remaining": len(state.row_ids) - len(state.judgments),
                "status": state.status,
            }

    def session_view(self, session_id: str) -> dict:
        """Resume info: progress plus the pending card, if one is unjudged."""
        with self._lock:
            state = self._get(session_id)
            pending = state.pending()
            view = {
                "session_id": state.session_id,
                "auditor_id": state.auditor_id,
                "dataset": state.dataset,
                "status": state.status,
                "created_at": state.created_at,
                "served": state.cursor,
                "judged": len(state.judgments),
                "total": len(state.row_ids),
                "pending_card": self._card(state, pending[-1]) if pending else None,
            }
            return view

    # -- reporting ----------------------------------------------------------

    def _intrinsic_labels(self, state: SessionState) -> list[Value] | None:
        """Impute the auditor's own labels from binary verdicts.

        Accepting keeps the system label; flagging flips it to the other
        class. Only possible for two-label output spaces unless the
        auditor supplied full labels.
        """
        labels = []
        for rid in state.served:
            if rid not in state.judgments:
                continue
            verdict, label = state.judgments[rid]
            system = self.system_labels[self._row_index[rid]]
            if label is not None:
                labels.append(label)
            elif verdict == 0:
                labels.append(system)
            elif len(self._output_space) == 2:
                a, b = self._output_space
                labels.append(b if system == a else a)
            else:
                return None
        return labels

    def report(self, session_id: str) -> dict:
        with self._lock:
            state = self._get(session_id)
            judged_ids = [rid for rid in state.served if rid in state.judgments]
            n_judged = len(judged_ids)
            flagged = sum(1 for rid in judged_ids if state.judgments[rid][0] == 1)
            base = {
                "session_id": state.session_id,
                "auditor_id": state.auditor_id,
                "dataset": state.dataset,
                "status": state.status,
                "served": state.cursor,
                "judged": n_judged,
                "flagged": flagged,
                # sessions stay active with served-but-unjudged rows; surface the gap
                "unjudged_served": state.cursor - n_judged,
                "total": len(state.row_ids),
                "delta": self.delta,
                "refit_every": self.refit_every,
            }
            fitted_at = (n_judged // self.refit_every) * self.refit_every
            if fitted_at == 0:
                base["profile"] = None
                base["note"] = "insufficient data: profile appears after " \
                    f"{self.refit_every} judgments"
                return base
            cache_key = (session_id, fitted_at)
            if cache_key not in self._report_cache:
                self._report_cache[cache_key] = self._profile(state, judged_ids[:fitted_at])
            base["profile"] = self._report_cache[cache_key]
            return base

    def _profile(self, state: SessionState, judged_ids: list[int]) -> dict:
        sub_state = replace_judgments(state, judged_ids)
        labels = self._intrinsic_labels(sub_state)
        indices = [self._row_index[rid] for rid in judged_ids]
        rows = tuple(self.table.rows[i] for i in indices)
        encoded = EncodedView(
            matrix=self.table.encoded.matrix[indices],
            columns=self.table.encoded.columns,
        )
        judged_table = DataTable(schema=self.table.schema, rows=rows, encoded=encoded)

        profile: dict = {"fitted_at": len(judged_ids), "family": self.family}
        if labels is None:
            profile["model"] = None
            profile["note"] = "non-binary output space: needs label elicitation"
            return profile

        X = encoded.matrix
        model = train_family(self.family, X, labels, self.train_config)
        profile["model"] = {
            "accuracy": evaluate_accuracy(model, X, labels),
            "warning": getattr(model, "warning", ""),
        }
        notions = {}
        for attr in self.attributes:
            per_attr = {}
            for rep in all_reports(judged_table, attr, predictions=labels, delta=self.delta):
                per_attr[rep.notion] = (
                    "undefined" if not rep.defined else ("yes" if rep.satisfied else "no")
                )
            notions[attr] = per_attr
        profile["notions"] = notions
        check = individual_fairness_check(
            judged_table, labels, kappa=0.0, delta=0.0, model=self._covariance
        )
        profile["consistency"] = check.consistency
        return profile

    def export(self, auditor_id: str | None = None) -> str:
        """The raw log text, optionally filtered to one auditor's sessions.

        Reads the file without the engine lock: the log is append-only and
        records are written in single calls, so a snapshot read never
        blocks appenders.
        """
        if auditor_id is not None:
            with self._lock:
                keep_sessions = {
                    sid for sid, st in self._sessions.items() if st.auditor_id == auditor_id
                }
        with open(self.log_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if auditor_id is None:
            return "\n".join(lines) + ("\n" if lines else "")
        kept = []
        for line in lines:
            if not line.strip():
                continue
            record = json.loads(line)
            if record.get("kind") == "log-header" or record.get("session_id") in keep_sessions:
                kept.append(line)
        return "\n".join(kept) + ("\n" if kept else "")


def replace_judgments(state: SessionState, judged_ids: list[int]) -> SessionState:
    """Copy of the session truncated to a prefix of its judgments."""
    keep = set(judged_ids)
    return SessionState(
        session_id=state.session_id,
        auditor_id=state.auditor_id,
        dataset=state.dataset,
        subset_index=state.subset_index,
        row_ids=state.row_ids,
        created_at=state.created_at,
        served=[rid for rid in state.served if rid in keep],
        judgments={rid: v for rid, v in state.judgments.items() if rid in keep},
        session_seq=state.session_seq,
    )


# ---------------------------------------------------------------------------
# HTTP layer


def build_app(engine: AuditEngine):
    """Wrap an engine in the HTTP+JSON API."""
    from fastapi import FastAPI, HTTPException, Request
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import PlainTextResponse

    app = FastAPI(title="fairaudit service", docs_url=None, redoc_url=None)
    app.state.engine = engine
    # the browser console is served from its own origin (file:// or a dev
    # server), so the API must answer cross-origin requests
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    status_of = {"not-found": 404, "conflict": 409, "exhausted": 409, "invalid": 422}

    def run(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AuditError as exc:
            raise HTTPException(status_code=status_of[exc.code], detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok", "dataset": engine.dataset}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=422, detail="body must be JSON")
        if not isinstance(payload, dict) or "auditor_id" not in payload:
            raise HTTPException(status_code=422, detail="auditor_id required")
        subset = payload.get("subset")
        if subset is not None and not isinstance(subset, int):
            raise HTTPException(status_code=422, detail="subset must be an integer")
        state = run(engine.create_session, str(payload["auditor_id"]), subset)
        return {
            "session_id": state.session_id,
            "auditor_id": state.auditor_id,
            "dataset": state.dataset,
            "subset_index": state.subset_index,
            "total": len(state.row_ids),
        }

    @app.get("/sessions/{session_id}")
    def session_view(session_id: str):
        return run(engine.session_view, session_id)

    @app.get("/sessions/{session_id}/next")
    def next_tuple(session_id: str):
        return run(engine.next_tuple, session_id)

    @app.post("/sessions/{session_id}/judgments")
    async def submit_judgment(session_id: str, request: Request):
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(status_code=422, detail="body must be JSON")
        if not isinstance(payload, dict) or "row_id" not in payload:
            raise HTTPException(status_code=422, detail="row_id required")
        row_id = payload["row_id"]
        if not isinstance(row_id, int):
            raise HTTPException(status_code=422, detail="row_id must be an integer")
        return run(
            engine.submit_judgment,
            session_id,
            row_id,
            payload.get("verdict"),
            payload.get("label"),
        )

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        return run(engine.report, session_id)

    @app.get("/export", response_class=PlainTextResponse)
    def export(auditor_id: str | None = None):
        return engine.export(auditor_id)

    return app
