"""Review-session service: a greedy descent driven by a human over HTTP.

One session is one descent. The server asks A-or-B questions (the poles of
the current pool); each answer keeps the median half on the winner's side.
When the pool is small enough, the budget runs out, or only duplicates
remain, the session finishes and reports the chosen row, a contrast rule
separating the surviving region (desired) from the full initial population
(current), and medoid prototypes of the surviving region.

Wire protocol:
    POST /session                {dataset_id, seed, budget?}
    POST /session/{id}/answer    {choice: "A"|"B"}
    GET  /session/{id}           idempotent poll
    GET  /datasets               ids + column specs

The server alone enforces the budget; clients can replay answers all day
without pushing questions_asked past it.
"""

from __future__ import annotations

import math
import random
import threading
import uuid
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .cluster import ClusterConfig, cluster, split
from .data import Dataset, Role, Row
from .explain import Rule, contrast_rules
from .optimize import prototypes

__all__ = ["create_app", "ReviewSession", "default_budget"]


def default_budget(n: int) -> int:
    return 2 * math.ceil(math.log2(max(2, n)))


# -- wire models -------------------------------------------------------------


class ColumnInfo(BaseModel):
    name: str
    role: str
    goal: Optional[str] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    emphasized: bool = False


class DatasetInfo(BaseModel):
    id: str
    rows: int
    budget: int
    columns: list[ColumnInfo]


class DatasetList(BaseModel):
    datasets: list[DatasetInfo]


class RowRender(BaseModel):
    id: int
    columns: list[str]
    values: list[Optional[float | str]]
    objectives: Optional[dict[str, float]] = None


class Question(BaseModel):
    a: RowRender
    b: RowRender
    asked: int
    budget: int


class CreateSessionRequest(BaseModel):
    dataset_id: str
    seed: Optional[int] = None
    budget: Optional[int] = Field(default=None, ge=1)


class CreateSessionResponse(BaseModel):
    session_id: str
    question: Question


class AnswerRequest(BaseModel):
    choice: Literal["A", "B"]


class SessionView(BaseModel):
    session_id: str
    status: Literal["awaiting_answer", "finished"]
    asked: int
    budget: int
    question: Optional[Question] = None
    best: Optional[RowRender] = None
    rule: Optional[str] = None
    prototypes: Optional[list[RowRender]] = None
    trace: list[str] = []


def render_row(ds: Dataset, row: Row) -> RowRender:
    return RowRender(
        id=row.id,
        columns=[c.name for c in ds.columns],
        values=list(row.cells),
        objectives=None,  # a preference session never evaluates objectives
    )


def emphasized_columns(ds: Dataset) -> set[str]:
    """The most variable half of the numeric decision columns; the UI
    highlights these so a reviewer sees the attributes that matter first."""
    names = [ds.columns[j].name for j in ds._num_idx]
    if not names:
        return set()
    stds = [
        0.0 if np.isnan(ds._num[:, k]).all() else float(np.nanstd(ds._num[:, k]))
        for k in range(ds._num.shape[1])
    ]
    n_top = math.ceil(len(ds.decision_columns) / 2)
    order = sorted(range(len(names)), key=lambda k: (-stds[k], names[k]))
    return {names[k] for k in order[:n_top]}


# -- session state machine ---------------------------------------------------


class ReviewSession:
    """One interactive greedy descent. All transitions happen under the
    session lock; Finished is terminal."""

    def __init__(
        self,
        ds: Dataset,
        dataset_id: str,
        seed: int,
        budget: int,
        stop_leaf: int = 4,
        top_n: int = 10,
    ):
        self.id = uuid.uuid4().hex
        self.ds = ds
        self.dataset_id = dataset_id
        self.cfg = ClusterConfig(seed=seed)
        self.rng = random.Random(seed)
        self.budget = budget
        self.stop_leaf = stop_leaf
        self.top_n = top_n
        self.pool: list[Row] = list(ds.rows)
        self.asked = 0
        self.trace: list[str] = []
        self.status = "awaiting_answer"
        self.final: dict | None = None
        self.lock = threading.Lock()
        self._pending: tuple | None = None  # (west, east, poles)
        self._last_winner: Row | None = None
        self._advance()

    def _advance(self) -> None:
        while True:
            if len(self.pool) <= self.stop_leaf or self.asked >= self.budget:
                self._finish()
                return
            parts = split(self.pool, self.ds, self.cfg, self.rng)
            if parts is None:  # all duplicates, nothing left to ask
                self._finish()
                return
            west, east, poles, _ = parts
            self._pending = (west, east, poles)
            return

    def question(self) -> Question:
        _, _, poles = self._pending
        return Question(
            a=render_row(self.ds, poles.a),
            b=render_row(self.ds, poles.b),
            asked=self.asked,
            budget=self.budget,
        )

    def answer(self, choice: str) -> None:
        west, east, poles = self._pending
        winner = poles.a if choice == "A" else poles.b
        self.asked += 1
        self.trace.append(f"{poles.a.id}v{poles.b.id}={choice}")
        self._last_winner = winner
        west_ids = {r.id for r in west}
        self.pool = west if winner.id in west_ids else east
        self._advance()

    def _finish(self) -> None:
        self.status = "finished"
        self._pending = None
        best = self._last_winner
        pool_tree = cluster(self.ds, ClusterConfig(seed=self.cfg.seed), rows=self.pool)
        protos = prototypes(pool_tree, self.ds)
        if best is None:
            best = protos[0]  # no question was ever asked: fall back to a medoid
        rules = contrast_rules(self.ds, self.pool, list(self.ds.rows), self.top_n)
        if rules:
            rule_text = rules[0].render()
        else:  # indistinguishable on decisions; report the trivial always-true rule
            rule_text = _full_span_rule(self.ds).render()
        self.final = {
            "best": render_row(self.ds, best),
            "rule": rule_text,
            "prototypes": [render_row(self.ds, r) for r in protos],
        }

    def view(self) -> SessionView:
        return SessionView(
            session_id=self.id,
            status=self.status,
            asked=self.asked,
            budget=self.budget,
            question=self.question() if self.status == "awaiting_answer" else None,
            best=self.final["best"] if self.final else None,
            rule=self.final["rule"] if self.final else None,
            prototypes=self.final["prototypes"] if self.final else None,
            trace=list(self.trace),
        )


def _full_span_rule(ds: Dataset) -> Rule:
    from .explain import INF, Range

    col = ds.decision_columns[0]
    if col.role is Role.SYMBOLIC:
        j = ds.column_index(col.name)
        tokens = frozenset(r.cells[j] for r in ds.rows if r.cells[j] is not None)
        rng = Range(col.name, symbols=tokens, x_freq=1.0, y_freq=1.0, score=0.5)
    else:
        rng = Range(col.name, -INF, INF, None, 1.0, 1.0, 0.5)
    return Rule({col.name: (rng,)}, 1.0, 1.0, 0.5)


# -- app ----------------------------------------------------------------------


def create_app(
    datasets: dict[str, Dataset],
    *,
    default_seed: int = 0,
    budget: int | None = None,
    stop_leaf: int = 4,
    top_n: int = 10,
    static_dir: "str | Path | None" = None,
) -> FastAPI:
    app = FastAPI(title="winnow review service")
    sessions: dict[str, ReviewSession] = {}
    registry_lock = threading.Lock()
    emphasis = {did: emphasized_columns(ds) for did, ds in datasets.items()}

    def get_session(session_id: str) -> ReviewSession:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.get("/datasets", response_model=DatasetList)
    def list_datasets() -> DatasetList:
        infos = []
        for did in sorted(datasets):
            ds = datasets[did]
            infos.append(
                DatasetInfo(
                    id=did,
                    rows=len(ds.rows),
                    budget=budget if budget is not None else default_budget(len(ds.rows)),
                    columns=[
                        ColumnInfo(
                            name=c.name,
                            role=c.role.value,
                            goal=c.goal.value if c.goal else None,
                            lo=c.lo,
                            hi=c.hi,
                            emphasized=c.name in emphasis[did],
                        )
                        for c in ds.columns
                    ],
                )
            )
        return DatasetList(datasets=infos)

    @app.post("/session", response_model=CreateSessionResponse)
    def create_session(req: CreateSessionRequest) -> CreateSessionResponse:
        ds = datasets.get(req.dataset_id)
        if ds is None:
            raise HTTPException(status_code=404, detail=f"unknown dataset {req.dataset_id!r}")
        if len(ds.rows) <= stop_leaf:
            raise HTTPException(
                status_code=400,
                detail=f"dataset {req.dataset_id!r} has only {len(ds.rows)} rows; nothing to review",
            )
        b = req.budget if req.budget is not None else (
            budget if budget is not None else default_budget(len(ds.rows))
        )
        session = ReviewSession(
            ds, req.dataset_id, req.seed if req.seed is not None else default_seed,
            b, stop_leaf=stop_leaf, top_n=top_n,
        )
        if session.status == "finished":  # all rows identical: no question to ask
            raise HTTPException(
                status_code=400,
                detail=f"dataset {req.dataset_id!r} rows are indistinguishable; nothing to review",
            )
        with registry_lock:
            sessions[session.id] = session
        with session.lock:
            view = session.view()
        return CreateSessionResponse(session_id=session.id, question=view.question)

    @app.post("/session/{session_id}/answer", response_model=SessionView)
    def answer(session_id: str, req: AnswerRequest) -> SessionView:
        session = get_session(session_id)
        with session.lock:
            if session.status == "finished":
                raise HTTPException(
                    status_code=409, detail="session already finished; answers ignored"
                )
            session.answer(req.choice)
            return session.view()

    @app.get("/session/{session_id}", response_model=SessionView)
    def poll(session_id: str) -> SessionView:
        session = get_session(session_id)
        with session.lock:
            return session.view()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
