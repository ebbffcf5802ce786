"""HTTP JSON API over a built state file.

Single-writer, multi-reader: reads are served from the in-memory engine
snapshot; observe-commit and reset take the writer lock, update the state
file, and swap in a freshly replayed snapshot.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Dict, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import state as state_mod
from .algebra import conf
from .analytics import Observation, observe as run_observe, rank_predictions
from .errors import (
    DegenerateLikelihood,
    EmptySelection,
    HypoDBError,
    PartialCoverage,
    UnknownAttribute,
)
from .pipeline import Engine


class ObserveRequest(BaseModel):
    attr: str
    dims: Dict[str, float] = Field(default_factory=dict)
    y: float
    sigma: float = Field(gt=0)
    commit: bool = False
    phi: Optional[int] = None


class _StateStore:
    def __init__(self, state_path: str) -> None:
        self.state_path = state_path
        self.lock = threading.Lock()
        self.data: Dict[str, Any] = {}
        self.engine: Optional[Engine] = None
        self.reload()

    def reload(self) -> None:
        self.data = json.loads(
            Path(self.state_path).read_text(encoding="utf-8")
        )
        engine = state_mod.load_engine(self.data)
        steps = engine.history
        engine.history = []
        for step in steps:
            run_observe(
                engine,
                Observation(step["attr"], step["dims"], step["y"], step["sigma"]),
                commit=True,
            )
        self.engine = engine

    def persist(self) -> None:
        text = json.dumps(self.data, sort_keys=True, indent=1)
        tmp = Path(self.state_path).with_suffix(".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(self.state_path)


def create_app(state_path: str, ui_dir: Optional[str] = None) -> FastAPI:
    store = _StateStore(state_path)
    app = FastAPI(title="hypodb", docs_url=None, redoc_url=None)

    @app.exception_handler(HypoDBError)
    async def _engine_error(request: Request, exc: HypoDBError):
        status = 400
        if isinstance(exc, (UnknownAttribute, EmptySelection)):
            status = 404
        elif isinstance(exc, (DegenerateLikelihood, PartialCoverage)):
            status = 409
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/api/phenomena")
    def phenomena():
        engine = store.engine
        return [
            {"phi": p.phi, "description": p.description}
            for p in engine.project.phenomena
        ]

    @app.get("/api/hypotheses")
    def hypotheses(phi: int):
        engine = store.engine
        if phi not in {p.phi for p in engine.project.phenomena}:
            raise HTTPException(status_code=404, detail=f"unknown phi {phi}")
        masses = dict(
            conf(engine.relations["Y[Exp]"], ["phi", "upsilon"], engine.world)
        )
        return [
            {
                "phi": phi,
                "upsilon": upsilon,
                "name": engine.project.hypothesis(upsilon).name,
                "confidence": masses.get((phi, upsilon), 0.0),
            }
            for p, upsilon, _ in engine.project.explanation
            if p == phi
        ]

    @app.get("/api/predictions")
    def predictions(request: Request, phi: int, attr: str):
        engine = store.engine
        dims: Dict[str, float] = {}
        for key, value in request.query_params.items():
            if key in ("phi", "attr"):
                continue
            try:
                dims[key] = float(value)
            except ValueError:
                raise HTTPException(
                    status_code=400, detail=f"non-numeric dim value {value!r}"
                )
        rows = rank_predictions(engine, phi, attr, dims or None)
        return [
            {"phi": r.phi, "upsilon": r.upsilon, "value": r.value,
             "prior": r.prior}
            for r in rows
        ]

    @app.get("/api/worldtable")
    def worldtable():
        engine = store.engine
        return [
            {
                "id": var,
                "marginals": engine.world.marginals(var),
                "compound": engine.world.is_compound(var),
            }
            for var in engine.world.variables()
        ]

    @app.get("/api/history")
    def history():
        return store.data.get("history", [])

    @app.post("/api/observe")
    def observe_endpoint(body: ObserveRequest):
        engine = store.engine
        phis = sorted({p.phi for p in engine.project.phenomena})
        phi = body.phi if body.phi is not None else phis[0]
        if phi not in phis:
            raise HTTPException(status_code=404, detail=f"unknown phi {phi}")
        obs = Observation(body.attr, body.dims, body.y, body.sigma)
        with store.lock:
            ranked = rank_predictions(engine, phi, body.attr, body.dims or None)
            from .analytics import bayes_condition

            conditioned = bayes_condition(ranked, obs)
            if body.commit:
                store.data["history"].append(
                    {"attr": body.attr, "dims": dict(body.dims),
                     "y": body.y, "sigma": body.sigma}
                )
                store.persist()
                store.reload()
        return {
            "committed": body.commit,
            "rows": [
                {"phi": r.phi, "upsilon": r.upsilon, "value": r.value,
                 "prior": r.prior, "posterior": r.posterior}
                for r in conditioned
            ],
        }

    @app.post("/api/reset")
    def reset():
        with store.lock:
            store.data["history"] = []
            store.persist()
            store.reload()
        return {"history": []}

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
