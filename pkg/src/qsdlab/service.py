"""Optional HTTP wrapper around :func:`qsdlab.runner.run_scenario`.

Needs the ``service`` extra (fastapi, pydantic, uvicorn).  Run with

    uvicorn qsdlab.service:app
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .runner import SUITES, Scenario, run_scenario


class ScenarioIn(BaseModel):
    space: str
    bundle: list[int]
    D: int = 3
    suites: list[str] = Field(default_factory=lambda: list(SUITES))


def create_app(cache_dir=None) -> FastAPI:
    app = FastAPI(title="qsd")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/run")
    def run(body: ScenarioIn):
        try:
            s = Scenario(body.space, body.bundle, body.D, body.suites, cache_dir is not None)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return run_scenario(s, cache_dir=cache_dir)

    @app.get("/invariants/{space}")
    def invariants(space: str, bundle: str, degrees: int = 3):
        try:
            s = Scenario(space, [int(x) for x in bundle.split(",")], degrees, ["invariants"], False)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return run_scenario(s)

    return app


app = create_app()
