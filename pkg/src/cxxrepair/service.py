"""HTTP scoring service for reinforcement-learning trainers.

Exposes the gated reward over a small JSON API so a trainer process can post
rollouts and receive scores without linking against this package. Compile
work is bounded by a semaphore sized to the compiler config, so a burst of
requests cannot fork more compilers than the host should run.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from cxxrepair import __version__
from cxxrepair.compile_harness import CompilerConfig
from cxxrepair.errors import CxxRepairError
from cxxrepair.gateway import ModelGateway
from cxxrepair.reward import PatchProposal, RepairTask, ScoreResult, score


class ScoreRequest(BaseModel):
    record_id: str = Field(min_length=1)
    buggy_source: str = Field(min_length=1)
    compiler_message: str = ""
    fixed_source: str = Field(min_length=1)
    actor_id: str = "unknown"


class ScoreResponse(BaseModel):
    record_id: str
    category: str
    rationale: str
    judge_id: str
    compile_status: str
    s_judge: float
    s_compile: float
    total: float


class BatchScoreRequest(BaseModel):
    items: list[ScoreRequest]


class BatchScoreResponse(BaseModel):
    results: list[ScoreResponse]


def _response_from(result: ScoreResult) -> ScoreResponse:
    return ScoreResponse(
        record_id=result.task_id,
        category=result.verdict.category.value,
        rationale=result.verdict.rationale,
        judge_id=result.verdict.judge_id,
        compile_status=result.compile_outcome.status.value,
        s_judge=result.reward.s_judge,
        s_compile=result.reward.s_compile,
        total=result.reward.total,
    )


def build_scoring_app(compiler: CompilerConfig, gateway: ModelGateway) -> FastAPI:
    app = FastAPI(title="cxxrepair scoring service", version=__version__)
    # Bound on concurrent scoring passes, not just compiles: each pass holds a
    # compiler subprocess for most of its lifetime.
    slots = threading.BoundedSemaphore(compiler.max_parallel)

    @app.exception_handler(CxxRepairError)
    async def _scoring_failure(request: Request, exc: CxxRepairError) -> JSONResponse:
        return JSONResponse(
            status_code=502,
            content={"detail": f"{type(exc).__name__}: {exc}"},
        )

    def _score_one(item: ScoreRequest) -> ScoreResponse:
        task = RepairTask(
            record_id=item.record_id,
            buggy_source=item.buggy_source,
            compiler_message=item.compiler_message,
        )
        patch = PatchProposal(
            task_id=item.record_id,
            fixed_source=item.fixed_source,
            actor_id=item.actor_id,
        )
        with slots:
            return _response_from(score(task, patch, compiler, gateway))

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/score", response_model=ScoreResponse)
    def score_endpoint(item: ScoreRequest) -> ScoreResponse:
        return _score_one(item)

    @app.post("/score/batch", response_model=BatchScoreResponse)
    def score_batch(batch: BatchScoreRequest) -> BatchScoreResponse:
        # Results come back in request order regardless of scoring timing.
        return BatchScoreResponse(results=[_score_one(item) for item in batch.items])

    return app


def serve(
    compiler: CompilerConfig,
    gateway: ModelGateway,
    host: str = "127.0.0.1",
    port: int = 8080,
) -> None:
    import uvicorn

    uvicorn.run(build_scoring_app(compiler, gateway), host=host, port=port, log_level="info")
