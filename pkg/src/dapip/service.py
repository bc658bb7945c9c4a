"""HTTP facade over synthesis, program application, and the API catalog.

Endpoints (JSON bodies, UTF-8, schema version in the `v` field):

  POST /synthesize  {v?, examples: [{input, output}], samples?, method?,
                     apply_to?: [str], seed?}
      -> {v, found, program?, consistent?, predictions: [...], stats}
  POST /apply       {v?, program, inputs: [str]}
      -> {v, results: [{ok, value?}]}
  GET  /apis?family=regex|lookup|transform
      -> [{name, family, description}]

Responses depend only on the request and the loaded checkpoint; each request
draws from its own rng (pass `seed` to reproduce a run). A request that
exhausts the server's wall-clock budget returns found=false with partial
stats rather than an error.
"""

from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .apis import ApiFamily, default_catalog
from .dsl import default_grammar, parse_program, print_program
from .errors import ArityError, DslSyntaxError, GrammarMismatchError, UnknownApiError
from .failure import Failure
from .interp import ExamplePair, apply_all, consistent
from .r3nn import R3NN
from .search import neural_search, uniform_search

SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 100


class ExampleBody(BaseModel):
    input: str = Field(min_length=1)
    output: str


class SynthesizeBody(BaseModel):
    v: int = SCHEMA_VERSION
    examples: list[ExampleBody] = Field(min_length=1)
    samples: int = DEFAULT_SAMPLES
    method: str = "uniform"
    apply_to: list[str] = Field(default_factory=list)
    seed: int | None = None


class ApplyBody(BaseModel):
    v: int = SCHEMA_VERSION
    program: str
    inputs: list[str]


def _prediction(value) -> dict:
    if isinstance(value, Failure):
        return {"ok": False}
    return {"ok": True, "value": value}


def create_app(checkpoint: str | None = None, budget_s: float = 10.0,
               model: R3NN | None = None) -> FastAPI:
    grammar = default_grammar()
    catalog = default_catalog()
    if checkpoint is not None and model is None:
        model = R3NN.load_auto(checkpoint)

    app = FastAPI(title="dapip synthesis service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def bad_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"v": SCHEMA_VERSION,
                                     "error": "malformed request body",
                                     "detail": exc.errors()})

    @app.get("/apis")
    def list_apis(family: str | None = None):
        fam = None
        if family is not None:
            try:
                fam = ApiFamily(family)
            except ValueError:
                return JSONResponse(status_code=400, content={
                    "v": SCHEMA_VERSION,
                    "error": f"unknown family {family!r}"})
        return [{"name": s.name, "family": s.family.value,
                 "description": s.description} for s in catalog.list(fam)]

    @app.post("/apply")
    def apply(body: ApplyBody):
        try:
            program = parse_program(body.program, grammar)
        except (DslSyntaxError, UnknownApiError, ArityError) as exc:
            return JSONResponse(status_code=400, content={
                "v": SCHEMA_VERSION, "error": str(exc)})
        results = apply_all(program, body.inputs, catalog)
        return {"v": SCHEMA_VERSION,
                "results": [_prediction(r) for r in results]}

    @app.post("/synthesize")
    def synthesize(body: SynthesizeBody):
        if body.method not in ("uniform", "neural", "neural-greedy"):
            return JSONResponse(status_code=400, content={
                "v": SCHEMA_VERSION, "error": f"unknown method {body.method!r}"})
        if body.method.startswith("neural") and model is None:
            return JSONResponse(status_code=409, content={
                "v": SCHEMA_VERSION,
                "error": "no checkpoint loaded for neural synthesis"})
        examples = [ExamplePair(e.input, e.output) for e in body.examples]
        seed = body.seed if body.seed is not None else time.time_ns() % (2**32)
        rng = np.random.default_rng(seed)
        deadline = time.monotonic() + budget_s
        stats_extra = {}
        if body.samples < 1:
            result = None
            stats = {"draws": 0, "found_at": None, "timed_out": False}
        else:
            try:
                if body.method == "uniform":
                    res = uniform_search(examples, body.samples, grammar, rng,
                                         deadline=deadline)
                else:
                    res = neural_search(model, examples, body.samples, rng,
                                        greedy=body.method == "neural-greedy",
                                        deadline=deadline)
            except GrammarMismatchError as exc:
                return JSONResponse(status_code=409, content={
                    "v": SCHEMA_VERSION, "error": str(exc)})
            result = res.program
            # wall time is deliberately not reported: responses are
            # reproducible byte for byte for a fixed request and seed
            stats = {"draws": res.stats.draws, "found_at": res.stats.found_at,
                     "timed_out": res.stats.timed_out}
        if result is None:
            return {"v": SCHEMA_VERSION, "found": False,
                    "predictions": [], "stats": stats, **stats_extra}
        # re-validate server-side before answering
        ok = consistent(result, examples, catalog)
        predictions = [_prediction(r)
                       for r in apply_all(result, body.apply_to, catalog)]
        return {"v": SCHEMA_VERSION,
                "found": True,
                "program": print_program(result),
                "consistent": ok,
                "predictions": predictions,
                "stats": stats}

    return app
