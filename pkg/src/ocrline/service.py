"""FastAPI service exposing the evaluation operations over HTTP.

The service wraps the pure-computation half of the toolkit (metrics, error
tables, model selection, report rendering) for multi-client use.  Ingestion
and synthetic-image generation stay in the CLI because they operate on the
local filesystem.

Run with::

    uvicorn ocrline.service:app
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import align as align_mod
from . import metrics
from . import report as report_mod
from .corpus import LinePair, TranscribedLine
from .errors import OcrlineError

app = FastAPI(title="ocrline", version="0.1.0")


class PairPayload(BaseModel):
    reference_text: str
    hypothesis_text: str
    language: str = "mixed"


class EvaluateRequest(BaseModel):
    pairs: list[PairPayload]
    charset: str = "all-sami-special"
    group_by_language: bool = False
    model_name: str = "model"
    top_n_errors: int = Field(default=0, ge=0)


class MetricValuesPayload(BaseModel):
    cer: float
    wer: float
    f1: Optional[float] = None
    mean_cer_wer: float


class ErrorRowPayload(BaseModel):
    ref: str
    hyp: str
    n_e: int
    n_m: Optional[int] = None
    n_c: Optional[int] = None


class EvaluateResponse(BaseModel):
    model_name: str
    pair_count: int
    groups: dict[str, MetricValuesPayload]
    error_table: list[ErrorRowPayload]


class ErrorsRequest(BaseModel):
    pairs: list[PairPayload]
    top_n: int = Field(default=10, ge=1)


class CandidatePayload(BaseModel):
    cer: float
    wer: float


class SelectRequest(BaseModel):
    candidates: dict[str, CandidatePayload]


class SelectResponse(BaseModel):
    best: str
    mean_cer_wer: float


class RenderRequest(BaseModel):
    comparison: dict
    format: str = "md"


class RenderResponse(BaseModel):
    text: str


def _to_line_pairs(payloads: list[PairPayload]) -> list[LinePair]:
    return [
        LinePair(
            reference=TranscribedLine(id=f"p{i}", text=p.reference_text, language=p.language),
            hypothesis_text=p.hypothesis_text,
            source="api",
        )
        for i, p in enumerate(payloads)
    ]


def _metric_payload(mv: metrics.MetricValues) -> MetricValuesPayload:
    return MetricValuesPayload(
        cer=mv.cer, wer=mv.wer, f1=mv.f1, mean_cer_wer=mv.mean_cer_wer
    )


def _row_payload(row: align_mod.ErrorTableRow) -> ErrorRowPayload:
    return ErrorRowPayload(
        ref=row.segment.ref_str, hyp=row.segment.hyp_str,
        n_e=row.n_e, n_m=row.n_m, n_c=row.n_c,
    )


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(request: EvaluateRequest) -> EvaluateResponse:
    try:
        cs = metrics.resolve_charset(request.charset)
        result = metrics.evaluate(
            _to_line_pairs(request.pairs),
            cs,
            group_by_language=request.group_by_language,
            model_name=request.model_name,
            top_n_errors=request.top_n_errors,
        )
    except OcrlineError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return EvaluateResponse(
        model_name=result.model_name,
        pair_count=result.pair_count,
        groups={g: _metric_payload(mv) for g, mv in result.groups.items()},
        error_table=[_row_payload(r) for r in result.error_table],
    )


@app.post("/errors", response_model=list[ErrorRowPayload])
def errors(request: ErrorsRequest) -> list[ErrorRowPayload]:
    try:
        rows = align_mod.tabulate_errors(_to_line_pairs(request.pairs), request.top_n)
    except OcrlineError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return [_row_payload(r) for r in rows]


@app.post("/select", response_model=SelectResponse)
def select(request: SelectRequest) -> SelectResponse:
    candidates = {
        name: metrics.MetricValues(cer=c.cer, wer=c.wer)
        for name, c in request.candidates.items()
    }
    try:
        best = metrics.select_best(candidates)
    except OcrlineError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return SelectResponse(best=best, mean_cer_wer=candidates[best].mean_cer_wer)


@app.post("/render", response_model=RenderResponse)
def render(request: RenderRequest) -> RenderResponse:
    try:
        comparison = report_mod.parse_json(json.dumps(request.comparison))
        if request.format == "md":
            text = report_mod.emit_markdown(comparison)
        elif request.format == "csv":
            text = report_mod.emit_csv(comparison)
        elif request.format == "json":
            text = report_mod.emit_json(comparison)
        else:
            raise HTTPException(status_code=422, detail=f"unknown format {request.format!r}")
    except OcrlineError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return RenderResponse(text=text)
