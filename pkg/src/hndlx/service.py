"""Stateless HTTP API over the scoring engine.

All handlers are pure functions of (request, immutable config): no
endpoint's response depends on prior requests. Validation failures return
400 with a field-level error list; an unknown sector returns 422. Scores
are bounded, so a non-finite number reaching serialization indicates a bug
and is rejected with 500 rather than leaked onto the wire.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .config import AppConfig, default_t0, sector_table_to_dict
from .errors import ValidationError
from .model import ModelParams, OrganizationProfile, ieq_score
from .surface import surface_points
from .whatif import Action, evaluate_whatif

API_PREFIX = "/v1"


class ParamsOverride(BaseModel):
    model_config = ConfigDict(extra="forbid")
    a: float | None = None
    b: float | None = None
    lambda0: float | None = None
    mu: float | None = None
    theta: float | None = None
    epsilon: float | None = None


class ProfileBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    org_id: str = "adhoc"
    V: float
    E: float
    T_D: float
    sector_id: str = "generic"
    M: float = 1.0


class ScoreRequest(ProfileBody):
    params: ParamsOverride | None = None
    t0: float | None = None


class ActionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: str
    magnitude: float


class WhatIfBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    base: ProfileBody
    actions: list[ActionBody] = []
    params: ParamsOverride | None = None
    t0: float | None = None


def _field_errors(errors: list[tuple[str, str]]) -> HTTPException:
    return HTTPException(status_code=400, detail={
        "errors": [{"field": f, "message": m} for f, m in errors]})


def _merge_params(base: ModelParams, override: ParamsOverride | None) -> ModelParams:
    if override is None:
        return base
    given = {k: v for k, v in override.model_dump().items() if v is not None}
    if not given:
        return base
    if "theta" in given and ("mu" in given or "lambda0" in given):
        raise _field_errors([("theta", "give either theta or mu/lambda0, not both")])
    merged = base.to_dict()
    merged.pop("theta", None)
    if "theta" in given:
        merged["lambda0"] = 1.0
        merged["mu"] = given.pop("theta")
    merged.update(given)
    try:
        return ModelParams(**merged)
    except ValidationError as exc:
        raise _field_errors(exc.fields) from exc


def _assert_finite(value, path: str = "$") -> None:
    if isinstance(value, float):
        if not math.isfinite(value):
            raise HTTPException(status_code=500,
                                detail=f"non-finite value at {path}; this is a bug")
    elif isinstance(value, dict):
        for k, v in value.items():
            _assert_finite(v, f"{path}.{k}")
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _assert_finite(v, f"{path}[{i}]")


def _respond(payload: dict) -> JSONResponse:
    _assert_finite(payload)
    return JSONResponse(payload)


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    app = FastAPI(title="hndlx", version="0.1.0", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    def _on_body_error(request: Request, exc: RequestValidationError):
        errors = [{"field": ".".join(str(p) for p in err["loc"] if p != "body"),
                   "message": err["msg"]} for err in exc.errors()]
        return JSONResponse(status_code=400,
                            content={"detail": {"errors": errors}})

    def _profile_or_400(body: ProfileBody) -> OrganizationProfile:
        profile = OrganizationProfile(org_id=body.org_id, V=body.V, E=body.E,
                                      T_D=body.T_D, sector_id=body.sector_id,
                                      M=body.M)
        errors = profile.validate(m_max=config.m_max)
        if errors:
            raise _field_errors(errors)
        return profile

    def _prior_or_422(sector_id: str):
        prior = config.sectors.get(sector_id)
        if prior is None:
            raise HTTPException(status_code=422,
                                detail=f"unknown sector {sector_id!r}")
        return prior

    @app.post(API_PREFIX + "/score")
    def score(body: ScoreRequest):
        profile = _profile_or_400(body)
        prior = _prior_or_422(profile.sector_id)
        params = _merge_params(config.params, body.params)
        t0 = body.t0 if body.t0 is not None else default_t0()
        report = ieq_score(profile, params, prior, t0, m_max=config.m_max)
        return _respond(report.to_dict())

    @app.post(API_PREFIX + "/whatif")
    def whatif(body: WhatIfBody):
        profile = _profile_or_400(body.base)
        prior = _prior_or_422(profile.sector_id)
        params = _merge_params(config.params, body.params)
        t0 = body.t0 if body.t0 is not None else default_t0()
        try:
            actions = [Action(kind=a.kind, magnitude=a.magnitude)
                       for a in body.actions]
        except ValidationError as exc:
            raise _field_errors(exc.fields) from exc
        result = evaluate_whatif(profile, actions, params, prior, t0,
                                 m_max=config.m_max)
        return _respond(result.to_json_dict())

    @app.get(API_PREFIX + "/surface")
    def surface(request: Request):
        allowed = {"grid", "h", "m"}
        unknown = set(request.query_params) - allowed
        if unknown:
            raise HTTPException(status_code=400,
                                detail=f"unknown query keys: {sorted(unknown)}")
        try:
            grid = int(request.query_params.get("grid", "25"))
            h = float(request.query_params.get("h", "0.6"))
            m = float(request.query_params.get("m", "1.15"))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if grid < 2 or grid > 512:
            raise HTTPException(status_code=400,
                                detail=f"grid must be in [2, 512], got {grid}")
        if not (0.0 < h <= 1.0) or m < 1.0:
            raise HTTPException(status_code=400,
                                detail="need 0 < h <= 1 and m >= 1")
        points = surface_points(config.params, h, m, grid)
        return _respond({"grid": grid, "h": h, "m": m,
                         "params": config.params.to_dict(), "nodes": points})

    @app.get(API_PREFIX + "/sectors")
    def sectors():
        table = sector_table_to_dict(config.sectors)
        return _respond({"sectors": [{"sector_id": sid, **entry}
                                     for sid, entry in sorted(table.items())]})

    @app.get(API_PREFIX + "/params/defaults")
    def defaults():
        return _respond({"params": config.params.to_dict(),
                         "m_max": config.m_max,
                         "z_crit": config.z_crit,
                         "t0_default": default_t0()})

    return app


app = create_app()
