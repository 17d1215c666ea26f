"""Score surface over the (V, E) unit square at fixed hazard and governance."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import ModelParams, _pow, apply_floor

SURFACE_COLUMNS = ("V", "E", "ieq", "beta", "gamma", "r")


def surface_point(V: float, E: float, params: ModelParams, H: float, M: float) -> dict:
    """One surface node: floored scoring at explicit hazard and multiplier."""
    h, _ = apply_floor(H, params.epsilon)
    v, _ = apply_floor(V, params.epsilon)
    e, _ = apply_floor(E, params.epsilon)
    u = _pow(v, params.a) * _pow(e, params.b)
    theta = params.theta
    beta = params.a * theta / (u + theta)
    gamma = params.b * theta / (u + theta)
    core = h * _pow(v, beta) * _pow(e, gamma) * M
    return {"V": V, "E": E, "ieq": 100.0 * min(1.0, core),
            "beta": beta, "gamma": gamma, "r": u / theta}


def surface_points(params: ModelParams, H: float, M: float, grid: int) -> list[dict]:
    """Row-major N x N sweep of the unit square (V outer, E inner)."""
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    nodes = np.linspace(0.0, 1.0, grid)
    return [surface_point(float(v), float(e), params, H, M)
            for v in nodes for e in nodes]


def write_surface_csv(points: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SURFACE_COLUMNS)
        for p in points:
            writer.writerow([repr(float(p[c])) for c in SURFACE_COLUMNS])
