"""Alternative scoring families behind one interface, plus fitting.

Four families, each isolating one structural deviation:

    structural    ln[u / (u + theta)],  u = V^a E^b   (the reference form)
    ces           same contest, CES aggregator replacing V^a E^b
                  (unlimited substitutability between V and E)
    log_additive  affine in (ln V, ln E): fixed weights, no interaction
    threshold     sigmoid-gated structural form: superlinear activation

log_score(V, E) is the log of the conditional exploitation probability
(except log_additive, which is the affine surrogate directly). score() is
the comparable 0..100 operational index 100 * min(1, H * exp(log_score) * M).

Fitting minimizes mean squared error in log-score, which is Gaussian
maximum likelihood with the variance profiled out; per-observation
log-likelihoods under that profiled-variance model feed the Vuong
comparison downstream.

Note on the CES family: with rho free the CES aggregator contains the
structural form as its rho -> 0 limit, so fitting rho would let CES mimic
the structural model exactly and void every contrast built on it. rho is
therefore a fixed structural choice of the family (default -1, harmonic
regime) and fit_model only estimates (w, s, theta) unless fit_rho=True is
passed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, lsq_linear

from .errors import (
    FitConvergenceError,
    InvalidInputError,
    NonIdentifiableError,
    ValidationError,
)

FAMILIES = ("structural", "ces", "log_additive", "threshold")

# |rho| below this uses the exact rho -> 0 geometric-mean limit.
RHO_LIMIT = 1e-8

# Hard-threshold models return ln of this probability floor in the
# inactive region instead of -inf.
LOG_SCORE_FLOOR = 1e-12


@dataclass(frozen=True)
class StructuralParams:
    a: float = 1.0
    b: float = 0.5
    theta: float = 1.0

    def __post_init__(self):
        bad = [(n, f"must be > 0, got {getattr(self, n)}")
               for n in ("a", "b", "theta") if getattr(self, n) <= 0]
        if bad:
            raise ValidationError(bad)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "theta": self.theta}


@dataclass(frozen=True)
class CesParams:
    w: float = 0.5
    rho: float = -1.0
    s: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        errors = []
        if not (0.0 < self.w < 1.0):
            errors.append(("w", f"must be in (0, 1), got {self.w}"))
        if self.rho == 0.0:
            errors.append(("rho", "must be nonzero (rho -> 0 is the geometric-mean limit)"))
        if self.s <= 0:
            errors.append(("s", f"must be > 0, got {self.s}"))
        if self.theta <= 0:
            errors.append(("theta", f"must be > 0, got {self.theta}"))
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {"w": self.w, "rho": self.rho, "s": self.s, "theta": self.theta}


@dataclass(frozen=True)
class LogAdditiveParams:
    w1: float = 0.5
    w2: float = 0.25
    c: float = -0.7

    def __post_init__(self):
        bad = [(n, f"must be > 0, got {getattr(self, n)}")
               for n in ("w1", "w2") if getattr(self, n) <= 0]
        if bad:
            raise ValidationError(bad)

    def to_dict(self) -> dict:
        return {"w1": self.w1, "w2": self.w2, "c": self.c}


@dataclass(frozen=True)
class ThresholdParams:
    """Sigmoid-gated structural form; softness = 0 is a hard step."""

    tau_V: float = 0.5
    tau_E: float = 0.5
    softness: float = 0.05
    a: float = 1.0
    b: float = 0.5
    theta: float = 1.0

    def __post_init__(self):
        errors = []
        if not (0.0 < self.tau_V < 1.0):
            errors.append(("tau_V", f"must be in (0, 1), got {self.tau_V}"))
        if not (0.0 < self.tau_E < 1.0):
            errors.append(("tau_E", f"must be in (0, 1), got {self.tau_E}"))
        if self.softness < 0:
            errors.append(("softness", f"must be >= 0, got {self.softness}"))
        for n in ("a", "b", "theta"):
            if getattr(self, n) <= 0:
                errors.append((n, f"must be > 0, got {getattr(self, n)}"))
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {"tau_V": self.tau_V, "tau_E": self.tau_E,
                "softness": self.softness, "a": self.a, "b": self.b,
                "theta": self.theta}


_PARAM_CLASSES = {
    "structural": StructuralParams,
    "ces": CesParams,
    "log_additive": LogAdditiveParams,
    "threshold": ThresholdParams,
}


@dataclass(frozen=True)
class ScoringModel:
    """A scoring family plus its parameter record."""

    family: str
    params: StructuralParams | CesParams | LogAdditiveParams | ThresholdParams

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError([("family", f"unknown family {self.family!r}")])
        expected = _PARAM_CLASSES[self.family]
        if not isinstance(self.params, expected):
            raise ValidationError([("params", f"{self.family} needs {expected.__name__}")])

    def log_score(self, V, E):
        return model_log_score(self, V, E)

    def score(self, V, E, H, M):
        """Comparable 0..100 index: 100 * min(1, H * exp(log_score) * M)."""
        raw = H * np.exp(model_log_score(self, V, E)) * M
        return 100.0 * np.minimum(1.0, raw)

    def to_dict(self) -> dict:
        return {"family": self.family, "parameters": self.params.to_dict()}


def model_from_dict(d: dict) -> ScoringModel:
    family = d.get("family")
    if family not in _PARAM_CLASSES:
        raise ValidationError([("family", f"unknown family {family!r}")])
    return ScoringModel(family=family,
                        params=_PARAM_CLASSES[family](**d.get("parameters", {})))


def default_model(family: str) -> ScoringModel:
    """Family at its documented default parameters."""
    if family not in _PARAM_CLASSES:
        raise ValidationError([("family", f"unknown family {family!r}")])
    return ScoringModel(family=family, params=_PARAM_CLASSES[family]())


def structural_model(a: float = 1.0, b: float = 0.5, theta: float = 1.0) -> ScoringModel:
    return ScoringModel("structural", StructuralParams(a=a, b=b, theta=theta))


def ces_aggregator(V, E, p: CesParams):
    """(w V^rho + (1-w) E^rho)^(s/rho); exact geometric-mean limit near rho = 0."""
    V = np.asarray(V, dtype=float)
    E = np.asarray(E, dtype=float)
    if not (np.all(np.isfinite(V)) and np.all(np.isfinite(E))):
        raise InvalidInputError("V and E must be finite")
    if abs(p.rho) < RHO_LIMIT:
        return np.exp(p.s * (p.w * np.log(V) + (1.0 - p.w) * np.log(E)))
    g = p.w * V ** p.rho + (1.0 - p.w) * E ** p.rho
    return g ** (p.s / p.rho)


def _gate(x, tau: float, softness: float):
    if softness == 0.0:
        return (np.asarray(x, dtype=float) >= tau).astype(float)
    return 1.0 / (1.0 + np.exp(-(np.asarray(x, dtype=float) - tau) / softness))


def threshold_activation(V, E, p: ThresholdParams):
    """Product of per-dimension gates; in {0, 1} when softness = 0."""
    return _gate(V, p.tau_V, p.softness) * _gate(E, p.tau_E, p.softness)


def model_log_score(model: ScoringModel, V, E):
    """Log-score of any family at (V, E); vectorized over numpy inputs.

    Hard-threshold models return ln(LOG_SCORE_FLOOR) in the inactive
    region instead of -inf so downstream statistics stay finite.
    """
    V = np.asarray(V, dtype=float)
    E = np.asarray(E, dtype=float)
    if not (np.all(np.isfinite(V)) and np.all(np.isfinite(E))):
        raise InvalidInputError("V and E must be finite")
    p = model.params
    if model.family == "structural":
        u = V ** p.a * E ** p.b
        out = np.log(u) - np.log(u + p.theta)
    elif model.family == "ces":
        u = ces_aggregator(V, E, p)
        out = np.log(u) - np.log(u + p.theta)
    elif model.family == "log_additive":
        out = p.w1 * np.log(V) + p.w2 * np.log(E) + p.c
    else:  # threshold
        u = V ** p.a * E ** p.b
        prob = threshold_activation(V, E, p) * u / (u + p.theta)
        out = np.log(np.maximum(prob, LOG_SCORE_FLOOR))
    if V.ndim == 0 and E.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


@dataclass
class FitResult:
    """Fitted model plus goodness record and per-observation log-likelihoods."""

    model: ScoringModel
    mse: float
    n: int
    seed: int
    loglik: np.ndarray
    converged: bool
    trace: list[dict]

    def to_json_dict(self) -> dict:
        return {"family": self.model.family,
                "parameters": self.model.params.to_dict(),
                "fit_meta": {"seed": self.seed, "mse": self.mse, "n": self.n}}


def _profiled_loglik(residuals: np.ndarray) -> np.ndarray:
    """Per-observation Gaussian log-likelihood with sigma^2 profiled to the MLE."""
    sigma2 = max(float(np.mean(residuals ** 2)), 1e-30)
    return -0.5 * np.log(2.0 * np.pi * sigma2) - residuals ** 2 / (2.0 * sigma2)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


class _FamilySpec:
    """Transform between an unconstrained optimizer vector and family params."""

    def __init__(self, family: str, fixed_rho: float | None, fit_rho: bool):
        self.family = family
        self.fixed_rho = fixed_rho
        self.fit_rho = fit_rho

    @property
    def n_params(self) -> int:
        return {"structural": 3, "ces": 4 if self.fit_rho else 3,
                "log_additive": 3, "threshold": 6}[self.family]

    def center(self, init) -> np.ndarray:
        if init is not None:
            return self.to_vector(init)
        defaults = {
            "structural": StructuralParams(),
            "ces": CesParams(rho=self.fixed_rho if self.fixed_rho is not None else -1.0),
            "threshold": ThresholdParams(),
        }
        return self.to_vector(defaults[self.family])

    def to_vector(self, p) -> np.ndarray:
        if self.family == "structural":
            return np.array([math.log(p.a), math.log(p.b), math.log(p.theta)])
        if self.family == "ces":
            v = [_logit(p.w), math.log(p.s), math.log(p.theta)]
            if self.fit_rho:
                v.append(p.rho)
            return np.array(v)
        return np.array([_logit(p.tau_V), _logit(p.tau_E),
                         math.log(max(p.softness, 1e-6)), math.log(p.a),
                         math.log(p.b), math.log(p.theta)])

    def to_params(self, x: np.ndarray):
        if self.family == "structural":
            return StructuralParams(a=math.exp(x[0]), b=math.exp(x[1]),
                                    theta=math.exp(x[2]))
        if self.family == "ces":
            rho = x[3] if self.fit_rho else (self.fixed_rho if self.fixed_rho is not None else -1.0)
            if abs(rho) < RHO_LIMIT:  # keep the record's rho != 0 invariant
                rho = RHO_LIMIT if rho >= 0 else -RHO_LIMIT
            return CesParams(w=_expit(x[0]), rho=float(rho),
                             s=math.exp(x[1]), theta=math.exp(x[2]))
        return ThresholdParams(tau_V=_expit(x[0]), tau_E=_expit(x[1]),
                               softness=math.exp(x[2]), a=math.exp(x[3]),
                               b=math.exp(x[4]), theta=math.exp(x[5]))

    def natural_tuple(self, x: np.ndarray) -> tuple:
        p = self.to_params(x)
        return tuple(p.to_dict()[k] for k in sorted(p.to_dict()))


def _fit_log_additive(V, E, y) -> LogAdditiveParams:
    design = np.column_stack([np.log(V), np.log(E), np.ones_like(V)])
    if np.linalg.matrix_rank(design) < 3:
        raise NonIdentifiableError(
            "log-additive design is rank-deficient (V, E carry no independent variation)")
    tiny = 1e-12
    sol = lsq_linear(design, y, bounds=([tiny, tiny, -np.inf], np.inf))
    w1, w2, c = sol.x
    return LogAdditiveParams(w1=float(max(w1, tiny)), w2=float(max(w2, tiny)), c=float(c))


def fit_model(family: str, dataset, init=None, seed: int = 0,
              n_restarts: int = 8, max_nfev: int = 4000,
              fit_rho: bool = False) -> FitResult:
    """Least-squares fit of one family to (V, E, observed log-score) triples.

    Deterministic given (seed, init): restarts draw their starting points
    from a seeded generator, the best converged objective wins, and exact
    ties break toward the lexicographically smallest parameter vector.

    Raises NonIdentifiableError on degenerate designs and
    FitConvergenceError (carrying best-so-far parameters and the restart
    trace) when no restart converges.
    """
    if family not in FAMILIES:
        raise ValidationError([("family", f"unknown family {family!r}")])
    data = np.asarray(dataset, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise InvalidInputError("dataset must be a sequence of (V, E, log_score) triples")
    if not np.all(np.isfinite(data)):
        raise InvalidInputError("dataset contains non-finite values")
    V, E, y = data[:, 0], data[:, 1], data[:, 2]
    n = len(y)

    fixed_rho = None
    if family == "ces" and init is not None:
        fixed_rho = init.rho
    spec = _FamilySpec(family, fixed_rho=fixed_rho, fit_rho=fit_rho)
    if n < 10 * spec.n_params:
        raise InvalidInputError(
            f"need at least {10 * spec.n_params} observations for {family}, got {n}")

    distinct = len(np.unique(data[:, :2], axis=0))
    if distinct < spec.n_params:
        raise NonIdentifiableError(
            f"only {distinct} distinct (V, E) pairs for {spec.n_params} parameters")

    if family == "log_additive":
        params = _fit_log_additive(V, E, y)
        model = ScoringModel("log_additive", params)
        resid = model_log_score(model, V, E) - y
        mse = float(np.mean(resid ** 2))
        return FitResult(model=model, mse=mse, n=n, seed=seed,
                         loglik=_profiled_loglik(resid), converged=True,
                         trace=[{"restart": 0, "converged": True, "mse": mse,
                                 "message": "linear least squares"}])

    def residuals(x):
        return model_log_score(ScoringModel(family, spec.to_params(x)), V, E) - y

    rng = np.random.default_rng(seed)
    center = spec.center(init)
    best = None          # (mse, natural_tuple, x, result)
    best_any = None      # same, including non-converged
    trace = []
    for restart in range(n_restarts):
        x0 = center if restart == 0 else center + rng.normal(0.0, 0.5, size=center.shape)
        try:
            res = least_squares(residuals, x0, method="lm", max_nfev=max_nfev)
        except Exception as exc:  # singular stencil, overflow in a bad corner
            trace.append({"restart": restart, "converged": False,
                          "mse": math.inf, "message": str(exc)})
            continue
        mse = float(np.mean(res.fun ** 2))
        converged = bool(res.status > 0)
        trace.append({"restart": restart, "converged": converged, "mse": mse,
                      "message": res.message})
        key = (mse, spec.natural_tuple(res.x))
        if best_any is None or key < best_any[:2]:
            best_any = (mse, key[1], res.x)
        if converged and (best is None or key < best[:2]):
            best = (mse, key[1], res.x)

    if best is None:
        raise FitConvergenceError(
            f"no restart converged for family {family!r} after {n_restarts} restarts",
            best_params=spec.to_params(best_any[2]) if best_any else None,
            trace=trace)

    mse, _, x = best
    model = ScoringModel(family, spec.to_params(x))
    resid = model_log_score(model, V, E) - y
    return FitResult(model=model, mse=float(np.mean(resid ** 2)), n=n,
                     seed=seed, loglik=_profiled_loglik(resid),
                     converged=True, trace=trace)


def make_dataset(V: Sequence[float], E: Sequence[float], log_scores: Sequence[float]) -> np.ndarray:
    """Stack parallel arrays into the (n, 3) dataset layout fit_model expects."""
    return np.column_stack([np.asarray(V, float), np.asarray(E, float),
                            np.asarray(log_scores, float)])
