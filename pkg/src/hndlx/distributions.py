"""Bounded sampling specs shared by the population generator and Sobol inputs.

Each spec exposes sample / ppf / cdf so the copula generator can push
uniforms through the exact inverse CDF and tests can run KS checks against
the same object that produced the draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValidationError([("uniform", f"lo < hi required, got [{self.lo}, {self.hi}]")])

    def ppf(self, q):
        return self.lo + (self.hi - self.lo) * np.asarray(q, dtype=float)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def sample(self, rng: np.random.Generator, n: int):
        return self.ppf(rng.random(n))

    def to_dict(self) -> dict:
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ScaledBeta:
    """Beta(alpha, beta) stretched onto [lo, hi]."""

    alpha: float
    beta: float
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError([("beta", "alpha and beta must be > 0")])
        if not (self.lo < self.hi):
            raise ValidationError([("beta", f"lo < hi required, got [{self.lo}, {self.hi}]")])

    def ppf(self, q):
        return self.lo + (self.hi - self.lo) * stats.beta.ppf(np.asarray(q, dtype=float),
                                                              self.alpha, self.beta)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo)
        return stats.beta.cdf(np.clip(z, 0.0, 1.0), self.alpha, self.beta)

    def sample(self, rng: np.random.Generator, n: int):
        return self.ppf(rng.random(n))

    def to_dict(self) -> dict:
        return {"kind": "beta", "alpha": self.alpha, "beta": self.beta,
                "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class TruncatedLogNormal:
    """Log-normal with given median and log-sd, truncated to [lo, hi].

    Truncation is exact: uniforms are mapped through the conditional inverse
    CDF, so ppf/cdf and sample agree with each other.
    """

    median: float
    sigma: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.median <= 0 or self.sigma <= 0:
            raise ValidationError([("lognormal", "median and sigma must be > 0")])
        if not (0 < self.lo < self.hi):
            raise ValidationError([("lognormal", f"0 < lo < hi required, got [{self.lo}, {self.hi}]")])

    def _base(self):
        return stats.lognorm(s=self.sigma, scale=self.median)

    def ppf(self, q):
        base = self._base()
        c_lo, c_hi = base.cdf(self.lo), base.cdf(self.hi)
        return base.ppf(c_lo + np.asarray(q, dtype=float) * (c_hi - c_lo))

    def cdf(self, x):
        base = self._base()
        c_lo, c_hi = base.cdf(self.lo), base.cdf(self.hi)
        z = (base.cdf(np.clip(np.asarray(x, dtype=float), self.lo, self.hi)) - c_lo) / (c_hi - c_lo)
        return np.clip(z, 0.0, 1.0)

    def sample(self, rng: np.random.Generator, n: int):
        return self.ppf(rng.random(n))

    def to_dict(self) -> dict:
        return {"kind": "lognormal", "median": self.median, "sigma": self.sigma,
                "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Constant:
    """Degenerate point mass; ppf ignores its argument."""

    value: float

    def ppf(self, q):
        return np.full_like(np.asarray(q, dtype=float), self.value)

    def cdf(self, x):
        return (np.asarray(x, dtype=float) >= self.value).astype(float)

    def sample(self, rng: np.random.Generator, n: int):
        return np.full(n, self.value)

    def to_dict(self) -> dict:
        return {"kind": "constant", "value": self.value}


Distribution = Uniform | ScaledBeta | TruncatedLogNormal | Constant

# kind -> (class, required fields, optional fields)
_KINDS = {
    "uniform": (Uniform, ("lo", "hi"), ()),
    "beta": (ScaledBeta, ("alpha", "beta"), ("lo", "hi")),
    "lognormal": (TruncatedLogNormal, ("median", "sigma", "lo", "hi"), ()),
    "constant": (Constant, ("value",), ()),
}


def dist_from_dict(d: dict) -> Distribution:
    """Build a distribution from its {kind, ...} JSON form."""
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValidationError([("kind", f"unknown distribution kind {kind!r}")])
    cls, required, optional = _KINDS[kind]
    missing = [f for f in required if f not in d]
    if missing:
        raise ValidationError([(f, "required for " + kind) for f in missing])
    kwargs = {f: float(d[f]) for f in (*required, *optional) if f in d}
    return cls(**kwargs)
