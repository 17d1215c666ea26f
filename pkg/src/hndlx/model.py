"""Core HNDL exposure model: hazard, rates, contest, elasticities, index.

The model answers one question per organization: what is the probability
that traffic harvested today is decrypted while it still matters?

Structure
---------
Two racing constant-rate processes, conditional on a cryptographically
relevant quantum computer (CRQC) existing:

    attacker exploitation rate   lambda_A = lambda0 * V^a * E^b
    defender remediation rate    lambda_D = mu

V is the quantum-vulnerable fraction of the cryptographic surface, E the
operational exposure of that surface. The attacker wins the race with the
Tullock contest probability

    P(exploit | CRQC) = lambda_A / (lambda_A + lambda_D) = u / (u + theta)

with u = V^a E^b and theta = mu / lambda0. The CRQC arrival itself is a
logistic hazard in calendar time with sector-specific median maturity:

    H = 1 / (1 + exp(-k * (t0 + T_D - mu_s)))

and the compromise probability factorizes (total probability, arrival
independent of any one organization's posture):

    P_HNDL = H * u / (u + theta)

Log-sensitivities of P_HNDL are endogenous, not fixed weights:

    beta(V, E)  = a * theta / (u + theta)     (w.r.t. ln V)
    gamma(V, E) = b * theta / (u + theta)     (w.r.t. ln E)

They decay from their prior values (a, b) in the defense-dominant regime
(u << theta) to zero at saturation (u >> theta). The operational 0..100
index applies floors, a local log-linearization at the floored point, and
a governance penalty multiplier M >= 1:

    IEQ = 100 * min(1, H' * V'^beta * E'^gamma * M),   x' = max(x, epsilon)

Every function here is pure and scalar; batch and vectorized callers live
in the portfolio and diagnostics modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, InvalidInputError, ValidationError

# Logistic slope placing hazard 0.1 / 0.9 exactly ten years either side of
# the sector median maturity year.
DEFAULT_SLOPE = math.log(9.0) / 10.0

# Default governance multiplier cap for profile validation.
DEFAULT_M_MAX = 2.0


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidInputError(f"{name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise InvalidInputError(f"{name} must be finite, got {value!r}")


def _pow(base: float, exponent: float) -> float:
    """base**exponent via exp(exponent * ln(base)), exact at trivial cases.

    Exact 1.0 bases, unit exponents, and zero exponents return without any
    transcendental call so that points like V = E = 1 carry no drift.
    """
    if base == 1.0 or exponent == 0.0:
        return 1.0
    if exponent == 1.0:
        return base
    return math.exp(exponent * math.log(base))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Structural constants of the exposure model.

    theta = mu / lambda0 is the only combination the compromise probability
    depends on; lambda0 and mu are kept separate because absolute rates are
    needed to simulate the underlying exponential race.
    """

    a: float = 1.0
    b: float = 0.5
    lambda0: float = 1.0
    mu: float = 1.0
    epsilon: float = 0.01

    def __post_init__(self):
        _require_finite(a=self.a, b=self.b, lambda0=self.lambda0,
                        mu=self.mu, epsilon=self.epsilon)
        errors = []
        if self.a <= 0:
            errors.append(("a", f"must be > 0, got {self.a}"))
        if self.b <= 0:
            errors.append(("b", f"must be > 0, got {self.b}"))
        if self.lambda0 <= 0:
            errors.append(("lambda0", f"must be > 0, got {self.lambda0}"))
        if self.mu <= 0:
            errors.append(("mu", f"must be > 0, got {self.mu}"))
        if not (0.0 < self.epsilon < 1.0):
            errors.append(("epsilon", f"must be in (0, 1), got {self.epsilon}"))
        if errors:
            raise ValidationError(errors)

    @property
    def theta(self) -> float:
        """Defense-attack intensity ratio mu / lambda0 (never stored)."""
        return self.mu / self.lambda0

    @classmethod
    def from_theta(cls, theta: float, a: float = 1.0, b: float = 0.5,
                   epsilon: float = 0.01) -> "ModelParams":
        """Convenience constructor: lambda0 = 1, mu = theta."""
        return cls(a=a, b=b, lambda0=1.0, mu=theta, epsilon=epsilon)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "lambda0": self.lambda0,
                "mu": self.mu, "epsilon": self.epsilon, "theta": self.theta}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        d = dict(d)
        if "theta" in d and "mu" not in d and "lambda0" not in d:
            return cls.from_theta(float(d["theta"]),
                                  a=float(d.get("a", 1.0)),
                                  b=float(d.get("b", 0.5)),
                                  epsilon=float(d.get("epsilon", 0.01)))
        d.pop("theta", None)  # derived, never trusted from input
        known = {"a", "b", "lambda0", "mu", "epsilon"}
        unknown = set(d) - known
        if unknown:
            raise ValidationError([(k, "unknown parameter") for k in sorted(unknown)])
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class SectorPrior:
    """CRQC arrival prior for one sector: median maturity year and slope."""

    sector_id: str
    mu_s: float
    k: float = DEFAULT_SLOPE

    def __post_init__(self):
        _require_finite(mu_s=self.mu_s, k=self.k)
        if self.k <= 0:
            raise ValidationError([("k", f"must be > 0, got {self.k}")])

    def to_dict(self) -> dict:
        return {"sector_id": self.sector_id, "mu_s": self.mu_s, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "SectorPrior":
        return cls(sector_id=str(d["sector_id"]), mu_s=float(d["mu_s"]),
                   k=float(d.get("k", DEFAULT_SLOPE)))


@dataclass(frozen=True)
class OrganizationProfile:
    """One organization's inputs.

    Raw V and E may be exactly 0 (the scoring floor lifts them); anything
    negative or above 1 is rejected. M is the governance penalty multiplier.
    """

    org_id: str
    V: float
    E: float
    T_D: float
    sector_id: str
    M: float = 1.0

    def validate(self, m_max: float = DEFAULT_M_MAX) -> list[tuple[str, str]]:
        """Return every field violation; empty list means valid."""
        errors: list[tuple[str, str]] = []
        if not self.org_id:
            errors.append(("org_id", "must be non-empty"))
        for name in ("V", "E", "T_D", "M"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) \
                    or not math.isfinite(value):
                errors.append((name, f"must be a finite number, got {value!r}"))
        if errors:
            return errors
        if not (0.0 <= self.V <= 1.0):
            errors.append(("V", f"must be in [0, 1], got {self.V}"))
        if not (0.0 <= self.E <= 1.0):
            errors.append(("E", f"must be in [0, 1], got {self.E}"))
        if self.T_D <= 0:
            errors.append(("T_D", f"must be > 0, got {self.T_D}"))
        if self.M < 1.0:
            errors.append(("M", f"must be >= 1, got {self.M}"))
        elif self.M > m_max:
            errors.append(("M", f"must be <= {m_max}, got {self.M}"))
        if not self.sector_id:
            errors.append(("sector_id", "must be non-empty"))
        return errors

    def ensure_valid(self, m_max: float = DEFAULT_M_MAX) -> None:
        errors = self.validate(m_max=m_max)
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {"org_id": self.org_id, "V": self.V, "E": self.E,
                "T_D": self.T_D, "sector_id": self.sector_id, "M": self.M}

    @classmethod
    def from_dict(cls, d: dict) -> "OrganizationProfile":
        return cls(org_id=str(d["org_id"]), V=float(d["V"]), E=float(d["E"]),
                   T_D=float(d["T_D"]), sector_id=str(d["sector_id"]),
                   M=float(d.get("M", 1.0)))


@dataclass(frozen=True)
class FloorFlags:
    """Which inputs were lifted to epsilon before scoring."""

    h: bool = False
    v: bool = False
    e: bool = False

    def any(self) -> bool:
        return self.h or self.v or self.e

    def to_dict(self) -> dict:
        return {"h": self.h, "v": self.v, "e": self.e}

    @classmethod
    def from_dict(cls, d: dict) -> "FloorFlags":
        return cls(h=bool(d["h"]), v=bool(d["v"]), e=bool(d["e"]))


@dataclass(frozen=True)
class ScoreReport:
    """Per-organization scoring output.

    All numeric fields are evaluated at the FLOORED inputs, so the exact
    identities hold field-to-field:

        p_hndl = h * p_exploit
        beta / a = gamma / b = 1 - p_exploit
    """

    org_id: str
    h: float
    u: float
    r: float
    p_exploit: float
    p_hndl: float
    beta: float
    gamma: float
    ieq: float
    floored: FloorFlags = field(default_factory=FloorFlags)
    clipped: bool = False

    def to_dict(self) -> dict:
        return {"org_id": self.org_id, "h": self.h, "u": self.u, "r": self.r,
                "p_exploit": self.p_exploit, "p_hndl": self.p_hndl,
                "beta": self.beta, "gamma": self.gamma, "ieq": self.ieq,
                "floored": self.floored.to_dict(), "clipped": self.clipped}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        return cls(org_id=str(d["org_id"]), h=float(d["h"]), u=float(d["u"]),
                   r=float(d["r"]), p_exploit=float(d["p_exploit"]),
                   p_hndl=float(d["p_hndl"]), beta=float(d["beta"]),
                   gamma=float(d["gamma"]), ieq=float(d["ieq"]),
                   floored=FloorFlags.from_dict(d["floored"]),
                   clipped=bool(d["clipped"]))


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


def temporal_hazard(t0: float, T_D: float, prior: SectorPrior) -> float:
    """Probability the CRQC arrives within the data's adversarial horizon.

    Logistic CDF of the arrival year evaluated at t0 + T_D; strictly
    increasing in both t0 and T_D. Mathematically in (0, 1); for arguments
    tens of slope-widths past the median the float rounds to the boundary.
    """
    _require_finite(t0=t0, T_D=T_D)
    if T_D <= 0:
        raise DomainError(f"T_D must be > 0, got {T_D}")
    x = prior.k * (t0 + T_D - prior.mu_s)
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return ex / (1.0 + ex)


def attack_rate(V: float, E: float, params: ModelParams) -> float:
    """Attacker exploitation rate lambda0 * V^a * E^b.

    Raises DomainError outside (0, 1]; callers apply floors first.
    """
    _require_finite(V=V, E=E)
    if not (0.0 < V <= 1.0):
        raise DomainError(f"V must be in (0, 1], got {V}")
    if not (0.0 < E <= 1.0):
        raise DomainError(f"E must be in (0, 1], got {E}")
    return params.lambda0 * _pow(V, params.a) * _pow(E, params.b)


def attack_rate_cross_partial(V: float, E: float, params: ModelParams) -> float:
    """d^2 lambda_A / dV dE = lambda0 * a * b * V^(a-1) * E^(b-1), always > 0.

    Strict positivity is the complementarity of vulnerability and exposure
    in attack production.
    """
    _require_finite(V=V, E=E)
    if V <= 0 or E <= 0:
        raise DomainError("V and E must be > 0")
    return (params.lambda0 * params.a * params.b
            * _pow(V, params.a - 1.0) * _pow(E, params.b - 1.0))


def contest_probability(lambda_A: float, lambda_D: float) -> float:
    """Tullock contest: probability the attacker's exponential clock fires first."""
    _require_finite(lambda_A=lambda_A, lambda_D=lambda_D)
    if lambda_A < 0:
        raise DomainError(f"lambda_A must be >= 0, got {lambda_A}")
    if lambda_D <= 0:
        raise DomainError(f"lambda_D must be > 0, got {lambda_D}")
    return lambda_A / (lambda_A + lambda_D)


def q_exponential(x: float, q: float) -> float:
    """Deformed exponential e_q^(-x) = [1 + (q-1) x]^(-1/(q-1)), q != 1."""
    _require_finite(x=x, q=q)
    if q == 1.0:
        raise DomainError("q = 1 is the ordinary exponential; use math.exp")
    base = 1.0 + (q - 1.0) * x
    if base <= 0:
        raise DomainError(f"1 + (q-1)x must be > 0, got {base}")
    return _pow(base, -1.0 / (q - 1.0))


def q_exponential_defender_win(u: float, theta: float) -> float:
    """Defender-win probability theta / (u + theta).

    Equals the q = 2 deformed exponential of the regime ratio u / theta;
    complements the attacker's contest probability to exactly 1.
    """
    _require_finite(u=u, theta=theta)
    if theta <= 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    if u < 0:
        raise DomainError(f"u must be >= 0, got {u}")
    return theta / (u + theta)


def p_exploit(V: float, E: float, params: ModelParams) -> float:
    """Conditional exploitation probability u / (u + theta), u = V^a E^b."""
    u = attack_rate(V, E, params) / params.lambda0
    return u / (u + params.theta)


def p_hndl(V: float, E: float, H: float, params: ModelParams) -> float:
    """Compromise probability H * u / (u + theta); bounded above by H."""
    _require_finite(H=H)
    if not (0.0 < H <= 1.0):
        raise DomainError(f"H must be in (0, 1], got {H}")
    return H * p_exploit(V, E, params)


def elasticities(V: float, E: float, params: ModelParams) -> tuple[float, float]:
    """Endogenous log-sensitivities (beta, gamma) of P_HNDL at (V, E).

    beta = a * theta / (u + theta) in (0, a]; gamma likewise in (0, b].
    beta / gamma = a / b identically.
    """
    u = attack_rate(V, E, params) / params.lambda0
    denom = u + params.theta
    return params.a * params.theta / denom, params.b * params.theta / denom


def regime_ratio(V: float, E: float, params: ModelParams) -> float:
    """r = u / theta; r < 1 is defense-dominant, r > 1 attack-dominant."""
    u = attack_rate(V, E, params) / params.lambda0
    return u / params.theta


def log_linear_approx(V0: float, E0: float, V: float, E: float, H: float,
                      params: ModelParams) -> float:
    """First-order expansion of ln P_HNDL in (ln V, ln E) around (V0, E0).

    Exact at the expansion point by construction.
    """
    beta0, gamma0 = elasticities(V0, E0, params)
    anchor = math.log(p_hndl(V0, E0, H, params))
    _require_finite(V=V, E=E)
    if not (0.0 < V <= 1.0) or not (0.0 < E <= 1.0):
        raise DomainError("V and E must be in (0, 1]")
    return (anchor
            + beta0 * (math.log(V) - math.log(V0))
            + gamma0 * (math.log(E) - math.log(E0)))


def natural_cross_partial(V: float, E: float, H: float,
                          params: ModelParams) -> float:
    """d^2 P_HNDL / dV dE in natural coordinates.

    H * a * b * theta * V^(a-1) * E^(b-1) * (theta - u) / (u + theta)^3;
    positive in the defense-dominant regime, negative past saturation,
    zero exactly at u = theta.
    """
    _require_finite(H=H)
    u = attack_rate(V, E, params) / params.lambda0
    theta = params.theta
    return (H * params.a * params.b * theta
            * _pow(V, params.a - 1.0) * _pow(E, params.b - 1.0)
            * (theta - u) / (u + theta) ** 3)


def log_cross_partial(V: float, E: float, params: ModelParams) -> float:
    """d^2 ln P_HNDL / d ln V d ln E = -a b theta u / (u + theta)^2.

    Strictly negative for all positive finite inputs: the saturation
    signature that separates this family from any additively separable
    score (whose log cross-partial is identically zero).
    """
    u = attack_rate(V, E, params) / params.lambda0
    theta = params.theta
    return -params.a * params.b * theta * u / (u + theta) ** 2


def apply_floor(x: float, epsilon: float) -> tuple[float, bool]:
    """max(x, epsilon) plus a flag saying whether the floor engaged."""
    if x < epsilon:
        return epsilon, True
    return x, False


def ieq_score(profile: OrganizationProfile, params: ModelParams,
              prior: SectorPrior, t0: float,
              m_max: float = DEFAULT_M_MAX) -> ScoreReport:
    """Score one organization: floors, elasticities at the floored point,
    governance multiplier, 0..100 clip.

    The report's h/u/r/p fields are all evaluated at the floored inputs so
    its documented identities hold exactly.
    """
    profile.ensure_valid(m_max=m_max)
    h_raw = temporal_hazard(t0, profile.T_D, prior)
    h, floored_h = apply_floor(h_raw, params.epsilon)
    v, floored_v = apply_floor(profile.V, params.epsilon)
    e, floored_e = apply_floor(profile.E, params.epsilon)

    u = attack_rate(v, e, params) / params.lambda0
    theta = params.theta
    r = u / theta
    pe = u / (u + theta)
    beta = params.a * theta / (u + theta)
    gamma = params.b * theta / (u + theta)

    core = h * _pow(v, beta) * _pow(e, gamma) * profile.M
    clipped = core >= 1.0
    ieq = 100.0 * (1.0 if clipped else core)

    return ScoreReport(
        org_id=profile.org_id,
        h=h, u=u, r=r,
        p_exploit=pe, p_hndl=h * pe,
        beta=beta, gamma=gamma, ieq=ieq,
        floored=FloorFlags(h=floored_h, v=floored_v, e=floored_e),
        clipped=clipped,
    )
