"""What-if scenario evaluation: marginal return of candidate actions.

Action semantics (fractions move multiplicatively, the governance stack
additively, rates multiplicatively):

    reduce_V            V   <- V * (1 - magnitude)
    reduce_E            E   <- E * (1 - magnitude)
    reduce_TD           T_D <- T_D * (1 - magnitude)
    extend_defense      mu  <- mu * (1 + magnitude)   (so theta scales up)
    improve_governance  M   <- max(1, M - magnitude)

Post-action values are clamped into their valid domains and the clamp is
flagged, never rejected. Deltas are reported as improvements: base minus
new, so a positive delta_ieq means the action lowered the score.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ValidationError
from .model import (
    DEFAULT_M_MAX,
    ModelParams,
    OrganizationProfile,
    ScoreReport,
    SectorPrior,
    ieq_score,
)

ACTION_KINDS = ("reduce_V", "reduce_E", "extend_defense", "reduce_TD",
                "improve_governance")

_MIN_TD = 1e-6


@dataclass(frozen=True)
class Action:
    kind: str
    magnitude: float

    def __post_init__(self):
        errors = []
        if self.kind not in ACTION_KINDS:
            errors.append(("kind", f"unknown action kind {self.kind!r}"))
        if not (self.magnitude > 0):
            errors.append(("magnitude", f"must be > 0, got {self.magnitude}"))
        if errors:
            raise ValidationError(errors)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "magnitude": self.magnitude}

    @classmethod
    def from_dict(cls, d: dict) -> "Action":
        return cls(kind=str(d.get("kind")), magnitude=float(d.get("magnitude", 0.0)))


def apply_action(profile: OrganizationProfile, params: ModelParams,
                 action: Action,
                 m_max: float = DEFAULT_M_MAX) -> tuple[OrganizationProfile, ModelParams, bool]:
    """Apply one action; returns (profile, params, clamped)."""
    clamped = False
    if action.kind == "reduce_V":
        v = profile.V * (1.0 - action.magnitude)
        if v < 0.0:
            v, clamped = 0.0, True
        profile = replace(profile, V=v)
    elif action.kind == "reduce_E":
        e = profile.E * (1.0 - action.magnitude)
        if e < 0.0:
            e, clamped = 0.0, True
        profile = replace(profile, E=e)
    elif action.kind == "reduce_TD":
        td = profile.T_D * (1.0 - action.magnitude)
        if td < _MIN_TD:
            td, clamped = _MIN_TD, True
        profile = replace(profile, T_D=td)
    elif action.kind == "improve_governance":
        m = profile.M - action.magnitude
        if m < 1.0:
            m, clamped = 1.0, True
        profile = replace(profile, M=m)
    else:  # extend_defense
        params = replace(params, mu=params.mu * (1.0 + action.magnitude))
    return profile, params, clamped


@dataclass
class ActionOutcome:
    action: Action
    report: ScoreReport
    delta_ieq: float         # base - new (positive = improvement)
    delta_p_hndl: float
    clamped: bool

    def to_json_dict(self) -> dict:
        return {"action": self.action.to_dict(),
                "new_report": self.report.to_dict(),
                "delta_ieq": self.delta_ieq,
                "delta_p_hndl": self.delta_p_hndl,
                "clamped": self.clamped}


@dataclass
class WhatIfResult:
    base_report: ScoreReport
    per_action: list[ActionOutcome]
    combined: ScoreReport
    combined_clamped: bool
    ranking: list[int] = field(default_factory=list)   # indices into per_action

    def to_json_dict(self) -> dict:
        return {"base_report": self.base_report.to_dict(),
                "per_action": [o.to_json_dict() for o in self.per_action],
                "combined": self.combined.to_dict(),
                "combined_clamped": self.combined_clamped,
                "ranking": self.ranking}


def evaluate_whatif(profile: OrganizationProfile, actions: list[Action],
                    params: ModelParams, prior: SectorPrior, t0: float,
                    m_max: float = DEFAULT_M_MAX) -> WhatIfResult:
    """Score base, each action alone, and all actions applied in order.

    Ranking sorts actions by delta_ieq descending; ties keep submission
    order (stable sort over the original index).
    """
    base = ieq_score(profile, params, prior, t0, m_max=m_max)

    outcomes: list[ActionOutcome] = []
    for action in actions:
        p2, params2, clamped = apply_action(profile, params, action, m_max=m_max)
        report = ieq_score(p2, params2, prior, t0, m_max=m_max)
        outcomes.append(ActionOutcome(
            action=action, report=report,
            delta_ieq=base.ieq - report.ieq,
            delta_p_hndl=base.p_hndl - report.p_hndl,
            clamped=clamped))

    combined_profile, combined_params, combined_clamped = profile, params, False
    for action in actions:
        combined_profile, combined_params, clamped = apply_action(
            combined_profile, combined_params, action, m_max=m_max)
        combined_clamped = combined_clamped or clamped
    combined = ieq_score(combined_profile, combined_params, prior, t0, m_max=m_max)

    ranking = sorted(range(len(outcomes)),
                     key=lambda i: (-outcomes[i].delta_ieq, i))
    return WhatIfResult(base_report=base, per_action=outcomes,
                        combined=combined, combined_clamped=combined_clamped,
                        ranking=ranking)
