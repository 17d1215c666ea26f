"""Runtime configuration: sector priors, parameter files, service config.

The shipped sector table is a PLANNING DEFAULT. No sector's CRQC median
maturity year is a calibrated or published estimate; the values below exist
so the tool runs out of the box, cluster around a generic 2035 horizon, and
are expected to be replaced by the operator's own priors via --sectors or
the config file.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, ValidationError
from .model import DEFAULT_M_MAX, DEFAULT_SLOPE, ModelParams, SectorPrior

# Default critical value for the Vuong verdict (two-sided 5%).
DEFAULT_Z_CRIT = 1.96

_DEFAULT_SECTOR_YEARS = {
    "generic": 2035.0,
    "finance": 2033.0,
    "government": 2032.0,
    "healthcare": 2034.0,
    "telecom": 2034.0,
    "energy": 2036.0,
    "manufacturing": 2037.0,
}


def default_sector_table() -> dict[str, SectorPrior]:
    """Planning-default sector priors, slope ln(9)/10 throughout."""
    return {sid: SectorPrior(sector_id=sid, mu_s=year, k=DEFAULT_SLOPE)
            for sid, year in _DEFAULT_SECTOR_YEARS.items()}


def default_t0() -> float:
    """Assessment epoch default: the current calendar year."""
    return float(datetime.date.today().year)


def sector_table_from_dict(d: dict) -> dict[str, SectorPrior]:
    table = {}
    for sid, entry in d.items():
        if not isinstance(entry, dict) or "mu_s" not in entry:
            raise ValidationError([(sid, "sector entry needs a mu_s field")])
        table[sid] = SectorPrior(sector_id=sid, mu_s=float(entry["mu_s"]),
                                 k=float(entry.get("k", DEFAULT_SLOPE)))
    if not table:
        raise ValidationError([("sectors", "sector table is empty")])
    return table


def sector_table_to_dict(table: dict[str, SectorPrior]) -> dict:
    return {sid: {"mu_s": p.mu_s, "k": p.k} for sid, p in table.items()}


def load_sector_table(path: str | Path) -> dict[str, SectorPrior]:
    """Load a {sector_id: {mu_s, k?}} JSON mapping."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON at line {exc.lineno}, "
                          f"column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: expected a JSON object of sectors")
    return sector_table_from_dict(raw)


def load_params(path: str | Path) -> ModelParams:
    """Load ModelParams from a JSON object ({a, b, lambda0, mu, epsilon} or {theta, ...})."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON at line {exc.lineno}, "
                          f"column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: expected a JSON object of parameters")
    return ModelParams.from_dict(raw)


@dataclass(frozen=True)
class AppConfig:
    """Immutable configuration shared by the CLI and the HTTP service.

    Precedence everywhere: request/flag overrides > config file > these
    built-in defaults.
    """

    params: ModelParams = field(default_factory=ModelParams)
    sectors: dict[str, SectorPrior] = field(default_factory=default_sector_table)
    m_max: float = DEFAULT_M_MAX
    z_crit: float = DEFAULT_Z_CRIT

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(),
                "sector_table": sector_table_to_dict(self.sectors),
                "epsilon": self.params.epsilon,
                "m_max": self.m_max,
                "z_crit": self.z_crit}


def load_config(path: str | Path) -> AppConfig:
    """Load {params?, sector_table?, epsilon?, m_max?, z_crit?} JSON config.

    A top-level epsilon overrides the one inside params.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON at line {exc.lineno}, "
                          f"column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise FormatError(f"{path}: expected a JSON configuration object")
    known = {"params", "sector_table", "epsilon", "m_max", "z_crit"}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError([(k, "unknown config key") for k in sorted(unknown)])

    params_dict = dict(raw.get("params", {}))
    if "epsilon" in raw:
        params_dict["epsilon"] = raw["epsilon"]
    params = ModelParams.from_dict(params_dict) if params_dict else ModelParams()
    sectors = (sector_table_from_dict(raw["sector_table"])
               if "sector_table" in raw else default_sector_table())
    return AppConfig(params=params, sectors=sectors,
                     m_max=float(raw.get("m_max", DEFAULT_M_MAX)),
                     z_crit=float(raw.get("z_crit", DEFAULT_Z_CRIT)))
