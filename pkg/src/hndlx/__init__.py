"""HNDL exposure scoring engine and structural diagnostics."""

from .config import AppConfig, default_sector_table, default_t0, load_config
from .errors import HndlxError
from .model import (
    FloorFlags,
    ModelParams,
    OrganizationProfile,
    ScoreReport,
    SectorPrior,
    attack_rate,
    contest_probability,
    elasticities,
    ieq_score,
    log_cross_partial,
    log_linear_approx,
    natural_cross_partial,
    p_exploit,
    p_hndl,
    q_exponential,
    q_exponential_defender_win,
    regime_ratio,
    temporal_hazard,
)
from .population import (
    PopulationSpec,
    Portfolio,
    default_population_spec,
    generate_population,
    spearman,
)
from .portfolio import (
    ingest_portfolio,
    load_portfolio,
    persist_portfolio,
    score_portfolio,
)
from .whatif import Action, evaluate_whatif

__version__ = "0.1.0"

__all__ = [
    "AppConfig", "default_sector_table", "default_t0", "load_config",
    "HndlxError",
    "FloorFlags", "ModelParams", "OrganizationProfile", "ScoreReport",
    "SectorPrior", "attack_rate", "contest_probability", "elasticities",
    "ieq_score", "log_cross_partial", "log_linear_approx",
    "natural_cross_partial", "p_exploit", "p_hndl", "q_exponential",
    "q_exponential_defender_win", "regime_ratio", "temporal_hazard",
    "PopulationSpec", "Portfolio", "default_population_spec",
    "generate_population", "spearman",
    "ingest_portfolio", "load_portfolio", "persist_portfolio",
    "score_portfolio",
    "Action", "evaluate_whatif",
    "__version__",
]
