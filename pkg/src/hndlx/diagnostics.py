"""Specification diagnostics: cross-partial sign maps, Vuong comparison,
Sobol total-effect indices, and Monte Carlo uncertainty propagation.

Everything here is a pure function of (inputs, seed): identical seeds give
bit-identical results. Loops are written so a chunked parallel execution
would merge associatively, but the implementation is single-threaded
vectorized numpy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .altmodels import (
    ScoringModel,
    StructuralParams,
    fit_model,
    make_dataset,
    model_log_score,
)
from .distributions import Distribution, ScaledBeta, TruncatedLogNormal, Uniform
from .errors import (
    ConstantFunctionError,
    DegenerateComparisonError,
    DomainError,
    InvalidInputError,
    StencilError,
)
from .model import (
    DEFAULT_M_MAX,
    ModelParams,
    OrganizationProfile,
    SectorPrior,
    ieq_score,
)

# Default zero band for sign classification: separates exact separability
# from numerically small curvature.
SIGN_TOL = 1e-9

# Default relative step for log-coordinate stencils.
DEFAULT_FD_STEP = 1e-3

BRUTE_FORCE_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def finite_diff_log_cross_partial(f, V: float, E: float, h: float = DEFAULT_FD_STEP,
                                  lo: float = 0.0, hi: float = 1.0) -> float:
    """Central mixed second difference of f in (ln V, ln E) coordinates.

    Uses symmetric log steps +-delta with delta = ln(1 + h):

        [f(++) - f(+-) - f(-+) + f(--)] / (4 delta^2)

    Second-order accurate: for smooth f the error falls ~4x when h halves.
    Raises StencilError naming the offending corner if a shifted point
    leaves [lo, hi].
    """
    if not (0.0 < h < 0.1):
        raise DomainError(f"h must be in (0, 0.1), got {h}")
    delta = math.log1p(h)
    up, down = math.exp(delta), math.exp(-delta)
    corners = {"V+": V * up, "V-": V * down, "E+": E * up, "E-": E * down}
    for name, value in corners.items():
        if value > hi or value < lo or (lo == 0.0 and value <= 0.0):
            raise StencilError(
                f"stencil corner {name} = {value!r} outside [{lo}, {hi}] "
                f"at (V={V}, E={E}, h={h})")
    fpp = f(corners["V+"], corners["E+"])
    fpm = f(corners["V+"], corners["E-"])
    fmp = f(corners["V-"], corners["E+"])
    fmm = f(corners["V-"], corners["E-"])
    return (fpp - fpm - fmp + fmm) / (4.0 * delta * delta)


# ---------------------------------------------------------------------------
# sign maps
# ---------------------------------------------------------------------------


@dataclass
class SignMap:
    """Estimated log cross-partials over a log-spaced interior grid."""

    v_nodes: np.ndarray
    e_nodes: np.ndarray
    values: np.ndarray            # shape (len(v_nodes), len(e_nodes))
    signs: np.ndarray             # int8: -1, 0, +1
    tol: float
    h: float
    fraction_negative: float
    fraction_positive: float
    fraction_zero: float
    errors: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "v_nodes": self.v_nodes.tolist(),
            "e_nodes": self.e_nodes.tolist(),
            "values": self.values.tolist(),
            "signs": self.signs.tolist(),
            "tol": self.tol,
            "h": self.h,
            "fraction_negative": self.fraction_negative,
            "fraction_positive": self.fraction_positive,
            "fraction_zero": self.fraction_zero,
            "errors": self.errors,
        }

    def to_csv(self, path: str | Path) -> None:
        """Write (V, E, value, sign) rows for external plotting."""
        sign_chars = {-1: "-", 0: "0", 1: "+"}
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["V", "E", "value", "sign"])
            for i, v in enumerate(self.v_nodes):
                for j, e in enumerate(self.e_nodes):
                    writer.writerow([repr(float(v)), repr(float(e)),
                                     repr(float(self.values[i, j])),
                                     sign_chars[int(self.signs[i, j])]])


def cross_partial_sign_map(model: ScoringModel, grid_size: int = 16,
                           tol: float = SIGN_TOL, h: float = DEFAULT_FD_STEP,
                           epsilon: float = 0.01) -> SignMap:
    """Finite-difference log cross-partial signs over [epsilon, 1]^2.

    Nodes are log-spaced and pulled inward so every stencil corner stays
    inside the domain. Deterministic for fixed inputs.
    """
    if grid_size < 4:
        raise DomainError(f"grid_size must be >= 4, got {grid_size}")
    delta = math.log1p(h)
    nodes = np.geomspace(epsilon * math.exp(delta), math.exp(-delta), grid_size)
    Vg, Eg = np.meshgrid(nodes, nodes, indexing="ij")
    up, down = math.exp(delta), math.exp(-delta)
    fpp = model_log_score(model, Vg * up, Eg * up)
    fpm = model_log_score(model, Vg * up, Eg * down)
    fmp = model_log_score(model, Vg * down, Eg * up)
    fmm = model_log_score(model, Vg * down, Eg * down)
    values = (fpp - fpm - fmp + fmm) / (4.0 * delta * delta)

    signs = np.zeros_like(values, dtype=np.int8)
    signs[values > tol] = 1
    signs[values < -tol] = -1
    total = values.size
    return SignMap(
        v_nodes=nodes, e_nodes=nodes, values=values, signs=signs,
        tol=tol, h=h,
        fraction_negative=float(np.count_nonzero(signs == -1)) / total,
        fraction_positive=float(np.count_nonzero(signs == 1)) / total,
        fraction_zero=float(np.count_nonzero(signs == 0)) / total,
    )


# ---------------------------------------------------------------------------
# Vuong comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VuongResult:
    z: float
    n: int
    mean_llr: float
    sd_llr: float
    verdict: str                  # favors_A | favors_B | indeterminate
    z_crit: float

    def to_json_dict(self) -> dict:
        return {"z": self.z, "n": self.n, "mean_llr": self.mean_llr,
                "sd_llr": self.sd_llr, "verdict": self.verdict,
                "z_crit": self.z_crit}


def vuong_test(llA, llB, z_crit: float = 1.96) -> VuongResult:
    """Standardized mean log-likelihood ratio between two non-nested models.

    z = sqrt(n) * mean(d) / sd(d), d_i = llA_i - llB_i, sample sd (n-1).
    No dimension correction is applied: the compared families here carry
    equal parameter counts.
    """
    a = np.asarray(llA, dtype=float)
    b = np.asarray(llB, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError("llA and llB must be 1-d arrays of equal length")
    n = len(a)
    if n < 30:
        raise InvalidInputError(f"need n >= 30 observations, got {n}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("log-likelihoods must be finite")
    d = a - b
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DegenerateComparisonError(
            "models are identical on this data (zero log-likelihood-ratio variance)")
    mean = float(np.mean(d))
    z = math.sqrt(n) * mean / sd
    if z > z_crit:
        verdict = "favors_A"
    elif z < -z_crit:
        verdict = "favors_B"
    else:
        verdict = "indeterminate"
    return VuongResult(z=z, n=n, mean_llr=mean, sd_llr=sd,
                       verdict=verdict, z_crit=z_crit)


def default_input_dists() -> dict[str, Distribution]:
    """Stand-in sampling spec for {V, E, T_D, M}.

    The deployed signal set is not public; these bounded shapes exist so
    the sensitivity battery runs on realistic-looking inputs and are fully
    configurable.
    """
    return {
        "V": ScaledBeta(2.0, 3.0),
        "E": ScaledBeta(2.0, 3.0),
        "T_D": TruncatedLogNormal(median=7.0, sigma=0.6, lo=0.5, hi=30.0),
        "M": Uniform(1.0, 1.3),
    }


def structural_score_function(params: ModelParams, prior: SectorPrior, t0: float,
                              m_max: float = DEFAULT_M_MAX):
    """IEQ as a function of named (V, E, T_D, M) arrays, for sensitivity runs."""

    def f(**cols):
        V, E, T_D, M = (np.asarray(cols[k], dtype=float) for k in ("V", "E", "T_D", "M"))
        out = np.empty(len(V))
        for i in range(len(V)):
            profile = OrganizationProfile(org_id=f"s{i}", V=float(V[i]), E=float(E[i]),
                                          T_D=float(T_D[i]), sector_id=prior.sector_id,
                                          M=float(M[i]))
            out[i] = ieq_score(profile, params, prior, t0, m_max=m_max).ieq
        return out

    return f


# ---------------------------------------------------------------------------
# Sobol total-effect indices
# ---------------------------------------------------------------------------


@dataclass
class SobolResult:
    input_names: list[str]
    total_effect: list[float]          # clipped to [0, 1.05]
    raw_total_effect: list[float]
    standard_errors: list[float]
    sample_count: int
    estimator: str                     # pick_freeze | brute_force

    def to_json_dict(self) -> dict:
        return {"input_names": self.input_names,
                "total_effect": self.total_effect,
                "raw_total_effect": self.raw_total_effect,
                "standard_errors": self.standard_errors,
                "sample_count": self.sample_count,
                "estimator": self.estimator}


def _eval_named(f, names: list[str], matrix: np.ndarray) -> np.ndarray:
    return np.asarray(f(**{name: matrix[:, k] for k, name in enumerate(names)}),
                      dtype=float)


def sobol_total_effect(f, dists: dict[str, Distribution], n_base: int = 1024,
                       seed: int = 0, n_bootstrap: int = 200) -> SobolResult:
    """Pick-freeze total-effect estimate (Jansen squared-difference form).

    Two independent base matrices A and B; for input i the hybrid A_B^(i)
    replaces column i of A with B's. The estimator is

        S_Ti = mean_j (f(A_j) - f(A_B^(i)_j))^2 / (2 Var(f over A u B))

    Standard errors come from a row bootstrap (default 200 resamples).
    Deterministic given (seed, dists order).
    """
    if n_base < 64:
        raise InvalidInputError(f"n_base must be >= 64, got {n_base}")
    names = list(dists)
    k = len(names)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    A = np.column_stack([dists[name].sample(rng, n_base) for name in names])
    B = np.column_stack([dists[name].sample(rng, n_base) for name in names])

    yA = _eval_named(f, names, A)
    yB = _eval_named(f, names, B)
    pooled = np.concatenate([yA, yB])
    var = float(np.var(pooled, ddof=1))
    if var < 1e-12:
        raise ConstantFunctionError(
            f"function variance {var} below 1e-12; nothing to attribute")

    sq_diffs = np.empty((k, n_base))
    for i in range(k):
        ABi = A.copy()
        ABi[:, i] = B[:, i]
        sq_diffs[i] = (yA - _eval_named(f, names, ABi)) ** 2

    raw = [float(np.mean(sq_diffs[i]) / (2.0 * var)) for i in range(k)]

    ses = []
    boot_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    idx = boot_rng.integers(0, n_base, size=(n_bootstrap, n_base))
    for i in range(k):
        reps = np.empty(n_bootstrap)
        for r in range(n_bootstrap):
            rows = idx[r]
            pooled_r = np.concatenate([yA[rows], yB[rows]])
            var_r = np.var(pooled_r, ddof=1)
            reps[r] = np.mean(sq_diffs[i][rows]) / (2.0 * var_r) if var_r > 0 else 0.0
        ses.append(float(np.std(reps, ddof=1)))

    return SobolResult(input_names=names,
                       total_effect=[min(max(s, 0.0), 1.05) for s in raw],
                       raw_total_effect=raw,
                       standard_errors=ses,
                       sample_count=n_base,
                       estimator="pick_freeze")


def sobol_brute_force(f, dists: dict[str, Distribution], n_outer: int = 200,
                      n_inner: int = 200, seed: int = 0,
                      budget: int = BRUTE_FORCE_BUDGET) -> SobolResult:
    """Nested-loop oracle: S_Ti = E[Var(f | all-but-i)] / Var(f).

    For each input i, the outer loop freezes the other coordinates and the
    inner loop resamples coordinate i; conditional variances average into
    the numerator. Quadratically more expensive than pick-freeze, kept as
    ground truth.
    """
    if n_outer * n_inner > budget:
        raise InvalidInputError(
            f"n_outer * n_inner = {n_outer * n_inner} exceeds budget {budget}")
    names = list(dists)
    k = len(names)
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    raw, ses = [], []
    all_values = []
    for i, name in enumerate(names):
        cond_vars = np.empty(n_outer)
        for j in range(n_outer):
            row = np.array([dists[nm].sample(rng, 1)[0] for nm in names])
            block = np.tile(row, (n_inner, 1))
            block[:, i] = dists[name].sample(rng, n_inner)
            y = _eval_named(f, names, block)
            all_values.append(y)
            cond_vars[j] = np.var(y, ddof=1)
        raw.append(float(np.mean(cond_vars)))
        ses.append(float(np.std(cond_vars, ddof=1) / math.sqrt(n_outer)))

    pooled = np.concatenate(all_values)
    var = float(np.var(pooled, ddof=1))
    if var < 1e-12:
        raise ConstantFunctionError(
            f"function variance {var} below 1e-12; nothing to attribute")
    raw = [s / var for s in raw]
    ses = [s / var for s in ses]
    return SobolResult(input_names=names,
                       total_effect=[min(max(s, 0.0), 1.05) for s in raw],
                       raw_total_effect=raw,
                       standard_errors=ses,
                       sample_count=n_outer * n_inner,
                       estimator="brute_force")


# ---------------------------------------------------------------------------
# Monte Carlo uncertainty propagation
# ---------------------------------------------------------------------------

QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)

NOISE_KEYS = ("V", "E", "T_D", "M")


@dataclass
class UncertaintyResult:
    point_score: float
    samples: int
    quantiles: dict[float, float]
    mean: float
    sd: float
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {"point_score": self.point_score, "samples": self.samples,
                "quantiles": {f"{q:.2f}": v for q, v in self.quantiles.items()},
                "mean": self.mean, "sd": self.sd, "degenerate": self.degenerate}


def monte_carlo_uncertainty(profile: OrganizationProfile, params: ModelParams,
                            prior: SectorPrior, t0: float,
                            noise: dict[str, float], n: int = 1000,
                            seed: int = 0,
                            m_max: float = DEFAULT_M_MAX) -> UncertaintyResult:
    """Propagate multiplicative Gaussian input noise through the score.

    Each draw perturbs (V, E, T_D, M) by x * (1 + sd * z) and clamps back
    into the valid domain before scoring; the result is a pure function of
    (inputs, seed). A degenerate flag is set when noise was requested but
    clamping collapsed every draw onto one boundary score.
    """
    if n < 100:
        raise InvalidInputError(f"need n >= 100 draws, got {n}")
    unknown = set(noise) - set(NOISE_KEYS)
    if unknown:
        raise InvalidInputError(f"unknown noise keys: {sorted(unknown)}")
    sds = {key: float(noise.get(key, 0.0)) for key in NOISE_KEYS}
    if any(sd < 0 for sd in sds.values()):
        raise InvalidInputError("noise sds must be >= 0")
    profile.ensure_valid(m_max=m_max)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal((n, 4))
    V = np.clip(profile.V * (1.0 + sds["V"] * z[:, 0]), 0.0, 1.0)
    E = np.clip(profile.E * (1.0 + sds["E"] * z[:, 1]), 0.0, 1.0)
    T_D = np.maximum(profile.T_D * (1.0 + sds["T_D"] * z[:, 2]), 1e-9)
    M = np.clip(profile.M * (1.0 + sds["M"] * z[:, 3]), 1.0, m_max)

    scores = np.empty(n)
    for i in range(n):
        perturbed = OrganizationProfile(org_id=profile.org_id, V=float(V[i]),
                                        E=float(E[i]), T_D=float(T_D[i]),
                                        sector_id=profile.sector_id, M=float(M[i]))
        scores[i] = ieq_score(perturbed, params, prior, t0, m_max=m_max).ieq

    point = ieq_score(profile, params, prior, t0, m_max=m_max).ieq
    any_noise = any(sd > 0 for sd in sds.values())
    degenerate = bool(any_noise and float(np.ptp(scores)) == 0.0)
    return UncertaintyResult(
        point_score=point,
        samples=n,
        quantiles={q: float(np.quantile(scores, q)) for q in QUANTILE_LEVELS},
        mean=float(np.mean(scores)),
        sd=float(np.std(scores, ddof=1)),
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# synthetic Vuong experiment (structural generator vs fitted CES)
# ---------------------------------------------------------------------------


@dataclass
class VuongExperiment:
    vuong: VuongResult
    fit_structural_mse: float
    fit_ces_mse: float
    noise_sd: float
    seed: int
    llr: np.ndarray = field(default_factory=lambda: np.empty(0))

    def to_json_dict(self) -> dict:
        return {"vuong": self.vuong.to_json_dict(),
                "fit_structural_mse": self.fit_structural_mse,
                "fit_ces_mse": self.fit_ces_mse,
                "noise_sd": self.noise_sd, "seed": self.seed}


def vuong_experiment(n: int = 5000, noise_sd: float = 0.05, seed: int = 0,
                     params: ModelParams | None = None,
                     n_restarts: int = 4) -> VuongExperiment:
    """Self-consistency power check on synthetic data.

    Draws (V, E) from the default input shapes, generates log-scores from
    the structural model plus Gaussian noise, fits the structural and CES
    (rho fixed at -1) families, and runs the Vuong comparison structural
    vs CES. Deterministic given seed.
    """
    params = params or ModelParams()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    dists = default_input_dists()
    V = np.clip(dists["V"].sample(rng, n), 0.01, 1.0)
    E = np.clip(dists["E"].sample(rng, n), 0.01, 1.0)
    truth = ScoringModel("structural", StructuralParams(a=params.a, b=params.b,
                                                        theta=params.theta))
    y = model_log_score(truth, V, E) + noise_sd * rng.standard_normal(n)

    dataset = make_dataset(V, E, y)
    fit_s = fit_model("structural", dataset, seed=seed, n_restarts=n_restarts)
    fit_c = fit_model("ces", dataset, seed=seed, n_restarts=n_restarts)
    result = vuong_test(fit_s.loglik, fit_c.loglik)
    return VuongExperiment(vuong=result, fit_structural_mse=fit_s.mse,
                           fit_ces_mse=fit_c.mse, noise_sd=noise_sd, seed=seed,
                           llr=fit_s.loglik - fit_c.loglik)
