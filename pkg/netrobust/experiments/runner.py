"""
Experiment-Harness: A (ER gegen SBM nahe der Detektionsschwelle),
B (Suszeptibilität im Konfigurationsmodell), D (Radiuspfade und Fehlerexponenten).

Replikate laufen unabhängig mit eigenen Zufallsströmen (Master-Seed, Zelle, Replikat);
die Aggregation erfolgt in fester Reihenfolge, daher sind die CSVs unabhängig
von der Anzahl der Worker byte-identisch.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.errors import DegenerateRiskError, ParameterError, TruncationDegenerateError
from ..core.graph_models import (
    DegreeModel, LabelledSbmParams, SparseErParams,
    sample_configuration_model, sample_sparse_er, sample_two_block_sbm,
)
from ..core.info_indices import chernoff_J
from ..core.posteriors import (
    TwoPointPosterior, bayes_action_and_error, er_vs_sbm_posterior, poisson_mean_pseudo_posterior,
    susceptibility_bayes_action, susceptibility_losses,
)
from ..core.robustify import two_point_robust_error
from ..data.storage import config_hash, write_result_csv
from ..config.settings import (
    DEFAULT_THREADS,
    EXP_A_N, EXP_A_C, EXP_A_LAMBDA, EXP_A_REPS,
    EXP_B_N, EXP_B_DELTAS, EXP_B_REPS, EXP_B_POST_DRAWS, EXP_B_C_SLOPE, EXP_B_CURVE_DELTA,
    EXP_B_PRIOR_SHAPE, EXP_B_PRIOR_RATE,
    EXP_D_N_GRID, EXP_D_C, EXP_D_LAMBDA, EXP_D_REPS,
    RADIUS_GRID_MIN, RADIUS_GRID_MAX_A, RADIUS_GRID_MAX_B, RADIUS_GRID_POINTS,
)
from ..utils.rng import derive_seed
from .calibration import fit_loglog_slope, posterior_risk_profile
from .radius_paths import RadiusPath

logger = logging.getLogger(__name__)

COLUMNS_A = ["radius", "sqrt_radius", "R0", "Rrob", "normalized", "normalized_per_replicate", "n_reps"]
COLUMNS_B = ["section", "delta", "radius", "sqrt_radius", "rho0", "rho_rob", "normalized",
             "normalized_per_replicate", "n_ok", "n_flagged", "slope", "intercept", "r2"]
COLUMNS_D = ["n", "path", "radius", "R0", "Rrob", "exponent_base", "exponent_rob", "censored",
             "normalized_per_replicate", "n_reps"]


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Ergebnistabelle plus aufgelöste Konfiguration und Master-Seed."""

    name: str
    rows: pd.DataFrame
    config_echo: dict
    seed: int

    @property
    def config_hash(self) -> str:
        return config_hash(self.config_echo)

    def write(self, path: Optional[str] = None):
        write_result_csv(self.rows, self.config_echo, path)


# ============================================================================
# HILFSFUNKTIONEN
# ============================================================================

def log_radius_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if not (0 < lo < hi) or points < 2:
        raise ParameterError(f"Ungültiges Radiengitter: [{lo}, {hi}] mit {points} Punkten")
    return np.geomspace(lo, hi, points)


def _check_radii(radii: Sequence[float]) -> np.ndarray:
    radii = np.asarray(radii, dtype=np.float64)
    if radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ParameterError("Radien müssen positiv und streng steigend sein")
    return radii


def _parallel_map(fn: Callable, tasks: List, threads: int) -> List:
    """Geordnetes Map; threads > 1 verteilt auf Prozesse."""
    if threads <= 1 or len(tasks) < 2:
        return [fn(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, tasks, chunksize=chunksize))


def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Elementweiser Quotient mit 0/0 := 0."""
    numerator = np.asarray(numerator, dtype=np.float64)
    denominator = np.broadcast_to(np.asarray(denominator, dtype=np.float64), numerator.shape)
    out = np.zeros_like(numerator)
    nonzero = denominator > 0
    out[nonzero] = numerator[nonzero] / denominator[nonzero]
    return out


# ============================================================================
# ZWEI-PUNKT-PIPELINE (A und D)
# ============================================================================

def _two_point_replicate(task: Tuple) -> Tuple[float, Tuple[float, ...]]:
    """
    Ein Replikat: Graph unter H0 oder H1, exakte Posterior, e0 und robuste Fehler je Radius.

    Standardmäßig ist H0 das ER-Modell und H1 das SBM; mit swap sind die Rollen vertauscht.
    """
    n, c, lam, seed, rep, model, radii, swap = task
    params = LabelledSbmParams(n, c, lam)
    graph_seed = derive_seed(seed, rep)
    if (model == 1) != swap:
        g = sample_two_block_sbm(params, graph_seed)
    else:
        g = sample_sparse_er(SparseErParams(n, c), graph_seed)
    post = er_vs_sbm_posterior(g, params.labels, c, lam)
    if swap:
        post = TwoPointPosterior.from_log_bf(-post.log_bf)
    _, e0 = bayes_action_and_error(post)
    return e0, tuple(two_point_robust_error(e0, C) for C in radii)


def _simulate_two_point(n: int, c: float, lam: float, n_reps: int, radii: Sequence[float],
                        seed: int, threads: int, swap: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gleichgewichtete Replikate: die ersten n_reps//2 unter H0, der Rest unter H1.

    Returns:
        (e0 je Replikat, robuste Fehler [Replikat × Radius])
    """
    if n_reps < 1:
        raise ParameterError(f"n_reps muss >= 1 sein: {n_reps}")
    LabelledSbmParams(n, c, lam)
    half = n_reps // 2
    radii = tuple(float(C) for C in radii)
    tasks = [(n, c, lam, seed, rep, 0 if rep < half else 1, radii, swap) for rep in range(n_reps)]
    results = _parallel_map(_two_point_replicate, tasks, threads)
    e0 = np.array([r[0] for r in results])
    erob = np.array([r[1] for r in results]).reshape(n_reps, len(radii))
    return e0, erob


def _per_replicate_normalized(e0: np.ndarray, erob: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Mittel über Replikate von (e_rob − e0)/(√(2e0(1−e0))·√C)."""
    scale = np.sqrt(2.0 * e0 * (1.0 - e0))[:, None] * np.sqrt(radii)[None, :]
    return _ratio(erob - e0[:, None], scale).mean(axis=0)


# ============================================================================
# EXPERIMENT A
# ============================================================================

def run_experiment_a(n: int, c: float, lam: float, n_reps: int, radii: Sequence[float],
                     seed: int, threads: int = DEFAULT_THREADS, swap_hypotheses: bool = False) -> ExperimentResult:
    """
    Normierte robuste Fehlklassifikation über ein Radiengitter.

    Aggregiert zuerst (R0 = mean e0, Rrob(C) = mean e_rob(C)), normiert dann mit
    √(2R0(1−R0))·√C; die pro Replikat normierte Variante steht in einer eigenen Spalte.
    swap_hypotheses vertauscht die Rollen von H0 (ER) und H1 (SBM).

    Raises:
        DegenerateRiskError: R0 ∈ {0, 1}
    """
    radii = _check_radii(radii)
    start = time.time()
    logger.info(f"[EXPERIMENT] A: n={n}, c={c}, lambda={lam}, {n_reps} Replikate, {radii.size} Radien")

    e0, erob = _simulate_two_point(n, c, lam, n_reps, radii, seed, threads, swap_hypotheses)
    R0 = float(e0.mean())
    if R0 <= 0.0 or R0 >= 1.0:
        raise DegenerateRiskError(f"Baseline-Risiko R0={R0} degeneriert - mehr Replikate oder kleineres n wählen")
    Rrob = erob.mean(axis=0)

    rows = pd.DataFrame({
        "radius": radii,
        "sqrt_radius": np.sqrt(radii),
        "R0": R0,
        "Rrob": Rrob,
        "normalized": (Rrob - R0) / (math.sqrt(2.0 * R0 * (1.0 - R0)) * np.sqrt(radii)),
        "normalized_per_replicate": _per_replicate_normalized(e0, erob, radii),
        "n_reps": n_reps,
    }, columns=COLUMNS_A)

    logger.info(f"[OK] Experiment A fertig in {time.time() - start:.1f}s: R0={R0:.6f}")
    config = {"experiment": "a", "n": n, "c": c, "lambda": lam, "n_reps": n_reps,
              "radii": radii.tolist(), "seed": seed, "swap_hypotheses": swap_hypotheses}
    return ExperimentResult("a", rows, config, seed)


# ============================================================================
# EXPERIMENT B
# ============================================================================

def _delta_key(delta: float) -> int:
    return int(round(delta * 1e9))


def _susceptibility_replicate(task: Tuple) -> dict:
    """Ein Replikat: CM_n(Poisson(1−Δ)), trunkierte Gamma-Posterior, ρ0 und ρ_rob."""
    n, delta, rep, seed, n_post_draws, prior_shape, prior_rate, radii, C_slope = task
    cell_seed = derive_seed(seed, _delta_key(delta), rep)
    g = sample_configuration_model(n, DegreeModel.poisson(1.0 - delta), derive_seed(cell_seed, 0))
    try:
        sample = poisson_mean_pseudo_posterior(g, prior_shape, prior_rate, n_post_draws, derive_seed(cell_seed, 1))
    except TruncationDegenerateError as e:
        return {"ok": False, "acceptance": e.acceptance_rate}

    sample = susceptibility_losses(sample, susceptibility_bayes_action(sample))
    profile = posterior_risk_profile(sample, radii, C_slope)
    return {
        "ok": True,
        "rho0": profile.baseline_risk,
        "rho_rob": tuple(profile.robust_risks),
        "rho_slope": profile.robust_at_slope,
    }


def run_experiment_b(n: int, deltas: Sequence[float], n_reps: int, n_post_draws: int,
                     radii: Sequence[float], C_slope: float, seed: int,
                     threads: int = DEFAULT_THREADS, curve_delta: float = EXP_B_CURVE_DELTA,
                     prior_shape: float = EXP_B_PRIOR_SHAPE,
                     prior_rate: float = EXP_B_PRIOR_RATE) -> ExperimentResult:
    """
    Sensitivitätskurve bei curve_delta und Log-Log-Steigungen über Δ.

    Abschnitte der Ausgabe: "curve" (je Radius), "delta" (je Δ beim Steigungsradius),
    "slope_baseline" und "slope_robust" (Regression von log(n·ρ0) bzw.
    log(n·(ρ_rob − ρ0)/√C) auf −log Δ). Degenerierte Replikate werden gezählt und ausgelassen.
    """
    radii = _check_radii(radii)
    deltas = sorted(float(d) for d in deltas)
    if not deltas or any(not (0.0 < d < 1.0) for d in deltas) or not (0.0 < curve_delta < 1.0):
        raise ParameterError("Alle Delta-Werte müssen in (0, 1) liegen")
    if not C_slope > 0:
        raise ParameterError(f"C_slope muss positiv sein: {C_slope}")

    start = time.time()
    grid = sorted(set(deltas) | {float(curve_delta)})
    logger.info(f"[EXPERIMENT] B: n={n}, Delta={grid}, {n_reps} Replikate, {n_post_draws} Posterior-Ziehungen")

    radii_t = tuple(float(C) for C in radii)
    tasks = [(n, delta, rep, seed, n_post_draws, prior_shape, prior_rate, radii_t, float(C_slope))
             for delta in grid for rep in range(n_reps)]
    results = _parallel_map(_susceptibility_replicate, tasks, threads)

    summary = {}
    for i, delta in enumerate(grid):
        cell = results[i * n_reps:(i + 1) * n_reps]
        ok = [r for r in cell if r["ok"]]
        flagged = len(cell) - len(ok)
        if flagged:
            logger.warning(f"[WARNUNG] Delta={delta}: {flagged} Replikate mit degenerierter Trunkierung ausgelassen")
        if not ok:
            summary[delta] = None
            continue
        rho0 = np.array([r["rho0"] for r in ok])
        rob = np.array([r["rho_rob"] for r in ok]).reshape(len(ok), radii.size)
        summary[delta] = {
            "rho0": float(rho0.mean()),
            "rho_rob": rob.mean(axis=0),
            "per_replicate": _ratio(rob - rho0[:, None], rho0[:, None] * np.sqrt(radii)[None, :]).mean(axis=0),
            "rho_slope": float(np.mean([r["rho_slope"] for r in ok])),
            "n_ok": len(ok),
            "n_flagged": flagged,
        }

    records = []
    curve = summary[float(curve_delta)]
    if curve is None:
        raise DegenerateRiskError(f"Keine gültigen Replikate bei Delta={curve_delta}")
    for k, C in enumerate(radii):
        records.append({
            "section": "curve", "delta": float(curve_delta), "radius": C, "sqrt_radius": math.sqrt(C),
            "rho0": curve["rho0"], "rho_rob": curve["rho_rob"][k],
            "normalized": float(_ratio(curve["rho_rob"][k] - curve["rho0"], curve["rho0"] * math.sqrt(C))),
            "normalized_per_replicate": curve["per_replicate"][k],
            "n_ok": curve["n_ok"], "n_flagged": curve["n_flagged"],
        })

    xs, y_base, y_rob = [], [], []
    for delta in deltas:
        cell = summary[delta]
        if cell is None:
            records.append({"section": "delta", "delta": delta, "radius": C_slope,
                            "sqrt_radius": math.sqrt(C_slope), "n_ok": 0, "n_flagged": n_reps})
            continue
        excess = cell["rho_slope"] - cell["rho0"]
        records.append({
            "section": "delta", "delta": delta, "radius": C_slope, "sqrt_radius": math.sqrt(C_slope),
            "rho0": cell["rho0"], "rho_rob": cell["rho_slope"],
            "normalized": float(_ratio(excess, cell["rho0"] * math.sqrt(C_slope))),
            "n_ok": cell["n_ok"], "n_flagged": cell["n_flagged"],
        })
        if cell["rho0"] > 0 and excess > 0:
            xs.append(-math.log(delta))
            y_base.append(math.log(n * cell["rho0"]))
            y_rob.append(math.log(n * excess / math.sqrt(C_slope)))

    for section, ys in (("slope_baseline", y_base), ("slope_robust", y_rob)):
        record = {"section": section, "radius": C_slope, "sqrt_radius": math.sqrt(C_slope), "n_ok": len(xs)}
        if len(xs) >= 2:
            fit = fit_loglog_slope(xs, ys)
            record.update({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2})
            logger.info(f"[OK] {section}: Steigung {fit.slope:.3f} (R²={fit.r2:.3f})")
        else:
            logger.warning(f"[WARNUNG] {section}: weniger als zwei gültige Delta-Werte, keine Regression")
        records.append(record)

    logger.info(f"[OK] Experiment B fertig in {time.time() - start:.1f}s")
    config = {"experiment": "b", "n": n, "deltas": deltas, "n_reps": n_reps, "n_post_draws": n_post_draws,
              "radii": radii.tolist(), "C_slope": C_slope, "curve_delta": curve_delta,
              "prior_shape": prior_shape, "prior_rate": prior_rate, "seed": seed}
    return ExperimentResult("b", pd.DataFrame.from_records(records, columns=COLUMNS_B), config, seed)


# ============================================================================
# EXPERIMENT D
# ============================================================================

def default_paths() -> List[RadiusPath]:
    return [
        RadiusPath.exp_shrink(),
        RadiusPath.polynomial(1.0),
        RadiusPath.constant(0.01),
        RadiusPath.linear_grow(1.0),
    ]


def run_experiment_d(n_grid: Sequence[int], c: float, lam: float, paths: Sequence[RadiusPath],
                     n_reps: int, seed: int, threads: int = DEFAULT_THREADS) -> ExperimentResult:
    """
    Experiment-A-Pipeline bei C_n je Radiuspfad über einem n-Gitter.

    Empirische Exponenten −log(R)/n für Baseline und robust; verschwindet das
    mittlere Risiko numerisch, wird die Zelle als zensiert gemeldet.
    """
    n_grid = [int(v) for v in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ParameterError("n-Gitter muss nichtleer und streng steigend sein")
    if not paths:
        raise ParameterError("Mindestens ein Radiuspfad erforderlich")

    J, _ = chernoff_J(c, lam)
    paths = [p.resolve(J) for p in paths]
    start = time.time()
    logger.info(f"[EXPERIMENT] D: n={n_grid}, c={c}, lambda={lam}, J={J:.6g}, {len(paths)} Pfade")

    records = []
    for n in n_grid:
        radii = np.array([p.radius(n) for p in paths])
        e0, erob = _simulate_two_point(n, c, lam, n_reps, radii, derive_seed(seed, n), threads)
        R0 = float(e0.mean())
        per_replicate = _per_replicate_normalized(e0, erob, radii)
        for k, path in enumerate(paths):
            Rrob = float(erob[:, k].mean())
            censored = R0 <= 0.0
            records.append({
                "n": n,
                "path": path.label,
                "radius": radii[k],
                "R0": R0,
                "Rrob": Rrob,
                "exponent_base": float("nan") if censored else -math.log(R0) / n,
                "exponent_rob": float("nan") if Rrob <= 0.0 else -math.log(Rrob) / n,
                "censored": censored,
                "normalized_per_replicate": per_replicate[k],
                "n_reps": n_reps,
            })
        logger.info(f"[INFO] n={n}: R0={R0:.6g}")

    logger.info(f"[OK] Experiment D fertig in {time.time() - start:.1f}s")
    config = {"experiment": "d", "n_grid": n_grid, "c": c, "lambda": lam, "n_reps": n_reps,
              "paths": [p.to_dict() for p in paths], "seed": seed}
    return ExperimentResult("d", pd.DataFrame.from_records(records, columns=COLUMNS_D), config, seed)


# ============================================================================
# KONFIGURATION
# ============================================================================

_KNOWN_KEYS = {
    "a": {"n", "c", "lambda", "n_reps", "radii", "swap_hypotheses"},
    "b": {"n", "deltas", "n_reps", "n_post_draws", "radii", "C_slope", "curve_delta", "prior_shape", "prior_rate"},
    "d": {"n_grid", "c", "lambda", "n_reps", "paths"},
}


def _resolve_radii(value, default_max: float) -> np.ndarray:
    """Radien als Liste oder als {"min", "max", "points"}; fehlend = Settings-Gitter."""
    if value is None:
        return log_radius_grid(RADIUS_GRID_MIN, default_max, RADIUS_GRID_POINTS)
    if isinstance(value, dict):
        return log_radius_grid(float(value.get("min", RADIUS_GRID_MIN)), float(value.get("max", default_max)),
                               int(value.get("points", RADIUS_GRID_POINTS)))
    return np.asarray(value, dtype=np.float64)


def run_from_config(name: str, config: dict, seed: int, threads: int = DEFAULT_THREADS) -> ExperimentResult:
    """Startet Experiment a|b|d aus einer JSON-Konfiguration; fehlende Schlüssel aus den Settings."""
    name = name.lower()
    if name not in _KNOWN_KEYS:
        raise ParameterError(f"Unbekanntes Experiment: {name}")
    unknown = set(config) - _KNOWN_KEYS[name]
    if unknown:
        logger.warning(f"[WARNUNG] Unbekannte Konfigurationsschlüssel ignoriert: {sorted(unknown)}")

    if name == "a":
        return run_experiment_a(
            n=int(config.get("n", EXP_A_N)),
            c=float(config.get("c", EXP_A_C)),
            lam=float(config.get("lambda", EXP_A_LAMBDA)),
            n_reps=int(config.get("n_reps", EXP_A_REPS)),
            radii=_resolve_radii(config.get("radii"), RADIUS_GRID_MAX_A),
            seed=seed,
            threads=threads,
            swap_hypotheses=bool(config.get("swap_hypotheses", False)),
        )
    if name == "b":
        return run_experiment_b(
            n=int(config.get("n", EXP_B_N)),
            deltas=[float(d) for d in config.get("deltas", EXP_B_DELTAS)],
            n_reps=int(config.get("n_reps", EXP_B_REPS)),
            n_post_draws=int(config.get("n_post_draws", EXP_B_POST_DRAWS)),
            radii=_resolve_radii(config.get("radii"), RADIUS_GRID_MAX_B),
            C_slope=float(config.get("C_slope", EXP_B_C_SLOPE)),
            seed=seed,
            threads=threads,
            curve_delta=float(config.get("curve_delta", EXP_B_CURVE_DELTA)),
            prior_shape=float(config.get("prior_shape", EXP_B_PRIOR_SHAPE)),
            prior_rate=float(config.get("prior_rate", EXP_B_PRIOR_RATE)),
        )
    paths = [RadiusPath.from_dict(p) for p in config["paths"]] if "paths" in config else default_paths()
    return run_experiment_d(
        n_grid=[int(v) for v in config.get("n_grid", EXP_D_N_GRID)],
        c=float(config.get("c", EXP_D_C)),
        lam=float(config.get("lambda", EXP_D_LAMBDA)),
        paths=paths,
        n_reps=int(config.get("n_reps", EXP_D_REPS)),
        seed=seed,
        threads=threads,
    )
