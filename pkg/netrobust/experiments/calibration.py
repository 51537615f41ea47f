"""
Radiuskalibrierung, Risikoprofile und Log-Log-Steigungen.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.optimize import brentq

from ..core.errors import DegenerateRiskError, ParameterError
from ..core.posteriors import WeightedSample
from ..core.robustify import kl_tilt_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float


@dataclass(frozen=True, eq=False)
class RiskProfile:
    baseline_risk: float
    radii: np.ndarray
    robust_risks: np.ndarray
    robust_at_slope: float


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> SlopeFit:
    """Kleinste Quadrate y = slope·x + intercept (x, y bereits logarithmiert)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ParameterError("Mindestens zwei Punkte gleicher Länge erforderlich")
    if np.all(x == x[0]):
        raise ParameterError("Rangdefizit: alle x-Werte gleich")
    result = stats.linregress(x, y)
    r2 = float(result.rvalue ** 2) if np.isfinite(result.rvalue) else 1.0
    return SlopeFit(float(result.slope), float(result.intercept), r2)


def heuristic_radius(inflation: float) -> float:
    """Aus ρ_rob ≤ (1+δ)ρ0 und ρ_rob ≈ ρ0(1 + 2√C): C = (δ/2)²."""
    if not (0.0 < inflation < 1.0):
        raise ParameterError(f"Inflation muss in (0, 1) liegen: {inflation}")
    return (inflation / 2.0) ** 2


def calibrate_radius(sample: WeightedSample, inflation: float) -> float:
    """
    KL-Radius C mit ρ_rob(C) = (1+δ)·ρ0, Start bei der Heuristik (δ/2)².

    Raises:
        DegenerateRiskError: Verlustvarianz 0, ρ0 = 0 oder Ziel jenseits von max L
    """
    seed_radius = heuristic_radius(inflation)
    baseline = sample.baseline_risk
    if sample.loss_variance == 0 or baseline <= 0:
        raise DegenerateRiskError("Keine Verlustvarianz: kein Radius erreicht die gewünschte Inflation")

    target = (1.0 + inflation) * baseline
    l_max = float(sample.require_losses()[sample.weights > 0].max())
    if target >= l_max:
        raise DegenerateRiskError(f"Ziel {target:.6g} nicht unterhalb des Maximalverlusts {l_max:.6g}")

    def gap(C: float) -> float:
        return kl_tilt_solve(sample, C).robust_risk - target

    hi = seed_radius
    while gap(hi) < 0:
        hi *= 2.0
    radius = float(brentq(gap, 0.0, hi, rtol=1e-10, xtol=1e-14))
    logger.debug(f"[INFO] Kalibrierung: Heuristik C={seed_radius:.4g}, verfeinert C={radius:.4g}")
    return radius


def posterior_risk_profile(sample: WeightedSample, radii: Sequence[float], slope_radius: float) -> RiskProfile:
    """ρ0 und ρ_rob je Radius sowie beim Steigungsradius."""
    radii = np.asarray(radii, dtype=np.float64)
    robust = np.array([kl_tilt_solve(sample, C).robust_risk for C in radii])
    return RiskProfile(
        baseline_risk=sample.baseline_risk,
        radii=radii,
        robust_risks=robust,
        robust_at_slope=kl_tilt_solve(sample, slope_radius).robust_risk,
    )
