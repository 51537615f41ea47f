"""
Worst-Case-Posterior-Risiko über KL- und χ²-Bälle.

Entropic Tilting mit Dualfunktion ψ(λ), exaktes Zwei-Punkt-Risiko,
Mirror-Descent-Gegenspieler, Kleinradius-Vorhersage und Sensitivitätskurven.
Alle Log-Sum-Exp-Rechnungen sind um den maximalen Verlust verschoben.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp, rel_entr

from .errors import ConvergenceError, ParameterError
from .info_indices import bernoulli_kl
from .posteriors import WeightedSample
from ..config.settings import CURVE_MONOTONE_TOL, TILT_TOL, MIRROR_ITERS, MIRROR_STEP_SCALE

logger = logging.getLogger(__name__)


# ============================================================================
# TYPEN
# ============================================================================

@dataclass(frozen=True, eq=False)
class TiltSolution:
    """
    Ungünstigste Gewichte im Ball und zugehöriges Risiko.

    lambda_star ist 0 für die Baseline, inf wenn der Ball die Ecke der
    Maximalverluste erreicht, NaN für χ²-Bälle.
    """

    lambda_star: float
    tilted_weights: np.ndarray
    robust_risk: float
    achieved_kl: float
    baseline_risk: float
    radius: float
    saturated: bool = False

    def to_row(self) -> dict:
        return {
            "radius": self.radius,
            "lambda_star": self.lambda_star,
            "baseline_risk": self.baseline_risk,
            "robust_risk": self.robust_risk,
            "achieved_divergence": self.achieved_kl,
            "saturated": self.saturated,
        }


class BallKind(Enum):
    KL = "kl"
    CHI2 = "chi2"


@dataclass(frozen=True)
class PhiBall:
    """φ-Divergenzball um die Baseline-Gewichte."""

    kind: BallKind
    radius: float

    def __post_init__(self):
        if not self.radius >= 0 or math.isnan(self.radius):
            raise ParameterError(f"Radius muss nichtnegativ sein: {self.radius}")

    @property
    def curvature(self) -> float:
        """φ''(1): 1 für KL (t log t), 2 für χ² ((t−1)²)."""
        return 1.0 if self.kind is BallKind.KL else 2.0

    @property
    def kl_equivalent_radius(self) -> float:
        """Lokal äquivalenter KL-Radius C/φ''(1)."""
        return self.radius / self.curvature

    def divergence(self, q: np.ndarray, w: np.ndarray) -> float:
        if self.kind is BallKind.KL:
            return float(rel_entr(q, w).sum())
        support = w > 0
        return float((((q[support] - w[support]) ** 2) / w[support]).sum())


class Normalization(Enum):
    RHO_SQRT_C = "rho"      # (ρ_rob − ρ0) / (ρ0·√C)
    VAR_SQRT_C = "var"      # (ρ_rob − ρ0) / (√(2 Var L)·√C)
    NONE = "none"           # ρ_rob unverändert


@dataclass(frozen=True, eq=False)
class SensitivityCurve:
    radii: np.ndarray
    baseline_risk: float
    robust_risks: np.ndarray
    normalized: np.ndarray
    normalization: Normalization
    lambda_stars: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "radius": self.radii,
            "sqrt_radius": np.sqrt(self.radii),
            "baseline_risk": self.baseline_risk,
            "robust_risk": self.robust_risks,
            "normalized": self.normalized,
            "normalization": self.normalization.value,
            "lambda_star": self.lambda_stars,
        })


# ============================================================================
# ENTROPIC TILTING
# ============================================================================

def _support_arrays(sample: WeightedSample) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Verluste, Gewichte, Träger-Maske); Atome mit Gewicht 0 erhalten nie Masse."""
    losses = sample.require_losses()
    if not np.all(np.isfinite(losses)):
        raise ParameterError("Verluste müssen endlich sein")
    weights = sample.weights
    return losses, weights, weights > 0


def _tilt(losses: np.ndarray, log_w: np.ndarray, lam: float, l_max: float) -> Tuple[np.ndarray, float]:
    """
    q(λ) ∝ w·exp(λL) auf dem Träger und K(λ) = KL(q(λ) ∥ w).

    Returns:
        (q, K)
    """
    logits = lam * (losses - l_max) + log_w
    lse = logsumexp(logits)
    log_q = logits - lse
    q = np.exp(log_q)
    kl = float(q @ (lam * (losses - l_max)) - lse)
    return q, max(kl, 0.0)


def _baseline_solution(sample: WeightedSample, C: float) -> TiltSolution:
    return TiltSolution(
        lambda_star=0.0,
        tilted_weights=sample.weights.copy(),
        robust_risk=sample.baseline_risk,
        achieved_kl=0.0,
        baseline_risk=sample.baseline_risk,
        radius=C,
    )


def kl_tilt_solve(sample: WeightedSample, C: float, tol: float = TILT_TOL) -> TiltSolution:
    """
    sup Σ q_s L_s über KL(q ∥ w) ≤ C per Entropic Tilting.

    Liegt die Punktmasse auf der Menge S der maximalen Verluste im Ball
    (KL = −log w(S) ≤ C), wird sie direkt zurückgegeben. Sonst Nullstellensuche
    für K(λ*) = C, Bracket ab [0, 1] mit Verdopplung der oberen Grenze.

    Args:
        sample: Stichprobe mit gecachten Verlusten
        C: KL-Radius
        tol: Toleranz für |K(λ*) − C|

    Returns:
        TiltSolution
    """
    if not C >= 0 or math.isnan(C):
        raise ParameterError(f"Radius muss nichtnegativ sein: {C}")
    losses_all, weights_all, support = _support_arrays(sample)
    if C == 0:
        return _baseline_solution(sample, C)

    losses = losses_all[support]
    log_w = np.log(weights_all[support])
    l_max = float(losses.max())
    if l_max == float(losses.min()):
        logger.debug("[INFO] Alle Verluste gleich - Tilting wirkungslos")
        return _baseline_solution(sample, C)

    baseline = sample.baseline_risk
    at_max = losses == l_max
    vertex_kl = float(-logsumexp(log_w[at_max]))
    q_full = np.zeros_like(weights_all)

    if vertex_kl <= C:
        # Gewichtsproportional innerhalb von S, damit KL(δ_S ∥ w) = −log w(S)
        q = np.where(at_max, np.exp(log_w - logsumexp(log_w[at_max])), 0.0)
        q_full[support] = q
        return TiltSolution(
            lambda_star=float("inf"),
            tilted_weights=q_full,
            robust_risk=l_max,
            achieved_kl=vertex_kl,
            baseline_risk=baseline,
            radius=C,
            saturated=True,
        )

    def excess(lam: float) -> float:
        return _tilt(losses, log_w, lam, l_max)[1] - C

    hi = 1.0
    while excess(hi) <= 0:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceError("Kein Bracket für lambda gefunden", last_iterate=hi)

    lam_star = brentq(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=1000)
    q, kl = _tilt(losses, log_w, lam_star, l_max)
    if abs(kl - C) > tol:
        raise ConvergenceError(f"|K(lambda) - C| = {abs(kl - C):.2e} > {tol:.0e}", last_iterate=lam_star)

    q_full[support] = q
    return TiltSolution(
        lambda_star=float(lam_star),
        tilted_weights=q_full,
        robust_risk=float(q @ losses),
        achieved_kl=kl,
        baseline_risk=baseline,
        radius=C,
    )


def psi_dual(sample: WeightedSample, C: float, lam: float) -> float:
    """ψ(λ) = (C + log Σ w_s exp(λ L_s)) / λ"""
    if not lam > 0:
        raise ParameterError(f"lambda muss positiv sein: {lam}")
    losses, weights, support = _support_arrays(sample)
    l_max = float(losses[support].max())
    lse = logsumexp(lam * (losses[support] - l_max) + np.log(weights[support]))
    return float(l_max + (C + lse) / lam)


def psi_dual_min(sample: WeightedSample, C: float) -> Tuple[float, float]:
    """
    inf_{λ>0} ψ(λ) unabhängig vom Primal-Löser: Gitter in log λ, dann Brent.

    Returns:
        (Minimum, Argmin λ)
    """
    grid = np.linspace(-20.0, 20.0, 401)
    values = np.array([psi_dual(sample, C, math.exp(u)) for u in grid])
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda u: psi_dual(sample, C, math.exp(u)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12})
    if res.fun < values[i]:
        return float(res.fun), float(math.exp(res.x))
    return float(values[i]), float(math.exp(grid[i]))


# ============================================================================
# ZWEI-PUNKT-FALL
# ============================================================================

def two_point_robust_error(e0: float, C: float, tol: float = TILT_TOL) -> float:
    """
    Größtes q ∈ [e0, 1] mit kl(q, e0) ≤ C.

    Entspricht kl_tilt_solve auf w = (1−e0, e0), L = (0, 1).
    """
    if not (0.0 <= e0 <= 1.0):
        raise ParameterError(f"e0 muss in [0, 1] liegen: {e0}")
    if not C >= 0:
        raise ParameterError(f"Radius muss nichtnegativ sein: {C}")
    if C == 0 or e0 == 0.0 or e0 == 1.0:
        return e0
    if -math.log(e0) <= C:
        return 1.0
    return float(brentq(lambda q: bernoulli_kl(q, e0) - C, e0, 1.0, xtol=tol, maxiter=1000))


def pinsker_bound(e0: float, C: float) -> float:
    """min(1, e0 + √(C/2))"""
    return min(1.0, e0 + math.sqrt(C / 2.0))


# ============================================================================
# MIRROR DESCENT
# ============================================================================

def _project_kl(log_q: np.ndarray, log_w: np.ndarray, radius: float) -> Tuple[np.ndarray, float]:
    """
    Geometrische Mischung q_β ∝ w^{1−β} q^β mit KL(q_β ∥ w) = radius.

    Returns:
        (log q_β, β)
    """
    direction = log_q - log_w

    def kl_at(beta: float) -> float:
        logits = log_w + beta * direction
        log_qb = logits - logsumexp(logits)
        return float(np.exp(log_qb) @ (log_qb - log_w))

    if kl_at(1.0) <= radius:
        return log_q, 1.0
    beta = brentq(lambda b: kl_at(b) - radius, 0.0, 1.0, xtol=1e-13, maxiter=500)
    logits = log_w + beta * direction
    return logits - logsumexp(logits), float(beta)


def _project_chi2(q: np.ndarray, w: np.ndarray, radius: float) -> np.ndarray:
    """Sehnenprojektion q_γ = (1−γ)w + γq mit Σ(q_γ − w)²/w = radius (geschlossen: γ = √(radius/χ²))."""
    chi2 = float(((q - w) ** 2 / w).sum())
    if chi2 <= radius:
        return q
    gamma = math.sqrt(radius / chi2)
    return (1.0 - gamma) * w + gamma * q


def mirror_descent_adversary(sample: WeightedSample, ball: PhiBall, step: Optional[float] = None,
                             iters: int = MIRROR_ITERS) -> TiltSolution:
    """
    Mirror-Descent-Gegenspieler über KL- oder χ²-Bälle.

    Log-Tilts u werden multiplikativ aktualisiert (u ← u + η(L − L̄)), renormiert
    und auf den Ball projiziert.

    Args:
        sample: Stichprobe mit gecachten Verlusten
        ball: PhiBall (KL oder χ²)
        step: Schrittweite η (Standard: MIRROR_STEP_SCALE / max|L − L̄|)
        iters: Anzahl Iterationen

    Returns:
        TiltSolution (achieved_kl enthält die Divergenz des jeweiligen Balls)
    """
    if iters < 1:
        raise ParameterError(f"iters muss >= 1 sein: {iters}")
    losses_all, weights_all, support = _support_arrays(sample)
    losses = losses_all[support]
    w = weights_all[support]
    log_w = np.log(w)
    baseline = sample.baseline_risk

    spread = float(np.abs(losses - w @ losses).max())
    if ball.radius == 0 or spread == 0:
        return _baseline_solution(sample, ball.radius)
    if step is None:
        step = MIRROR_STEP_SCALE / spread
    if not step > 0:
        raise ParameterError(f"Schrittweite muss positiv sein: {step}")

    log_q = log_w.copy()
    lam_eff = 0.0
    for _ in range(iters):
        q = np.exp(log_q)
        log_q = log_q + step * (losses - q @ losses)
        log_q -= logsumexp(log_q)
        if ball.kind is BallKind.KL:
            lam_eff += step
            log_q, beta = _project_kl(log_q, log_w, ball.radius)
            lam_eff *= beta
        else:
            log_q = np.log(_project_chi2(np.exp(log_q), w, ball.radius))

    q = np.exp(log_q)
    q_full = np.zeros_like(weights_all)
    q_full[support] = q
    return TiltSolution(
        lambda_star=lam_eff if ball.kind is BallKind.KL else float("nan"),
        tilted_weights=q_full,
        robust_risk=float(q @ losses),
        achieved_kl=ball.divergence(q, w),
        baseline_risk=baseline,
        radius=ball.radius,
    )


# ============================================================================
# VORHERSAGEN UND KURVEN
# ============================================================================

def small_radius_prediction(baseline_risk: float, loss_variance: float, C: float) -> float:
    """m + √(2·Var(L))·√C"""
    if loss_variance < 0 or C < 0:
        raise ParameterError("Varianz und Radius müssen nichtnegativ sein")
    return baseline_risk + math.sqrt(2.0 * loss_variance) * math.sqrt(C)


def robust_expectation(solution: TiltSolution, values) -> float:
    """Erwartung eines beliebigen Funktionals unter den ungünstigsten Gewichten."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != solution.tilted_weights.shape[0]:
        raise ParameterError("Werte und Gewichte haben unterschiedliche Länge")
    return float(solution.tilted_weights @ values)


def _normalize(excess: np.ndarray, denominators: np.ndarray) -> np.ndarray:
    """Quotient mit 0/0 := 0."""
    out = np.zeros_like(excess)
    nonzero = denominators > 0
    out[nonzero] = excess[nonzero] / denominators[nonzero]
    return out


def _check_monotone(sample: WeightedSample, baseline: float, robust: np.ndarray, radii: np.ndarray):
    """Verschachtelte Bälle: baseline ≤ ρ_rob(C₁) ≤ ρ_rob(C₂) ≤ … bis auf Rundung."""
    losses = sample.require_losses()
    tol = CURVE_MONOTONE_TOL * max(1.0, float(np.abs(losses).max()))
    path = np.concatenate([[baseline], robust])
    drops = np.maximum.accumulate(path)[1:] - robust
    worst = int(np.argmax(drops))
    if drops[worst] > tol:
        logger.warning(f"[WARNUNG] Sensitivitätskurve nicht monoton bei C={radii[worst]:.6g}: "
                       f"Rückgang {drops[worst]:.3g}")
        raise ConvergenceError(
            f"rho_rob fällt bei C={radii[worst]:.6g} um {drops[worst]:.3g} (Toleranz {tol:.3g})",
            last_iterate=robust,
        )


def sensitivity_curve(sample: WeightedSample, radii: Sequence[float],
                      normalization: Normalization = Normalization.RHO_SQRT_C,
                      tol: float = TILT_TOL) -> SensitivityCurve:
    """
    ρ_rob(C) über einem Radiengitter mit gewählter Normierung.

    Args:
        sample: Stichprobe mit gecachten Verlusten
        radii: Streng steigende positive Radien
        normalization: Normierungsregel

    Returns:
        SensitivityCurve

    Raises:
        ConvergenceError: ρ_rob(C) fällt über CURVE_MONOTONE_TOL hinaus (Baseline eingeschlossen)
    """
    radii = np.asarray(radii, dtype=np.float64)
    if radii.size == 0 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ParameterError("Radien müssen positiv und streng steigend sein")

    baseline = sample.baseline_risk
    solutions = [kl_tilt_solve(sample, C, tol) for C in radii]
    robust = np.array([s.robust_risk for s in solutions])
    _check_monotone(sample, baseline, robust, radii)
    lambdas = np.array([s.lambda_star for s in solutions])

    excess = robust - baseline
    if normalization is Normalization.RHO_SQRT_C:
        normalized = _normalize(excess, baseline * np.sqrt(radii))
    elif normalization is Normalization.VAR_SQRT_C:
        normalized = _normalize(excess, math.sqrt(2.0 * sample.loss_variance) * np.sqrt(radii))
    else:
        normalized = robust.copy()

    return SensitivityCurve(
        radii=radii,
        baseline_risk=baseline,
        robust_risks=robust,
        normalized=normalized,
        normalization=normalization,
        lambda_stars=lambdas,
    )
