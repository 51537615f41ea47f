"""
Baseline-Posteriors für die Robustifizierung.

Exakte Zwei-Punkt-Posterior ER gegen SBM, trunkierte Gamma-Pseudo-Posterior für
Poisson-Konfigurationsmodelle, getemperte BIC-Gewichte und gewichtete Stichproben.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import stats
from scipy.special import expit, softmax

from .errors import ParameterError, DomainError, TruncationDegenerateError
from .graph_models import Graph, LabelledSbmParams
from .info_indices import switching_radius
from ..config.settings import MIN_TRUNCATION_ACCEPTANCE
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)


# ============================================================================
# TYPEN
# ============================================================================

@dataclass(frozen=True)
class TwoPointPosterior:
    """Posterior über {Modell 0, Modell 1} mit logarithmischem Bayes-Faktor (inkl. Prior-Odds)."""

    p0: float
    p1: float
    log_bf: float

    @classmethod
    def from_log_bf(cls, log_bf: float) -> "TwoPointPosterior":
        # expit sättigt für |log_bf| > ~745 sauber auf {0, 1}
        return cls(p0=float(expit(-log_bf)), p1=float(expit(log_bf)), log_bf=float(log_bf))


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """
    Gewichtete Posterior-Stichprobe {(θ_s, w_s)} mit optional gecachten Verlusten L_s.

    Atome sind Skalare (1D-Array) oder Vektoren (2D-Array, eine Zeile pro Atom).
    """

    atoms: np.ndarray
    weights: np.ndarray
    losses: Optional[np.ndarray] = None

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.float64)
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if atoms.ndim == 0:
            atoms = atoms.reshape(1)
        if atoms.shape[0] == 0:
            raise ParameterError("Stichprobe enthält keine Atome")
        if weights.shape[0] != atoms.shape[0]:
            raise ParameterError(f"Längen verschieden: {atoms.shape[0]} Atome, {weights.shape[0]} Gewichte")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ParameterError("Gewichte müssen endlich und nichtnegativ sein")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ParameterError(f"Gewichte summieren sich zu {weights.sum():.15g}, nicht 1")
        weights = weights / weights.sum()
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

        if self.losses is not None:
            losses = np.array(self.losses, dtype=np.float64).ravel()
            if losses.shape[0] != atoms.shape[0]:
                raise ParameterError(f"Längen verschieden: {atoms.shape[0]} Atome, {losses.shape[0]} Verluste")
            losses.setflags(write=False)
            object.__setattr__(self, "losses", losses)

    @classmethod
    def from_unnormalized(cls, atoms, weights, losses=None) -> "WeightedSample":
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if not total > 0:
            raise ParameterError("Gewichtssumme muss positiv sein")
        return cls(atoms, weights / total, losses)

    @classmethod
    def uniform(cls, atoms, losses=None) -> "WeightedSample":
        atoms = np.asarray(atoms, dtype=np.float64)
        size = atoms.shape[0] if atoms.ndim else 1
        return cls(atoms, np.full(size, 1.0 / size), losses)

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def with_losses(self, losses) -> "WeightedSample":
        return WeightedSample(self.atoms, self.weights, losses)

    def require_losses(self) -> np.ndarray:
        if self.losses is None:
            raise ParameterError("Stichprobe enthält keine gecachten Verluste")
        return self.losses

    def expectation(self, values) -> float:
        return float(self.weights @ np.asarray(values, dtype=np.float64))

    @property
    def baseline_risk(self) -> float:
        """ρ0 = Σ w_s L_s"""
        return self.expectation(self.require_losses())

    @property
    def loss_variance(self) -> float:
        losses = self.require_losses()
        m = self.weights @ losses
        return float(self.weights @ (losses - m) ** 2)


@dataclass(frozen=True)
class TruncatedGammaPosterior:
    """Gamma(shape, rate)-Posterior für den Poisson-Mittelwert, trunkiert auf (0, truncation)."""

    shape: float
    rate: float
    truncation: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ParameterError(f"shape und rate müssen positiv sein: {self.shape}, {self.rate}")

    @classmethod
    def from_graph(cls, g: Graph, prior_shape: float, prior_rate: float) -> "TruncatedGammaPosterior":
        """Konjugiertes Update: shape' = a + Σ Grade, rate' = b + n."""
        return cls(shape=prior_shape + 2.0 * g.m, rate=prior_rate + g.n)

    def acceptance_probability(self) -> float:
        return float(stats.gamma.cdf(self.truncation, self.shape, scale=1.0 / self.rate))

    def mean(self) -> float:
        """Analytischer Mittelwert der trunkierten Verteilung."""
        upper = stats.gamma.cdf(self.truncation, self.shape + 1.0, scale=1.0 / self.rate)
        return float(self.shape / self.rate * upper / self.acceptance_probability())

    def sample(self, n_draws: int, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
        """
        Verwerfungs-Sampling: zieht n_draws Werte, behält die unter der Trunkierung.

        Returns:
            (akzeptierte Werte, Akzeptanzrate)
        """
        draws = rng.gamma(self.shape, 1.0 / self.rate, size=n_draws)
        accepted = draws[draws < self.truncation]
        return accepted, accepted.shape[0] / n_draws


@dataclass(frozen=True)
class ModelSelection:
    action: int
    e0: float
    switching_radius: float
    weights: Tuple[float, float]


# ============================================================================
# ER GEGEN SBM
# ============================================================================

def er_vs_sbm_posterior(g: Graph, labels, c: float, lam: float, prior_odds: float = 1.0) -> TwoPointPosterior:
    """
    Exakte Posterior für H0 = Sparse ER gegen H1 = gelabeltes SBM.

    Kanten werden einzeln gezählt, Nicht-Kanten je Paarklasse in geschlossener Form
    (O(m) statt O(n²)).

    Args:
        g: Beobachteter Graph
        labels: Balancierte Labels in {+1, −1}ⁿ
        c: Baseline-Parameter
        lam: Signalstärke
        prior_odds: π1/π0

    Returns:
        TwoPointPosterior
    """
    if not prior_odds > 0:
        raise ParameterError(f"Prior-Odds müssen positiv sein: {prior_odds}")
    params = LabelledSbmParams(g.n, c, lam, labels)
    p, p_in, p_out = params.p, params.p_in, params.p_out

    same = params.labels[g.edges[:, 0]] == params.labels[g.edges[:, 1]]
    m_in = int(same.sum())
    m_out = g.m - m_in
    n_in = g.n * (g.n - 2) / 4.0
    n_out = g.n * g.n / 4.0

    log_bf = (
        math.log(prior_odds)
        + m_in * math.log(p_in / p)
        + (n_in - m_in) * (math.log1p(-p_in) - math.log1p(-p))
        + m_out * math.log(p_out / p)
        + (n_out - m_out) * (math.log1p(-p_out) - math.log1p(-p))
    )
    return TwoPointPosterior.from_log_bf(log_bf)


def bayes_action_and_error(post: TwoPointPosterior) -> Tuple[int, float]:
    """Bayes-Aktion unter 0-1-Verlust (Gleichstand → Modell 1) und Fehlklassifikationsrisiko e0."""
    action = 1 if post.p1 >= post.p0 else 0
    return action, min(post.p0, post.p1)


# ============================================================================
# KONFIGURATIONSMODELL
# ============================================================================

def poisson_mean_pseudo_posterior(g: Graph, prior_shape: float, prior_rate: float,
                                  n_draws: int, seed: int) -> WeightedSample:
    """
    Trunkierte Gamma-Pseudo-Posterior des Poisson-Mittelwerts (subkritisch: Mittelwert < 1).

    Raises:
        TruncationDegenerateError: Akzeptanzrate unter MIN_TRUNCATION_ACCEPTANCE
    """
    if n_draws < 1:
        raise ParameterError(f"n_draws muss >= 1 sein: {n_draws}")
    posterior = TruncatedGammaPosterior.from_graph(g, prior_shape, prior_rate)
    accepted, rate = posterior.sample(n_draws, make_rng(seed))

    if rate < MIN_TRUNCATION_ACCEPTANCE or accepted.size == 0:
        raise TruncationDegenerateError(
            f"Akzeptanzrate {rate:.2e} zu klein: Posterior-Masse fast vollständig superkritisch",
            acceptance_rate=rate,
        )
    if rate < 0.5:
        logger.warning(f"[WARNUNG] Niedrige Akzeptanzrate der Trunkierung: {rate:.3f}")
    return WeightedSample.uniform(accepted)


def susceptibility_values(atoms) -> np.ndarray:
    """R(μ) = 1/(1−θ) mit θ = Poisson-Mittelwert."""
    atoms = np.asarray(atoms, dtype=np.float64)
    if atoms.ndim != 1:
        raise DomainError("Suszeptibilität erwartet skalare Atome")
    if np.any(atoms >= 1.0):
        raise DomainError("Atom >= 1 liegt im superkritischen Bereich")
    return 1.0 / (1.0 - atoms)


def susceptibility_bayes_action(sample: WeightedSample) -> float:
    """Posterior-Mittel von R, Bayes-Aktion unter quadratischem Verlust."""
    return sample.expectation(susceptibility_values(sample.atoms))


def susceptibility_losses(sample: WeightedSample, action: float) -> WeightedSample:
    """Cacht L_s = (a − R(θ_s))²."""
    R = susceptibility_values(sample.atoms)
    return sample.with_losses((action - R) ** 2)


# ============================================================================
# MODELLAUSWAHL
# ============================================================================

def tempered_bic_weights(bics, tau: float) -> np.ndarray:
    """w_k ∝ exp(−τ·BIC_k/2)"""
    bics = np.asarray(bics, dtype=np.float64)
    if not tau > 0:
        raise ParameterError(f"tau muss positiv sein: {tau}")
    if bics.size == 0 or not np.all(np.isfinite(bics)):
        raise ParameterError("BIC-Werte müssen endlich und nicht leer sein")
    return softmax(-0.5 * tau * bics)


def robust_model_selection(weights) -> ModelSelection:
    """
    Zwei-Modell-Entscheidung aus (getemperten) Posterior-Gewichten.

    Returns:
        ModelSelection mit Bayes-Aktion, e0 und dem KL-Radius, ab dem die Entscheidung kippt
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (2,):
        raise ParameterError(f"Genau zwei Modellgewichte erwartet, erhalten: {weights.shape}")
    if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-9):
        raise ParameterError("Gewichte müssen nichtnegativ sein und sich zu 1 summieren")
    with np.errstate(divide="ignore"):
        log_bf = float(np.log(weights[1]) - np.log(weights[0]))
    post = TwoPointPosterior(p0=float(weights[0]), p1=float(weights[1]), log_bf=log_bf)
    action, e0 = bayes_action_and_error(post)
    return ModelSelection(action=action, e0=e0, switching_radius=switching_radius(e0),
                          weights=(post.p0, post.p1))
