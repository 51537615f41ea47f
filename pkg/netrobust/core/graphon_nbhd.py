"""
KL-Nachbarschaften von Schrittgraphonen.

Monte-Carlo-Graphon-KL, erwartete KL unter Dirichlet-Perturbation und die
Perturbations-/Rescaling-Züge einer Kette innerhalb eines KL-Balls.
Blockwahrscheinlichkeiten werden über die K(K+1)/2 Zellen des oberen Dreiecks
(inkl. Diagonale) vektorisiert, damit B symmetrisch bleibt.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import digamma

from .errors import ParameterError
from .graph_models import StepGraphon
from .info_indices import bernoulli_kl
from ..config.settings import GRAPHON_CLAMP_EPS, GRAPHON_CONCENTRATION, GRAPHON_RHO
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphonKlEstimate:
    estimate: float
    std_error: float
    continuum: float


def _check_common_partition(W: StepGraphon, Wstar: StepGraphon):
    if W.K != Wstar.K or not np.allclose(W.pi, Wstar.pi, rtol=0, atol=1e-12):
        raise ParameterError("Graphone müssen dieselbe Partition (K, pi) haben")


def _cell_kl(W: StepGraphon, Wstar: StepGraphon) -> np.ndarray:
    return bernoulli_kl(W.B, Wstar.B)


def continuum_kl(W: StepGraphon, Wstar: StepGraphon) -> float:
    """Pro-Kante-Divergenz Σ_{a,b} π_a π_b kl(B_ab, B*_ab)."""
    _check_common_partition(W, Wstar)
    cells = _cell_kl(W, Wstar)
    if np.isinf(cells).any():
        return float("inf")
    return float(Wstar.pi @ cells @ Wstar.pi)


def graphon_kl_mc(W: StepGraphon, Wstar: StepGraphon, n: int, mc_reps: int, seed: int) -> GraphonKlEstimate:
    """
    Monte-Carlo-Schätzung von E_U[Σ_{i<j} kl(W(U_i,U_j), W*(U_i,U_j))].

    Für Schrittgraphone zählen nur die Blockbelegungen n_a je Latentziehung.

    Returns:
        GraphonKlEstimate (Schätzer, Standardfehler, Kontinuumswert pro Kante)
    """
    if n < 1 or mc_reps < 1:
        raise ParameterError(f"n und mc_reps müssen positiv sein: n={n}, mc_reps={mc_reps}")
    _check_common_partition(W, Wstar)
    cells = _cell_kl(W, Wstar)
    if np.isinf(cells).any():
        return GraphonKlEstimate(float("inf"), 0.0, float("inf"))

    totals = np.empty(mc_reps)
    for rep in range(mc_reps):
        rng = make_rng(seed, rep)
        counts = np.bincount(Wstar.block_of(rng.random(n)), minlength=W.K).astype(np.float64)
        pairs = np.outer(counts, counts)
        np.fill_diagonal(pairs, counts * (counts - 1.0))
        # geordnete Paare halbiert = ungeordnete Paare
        totals[rep] = float((pairs * cells).sum() / 2.0)

    std_error = float(totals.std(ddof=1) / math.sqrt(mc_reps)) if mc_reps > 1 else 0.0
    return GraphonKlEstimate(float(totals.mean()), std_error, float(Wstar.pi @ cells @ Wstar.pi))


def dirichlet_expected_kl(pstar, alpha: float) -> float:
    """
    E[KL(P ∥ p*)] für P ~ Dirichlet(α p*):
    Σ p*_i {ψ₀(α p*_i + 1) − ψ₀(α + 1) − log p*_i}
    """
    pstar = np.asarray(pstar, dtype=np.float64).ravel()
    if np.any(pstar <= 0):
        raise ParameterError("p* muss strikt positiv sein")
    if not math.isclose(pstar.sum(), 1.0, abs_tol=1e-10):
        raise ParameterError(f"p* muss sich zu 1 summieren: {pstar.sum()}")
    if not alpha > 0:
        raise ParameterError(f"alpha muss positiv sein: {alpha}")
    value = pstar @ (digamma(alpha * pstar + 1.0) - digamma(alpha + 1.0) - np.log(pstar))
    return max(float(value), 0.0)


# ============================================================================
# KL-BALL UND KETTE
# ============================================================================

def _upper_cells(K: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(K)


def graphon_cells(W: StepGraphon) -> np.ndarray:
    """Vektor der Blockwahrscheinlichkeiten im oberen Dreieck (inkl. Diagonale)."""
    return W.B[_upper_cells(W.K)].copy()


def graphon_from_cells(template: StepGraphon, cells: np.ndarray) -> StepGraphon:
    rows, cols = _upper_cells(template.K)
    B = np.zeros((template.K, template.K))
    B[rows, cols] = cells
    B[cols, rows] = cells
    return StepGraphon(template.pi, B)


@dataclass(frozen=True)
class GraphonBall:
    """KL-Ball {W: KL(G_n(W) ∥ G_n(W*)) ≤ radius} um ein Zentrum mit gemeinsamer Partition."""

    center: StepGraphon
    radius: float
    n: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"Radius muss positiv sein: {self.radius}")
        if self.n < 2:
            raise ParameterError(f"n muss >= 2 sein: {self.n}")
        B = self.center.B
        if np.any(B <= 0) or np.any(B >= 1):
            raise ParameterError("Zentrum muss Einträge in (0, 1) haben")

    @cached_property
    def scale(self) -> float:
        """Normierungskonstante der Vektorisierung, beim Anlegen des Balls festgehalten."""
        return float(graphon_cells(self.center).sum())

    def kl_to_center(self, W: StepGraphon) -> float:
        """Exakte erwartete KL der n-Knoten-Graphgesetze: C(n,2)·Σ π_a π_b kl(B_ab, B*_ab)."""
        return math.comb(self.n, 2) * continuum_kl(W, self.center)

    def admits(self, W: StepGraphon) -> bool:
        return self.kl_to_center(W) <= self.radius


def proposal_alpha(current: StepGraphon, concentration: float = GRAPHON_CONCENTRATION) -> np.ndarray:
    """Dirichlet-Parameter α = Konzentration · (normierter Zellvektor des aktuellen Zustands)."""
    if not concentration > 0:
        raise ParameterError(f"Konzentration muss positiv sein: {concentration}")
    cells = graphon_cells(current)
    return concentration * cells / cells.sum()


def _clamp(cells: np.ndarray) -> np.ndarray:
    return np.clip(cells, GRAPHON_CLAMP_EPS, 1.0 - GRAPHON_CLAMP_EPS)


def perturb_step(current: StepGraphon, ball: GraphonBall, alpha, seed: int) -> Tuple[StepGraphon, bool]:
    """
    Perturbationszug: Ỹ_ab ~ Gamma(α_ab, 1), normiert auf den Simplex, mit der
    Skala des Balls zurück in Kantenwahrscheinlichkeiten.

    Returns:
        (nächster Zustand, akzeptiert)
    """
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    n_cells = current.K * (current.K + 1) // 2
    if alpha.shape != (n_cells,) or np.any(alpha <= 0):
        raise ParameterError(f"alpha muss {n_cells} positive Einträge haben")

    rng = make_rng(seed)
    y = rng.gamma(alpha, 1.0)
    total = y.sum()
    if not total > 0:
        return current, False
    proposal = graphon_from_cells(current, _clamp(y / total * ball.scale))

    if ball.admits(proposal):
        return proposal, True
    return current, False


def _rescale_move(current: StepGraphon, ball: GraphonBall, rho: float, seed: int) -> Tuple[StepGraphon, str]:
    """
    Rescaling-Zug mit explizitem Ausgang.

    Returns:
        (nächster Zustand, "hold" | "accepted" | "rejected")
    """
    if not (0.0 <= rho < 1.0):
        raise ParameterError(f"rho muss in [0, 1) liegen: {rho}")
    rng = make_rng(seed)
    if rng.random() < 0.5:
        return current, "hold"

    cells = graphon_cells(current)
    subset = np.zeros(cells.shape[0], dtype=bool)
    while not subset.any():
        subset = rng.random(cells.shape[0]) < 0.5
    factor = rng.uniform(1.0 - rho, 1.0 + rho)
    cells[subset] *= factor
    proposal = graphon_from_cells(current, _clamp(cells))

    if ball.admits(proposal):
        return proposal, "accepted"
    return current, "rejected"


def rescale_step(current: StepGraphon, ball: GraphonBall, rho: float, seed: int) -> Tuple[StepGraphon, bool]:
    """
    Rescaling-Zug: mit Wahrscheinlichkeit ½ wird eine uniforme nichtleere Teilmenge
    der Zellen mit einem Faktor aus (1−ρ, 1+ρ) multipliziert; sonst bleibt der Zustand
    (zählt als akzeptiert).

    Returns:
        (nächster Zustand, akzeptiert)
    """
    state, outcome = _rescale_move(current, ball, rho, seed)
    return state, outcome != "rejected"


def run_chain(ball: GraphonBall, moves: int, seed: int, start: Optional[StepGraphon] = None,
              concentration: float = GRAPHON_CONCENTRATION, rho: float = GRAPHON_RHO) -> pd.DataFrame:
    """
    Kette aus zufällig gemischten Perturbations- und Rescaling-Zügen.

    Die träge Hälfte des Rescaling-Zugs steht im Trace als move="hold" mit
    accepted=False und zählt nicht zur Akzeptanzrate.

    Returns:
        Trace mit Spalten step, move, accepted, kl_to_center, b_<a>_<b> (oberes Dreieck)
    """
    state = start if start is not None else ball.center
    if not ball.admits(state):
        raise ParameterError("Startzustand liegt außerhalb des Balls")

    rng = make_rng(seed)
    rows, cols = _upper_cells(state.K)
    names = [f"b_{a}_{b}" for a, b in zip(rows, cols)]
    records = []
    accepted_count = 0
    holds = 0

    for step in range(moves):
        move_seed = int(rng.integers(2 ** 62))
        if rng.random() < 0.5:
            move = "perturb"
            state, accepted = perturb_step(state, ball, proposal_alpha(state, concentration), move_seed)
        else:
            state, outcome = _rescale_move(state, ball, rho, move_seed)
            move = "hold" if outcome == "hold" else "rescale"
            accepted = outcome == "accepted"
            holds += int(outcome == "hold")
        accepted_count += int(accepted)
        record = {"step": step, "move": move, "accepted": accepted, "kl_to_center": ball.kl_to_center(state)}
        record.update(dict(zip(names, graphon_cells(state))))
        records.append(record)

    proposed = moves - holds
    logger.info(f"[OK] Graphon-Kette: {moves} Züge ({holds} ohne Vorschlag), "
                f"Akzeptanzrate {accepted_count / max(proposed, 1):.3f}")
    return pd.DataFrame.from_records(records, columns=["step", "move", "accepted", "kl_to_center"] + names)
