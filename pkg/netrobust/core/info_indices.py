"""
Informationsindizes für den Test Sparse ER gegen gelabeltes Zwei-Block-SBM.

Bernoulli-KL, Pro-Knoten-KL I(λ), Chernoff-Index J(λ), endliche-n Divergenzen
und der Umschaltradius. Natürlicher Logarithmus durchgehend.
"""

import logging
import math
from dataclasses import dataclass, asdict, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import rel_entr

from .errors import ParameterError
from .graph_models import LabelledSbmParams
from ..config.settings import CHERNOFF_GRID_SIZE, GOLDEN_TOL, PROB_FLOOR, PROB_CEIL

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InfoIndexReport:
    c: float
    lam: float
    I_exact: float
    I_smallsignal: float
    J_exact: float
    J_smallsignal: float
    t_star: float
    Dn_over_n: float = float("nan")
    Cn_over_n: float = float("nan")

    def to_row(self) -> dict:
        row = asdict(self)
        return {
            "c": row["c"],
            "lambda": row["lam"],
            "I_exact": row["I_exact"],
            "I_approx": row["I_smallsignal"],
            "J_exact": row["J_exact"],
            "J_approx": row["J_smallsignal"],
            "t_star": row["t_star"],
            "Dn_over_n": row["Dn_over_n"],
            "Cn_over_n": row["Cn_over_n"],
        }


def _check_signal(c: float, lam: float):
    if c <= 0:
        raise ParameterError(f"c muss positiv sein: {c}")
    if abs(lam) >= c:
        raise ParameterError(f"|lambda| muss kleiner als c sein: lambda={lam}, c={c}")


def bernoulli_kl(p, q):
    """
    KL(Bern(p) ∥ Bern(q)) mit 0·log 0 = 0.

    Liefert inf, wenn q ∈ {0, 1} und p davon abweicht. Elementweise für Arrays.
    """
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any((p_arr < 0) | (p_arr > 1)) or np.any((q_arr < 0) | (q_arr > 1)):
        raise ParameterError("Wahrscheinlichkeiten müssen in [0, 1] liegen")
    value = rel_entr(p_arr, q_arr) + rel_entr(1.0 - p_arr, 1.0 - q_arr)
    if value.ndim == 0:
        return float(value)
    return value


def per_vertex_kl_I(c: float, lam: float) -> float:
    """I(λ) = ¼[(c+λ)log((c+λ)/c) + (c−λ)log((c−λ)/c)]"""
    _check_signal(c, lam)
    return float((rel_entr(c + lam, c) + rel_entr(c - lam, c)) / 4.0)


def _maximize_on_unit_interval(objective: Callable[[float], float], grid_size: int) -> Tuple[float, float]:
    """
    Maximiert eine Funktion auf [0, 1]: Gitter, dann Goldener Schnitt um das Gitter-Maximum.

    Returns:
        (Maximum, Argmax)
    """
    if grid_size < 3:
        raise ParameterError(f"Gittergröße muss >= 3 sein: {grid_size}")

    grid = np.linspace(0.0, 1.0, grid_size)
    values = np.array([objective(t) for t in grid])
    i = int(np.argmax(values))
    best_t, best_value = float(grid[i]), float(values[i])
    if i == 0 or i == grid_size - 1:
        return best_value, best_t

    try:
        res = minimize_scalar(lambda t: -objective(t), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                              method="golden", options={"xtol": GOLDEN_TOL})
    except ValueError:
        # Flaches Plateau: kein striktes Bracket
        res = minimize_scalar(lambda t: -objective(t), bounds=(grid[i - 1], grid[i + 1]),
                              method="bounded", options={"xatol": GOLDEN_TOL})

    if 0.0 <= res.x <= 1.0 and -res.fun > best_value:
        best_t, best_value = float(res.x), float(-res.fun)
    return best_value, best_t


def chernoff_J(c: float, lam: float, t_grid_size: int = CHERNOFF_GRID_SIZE) -> Tuple[float, float]:
    """
    J(λ) = sup_{0≤t≤1} ¼[2c − c^{1−t}((c+λ)^t + (c−λ)^t)]

    Returns:
        (J, t_star)
    """
    _check_signal(c, lam)
    if lam == 0:
        return 0.0, 0.5

    log_up = math.log((c + lam) / c)
    log_down = math.log((c - lam) / c)

    def objective(t: float) -> float:
        return 0.25 * (2.0 * c - c * (math.exp(t * log_up) + math.exp(t * log_down)))

    J, t_star = _maximize_on_unit_interval(objective, t_grid_size)
    return max(J, 0.0), t_star


def _pair_counts(n: int) -> Tuple[float, float]:
    """(N_in, N_out) = (n(n−2)/4, n²/4)"""
    return n * (n - 2) / 4.0, n * n / 4.0


def finite_n_kl(n: int, c: float, lam: float) -> float:
    """D_n = N_in·kl(p_in, p) + N_out·kl(p_out, p) zwischen gelabeltem SBM und ER."""
    params = LabelledSbmParams(n, c, lam)
    n_in, n_out = _pair_counts(n)
    return float(n_in * bernoulli_kl(params.p_in, params.p) + n_out * bernoulli_kl(params.p_out, params.p))


def _log_affinity(r: float, q: float, t: float) -> float:
    """−φ(r, q; t) = log(r^{1−t} q^t + (1−r)^{1−t} (1−q)^t), mit geklemmten Wahrscheinlichkeiten."""
    r = min(max(r, PROB_FLOOR), PROB_CEIL)
    q = min(max(q, PROB_FLOOR), PROB_CEIL)
    return float(np.logaddexp((1.0 - t) * math.log(r) + t * math.log(q),
                           (1.0 - t) * math.log1p(-r) + t * math.log1p(-q)))


def finite_n_chernoff(n: int, c: float, lam: float, t_grid_size: int = CHERNOFF_GRID_SIZE) -> float:
    """sup_t N_in·φ(p, p_in; t) + N_out·φ(p, p_out; t)"""
    params = LabelledSbmParams(n, c, lam)
    if lam == 0:
        return 0.0
    n_in, n_out = _pair_counts(n)
    p, p_in, p_out = params.p, params.p_in, params.p_out

    def objective(t: float) -> float:
        return -(n_in * _log_affinity(p, p_in, t) + n_out * _log_affinity(p, p_out, t))

    value, _ = _maximize_on_unit_interval(objective, t_grid_size)
    return max(value, 0.0)


def switching_radius(e0: float) -> float:
    """
    KL-Radius, ab dem ein Zwei-Punkt-Risiko e0 auf ½ geschoben werden kann.

    Returns:
        KL(Bern(½) ∥ Bern(e0)); inf für e0 = 0
    """
    if not (0.0 <= e0 <= 0.5):
        raise ParameterError(f"e0 muss in [0, 0.5] liegen: {e0}")
    return bernoulli_kl(0.5, e0)


def info_index_report(c: float, lam: float, n: Optional[int] = None,
                      t_grid_size: int = CHERNOFF_GRID_SIZE) -> InfoIndexReport:
    """Alle Indizes für (c, λ), optional mit endlichen-n Werten D_n/n und C_n/n."""
    J, t_star = chernoff_J(c, lam, t_grid_size)
    report = InfoIndexReport(
        c=c,
        lam=lam,
        I_exact=per_vertex_kl_I(c, lam),
        I_smallsignal=lam ** 2 / (4.0 * c),
        J_exact=J,
        J_smallsignal=lam ** 2 / (16.0 * c),
        t_star=t_star,
    )
    if n is not None:
        report = replace(
            report,
            Dn_over_n=finite_n_kl(n, c, lam) / n,
            Cn_over_n=finite_n_chernoff(n, c, lam, t_grid_size) / n,
        )
    return report
