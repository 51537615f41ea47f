"""
Netzwerk-Kennzahlen auf realisierten Graphen.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse import csgraph

from .errors import ConvergenceError, UndefinedValueError, ParameterError
from .graph_models import Graph, sample_gnm
from ..config.settings import POWER_ITER_TOL, POWER_ITER_MAX, SMALL_WORLD_REF_SEEDS
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

# Quellen pro BFS-Block in average_path_length
_BFS_CHUNK = 256


@dataclass(frozen=True, eq=False)
class ComponentDecomposition:
    """Zusammenhangskomponenten: Komponenten-ID je Knoten (0..k−1) und Größen."""

    component_id: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def largest(self) -> int:
        return int(self.sizes.max()) if self.sizes.size else 0


def connected_components(g: Graph) -> ComponentDecomposition:
    """Exakte Zerlegung in Zusammenhangskomponenten."""
    count, labels = csgraph.connected_components(g._csr, directed=False)
    sizes = np.bincount(labels, minlength=count)
    return ComponentDecomposition(component_id=labels.astype(np.int64), sizes=sizes.astype(np.int64))


def empirical_susceptibility(g: Graph) -> float:
    """Erwartete Komponentengröße eines uniformen Knotens: Σ s_k² / n."""
    sizes = connected_components(g).sizes.astype(np.float64)
    return float((sizes ** 2).sum() / g.n)


def global_clustering(g: Graph) -> float:
    """3·(#Dreiecke) / (#verbundene Tripel); 0 ohne Tripel."""
    deg = g.degrees.astype(np.float64)
    triples = float((deg * (deg - 1.0)).sum() / 2.0)
    if triples == 0:
        return 0.0
    A = g._csr
    # Σ_ij (A²)_ij A_ij = 6 · #Dreiecke
    closed = float((A @ A).multiply(A).sum())
    return (closed / 2.0) / triples


def average_path_length(g: Graph) -> float:
    """
    Mittlere kürzeste Pfadlänge über Paare derselben Komponente.

    Raises:
        UndefinedValueError: kein verbundenes Paar (z.B. leerer Graph)
    """
    if g.m == 0:
        raise UndefinedValueError("Mittlere Pfadlänge undefiniert: keine verbundenen Paare")

    total = 0.0
    pairs = 0
    for start in range(0, g.n, _BFS_CHUNK):
        sources = np.arange(start, min(start + _BFS_CHUNK, g.n))
        dist = csgraph.shortest_path(g._csr, method="D", directed=False, unweighted=True, indices=sources)
        finite = np.isfinite(dist) & (dist > 0)
        total += float(dist[finite].sum())
        pairs += int(finite.sum())

    return total / pairs


def small_world_from_stats(C: float, L: float, C_rand: float, L_rand: float) -> float:
    """S = (C / C_rand) / (L / L_rand)"""
    if C_rand == 0:
        raise UndefinedValueError("Small-World-Index undefiniert: C_rand = 0")
    if L == 0 or not np.isfinite(L):
        raise UndefinedValueError("Small-World-Index undefiniert: L nicht definiert")
    return (C / C_rand) / (L / L_rand)


def small_world_index(g: Graph, reference_seeds: Optional[Sequence[int]] = None) -> float:
    """
    Small-World-Index gegen ER-Referenzgraphen mit gleichem (n, m).

    Args:
        g: Graph
        reference_seeds: Seeds der Referenzgraphen (Standard: 0..SMALL_WORLD_REF_SEEDS−1)

    Returns:
        S = (C/C_rand)/(L/L_rand) mit über die Referenzen gemittelten C_rand, L_rand
    """
    seeds = list(range(SMALL_WORLD_REF_SEEDS)) if reference_seeds is None else list(reference_seeds)
    if not seeds:
        raise ParameterError("Mindestens ein Referenz-Seed erforderlich")

    C = global_clustering(g)
    L = average_path_length(g)

    ref_C, ref_L = [], []
    for seed in seeds:
        ref = sample_gnm(g.n, g.m, seed)
        ref_C.append(global_clustering(ref))
        ref_L.append(average_path_length(ref))

    logger.debug(f"[INFO] Small-World: C={C:.4f}, L={L:.4f}, "
                 f"C_rand={np.mean(ref_C):.4f}, L_rand={np.mean(ref_L):.4f}")
    return small_world_from_stats(C, L, float(np.mean(ref_C)), float(np.mean(ref_L)))


def leading_eigenvalue(g: Graph, tol: float = POWER_ITER_TOL, max_iters: int = POWER_ITER_MAX,
                       seed: int = 0) -> float:
    """
    Größter Eigenwert der Adjazenzmatrix per Power Iteration.

    Iteriert auf A + I, damit bipartite Graphen (Eigenwerte ±λ1) nicht oszillieren;
    der Rayleigh-Quotient wird am Ende um 1 zurückverschoben.

    Raises:
        ConvergenceError: keine Konvergenz nach max_iters (trägt die letzte Schätzung)
    """
    M = g._csr + sps.identity(g.n, format="csr")
    rng = make_rng(seed)
    x = np.ones(g.n) + 1e-6 * rng.random(g.n)
    x /= np.linalg.norm(x)

    estimate = float(x @ (M @ x))
    for _ in range(max_iters):
        y = M @ x
        x = y / np.linalg.norm(y)
        new_estimate = float(x @ (M @ x))
        if abs(new_estimate - estimate) < tol:
            return new_estimate - 1.0
        estimate = new_estimate

    raise ConvergenceError(
        f"Power Iteration nach {max_iters} Schritten nicht konvergiert",
        last_iterate=estimate - 1.0,
    )


def metric_report(g: Graph, reference_seeds: Optional[Sequence[int]] = None,
                  tol: float = POWER_ITER_TOL, max_iters: int = POWER_ITER_MAX) -> dict:
    """
    Alle Kennzahlen als eine Zeile; undefinierte Werte werden als NaN gemeldet.

    Returns:
        Dict mit n, m, C, L, S, lambda1, susceptibility, lcc_size
    """
    components = connected_components(g)
    row = {
        "n": g.n,
        "m": g.m,
        "C": global_clustering(g),
        "L": float("nan"),
        "S": float("nan"),
        "lambda1": leading_eigenvalue(g, tol, max_iters),
        "susceptibility": float((components.sizes.astype(np.float64) ** 2).sum() / g.n),
        "lcc_size": components.largest,
    }
    try:
        row["L"] = average_path_length(g)
        row["S"] = small_world_index(g, reference_seeds)
    except UndefinedValueError as e:
        logger.warning(f"[WARNUNG] {e}")
    return row
