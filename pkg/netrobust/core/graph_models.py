"""
Zufallsgraph-Modelle und Sampler.

Enthält den Graph-Typ (ungerichtet, einfach) sowie seeded Sampler für
Sparse ER, gelabeltes Zwei-Block-SBM, Schrittgraphon und Konfigurationsmodell.
Alle Sampler sind reine Funktionen von (Parameter, Seed).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps

from .errors import ParameterError
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)


# ============================================================================
# GRAPH
# ============================================================================

@dataclass(frozen=True, eq=False)
class Graph:
    """
    Ungerichteter einfacher Graph.

    Kanten werden kanonisch als (m, 2)-Array mit i < j, lexikographisch
    sortiert und ohne Duplikate gehalten. Nachbarlisten werden bei Bedarf
    als CSR-Struktur abgeleitet. Nach der Konstruktion unveränderlich.
    """

    n: int
    edges: np.ndarray

    def __post_init__(self):
        if int(self.n) < 1:
            raise ParameterError(f"Knotenzahl muss positiv sein, erhalten: {self.n}")
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ParameterError("Kantenindex außerhalb von [0, n)")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ParameterError("Kanten müssen als (i, j) mit i < j vorliegen")
        edges.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """
        Baut einen einfachen Graphen aus beliebigen Kantenpaaren.

        Schleifen werden verworfen, Mehrfachkanten zusammengefasst.
        """
        pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        if pairs.size == 0:
            return cls(n, np.empty((0, 2), dtype=np.int64))
        canonical = np.column_stack([pairs.min(axis=1), pairs.max(axis=1)])
        canonical = np.unique(canonical, axis=0)
        return cls(n, canonical)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, np.empty((0, 2), dtype=np.int64))

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.edges.ravel(), minlength=self.n)
        deg.setflags(write=False)
        return deg

    @cached_property
    def _csr(self) -> sps.csr_matrix:
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(rows.shape[0], dtype=np.float64)
        mat = sps.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
        mat.sort_indices()
        return mat

    def to_sparse(self) -> sps.csr_matrix:
        """Adjazenzmatrix als (Kopie einer) CSR-Matrix."""
        return self._csr.copy()

    @cached_property
    def adjacency(self) -> Tuple[np.ndarray, ...]:
        """Sortierte Nachbarlisten pro Knoten."""
        csr = self._csr
        return tuple(csr.indices[csr.indptr[i]:csr.indptr[i + 1]].copy() for i in range(self.n))

    def neighbors(self, i: int) -> np.ndarray:
        csr = self._csr
        return csr.indices[csr.indptr[i]:csr.indptr[i + 1]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


# ============================================================================
# PARAMETER-TYPEN
# ============================================================================

@dataclass(frozen=True)
class SparseErParams:
    """Sparse ER: Kantenwahrscheinlichkeit p_n = c/n."""

    n: int
    c: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"Knotenzahl muss positiv sein: {self.n}")
        # c = n ist zugelassen (p = 1, vollständiger Graph)
        if not (0 < self.c <= self.n):
            raise ParameterError(f"c muss in (0, n] liegen: c={self.c}, n={self.n}")

    @property
    def p(self) -> float:
        return self.c / self.n


@dataclass(frozen=True, eq=False)
class LabelledSbmParams:
    """
    Balanciertes Zwei-Block-SBM mit bekannten Labels.

    Innerhalb gleicher Labels p_in = (c+λ)/n, zwischen Labels p_out = (c−λ)/n.
    Ohne explizite Labels erhalten die ersten n/2 Knoten +1, der Rest −1.
    """

    n: int
    c: float
    lam: float
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ParameterError(f"n muss gerade und >= 2 sein: {self.n}")
        if self.c <= 0:
            raise ParameterError(f"c muss positiv sein: {self.c}")
        if abs(self.lam) >= self.c:
            raise ParameterError(f"|lambda| muss kleiner als c sein: lambda={self.lam}, c={self.c}")
        if not (self.p_in < 1.0 and self.p_out < 1.0):
            raise ParameterError(f"p_in/p_out außerhalb (0,1): p_in={self.p_in}, p_out={self.p_out}")
        labels = default_labels(self.n) if self.labels is None else np.asarray(self.labels, dtype=np.int64)
        validate_labels(labels, self.n)
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def p(self) -> float:
        return self.c / self.n

    @property
    def p_in(self) -> float:
        return (self.c + self.lam) / self.n

    @property
    def p_out(self) -> float:
        return (self.c - self.lam) / self.n


def default_labels(n: int) -> np.ndarray:
    """Erste n/2 Knoten +1, restliche −1."""
    labels = -np.ones(n, dtype=np.int64)
    labels[: n // 2] = 1
    return labels


def validate_labels(labels: np.ndarray, n: int):
    """Prüft Labels auf {+1, −1}ⁿ mit exakt n/2 je Vorzeichen."""
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ParameterError(f"Labels müssen Länge {n} haben, erhalten: {labels.shape}")
    if not np.all(np.isin(labels, (-1, 1))):
        raise ParameterError("Labels müssen in {+1, -1} liegen")
    if int((labels == 1).sum()) * 2 != n:
        raise ParameterError("Labels sind nicht balanciert")


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """K-Block-Schrittgraphon: Blockanteile pi und symmetrische Blockmatrix B."""

    pi: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=np.float64).ravel()
        B = np.array(self.B, dtype=np.float64)
        K = pi.shape[0]
        if K < 1 or B.shape != (K, K):
            raise ParameterError(f"B muss {K}x{K} sein, erhalten: {B.shape}")
        if np.any(pi <= 0) or not np.isclose(pi.sum(), 1.0, rtol=0, atol=1e-10):
            raise ParameterError("Blockanteile müssen positiv sein und sich zu 1 summieren")
        if not np.allclose(B, B.T, rtol=0, atol=1e-12):
            raise ParameterError("B muss symmetrisch sein")
        if np.any(B < 0) or np.any(B > 1):
            raise ParameterError("Einträge von B müssen in [0, 1] liegen")
        B = (B + B.T) / 2.0
        pi.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "B", B)

    @classmethod
    def constant(cls, p: float) -> "StepGraphon":
        return cls(np.array([1.0]), np.array([[p]]))

    @property
    def K(self) -> int:
        return int(self.pi.shape[0])

    def block_of(self, u: np.ndarray) -> np.ndarray:
        """Bildet latente Uniform-Positionen über kumulierte Anteile auf Blockindizes ab."""
        idx = np.searchsorted(np.cumsum(self.pi), u, side="right")
        return np.minimum(idx, self.K - 1)

    def with_matrix(self, B: np.ndarray) -> "StepGraphon":
        return StepGraphon(self.pi, B)

    def to_dict(self) -> dict:
        return {"K": self.K, "pi": self.pi.tolist(), "B": self.B.tolist()}


class DegreeKind(Enum):
    POISSON = "poisson"
    EXPLICIT = "explicit"


@dataclass(frozen=True, eq=False)
class DegreeModel:
    """Gradverteilung μ für das Konfigurationsmodell."""

    kind: DegreeKind
    mean: float = 0.0
    probabilities: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind is DegreeKind.POISSON:
            if not self.mean > 0:
                raise ParameterError(f"Poisson-Mittelwert muss positiv sein: {self.mean}")
        else:
            probs = np.array(self.probabilities, dtype=np.float64).ravel()
            if probs.size == 0 or np.any(probs < 0) or not np.isclose(probs.sum(), 1.0, rtol=0, atol=1e-10):
                raise ParameterError("Explizite Gradverteilung muss nichtnegativ sein und sich zu 1 summieren")
            probs = probs / probs.sum()
            probs.setflags(write=False)
            object.__setattr__(self, "probabilities", probs)

    @classmethod
    def poisson(cls, mean: float) -> "DegreeModel":
        return cls(DegreeKind.POISSON, mean=float(mean))

    @classmethod
    def explicit(cls, probabilities: Sequence[float]) -> "DegreeModel":
        return cls(DegreeKind.EXPLICIT, probabilities=np.asarray(probabilities, dtype=np.float64))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is DegreeKind.POISSON:
            return rng.poisson(self.mean, size=n).astype(np.int64)
        return rng.choice(self.probabilities.shape[0], size=n, p=self.probabilities).astype(np.int64)

    def _moments(self) -> Tuple[float, float]:
        """(E[D], E[D(D−1)])"""
        if self.kind is DegreeKind.POISSON:
            return self.mean, self.mean ** 2
        k = np.arange(self.probabilities.shape[0], dtype=np.float64)
        return float(self.probabilities @ k), float(self.probabilities @ (k * (k - 1)))

    def branching_factor(self) -> float:
        """θ(μ) = E[D(D−1)] / E[D]; 0 für die Nullverteilung."""
        first, second = self._moments()
        return second / first if first > 0 else 0.0

    def limiting_susceptibility(self) -> float:
        """Grenzwert 1/(1−θ) der Suszeptibilität im subkritischen Bereich, sonst inf."""
        theta = self.branching_factor()
        return 1.0 / (1.0 - theta) if theta < 1.0 else float("inf")


@dataclass(frozen=True)
class ConfigurationStats:
    stub_pairs: int
    erased_loops: int
    erased_multi_edges: int

    @property
    def erased_fraction(self) -> float:
        if self.stub_pairs == 0:
            return 0.0
        return (self.erased_loops + self.erased_multi_edges) / self.stub_pairs


# ============================================================================
# PAAR-SAMPLING
# ============================================================================

def _decode_triangular(k: np.ndarray, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dekodiert lineare Indizes der oberen Dreiecksmatrix (ohne Diagonale).

    Reihenfolge (0,1), (0,2), ..., (0,size−1), (1,2), ...
    """
    k = np.asarray(k, dtype=np.int64)
    if k.size == 0:
        return k.copy(), k.copy()
    disc = np.sqrt(-8.0 * k + 4.0 * size * (size - 1) - 7.0)
    i = (size - 2 - np.floor(disc / 2.0 - 0.5)).astype(np.int64)
    i = np.clip(i, 0, size - 2)

    def row_start(r):
        return r * (2 * size - r - 1) // 2

    # Rundungskorrektur
    below = k < row_start(i)
    i[below] -= 1
    above = k >= row_start(i + 1)
    i[above] += 1
    j = k - row_start(i) + i + 1
    return i, j


def _draw_pair_indices(rng: np.random.Generator, n_pairs: int, p: float) -> np.ndarray:
    """Zieht die Menge der Kantenindizes: Anzahl ~ Bin(n_pairs, p), Auswahl gleichverteilt ohne Zurücklegen."""
    if n_pairs <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    count = int(rng.binomial(n_pairs, min(p, 1.0)))
    if count == 0:
        return np.empty(0, dtype=np.int64)
    return np.asarray(rng.choice(n_pairs, size=count, replace=False, shuffle=False), dtype=np.int64)


def _sample_block_edges(rng: np.random.Generator, groups: List[np.ndarray], B: np.ndarray) -> np.ndarray:
    """Unabhängige Bernoulli-Kanten mit Wahrscheinlichkeit B[a, b] je Knotenpaar aus Block a × Block b."""
    parts = []
    K = len(groups)
    for a in range(K):
        va = groups[a]
        na = va.shape[0]
        idx = _draw_pair_indices(rng, na * (na - 1) // 2, float(B[a, a]))
        if idx.size:
            i, j = _decode_triangular(idx, na)
            parts.append(np.column_stack([va[i], va[j]]))
        for b in range(a + 1, K):
            vb = groups[b]
            nb = vb.shape[0]
            idx = _draw_pair_indices(rng, na * nb, float(B[a, b]))
            if idx.size:
                parts.append(np.column_stack([va[idx // nb], vb[idx % nb]]))
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(parts)


# ============================================================================
# SAMPLER
# ============================================================================

def sample_sparse_er(params: SparseErParams, seed: int) -> Graph:
    """
    Sparse Erdős–Rényi-Graph: jedes Paar unabhängig mit Wahrscheinlichkeit c/n.

    Args:
        params: SparseErParams
        seed: Seed (bestimmt den Graphen bitgenau)

    Returns:
        Graph
    """
    rng = make_rng(seed)
    edges = _sample_block_edges(rng, [np.arange(params.n, dtype=np.int64)], np.array([[params.p]]))
    return Graph.from_edges(params.n, edges)


def sample_two_block_sbm(params: LabelledSbmParams, seed: int) -> Graph:
    """
    Gelabeltes Zwei-Block-SBM: p_in innerhalb gleicher Labels, p_out zwischen Labels.

    Args:
        params: LabelledSbmParams
        seed: Seed

    Returns:
        Graph
    """
    rng = make_rng(seed)
    groups = [np.flatnonzero(params.labels == 1), np.flatnonzero(params.labels == -1)]
    B = np.array([[params.p_in, params.p_out], [params.p_out, params.p_in]])
    return Graph.from_edges(params.n, _sample_block_edges(rng, groups, B))


def sample_graphon(n: int, W: StepGraphon, seed: int) -> Tuple[Graph, np.ndarray]:
    """
    Graphon-Sampling: U_i ~ Uniform[0,1], Blockindex über kumulierte Anteile,
    Kanten Bernoulli(B[z_i, z_j]).

    Returns:
        (Graph, Blockindizes der Knoten)
    """
    if n < 1:
        raise ParameterError(f"Knotenzahl muss positiv sein: {n}")
    rng = make_rng(seed)
    z = W.block_of(rng.random(n))
    groups = [np.flatnonzero(z == a) for a in range(W.K)]
    edges = _sample_block_edges(rng, groups, W.B)
    return Graph.from_edges(n, edges), z


def sample_configuration_model_with_stats(n: int, deg: DegreeModel, seed: int) -> Tuple[Graph, ConfigurationStats]:
    """
    Gelöschtes Konfigurationsmodell mit Protokoll der entfernten Schleifen/Mehrfachkanten.

    Ungerade Gradsumme: ein gleichverteilt gewählter Knoten erhält einen Stub mehr.
    """
    if n < 1:
        raise ParameterError(f"Knotenzahl muss positiv sein: {n}")
    rng = make_rng(seed)
    degrees = deg.sample(n, rng)
    if int(degrees.sum()) % 2 == 1:
        degrees[rng.integers(n)] += 1
    if int(degrees.sum()) == 0:
        return Graph.empty(n), ConfigurationStats(0, 0, 0)

    stubs = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), degrees))
    pairs = stubs.reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    graph = Graph.from_edges(n, pairs[~loops])
    stats = ConfigurationStats(
        stub_pairs=int(pairs.shape[0]),
        erased_loops=int(loops.sum()),
        erased_multi_edges=int((~loops).sum()) - graph.m,
    )
    logger.debug(f"[INFO] Konfigurationsmodell: {stats.stub_pairs} Stub-Paare, "
                 f"{stats.erased_loops} Schleifen, {stats.erased_multi_edges} Mehrfachkanten gelöscht")
    return graph, stats


def sample_configuration_model(n: int, deg: DegreeModel, seed: int) -> Graph:
    """Konfigurationsmodell CM_n(μ) mit i.i.d. Graden, gelöscht zu einem einfachen Graphen."""
    graph, _ = sample_configuration_model_with_stats(n, deg, seed)
    return graph


def sample_gnm(n: int, m: int, seed: int) -> Graph:
    """Gleichverteilter Graph mit genau m Kanten (ER-Referenz mit passendem (n, m))."""
    n_pairs = n * (n - 1) // 2
    if m < 0 or m > n_pairs:
        raise ParameterError(f"m={m} außerhalb [0, {n_pairs}]")
    rng = make_rng(seed)
    idx = np.asarray(rng.choice(n_pairs, size=m, replace=False, shuffle=False), dtype=np.int64)
    i, j = _decode_triangular(idx, n)
    return Graph.from_edges(n, np.column_stack([i, j]))
