"""
Datei-Ein/Ausgabe: Edge-Listen, gewichtete Stichproben, Graphon-JSON und Ergebnis-CSVs.
"""

import hashlib
import json
import logging
import os
import sys
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ..core.errors import ParameterError
from ..core.graph_models import Graph, StepGraphon
from ..core.posteriors import WeightedSample
from ..config.settings import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

HASH_PREFIX = "# config_sha256="


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# ============================================================================
# EDGE-LISTEN
# ============================================================================

def write_edge_list(g: Graph, path: str):
    """Kopfzeile "n m", danach m Zeilen "i j" (0-basiert, i < j), UTF-8, LF."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{g.n} {g.m}\n")
        for i, j in g.edges:
            f.write(f"{i} {j}\n")
    logger.info(f"[OK] Edge-Liste gespeichert: {path} (n={g.n}, m={g.m})")


def read_edge_list(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise ParameterError(f"Ungültige Kopfzeile in {path}: erwartet 'n m'")
        n, m = int(header[0]), int(header[1])
        body = [line.split() for line in f if line.strip()]

    edges = np.array(body, dtype=np.int64).reshape(-1, 2)
    if edges.shape[0] != m:
        raise ParameterError(f"Kopfzeile meldet m={m}, Datei enthält {edges.shape[0]} Kanten")
    g = Graph.from_edges(n, edges)
    if g.m != m:
        logger.warning(f"[WARNUNG] {m - g.m} doppelte Kanten oder Schleifen in {path} entfernt")
    return g


# ============================================================================
# GEWICHTETE STICHPROBEN
# ============================================================================

def read_weighted_sample(path: str) -> WeightedSample:
    """CSV mit Spalten atom, weight[, loss]; Gewichte werden renormiert."""
    df = pd.read_csv(path, comment="#")
    missing = {"atom", "weight"} - set(df.columns)
    if missing:
        raise ParameterError(f"Spalten fehlen in {path}: {sorted(missing)}")
    total = float(df["weight"].sum())
    if abs(total - 1.0) > 1e-6:
        logger.warning(f"[WARNUNG] Gewichte in {path} summieren sich zu {total:.9g} - renormiert")
    losses = df["loss"].to_numpy() if "loss" in df.columns else None
    return WeightedSample.from_unnormalized(df["atom"].to_numpy(), df["weight"].to_numpy(), losses)


def write_weighted_sample(sample: WeightedSample, path: str):
    if sample.atoms.ndim != 1:
        raise ParameterError("CSV-Format unterstützt nur skalare Atome")
    df = pd.DataFrame({"atom": sample.atoms, "weight": sample.weights})
    if sample.losses is not None:
        df["loss"] = sample.losses
    _ensure_parent(path)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


# ============================================================================
# GRAPHONE
# ============================================================================

def read_step_graphon(path: str) -> StepGraphon:
    """JSON-Objekt mit K, pi, B."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    try:
        W = StepGraphon(np.asarray(data["pi"]), np.asarray(data["B"]))
    except KeyError as e:
        raise ParameterError(f"Schlüssel fehlt in {path}: {e}")
    if "K" in data and int(data["K"]) != W.K:
        raise ParameterError(f"K={data['K']} passt nicht zu pi der Länge {W.K}")
    return W


def write_step_graphon(W: StepGraphon, path: str):
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(W.to_dict(), f, indent=2)


# ============================================================================
# KONFIGURATION UND ERGEBNISSE
# ============================================================================

def load_json_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise ParameterError(f"Konfiguration in {path} muss ein JSON-Objekt sein")
    return config


def config_hash(config: dict) -> str:
    """SHA-256 der kanonischen JSON-Darstellung."""
    content = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


def write_result_csv(frame: pd.DataFrame, config: dict, path: Optional[str] = None):
    """
    Schreibt eine Ergebnistabelle mit kommentierter Hash-Kopfzeile.

    Args:
        frame: Ergebnistabelle
        config: Vollständig aufgelöste Konfiguration (für den Hash)
        path: Zieldatei; None = stdout
    """
    header = f"{HASH_PREFIX}{config_hash(config)}\n"
    body = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    if path is None:
        sys.stdout.write(header + body)
        sys.stdout.flush()
        return
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header + body)
    logger.info(f"[OK] Ergebnis gespeichert: {path} ({len(frame)} Zeilen)")


def read_result_csv(path: str) -> Tuple[pd.DataFrame, Optional[str]]:
    """Liest eine Ergebnistabelle; liefert (Tabelle, Config-Hash)."""
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline()
    digest = first.strip()[len(HASH_PREFIX):] if first.startswith(HASH_PREFIX) else None
    return pd.read_csv(path, comment="#"), digest
