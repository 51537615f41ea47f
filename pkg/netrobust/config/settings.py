"""
Konfigurationsdatei für die robuste Bayes-Netzwerkanalyse.
"""

import os
from dotenv import load_dotenv

# Lade .env Datei
load_dotenv(override=True)

_PROJECT_ROOT = os.path.join(os.path.dirname(__file__), "..", "..")

# ============================================================================
# LOGGING
# ============================================================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", os.path.join(_PROJECT_ROOT, "logs", "netrobust.log"))

# ============================================================================
# AUSGABE
# ============================================================================

# Standardverzeichnis für Experiment-CSVs
RESULTS_DIR = os.getenv("RESULTS_DIR", os.path.join(_PROJECT_ROOT, "results"))

# Gleitkommaformat für alle CSV-Ausgaben (byte-identische Wiederholungen)
CSV_FLOAT_FORMAT = os.getenv("CSV_FLOAT_FORMAT", "%.12g")

# ============================================================================
# NUMERIK
# ============================================================================

# Toleranz für |K(lambda) - C| beim Entropic Tilting
TILT_TOL = float(os.getenv("TILT_TOL", "1e-10"))

# Chernoff-Supremum: Gitter + Goldener Schnitt
CHERNOFF_GRID_SIZE = int(os.getenv("CHERNOFF_GRID_SIZE", "201"))
GOLDEN_TOL = float(os.getenv("GOLDEN_TOL", "1e-10"))

# Power Iteration
POWER_ITER_TOL = float(os.getenv("POWER_ITER_TOL", "1e-8"))
POWER_ITER_MAX = int(os.getenv("POWER_ITER_MAX", "10000"))

# Small-World Referenzgraphen
SMALL_WORLD_REF_SEEDS = int(os.getenv("SMALL_WORLD_REF_SEEDS", "20"))

# Clamping nur in endlichen-n Produkten, nie in geschlossenen Formeln
PROB_FLOOR = float(os.getenv("PROB_FLOOR", "1e-300"))
PROB_CEIL = 1.0 - float(os.getenv("PROB_CEIL_GAP", "1e-16"))

# Trunkierte Gamma-Posterior: minimale Akzeptanzrate
MIN_TRUNCATION_ACCEPTANCE = float(os.getenv("MIN_TRUNCATION_ACCEPTANCE", "1e-3"))

# Sensitivitätskurven: erlaubter Rückgang von rho_rob(C) relativ zu max(1, max|L|)
CURVE_MONOTONE_TOL = float(os.getenv("CURVE_MONOTONE_TOL", "1e-9"))

# Mirror Descent
MIRROR_ITERS = int(os.getenv("MIRROR_ITERS", "2000"))
MIRROR_STEP_SCALE = float(os.getenv("MIRROR_STEP_SCALE", "0.5"))  # step = scale / max|L - L_bar|

# Graphon-Ketten: Randabstand für Blockwahrscheinlichkeiten
GRAPHON_CLAMP_EPS = float(os.getenv("GRAPHON_CLAMP_EPS", "1e-9"))

# ============================================================================
# EXPERIMENTE
# ============================================================================

DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "20240601"))
DEFAULT_THREADS = int(os.getenv("DEFAULT_THREADS", "1"))

# Experiment A: ER vs. SBM nahe der Detektionsschwelle
EXP_A_N = int(os.getenv("EXP_A_N", "400"))
EXP_A_C = float(os.getenv("EXP_A_C", "3.0"))
EXP_A_LAMBDA = float(os.getenv("EXP_A_LAMBDA", "0.4"))
EXP_A_REPS = int(os.getenv("EXP_A_REPS", "1000"))

# Experiment B: Konfigurationsmodell-Suszeptibilität
EXP_B_N = int(os.getenv("EXP_B_N", "2000"))
EXP_B_DELTAS = [float(d) for d in os.getenv("EXP_B_DELTAS", "0.40,0.30,0.25,0.20,0.17,0.15").split(",")]
EXP_B_REPS = int(os.getenv("EXP_B_REPS", "100"))
EXP_B_POST_DRAWS = int(os.getenv("EXP_B_POST_DRAWS", "2000"))
EXP_B_C_SLOPE = float(os.getenv("EXP_B_C_SLOPE", "1e-3"))
EXP_B_CURVE_DELTA = float(os.getenv("EXP_B_CURVE_DELTA", "0.2"))
EXP_B_PRIOR_SHAPE = float(os.getenv("EXP_B_PRIOR_SHAPE", "1.0"))
EXP_B_PRIOR_RATE = float(os.getenv("EXP_B_PRIOR_RATE", "1.0"))

# Experiment D: Radiuspfade und Fehlerexponenten
EXP_D_N_GRID = [int(v) for v in os.getenv("EXP_D_N_GRID", "400,800,1600,3200,6400").split(",")]
EXP_D_C = float(os.getenv("EXP_D_C", "3.0"))
EXP_D_LAMBDA = float(os.getenv("EXP_D_LAMBDA", "0.2"))
EXP_D_REPS = int(os.getenv("EXP_D_REPS", "2000"))

# Radiengitter (logarithmisch)
RADIUS_GRID_MIN = float(os.getenv("RADIUS_GRID_MIN", "1e-4"))
RADIUS_GRID_MAX_A = float(os.getenv("RADIUS_GRID_MAX_A", "1e-2"))
RADIUS_GRID_MAX_B = float(os.getenv("RADIUS_GRID_MAX_B", "1e-1"))
RADIUS_GRID_POINTS = int(os.getenv("RADIUS_GRID_POINTS", "9"))

# ============================================================================
# PUSHOVER BENACHRICHTIGUNGEN
# ============================================================================

# Pushover API Credentials (https://pushover.net/) - optional, für lange Läufe
PUSHOVER_USER_KEY = os.getenv("PUSHOVER_USER_KEY", "")
PUSHOVER_API_TOKEN = os.getenv("PUSHOVER_API_TOKEN", "")
PUSHOVER_PRIORITY = int(os.getenv("PUSHOVER_PRIORITY", "0"))  # -2=lowest, -1=low, 0=normal, 1=high, 2=emergency
PUSHOVER_SOUND = os.getenv("PUSHOVER_SOUND", "pushover")

# Benachrichtigung erst ab dieser Laufzeit (Sekunden)
NOTIFY_MIN_RUNTIME = float(os.getenv("NOTIFY_MIN_RUNTIME", "60"))

# ============================================================================
# GRAPHON-NACHBARSCHAFTEN
# ============================================================================

# Dirichlet-Konzentration der Perturbationsvorschläge und Rescaling-Breite
GRAPHON_CONCENTRATION = float(os.getenv("GRAPHON_CONCENTRATION", "200"))
GRAPHON_RHO = float(os.getenv("GRAPHON_RHO", "0.1"))
GRAPHON_N = int(os.getenv("GRAPHON_N", "100"))
