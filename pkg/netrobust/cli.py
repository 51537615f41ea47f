"""
Kommandozeile: Kennzahlen, Indizes, Tilting, Mirror Descent, Graphon-Kette,
Sampler, BIC-Modellwahl und die Experimente A/B/D.

Ergebnisse gehen als CSV (mit Config-Hash-Kopfzeile) nach stdout oder --out,
Logging nach stderr bzw. LOG_FILE.
"""

import argparse
import logging
import sys
import time
from typing import List, Optional, Tuple

import pandas as pd

from .config.settings import (
    DEFAULT_SEED, DEFAULT_THREADS, GRAPHON_CONCENTRATION, GRAPHON_N, GRAPHON_RHO,
    MIRROR_ITERS, NOTIFY_MIN_RUNTIME, SMALL_WORLD_REF_SEEDS, TILT_TOL,
)
from .core.errors import NetRobustError, ParameterError
from .core.graph_models import (
    DegreeModel, LabelledSbmParams, SparseErParams,
    sample_configuration_model, sample_graphon, sample_sparse_er, sample_two_block_sbm,
)
from .core.graphon_nbhd import GraphonBall, run_chain
from .core.info_indices import info_index_report
from .core.metrics import metric_report
from .core.posteriors import WeightedSample, robust_model_selection, tempered_bic_weights
from .core.robustify import (
    BallKind, Normalization, PhiBall, kl_tilt_solve, mirror_descent_adversary, sensitivity_curve,
)
from .data.storage import (
    load_json_config, read_edge_list, read_step_graphon, read_weighted_sample,
    write_edge_list, write_result_csv, write_weighted_sample,
)
from .experiments.runner import run_from_config
from .notifications import PushoverNotifier
from .utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

Result = Tuple[Optional[pd.DataFrame], dict]


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Kommagetrennte Zahlen erwartet: {text}")


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def _cmd_metrics(args) -> Result:
    g = read_edge_list(args.edges)
    seeds = list(range(args.ref_seeds))
    row = metric_report(g, reference_seeds=seeds)
    config = {"command": "metrics", "edges": args.edges, "ref_seeds": args.ref_seeds}
    return pd.DataFrame([row]), config


def _cmd_indices(args) -> Result:
    report = info_index_report(args.c, args.lam, args.n)
    config = {"command": "indices", "c": args.c, "lambda": args.lam, "n": args.n}
    return pd.DataFrame([report.to_row()]), config


def _cmd_tilt(args) -> Result:
    sample = read_weighted_sample(args.sample)
    config = {"command": "tilt", "sample": args.sample, "tol": args.tol}

    if args.radii is not None:
        normalization = Normalization(args.normalization)
        curve = sensitivity_curve(sample, args.radii, normalization, args.tol)
        if args.weights_out:
            logger.warning("[WARNUNG] --weights-out gilt nur mit --radius - ignoriert")
        config.update({"radii": list(args.radii), "normalization": normalization.value})
        return curve.to_frame(), config

    solution = kl_tilt_solve(sample, args.radius, args.tol)
    config["radius"] = args.radius
    if args.weights_out:
        write_weighted_sample(
            WeightedSample.from_unnormalized(sample.atoms, solution.tilted_weights, sample.losses), args.weights_out
        )
    return pd.DataFrame([solution.to_row()]), config


def _cmd_mirror(args) -> Result:
    sample = read_weighted_sample(args.sample)
    ball = PhiBall(BallKind(args.ball), args.radius)
    solution = mirror_descent_adversary(sample, ball, step=args.step, iters=args.iters)
    config = {"command": "mirror", "sample": args.sample, "ball": args.ball,
              "radius": args.radius, "step": args.step, "iters": args.iters}
    return pd.DataFrame([solution.to_row()]), config


def _cmd_graphon(args) -> Result:
    center = read_step_graphon(args.center_file)
    ball = GraphonBall(center, args.radius, args.n)
    trace = run_chain(ball, args.moves, args.seed, concentration=args.concentration, rho=args.rho)
    config = {"command": "graphon", "center": center.to_dict(), "radius": args.radius, "n": args.n,
              "moves": args.moves, "seed": args.seed, "concentration": args.concentration, "rho": args.rho}
    return trace, config


def _cmd_sample(args) -> Result:
    if args.model == "er":
        g = sample_sparse_er(SparseErParams(args.n, args.c), args.seed)
    elif args.model == "sbm":
        g = sample_two_block_sbm(LabelledSbmParams(args.n, args.c, args.lam), args.seed)
    elif args.model == "graphon":
        if not args.graphon_file:
            raise ParameterError("--graphon-file ist für model=graphon erforderlich")
        g, _ = sample_graphon(args.n, read_step_graphon(args.graphon_file), args.seed)
    else:
        if args.degree_probs:
            deg = DegreeModel.explicit(args.degree_probs)
        else:
            deg = DegreeModel.poisson(args.mean)
        g = sample_configuration_model(args.n, deg, args.seed)

    write_edge_list(g, args.out)
    return None, {}


def _cmd_bic(args) -> Result:
    weights = tempered_bic_weights(args.bics, args.tau)
    selection = robust_model_selection(weights)
    row = {
        "w0": selection.weights[0],
        "w1": selection.weights[1],
        "action": selection.action,
        "e0": selection.e0,
        "switching_radius": selection.switching_radius,
    }
    return pd.DataFrame([row]), {"command": "bic", "bics": list(args.bics), "tau": args.tau}


def _cmd_experiment(args) -> Result:
    config = load_json_config(args.config)
    result = run_from_config(args.name, config, args.seed, args.threads)
    return result.rows, result.config_echo


COMMANDS = {
    "metrics": _cmd_metrics,
    "indices": _cmd_indices,
    "tilt": _cmd_tilt,
    "mirror": _cmd_mirror,
    "graphon": _cmd_graphon,
    "sample": _cmd_sample,
    "bic": _cmd_bic,
    "experiment": _cmd_experiment,
}


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netrobust",
        description="Robuste Bayes-Analyse für Zufallsgraphen",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR (Standard: LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="Kennzahlen einer Edge-Liste")
    p.add_argument("edges", help="Edge-Liste (Kopfzeile 'n m')")
    p.add_argument("--ref-seeds", type=int, default=SMALL_WORLD_REF_SEEDS,
                   help="Anzahl ER-Referenzgraphen für den Small-World-Index")
    p.add_argument("--out", default=None)

    p = sub.add_parser("indices", help="Informationsindizes I(λ), J(λ)")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="optional: endliche-n Werte D_n/n, C_n/n")
    p.add_argument("--out", default=None)

    p = sub.add_parser("tilt", help="Entropic Tilting einer gewichteten Stichprobe")
    p.add_argument("sample", help="CSV mit atom, weight, loss")
    radius = p.add_mutually_exclusive_group(required=True)
    radius.add_argument("--radius", type=float)
    radius.add_argument("--radii", type=_float_list, help="kommagetrennt, streng steigend")
    p.add_argument("--tol", type=float, default=TILT_TOL)
    p.add_argument("--normalization", choices=[v.value for v in Normalization], default="rho")
    p.add_argument("--weights-out", default=None, help="ungünstigste Gewichte als CSV (nur mit --radius)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("mirror", help="Mirror-Descent-Gegenspieler")
    p.add_argument("sample", help="CSV mit atom, weight, loss")
    p.add_argument("--ball", choices=[v.value for v in BallKind], default="kl")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--iters", type=int, default=MIRROR_ITERS)
    p.add_argument("--out", default=None)

    p = sub.add_parser("graphon", help="Kette im KL-Ball um ein Schrittgraphon")
    p.add_argument("--center-file", required=True, help="JSON mit K, pi, B")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--moves", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n", type=int, default=GRAPHON_N)
    p.add_argument("--concentration", type=float, default=GRAPHON_CONCENTRATION)
    p.add_argument("--rho", type=float, default=GRAPHON_RHO)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sample", help="Graph ziehen und als Edge-Liste speichern")
    p.add_argument("model", choices=["er", "sbm", "graphon", "cm"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=3.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--graphon-file", default=None)
    p.add_argument("--mean", type=float, default=1.0, help="Poisson-Mittel für model=cm")
    p.add_argument("--degree-probs", type=_float_list, default=None, help="explizite Gradverteilung für model=cm")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bic", help="Getemperte BIC-Gewichte und robuste Zwei-Modell-Entscheidung")
    p.add_argument("--bics", type=_float_list, required=True, help="zwei BIC-Werte, kommagetrennt")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("experiment", help="Experimente A, B, D")
    p.add_argument("name", choices=["a", "b", "d"])
    p.add_argument("--config", default=None, help="JSON-Konfiguration")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    p.add_argument("--out", default=None)

    return parser


# ============================================================================
# EINSTIEG
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """Hauptfunktion. Exit-Codes: 0 ok, 1 unerwarteter Fehler, 2 Parameter-/Numerikfehler."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    label = args.name if args.command == "experiment" else args.command
    start = time.time()
    try:
        frame, config = COMMANDS[args.command](args)
        if frame is not None:
            write_result_csv(frame, config, args.out)
    except NetRobustError as e:
        logger.error(f"[FEHLER] {e}")
        _alert_if_long(label, start, str(e))
        return 2
    except Exception as e:
        logger.error(f"[FEHLER] Kritischer Fehler: {e}", exc_info=True)
        _alert_if_long(label, start, f"Kritischer Fehler: {e}")
        return 1

    runtime = time.time() - start
    if runtime >= NOTIFY_MIN_RUNTIME:
        PushoverNotifier().send_experiment_finished(
            label, runtime, 0 if frame is None else len(frame), args.out
        )
    return 0


def _alert_if_long(label: str, start: float, message: str):
    if time.time() - start >= NOTIFY_MIN_RUNTIME:
        PushoverNotifier().send_alert(f"[FEHLER] {label} abgebrochen", message, priority=1)


if __name__ == "__main__":
    sys.exit(main())
