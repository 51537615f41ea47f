#!/usr/bin/env python3
"""
System-Test für netrobust
Prüft Sampler, Kennzahlen, Indizes, Tilting und ein Mini-Experiment
"""

import logging

from netrobust.core.graph_models import LabelledSbmParams, sample_two_block_sbm
from netrobust.core.info_indices import info_index_report
from netrobust.core.metrics import metric_report
from netrobust.core.posteriors import WeightedSample
from netrobust.core.robustify import kl_tilt_solve, two_point_robust_error
from netrobust.experiments.runner import run_experiment_a

logging.basicConfig(level=logging.WARNING)


def main():
    print('=== SYSTEM TEST ===')
    print()

    # Test 1: Sampler und Kennzahlen
    print('1. Sampler und Kennzahlen...')
    try:
        g = sample_two_block_sbm(LabelledSbmParams(400, 3.0, 0.4), seed=1)
        row = metric_report(g, reference_seeds=range(3))
        print(f'   [OK] SBM: n={row["n"]}, m={row["m"]}')
        print(f'   Clustering={row["C"]:.4f}, lambda1={row["lambda1"]:.3f}, LCC={row["lcc_size"]}')
    except Exception as e:
        print(f'   [FEHLER] Sampler/Kennzahlen: {e}')

    print()

    # Test 2: Informationsindizes
    print('2. Informationsindizes...')
    try:
        report = info_index_report(3.0, 0.4, n=400)
        print(f'   [OK] I={report.I_exact:.6f} (≈{report.I_smallsignal:.6f})')
        print(f'   [OK] J={report.J_exact:.6f} (≈{report.J_smallsignal:.6f}), t*={report.t_star:.4f}')
    except Exception as e:
        print(f'   [FEHLER] Indizes: {e}')

    print()

    # Test 3: Robustes Risiko
    print('3. Entropic Tilting...')
    try:
        sample = WeightedSample([0.0, 1.0], [0.5, 0.5], losses=[0.0, 1.0])
        solution = kl_tilt_solve(sample, 0.01)
        print(f'   [OK] rho_rob(0.01)={solution.robust_risk:.6f}, lambda*={solution.lambda_star:.4f}')
        print(f'   [OK] e_rob(0.1, 0.01)={two_point_robust_error(0.1, 0.01):.6f}')
    except Exception as e:
        print(f'   [FEHLER] Tilting: {e}')

    print()

    # Test 4: Mini-Experiment
    print('4. Mini-Experiment A...')
    try:
        result = run_experiment_a(n=100, c=3.0, lam=0.4, n_reps=20, radii=[1e-3, 1e-2], seed=7, threads=1)
        print(f'   [OK] {len(result.rows)} Zeilen, Config-Hash {result.config_hash[:12]}...')
    except Exception as e:
        print(f'   [FEHLER] Experiment: {e}')

    print()
    print('=== TEST ABGESCHLOSSEN ===')
    print('Volle Läufe: ./start_experiments.sh')


if __name__ == "__main__":
    main()
