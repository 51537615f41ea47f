import logging
import math

import numpy as np
import pytest

from netrobust.core.errors import DegenerateRiskError, ParameterError, TruncationDegenerateError
from netrobust.core.graph_models import DegreeModel, sample_configuration_model
from netrobust.core.info_indices import chernoff_J
from netrobust.core.metrics import empirical_susceptibility
from netrobust.core.posteriors import WeightedSample
from netrobust.core.robustify import kl_tilt_solve, two_point_robust_error
from netrobust.experiments import runner
from netrobust.experiments.calibration import (
    calibrate_radius, fit_loglog_slope, heuristic_radius, posterior_risk_profile,
)
from netrobust.experiments.radius_paths import PathKind, RadiusPath
from netrobust.experiments.runner import (
    COLUMNS_A, COLUMNS_B, COLUMNS_D, log_radius_grid, run_experiment_a, run_experiment_b,
    run_experiment_d, run_from_config,
)
from netrobust.utils.rng import make_rng


# ============================================================================
# RADIUSPFADE
# ============================================================================

def test_radius_paths():
    assert RadiusPath.polynomial(2.0).radius(4) == pytest.approx(0.5)
    assert RadiusPath.constant(0.01).radius(10_000) == 0.01
    assert RadiusPath.linear_grow(1.5).radius(10) == pytest.approx(15.0)
    assert RadiusPath.exp_shrink(0.01).radius(100) == pytest.approx(math.exp(-2.0))


def test_exp_shrink_needs_resolution():
    path = RadiusPath.exp_shrink()
    with pytest.raises(ParameterError):
        path.radius(10)
    resolved = path.resolve(0.003)
    assert resolved.param == 0.003
    assert RadiusPath.exp_shrink(0.5).resolve(0.003).param == 0.5


def test_radius_path_dicts():
    path = RadiusPath.polynomial(3.0)
    assert path.to_dict() == {"kind": "polynomial", "kappa": 3.0}
    assert RadiusPath.from_dict(path.to_dict()) == path
    assert RadiusPath.from_dict({"kind": "exp_shrink"}).kind is PathKind.EXP_SHRINK
    with pytest.raises(ParameterError):
        RadiusPath.from_dict({"kind": "spiral", "x": 1})
    with pytest.raises(ParameterError):
        RadiusPath.constant(0.0)
    with pytest.raises(ParameterError):
        RadiusPath(PathKind.LINEAR_GROW)


# ============================================================================
# KALIBRIERUNG
# ============================================================================

def test_fit_loglog_slope():
    x = np.array([0.5, 1.0, 2.0, 3.0])
    fit = fit_loglog_slope(x, 2.0 * x + 1.0)
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        fit_loglog_slope([1.0], [1.0])
    with pytest.raises(ParameterError):
        fit_loglog_slope([1.0, 1.0], [1.0, 2.0])


def test_heuristic_radius():
    assert heuristic_radius(0.2) == pytest.approx(0.01)
    with pytest.raises(ParameterError):
        heuristic_radius(1.5)


def test_calibrate_radius_hits_target_inflation():
    rng = make_rng(4)
    sample = WeightedSample.uniform(np.arange(300.0), losses=rng.exponential(size=300))
    radius = calibrate_radius(sample, 0.2)
    ratio = kl_tilt_solve(sample, radius).robust_risk / sample.baseline_risk
    assert 1.19 <= ratio <= 1.21


def test_calibrate_radius_degenerate():
    constant = WeightedSample.uniform([0.0, 1.0], losses=[2.0, 2.0])
    with pytest.raises(DegenerateRiskError):
        calibrate_radius(constant, 0.2)
    # Ziel 1.2·0.9 liegt über max L = 1
    skewed = WeightedSample([0.0, 1.0], [0.1, 0.9], losses=[0.0, 1.0])
    with pytest.raises(DegenerateRiskError):
        calibrate_radius(skewed, 0.2)


def test_posterior_risk_profile(coin_sample):
    profile = posterior_risk_profile(coin_sample, [0.01, 0.1], 0.1)
    assert profile.baseline_risk == pytest.approx(0.5)
    assert profile.robust_risks[1] == pytest.approx(0.7199, abs=1e-3)
    assert profile.robust_at_slope == pytest.approx(profile.robust_risks[1])


# ============================================================================
# EXPERIMENT A
# ============================================================================

def test_log_radius_grid():
    grid = log_radius_grid(1e-4, 1e-2, 3)
    assert grid == pytest.approx([1e-4, 1e-3, 1e-2])
    with pytest.raises(ParameterError):
        log_radius_grid(1e-2, 1e-4, 3)


def test_experiment_a_without_signal_is_a_coin_flip():
    radii = [1e-4, 1e-3, 1e-2]
    result = run_experiment_a(n=40, c=3.0, lam=0.0, n_reps=6, radii=radii, seed=1, threads=1)
    rows = result.rows
    assert list(rows.columns) == COLUMNS_A
    assert rows["R0"].to_numpy() == pytest.approx(0.5, abs=1e-12)
    expected = [two_point_robust_error(0.5, C) for C in radii]
    assert rows["Rrob"].tolist() == pytest.approx(expected, abs=1e-12)
    normalized = (np.array(expected) - 0.5) / (math.sqrt(0.5) * np.sqrt(radii))
    assert rows["normalized"].to_numpy() == pytest.approx(normalized)
    assert rows["normalized_per_replicate"].to_numpy() == pytest.approx(normalized)


def test_experiment_a_is_symmetric_in_hypothesis_labels():
    kwargs = dict(n=40, c=3.0, lam=0.0, n_reps=6, radii=[1e-4, 1e-3, 1e-2], seed=5, threads=1)
    plain = run_experiment_a(**kwargs)
    swapped = run_experiment_a(swap_hypotheses=True, **kwargs)
    assert swapped.rows["normalized"].to_numpy() == pytest.approx(plain.rows["normalized"].to_numpy(), abs=1e-12)
    assert swapped.rows["Rrob"].to_numpy() == pytest.approx(plain.rows["Rrob"].to_numpy(), abs=1e-12)
    assert swapped.config_hash != plain.config_hash


def test_swapped_replicate_keeps_misclassification_risk():
    # gleicher Graph, vertauschte Rollen: e0 und robuste Fehler bleiben gleich
    radii = (1e-3, 1e-2)
    sbm_as_h1 = runner._two_point_replicate((60, 3.0, 1.5, 7, 3, 1, radii, False))
    sbm_as_h0 = runner._two_point_replicate((60, 3.0, 1.5, 7, 3, 0, radii, True))
    assert sbm_as_h0[0] == pytest.approx(sbm_as_h1[0], abs=1e-15)
    assert sbm_as_h0[1] == pytest.approx(sbm_as_h1[1], abs=1e-12)


def test_experiment_a_is_deterministic_across_workers():
    kwargs = dict(n=60, c=3.0, lam=1.0, n_reps=8, radii=[1e-3, 1e-2], seed=17)
    serial = run_experiment_a(threads=1, **kwargs)
    parallel = run_experiment_a(threads=2, **kwargs)
    assert serial.rows.equals(parallel.rows)
    assert serial.config_hash == parallel.config_hash
    assert (serial.rows["Rrob"] >= serial.rows["R0"] - 1e-15).all()
    assert np.all(np.diff(serial.rows["Rrob"]) >= 0)


def test_experiment_a_rejects_bad_radii():
    with pytest.raises(ParameterError):
        run_experiment_a(n=40, c=3.0, lam=0.5, n_reps=2, radii=[1e-2, 1e-3], seed=0, threads=1)


# ============================================================================
# EXPERIMENT B
# ============================================================================

B_KWARGS = dict(n=2000, deltas=[0.2, 0.4], n_reps=3, n_post_draws=400, radii=[1e-3, 1e-2],
                C_slope=1e-3, seed=5, threads=1, curve_delta=0.2)


def test_experiment_b_small_run():
    rows = run_experiment_b(**B_KWARGS).rows
    assert list(rows.columns) == COLUMNS_B
    assert rows["section"].tolist() == ["curve", "curve", "delta", "delta", "slope_baseline", "slope_robust"]
    curve = rows[rows["section"] == "curve"]
    assert (curve["rho_rob"] > curve["rho0"]).all()
    assert (curve["n_ok"] == 3).all() and (curve["n_flagged"] == 0).all()
    # Varianz von R = 1/(1−θ) wächst mit kleinerem Delta
    delta = rows[rows["section"] == "delta"].set_index("delta")
    assert delta.loc[0.2, "rho0"] > delta.loc[0.4, "rho0"]
    slopes = rows[rows["section"].str.startswith("slope")]
    assert slopes["slope"].notna().all()


def test_experiment_b_flags_degenerate_replicates(monkeypatch, caplog):
    original = runner.poisson_mean_pseudo_posterior

    def flaky(g, shape, rate, draws, seed):
        if 2.0 * g.m / g.n < 0.7:
            raise TruncationDegenerateError("test", acceptance_rate=0.0)
        return original(g, shape, rate, draws, seed)

    monkeypatch.setattr(runner, "poisson_mean_pseudo_posterior", flaky)
    with caplog.at_level(logging.WARNING):
        rows = run_experiment_b(**B_KWARGS).rows
    flagged = rows[(rows["section"] == "delta") & (rows["delta"] == 0.4)].iloc[0]
    assert flagged["n_ok"] == 0 and flagged["n_flagged"] == 3
    assert rows[rows["section"].str.startswith("slope")]["slope"].isna().all()
    assert "keine Regression" in caplog.text


def test_experiment_b_fails_without_curve_replicates(monkeypatch):
    def always_degenerate(*args):
        raise TruncationDegenerateError("test")

    monkeypatch.setattr(runner, "poisson_mean_pseudo_posterior", always_degenerate)
    with pytest.raises(DegenerateRiskError):
        run_experiment_b(**B_KWARGS)


# ============================================================================
# EXPERIMENT D
# ============================================================================

def test_experiment_d_small_run():
    result = run_experiment_d([40, 80], c=3.0, lam=1.0, paths=runner.default_paths(), n_reps=6, seed=3, threads=1)
    rows = result.rows
    assert list(rows.columns) == COLUMNS_D
    assert len(rows) == 8
    grow = rows[rows["path"].str.startswith("linear_grow")]
    assert (grow["Rrob"] >= 0.99).all()
    live = rows[~rows["censored"]]
    assert (live["exponent_rob"] <= live["exponent_base"] + 1e-15).all()
    J, _ = chernoff_J(3.0, 1.0)
    assert result.config_echo["paths"][0] == {"kind": "exp_shrink", "alpha": J}


def test_experiment_d_rejects_unsorted_grid():
    with pytest.raises(ParameterError):
        run_experiment_d([80, 40], 3.0, 1.0, runner.default_paths(), 2, seed=0, threads=1)


# ============================================================================
# KONFIGURATION
# ============================================================================

def test_run_from_config_unknown_experiment():
    with pytest.raises(ParameterError):
        run_from_config("z", {}, seed=0)


def test_run_from_config_warns_and_ignores_threads(caplog):
    config = {"n": 40, "c": 3.0, "lambda": 0.5, "n_reps": 4, "radii": [1e-3, 1e-2], "bogus": 1}
    with caplog.at_level(logging.WARNING):
        one = run_from_config("A", config, seed=2, threads=1)
    assert "bogus" in caplog.text
    two = run_from_config("a", config, seed=2, threads=2)
    assert one.config_hash == two.config_hash
    assert "bogus" not in one.config_echo


def test_run_from_config_radius_grid_dict():
    config = {"n": 40, "c": 3.0, "lambda": 0.5, "n_reps": 2, "radii": {"min": 1e-4, "max": 1e-2, "points": 3}}
    result = run_from_config("a", config, seed=2, threads=1)
    assert result.rows["radius"].to_numpy() == pytest.approx([1e-4, 1e-3, 1e-2])


# ============================================================================
# DESK-SCALE-LÄUFE
# ============================================================================

@pytest.mark.slow
def test_desk_scale_experiment_a():
    radii = log_radius_grid(1e-4, 1e-2, 9)
    rows = run_experiment_a(n=400, c=3.0, lam=0.4, n_reps=1000, radii=radii, seed=2024, threads=8).rows
    values = rows["normalized"].to_numpy()
    assert np.all((values >= 3.0) & (values <= 5.0))
    assert values.max() / values.min() <= 1.4


@pytest.mark.slow
def test_desk_scale_experiment_b():
    rows = run_experiment_b(n=2000, deltas=[0.40, 0.30, 0.25, 0.20, 0.17, 0.15], n_reps=100,
                            n_post_draws=2000, radii=log_radius_grid(1e-4, 1e-2, 9), C_slope=1e-3,
                            seed=2024, threads=8, curve_delta=0.2).rows
    curve = rows[rows["section"] == "curve"]
    assert curve["normalized"].between(1.8, 3.2).all()
    slopes = rows[rows["section"].str.startswith("slope")]["slope"]
    assert slopes.between(3.0, 5.0).all()


@pytest.mark.slow
def test_full_scale_experiment_b_slopes():
    rows = run_experiment_b(n=5000, deltas=[0.40, 0.30, 0.25, 0.20, 0.17, 0.15], n_reps=100,
                            n_post_draws=2000, radii=log_radius_grid(1e-4, 1e-2, 5), C_slope=1e-3,
                            seed=2024, threads=8, curve_delta=0.2).rows
    slopes = rows.set_index("section")["slope"]
    assert 4.0 <= slopes["slope_baseline"] <= 5.0
    assert 4.15 <= slopes["slope_robust"] <= 5.15
    curve = rows[rows["section"] == "curve"]
    assert curve["normalized"].between(1.8, 3.2).all()


@pytest.mark.slow
def test_desk_scale_experiment_d():
    J, _ = chernoff_J(3.0, 0.2)
    paths = [RadiusPath.exp_shrink(J), RadiusPath.constant(0.01), RadiusPath.linear_grow(1.0)]
    n_grid = [400, 800, 1600, 3200, 6400]
    rows = run_experiment_d(n_grid, 3.0, 0.2, paths, n_reps=1000, seed=2024, threads=8).rows

    last = rows[(rows["n"] == 6400) & rows["path"].str.startswith("exp_shrink")].iloc[0]
    gap = abs(last["exponent_base"] - last["exponent_rob"]) / last["exponent_base"]
    assert gap < 0.05

    constant = rows[rows["path"].str.startswith("constant")].sort_values("n")
    assert np.all(np.diff(constant["exponent_rob"].to_numpy()) < 0)
    assert (rows[rows["path"].str.startswith("linear_grow")]["Rrob"] >= 0.99).all()


@pytest.mark.slow
def test_susceptibility_limit():
    values = [empirical_susceptibility(sample_configuration_model(5000, DegreeModel.poisson(0.8), seed=s))
              for s in range(200)]
    assert 4.5 <= np.mean(values) <= 5.5
