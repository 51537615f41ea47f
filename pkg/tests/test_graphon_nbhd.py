import logging
import math

import numpy as np
import pandas as pd
import pytest
from scipy.special import rel_entr

from netrobust.core.errors import ParameterError
from netrobust.core.graph_models import StepGraphon
from netrobust.core.graphon_nbhd import (
    GraphonBall, continuum_kl, dirichlet_expected_kl, graphon_cells, graphon_from_cells,
    graphon_kl_mc, perturb_step, proposal_alpha, rescale_step, run_chain,
)
from netrobust.core.info_indices import bernoulli_kl
from netrobust.utils.rng import make_rng


@pytest.fixture
def center():
    return StepGraphon([0.5, 0.5], [[0.3, 0.1], [0.1, 0.2]])


@pytest.fixture
def ball(center):
    return GraphonBall(center, radius=5.0, n=50)


# ============================================================================
# GRAPHON-KL
# ============================================================================

def test_continuum_kl_identity_and_quarter_sum(center):
    assert continuum_kl(center, center) == 0.0
    W = center.with_matrix([[0.35, 0.1], [0.1, 0.25]])
    expected = 0.25 * (bernoulli_kl(0.35, 0.3) + bernoulli_kl(0.25, 0.2))
    assert continuum_kl(W, center) == pytest.approx(expected, rel=1e-12)


def test_partitions_must_agree(center):
    other = StepGraphon([0.3, 0.7], center.B)
    with pytest.raises(ParameterError):
        continuum_kl(other, center)


def test_mc_single_block_is_exact():
    estimate = graphon_kl_mc(StepGraphon.constant(0.4), StepGraphon.constant(0.5), n=10, mc_reps=20, seed=1)
    assert estimate.estimate == pytest.approx(45 * bernoulli_kl(0.4, 0.5), rel=1e-12)
    assert estimate.std_error == pytest.approx(0.0, abs=1e-12)


def test_mc_two_blocks_matches_continuum(center):
    W = center.with_matrix([[0.25, 0.15], [0.15, 0.2]])
    n = 40
    estimate = graphon_kl_mc(W, center, n=n, mc_reps=2000, seed=7)
    expected = math.comb(n, 2) * continuum_kl(W, center)
    assert abs(estimate.estimate - expected) < 4 * estimate.std_error
    assert estimate.continuum == pytest.approx(continuum_kl(W, center))


def test_mc_infinite_divergence():
    W = StepGraphon.constant(0.5)
    Wstar = StepGraphon.constant(0.0)
    assert graphon_kl_mc(W, Wstar, n=5, mc_reps=3, seed=0).estimate == float("inf")
    assert continuum_kl(W, Wstar) == float("inf")


# ============================================================================
# DIRICHLET-PERTURBATION
# ============================================================================

def test_dirichlet_expected_kl_value():
    assert dirichlet_expected_kl(np.full(4, 0.25), 100.0) == pytest.approx(0.014874, abs=1e-5)


@pytest.mark.parametrize("alpha", [50.0, 100.0, 400.0])
def test_dirichlet_asymptotic(alpha):
    pstar = np.array([0.1, 0.2, 0.3, 0.4])
    value = dirichlet_expected_kl(pstar, alpha)
    assert abs(value - (pstar.size - 1) / (2 * alpha)) <= 5 / alpha ** 2


def test_dirichlet_matches_monte_carlo():
    pstar = np.array([0.2, 0.5, 0.3])
    alpha = 30.0
    draws = make_rng(11).dirichlet(alpha * pstar, size=20000)
    kl = rel_entr(draws, pstar[None, :]).sum(axis=1)
    se = kl.std() / math.sqrt(kl.size)
    assert abs(kl.mean() - dirichlet_expected_kl(pstar, alpha)) < 4 * se


def test_dirichlet_rejects_zero_cells():
    with pytest.raises(ParameterError):
        dirichlet_expected_kl([0.0, 1.0], 10.0)
    with pytest.raises(ParameterError):
        dirichlet_expected_kl([0.5, 0.5], 0.0)


# ============================================================================
# BALL UND ZÜGE
# ============================================================================

def test_cells_round_trip_keep_symmetry(center):
    cells = graphon_cells(center)
    assert cells.tolist() == [0.3, 0.1, 0.2]
    rebuilt = graphon_from_cells(center, np.array([0.4, 0.05, 0.1]))
    assert np.array_equal(rebuilt.B, rebuilt.B.T)
    assert rebuilt.B[1, 0] == 0.05


def test_ball_basics(ball, center):
    assert ball.scale == pytest.approx(0.6)
    assert ball.admits(center)
    far = center.with_matrix([[0.9, 0.1], [0.1, 0.2]])
    assert not ball.admits(far)
    assert ball.kl_to_center(far) == pytest.approx(1225 * continuum_kl(far, center))
    with pytest.raises(ParameterError):
        GraphonBall(center, radius=0.0, n=50)
    with pytest.raises(ParameterError):
        GraphonBall(StepGraphon.constant(1.0), radius=1.0, n=50)


def test_perturb_step_acceptance(center):
    alpha = proposal_alpha(center, 200.0)
    assert alpha.sum() == pytest.approx(200.0)
    wide = GraphonBall(center, radius=1e9, n=50)
    state, accepted = perturb_step(center, wide, alpha, seed=3)
    assert accepted
    assert graphon_cells(state).sum() == pytest.approx(0.6)

    tight = GraphonBall(center, radius=1e-12, n=50)
    state, accepted = perturb_step(center, tight, alpha, seed=3)
    assert not accepted
    assert state is center

    with pytest.raises(ParameterError):
        perturb_step(center, wide, alpha[:2], seed=3)


def test_rescale_with_zero_rho_keeps_state(ball, center):
    for seed in range(10):
        state, accepted = rescale_step(center, ball, 0.0, seed)
        assert accepted
        assert np.allclose(state.B, center.B)
    with pytest.raises(ParameterError):
        rescale_step(center, ball, 1.0, 0)


# ============================================================================
# KETTE
# ============================================================================

def test_chain_stays_in_ball(ball):
    trace = run_chain(ball, moves=300, seed=5)
    assert isinstance(trace, pd.DataFrame)
    assert list(trace.columns) == ["step", "move", "accepted", "kl_to_center", "b_0_0", "b_0_1", "b_1_1"]
    cells = trace[["b_0_0", "b_0_1", "b_1_1"]].to_numpy()
    assert np.all((cells > 0) & (cells < 1))
    assert (trace["kl_to_center"] <= ball.radius + 1e-12).all()
    assert set(trace["move"]) == {"perturb", "rescale", "hold"}
    assert trace["accepted"].any()


def test_chain_hold_moves_are_not_counted_as_accepted(ball, caplog):
    with caplog.at_level(logging.INFO):
        trace = run_chain(ball, moves=400, seed=8)
    holds = trace[trace["move"] == "hold"]
    assert len(holds) > 0
    assert not holds["accepted"].any()
    cells = trace[["b_0_0", "b_0_1", "b_1_1"]].to_numpy()
    # ein hold-Zug lässt den Zustand unverändert
    previous = np.vstack([graphon_cells(ball.center), cells[:-1]])
    assert np.array_equal(cells[holds.index], previous[holds.index])
    proposed = trace[trace["move"] != "hold"]
    assert f"Akzeptanzrate {proposed['accepted'].mean():.3f}" in caplog.text


def test_rescale_clamping_keeps_cells_inside_unit_interval(center):
    wide = GraphonBall(center, radius=1e6, n=50)
    trace = run_chain(wide, moves=10_000, seed=21, rho=0.9)
    cells = trace[["b_0_0", "b_0_1", "b_1_1"]].to_numpy()
    assert np.all((cells > 0) & (cells < 1))
    assert (trace["kl_to_center"] <= wide.radius).all()


def test_chain_is_deterministic(ball):
    pd.testing.assert_frame_equal(run_chain(ball, 100, seed=9), run_chain(ball, 100, seed=9))


def test_chain_rejects_start_outside_ball(ball, center):
    outside = center.with_matrix([[0.9, 0.1], [0.1, 0.2]])
    with pytest.raises(ParameterError):
        run_chain(ball, 10, seed=0, start=outside)


@pytest.mark.slow
def test_dirichlet_large_monte_carlo_oracle():
    pstar = np.full(4, 0.25)
    draws = make_rng(2024).dirichlet(100.0 * pstar, size=1_000_000)
    kl = rel_entr(draws, pstar[None, :]).sum(axis=1)
    se = kl.std() / math.sqrt(kl.size)
    assert abs(kl.mean() - dirichlet_expected_kl(pstar, 100.0)) < 3 * se


@pytest.mark.slow
@pytest.mark.parametrize("target_cells", [
    [0.22, 0.16, 0.22],  # gleiche Zellsumme, andere Form
    [0.39, 0.13, 0.26],  # 1.3 × Zentrum, nur über Rescaling erreichbar
])
def test_chain_reaches_target_neighbourhood(center, target_cells):
    ball = GraphonBall(center, radius=30.0, n=50)
    target = graphon_from_cells(center, np.array(target_cells))
    assert ball.admits(target)
    trace = run_chain(ball, moves=100_000, seed=2024, rho=0.3)
    cells = trace[["b_0_0", "b_0_1", "b_1_1"]].to_numpy()
    assert np.all((cells > 0) & (cells < 1))
    distance = np.abs(cells - np.array(target_cells)).max(axis=1)
    assert distance.min() <= 0.05
