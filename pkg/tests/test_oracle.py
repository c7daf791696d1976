"""Tests for the exact posterior oracles."""

import numpy as np
import pytest

from aclfdr import (
    BudgetError,
    ConfigError,
    Observations,
    ParentChainSpec,
    ProbVector,
    TransitionMatrix,
    brute_force_posterior,
    forward_backward_posterior,
    gaussian_noise,
    iid_prior,
    project,
    sample_constrained_transition,
    sample_dirichlet_transition,
    sample_stationary_vector,
    simulate_chain,
)
from aclfdr.likelihood import NoiseModel


def _two_state_spec():
    pi = ProbVector(np.array([0.8, 0.2]))
    P = TransitionMatrix(np.array([[0.9, 0.1], [0.4, 0.6]]), stationary=pi)
    return ParentChainSpec(d=2, f_set=(0,), pi=pi, P=P, psig=0.2)


def _random_spec(rng, d, psig=None):
    psig = float(rng.uniform(0.1, 0.5)) if psig is None else psig
    f_set = tuple(range(max(1, d - 1 - int(rng.integers(0, d - 1)))))
    pi = sample_stationary_vector(d, f_set, psig, rng)
    samp = sample_constrained_transition(pi, 0.2, 0.0, rng)
    return ParentChainSpec(d=d, f_set=f_set, pi=pi, P=samp.matrix, psig=psig)


def _sitewise_bayes(x, eps, p):
    noise = gaussian_noise()
    w1 = p * np.exp(noise.h(x - eps))
    w0 = (1.0 - p) * np.exp(noise.h(x))
    return w1 / (w1 + w0)


def test_iid_prior_table():
    prior = iid_prior(2, 0.3)
    assert len(prior) == 4
    assert abs(prior[(0, 0)] - 0.49) < 1e-15
    assert abs(prior[(1, 0)] - 0.21) < 1e-15
    assert abs(prior[(1, 1)] - 0.09) < 1e-15
    assert abs(sum(prior.values()) - 1.0) < 1e-12
    with pytest.raises(ConfigError):
        iid_prior(2, 0.0)
    with pytest.raises(ConfigError):
        iid_prior(0, 0.3)
    with pytest.raises(BudgetError):
        iid_prior(21, 0.3)


def test_single_site_hand_value():
    noise = gaussian_noise()
    x = Observations(np.array([0.4]), 1.0)
    out = brute_force_posterior({(0,): 0.7, (1,): 0.3}, x, noise)
    w1 = 0.3 * np.exp(noise.h(0.4 - 1.0))
    w0 = 0.7 * np.exp(noise.h(0.4))
    assert abs(out.probs[0] - w1 / (w0 + w1)) < 1e-14
    assert abs(out.log_evidence - np.log(w0 + w1)) < 1e-12


def test_eps_zero_returns_prior_marginals():
    rng = np.random.default_rng(5)
    noise = gaussian_noise()
    x = Observations(rng.normal(size=5), 0.0)
    out = brute_force_posterior(iid_prior(5, 0.2), x, noise)
    assert np.max(np.abs(out.probs - 0.2)) < 1e-12
    spec = _two_state_spec()
    chain_out = forward_backward_posterior(spec, x, noise)
    assert np.max(np.abs(chain_out.probs - 0.2)) < 1e-12


def test_independent_prior_matches_sitewise_bayes():
    rng = np.random.default_rng(8)
    x = rng.normal(size=5) + 0.4
    obs = Observations(x, 0.7)
    out = brute_force_posterior(iid_prior(5, 0.2), obs, gaussian_noise())
    assert np.max(np.abs(out.probs - _sitewise_bayes(x, 0.7, 0.2))) < 1e-12


def test_rank_one_chain_matches_sitewise():
    rng = np.random.default_rng(13)
    pi = ProbVector(np.array([0.5, 0.3, 0.1, 0.1]))
    P = TransitionMatrix(np.tile(pi.entries, (4, 1)), stationary=pi)
    spec = ParentChainSpec(d=4, f_set=(0, 1), pi=pi, P=P, psig=0.2)
    x = rng.normal(size=7) + 0.3
    obs = Observations(x, 0.9)
    out = forward_backward_posterior(spec, obs, gaussian_noise())
    assert np.max(np.abs(out.probs - _sitewise_bayes(x, 0.9, 0.2))) < 1e-12


def test_forward_backward_matches_brute_force():
    rng = np.random.default_rng(99)
    noise = gaussian_noise()
    worst_p = worst_ev = 0.0
    for k in range(20):
        d = 2 + k % 3
        m = 3 + k % 6
        spec = _random_spec(rng, d)
        eta = project(simulate_chain(spec, m, rng), spec.f_set)
        eps = float(rng.uniform(0.2, 1.5))
        obs = Observations(eps * eta + rng.normal(size=m), eps)
        bf = brute_force_posterior(spec, obs, noise)
        fb = forward_backward_posterior(spec, obs, noise)
        worst_p = max(worst_p, float(np.max(np.abs(bf.probs - fb.probs))))
        worst_ev = max(worst_ev, abs(bf.log_evidence - fb.log_evidence))
    assert worst_p <= 1e-10
    assert worst_ev <= 1e-10


def test_posterior_invariant_to_density_shift():
    # adding a constant to the log density cancels in Bayes rule and
    # shifts the evidence by m times the constant
    rng = np.random.default_rng(21)
    spec = _two_state_spec()
    m = 6
    obs = Observations(rng.normal(size=m) + 0.5, 0.8)
    base = gaussian_noise()
    shifted = NoiseModel(
        kind="additive",
        h=lambda z: base.h(z) + 5.0,
        h1=base.h1,
        h2=base.h2,
    )
    out0 = forward_backward_posterior(spec, obs, base)
    out5 = forward_backward_posterior(spec, obs, shifted)
    assert np.max(np.abs(out0.probs - out5.probs)) < 1e-12
    assert abs(out5.log_evidence - out0.log_evidence - 5.0 * m) < 1e-9
    bf0 = brute_force_posterior(spec, obs, base)
    bf5 = brute_force_posterior(spec, obs, shifted)
    assert np.max(np.abs(bf0.probs - bf5.probs)) < 1e-12


def test_posterior_mean_matches_marginal_rate():
    # tower property: the average exact posterior equals the signal rate
    rng = np.random.default_rng(314)
    spec = _two_state_spec()
    noise = gaussian_noise()
    m, eps = 6, 0.8
    acc = []
    for _ in range(400):
        eta = project(simulate_chain(spec, m, rng), spec.f_set)
        obs = Observations(eps * eta + rng.normal(size=m), eps)
        acc.append(forward_backward_posterior(spec, obs, noise).probs)
    assert abs(float(np.mean(acc)) - spec.psig) < 0.03


def test_budget_errors():
    rng = np.random.default_rng(0)
    noise = gaussian_noise()
    with pytest.raises(BudgetError):
        brute_force_posterior(
            iid_prior(20, 0.2), Observations(rng.normal(size=21), 1.0), noise
        )
    spec = _two_state_spec()
    with pytest.raises(BudgetError):
        brute_force_posterior(spec, Observations(rng.normal(size=11), 1.0), noise)
    pi = ProbVector(np.full(8, 0.125))
    P = TransitionMatrix(np.tile(pi.entries, (8, 1)), stationary=pi)
    wide = ParentChainSpec(d=8, f_set=(0,), pi=pi, P=P, psig=0.875)
    with pytest.raises(BudgetError):
        brute_force_posterior(wide, Observations(rng.normal(size=8), 1.0), noise)


def test_mapping_prior_validation():
    noise = gaussian_noise()
    obs = Observations(np.array([0.1, 0.2]), 1.0)
    with pytest.raises(ConfigError):
        brute_force_posterior({(0, 0): 0.5, (1, 1): 0.4}, obs, noise)
    with pytest.raises(ConfigError):
        brute_force_posterior({(0,): 0.5, (1,): 0.5}, obs, noise)
    with pytest.raises(ConfigError):
        brute_force_posterior({(0, 2): 0.5, (1, 1): 0.5}, obs, noise)


def test_multiplicative_noise_oracles_agree():
    rng = np.random.default_rng(55)
    spec = _two_state_spec()
    noise = gaussian_noise(kind="multiplicative")
    m = 6
    for _ in range(5):
        eta = project(simulate_chain(spec, m, rng), spec.f_set)
        # multiplicative coupling scales the data instead of shifting it
        z = rng.normal(size=m)
        x = z * np.exp(-0.5 * eta)
        obs = Observations(x, 0.5)
        bf = brute_force_posterior(spec, obs, noise)
        fb = forward_backward_posterior(spec, obs, noise)
        assert np.max(np.abs(bf.probs - fb.probs)) <= 1e-10
        assert abs(bf.log_evidence - fb.log_evidence) <= 1e-10


def test_long_chain_stability():
    # forward-backward stays finite far beyond the enumeration budget
    rng = np.random.default_rng(2)
    spec = _two_state_spec()
    m = 5000
    eta = project(simulate_chain(spec, m, rng), spec.f_set)
    obs = Observations(2.0 * eta + rng.normal(size=m), 2.0)
    out = forward_backward_posterior(spec, obs, gaussian_noise())
    assert np.all(np.isfinite(out.probs))
    assert np.all((out.probs >= 0.0) & (out.probs <= 1.0))
    assert np.isfinite(out.log_evidence)
