"""Tests for stationary vectors, simplex-row draws, balancing, and spectra."""

import numpy as np
import pytest

from aclfdr import (
    ConfigError,
    ConstrainedSample,
    ConvergenceError,
    ProbVector,
    SamplingBudgetError,
    TransitionMatrix,
    eigenmoduli,
    sample_constrained_transition,
    sample_dirichlet_transition,
    sample_stationary_vector,
    sinkhorn_balance,
    to_transition,
)

from chains import REFERENCE_CHAINS


class _StubRng:
    """Feeds a fixed array through the standard_exponential interface."""

    def __init__(self, arr):
        self._arr = np.asarray(arr, dtype=np.float64)

    def standard_exponential(self, shape):
        assert tuple(shape) == self._arr.shape
        return self._arr.copy()


def test_prob_vector_validation():
    v = ProbVector(np.array([0.25, 0.75]))
    assert v.dim == 2
    assert not v.entries.flags.writeable
    with pytest.raises(ConfigError):
        ProbVector(np.array([0.5, 0.5, 0.1]))
    with pytest.raises(ConfigError):
        ProbVector(np.array([1.2, -0.2]))
    with pytest.raises(ConfigError):
        ProbVector(np.array([1.0, 0.0]))
    w = ProbVector.normalized([2.0, 6.0])
    assert np.allclose(w.entries, [0.25, 0.75])


def test_transition_matrix_validation():
    p = TransitionMatrix(np.array([[0.9, 0.1], [0.4, 0.6]]))
    assert p.dim == 2
    with pytest.raises(ConfigError):
        TransitionMatrix(np.array([[0.9, 0.2], [0.4, 0.6]]))
    with pytest.raises(ConfigError):
        TransitionMatrix(np.array([[1.1, -0.1], [0.4, 0.6]]))
    # stationary tag must actually be stationary
    pi = ProbVector(np.array([0.5, 0.5]))
    with pytest.raises(ConfigError):
        TransitionMatrix(np.array([[0.9, 0.1], [0.4, 0.6]]), stationary=pi)
    good = ProbVector(np.array([0.5, 0.5]))
    q = TransitionMatrix(np.array([[0.7, 0.3], [0.3, 0.7]]), stationary=good)
    assert q.stationary is good


def test_stationary_vector_masses_exact():
    rng = np.random.default_rng(1234)
    for _ in range(25):
        pi = sample_stationary_vector(5, (0, 1), 0.1, rng)
        assert pi.dim == 5
        assert abs(float(pi.entries[2:].sum()) - 0.1) < 1e-14
        assert abs(float(pi.entries.sum()) - 1.0) < 1e-12
        assert np.all(pi.entries > 0.0)


def test_stationary_vector_two_states_is_deterministic():
    # singleton blocks normalize to 1, so the draw cannot matter
    rng = np.random.default_rng(7)
    pi = sample_stationary_vector(2, (0,), 0.3, rng)
    assert np.allclose(pi.entries, [0.7, 0.3], atol=1e-15)


def test_stationary_vector_seed_replay():
    seed = 99
    pi = sample_stationary_vector(4, (0, 2), 0.25, np.random.default_rng(seed))
    zeta = np.random.default_rng(seed).random(4)
    mask = np.array([True, False, True, False])
    expect = np.empty(4)
    expect[mask] = 0.75 * zeta[mask] / zeta[mask].sum()
    expect[~mask] = 0.25 * zeta[~mask] / zeta[~mask].sum()
    assert np.array_equal(pi.entries, expect)


def test_stationary_vector_rejects_bad_args():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        sample_stationary_vector(5, (0, 1), 0.0, rng)
    with pytest.raises(ConfigError):
        sample_stationary_vector(5, (0, 1), 1.0, rng)
    with pytest.raises(ConfigError):
        sample_stationary_vector(5, (), 0.1, rng)
    with pytest.raises(ConfigError):
        sample_stationary_vector(5, (0, 1, 2, 3, 4), 0.1, rng)
    with pytest.raises(ConfigError):
        sample_stationary_vector(5, (5,), 0.1, rng)
    with pytest.raises(ConfigError):
        sample_stationary_vector(1, (0,), 0.1, rng)


def test_dirichlet_rows_from_stub():
    p = sample_dirichlet_transition(2, _StubRng([[1.0, 1.0], [3.0, 1.0]]))
    assert np.allclose(p.entries, [[0.5, 0.5], [0.75, 0.25]], atol=1e-15)
    assert p.stationary is None


def test_dirichlet_rows_mean_uniform():
    rng = np.random.default_rng(2024)
    acc = np.zeros((5, 5))
    n = 2000
    for _ in range(n):
        acc += sample_dirichlet_transition(5, rng).entries
    assert np.max(np.abs(acc / n - 0.2)) < 0.015


def test_sinkhorn_fixed_point():
    pi = np.array([0.5, 0.3, 0.2])
    a = np.outer(pi, pi)
    log = []
    out = sinkhorn_balance(a, pi, residual_log=log)
    assert len(log) == 1
    assert log[0][0] < 1e-15 and log[0][1] < 1e-15
    assert np.array_equal(out, a)


def test_sinkhorn_two_by_two_closed_form():
    # with equal margins the limit is symmetric with x/(0.5-x) set by the
    # cross-ratio of the input, which scaling cannot change
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    pi = np.array([0.5, 0.5])
    out = sinkhorn_balance(a, pi)
    ratio = np.sqrt((a[0, 0] * a[1, 1]) / (a[0, 1] * a[1, 0]))
    x = 0.5 * ratio / (1.0 + ratio)
    assert np.allclose(out, [[x, 0.5 - x], [0.5 - x, x]], atol=1e-10)


def test_sinkhorn_margins_and_diagonal_equivalence():
    rng = np.random.default_rng(5150)
    for _ in range(20):
        d = int(rng.integers(2, 7))
        pi = ProbVector.normalized(rng.random(d) + 0.05)
        a = rng.random((d, d)) + 0.05
        out = sinkhorn_balance(a, pi)
        assert np.linalg.norm(out.sum(axis=1) - pi.entries) <= 1e-10
        assert np.linalg.norm(out.sum(axis=0) - pi.entries) <= 1e-10
        # out must equal diag(u) a diag(v): log-ratios split additively
        lr = np.log(out / a)
        split = lr[:, :1] + lr[:1, :] - lr[0, 0]
        assert np.max(np.abs(lr - split)) < 1e-8


def test_sinkhorn_scaling_invariance():
    rng = np.random.default_rng(31)
    a = rng.random((4, 4)) + 0.1
    pi = ProbVector.normalized(rng.random(4) + 0.1)
    out1 = sinkhorn_balance(a, pi)
    out2 = sinkhorn_balance(7.3 * a, pi)
    assert np.max(np.abs(out1 - out2)) < 1e-8


def test_sinkhorn_residual_log_and_idempotence():
    rng = np.random.default_rng(8)
    a = rng.random((3, 3)) + 0.2
    pi = np.array([0.2, 0.5, 0.3])
    log = []
    out = sinkhorn_balance(a, pi, residual_log=log)
    assert len(log) >= 2
    assert max(log[-1]) <= 1e-10
    assert max(log[0]) > max(log[-1])
    relog = []
    again = sinkhorn_balance(out, pi, residual_log=relog)
    assert len(relog) == 1
    assert np.max(np.abs(again - out)) < 1e-12


def test_sinkhorn_convergence_error():
    rng = np.random.default_rng(77)
    a = rng.random((3, 3)) + 0.2
    pi = np.array([0.2, 0.5, 0.3])
    with pytest.raises(ConvergenceError) as exc:
        sinkhorn_balance(a, pi, max_iter=1)
    assert exc.value.row_residual > 0.0
    assert np.isfinite(exc.value.col_residual)


def test_sinkhorn_rejects_bad_inputs():
    pi = np.array([0.5, 0.5])
    with pytest.raises(ConfigError):
        sinkhorn_balance(np.array([[1.0, 0.0], [1.0, 1.0]]), pi)
    with pytest.raises(ConfigError):
        sinkhorn_balance(np.ones((2, 3)), pi)
    with pytest.raises(ConfigError):
        sinkhorn_balance(np.ones((3, 3)), pi)
    with pytest.raises(ConfigError):
        sinkhorn_balance(np.ones((2, 2)), pi, tol=0.0)


def test_to_transition_rank_one():
    pi = ProbVector(np.array([0.5, 0.3, 0.2]))
    a = np.outer(pi.entries, pi.entries)
    p = to_transition(a, pi)
    assert np.allclose(p.entries, np.tile(pi.entries, (3, 1)), atol=1e-15)
    assert p.stationary is pi
    assert np.allclose(p.entries.sum(axis=1), 1.0, atol=1e-12)


def test_to_transition_preserves_margin_vector():
    rng = np.random.default_rng(456)
    pi = ProbVector.normalized(rng.random(5) + 0.05)
    a = sinkhorn_balance(rng.random((5, 5)) + 0.05, pi)
    p = to_transition(a, pi)
    assert np.max(np.abs(p.entries.sum(axis=1) - 1.0)) < 1e-12
    assert np.max(np.abs(pi.entries @ p.entries - pi.entries)) <= 1e-8


def test_eigenmoduli_rank_one():
    pi = np.array([0.4, 0.3, 0.2, 0.1])
    s = eigenmoduli(np.tile(pi, (4, 1)))
    assert abs(s.moduli[0] - 1.0) < 1e-12
    assert s.slem < 1e-12
    assert s.tlem < 1e-12


def test_eigenmoduli_permutation():
    p = np.roll(np.eye(4), 1, axis=1)
    s = eigenmoduli(p)
    assert np.allclose(s.moduli, 1.0, atol=1e-12)
    assert abs(s.slem - 1.0) < 1e-12
    assert abs(s.tlem - 1.0) < 1e-12


def test_eigenmoduli_two_states():
    s = eigenmoduli(TransitionMatrix(np.array([[0.9, 0.1], [0.2, 0.8]])))
    assert abs(s.slem - 0.7) < 1e-12
    assert s.tlem == 0.0


def test_eigenmoduli_reference_chains():
    for chain in REFERENCE_CHAINS.values():
        s = eigenmoduli(np.array(chain["matrix"]))
        assert abs(s.slem - chain["slem"]) < 5e-4
        if chain["tlem"] is not None:
            assert abs(s.tlem - chain["tlem"]) < 5e-4


def test_constrained_rank_one_shortcut():
    pi = ProbVector(np.array([0.5, 0.4, 0.1]))
    out = sample_constrained_transition(pi, 0.0, 0.0, np.random.default_rng(3))
    assert isinstance(out, ConstrainedSample)
    assert out.attempts == 0
    assert np.array_equal(out.matrix.entries, np.tile(pi.entries, (3, 1)))
    assert out.spectral.slem < 1e-12
    with pytest.raises(ConfigError):
        sample_constrained_transition(pi, 0.0, 0.1, np.random.default_rng(3))


def test_constrained_bounds_hold():
    rng = np.random.default_rng(11)
    pi = sample_stationary_vector(5, (0, 1), 0.1, rng)
    out = sample_constrained_transition(pi, 0.3, 0.05, rng)
    assert out.attempts >= 1
    # recheck the spectrum independently of the sampler's own summary
    moduli = np.sort(np.abs(np.linalg.eigvals(out.matrix.entries)))[::-1]
    assert moduli[1] >= 0.3
    assert moduli[2] >= 0.05
    assert np.max(np.abs(pi.entries @ out.matrix.entries - pi.entries)) <= 1e-8


def test_constrained_budget_error():
    pi = ProbVector(np.array([0.3, 0.3, 0.2, 0.1, 0.1]))
    with pytest.raises(SamplingBudgetError) as exc:
        sample_constrained_transition(pi, 0.999, 0.0, np.random.default_rng(6), max_attempts=8)
    assert exc.value.attempts == 8
    assert 0.0 < exc.value.best_slem < 0.999
    assert exc.value.best_tlem <= exc.value.best_slem


def test_constrained_rejects_bad_bounds():
    pi = ProbVector(np.array([0.5, 0.5]))
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        sample_constrained_transition(pi, 1.0, 0.0, rng)
    with pytest.raises(ConfigError):
        sample_constrained_transition(pi, -0.1, 0.0, rng)
    with pytest.raises(ConfigError):
        sample_constrained_transition(pi, 0.3, 0.3, rng)
    with pytest.raises(ConfigError):
        sample_constrained_transition(pi, 0.3, -0.05, rng)


def test_random_triples_round_trip():
    # margins of the balanced matrix and stationarity of the transition
    # matrix across dimensions 2..8
    rng = np.random.default_rng(20240819)
    for k in range(40):
        d = 2 + k % 7
        f_set = tuple(range(1 + int(rng.integers(0, d - 1))))
        pi = sample_stationary_vector(d, f_set, float(rng.uniform(0.05, 0.5)), rng)
        a = sinkhorn_balance(sample_dirichlet_transition(d, rng).entries, pi)
        assert np.linalg.norm(a.sum(axis=1) - pi.entries) <= 1e-9
        assert np.linalg.norm(a.sum(axis=0) - pi.entries) <= 1e-9
        p = to_transition(a, pi)
        assert np.max(np.abs(pi.entries @ p.entries - pi.entries)) <= 1e-8
