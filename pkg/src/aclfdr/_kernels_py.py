"""Pure-numpy implementations of the hot kernels.

These are the reference semantics; the compiled module ``aclfdr._kernels``
reproduces them (bit-for-bit for the integer/state kernels, to floating-point
roundoff for the logit kernel). Keep the two in sync.
"""

from __future__ import annotations

import numpy as np


def windowed_logits(gx: np.ndarray, kx: np.ndarray, d_mean: np.ndarray,
                    d_cov: np.ndarray, log_prior_odds: float,
                    epsilon: float) -> np.ndarray:
    """Second-order windowed log-likelihood-ratio expansion at every site.

    Parameters
    ----------
    gx, kx : (m,) arrays
        First and second derivative of the per-site log conditional density
        with respect to the signal, evaluated at the observations.
    d_mean : (2w+1,) array
        Difference of windowed conditional means (signal-present minus
        signal-absent), indexed by offset ``delta + w``.
    d_cov : (2w+1, 2w+1) array
        Difference of windowed conditional covariances, same indexing.
    log_prior_odds : float
        Log of the marginal odds of a signal at a site.
    epsilon : float
        Signal strength.

    Returns
    -------
    (m,) array of per-site logits. Offsets that fall outside the sequence
    contribute zero terms.
    """
    m = gx.shape[0]
    W = d_mean.shape[0]
    w = (W - 1) // 2
    G = np.zeros((m, W))
    K = np.zeros((m, W))
    for j in range(W):
        delta = j - w
        lo = max(0, -delta)
        hi = m - max(0, delta)
        G[lo:hi, j] = gx[lo + delta:hi + delta]
        K[lo:hi, j] = kx[lo + delta:hi + delta]
    lin = G @ d_mean
    curv = K @ d_mean
    quad = np.einsum("tj,tj->t", G @ d_cov, G)
    return log_prior_odds + epsilon * lin + 0.5 * epsilon ** 2 * (curv + quad)


def simulate_states(pi: np.ndarray, P: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map i.i.d. uniforms to a Markov chain path by inverse-CDF sampling.

    ``u[0]`` selects the initial state from ``pi``; ``u[t]`` selects state
    ``t`` from the transition row of state ``t-1``. Partial sums are
    accumulated left to right, so the compiled kernel produces the exact
    same path for the same uniforms.
    """
    m = u.shape[0]
    d = pi.shape[0]
    cum_pi = np.cumsum(pi)
    cum_P = np.cumsum(P, axis=1)
    states = np.empty(m, dtype=np.int64)
    s = min(int(np.searchsorted(cum_pi, u[0], side="right")), d - 1)
    states[0] = s
    for t in range(1, m):
        s = min(int(np.searchsorted(cum_P[s], u[t], side="right")), d - 1)
        states[t] = s
    return states


def pair_counts(theta: np.ndarray, w: int):
    """Windowed conditional moment counts for a binary training signal.

    Returns ``(mu_num, mu_den, j_num, j_den)``, all int64:

    - ``mu_num[i, w+d]``  = #{t : theta_t = i, theta_{t+d} = 1}
    - ``mu_den[i, w+d]``  = #{t : theta_t = i}
    - ``j_num[i, a, b]``  = #{t : theta_t = i, theta_{t+da} = 1, theta_{t+db} = 1}
    - ``j_den[i, a, b]``  = #{t : theta_t = i}

    with t restricted to positions where every referenced offset lies inside
    the sequence (no wraparound).
    """
    th = np.asarray(theta, dtype=np.int64)
    m = th.shape[0]
    W = 2 * w + 1
    mu_num = np.zeros((2, W), dtype=np.int64)
    mu_den = np.zeros((2, W), dtype=np.int64)
    j_num = np.zeros((2, W, W), dtype=np.int64)
    j_den = np.zeros((2, W, W), dtype=np.int64)
    for i in (0, 1):
        a = (th == i).astype(np.int64)
        for j in range(W):
            d1 = j - w
            t0 = max(0, -d1)
            t1 = m - max(0, d1)
            seg = a[t0:t1]
            mu_den[i, j] = seg.sum()
            mu_num[i, j] = seg @ th[t0 + d1:t1 + d1]
            for l in range(j, W):
                d2 = l - w
                t0p = max(0, -d1, -d2)
                t1p = m - max(0, d1, d2)
                segp = a[t0p:t1p]
                j_den[i, j, l] = segp.sum()
                j_num[i, j, l] = np.sum(
                    segp * th[t0p + d1:t1p + d1] * th[t0p + d2:t1p + d2]
                )
                j_den[i, l, j] = j_den[i, j, l]
                j_num[i, l, j] = j_num[i, j, l]
    return mu_num, mu_den, j_num, j_den
