# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics mirror ``aclfdr._kernels_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def windowed_logits(const double[::1] gx, const double[::1] kx, const double[::1] d_mean,
                    const double[:, ::1] d_cov, double log_prior_odds,
                    double epsilon):
    cdef Py_ssize_t m = gx.shape[0]
    cdef Py_ssize_t W = d_mean.shape[0]
    cdef Py_ssize_t w = (W - 1) // 2
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] r = out
    cdef Py_ssize_t t, j, l, jlo, jhi, pj
    cdef double lin, curv, quad, row, g
    cdef double half_eps2 = 0.5 * epsilon * epsilon
    for t in range(m):
        # window offsets j map to positions t + j - w; clamp to [0, m)
        jlo = w - t if t < w else 0
        jhi = m - t + w if t + w >= m else W
        lin = 0.0
        curv = 0.0
        quad = 0.0
        for j in range(jlo, jhi):
            pj = t + j - w
            g = gx[pj]
            lin += g * d_mean[j]
            curv += kx[pj] * d_mean[j]
            row = 0.0
            for l in range(jlo, jhi):
                row += d_cov[j, l] * gx[t + l - w]
            quad += g * row
        r[t] = log_prior_odds + epsilon * lin + half_eps2 * (curv + quad)
    return out


def simulate_states(const double[::1] pi, const double[:, ::1] P, const double[::1] u):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t d = pi.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] states = out
    cdef Py_ssize_t t, j, s
    cdef double acc, ut
    acc = 0.0
    s = d - 1
    ut = u[0]
    for j in range(d):
        acc += pi[j]
        if ut < acc:
            s = j
            break
    states[0] = s
    for t in range(1, m):
        acc = 0.0
        ut = u[t]
        for j in range(d):
            acc += P[s, j]
            if ut < acc:
                s = j
                break
        else:
            s = d - 1
        states[t] = s
    return out


def pair_counts(theta, int w):
    cdef const cnp.int64_t[::1] th = np.ascontiguousarray(theta, dtype=np.int64)
    cdef Py_ssize_t m = th.shape[0]
    cdef Py_ssize_t W = 2 * w + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=2] mu_num = np.zeros((2, W), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] mu_den = np.zeros((2, W), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=3] j_num = np.zeros((2, W, W), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=3] j_den = np.zeros((2, W, W), dtype=np.int64)
    cdef Py_ssize_t i, j, l, t, t0, t1, d1, d2
    cdef cnp.int64_t num, den
    for i in range(2):
        for j in range(W):
            d1 = j - w
            t0 = -d1 if d1 < 0 else 0
            t1 = m - d1 if d1 > 0 else m
            num = 0
            den = 0
            for t in range(t0, t1):
                if th[t] == i:
                    den += 1
                    num += th[t + d1]
            mu_num[i, j] = num
            mu_den[i, j] = den
            for l in range(j, W):
                d2 = l - w
                t0 = -d1 if d1 < 0 else 0
                if -d2 > t0:
                    t0 = -d2
                t1 = m - d1 if d1 > 0 else m
                if m - d2 < t1:
                    t1 = m - d2
                num = 0
                den = 0
                for t in range(t0, t1):
                    if th[t] == i:
                        den += 1
                        num += th[t + d1] * th[t + d2]
                j_num[i, j, l] = num
                j_den[i, j, l] = den
                j_num[i, l, j] = num
                j_den[i, l, j] = den
    return mu_num, mu_den, j_num, j_den
