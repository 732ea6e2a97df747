# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend: batched rollout and pairwise safety accumulation.

Operation order mirrors the pure backend so both stay in floating-point
agreement with the scalar dynamics (the build disables FMA contraction).
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()

BACKEND = "compiled"


def rollout_batch(double s0, double v0, cnp.ndarray[cnp.float64_t, ndim=2] accels, double dt):
    cdef Py_ssize_t n = accels.shape[0]
    cdef Py_ssize_t horizon = accels.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.empty((n, horizon + 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.empty((n, horizon + 1))
    cdef Py_ssize_t i, k
    cdef double a, v, v1, t_stop
    for i in range(n):
        S[i, 0] = s0
        V[i, 0] = v0
        for k in range(horizon):
            a = accels[i, k]
            v = V[i, k]
            v1 = v + a * dt
            if v1 < 0.0:
                t_stop = -v / a
                S[i, k + 1] = S[i, k] + v * t_stop + 0.5 * a * t_stop * t_stop
                V[i, k + 1] = 0.0
            else:
                S[i, k + 1] = S[i, k] + v * dt + 0.5 * a * dt * dt
                V[i, k + 1] = v1
    return S, V


def safety_matrix(
    cnp.ndarray[cnp.float64_t, ndim=3] xy_ego,
    cnp.ndarray[cnp.float64_t, ndim=3] xy_other,
    cnp.ndarray[cnp.float64_t, ndim=2] s_ego,
    cnp.ndarray[cnp.float64_t, ndim=2] s_other,
    double s_conflict_ego,
    double s_conflict_other,
    double sigma_d,
    double sigma_c,
):
    cdef Py_ssize_t ne = xy_ego.shape[0]
    cdef Py_ssize_t no = xy_other.shape[0]
    cdef Py_ssize_t t = xy_ego.shape[1] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((ne, no))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] prox_e = np.empty((ne, t))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] prox_o = np.empty((no, t))
    cdef Py_ssize_t i, j, k
    cdef double dx, dy, acc
    for i in range(ne):
        for k in range(t):
            prox_e[i, k] = exp(-fabs(s_ego[i, k] - s_conflict_ego) / sigma_c)
    for j in range(no):
        for k in range(t):
            prox_o[j, k] = exp(-fabs(s_other[j, k] - s_conflict_other) / sigma_c)
    for i in range(ne):
        for j in range(no):
            acc = 0.0
            for k in range(t):
                dx = xy_ego[i, k, 0] - xy_other[j, k, 0]
                dy = xy_ego[i, k, 1] - xy_other[j, k, 1]
                acc += exp(-sqrt(dx * dx + dy * dy) / sigma_d) * (prox_e[i, k] * prox_o[j, k])
            out[i, j] = -acc
    return out
