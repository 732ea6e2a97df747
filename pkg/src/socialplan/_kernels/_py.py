"""Pure-numpy kernel backend.

Reference implementation of the two hot loops behind joint-behavior-space
construction: batched candidate rollout and the pairwise safety matrix.
Kept in exact floating-point agreement with the scalar dynamics in
``socialplan.core`` (same operation order, no FMA contraction).
"""
from __future__ import annotations

import numpy as np

BACKEND = "pure"


def rollout_batch(s0: float, v0: float, accels: np.ndarray, dt: float):
    """Roll out n candidate acceleration sequences from a common start state.

    accels: (n, N).  Returns (S, V) with shape (n, N+1); speed clamps at zero
    using the exact in-step stop time, matching core.step_dynamics bit for bit.
    """
    accels = np.ascontiguousarray(accels, dtype=float)
    n, horizon = accels.shape
    S = np.empty((n, horizon + 1))
    V = np.empty((n, horizon + 1))
    S[:, 0] = s0
    V[:, 0] = v0
    for k in range(horizon):
        a = accels[:, k]
        v = V[:, k]
        v1 = v + a * dt
        stopping = v1 < 0.0
        safe_a = np.where(stopping, a, 1.0)  # avoid 0-division off the branch
        t_stop = np.where(stopping, -v / safe_a, dt)
        S[:, k + 1] = S[:, k] + v * t_stop + 0.5 * a * t_stop * t_stop
        V[:, k + 1] = np.where(stopping, 0.0, v1)
    return S, V


def safety_matrix(
    xy_ego: np.ndarray,
    xy_other: np.ndarray,
    s_ego: np.ndarray,
    s_other: np.ndarray,
    s_conflict_ego: float,
    s_conflict_other: float,
    sigma_d: float,
    sigma_c: float,
) -> np.ndarray:
    """Accumulated pairwise proximity penalty over the horizon.

    xy_ego: (ne, N+1, 2), xy_other: (no, N+1, 2), s_ego: (ne, N+1),
    s_other: (no, N+1).  Entry [i, j] is

        -sum_t exp(-|p_e - p_o| / sigma_d)
              * exp(-(|s_e - s_ce| + |s_o - s_co|) / sigma_c)

    summed over steps t = 0..N-1.
    """
    t = xy_ego.shape[1] - 1
    diff = xy_ego[:, None, :t, :] - xy_other[None, :, :t, :]
    d_rel = np.sqrt(np.sum(diff * diff, axis=3))
    prox_e = np.exp(-np.abs(s_ego[:, :t] - s_conflict_ego) / sigma_c)
    prox_o = np.exp(-np.abs(s_other[:, :t] - s_conflict_other) / sigma_c)
    w = np.exp(-d_rel / sigma_d) * (prox_e[:, None, :] * prox_o[None, :, :])
    return -np.sum(w, axis=2)
