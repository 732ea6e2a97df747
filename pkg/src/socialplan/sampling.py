"""Candidate action sampling and joint behavior space construction.

Each agent's candidate set is a fan of constant-acceleration profiles toward
a grid of terminal speeds (fractions of the path speed limit).  Pairing the
two fans yields the discrete joint behavior space; both agents' utilities
are cached as |ego| x |other| matrices at build time so every downstream
reward term reduces to row/column operations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import AgentState, ConflictPoint, JointState, ReferencePath, step_dynamics
from .errors import EmptyCandidateSetError
from .rewards import RewardConfig, SocialComponents, social_components


@dataclass(frozen=True)
class SamplerConfig:
    """Spatial-temporal sampling knobs (JSON fields match attribute names)."""

    horizon_steps: int = 12
    dt: float = 0.25
    terminal_speed_fractions: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25)
    accel_min: float = -6.0
    accel_max: float = 3.0
    forbid_singleton: bool = False

    def __post_init__(self):
        if self.horizon_steps < 1:
            raise ValueError("horizon_steps must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if len(self.terminal_speed_fractions) == 0:
            raise ValueError("terminal_speed_fractions must be non-empty")
        if self.accel_min >= self.accel_max:
            raise ValueError("accel_min must be below accel_max")

    @property
    def horizon_seconds(self) -> float:
        return self.horizon_steps * self.dt


@dataclass(frozen=True)
class ActionSequence:
    """A candidate control sequence: one acceleration per step."""

    label: int
    accels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "accels", np.asarray(self.accels, dtype=float))


@dataclass(frozen=True)
class Trajectory:
    """Rolled-out states of a candidate: arrays of length N+1 plus controls.

    xy holds the Cartesian positions mapped through the agent's reference
    path at the constant lateral offset d.
    """

    s: np.ndarray
    v: np.ndarray
    accels: np.ndarray
    d: float
    dt: float
    xy: np.ndarray

    @property
    def states(self) -> tuple[AgentState, ...]:
        return tuple(AgentState(s=float(si), v=float(vi), d=self.d) for si, vi in zip(self.s, self.v))


class Candidate(NamedTuple):
    seq: ActionSequence
    traj: Trajectory


def sample_sequences(state: AgentState, path: ReferencePath, cfg: SamplerConfig) -> list[ActionSequence]:
    """Constant-acceleration candidates toward each terminal-speed fraction.

    a = (v_target - v) / (N dt), clamped to the acceleration bounds.  After
    clamping, duplicate accelerations are removed; labels are assigned in
    ascending target-speed order.
    """
    targets = sorted(f * path.speed_limit for f in cfg.terminal_speed_fractions)
    horizon = cfg.horizon_steps * cfg.dt
    accels = np.clip([(vt - state.v) / horizon for vt in targets], cfg.accel_min, cfg.accel_max)
    unique = []
    for a in accels:
        if not unique or a != unique[-1]:
            unique.append(float(a))
    if len(unique) == 1 and len(accels) > 1 and cfg.forbid_singleton:
        raise EmptyCandidateSetError("all candidates collapsed to a single acceleration")
    return [
        ActionSequence(label=i, accels=np.full(cfg.horizon_steps, a))
        for i, a in enumerate(unique)
    ]


def rollout(state: AgentState, seq: ActionSequence, dt: float, path: ReferencePath | None = None) -> Trajectory:
    """Integrate one candidate through the step dynamics (N+1 states)."""
    states = [state]
    for a in seq.accels:
        states.append(step_dynamics(states[-1], float(a), dt))
    s = np.array([st.s for st in states])
    v = np.array([st.v for st in states])
    xy = path.position(s, state.d) if path is not None else np.full((len(s), 2), np.nan)
    return Trajectory(s=s, v=v, accels=np.asarray(seq.accels, dtype=float), d=state.d, dt=dt, xy=xy)


@dataclass
class JointBehaviorSpace:
    """Discrete joint behavior space with cached utility matrices.

    reward_ego[i, j] and reward_other[i, j] are the Eq.-style accumulated
    utilities of the pair (ego candidate i, other candidate j);
    absence_other[j] is the other car's efficiency+comfort utility with the
    ego car removed.
    """

    ego_candidates: list[Candidate]
    other_candidates: list[Candidate]
    reward_ego: np.ndarray
    reward_other: np.ndarray
    absence_other: np.ndarray
    reward_cfg: RewardConfig
    dt: float
    conflict: ConflictPoint | None = None
    _components: dict[float, SocialComponents] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ne, no = len(self.ego_candidates), len(self.other_candidates)
        if ne == 0 or no == 0:
            raise EmptyCandidateSetError("joint space needs candidates on both sides")
        if self.reward_ego.shape != (ne, no) or self.reward_other.shape != (ne, no):
            raise ValueError("reward matrix shape does not match candidate counts")
        if not (
            np.all(np.isfinite(self.reward_ego))
            and np.all(np.isfinite(self.reward_other))
            and np.all(np.isfinite(self.absence_other))
        ):
            raise ValueError("reward matrices must be finite")

    def components(self, beta: float | None = None) -> SocialComponents:
        key = self.reward_cfg.beta if beta is None else float(beta)
        if key not in self._components:
            self._components[key] = social_components(self, key)
        return self._components[key]

    @classmethod
    def from_matrices(
        cls,
        reward_ego,
        reward_other,
        absence_other=None,
        reward_cfg: RewardConfig | None = None,
        dt: float = 0.25,
    ) -> "JointBehaviorSpace":
        """Synthetic space from raw matrices (testing and fuzzing)."""
        reward_ego = np.asarray(reward_ego, dtype=float)
        reward_other = np.asarray(reward_other, dtype=float)
        ne, no = reward_other.shape
        if absence_other is None:
            absence_other = np.zeros(no)
        placeholder = AgentState(s=0.0, v=0.0)

        def stub(n: int) -> list[Candidate]:
            out = []
            for i in range(n):
                seq = ActionSequence(label=i, accels=np.zeros(1))
                out.append(Candidate(seq=seq, traj=rollout(placeholder, seq, dt)))
            return out

        return cls(
            ego_candidates=stub(ne),
            other_candidates=stub(no),
            reward_ego=reward_ego,
            reward_other=reward_other,
            absence_other=np.asarray(absence_other, dtype=float),
            reward_cfg=reward_cfg or RewardConfig(),
            dt=dt,
        )


def _batch_rollout(state: AgentState, seqs: list[ActionSequence], dt: float, path: ReferencePath):
    accels = np.stack([seq.accels for seq in seqs])
    s, v = _kernels.rollout_batch(state.s, state.v, accels, dt)
    xy = path.position(s, state.d)
    return s, v, xy


def _utility_vectors(v: np.ndarray, accels: np.ndarray, d: float, v_des: float, dt: float, cfg: RewardConfig):
    """Per-candidate accumulated efficiency and comfort (steps 0..N-1)."""
    n = accels.shape[1]
    dev = (v[:, :n] - v_des) / v_des
    eff = -(np.sum(dev * dev, axis=1) + n * (d / cfg.d0) ** 2)
    jerk = np.diff(accels, axis=1) / dt
    com = -(np.sum((accels / cfg.a0) ** 2, axis=1) + np.sum((jerk / cfg.j0) ** 2, axis=1))
    return eff, com


def build_joint_space(
    x0: JointState,
    path_ego: ReferencePath,
    path_other: ReferencePath,
    conflict: ConflictPoint,
    sampler_cfg: SamplerConfig,
    reward_cfg: RewardConfig,
) -> JointBehaviorSpace:
    """Sample both candidate fans and cache every pairwise utility."""
    dt = sampler_cfg.dt
    ego_seqs = sample_sequences(x0.ego, path_ego, sampler_cfg)
    other_seqs = sample_sequences(x0.other, path_other, sampler_cfg)

    s_e, v_e, xy_e = _batch_rollout(x0.ego, ego_seqs, dt, path_ego)
    s_o, v_o, xy_o = _batch_rollout(x0.other, other_seqs, dt, path_other)

    acc_e = np.stack([seq.accels for seq in ego_seqs])
    acc_o = np.stack([seq.accels for seq in other_seqs])
    eff_e, com_e = _utility_vectors(v_e, acc_e, x0.ego.d, path_ego.speed_limit, dt, reward_cfg)
    eff_o, com_o = _utility_vectors(v_o, acc_o, x0.other.d, path_other.speed_limit, dt, reward_cfg)

    # the safety feature is symmetric in the pair, so one matrix serves both
    safety = _kernels.safety_matrix(
        xy_e, xy_o, s_e, s_o, conflict.s_ego, conflict.s_other,
        reward_cfg.sigma_d, reward_cfg.sigma_c,
    )

    te, to = reward_cfg.theta_ego, reward_cfg.theta_other
    reward_ego = te[0] * eff_e[:, None] + te[1] * com_e[:, None] + te[2] * safety
    reward_other = to[0] * eff_o[None, :] + to[1] * com_o[None, :] + to[2] * safety
    absence_other = to[0] * eff_o + to[1] * com_o

    def pack(seqs, s, v, xy, d) -> list[Candidate]:
        return [
            Candidate(
                seq=seq,
                traj=Trajectory(s=s[i], v=v[i], accels=seq.accels, d=d, dt=dt, xy=xy[i]),
            )
            for i, seq in enumerate(seqs)
        ]

    return JointBehaviorSpace(
        ego_candidates=pack(ego_seqs, s_e, v_e, xy_e, x0.ego.d),
        other_candidates=pack(other_seqs, s_o, v_o, xy_o, x0.other.d),
        reward_ego=reward_ego,
        reward_other=reward_other,
        absence_other=absence_other,
        reward_cfg=reward_cfg,
        dt=dt,
        conflict=conflict,
    )
