"""Utility features and the social reward terms.

The per-pair utility is a weighted sum of three accumulated features
(efficiency, comfort, safety).  On top of the cached utility matrices of a
joint behavior space, this module evaluates the other car's Boltzmann
response distribution, the expected-utility (egoism) reward, the
distribution-divergence (courtesy) reward and the top-two-probability-gap
(confidence) reward, plus their weighted combination.

All softmax and KL computations run in the log domain with max subtraction;
raw utilities can reach magnitudes of hundreds and would overflow a naive
exponential.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import UnknownCandidateError

if TYPE_CHECKING:
    from .core import ConflictPoint, ReferencePath
    from .sampling import JointBehaviorSpace, Trajectory

_MINMAX_EPS = 1e-12


@dataclass(frozen=True)
class RewardConfig:
    """Utility weights and feature normalization constants.

    theta_* weigh (efficiency, comfort, safety); beta scales the rationality
    of the Boltzmann response model.  The normalization constants render each
    per-step feature dimensionless and O(1): d0 lateral offset scale (m),
    a0 acceleration scale (m/s^2), j0 jerk scale (m/s^3), sigma_d relative
    distance scale (m), sigma_c conflict-proximity scale (m).
    """

    theta_ego: tuple[float, float, float] = (1.0, 0.5, 10.0)
    theta_other: tuple[float, float, float] = (1.0, 0.5, 10.0)
    beta: float = 1.0
    d0: float = 1.0
    a0: float = 3.0
    j0: float = 5.0
    sigma_d: float = 5.0
    sigma_c: float = 10.0

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        for name in ("d0", "a0", "j0", "sigma_d", "sigma_c"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not (np.all(np.isfinite(self.theta_ego)) and np.all(np.isfinite(self.theta_other))):
            raise ValueError("utility weights must be finite")


@dataclass(frozen=True)
class RewardWeights:
    """Mixing weights over (egoism, courtesy, confidence); a point on the 2-simplex."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (3,):
            raise ValueError("reward weights must be a 3-vector")
        if np.any(v < -1e-9) or abs(v.sum() - 1.0) > 1e-9:
            raise ValueError(f"reward weights must be non-negative and sum to 1, got {v}")
        object.__setattr__(self, "values", np.clip(v, 0.0, None))

    @classmethod
    def of(cls, egoism: float, courtesy: float, confidence: float) -> "RewardWeights":
        return cls(np.array([egoism, courtesy, confidence], dtype=float))

    @classmethod
    def egoism(cls) -> "RewardWeights":
        return cls.of(1.0, 0.0, 0.0)

    @classmethod
    def courtesy(cls) -> "RewardWeights":
        return cls.of(0.0, 1.0, 0.0)

    @classmethod
    def confidence(cls) -> "RewardWeights":
        return cls.of(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class FeatureVector:
    """Accumulated (efficiency, comfort, safety) penalties; each is <= 0."""

    efficiency: float
    comfort: float
    safety: float

    def __post_init__(self):
        arr = self.as_array()
        if not np.all(np.isfinite(arr)):
            raise ValueError("features must be finite")
        if np.any(arr > 1e-9):
            raise ValueError("features are penalties and must be non-positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.efficiency, self.comfort, self.safety])


@dataclass(frozen=True)
class ResponseDistribution:
    """Probabilities over the other car's candidate set.

    conditioning is the ego candidate label, or None for the distribution in
    the absence of the ego car.
    """

    probs: np.ndarray
    conditioning: int | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(p <= 0.0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probs must be strictly positive and sum to 1")
        object.__setattr__(self, "probs", p)


def _efficiency(v: np.ndarray, d: float, v_des: float, cfg: RewardConfig) -> float:
    dev = (v - v_des) / v_des
    return float(-(np.sum(dev * dev) + len(v) * (d / cfg.d0) ** 2))

def _comfort(accels: np.ndarray, dt: float, cfg: RewardConfig) -> float:
    jerk = np.diff(accels) / dt
    return float(-(np.sum((accels / cfg.a0) ** 2) + np.sum((jerk / cfg.j0) ** 2)))

def _safety(traj_self, traj_other, s_c_self: float, s_c_other: float, cfg: RewardConfig) -> float:
    t = len(traj_self.s) - 1
    d_rel = np.linalg.norm(traj_self.xy[:t] - traj_other.xy[:t], axis=1)
    prox = np.abs(traj_self.s[:t] - s_c_self) + np.abs(traj_other.s[:t] - s_c_other)
    return float(-np.sum(np.exp(-d_rel / cfg.sigma_d) * np.exp(-prox / cfg.sigma_c)))


def features(
    traj_self: "Trajectory",
    traj_other: "Trajectory | None",
    path: "ReferencePath",
    conflict: "ConflictPoint | None",
    cfg: RewardConfig,
    conflict_s_self: float | None = None,
    conflict_s_other: float | None = None,
) -> FeatureVector:
    """Accumulate the three utility features of a trajectory over the horizon.

    Steps t = 0..N-1 contribute state traj.s[t], traj.v[t] and control
    traj.accels[t].  With traj_other absent the safety feature is zero (the
    other car does not exist for this evaluation).  The conflict arclengths
    default to (conflict.s_ego, conflict.s_other) and can be overridden when
    the self/other roles are swapped relative to the conflict object.
    """
    n = len(traj_self.s) - 1
    eff = _efficiency(traj_self.v[:n], traj_self.d, path.speed_limit, cfg)
    com = _comfort(traj_self.accels, traj_self.dt, cfg)
    if traj_other is None:
        saf = 0.0
    else:
        if conflict_s_self is None or conflict_s_other is None:
            if conflict is None:
                raise ValueError("a conflict point is required when traj_other is present")
            conflict_s_self = conflict.s_ego if conflict_s_self is None else conflict_s_self
            conflict_s_other = conflict.s_other if conflict_s_other is None else conflict_s_other
        saf = _safety(traj_self, traj_other, conflict_s_self, conflict_s_other, cfg)
    return FeatureVector(efficiency=eff, comfort=com, safety=saf)


def cumulative_reward(
    traj_self,
    traj_other,
    theta,
    path,
    conflict,
    cfg: RewardConfig,
    **conflict_overrides,
) -> float:
    """Per-pair utility: theta dot accumulated features."""
    phi = features(traj_self, traj_other, path, conflict, cfg, **conflict_overrides)
    return float(np.dot(np.asarray(theta, dtype=float), phi.as_array()))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    return shifted - np.log(np.sum(np.exp(shifted)))


def _check_label(space, label: int) -> int:
    label = int(label)
    if not 0 <= label < space.reward_other.shape[0]:
        raise UnknownCandidateError(f"no ego candidate labeled {label}")
    return label


def response_distribution(space: "JointBehaviorSpace", ego_label: int, beta: float | None = None) -> ResponseDistribution:
    """Boltzmann distribution over the other car's responses to one ego action."""
    label = _check_label(space, ego_label)
    beta = space.reward_cfg.beta if beta is None else beta
    probs = np.exp(_log_softmax(beta * space.reward_other[label]))
    return ResponseDistribution(probs=probs, conditioning=label)


def absence_distribution(space: "JointBehaviorSpace", beta: float | None = None) -> ResponseDistribution:
    """The other car's behavior distribution with the ego car removed.

    Built from efficiency and comfort only; without the ego car there is no
    interaction and the safety feature does not apply.
    """
    beta = space.reward_cfg.beta if beta is None else beta
    probs = np.exp(_log_softmax(beta * space.absence_other))
    return ResponseDistribution(probs=probs, conditioning=None)


def egoism_reward(space, ego_label: int, beta: float | None = None) -> float:
    """Expected ego utility under the other car's response distribution."""
    label = _check_label(space, ego_label)
    dist = response_distribution(space, label, beta)
    return float(np.dot(dist.probs, space.reward_ego[label]))


def _kl(p: np.ndarray, log_p: np.ndarray, log_q: np.ndarray) -> float:
    return float(np.sum(p * (log_p - log_q)))


def courtesy_reward(space, ego_label: int, beta: float | None = None) -> float:
    """exp(-KL(absence || presence)): 1 means the ego action leaves the other's plan untouched."""
    label = _check_label(space, ego_label)
    beta = space.reward_cfg.beta if beta is None else beta
    log_q = _log_softmax(beta * space.absence_other)
    log_p = _log_softmax(beta * space.reward_other[label])
    kl = max(_kl(np.exp(log_q), log_q, log_p), 0.0)  # floor float noise at KL = 0
    return float(np.exp(-kl))


def confidence(space, ego_label: int, beta: float | None = None) -> float:
    """Gap between the two highest response probabilities; 1 for a singleton set."""
    label = _check_label(space, ego_label)
    probs = response_distribution(space, label, beta).probs
    if len(probs) == 1:
        return 1.0
    top = np.sort(probs)[-2:]
    return float(top[1] - top[0])


def confidence_reward(space, ego_label: int, beta: float | None = None) -> float:
    return float(np.exp(confidence(space, ego_label, beta)))


@dataclass(frozen=True)
class SocialComponents:
    """Per-ego-candidate reward terms cached for one joint behavior space."""

    presence_logp: np.ndarray  # (ne, no) log response probabilities
    egoism_raw: np.ndarray  # (ne,)
    egoism_norm: np.ndarray  # (ne,) min-max normalized to [0, 1]
    courtesy: np.ndarray  # (ne,) in (0, 1]
    confidence: np.ndarray  # (ne,) in [0, 1]
    confidence_reward: np.ndarray  # (ne,) in [1, e]

    def stacked(self) -> np.ndarray:
        """(3, ne) matrix of the mixable terms."""
        return np.stack([self.egoism_norm, self.courtesy, self.confidence_reward])


def social_components(space: "JointBehaviorSpace", beta: float | None = None) -> SocialComponents:
    """Evaluate all three reward terms for every ego candidate at once."""
    beta = space.reward_cfg.beta if beta is None else beta
    logits = beta * space.reward_other
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    p = np.exp(log_p)

    egoism_raw = np.sum(p * space.reward_ego, axis=1)
    span = egoism_raw.max() - egoism_raw.min()
    if span > _MINMAX_EPS:
        egoism_norm = (egoism_raw - egoism_raw.min()) / span
    else:
        egoism_norm = np.zeros_like(egoism_raw)

    log_q = _log_softmax(beta * space.absence_other)
    q = np.exp(log_q)
    kl = np.sum(q[None, :] * (log_q[None, :] - log_p), axis=1)
    court = np.exp(-np.maximum(kl, 0.0))

    if p.shape[1] == 1:
        conf = np.ones(p.shape[0])
    else:
        top2 = np.partition(p, p.shape[1] - 2, axis=1)[:, -2:]
        conf = top2[:, 1] - top2[:, 0]

    return SocialComponents(
        presence_logp=log_p,
        egoism_raw=egoism_raw,
        egoism_norm=egoism_norm,
        courtesy=court,
        confidence=conf,
        confidence_reward=np.exp(conf),
    )


def social_reward_vector(space, lam: RewardWeights, beta: float | None = None) -> np.ndarray:
    """Combined social reward of every ego candidate under mixing weights lam.

    The egoism term is min-max normalized over the candidate set before
    mixing so that all three terms share an O(1) range.
    """
    comps = space.components(beta)
    return lam.values @ comps.stacked()


def social_reward(space, ego_label: int, lam: RewardWeights, beta: float | None = None) -> float:
    label = _check_label(space, ego_label)
    return float(social_reward_vector(space, lam, beta)[label])
