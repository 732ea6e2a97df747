"""Versioned JSON scenario configuration tying all sub-configs together."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import AgentState, JointState
from .errors import SchemaError
from .inference import InferenceConfig, PriorSpec
from .planner import Scenario
from .rewards import RewardConfig
from .sampling import SamplerConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PathSpec:
    file: str
    speed_limit: float


@dataclass(frozen=True)
class ScenarioConfig:
    """Serializable description of a scenario plus workflow knobs."""

    path_ego: PathSpec
    path_other: PathSpec
    initial: JointState
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    rewards: RewardConfig = field(default_factory=RewardConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    seed: int = 0
    tracks_file: str | None = None
    frame_period_ms: int = 50
    max_steps: int = 200
    base_dir: Path = field(default_factory=Path)

    def resolve(self, name: str) -> Path:
        p = Path(name)
        return p if p.is_absolute() else self.base_dir / p

    def load_scenario(self) -> Scenario:
        from .tracks import load_path_csv

        ego = load_path_csv(self.resolve(self.path_ego.file), self.path_ego.speed_limit)
        other = load_path_csv(self.resolve(self.path_other.file), self.path_other.speed_limit)
        return Scenario.create(ego, other, self.initial, self.sampler, self.rewards)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise SchemaError(f"config is missing {context}.{key}" if context else f"config is missing {key}")
    return mapping[key]


def _agent_state(obj: dict, context: str) -> AgentState:
    return AgentState(
        s=float(_require(obj, "s", context)),
        v=float(_require(obj, "v", context)),
        d=float(obj.get("d", 0.0)),
    )


def _path_spec(obj: dict, context: str) -> PathSpec:
    return PathSpec(
        file=str(_require(obj, "file", context)),
        speed_limit=float(_require(obj, "speed_limit", context)),
    )


def _prior(obj: dict) -> PriorSpec:
    kind = obj.get("kind", "uniform")
    return PriorSpec(
        kind=kind,
        alpha=tuple(obj["alpha"]) if "alpha" in obj else None,
        fractions=tuple(obj["fractions"]) if "fractions" in obj else None,
        concentration=float(obj.get("concentration", 8.0)),
    )


def config_from_dict(data: dict, base_dir: Path | str = ".") -> ScenarioConfig:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    paths = _require(data, "paths", "")
    initial = _require(data, "initial", "")
    try:
        sampler_raw = dict(data.get("sampler", {}))
        if "terminal_speed_fractions" in sampler_raw:
            sampler_raw["terminal_speed_fractions"] = tuple(sampler_raw["terminal_speed_fractions"])
        sampler = SamplerConfig(**sampler_raw)
        rewards_raw = dict(data.get("rewards", {}))
        for key in ("theta_ego", "theta_other"):
            if key in rewards_raw:
                rewards_raw[key] = tuple(rewards_raw[key])
        rewards = RewardConfig(**rewards_raw)
        inf_raw = dict(data.get("inference", {}))
        if "prior" in inf_raw:
            inf_raw["prior"] = _prior(inf_raw["prior"])
        inference = InferenceConfig(**inf_raw)
        cfg = ScenarioConfig(
            path_ego=_path_spec(_require(paths, "ego", "paths"), "paths.ego"),
            path_other=_path_spec(_require(paths, "other", "paths"), "paths.other"),
            initial=JointState(
                ego=_agent_state(_require(initial, "ego", "initial"), "initial.ego"),
                other=_agent_state(_require(initial, "other", "initial"), "initial.other"),
            ),
            sampler=sampler,
            rewards=rewards,
            inference=inference,
            seed=int(data.get("seed", 0)),
            tracks_file=data.get("tracks"),
            frame_period_ms=int(data.get("frame_period_ms", 50)),
            max_steps=int(data.get("max_steps", 200)),
            base_dir=Path(base_dir),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid config value: {exc}") from exc
    return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("config root must be a JSON object")
    return config_from_dict(data, base_dir=path.parent)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    data = {
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "paths": {
            "ego": {"file": cfg.path_ego.file, "speed_limit": cfg.path_ego.speed_limit},
            "other": {"file": cfg.path_other.file, "speed_limit": cfg.path_other.speed_limit},
        },
        "initial": {
            "ego": {"s": cfg.initial.ego.s, "v": cfg.initial.ego.v, "d": cfg.initial.ego.d},
            "other": {"s": cfg.initial.other.s, "v": cfg.initial.other.v, "d": cfg.initial.other.d},
        },
        "sampler": {
            "horizon_steps": cfg.sampler.horizon_steps,
            "dt": cfg.sampler.dt,
            "terminal_speed_fractions": list(cfg.sampler.terminal_speed_fractions),
            "accel_min": cfg.sampler.accel_min,
            "accel_max": cfg.sampler.accel_max,
        },
        "rewards": {
            "theta_ego": list(cfg.rewards.theta_ego),
            "theta_other": list(cfg.rewards.theta_other),
            "beta": cfg.rewards.beta,
            "d0": cfg.rewards.d0,
            "a0": cfg.rewards.a0,
            "j0": cfg.rewards.j0,
            "sigma_d": cfg.rewards.sigma_d,
            "sigma_c": cfg.rewards.sigma_c,
        },
        "inference": {
            "n_particles": cfg.inference.n_particles,
            "window_r": cfg.inference.window_r,
            "prior": {
                "kind": cfg.inference.prior.kind,
                **({"alpha": list(cfg.inference.prior.alpha)} if cfg.inference.prior.alpha else {}),
                **({"fractions": list(cfg.inference.prior.fractions)} if cfg.inference.prior.fractions else {}),
                "concentration": cfg.inference.prior.concentration,
            },
            "init": cfg.inference.init,
            "resample": cfg.inference.resample,
            "growing_window": cfg.inference.growing_window,
        },
        "frame_period_ms": cfg.frame_period_ms,
        "max_steps": cfg.max_steps,
    }
    if cfg.tracks_file:
        data["tracks"] = cfg.tracks_file
    return data


def save_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(
        json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
