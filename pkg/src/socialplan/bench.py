"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Usage: python -m socialplan.bench [--repeat N]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels
from .planner import PolicySpec, simulate
from .rewards import RewardWeights
from .scenarios import case_scenario, fixture_scenario


def _time(fn, repeat: int) -> float:
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def run(repeat: int = 200) -> list[tuple[str, dict[str, float]]]:
    scn = case_scenario("I")
    fix = fixture_scenario("confidence")
    rng = np.random.default_rng(0)
    accels = rng.uniform(-6, 3, size=(6, 30))
    xy_e = rng.uniform(-40, 40, size=(6, 31, 2))
    xy_o = rng.uniform(-40, 40, size=(6, 31, 2))
    s_e = np.cumsum(rng.uniform(0, 1, size=(6, 31)), axis=1) + 80
    s_o = np.cumsum(rng.uniform(0, 1, size=(6, 31)), axis=1) + 80

    cases = [
        ("rollout_batch (6x30)", lambda: _kernels.rollout_batch(10.0, 5.0, accels, 0.08)),
        (
            "safety_matrix (6x6x30)",
            lambda: _kernels.safety_matrix(xy_e, xy_o, s_e, s_o, 100.0, 100.0, 5.0, 10.0),
        ),
        ("build_joint_space", lambda: scn.space_at(scn.initial)),
        (
            "simulate (confidence fixture)",
            lambda: simulate(fix, PolicySpec.fixed(RewardWeights.confidence()), PolicySpec.follower(), 400),
        ),
    ]

    rows = []
    original = _kernels.get_backend()
    try:
        for name, fn in cases:
            timings = {}
            sim_repeat = max(1, repeat // 40)
            n = sim_repeat if name.startswith("simulate") else repeat
            for backend in _kernels.available_backends():
                _kernels.set_backend(backend)
                timings[backend] = _time(fn, n)
            rows.append((name, timings))
    finally:
        _kernels.set_backend(original)
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args(argv)
    rows = run(args.repeat)
    backends = _kernels.available_backends()
    header = f"{'kernel':32s}" + "".join(f"{b:>14s}" for b in backends) + f"{'speedup':>10s}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        cells = "".join(f"{timings[b] * 1e6:11.1f} us" for b in backends)
        if "compiled" in timings and "pure" in timings:
            ratio = timings["pure"] / timings["compiled"]
            cells += f"{ratio:9.1f}x"
        print(f"{name:32s}{cells}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
