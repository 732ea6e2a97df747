"""Numeric kernels with a compiled core and a pure-numpy fallback.

The compiled extension is preferred when importable; set the environment
variable ``SOCIALPLAN_KERNELS=pure`` (or call :func:`set_backend`) to force
the fallback, e.g. for benchmarking the two against each other.
"""
from __future__ import annotations

import os

from . import _py

_BACKENDS = {"pure": _py}
try:
    from . import _speed

    _BACKENDS["compiled"] = _speed
except ImportError:  # extension not built; fallback only
    pass

_requested = os.environ.get("SOCIALPLAN_KERNELS", "auto")
if _requested == "auto":
    _active = _BACKENDS.get("compiled", _py)
elif _requested in _BACKENDS:
    _active = _BACKENDS[_requested]
else:
    raise ImportError(
        f"SOCIALPLAN_KERNELS={_requested!r} not available; "
        f"choose from {sorted(_BACKENDS)} or 'auto'"
    )


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend() -> str:
    return _active.BACKEND


def set_backend(name: str) -> None:
    """Switch the kernel backend in-process (not thread-safe; test/bench use)."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(_BACKENDS)}")
    _active = _BACKENDS[name]


def rollout_batch(s0, v0, accels, dt):
    return _active.rollout_batch(s0, v0, accels, dt)


def safety_matrix(xy_ego, xy_other, s_ego, s_other, sce, sco, sigma_d, sigma_c):
    return _active.safety_matrix(xy_ego, xy_other, s_ego, s_other, sce, sco, sigma_d, sigma_c)
