"""Distance functions over classifier output spaces.

Both built-in metrics satisfy the usual metric axioms (non-negativity,
identity of indiscernibles, symmetry, triangle inequality) on their
intended domains: any hashable labels for the discrete metric, numeric
labels for the absolute-difference metric.
"""

from __future__ import annotations

from typing import Callable

OutputMetric = Callable[[object, object], float]


def discrete_distance(a, b) -> float:
    """0 when the labels match, 1 otherwise."""
    return 0.0 if a == b else 1.0


def absolute_distance(a, b) -> float:
    return float(abs(a - b))


_METRICS: dict[str, OutputMetric] = {
    "discrete": discrete_distance,
    "absolute": absolute_distance,
}


def resolve_metric(name: str) -> OutputMetric:
    """Look up an output metric by name ("discrete" or "absolute")."""
    try:
        return _METRICS[name]
    except KeyError:
        raise ValueError(
            f"unknown output metric {name!r}; expected one of {sorted(_METRICS)}"
        ) from None


def metric_names() -> tuple[str, ...]:
    return tuple(sorted(_METRICS))
