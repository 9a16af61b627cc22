import pytest

from fairaudit.distances import (
    absolute_distance,
    discrete_distance,
    metric_names,
    resolve_metric,
)


def test_discrete_is_zero_one():
    assert discrete_distance("a", "a") == 0.0
    assert discrete_distance("a", "b") == 1.0
    assert discrete_distance(0, 0) == 0.0
    assert discrete_distance(0, 1) == 1.0


def test_absolute_is_the_gap():
    assert absolute_distance(7, 3) == 4.0
    assert absolute_distance(3, 7) == 4.0
    assert absolute_distance(2.5, 2.5) == 0.0


def test_resolution():
    assert resolve_metric("discrete") is discrete_distance
    assert resolve_metric("absolute") is absolute_distance
    assert set(metric_names()) == {"discrete", "absolute"}
    with pytest.raises(ValueError, match="metric"):
        resolve_metric("nope")
