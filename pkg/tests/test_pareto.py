import numpy as np
import pytest

from paretocert import pareto, problems
from paretocert.errors import DimensionError


def brute_force_filter(points):
    """Independent O(n^2 p) oracle: scan every ordered pair."""
    keep = []
    for i, a in enumerate(points):
        dominated = False
        for j, b in enumerate(points):
            if i == j:
                continue
            if all(x >= y for x, y in zip(b, a)) and any(x != y for x, y in zip(b, a)):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def test_dominates_examples():
    assert pareto.dominates((1, 0), (0, 0))
    assert not pareto.dominates((1, -1), (0, 0))
    assert not pareto.dominates((0, 0), (0, 0))


def test_compare_verdicts():
    assert pareto.compare((1, 1), (0, 0)) is pareto.Dominance.DOMINATES
    assert pareto.compare((0, 0), (1, 1)) is pareto.Dominance.DOMINATED
    assert pareto.compare((1, -1), (0, 0)) is pareto.Dominance.INCOMPARABLE
    assert pareto.compare((2, 2), (2, 2)) is pareto.Dominance.EQUAL


def test_compare_is_antisymmetric():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = tuple(rng.integers(-2, 3, size=3).tolist())
        b = tuple(rng.integers(-2, 3, size=3).tolist())
        assert pareto.dominates(a, b) == (
            pareto.compare(b, a) is pareto.Dominance.DOMINATED
        )


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        pareto.dominates((1, 2), (1, 2, 3))


def test_soland_sample_all_efficient():
    assert pareto.pareto_filter([(0, 0), (1, -1), (4, -8)]) == [0, 1, 2]


def test_dominated_point_removed():
    assert pareto.pareto_filter([(0, 0), (1, 0)]) == [1]


def test_duplicates_of_an_efficient_value_all_survive():
    cloud = [(1.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.5, 0.5), (0.5, 0.4)]
    assert pareto.pareto_filter(cloud) == [0, 1, 2, 3]


def test_accepts_point_cloud_objects():
    cloud = problems.PointCloud(criterion_dim=2, points=((0.0, 0.0), (1.0, 0.0)))
    assert pareto.pareto_filter(cloud) == [1]


def test_empty_cloud_rejected():
    with pytest.raises(ValueError):
        pareto.pareto_filter([])


def _random_cloud(rng, n, p):
    if rng.random() < 0.5:
        # small integer coordinates create plenty of ties and duplicates
        return [tuple(float(v) for v in rng.integers(-3, 4, size=p))
                for _ in range(n)]
    return [tuple(float(v) for v in rng.normal(size=p)) for _ in range(n)]


def test_filter_matches_brute_force_on_random_clouds():
    rng = np.random.default_rng(20250811)
    for case in range(200):
        n = int(rng.integers(1, 501)) if case < 20 else int(rng.integers(1, 121))
        p = int(rng.integers(2, 5))
        cloud = _random_cloud(rng, n, p)
        assert pareto.pareto_filter(cloud) == brute_force_filter(cloud)


def test_two_criteria_path_agrees_with_general_path():
    rng = np.random.default_rng(99)
    for _ in range(100):
        n = int(rng.integers(1, 200))
        cloud = _random_cloud(rng, n, 2)
        assert pareto._filter_two_criteria(problems.point_rows(cloud)) == sorted(
            pareto._filter_general(problems.point_rows(cloud))
        )


def test_filter_invariant_under_permutation():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 120))
        p = int(rng.integers(2, 4))
        cloud = _random_cloud(rng, n, p)
        base = set(pareto.pareto_filter(cloud))
        perm = rng.permutation(n)
        shuffled = [cloud[i] for i in perm]
        mapped = {int(perm[i]) for i in pareto.pareto_filter(shuffled)}
        assert mapped == base
