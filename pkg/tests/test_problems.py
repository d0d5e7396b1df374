import json

import pytest

from paretocert import problems
from paretocert.errors import (
    DimensionError,
    ExprSyntaxError,
    SchemaError,
    UnknownBuiltin,
)

SOLAND_DOC = {
    "type": "analytic",
    "decision_dim": 1,
    "criterion_dim": 2,
    "domain": [[0, 4]],
    "criteria": ["x0^2", "-x0^3"],
    "constraints": {"ineq": ["-y0"], "eq": ["y1 + y0^1.5"]},
}


def test_load_analytic_problem():
    problem = problems.load_problem(json.dumps(SOLAND_DOC))
    assert isinstance(problem, problems.AnalyticProblem)
    assert problem.decision_dim == 1
    assert problem.criterion_dim == 2
    assert problem.domain == ((0.0, 4.0),)
    assert problem.has_constraints
    assert problem.criteria_at([2.0]) == (4.0, -8.0)


def test_load_cloud():
    doc = {"type": "cloud", "criterion_dim": 2, "points": [[0, 0], [1, -1]]}
    cloud = problems.load_problem(json.dumps(doc))
    assert isinstance(cloud, problems.PointCloud)
    assert len(cloud) == 2
    assert cloud.points == ((0.0, 0.0), (1.0, -1.0))


def test_missing_criteria_is_schema_error():
    doc = dict(SOLAND_DOC)
    del doc["criteria"]
    with pytest.raises(SchemaError):
        problems.load_problem(json.dumps(doc))


def test_expression_errors_carry_field_path():
    doc = dict(SOLAND_DOC)
    doc["criteria"] = ["x0^2", "x0^^3"]
    with pytest.raises(ExprSyntaxError) as err:
        problems.load_problem(json.dumps(doc))
    assert "criteria[1]" in str(err.value)


def test_criterion_dim_must_be_at_least_two():
    doc = dict(SOLAND_DOC)
    doc["criterion_dim"] = 1
    doc["criteria"] = ["x0^2"]
    with pytest.raises(SchemaError):
        problems.load_problem(json.dumps(doc))


def test_invalid_json():
    with pytest.raises(SchemaError):
        problems.load_problem("{not json")


def test_non_finite_point_rejected():
    doc = {"type": "cloud", "criterion_dim": 2, "points": [[0, 1e400]]}
    with pytest.raises(SchemaError):
        problems.load_problem(json.dumps(doc))


def test_builtin_soland_matches_document_form():
    problem = problems.builtin("soland")
    assert problem.criteria_at([2.0]) == (4.0, -8.0)
    loaded = problems.load_problem(json.dumps(SOLAND_DOC))
    assert problem.digest() == loaded.digest()


def test_unknown_builtin():
    with pytest.raises(UnknownBuiltin):
        problems.builtin("nope")


def test_sample_explicit_grid():
    problem = problems.builtin("soland")
    grid = problems.GridSpec(((problems.AxisSpec.explicit([0.0, 1.0, 2.0]),),))
    cloud = problems.sample_criterion_space(problem, grid)
    assert cloud.points == ((0.0, 0.0), (1.0, -1.0), (4.0, -8.0))
    assert cloud.decisions == ((0.0,), (1.0,), (2.0,))


def test_sample_geometric_grid():
    problem = problems.builtin("soland")
    grid = problems.GridSpec(((problems.AxisSpec.geometric(0.0, 20),),))
    cloud = problems.sample_criterion_space(problem, grid)
    assert len(cloud) == 21  # the anchor plus twenty offsets (negatives clipped)
    ys = [pt[0] for pt in cloud.points]
    assert min(ys) == 0.0
    assert sorted(ys)[1] == 2.0 ** -40


def test_zero_resolution_is_schema_error():
    problem = problems.builtin("soland")
    grid = problems.GridSpec(((problems.AxisSpec.uniform(0),),))
    with pytest.raises(SchemaError):
        problems.sample_criterion_space(problem, grid)
    grid = problems.GridSpec(((problems.AxisSpec.geometric(0.0, 0),),))
    with pytest.raises(SchemaError):
        problems.sample_criterion_space(problem, grid)


def test_sampled_images_satisfy_constraint_description():
    problem = problems.builtin("soland")
    cloud = problems.sample_criterion_space(problem, problems.GridSpec.uniform(1, 101))
    for y in cloud.points:
        g, h = problem.constraint_values(y)
        assert g[0] <= 1e-9
        assert abs(h[0]) <= 1e-9


def test_inconsistent_constraints_surface_during_sampling():
    doc = dict(SOLAND_DOC)
    doc["constraints"] = {"ineq": [], "eq": ["y1 - y0"]}  # wrong description
    problem = problems.load_problem(json.dumps(doc))
    with pytest.raises(SchemaError):
        problems.sample_criterion_space(problem, problems.GridSpec.uniform(1, 5))


def test_sampling_is_deterministic_bit_for_bit():
    problem = problems.builtin("soland")
    grid = problems.GridSpec(
        ((problems.AxisSpec.uniform(64), problems.AxisSpec.geometric(1.0, 12)),)
    )
    one = problems.sample_criterion_space(problem, grid)
    two = problems.sample_criterion_space(problem, grid)
    assert one.points == two.points
    assert one.decisions == two.decisions
    assert repr(one.points) == repr(two.points)


def test_grid_axis_count_must_match():
    problem = problems.builtin("soland")
    grid = problems.GridSpec.uniform(2, 3)
    with pytest.raises(SchemaError):
        problems.sample_criterion_space(problem, grid)


def test_point_rows_rejects_ragged_input():
    with pytest.raises(DimensionError):
        problems.point_rows([(0.0, 1.0), (1.0,)])
    with pytest.raises(ValueError):
        problems.point_rows([])
