import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nngraph.errors import DomainError, TieError
from nngraph.generators import generate_circulant
from nngraph.metric import (Dataset, SymmetricMatrix, complexity_term, gap_profile, is_metric, nn_sets,
                            quasi_metric_constant, triangle_violation, true_nn_graph)

from conftest import line_dataset, random_dataset


# -- SymmetricMatrix ------------------------------------------------------------


def test_symmetric_write_sets_both_entries():
    m = SymmetricMatrix(3)
    m[0, 2] = 5.0
    assert m[2, 0] == 5.0 and m[0, 2] == 5.0


def test_symmetric_diagonal_roles():
    up = SymmetricMatrix(3, fill=math.inf, diagonal=math.inf)
    lo = SymmetricMatrix(3, fill=-math.inf, diagonal=-math.inf)
    assert np.all(np.diag(up.values) == math.inf)
    assert np.all(np.diag(lo.values) == -math.inf)


def test_symmetric_values_are_read_only():
    m = SymmetricMatrix(2)
    with pytest.raises(ValueError):
        m.values[0, 1] = 1.0


def test_lower_triangle_round_trip():
    m = SymmetricMatrix(4)
    m[3, 1] = 2.5
    m[2, 0] = -1.0
    back = SymmetricMatrix.from_lower_triangle(4, m.lower_triangle())
    np.testing.assert_array_equal(back.values, m.values)


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.floats(-1e6, 1e6)), max_size=40))
def test_symmetry_survives_any_write_sequence(writes):
    m = SymmetricMatrix(6)
    for i, j, v in writes:
        if i != j:
            m[i, j] = v
    np.testing.assert_array_equal(m.values, m.values.T)


# -- Dataset --------------------------------------------------------------------


def test_dataset_rejects_asymmetric_and_negative():
    with pytest.raises(DomainError):
        Dataset.from_array([[0, -1], [-1, 0]])


def test_dataset_rejects_triangle_violation():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(DomainError):
        Dataset.from_array(d)
    assert Dataset.from_array(d, metric=False).n == 3


def test_dataset_json_is_lower_triangle_row_major(collinear):
    doc = collinear.to_json()
    assert doc["n"] == 4
    assert doc["distances"] == [1.0, 3.0, 2.0, 7.0, 6.0, 4.0]
    back = Dataset.from_json(json.loads(json.dumps(doc)))
    np.testing.assert_array_equal(back.d, collinear.d)


def test_dataset_save_load(tmp_path, collinear):
    p = tmp_path / "d.json"
    collinear.save(p)
    np.testing.assert_array_equal(Dataset.load(p).d, collinear.d)


def test_triangle_violation_zero_for_metric(collinear):
    assert triangle_violation(collinear.d) == 0.0
    assert is_metric(collinear.d)


# -- nearest neighbors and gaps ---------------------------------------------------


def test_true_nn_collinear(collinear):
    np.testing.assert_array_equal(true_nn_graph(collinear), [1, 0, 1, 2])


def test_true_nn_two_points():
    np.testing.assert_array_equal(true_nn_graph(Dataset.from_array([[0, 2.5], [2.5, 0]])), [1, 0])


def test_true_nn_equilateral_ties():
    d = np.ones((3, 3)) - np.eye(3)
    with pytest.raises(TieError) as exc:
        true_nn_graph(Dataset.from_array(d))
    assert exc.value.point == 0 and set(exc.value.tied) == {1, 2}
    assert nn_sets(Dataset.from_array(d))[0] == {1, 2}


@pytest.mark.parametrize("n", range(2, 13))
def test_true_nn_matches_brute_force(n):
    for seed in range(5):
        ds = random_dataset(n, seed)
        brute = [min((k for k in range(n) if k != i), key=lambda k: ds.d[i, k]) for i in range(n)]
        np.testing.assert_array_equal(true_nn_graph(ds), brute)


def test_gap_profile_collinear(collinear):
    g = gap_profile(collinear)
    assert g.gaps[0, 2] == 2.0
    assert g.gaps[0, 3] == 6.0
    assert g.gaps[0, 1] == 2.0


def test_gap_profile_two_clusters():
    r, D = 1.0, 50.0
    d = np.full((4, 4), D)
    d[0, 1] = d[1, 0] = d[2, 3] = d[3, 2] = r
    np.fill_diagonal(d, 0.0)
    g = gap_profile(Dataset.from_array(d))
    assert g.gaps[0, 2] == D - r and g.gaps[0, 3] == D - r


def test_gap_profile_circulant():
    g = gap_profile(generate_circulant(3, 1.0, 1.0))
    for j in range(6):
        others = [g.gaps[j, k] for k in range(6) if k not in (j, g.nn[j])]
        assert sorted(others) == [0.5, 0.5, 1.0, 1.0]
        assert g.gaps[j, g.nn[j]] == 0.5


@pytest.mark.parametrize("n", [3, 5, 8, 12])
def test_gap_nn_equals_smallest_other_gap(n):
    ds = random_dataset(n, n)
    g = gap_profile(ds)
    for j in range(n):
        others = [k for k in range(n) if k not in (j, g.nn[j])]
        assert g.gaps[j, g.nn[j]] == min(g.gaps[j, k] for k in others)


# -- complexity term ---------------------------------------------------------------


def test_complexity_term_frozen():
    assert complexity_term(10, 0.1, 0.5) == pytest.approx(30.40360983816832944588, rel=1e-14)


def test_complexity_term_unit():
    # n^2 / delta = e with gap 1 gives log(e) = 1
    assert complexity_term(1, 1 / math.e, 1.0) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("gap,delta", [(0.0, 0.1), (-1.0, 0.1), (1.0, 0.0), (1.0, 1.0)])
def test_complexity_term_domain(gap, delta):
    with pytest.raises(DomainError):
        complexity_term(10, delta, gap)


@given(st.integers(2, 500), st.floats(1e-4, 0.99), st.floats(1e-6, 10.0))
def test_complexity_term_decreasing_on_valid_range(n, delta, gap):
    upper = n * n / (delta * math.e ** 2)
    g1 = min(gap, upper)
    g2 = min(g1 * 1.01, upper)
    if g2 > g1:
        assert complexity_term(n, delta, g2) < complexity_term(n, delta, g1)
    assert complexity_term(n, delta, g1) >= 0


def test_complexity_term_blows_up_at_zero_gap():
    assert complexity_term(10, 0.1, 1e-8) > 1e16


# -- quasi-metric constant -----------------------------------------------------------


def test_quasi_metric_collinear_is_one():
    assert quasi_metric_constant(line_dataset([0, 1, 2])) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_quasi_metric_at_most_one_for_metrics(seed):
    assert quasi_metric_constant(random_dataset(7, seed)) <= 1.0 + 1e-12


def test_quasi_metric_detects_violation():
    d = np.array([[0, 1, 3], [1, 0, 1], [3, 1, 0]], dtype=float)
    assert quasi_metric_constant(Dataset.from_array(d, metric=False)) == 1.5


def test_quasi_metric_circulant():
    # the six-point circulant is strictly inside the triangle inequality
    assert quasi_metric_constant(generate_circulant(3, 1.0, 1.0)) == pytest.approx(0.8)


def test_quasi_metric_domain():
    with pytest.raises(DomainError):
        quasi_metric_constant(line_dataset([0, 1]))
    with pytest.raises(DomainError):
        quasi_metric_constant(line_dataset([0, 0, 1]))
