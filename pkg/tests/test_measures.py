import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axivort import Constants, DensitySpec, ValidationError, make_measure, sample_density

C = Constants()


def test_single_atom():
    m = make_measure([[1.0, 1.0]], [1.0], C)
    assert m.n_atoms == 1
    assert m.weights[0] == 1.0


def test_duplicate_merge():
    m = make_measure([[1.0, 1.0], [1.0, 1.0]], [0.5, 0.5], C)
    assert m.n_atoms == 1
    assert m.weights[0] == pytest.approx(1.0, abs=1e-15)


def test_near_duplicate_merge_keeps_first_position():
    m = make_measure([[1.0, 1.0], [1.0 + 5e-13, 1.0]], [0.25, 0.75], C)
    assert m.n_atoms == 1
    assert m.atoms[0, 0] == 1.0


def test_out_of_box_error():
    with pytest.raises(ValidationError):
        make_measure([[5.0, 1.0]], [1.0], C)


def test_weight_sum_error():
    with pytest.raises(ValidationError):
        make_measure([[1.0, 1.0]], [0.9], C)


def test_small_weight_defect_renormalized():
    m = make_measure([[1.0, 1.0], [2.0, 1.0]], [0.5, 0.5 + 5e-10], C)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_empty_error():
    with pytest.raises(ValidationError):
        make_measure(np.empty((0, 2)), [], C)


def test_negative_weight_error():
    with pytest.raises(ValidationError):
        make_measure([[1.0, 1.0], [2.0, 1.0]], [1.1, -0.1], C)


def test_make_measure_idempotent():
    m = make_measure([[1.0, 0.5], [2.0, 0.25], [1.0, 0.5]], [0.25, 0.5, 0.25], C)
    m2 = make_measure(m.atoms, m.weights, C)
    np.testing.assert_array_equal(m.atoms, m2.atoms)
    np.testing.assert_array_equal(m.weights, m2.weights)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 4), st.floats(0, 4)), min_size=1, max_size=8))
def test_make_measure_idempotent_property(points):
    n = len(points)
    m = make_measure(points, np.full(n, 1.0 / n), C)
    m2 = make_measure(m.atoms, m.weights, C)
    np.testing.assert_array_equal(m.atoms, m2.atoms)
    np.testing.assert_array_equal(m.weights, m2.weights)
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(m.atoms >= 0) and np.all(m.atoms <= C.R0)


def test_json_round_trip():
    m = make_measure([[1.0, 0.5], [2.0, 0.25]], [0.25, 0.75], C)
    m2 = type(m).from_dict(m.to_dict(), C)
    np.testing.assert_array_equal(m.atoms, m2.atoms)
    np.testing.assert_array_equal(m.weights, m2.weights)


def test_support_bound():
    m = make_measure([[1.0, 0.5], [2.0, 2.5]], [0.25, 0.75], C)
    assert m.support_bound() == 2.5


def test_uniform_box_four_atoms():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 1.0), (0.0, 1.0)))
    m = sample_density(spec, 4, C)
    np.testing.assert_allclose(
        m.atoms, [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]], atol=1e-15)
    np.testing.assert_allclose(m.weights, 0.25)


def test_uniform_box_single_atom():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 1.0), (0.0, 1.0)))
    m = sample_density(spec, 1, C)
    np.testing.assert_allclose(m.atoms, [[0.5, 0.5]], atol=1e-15)


def test_sample_density_discards_excess_cells():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 1.0), (0.0, 1.0)))
    m = sample_density(spec, 3, C)
    assert m.n_atoms == 3
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_sample_density_zero_error():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(ValidationError):
        sample_density(spec, 0, C)


def test_invalid_box_error():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 5.0), (0.0, 1.0)))
    with pytest.raises(ValidationError):
        sample_density(spec, 4, C)


def test_product_beta_mean_against_monte_carlo():
    spec = DensitySpec(kind="product-beta", box=((0.0, 1.0), (0.0, 1.0)),
                       shape=(2.0, 2.0, 2.0, 2.0))
    m = sample_density(spec, 16, C)
    rng = np.random.default_rng(0)
    mc = np.column_stack([rng.beta(2.0, 2.0, 10 ** 6), rng.beta(2.0, 2.0, 10 ** 6)])
    mc_mean = mc.mean(axis=0)
    emp = m.weights @ m.atoms
    assert np.max(np.abs(emp - mc_mean)) < 0.05


def test_large_sample_valid():
    spec = DensitySpec(kind="uniform-box", box=((0.0, 2.0), (0.0, 2.0)))
    m = sample_density(spec, 10_000, C)
    assert m.n_atoms == 10_000
    assert m.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(m.atoms >= 0) and np.all(m.atoms <= C.R0)
