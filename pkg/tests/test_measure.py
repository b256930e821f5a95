import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rkhsmercer import DiscreteMeasure, RkhsError, build_block_measure, build_uniform_grid, lp_norm


def test_uniform_grid_midpoints():
    mu = build_uniform_grid(0, 1, 4)
    np.testing.assert_array_equal(mu.nodes[:, 0], [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_array_equal(mu.weights, [0.25] * 4)


def test_uniform_grid_single_cell():
    mu = build_uniform_grid(0, 1, 1)
    assert mu.nodes[0, 0] == 0.5 and mu.weights[0] == 1.0


@pytest.mark.parametrize("lo,hi,n", [(0, 2, 8), (-3, 7, 13), (0, 1, 1000)])
def test_uniform_grid_mass(lo, hi, n):
    mu = build_uniform_grid(lo, hi, n)
    assert abs(mu.total_mass - (hi - lo)) <= n * np.spacing(float(hi - lo))


def test_uniform_grid_mass_exact():
    assert build_uniform_grid(0, 2, 8).total_mass == 2.0


@pytest.mark.parametrize("lo,hi,n,code", [(1, 1, 3, "invalid-range"), (2, 1, 3, "invalid-range"),
                                          (0, 1, 0, "invalid-count")])
def test_uniform_grid_errors(lo, hi, n, code):
    with pytest.raises(RkhsError) as err:
        build_uniform_grid(lo, hi, n)
    assert err.value.code == code


def test_block_measure():
    mu = build_block_measure([1, 1, 1], 1)
    assert len(mu) == 3
    np.testing.assert_array_equal(mu.weights, [1, 1, 1])
    np.testing.assert_array_equal(mu.labels, [0, 1, 2])
    mu = build_block_measure([2, 4], 2)
    np.testing.assert_array_equal(mu.weights, [1, 1, 2, 2])
    mu = build_block_measure([0.5], 1)
    np.testing.assert_array_equal(mu.weights, [0.5])


def test_block_measure_blocks_separated():
    mu = build_block_measure([1, 2, 3], 4)
    for b in range(3):
        x = mu.nodes[mu.labels == b, 0]
        assert np.all((x >= 2 * b) & (x < 2 * b + 1))


@pytest.mark.parametrize("masses", [[1, 0], [-1], []])
def test_block_measure_invalid(masses):
    with pytest.raises(RkhsError) as err:
        build_block_measure(masses, 1)
    assert err.value.code == "invalid-mass"


def test_measure_rejects_zero_weight_and_duplicates():
    with pytest.raises(RkhsError):
        DiscreteMeasure([[0.0], [1.0]], [1.0, 0.0])
    with pytest.raises(RkhsError):
        DiscreteMeasure([[0.0], [0.0]], [1.0, 1.0])
    mu = DiscreteMeasure.from_nonnegative([[0.0], [1.0], [2.0]], [1.0, 0.0, 3.0])
    np.testing.assert_array_equal(mu.nodes[:, 0], [0.0, 2.0])


def test_measure_rejects_nonfinite_points():
    with pytest.raises(RkhsError):
        DiscreteMeasure([[np.nan]], [1.0])


def test_lp_norm_examples():
    unit = DiscreteMeasure([[0.0]], [1.0])
    assert lp_norm([1.0], unit, 2) == 1.0
    mu = DiscreteMeasure([[0.0], [1.0]], [1.0, 1.0])
    assert lp_norm([3, -4], mu, np.inf) == 4.0
    assert lp_norm([1, 1, 1, 1], build_uniform_grid(0, 1, 4), 1) == 1.0


def test_lp_norm_errors():
    mu = build_uniform_grid(0, 1, 3)
    with pytest.raises(RkhsError) as err:
        lp_norm([1, 2], mu, 2)
    assert err.value.code == "dimension-mismatch"
    with pytest.raises(RkhsError) as err:
        lp_norm([1, 2, 3], mu, 0.5)
    assert err.value.code == "invalid-p"


def test_lp_norm_general_p_matches_formula(rng):
    mu = build_uniform_grid(0, 1, 7)
    v = rng.standard_normal(7)
    expected = np.sum(mu.weights * np.abs(v) ** 3.5) ** (1 / 3.5)
    assert lp_norm(v, mu, 3.5) == pytest.approx(expected, rel=1e-13)


ps = st.one_of(st.just(np.inf), st.floats(1.0, 8.0))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), c=st.floats(-1e3, 1e3), p=ps)
def test_lp_norm_homogeneous(seed, c, p):
    rng = np.random.default_rng(seed)
    mu = DiscreteMeasure(np.arange(6.0), rng.uniform(0.1, 2.0, 6))
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    assert lp_norm(c * v, mu, p) == pytest.approx(abs(c) * lp_norm(v, mu, p), rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), p=st.floats(1.0, 10.0))
def test_holder(seed, p):
    rng = np.random.default_rng(seed)
    mu = DiscreteMeasure(np.arange(9.0), rng.uniform(0.01, 3.0, 9))
    v = rng.standard_normal(9)
    u = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    q = np.inf if p == 1.0 else p / (p - 1)
    lhs = abs(np.sum(mu.weights * v * np.conj(u)))
    assert lhs <= lp_norm(v, mu, p) * lp_norm(u, mu, q) + 1e-10


def test_measure_json_and_csv_roundtrip():
    mu = build_block_measure([0.3, 1.7], 3)
    assert DiscreteMeasure.from_dict(mu.to_dict()) == mu
    back = DiscreteMeasure.from_csv(mu.to_csv())
    np.testing.assert_array_equal(back.nodes, mu.nodes)
    np.testing.assert_array_equal(back.weights, mu.weights)
    assert mu.to_csv().splitlines()[0] == "x0,weight"


def test_measure_is_immutable():
    mu = build_uniform_grid(0, 1, 3)
    with pytest.raises(ValueError):
        mu.weights[0] = 5.0
