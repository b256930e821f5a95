import numpy as np
import pytest

from rkhsmercer import (CarrierMap, DiscreteMeasure, KernelSpec, RkhsError, adjoint_apply,
                        apply_integral_operator, block_pair, build_uniform_grid, carleman_report,
                        decompose, forward_apply, frame_operator, hs_diagnostic, integral_operator,
                        interpolate, opnorm_estimate, verify_factorization)
from rkhsmercer.operator import factorization_tolerance, frame_spectrum
from rkhsmercer.rkhs import RkhsElement

UNIT = DiscreteMeasure([[0.3]], [1.0])
GRID4 = build_uniform_grid(0, 1, 4)


def test_apply_examples():
    mu = build_uniform_grid(0, 1, 5)
    op = integral_operator(KernelSpec.constant(1), mu)
    np.testing.assert_allclose(apply_integral_operator(op, np.ones(5)), np.ones(5), rtol=1e-15)
    np.testing.assert_array_equal(apply_integral_operator(integral_operator(KernelSpec.gaussian(), mu),
                                                          np.zeros(5)), np.zeros(5))
    k, bm = block_pair([3, 2, 1])
    np.testing.assert_array_equal(apply_integral_operator(integral_operator(k, bm), [1, 0, 0]),
                                  [9, 0, 0])


def test_apply_dimension_mismatch():
    with pytest.raises(RkhsError):
        apply_integral_operator(integral_operator(KernelSpec.gaussian(), GRID4), [1, 2])


def test_adjoint_examples():
    cm = CarrierMap.build(KernelSpec.gaussian(), GRID4)
    assert not np.any(adjoint_apply(cm, np.zeros(4)).coefficients)
    np.testing.assert_array_equal(adjoint_apply(cm, np.ones(4)).coefficients, [0.25] * 4)
    one = CarrierMap.build(KernelSpec.brownian(), UNIT)
    f = adjoint_apply(one, [1.0])
    np.testing.assert_array_equal(f.anchors, [[0.3]])
    np.testing.assert_array_equal(f.coefficients, [1.0])


def test_forward_examples():
    k = KernelSpec.brownian()
    cm = CarrierMap.build(k, GRID4)
    x0 = GRID4.nodes[2]
    np.testing.assert_array_equal(forward_apply(cm, RkhsElement.section(k, x0)),
                                  cm.gram_on_nodes.entries[:, 2])
    assert not np.any(forward_apply(cm, RkhsElement.zero(k, [0.5])))
    y = np.array([0.3, -1.0, 2.0, 0.5])
    f = interpolate(k, GRID4.nodes, y)
    np.testing.assert_allclose(forward_apply(cm, f), y, atol=1e-12)
    with pytest.raises(RkhsError):
        forward_apply(cm, RkhsElement.section(KernelSpec.gaussian(), 0.5))


@pytest.mark.parametrize("pair", [
    block_pair([3, 2, 1]), block_pair([1.5, 0.5], [2.0, 0.25], 4),
    (KernelSpec.constant(1), build_uniform_grid(0, 3, 10)),
    (KernelSpec.gaussian(1), build_uniform_grid(0, 1, 64)),
])
def test_factorization(pair):
    cm = CarrierMap.build(*pair)
    assert verify_factorization(cm) <= factorization_tolerance(cm)
    assert verify_factorization(cm) <= 1e-12


def test_frame_operator_examples():
    k, bm = block_pair([3, 2, 1])
    cm = CarrierMap.build(k, bm)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(frame_operator(cm)).real)[::-1], [9, 4, 1])
    np.testing.assert_allclose(frame_spectrum(cm), [9, 4, 1])
    assert not np.any(frame_operator(CarrierMap.build(KernelSpec.constant(0), GRID4)))
    one = CarrierMap.build(KernelSpec.brownian(), DiscreteMeasure([[0.7]], [0.4]))
    np.testing.assert_allclose(frame_operator(one), [[0.4 * 0.7]])


def test_frame_operator_action(rng):
    # sum_i (S c)_i gamma_{x_i} equals A*A applied to sum_i c_i gamma_{x_i}
    k = KernelSpec.laplace(0.4)
    mu = DiscreteMeasure(np.sort(rng.uniform(0, 1, 7)), rng.uniform(0.1, 1, 7))
    cm = CarrierMap.build(k, mu)
    c = rng.standard_normal(7)
    via_maps = adjoint_apply(cm, forward_apply(cm, RkhsElement(k, mu.nodes, c))).coefficients
    np.testing.assert_allclose(frame_operator(cm) @ c, via_maps, rtol=1e-13)


def test_frame_spectrum_matches_operator(rng):
    k = KernelSpec.gaussian(0.3)
    mu = DiscreteMeasure(np.sort(rng.uniform(0, 1, 9)), rng.uniform(0.1, 1, 9))
    cm = CarrierMap.build(k, mu)
    op_eigs = np.sort(np.linalg.eigvals(cm.operator().entries).real)[::-1]
    np.testing.assert_allclose(frame_spectrum(cm), op_eigs, atol=1e-12)


def test_hs_examples():
    hs = hs_diagnostic(CarrierMap.build(KernelSpec.gaussian(), build_uniform_grid(0, 1, 16)))
    assert hs.trace_diag == pytest.approx(1.0, abs=1e-15) and hs.hs_flag
    hs = hs_diagnostic(CarrierMap.build(*block_pair([3, 2, 1])))
    assert hs.trace_diag == 14.0 and hs.eigen_sum == pytest.approx(14.0, rel=1e-14)
    hs = hs_diagnostic(CarrierMap.build(KernelSpec.constant(0), GRID4))
    assert (hs.trace_diag, hs.eigen_sum, hs.rel_defect) == (0.0, 0.0, 0.0)


def test_self_adjoint(rng):
    mu = DiscreteMeasure(np.sort(rng.uniform(0, 1, 20)), rng.uniform(0.01, 1, 20))
    op = integral_operator(KernelSpec.brownian(), mu)
    phi, psi = rng.standard_normal(20), rng.standard_normal(20)
    lhs = mu.inner(apply_integral_operator(op, phi), psi)
    rhs = mu.inner(phi, apply_integral_operator(op, psi))
    assert abs(lhs - rhs) <= 1e-11 * (1 + abs(lhs))


def test_opnorm_examples():
    mu = build_uniform_grid(0, 1, 6)
    op = integral_operator(KernelSpec.constant(1), mu)
    assert opnorm_estimate(op, 2).exact == pytest.approx(1.0, rel=1e-14)
    rep = opnorm_estimate(op, 1)
    assert rep.upper == pytest.approx(1.0) and rep.lower == pytest.approx(1.0) and rep.exact is None
    k, bm = block_pair([3, 2, 1])
    assert opnorm_estimate(integral_operator(k, bm), 2).exact == pytest.approx(9.0, rel=1e-14)
    assert opnorm_estimate(integral_operator(k, bm), "inf").exact == 9.0


def test_opnorm_invalid_p():
    with pytest.raises(RkhsError) as err:
        opnorm_estimate(integral_operator(KernelSpec.constant(1), GRID4), 3)
    assert err.value.code == "invalid-p"


@pytest.mark.parametrize("kernel", [KernelSpec.gaussian(0.2), KernelSpec.laplace(1.0),
                                    KernelSpec.brownian(), KernelSpec.constant(2.0)])
@pytest.mark.parametrize("p", [1, 2, np.inf])
def test_opnorm_bracket(kernel, p):
    op = integral_operator(kernel, build_uniform_grid(0, 1, 32))
    rep = opnorm_estimate(op, p, seed=5)
    assert rep.lower <= rep.upper * (1 + 1e-12)
    if rep.exact is not None:
        assert rep.lower <= rep.exact * (1 + 1e-12) and rep.exact <= rep.upper * (1 + 1e-12)


def test_opnorm_p1_lower_is_attained(rng):
    # random signs give genuine ratios: the lower bound is a value of |L phi|_1 / |phi|_inf
    mu = build_uniform_grid(0, 1, 8)
    op = integral_operator(KernelSpec.gaussian(0.3), mu)
    rep = opnorm_estimate(op, 1, trials=2000)
    signs = np.array(np.meshgrid(*[[-1, 1]] * 8)).reshape(8, -1)
    brute = np.max(np.sum(mu.weights[:, None] * np.abs(op.entries @ signs), axis=0))
    assert rep.lower <= brute * (1 + 1e-12) <= rep.upper * (1 + 1e-12)
    assert rep.lower == pytest.approx(brute, rel=1e-12)


def test_opnorm_p2_equals_top_eigenvalue():
    k = KernelSpec.laplace(0.5)
    mu = build_uniform_grid(0, 1, 40)
    rep = opnorm_estimate(integral_operator(k, mu), 2)
    assert rep.exact == pytest.approx(decompose(k, mu).top, rel=1e-12)


def test_carleman_examples():
    mu = build_uniform_grid(0, 1, 16)
    rep = carleman_report(CarrierMap.build(KernelSpec.brownian(), mu), 2)
    x = mu.nodes[:, 0]
    oracle = np.sqrt(np.sum(np.minimum.outer(x, x) ** 2 / 16, axis=1))
    np.testing.assert_allclose(rep.row_norms, oracle, rtol=1e-14)
    assert rep.max_row_norm <= 1
    assert not np.any(carleman_report(CarrierMap.build(KernelSpec.constant(0), mu), 2).row_norms)
    np.testing.assert_allclose(carleman_report(CarrierMap.build(KernelSpec.constant(1), mu), 1).row_norms,
                               1.0, rtol=1e-14)


def test_report_json():
    cm = CarrierMap.build(*block_pair([3, 2, 1]))
    assert hs_diagnostic(cm).to_dict()["trace_diag"] == 14.0
    assert opnorm_estimate(cm.operator(), "inf").to_dict()["p"] == "inf"
    assert carleman_report(cm, 2).to_dict()["max_row_norm"] == 9.0
