import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import BUILTINS
from rkhsmercer import (KernelSpec, RkhsError, evaluate_at, evaluate_element, gram, interpolate,
                        reproducing_check, rkhs_inner)
from rkhsmercer.kernels import default_sampler
from rkhsmercer.rkhs import RkhsElement, reproducing_tolerance

B = KernelSpec.brownian()


def random_element(kernel, rng, m=None, complex_=False):
    m = m or int(rng.integers(1, 11))
    anchors = np.unique(default_sampler(kernel)(rng, m), axis=0)
    c = rng.standard_normal(len(anchors))
    if complex_:
        c = c + 1j * rng.standard_normal(len(anchors))
    return RkhsElement(kernel, anchors, c)


def test_inner_examples():
    s = RkhsElement.section(B, 0.5)
    assert rkhs_inner(s, s) == 0.5
    assert rkhs_inner(RkhsElement.zero(B, [0.2, 0.4]), RkhsElement.zero(B, [0.2, 0.4])) == 0.0
    f = RkhsElement(B, [0.25, 0.75], [1.0, 1.0])
    g = RkhsElement.section(B, 0.5)
    assert rkhs_inner(f, g) == pytest.approx(0.75)


def test_inner_kernel_mismatch():
    with pytest.raises(RkhsError) as err:
        rkhs_inner(RkhsElement.section(B, 0.5), RkhsElement.section(KernelSpec.gaussian(), 0.5))
    assert err.value.code == "kernel-mismatch"


def test_duplicate_anchor_rejected():
    with pytest.raises(RkhsError):
        RkhsElement(B, [0.5, 0.5], [1.0, -1.0])


def test_evaluate_examples():
    assert evaluate_element(RkhsElement.section(B, 1.0), 0.5) == 0.5
    assert evaluate_element(RkhsElement(B, [0.5], [2.0]), 0.25) == 0.5
    assert evaluate_element(RkhsElement.zero(B, [0.1, 0.9]), 0.3) == 0.0
    np.testing.assert_allclose(evaluate_at(RkhsElement.section(B, 1.0), [0.2, 0.5]), [0.2, 0.5])


def test_reproducing_examples():
    assert reproducing_check(RkhsElement.section(B, 0.5), [0.75]) == 0.0
    rng = np.random.default_rng(3)
    k = KernelSpec.gaussian(1.0)
    f = random_element(k, rng, m=10)
    probes = rng.uniform(0, 1, (100, 1))
    # brute-force oracle: explicit double summation on both sides
    lhs = [sum(c * np.exp(-(p[0] - a[0]) ** 2 / 2) for c, a in zip(f.coefficients, f.anchors))
           for p in probes]
    rhs = [sum(c * 1.0 * np.exp(-(p[0] - a[0]) ** 2 / 2) for c, a in zip(f.coefficients, f.anchors))
           for p in probes]
    assert np.max(np.abs(np.array(lhs) - rhs)) < 1e-10
    assert reproducing_check(f, probes) < 1e-10
    np.testing.assert_allclose(evaluate_at(f, probes), lhs, rtol=1e-13, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(sorted(BUILTINS)), seed=st.integers(0, 2 ** 32 - 1))
def test_inner_properties(name, seed):
    k = BUILTINS[name]
    rng = np.random.default_rng(seed)
    f = random_element(k, rng, complex_=True)
    g = random_element(k, rng, complex_=True)
    fg, gf = rkhs_inner(f, g), rkhs_inner(g, f)
    ff, gg = rkhs_inner(f, f), rkhs_inner(g, g)
    scale = 1.0 + abs(ff) + abs(gg)
    assert abs(fg - np.conj(gf)) <= 1e-12 * scale
    assert ff.real >= -1e-10 * scale and abs(ff.imag) <= 1e-12 * scale
    assert abs(fg) ** 2 <= ff.real * gg.real + 1e-9 * scale ** 2


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(sorted(BUILTINS)), x=st.floats(0, 5.9))
def test_section_norm_is_diagonal(name, x):
    k = BUILTINS[name]
    s = RkhsElement.section(k, x)
    assert rkhs_inner(s, s) == pytest.approx(k.diag([[x]])[0], rel=1e-14, abs=1e-300)


def test_reproducing_tolerance_contract(builtin, rng):
    f = random_element(builtin, rng)
    probes = default_sampler(builtin)(rng, 50)
    assert reproducing_check(f, probes) <= reproducing_tolerance(f, probes)


def test_interpolate_brownian():
    # hand solution of [[0.5, 0.5], [0.5, 1.0]] c = (0.5, 0.5): c = (1, 0)
    c_oracle = np.linalg.solve([[0.5, 0.5], [0.5, 1.0]], [0.5, 0.5])
    f, info = interpolate(B, [0.5, 1.0], [0.5, 0.5], full_output=True)
    np.testing.assert_allclose(f.coefficients, c_oracle, atol=1e-14)
    np.testing.assert_allclose(f.coefficients, [1.0, 0.0], atol=1e-14)
    assert info.residual < 1e-14 and info.rank == 2


def test_interpolate_zero_targets(builtin):
    f = interpolate(builtin, [0.1, 0.5, 2.5], [0, 0, 0])
    assert not np.any(f.coefficients)


def test_interpolate_constant_min_norm():
    f, info = interpolate(KernelSpec.constant(1), [0.1, 0.2, 0.3], [1, 1, 1], full_output=True)
    np.testing.assert_allclose(f.coefficients, [1 / 3] * 3, rtol=1e-14)
    assert info.rank == 1 and info.discarded == 2 and info.residual < 1e-14


def test_interpolate_all_cut():
    with pytest.raises(RkhsError) as err:
        interpolate(KernelSpec.constant(0), [0.1, 0.2], [1, 1])
    assert err.value.code == "all-eigenvalues-cut"


def test_interpolate_then_evaluate(rng):
    k = KernelSpec.laplace(0.3)
    pts = np.sort(rng.uniform(0, 1, 12))
    y = rng.standard_normal(12)
    f, info = interpolate(k, pts, y, full_output=True)
    vals = evaluate_at(f, pts)
    assert np.max(np.abs(vals - y)) <= info.residual + 1e-12
    assert info.residual < 1e-9


def test_element_json_roundtrip(rng):
    f = random_element(KernelSpec.gaussian(0.5), rng, complex_=True)
    g = RkhsElement.from_dict(f.to_dict())
    np.testing.assert_array_equal(g.coefficients, f.coefficients)
    assert g.kernel == f.kernel
