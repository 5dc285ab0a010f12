import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from critgraph.errors import InputError, ParameterError
from critgraph.kernels import (
    KernelSpec,
    WeightMatrix,
    build_weight_matrix,
    condition_diagnostics,
    cosh_profile,
    eval_kernel,
    tanh_root,
)

unit = st.floats(0.0, 1.0, allow_nan=False)
SMOOTH = [
    KernelSpec("constant"),
    KernelSpec("min"),
    KernelSpec("max"),
    KernelSpec("sum_pow", a=1.5),
    KernelSpec("eta_plus_max_pow", a=0.7, eta=0.3),
]


def test_min_kernel_at_corner():
    assert eval_kernel(KernelSpec("min", c=math.pi ** 2 / 4), 1.0, 1.0) == pytest.approx(2.4674011, abs=1e-7)


def test_constant_and_max():
    assert eval_kernel(KernelSpec("constant"), 0.3, 0.9) == 1.0
    assert eval_kernel(KernelSpec("max"), 0.25, 0.75) == 0.75


@pytest.mark.parametrize("spec", SMOOTH + [KernelSpec("max_neg_pow", a=0.5), KernelSpec("absdiff_neg_pow", a=0.2)])
@given(x=unit, y=unit)
@settings(max_examples=50, deadline=None)
def test_symmetric_and_nonnegative(spec, x, y):
    a = eval_kernel(spec, x, y, cap=1e6)
    assert a == eval_kernel(spec, y, x, cap=1e6)
    assert a >= 0 and math.isfinite(a)


def test_singular_value_is_capped():
    spec = KernelSpec("absdiff_neg_pow", a=0.2)
    assert eval_kernel(spec, 0.4, 0.4, cap=100.0) == 100.0
    assert math.isinf(eval_kernel(spec, 0.4, 0.4))


@pytest.mark.parametrize("family,a", [("max_neg_pow", 0.7), ("max_neg_pow", 0.0), ("absdiff_neg_pow", 0.34)])
def test_parameter_ranges(family, a):
    with pytest.raises(ParameterError):
        KernelSpec(family, a=a)


def test_negative_normalization_rejected():
    with pytest.raises(ParameterError):
        KernelSpec("min", c=-1.0)


def test_nan_input():
    with pytest.raises(InputError):
        eval_kernel(KernelSpec("min"), float("nan"), 0.5)


def test_tabulated_bilinear():
    t = np.array([[0.0, 1.0], [1.0, 2.0]])
    spec = KernelSpec("tabulated", table=t)
    # bilinear on a 2x2 grid is x + y here
    assert eval_kernel(spec, 0.25, 0.5) == pytest.approx(0.75)
    with pytest.raises(ParameterError):
        KernelSpec("tabulated", table=np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_spec_text_round_trip():
    spec = KernelSpec("eta_plus_max_pow", a=0.5, eta=0.2, c=1.3, lam=-0.4)
    assert KernelSpec.from_text(spec.to_text()) == spec
    tab = KernelSpec("tabulated", table=np.eye(3) + 1)
    back = KernelSpec.from_text(tab.to_text())
    assert np.array_equal(back.table, tab.table)


def test_grid_constant():
    wm = build_weight_matrix(KernelSpec("constant"), None, 3)
    assert np.array_equal(wm.beta, 1 - np.eye(3))


def test_grid_min_values():
    b = build_weight_matrix(KernelSpec("min"), None, 4).beta
    # 1-indexed (1,2), (3,4), (1,4)
    assert b[0, 1] == 0.25 and b[2, 3] == 0.75 and b[0, 3] == 0.25


def test_grid_window_example():
    z0 = tanh_root()
    W = KernelSpec("max", c=1 / z0)
    wm = build_weight_matrix(W, W.scaled(1.0), 100)
    assert wm.beta[99, 49] == pytest.approx((1 / z0) * (1 + 100 ** (-1 / 3)), rel=1e-12)


def test_uniform_scheme_sorted_and_seeded():
    W = KernelSpec("min")
    a = build_weight_matrix(W, None, 50, "uniform-order-stat", seed=5)
    b = build_weight_matrix(W, None, 50, "uniform-order-stat", seed=5)
    assert np.array_equal(a.beta, b.beta)
    assert np.all(np.diff(a.points) >= 0)
    with pytest.raises(ParameterError):
        build_weight_matrix(W, None, 50, "uniform-order-stat")
    with pytest.raises(ParameterError):
        build_weight_matrix(W, None, 50, "grid", seed=3)


def test_cell_average_matches_grid_for_cellwise_constant_kernel():
    spec = KernelSpec("constant", c=2.5)
    g = build_weight_matrix(spec, None, 7, "grid").beta
    c = build_weight_matrix(spec, None, 7, "cell-average").beta
    assert np.allclose(g, c, rtol=0, atol=1e-14)


def test_cell_average_exact_for_linear_kernel():
    # Gauss-Legendre averages of x + y equal the cell-midpoint values
    n = 8
    wm = build_weight_matrix(KernelSpec("sum_pow", a=1.0), None, n, "cell-average")
    mid = (np.arange(n) + 0.5) / n
    expect = mid[:, None] + mid[None, :]
    np.fill_diagonal(expect, 0.0)
    assert np.allclose(wm.beta, expect, atol=1e-14)


def test_cell_average_singular_is_finite():
    wm = build_weight_matrix(KernelSpec("absdiff_neg_pow", a=0.25), None, 20, "cell-average")
    assert np.isfinite(wm.beta).all()
    assert wm.beta.max() <= 20 ** (2 / 3)


@given(lam1=st.floats(-3, 3), lam2=st.floats(-3, 3))
@settings(max_examples=25, deadline=None)
def test_monotone_in_window(lam1, lam2):
    lo, hi = sorted((lam1, lam2))
    W = KernelSpec("min", c=math.pi ** 2 / 4)
    a = build_weight_matrix(W, W.scaled(lo), 30).beta
    b = build_weight_matrix(W, W.scaled(hi), 30).beta
    assert np.all(b >= a)


@pytest.mark.parametrize("scheme", ["grid", "cell-average", "uniform-order-stat"])
def test_symmetry_zero_diagonal(scheme):
    seed = 1 if scheme == "uniform-order-stat" else None
    W = KernelSpec("sum_pow", a=0.5)
    wm = build_weight_matrix(W, W.scaled(-2.0), 40, scheme, seed)
    assert np.array_equal(wm.beta, wm.beta.T)
    assert np.all(np.diag(wm.beta) == 0)
    assert np.all(wm.beta >= 0)


def test_weight_matrix_validation():
    with pytest.raises(InputError):
        WeightMatrix(2, np.array([[0.0, 1.0], [2.0, 0.0]]), "explicit")
    with pytest.raises(InputError):
        WeightMatrix(2, np.array([[1.0, 1.0], [1.0, 0.0]]), "explicit")


def test_weight_matrix_csv_round_trip():
    wm = build_weight_matrix(KernelSpec("min"), None, 6)
    text = wm.to_csv()
    assert text.splitlines()[0] == "# n=6 scheme=grid seed="
    back = WeightMatrix.from_csv(text)
    assert np.array_equal(back.beta, wm.beta)


def test_tanh_root():
    z0 = tanh_root()
    assert math.tanh(1 / math.sqrt(z0)) == pytest.approx(math.sqrt(z0), abs=1e-14)
    # the cosh profile is L2-normalized on [0, 1]
    x = (np.arange(20000) + 0.5) / 20000
    assert np.mean(cosh_profile(x, z0) ** 2) == pytest.approx(1.0, abs=1e-8)


def test_diagnostics_constant_kernel():
    n = 200
    wm = build_weight_matrix(KernelSpec("constant"), None, n)
    rep = condition_diagnostics(wm, KernelSpec("constant"), None, delta0=0.2)
    assert rep.l3_norm == pytest.approx((n * n - n) / n ** 2)
    assert rep.small_pair_count == 0
    # W_n differs from W only on the diagonal: deviation n^{1/3}/n per diagonal entry
    assert rep.norm_deviation == pytest.approx(n ** (-2 / 3), rel=1e-6)


def test_diagnostics_small_pairs_min_kernel():
    n = 1000
    wm = build_weight_matrix(KernelSpec("min"), None, n)
    rep = condition_diagnostics(wm, KernelSpec("min"), None, delta0=0.25)
    i = np.arange(1, n + 1)
    small = (np.minimum(i[:, None], i[None, :]) / n <= n ** (-0.25))
    np.fill_diagonal(small, False)
    assert rep.small_pair_count == small.sum()


def test_diagnostics_full_exceptional_set():
    n = 50
    wm = build_weight_matrix(KernelSpec("min"), None, n)
    rep = condition_diagnostics(wm, KernelSpec("min"), None, B=range(n))
    assert rep.small_pair_count == 0
    assert rep.b_mass == pytest.approx((wm.beta ** 2).sum())
    for v in (rep.l3_norm, rep.theta_stat, rep.norm_deviation, rep.b_mass):
        assert v >= 0


def test_diagnostics_delta_range():
    wm = build_weight_matrix(KernelSpec("min"), None, 10)
    with pytest.raises(ParameterError):
        condition_diagnostics(wm, KernelSpec("min"), None, delta0=0.4)


def test_norm_deviation_trend():
    W = KernelSpec("min", c=math.pi ** 2 / 4)
    H = W.scaled(1.0)
    devs = []
    for n in (250, 500, 1000, 2000):
        wm = build_weight_matrix(W, H, n)
        devs.append(condition_diagnostics(wm, W, H).norm_deviation)
    assert all(b <= a * 1.01 for a, b in zip(devs, devs[1:]))
