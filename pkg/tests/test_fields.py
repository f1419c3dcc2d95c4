import math
import warnings

import numpy as np
import pytest

from hadrf.cubical import GridSpec
from hadrf.errors import EmbeddingError, QuadratureError, UnsupportedTransformError
from hadrf.fields import (
    CovarianceModel,
    FieldSpec,
    TransformSpec,
    apply_transform,
    second_spectral_moment,
    simulate,
    transform_mean,
)
from hadrf.hadwiger import GridFunction
from hadrf.piecewise import Piecewise1D


def stack(spec, n, comp=0):
    return np.stack([simulate(spec, i)[comp].values for i in range(n)])


@pytest.fixture(scope="module")
def small_samples():
    # h = l/5, so lag l is five vertices
    spec = FieldSpec(GridSpec((12, 12), 0.02), CovarianceModel(0.1), seed=11)
    return spec, stack(spec, 2000)


def test_covariance_and_moment():
    cov = CovarianceModel(0.5)
    assert cov(0.0) == 1.0
    assert cov(0.5) == pytest.approx(math.exp(-0.5))
    assert second_spectral_moment(CovarianceModel(1.0)) == 1.0
    assert second_spectral_moment(CovarianceModel(0.1)) == pytest.approx(100.0)
    assert second_spectral_moment(CovarianceModel(2.0)) == 0.25
    with pytest.raises(ValueError):
        CovarianceModel(0.0)
    with pytest.raises(ValueError):
        CovarianceModel(1.0, "matern")


def test_torus_sizing():
    spec = FieldSpec(GridSpec((257, 257), 1 / 256), CovarianceModel(0.1))
    assert spec.torus == (512, 512)
    assert all(t >= m for t, m in zip(spec.torus, spec.minimal_torus()))
    with pytest.raises(ValueError):
        FieldSpec(GridSpec((257, 257), 1 / 256), CovarianceModel(0.1), torus=(300, 300))


def test_embedding_failure_reported():
    # explicit torus meets the margin rule but wraps a long correlation
    with pytest.raises(EmbeddingError, match="enlarge"):
        simulate(FieldSpec(GridSpec((9, 9), 0.125), CovarianceModel(1.0), torus=(57, 57)), 0)


def test_coarse_spacing_warns():
    with pytest.warns(UserWarning):
        FieldSpec(GridSpec((9, 9), 0.125), CovarianceModel(0.2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        FieldSpec(GridSpec((9, 9), 0.02), CovarianceModel(0.2))


def test_field_spec_validation():
    grid = GridSpec((9, 9), 0.02)
    with pytest.raises(ValueError):
        FieldSpec(grid, CovarianceModel(0.2), components=0)
    with pytest.raises(ValueError):
        FieldSpec(grid, CovarianceModel(0.2), seed=-1)


def test_determinism():
    spec = FieldSpec(GridSpec((20, 30), 0.02), CovarianceModel(0.1), components=2, seed=5)
    a, b = simulate(spec, 3), simulate(spec, 3)
    for x, y in zip(a, b):
        assert np.array_equal(x.values, y.values)
    assert not np.array_equal(a[0].values, a[1].values)
    assert not np.array_equal(a[0].values, simulate(spec, 4)[0].values)
    other = FieldSpec(spec.grid, spec.cov, components=2, seed=6)
    assert not np.array_equal(a[0].values, simulate(other, 3)[0].values)


def test_marginal_law_at_a_vertex(small_samples):
    _, x = small_samples
    v = x[:, 5, 7]
    n = len(v)
    assert abs(v.mean()) < 4 / math.sqrt(n)
    assert abs(v.var(ddof=1) - 1) < 0.1


def test_stationarity_every_vertex():
    spec = FieldSpec(GridSpec((8, 8), 0.02), CovarianceModel(0.1), seed=3)
    x = stack(spec, 1000)
    n = x.shape[0]
    assert np.all(np.abs(x.mean(axis=0)) < 4 / math.sqrt(n))
    # variance of a sample variance under normality is 2 / (n - 1)
    assert np.all(np.abs(x.var(axis=0, ddof=1) - 1) < 4 * math.sqrt(2 / (n - 1)))


def _corr(a, b):
    n = len(a)
    r = np.corrcoef(a, b)[0, 1]
    # large-sample standard error of a correlation coefficient
    return r, (1 - r * r) / math.sqrt(n)


def test_lag_correlation_and_isotropy(small_samples):
    _, x = small_samples
    r_x, se_x = _corr(x[:, 2, 3], x[:, 7, 3])
    r_y, se_y = _corr(x[:, 2, 3], x[:, 2, 8])
    target = math.exp(-0.5)
    assert abs(r_x - target) < 3 * se_x
    assert abs(r_y - target) < 3 * se_y
    assert abs(r_x - r_y) < 3 * math.hypot(se_x, se_y)


def test_crop_margin_no_wrap():
    spec = FieldSpec(GridSpec((51, 51), 0.02), CovarianceModel(0.1), seed=2)
    x = stack(spec, 1000)
    extent = 1.0
    r, se = _corr(x[:, 0, 25], x[:, -1, 25])
    assert abs(r) <= CovarianceModel(0.1)(extent) + 3 / math.sqrt(x.shape[0])
    r, se = _corr(x[:, 25, 0], x[:, 25, -1])
    assert abs(r) <= CovarianceModel(0.1)(extent) + 3 / math.sqrt(x.shape[0])


@pytest.mark.parametrize("ell", [0.1, 2.0])
def test_second_spectral_moment_finite_difference(ell):
    h = ell / 20
    spec = FieldSpec(GridSpec((5, 5), h), CovarianceModel(ell), seed=8)
    x = stack(spec, 2000)
    d = (x[:, 3, 2] - x[:, 1, 2]) / (2 * h)
    n = len(d)
    var = d.var(ddof=1)
    se = var * math.sqrt(2 / (n - 1))
    assert abs(var - second_spectral_moment(spec.cov)) < 3 * se


def test_apply_transform_examples():
    grid = GridSpec((2, 2), 1.0)
    f = GridFunction(grid, np.array([[3.0, 0], [1, 2]]))
    g = GridFunction(grid, np.array([[4.0, 0], [1, 0]]))
    assert apply_transform(TransformSpec.identity(), [f]) is f
    assert apply_transform(TransformSpec.chi2(), [f, g]).values[0, 0] == 25.0
    sq = TransformSpec.piecewise(Piecewise1D.polynomial([0, 0, 1]))
    minus_two = GridFunction(grid, np.full((2, 2), -2.0))
    assert np.all(apply_transform(sq, [minus_two]).values == 4.0)
    with pytest.raises(UnsupportedTransformError):
        apply_transform(TransformSpec.identity(), [f, g])


def test_transform_mean_examples():
    assert transform_mean(TransformSpec.identity()) == 0.0
    assert transform_mean(TransformSpec.chi2(), 5) == 5.0
    sq = TransformSpec.piecewise(Piecewise1D.polynomial([0, 0, 1]))
    assert transform_mean(sq) == pytest.approx(1.0, rel=1e-12)
    quartic = TransformSpec.piecewise(Piecewise1D.polynomial([0, 0, 0, 0, 1]))
    assert transform_mean(quartic) == pytest.approx(3.0, rel=1e-12)
    relu = TransformSpec.piecewise(Piecewise1D.from_polynomials([0.0], [[0.0], [0.0, 1.0]]))
    assert transform_mean(relu) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-9)


def test_transform_mean_nonintegrable():
    blowup = TransformSpec.piecewise(Piecewise1D.from_callable(lambda x: np.exp(0.6 * x * x)))
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(QuadratureError):
            transform_mean(blowup)


def test_transform_json_roundtrip():
    fn = Piecewise1D.from_polynomials([0.0, 1.0], [[0.0], [0.0, 0.0, 1.0], [0.0, 2.0, -1.0]])
    spec = TransformSpec.piecewise(fn)
    back = TransformSpec.from_json(spec.to_json())
    x = np.linspace(-2, 3, 11)
    np.testing.assert_array_equal(back.function(x), fn(x))
    assert TransformSpec.from_json({"kind": "chi2"}) == TransformSpec.chi2()
    with pytest.raises(ValueError):
        TransformSpec.from_json({"kind": "cubic"})
