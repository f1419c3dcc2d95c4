import math

import numpy as np
import pytest
from scipy.integrate import quad

from hadrf.cubical import box_intrinsic_volumes
from hadrf.errors import UnsupportedTransformError
from hadrf.fields import TransformSpec
from hadrf.gkf import DomainSummary, expected_hadwiger, expected_intrinsic_volume, expected_valuation, metric_scale
from hadrf.gmf import chi2_level_cap
from hadrf.hadwiger import ValuationSpec
from hadrf.piecewise import Piecewise1D

IDENT = TransformSpec.identity()
CHI2 = TransformSpec.chi2()
UNIT = DomainSummary.box([1.0, 1.0], 1.0)
X = Piecewise1D.polynomial([0, 1])
ZERO = Piecewise1D.polynomial([0])


def test_metric_scale_examples():
    np.testing.assert_array_equal(metric_scale(UNIT), [1, 2, 1])
    np.testing.assert_allclose(metric_scale(DomainSummary.box([1, 1], 100.0)), [1, 20, 100])
    np.testing.assert_allclose(metric_scale(DomainSummary.box([2, 1], 4.0)), [1, 6, 8])
    with pytest.raises(ValueError):
        DomainSummary.box([1, 1], 0.0)


def test_expected_intrinsic_volume_examples():
    assert expected_intrinsic_volume(0, UNIT, IDENT, 1, 0.0) == pytest.approx(0.5 + 1 / math.pi, rel=1e-12)
    assert expected_intrinsic_volume(0, UNIT, IDENT, 1, 0.0) == pytest.approx(0.81831, abs=1e-5)
    assert expected_intrinsic_volume(2, UNIT, IDENT, 1, 0.0) == pytest.approx(0.5, rel=1e-14)
    assert abs(expected_intrinsic_volume(0, UNIT, IDENT, 1, 40.0)) < 1e-12
    s = np.array([-1.0, 0.0, 1.0])
    assert expected_intrinsic_volume(1, UNIT, IDENT, 1, s).shape == (3,)
    with pytest.raises(ValueError):
        expected_intrinsic_volume(3, UNIT, IDENT, 1, 0.0)
    with pytest.raises(UnsupportedTransformError):
        expected_intrinsic_volume(0, UNIT, TransformSpec.piecewise(X), 2, 0.0)


def test_expected_hadwiger_examples():
    assert expected_hadwiger(0, UNIT, IDENT) == pytest.approx(2 / math.sqrt(2 * math.pi), rel=1e-9)
    assert expected_hadwiger(0, UNIT, IDENT) == pytest.approx(0.797885, abs=1e-6)
    assert expected_hadwiger(2, UNIT, IDENT) == 0.0
    assert expected_hadwiger(0, UNIT, CHI2, 2) == pytest.approx(4.31831, abs=1e-5)
    assert expected_hadwiger(0, UNIT, CHI2, 2) == pytest.approx(4 + 1 / math.pi, rel=1e-12)
    assert expected_hadwiger(1, UNIT, IDENT, 1, "upper") == expected_hadwiger(1, UNIT, IDENT, 1, "lower")
    with pytest.raises(ValueError):
        expected_hadwiger(0, UNIT, IDENT, 1, "middle")


@pytest.mark.parametrize("F, k, mean", [(IDENT, 1, 0.0), (CHI2, 2, 2.0), (CHI2, 5, 5.0)])
def test_top_index_degeneracy(F, k, mean):
    d = DomainSummary.box([2.0, 3.0], 4.0)
    assert expected_hadwiger(2, d, F, k) == metric_scale(d)[2] * mean


def _sweep_oracle(i, d, F, k):
    # E of the level sweep, integrated by an independent quadrature of E mu_i{g >= s}
    mu_i = metric_scale(d)[i]
    ev = lambda s: float(expected_intrinsic_volume(i, d, F, k, s))
    if F.kind == "chi2":
        cap = chi2_level_cap(k)
        val, _ = quad(ev, 0.0, cap, points=[0.5, 1, 2, 4, 8, 16], limit=500, epsabs=0, epsrel=1e-11)
        return val
    pos, _ = quad(ev, 0.0, 38.0, points=[1, 2, 4], limit=500, epsabs=0, epsrel=1e-11)
    neg, _ = quad(lambda s: mu_i - ev(s), -38.0, 0.0, points=[-4, -2, -1], limit=500, epsabs=0, epsrel=1e-11)
    return pos - neg


@pytest.mark.parametrize("sides", [(1.0, 1.0), (2.0, 1.0)])
@pytest.mark.parametrize("lam", [1.0, 25.0])
@pytest.mark.parametrize("F, k", [(IDENT, 1), (CHI2, 2), (CHI2, 3)])
def test_level_sweep_consistency(sides, lam, F, k):
    d = DomainSummary.box(sides, lam)
    for i in range(3):
        got = expected_hadwiger(i, d, F, k)
        ref = _sweep_oracle(i, d, F, k)
        assert got == pytest.approx(ref, rel=1e-6, abs=1e-9 * max(1.0, abs(ref)))


def test_domain_scaling():
    a, b = 1.5, 0.7
    small = DomainSummary.box([a, b], 1.0)
    big = DomainSummary.box([2 * a, 2 * b], 1.0)
    np.testing.assert_array_equal(metric_scale(big), metric_scale(small) * 2.0 ** np.arange(3))
    # doubling the sides is the same as quadrupling lambda2
    faster = DomainSummary.box([a, b], 4.0)
    for i in range(3):
        for s in (-1.0, 0.3, 2.0):
            assert expected_intrinsic_volume(i, big, IDENT, 1, s) == expected_intrinsic_volume(i, faster, IDENT, 1, s)
    np.testing.assert_array_equal(box_intrinsic_volumes([2 * a, 2 * b]), metric_scale(faster))


def test_piecewise_identity_matches_identity():
    pw = TransformSpec.piecewise(X)
    for i in range(3):
        assert expected_hadwiger(i, UNIT, pw) == pytest.approx(expected_hadwiger(i, UNIT, IDENT), abs=1e-8)


def test_valuation_examples():
    d = DomainSummary.box([1.0, 2.0], 9.0)
    lin = ValuationSpec([X, X, X])
    assert expected_valuation(lin, d, IDENT) == pytest.approx(sum(expected_hadwiger(i, d, IDENT) for i in range(3)), abs=1e-9)
    only0 = ValuationSpec([X, ZERO, ZERO])
    assert expected_valuation(only0, UNIT, IDENT) == pytest.approx(0.79788, abs=1e-5)
    assert expected_valuation(ValuationSpec([ZERO, ZERO, ZERO]), UNIT, IDENT) == 0.0
    with pytest.raises(ValueError):
        expected_valuation(ValuationSpec([X, X]), UNIT, IDENT)


def test_valuation_square_of_gaussian_matches_chi2_k1():
    # c(x) = x^2 composed with the identity is chi-square with one component
    sq = Piecewise1D.polynomial([0, 0, 1])
    for i in range(3):
        v = ValuationSpec.single(2, i, sq)
        assert expected_valuation(v, UNIT, IDENT) == pytest.approx(expected_hadwiger(i, UNIT, CHI2, 1), rel=1e-7, abs=1e-9)


def test_chi2_composite_valuation():
    # c = identity routes through the composite code path, compared against the closed forms
    d = DomainSummary.box([1.0, 1.0], 4.0)
    for i in range(3):
        v = ValuationSpec.single(2, i, X)
        assert expected_valuation(v, d, CHI2, 3) == pytest.approx(expected_hadwiger(i, d, CHI2, 3), rel=1e-7)
    # clipped transform min(x, 1): mean is E min(chi2, 1), compare with quad
    clip = Piecewise1D.from_polynomials([1.0], [[0, 1], [1]])
    v = ValuationSpec.single(2, 2, clip)
    ref, _ = quad(lambda t: min(t, 1.0) * 0.5 * math.exp(-t / 2), 0, 80, points=[1.0])
    assert expected_valuation(v, d, CHI2, 2) == pytest.approx(metric_scale(d)[2] * ref, rel=1e-8)


def test_chi2_composite_needs_monotone():
    bump = Piecewise1D.from_polynomials([1.0], [[0, 1], [2, -1]])
    with pytest.raises(UnsupportedTransformError):
        expected_valuation(ValuationSpec.single(2, 0, bump), UNIT, CHI2, 2)
