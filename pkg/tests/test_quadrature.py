import math

import numpy as np
import pytest

from hadrf.errors import QuadratureError
from hadrf.quadrature import adaptive_integrate


def test_polynomial_exact():
    val = adaptive_integrate(lambda x: 3 * x**2, [0.0, 2.0])
    assert val == pytest.approx(8.0, rel=1e-14)


def test_gaussian_integral():
    val = adaptive_integrate(lambda x: np.exp(-x * x / 2), [-38.0, 38.0])
    assert val == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)


def test_kink_at_breakpoint():
    val = adaptive_integrate(np.abs, [-1.0, 0.0, 3.0])
    assert val == pytest.approx(5.0, rel=1e-14)


def test_sqrt_endpoint_singularity():
    # derivative blows up at 0, as for chi-square level sets near s = 0
    val = adaptive_integrate(np.sqrt, [0.0, 1.0])
    assert val == pytest.approx(2.0 / 3.0, rel=1e-8)


def test_kink_inside_panel_resolved_by_halving():
    val = adaptive_integrate(lambda x: np.abs(x - 0.3), [0.0, 1.0])
    assert val == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.7**2, rel=1e-8)


def test_degenerate_range():
    assert adaptive_integrate(np.sin, [1.0]) == 0.0
    assert adaptive_integrate(np.sin, [1.0, 1.0]) == 0.0


def test_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        adaptive_integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), [0.0, 1.0], max_doublings=3)
