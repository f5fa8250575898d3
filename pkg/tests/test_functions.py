import mpmath
import numpy as np
import pytest

from srtf.errors import InvalidArgumentError
from srtf.functions import TEST_FUNCTIONS, franke, local_osc, quad_saddle, test_function_eval


def franke_mp(x, y):
    with mpmath.workdps(40):
        a, b = 9 * mpmath.mpf(x), 9 * mpmath.mpf(y)
        v = (mpmath.mpf("0.75") * mpmath.exp(-(a - 2) ** 2 / 4 - (b - 2) ** 2 / 4)
             + mpmath.mpf("0.75") * mpmath.exp(-(a + 1) ** 2 / 49 - (b + 1) / 10)
             + mpmath.mpf("0.5") * mpmath.exp(-(a - 7) ** 2 / 4 - (b - 3) ** 2 / 4)
             - mpmath.mpf("0.2") * mpmath.exp(-(a - 4) ** 2 - (b - 7) ** 2))
        return float(v)


def test_franke_origin():
    assert franke([0.0, 0.0])[0] == pytest.approx(0.766421, abs=5e-7)
    assert franke([0.0, 0.0])[0] == pytest.approx(franke_mp(0, 0), rel=1e-14)


def test_franke_against_high_precision():
    pts = np.random.default_rng(0).random((50, 3))
    ours = franke(pts)
    for (x, y, _), v in zip(pts, ours):
        assert v == pytest.approx(franke_mp(x, y), rel=1e-13, abs=1e-15)


def test_quad_saddle():
    assert quad_saddle([1.0, 1.0])[0] == 0.0
    assert quad_saddle([2.0, -1.0])[0] == pytest.approx(6.0)


def test_local_osc_far_field():
    for r in (8.0, 12.0, 30.0):
        x = np.array([[r / np.sqrt(2), -r / np.sqrt(2)]])
        assert abs(local_osc(x)[0] - quad_saddle(x)[0]) < 330 * np.exp(-r * r / 2) + 1e-12


def test_names_and_errors():
    assert set(TEST_FUNCTIONS) == {"franke", "local-osc", "quad-saddle", "bump-quad", "osc-1d"}
    with pytest.raises(InvalidArgumentError):
        test_function_eval("sinc", [[0.0, 0.0]])
    np.testing.assert_array_equal(test_function_eval("franke", [[0.2, 0.3]]), franke([[0.2, 0.3]]))
