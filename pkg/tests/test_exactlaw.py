import math

import numpy as np
import pytest
from scipy import special, stats

from modgauss.exactlaw import invert_characteristic_function


def test_standard_normal_cdf():
    law = invert_characteristic_function(lambda xi: -0.5 * xi ** 2 + 0j, 0.0, 1.0)
    xs = np.linspace(-5, 5, 41)
    assert np.max(np.abs(law.cdf_at(xs) - stats.norm.cdf(xs))) < 1e-7


def test_log_gamma_law():
    # T = log G with G ~ Gamma(a): E[exp(i xi T)] = Gamma(a + i xi) / Gamma(a)
    a = 3.5
    law = invert_characteristic_function(
        lambda xi: special.loggamma(a + 1j * xi) - special.loggamma(a),
        float(special.psi(a)), math.sqrt(special.polygamma(1, a)))
    xs = np.linspace(-0.5, 2.5, 31)
    assert np.max(np.abs(law.cdf_at(xs) - stats.gamma.cdf(np.exp(xs), a))) < 1e-6


def test_sample_moments():
    law = invert_characteristic_function(lambda xi: 0.7j * xi - 2.0 * xi ** 2, 0.7, 2.0)
    u = (np.arange(200000) + 0.5) / 200000
    x = law.sample(u)
    assert np.mean(x) == pytest.approx(0.7, abs=1e-4)
    assert np.std(x) == pytest.approx(2.0, rel=1e-3)


def test_cdf_monotone_and_bounded():
    law = invert_characteristic_function(lambda xi: -np.abs(xi) ** 1.5 + 0j, 0.0, 1.5)
    assert np.all(np.diff(law.cdf) >= 0)
    assert law.cdf[0] >= 0 and law.cdf[-1] <= 1


def test_bad_scale():
    with pytest.raises(ValueError):
        invert_characteristic_function(lambda xi: -xi ** 2 + 0j, 0.0, 0.0)
