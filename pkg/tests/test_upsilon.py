import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modgauss.errors import DomainError
from modgauss.upsilon import (
    BetaParam,
    upsilon_closed,
    upsilon_closed_integer,
    upsilon_closed_inv_integer,
    upsilon_closed_rational,
    upsilon_gue,
    upsilon_quadrature,
    upsilon_shifted,
)

HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

# Upsilon(z) by 40-digit mpmath quadrature of the defining expression.
MP_REFERENCE = [
    (0.5 + 0.5j, 1.0, 0.281589930328261437111772586934942658732 + 0.6596850995218863473589140225688523690963j),
    (0.4, 3.0, 0.320155140823417026765252149955306670973),
    (-0.7 + 0.4j, 2.0, -0.2774932761286894802446320653552208105571 - 0.622684166976600228650270985464264619133j),
    (0.3, 2.0, 0.2081791954665361),
    (0.3, 4.0, 0.2430917867982654),
    (0.3, 1.0, 0.1402984471869085),
    (0.3, 3.0, 0.2315618548792873),
    (0.3, 2 / 3, 0.08121327100570098),
]


@pytest.mark.parametrize("z, beta, ref", MP_REFERENCE)
def test_quadrature_matches_reference(z, beta, ref):
    assert abs(upsilon_quadrature(z, beta) - ref) < 1e-12


def test_beta_param_detects_rationals():
    assert BetaParam.of(3).rational == (3, 2)
    assert BetaParam.of(1).rational == (1, 2)
    assert BetaParam.of(2 / 3).rational == (1, 3)
    assert BetaParam.of(Fraction(2, 3)).rational == (1, 3)
    assert BetaParam.of(math.pi).rational is None
    with pytest.raises(ValueError):
        BetaParam(2.0, 3, 2)
    with pytest.raises(DomainError):
        BetaParam(-1.0)


@pytest.mark.parametrize("beta", [0.5, 1, 2, 3, 4, 2 / 3, math.sqrt(2)])
def test_zero(beta):
    assert upsilon_quadrature(0, beta) == 0
    assert upsilon_shifted(0, 0.3, beta) == 0


@pytest.mark.parametrize("beta", [0.5, 1, 2, 3, 4, 2 / 3, 5.5])
def test_value_at_one(beta):
    # Upsilon(1) = log(2 pi)/2 for every beta (telescoping of the first moment).
    assert upsilon_quadrature(1, beta) == pytest.approx(HALF_LOG_2PI, abs=1e-12)


def test_closed_integer_examples():
    assert upsilon_closed_integer(0, 2) == 0
    assert upsilon_closed_integer(1, 1) == pytest.approx(HALF_LOG_2PI, abs=1e-14)
    assert abs(upsilon_closed_integer(0.3, 2) - upsilon_quadrature(0.3, 4)) < 1e-9


def test_closed_inv_integer_examples():
    assert upsilon_closed_inv_integer(0, 3) == 0
    assert abs(upsilon_closed_inv_integer(0.7, 1) - upsilon_closed_integer(0.7, 1)) < 1e-13
    assert abs(upsilon_closed_inv_integer(0.25, 2) - upsilon_quadrature(0.25, 1)) < 1e-9


def test_closed_rational_examples():
    assert upsilon_closed_rational(0, 3, 2) == 0
    assert abs(upsilon_closed_rational(0.4, 3, 2) - upsilon_quadrature(0.4, 3)) < 1e-9
    assert abs(upsilon_closed_rational(0.5 + 0.5j, 1, 2) - upsilon_quadrature(0.5 + 0.5j, 1)) < 1e-9


def _strip_grid(beta, count=50, seed=0):
    rng = np.random.default_rng(seed)
    bp = beta / 2
    return [complex(rng.uniform(-bp + 0.05, 3), rng.uniform(-2, 2)) for _ in range(count)]


@pytest.mark.parametrize("beta", [1, 2, 3, 4, 2 / 3, 0.5])
def test_oracle_agreement_on_strip(beta):
    for z in _strip_grid(beta):
        assert abs(upsilon_quadrature(z, beta) - upsilon_closed(z, beta)) <= 1e-8


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_specialization_chain(k):
    rng = np.random.default_rng(k)
    for _ in range(20):
        z = complex(rng.uniform(-0.9 / k, 2.5), rng.uniform(-1.5, 1.5))
        assert abs(upsilon_closed_rational(z, 1, k) - upsilon_closed_inv_integer(z, k)) <= 1e-10
        w = complex(rng.uniform(-k + 0.05, 2.5), rng.uniform(-1.5, 1.5))
        assert abs(upsilon_closed_rational(w, k, 1) - upsilon_closed_integer(w, k)) <= 1e-10


@pytest.mark.parametrize("beta", [1, 2, 2 / 3, 2.7])
def test_cauchy_riemann(beta):
    h = 1e-4
    for z in [0.2 + 0.1j, -0.2 + 0.8j, 1.5 - 1.0j]:
        if z.real <= -beta / 2 + 2 * h:
            continue
        dx = (upsilon_quadrature(z + h, beta) - upsilon_quadrature(z - h, beta)) / (2 * h)
        dy = (upsilon_quadrature(z + 1j * h, beta) - upsilon_quadrature(z - 1j * h, beta)) / (2 * h)
        assert abs(dx - dy / 1j) <= 1e-5


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.45, 2.5), st.sampled_from([1.0, 2.0, 3.0, 4.0]))
def test_real_on_real(x, beta):
    assert abs(upsilon_quadrature(x, beta).imag) < 1e-14


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.4, 2), st.floats(-1, 1))
def test_conjugate_symmetry(x, y):
    z = complex(x, y)
    assert abs(upsilon_quadrature(z.conjugate(), 3.0) - upsilon_quadrature(z, 3.0).conjugate()) < 1e-12


def test_domain_errors():
    with pytest.raises(DomainError):
        upsilon_quadrature(-1.0, 2)
    with pytest.raises(DomainError):
        upsilon_closed_integer(-2.0, 2)
    with pytest.raises(DomainError):
        upsilon_closed_inv_integer(-0.5, 2)
    with pytest.raises(DomainError):
        upsilon_closed_rational(-1.5, 3, 2)
    with pytest.raises(DomainError):
        upsilon_shifted(0.1, -1.2, 2)


def test_shifted():
    assert upsilon_shifted(0.7 + 0.2j, 0, 2) == upsilon_quadrature(0.7 + 0.2j, 2)
    expected = upsilon_closed_integer(1.0, 1) - upsilon_closed_integer(0.5, 1)
    assert abs(upsilon_shifted(0.5, 0.5, 2) - expected) < 1e-9


class TestGue:
    def test_zero(self):
        assert upsilon_gue(0) == 0

    def test_one(self):
        assert upsilon_gue(1) == pytest.approx(-0.4385011660546906785236563, abs=1e-13)

    def test_minus_half(self):
        assert upsilon_gue(-0.5) == pytest.approx(0.7234881216357720309621604, abs=1e-13)

    def test_boundary(self):
        with pytest.raises(DomainError):
            upsilon_gue(-1.0)
