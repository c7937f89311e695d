import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnls.model import (
    SINGLE_SOLITON,
    TWO_SOLITONS,
    CustomField,
    SingleSoliton,
    SolitonParams,
    TwoSolitons,
    continuous_residual,
    cubic_nonlinearity,
    initial_field,
    sech,
    soliton_eval,
)
from qnls.qgrid import build_grid

LATTICE = [(x, t) for x in np.linspace(0, 1, 5) for t in np.linspace(0, 1, 5)]


def soliton_mp(p, x, t, dps=50):
    """Same closed formula in 50-digit arithmetic."""
    with mp.workdps(dps):
        a, qs, c = mp.mpf(p.a), mp.mpf(p.qs), mp.mpf(p.c)
        theta = c**2 / 4 - a
        x, t = mp.mpf(x), mp.mpf(t)
        val = mp.sqrt(2 * a / qs) * mp.exp(1j * (c * x / 2 - theta * t + p.varphi)) * mp.sech(
            mp.sqrt(a) * (x - c * t) + p.phi
        )
        return complex(val)


params = st.builds(
    SolitonParams,
    a=st.floats(0.01, 4),
    qs=st.floats(0.5, 3),
    c=st.floats(-5, 5),
    varphi=st.floats(-3, 3),
    phi=st.floats(-10, 10),
)


def test_params_validate():
    with pytest.raises(ValueError):
        SolitonParams(a=0, qs=1, c=0)
    with pytest.raises(ValueError):
        SolitonParams(a=1, qs=-1, c=0)
    assert SolitonParams(a=2.25, qs=2, c=-4).theta == 4 - 2.25


def test_standard_parameter_sets():
    assert SINGLE_SOLITON == SolitonParams(0.01, 1.0, 0.1, 0.0, 0.0)
    assert TWO_SOLITONS[0] == SolitonParams(1.0, 2.0, 4.0, 0.0, 15.0)
    assert TWO_SOLITONS[1] == SolitonParams(2.25, 2.0, -4.0, 0.0, -7.5)


def test_soliton_at_origin():
    u = soliton_eval(SINGLE_SOLITON, 0.0, 0.0)
    assert u == pytest.approx(math.sqrt(0.02), abs=1e-15)
    assert u.imag == 0.0


def test_soliton_against_extended_precision():
    p = TWO_SOLITONS[0]
    ref = soliton_mp(p, 1.0, 0.0)
    assert abs(soliton_eval(p, 1.0, 0.0) - ref) <= 1e-14 * abs(ref)


@given(params, st.floats(-3, 3), st.floats(0, 2))
def test_soliton_matches_oracle(p, x, t):
    ref = soliton_mp(p, x, t)
    assert abs(soliton_eval(p, x, t) - ref) <= 1e-12 * abs(ref) + 1e-300


@given(params, st.floats(0, 1))
def test_peak_rides_at_ct(p, t):
    p0 = SolitonParams(p.a, p.qs, p.c, p.varphi, 0.0)
    assert abs(soliton_eval(p0, p.c * t, t)) == pytest.approx(p.amplitude, rel=1e-14)


@given(params, st.floats(-2, 2), st.floats(0, 1), st.floats(-1, 1))
def test_modulus_translation(p, x, t, s):
    a = abs(soliton_eval(p, x, t))
    b = abs(soliton_eval(p, x + p.c * s, t + s))
    assert abs(a - b) < 1e-12


@given(params, st.floats(-2, 2), st.floats(0, 1), st.floats(-3, 3))
def test_phase_shift(p, x, t, w):
    shifted = SolitonParams(p.a, p.qs, p.c, p.varphi + w, p.phi)
    lhs = soliton_eval(shifted, x, t)
    rhs = cmath.exp(1j * w) * soliton_eval(p, x, t)
    assert abs(lhs - rhs) <= 1e-13 * abs(rhs) + 1e-300


def test_sech_cutoff():
    assert sech(351.0) == 0.0
    assert sech(-1e6) == 0.0
    assert sech(350.0) > 0
    np.testing.assert_array_equal(sech(np.array([0.0, 400.0])), [1.0, 0.0])


def test_soliton_vectorises():
    x = np.linspace(0, 1, 7)
    vals = soliton_eval(SINGLE_SOLITON, x, 0.5)
    assert vals.shape == (7,)
    assert vals[3] == soliton_eval(SINGLE_SOLITON, x[3], 0.5)


@pytest.mark.parametrize("u, expected", [(0j, 0j), (1 + 0j, 1 + 0j), (3j, 27j)])
def test_cubic_nonlinearity(u, expected):
    assert cubic_nonlinearity(u) == expected


def test_initial_field_sampling():
    g = build_grid(0.5, 2)
    p = SINGLE_SOLITON
    v = initial_field(SingleSoliton(p), g)
    expected = [soliton_eval(p, x, 0.0) for x in (1.0, 0.5, 0.25)]
    np.testing.assert_array_equal(v, expected)

    two = initial_field(TwoSolitons(), g, 0.3)
    np.testing.assert_array_equal(
        two, soliton_eval(TWO_SOLITONS[0], g.points, 0.3) + soliton_eval(TWO_SOLITONS[1], g.points, 0.3)
    )

    custom = [1, 2j, 3 - 1j]
    np.testing.assert_array_equal(initial_field(CustomField(custom), g), custom)
    with pytest.raises(ValueError, match="entries"):
        initial_field(CustomField([1, 2]), g)


def test_residual_vanishes_on_soliton():
    assert continuous_residual(SINGLE_SOLITON, LATTICE, 1e-3) < 1e-6


def test_residual_of_zero_function():
    assert continuous_residual(lambda x, t: 0 * x, LATTICE, 1e-3) == 0.0


def test_residual_fourth_order_scaling():
    # truncation must dominate rounding for the ratio to show; a=1 gives that at h ~ 0.03
    p = SolitonParams(a=1.0, qs=1.0, c=0.5)
    r1 = continuous_residual(p, LATTICE, 0.025)
    r2 = continuous_residual(p, LATTICE, 0.05)
    assert 12 < r2 / r1 < 20
    assert r2 < 1e-4


def test_residual_detects_non_solution():
    # qs = 2 halves |u|^2 relative to a solution of the cubic equation
    assert continuous_residual(TWO_SOLITONS[0], [(-14.0, 0.0)], 1e-3) > 1e-2


def test_residual_rejects_width():
    with pytest.raises(ValueError):
        continuous_residual(SINGLE_SOLITON, LATTICE, 0.0)
