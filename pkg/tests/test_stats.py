import math

import numpy as np
import pytest

from spikenav.stats import (WelchInput, reg_inc_beta,
                            student_t_cdf, student_t_two_tailed_p, welch_t_test)

# Golden Student-t CDF values frozen from an independent reference
# implementation before this module was written.
GOLDEN_T_CDF = {
    (1, 0.0): 0.5,
    (1, 0.5): 0.6475836176504333,
    (1, 1.0): 0.7500000000000002,
    (1, 2.0): 0.8524163823495667,
    (1, 4.0): 0.9220208696226307,
    (5, 0.0): 0.5,
    (5, 0.5): 0.6808505641795355,
    (5, 1.0): 0.8183912661754387,
    (5, 2.0): 0.9490302605850709,
    (5, 4.0): 0.9948382922595843,
    (8, 0.0): 0.5,
    (8, 0.5): 0.6847319622215118,
    (8, 1.0): 0.8267032464563329,
    (8, 2.0): 0.9597418810213687,
    (8, 4.0): 0.9980251135982773,
    (30, 0.0): 0.5,
    (30, 0.5): 0.6896384975574363,
    (30, 1.0): 0.8373456922869851,
    (30, 2.0): 0.9726874775185085,
    (30, 4.0): 0.9998090771819581,
}


@pytest.mark.parametrize("key,expected", sorted(GOLDEN_T_CDF.items()))
def test_student_t_cdf_against_golden_table(key, expected):
    dof, t = key
    assert student_t_cdf(t, dof) == pytest.approx(expected, abs=1e-6)
    # symmetry: F(-t) = 1 - F(t)
    assert student_t_cdf(-t, dof) == pytest.approx(1.0 - expected, abs=1e-6)


def test_reported_snn_cnn_comparison():
    r = welch_t_test(WelchInput(0.09, 0.035, 5, 0.091, 0.034, 5))
    assert abs(r.t_value) == pytest.approx(0.046, abs=0.001)
    assert r.p_value == pytest.approx(0.9646, abs=0.0005)
    assert r.dof == pytest.approx(7.993, abs=0.001)


def test_identical_populations():
    r = welch_t_test(WelchInput(0.5, 0.1, 5, 0.5, 0.1, 5))
    assert r.t_value == 0.0
    assert r.p_value == 1.0


def test_strongly_separated_populations():
    r = welch_t_test(WelchInput(1.0, 0.1, 5, 0.5, 0.1, 5))
    assert r.t_value == pytest.approx(7.906, abs=0.001)
    assert r.dof == pytest.approx(8.0, abs=1e-9)
    assert r.p_value == pytest.approx(4.755e-5, rel=1e-3)


def test_degenerate_variances():
    r = welch_t_test(WelchInput(0.3, 0.0, 5, 0.3, 0.0, 5))
    assert (r.t_value, r.p_value) == (0.0, 1.0)
    with pytest.raises(ValueError, match="degenerate variance"):
        welch_t_test(WelchInput(0.3, 0.0, 5, 0.4, 0.0, 5))


def test_single_zero_sigma_is_fine():
    r = welch_t_test(WelchInput(1.0, 0.0, 5, 0.5, 0.1, 5))
    assert math.isfinite(r.t_value) and math.isfinite(r.p_value)


def test_input_validation():
    with pytest.raises(ValueError):
        WelchInput(0.0, 1.0, 1, 0.0, 1.0, 5)
    with pytest.raises(ValueError):
        WelchInput(0.0, -1.0, 5, 0.0, 1.0, 5)


def test_antisymmetry_in_populations():
    rng = np.random.default_rng(0)
    for _ in range(20):
        mu1, mu2 = rng.normal(0, 1, 2)
        s1, s2 = rng.uniform(0.01, 2, 2)
        n1, n2 = int(rng.integers(2, 30)), int(rng.integers(2, 30))
        a = welch_t_test(WelchInput(mu1, s1, n1, mu2, s2, n2))
        b = welch_t_test(WelchInput(mu2, s2, n2, mu1, s1, n1))
        assert a.t_value == pytest.approx(-b.t_value, rel=1e-12)
        assert a.p_value == pytest.approx(b.p_value, rel=1e-12)
        assert a.dof == pytest.approx(b.dof, rel=1e-12)


def test_p_monotone_in_abs_t():
    for dof in (1.0, 4.5, 8.0, 30.0):
        ps = [student_t_two_tailed_p(t, dof) for t in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
        assert all(a > b for a, b in zip(ps, ps[1:]))
        assert all(0.0 <= p <= 1.0 for p in ps)


def test_reg_inc_beta_edges_and_symmetry():
    assert reg_inc_beta(2.0, 3.0, 0.0) == 0.0
    assert reg_inc_beta(2.0, 3.0, 1.0) == 1.0
    # I_x(a, b) = 1 - I_{1-x}(b, a)
    for a, b, x in ((0.5, 0.5, 0.3), (4.0, 0.5, 0.9), (2.5, 7.0, 0.2)):
        assert reg_inc_beta(a, b, x) == pytest.approx(
            1.0 - reg_inc_beta(b, a, 1.0 - x), abs=1e-12)
    with pytest.raises(ValueError):
        reg_inc_beta(1.0, 1.0, 1.5)
