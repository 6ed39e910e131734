import math

import numpy as np
import pytest

from hawkes_bell import exp_poly as ep
from hawkes_bell import hawkes_cumulants as hc
from hawkes_bell.exp_poly import KernelParams
from oracles import conditional_second_cumulant_e2

P = KernelParams(0.5, 1.0, 1.0)
GRID = [(0.5, 1.0), (0.2, 1.0), (0.9, 1.0), (1.5, 2.0), (0.05, 0.3)]


def cross_oracle(a, b, t, u):
    # kappa_z^(2)(1, e^{b s}) derived by hand in the age variable
    c = a - b
    return math.exp(b * t) * (a * b / (b - a) * u * math.exp(c * u)
                              + a * a * (math.exp(2 * c * u) - math.exp(c * u)) / (b - a) ** 2)


class TestConditional:
    def test_first_order_example(self):
        k = hc.conditional_cumulants(ep.from_indicator(P), 1)[1]
        assert ep.evaluate(k, 1.0) == pytest.approx(1.3934693402873666, rel=1e-14)

    def test_vanish_at_age_zero(self):
        cond = hc.conditional_cumulants(ep.from_indicator(P), 6)
        assert ep.evaluate(cond[1], 0.0) == pytest.approx(1.0)
        for n in range(2, 7):
            assert ep.evaluate(cond[n], 0.0) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("a, b", GRID)
    def test_second_order_closed_form(self, a, b):
        q = KernelParams(a, b, 3.0)
        k2 = hc.conditional_cumulants(ep.from_indicator(q), 2)[2]
        for u in np.linspace(0, 3, 13):
            assert ep.evaluate(k2, u) == pytest.approx(conditional_second_cumulant_e2(a, b, u), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("n", [2, 3])
    def test_against_neumann_oracle(self, n):
        # kappa^(n) = R(sum_k B_{n,k}); check the outer resolvent independently
        cond = hc.conditional_cumulants(ep.from_indicator(P), n)
        inner = sum(hc.partial_bell(n, k, cond.funcs[: n - k + 1]) for k in range(2, n + 1))
        for u in (0.3, 1.0):
            assert ep.neumann_oracle(inner, u) == pytest.approx(ep.evaluate(cond[n], u), abs=1e-8)

    def test_order_bounds(self):
        with pytest.raises(ValueError):
            hc.conditional_cumulants(ep.from_indicator(P), 7)
        with pytest.raises(ValueError):
            hc.cumulants(0, P)


class TestCumulants:
    def test_examples(self):
        cv = hc.cumulants(2, P)
        assert cv[1] == pytest.approx(1.2130613194252668, rel=1e-13)
        assert cv[2] == pytest.approx(1.7697971525284695, rel=1e-12)

    def test_zero_horizon(self):
        cv = hc.cumulants(4, KernelParams(0.5, 1.0, 0.0))
        assert cv.values == (0.0, 0.0, 0.0, 0.0)
        assert math.isnan(cv.skewness)

    @pytest.mark.parametrize("a, b", GRID + [(0.99, 1.0), (0.999, 1.0), (1 - 1e-6, 1.0)])
    @pytest.mark.parametrize("t", [0.01, 0.1, 1.0, 5.0, 10.0])
    def test_closed_forms(self, a, b, t):
        q = KernelParams(a, b, t, nu=1.3)
        cv = hc.cumulants(4, q)
        for n in range(1, 5):
            assert cv[n] == pytest.approx(hc.closed_form_reference(n, q), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_reference_matches_float_transcription(self, n):
        # at a well-conditioned point plain floats suffice
        q = KernelParams(0.5, 1.0, 2.0, nu=1.3)
        mp = hc.closed_form_reference(n, q)
        flt = float(hc._closed_form(n, q.nu, q.a, q.b, q.t))
        assert flt == pytest.approx(mp, rel=1e-12)

    def test_poisson_limit(self):
        q = KernelParams(1e-9, 1.0, 2.0, nu=1.5)
        for v in hc.cumulants(6, q).values:
            assert v == pytest.approx(3.0, rel=1e-7)

    def test_linear_in_nu(self):
        base = hc.cumulants(5, P).values
        np.testing.assert_allclose(hc.cumulants(5, KernelParams(0.5, 1.0, 1.0, nu=2.5)).values,
                                   2.5 * np.asarray(base), rtol=1e-13)

    def test_monotone_positive(self):
        values = np.array([hc.cumulants(6, P.with_horizon(t)).values for t in np.linspace(0.1, 10, 25)])
        assert (values > 0).all()
        assert (np.diff(values, axis=0) > 0).all()

    def test_second_cumulant_structure(self):
        cond = hc.conditional_cumulants(ep.from_indicator(P), 2)
        assert hc.cumulants(2, P)[2] == pytest.approx(ep.integrate(cond[2] + cond[1] * cond[1]), rel=1e-14)

    def test_standardised(self):
        cv = hc.cumulants(4, P)
        assert cv.skewness == pytest.approx(cv[3] / cv[2] ** 1.5)
        assert cv.excess_kurtosis == pytest.approx(cv[4] / cv[2] ** 2)
        rec = cv.to_record(P)
        assert rec["order"] == 4 and rec["kappa"] == list(cv.values)


class TestJoint:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_diagonal(self, n):
        q = KernelParams(0.4, 1.3, 2.5, nu=0.7)
        ind = ep.from_indicator(q)
        assert hc.joint_cumulant([ind] * n) == pytest.approx(hc.cumulants(n, q)[n], rel=1e-10)

    def test_multilinear(self):
        f = ep.from_indicator(P)
        g = ep.from_intensity_kernel(P)
        h = ep.monomial(P, 1, 0, -1)
        lhs = hc.joint_cumulant([2.0 * f + g, h, f])
        rhs = 2.0 * hc.joint_cumulant([f, h, f]) + hc.joint_cumulant([g, h, f])
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_symmetric(self):
        f, g, h = ep.from_indicator(P), ep.from_intensity_kernel(P), ep.monomial(P, 1, 0, -1)
        assert hc.joint_cumulant([f, g, h]) == pytest.approx(hc.joint_cumulant([h, f, g]), rel=1e-12)

    @pytest.mark.parametrize("a, b", GRID[:3])
    def test_cross_second_order(self, a, b):
        q = KernelParams(a, b, 2.0)
        k = hc.joint_conditional_cumulant([ep.from_indicator(q), ep.from_intensity_kernel(q)])
        for u in np.linspace(0, 2, 9):
            assert ep.evaluate(k, u) == pytest.approx(cross_oracle(a, b, 2.0, u), rel=1e-12, abs=1e-14)

    def test_order_bound(self):
        with pytest.raises(ValueError):
            hc.joint_cumulant([ep.from_indicator(P)] * 5)


class TestIntensity:
    def test_mean_example(self):
        assert hc.mean_intensity(P) == pytest.approx(0.5 * (1 - math.exp(-0.5)) / 0.5, rel=1e-13)

    def test_mean_stationary(self):
        q = KernelParams(0.5, 1.0, 60.0, nu=2.0)
        assert hc.mean_intensity(q) == pytest.approx(2.0, rel=1e-12)

    def test_zero_horizon(self):
        q = KernelParams(0.5, 1.0, 0.0)
        assert hc.mean_intensity(q) == 0.0
        assert hc.intensity_count_moment(q) == 0.0

    @pytest.mark.parametrize("nu, a, b, t", [(1.0, 0.5, 1.0, 1.0), (2.0, 0.5, 1.0, 5.0), (0.7, 0.3, 1.4, 3.0)])
    def test_joint_moment_from_second_moment(self, nu, a, b, t):
        # d/dt E[N^2] = nu + E[lam] + 2 nu E[N] + 2 E[lam N]; E[N^2] from the closed forms
        def second_moment(s):
            q = KernelParams(a, b, s, nu)
            m = hc.closed_form_reference(1, q)
            return hc.closed_form_reference(2, q) + m * m

        h = 1e-3
        deriv = (-second_moment(t + 2 * h) + 8 * second_moment(t + h) - 8 * second_moment(t - h)
                 + second_moment(t - 2 * h)) / (12 * h)
        q = KernelParams(a, b, t, nu)
        expected = (deriv - nu - hc.mean_intensity_closed_form(q) - 2 * nu * hc.closed_form_reference(1, q)) / 2
        assert hc.intensity_count_moment(q) == pytest.approx(expected, rel=1e-8)

    def test_reference_form_differs_linearly_in_nu(self):
        # the two expressions agree in nu^2 and differ by a term linear in nu
        diffs = []
        for nu in (1.0, 2.0, 3.0):
            q = KernelParams(0.5, 1.0, 5.0, nu)
            diffs.append(hc.intensity_count_moment(q) - hc.intensity_count_moment_closed_form(q))
        assert diffs[1] == pytest.approx(2 * diffs[0], rel=1e-9)
        assert diffs[2] == pytest.approx(3 * diffs[0], rel=1e-9)


class TestTermCount:
    def test_values(self):
        assert hc.partition_term_count(3) == 4
        assert hc.partition_term_count(4) == 26

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_domain(self, n):
        with pytest.raises(ValueError):
            hc.partition_term_count(n)
