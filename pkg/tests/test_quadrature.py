import math

import numpy as np
import pytest

from dihedral_erw.moments import var_ztilde_exact
from dihedral_erw.quadrature import (
    FIGURE_CSV_HEADER,
    QuadratureError,
    beta_bound,
    figure_csv_lines,
    figure_grid,
    gauss_2f1,
    integrate,
    j1,
    j2,
    phi_integrand,
    var_z_infinity,
    var_ztilde_infinity,
)


class TestIntegrate:
    def test_smooth_log(self):
        res = integrate(lambda u, um1: 1.0 / (2.0 - u), tol=1e-12)
        assert res.value == pytest.approx(math.log(2.0), abs=1e-12)
        assert res.abs_err_estimate >= 0

    def test_algebraic_endpoint_singularity(self):
        res = integrate(lambda u, um1: um1 ** -0.5, tol=1e-10)
        assert res.value == pytest.approx(2.0, abs=1e-10)

    def test_log_endpoint_singularity(self):
        res = integrate(lambda u, um1: -math.log(u), tol=1e-10)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_budget_failure_is_loud(self):
        with pytest.raises(QuadratureError):
            integrate(lambda u, um1: 1.0, tol=1e-10, max_evals=5)

    def test_non_finite_integrand_is_loud(self):
        with pytest.raises(QuadratureError):
            integrate(lambda u, um1: float("nan"), tol=1e-10)

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            integrate(lambda u, um1: 1.0, tol=0.0)


class TestPhiIntegrand:
    def test_memoryless_reduces_to_rational(self):
        # at q=0 the integrand collapses to 1/(2-u)
        for u in (0.1, 0.25, 0.5, 0.9):
            assert phi_integrand(0.0, u) == pytest.approx(1.0 / (2.0 - u), rel=1e-13)

    def test_left_endpoint_limits(self):
        # limit (q-1)/(2(2q-1)); the approach rate is u^(1-2q), so the probe
        # point moves closer for memory parameters nearer the branch point
        for q, u in ((-1.0, 1e-9), (-0.5, 1e-9), (0.0, 1e-9), (0.3, 1e-23)):
            lim = (q - 1.0) / (2.0 * (2.0 * q - 1.0))
            assert phi_integrand(q, u) == pytest.approx(lim, abs=1e-8)

    def test_right_endpoint_limits(self):
        for q in (-1.0, -0.5, 0.0, 0.3, 0.49, 0.8):
            lim = 2.0 ** (1.0 - q) - 1.0
            assert phi_integrand(q, 1.0 - 1e-10) == pytest.approx(lim, abs=1e-8)
        assert phi_integrand(0.5, 1.0 - 1e-10) == pytest.approx(
            math.sqrt(2.0) - 1.0, abs=1e-8
        )

    def test_rejects_outside_unit_interval(self):
        for u in (-0.1, 0.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                phi_integrand(0.3, u)

    def test_positive_on_interior(self):
        for q in (-1.0, -0.3, 0.2, 0.5, 0.9):
            for u in (1e-6, 0.2, 0.5, 0.8, 1 - 1e-6):
                assert phi_integrand(q, u) > 0.0


class TestLimitVariance:
    def test_memoryless_closed_form(self):
        assert var_ztilde_infinity(0.0, tol=1e-10) == pytest.approx(
            math.log(2.0), abs=1e-9
        )

    def test_prefactor_of_z(self):
        assert var_z_infinity(0.0) == 0.0
        q = -1.0
        assert var_z_infinity(q) == pytest.approx(var_ztilde_infinity(q), rel=1e-12)
        q = 0.5
        assert var_z_infinity(q) == pytest.approx(0.25 * var_ztilde_infinity(q), rel=1e-12)

    def test_nonnegative_across_grid(self):
        for q in np.linspace(-1.0, 0.9, 20):
            assert var_ztilde_infinity(float(q)) >= 0.0

    def test_branch_continuity(self):
        # the symmetric probe cancels the smooth q-derivative (about -0.41
        # near the branch point) and isolates the branch mismatch itself
        mid = var_ztilde_infinity(0.5)
        lo = var_ztilde_infinity(0.5 - 1e-4)
        hi = var_ztilde_infinity(0.5 + 1e-4)
        assert abs(0.5 * (lo + hi) - mid) <= 1e-5
        # one-sided probes at 1e-4 measure derivative * offset; they stay
        # within 1e-4, and tighten to 1e-5 once the offset shrinks to 1e-6
        assert abs(lo - mid) <= 1e-4 and abs(hi - mid) <= 1e-4
        assert abs(var_ztilde_infinity(0.5 - 1e-6) - mid) <= 1e-5
        assert abs(var_ztilde_infinity(0.5 + 1e-6) - mid) <= 1e-5

    @pytest.mark.parametrize("q", [-1.0, -0.5, 0.0, 0.3, 0.5, 0.7])
    def test_truncated_sum_converges_to_limit(self, q):
        # gap must shrink monotonically and track the alternating-tail
        # decay: n^(q-1) with memory, n^-1 log n without
        limit = var_ztilde_infinity(q)
        ns = (100, 1000, 10_000, 100_000)
        gaps = [abs(var_ztilde_exact(n, q) - limit) for n in ns]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        rate = (lambda n: n ** (q - 1.0)) if q > 0 else (lambda n: math.log(n) / n)
        assert gaps[-1] <= 5.0 * rate(ns[-1])

    def test_rejects_q_of_one(self):
        with pytest.raises(ValueError):
            var_ztilde_infinity(1.0)


class TestJ1J2:
    def test_j1_closed_form(self):
        assert j1(1, 0.0) == pytest.approx(2 * math.log(2.0) - 1.0, abs=1e-11)

    def test_j2_closed_form(self):
        assert j2(1, 0.0) == pytest.approx(1.0 - math.log(2.0), abs=1e-11)

    def test_j2_beta_envelope(self):
        for q in (-0.9, -0.5, 0.0, 0.4, 0.8):
            for n in (1, 10, 1000, 100_000):
                assert j2(n, q) <= beta_bound(n, q) * (1 + 1e-12)

    def test_domains(self):
        with pytest.raises(ValueError):
            j1(1, -1.0)  # k + q = 0 diverges
        with pytest.raises(ValueError):
            j2(0, 0.5)

    def test_j1_positive_and_decreasing_in_k(self):
        vals = [j1(k, 0.3) for k in (1, 2, 5, 20)]
        assert all(v > 0 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestGauss2F1:
    def test_empty_tail(self):
        assert gauss_2f1(0.7, 1.3, 2.4, 0.0) == 1.0

    def test_log_series_identity(self):
        for z in (-1.0, -0.5, 0.3, 0.9):
            assert gauss_2f1(1.0, 1.0, 2.0, z) == pytest.approx(
                -math.log(1.0 - z) / z, rel=1e-12
            )

    def test_closed_form_identity_on_grid(self):
        worst = 0.0
        for q in np.arange(0.1, 0.95, 0.1):
            for lam in np.arange(0.1, 1.05, 0.1):
                got = gauss_2f1(q, 1.0, 2.0, -lam)
                want = ((1 + lam) ** (1 - q) - 1) / ((1 - q) * lam)
                worst = max(worst, abs(got - want))
        assert worst <= 1e-10

    def test_against_euler_integral(self):
        # Euler form: Gamma(c) / (Gamma(b) Gamma(c-b)) * integral of
        # t^(b-1) (1-t)^(c-b-1) (1-zt)^(-a); valid for c > b > 0
        from scipy.special import gammaln

        for a, b, c in ((0.4, 0.7, 1.9), (1.0, 1.0, 2.0), (2.2, 0.5, 2.7)):
            for z in (-1.0, -0.4, 0.0, 0.35, 0.8):
                pref = math.exp(gammaln(c) - gammaln(b) - gammaln(c - b))
                res = integrate(
                    lambda u, um1: u ** (b - 1) * um1 ** (c - b - 1) * (1 - z * u) ** (-a),
                    tol=1e-12,
                )
                assert gauss_2f1(a, b, c, z) == pytest.approx(
                    pref * res.value, abs=1e-10
                )

    def test_domains(self):
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 1.0, -2.0, 0.5)
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 1.0, 2.0, -1.5)


class TestFigureGrid:
    def test_rows_and_flags(self):
        rows = figure_grid(-1.0, 0.9, 0.1)
        assert len(rows) == 20
        assert all(r.ok for r in rows)
        assert all(r.var_z_infinity >= 0 for r in rows)
        zero = [r for r in rows if r.q == 0.0]
        assert len(zero) == 1 and zero[0].var_z_infinity == 0.0

    def test_grid_snapping_hits_exact_zero(self):
        rows = figure_grid(-1.0, 1e-12, 0.05)
        assert rows[-1].q == 0.0

    def test_csv_header(self):
        rows = figure_grid(0.0, 0.2, 0.1)
        lines = list(figure_csv_lines(rows))
        assert lines[0] == FIGURE_CSV_HEADER
        assert len(lines) == 4

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            figure_grid(-1.2, 0.5, 0.1)
        with pytest.raises(ValueError):
            figure_grid(0.0, 0.995, 0.1)
