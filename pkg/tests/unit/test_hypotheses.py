import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from spde_engine.analytics.hypotheses import (
    audit_hypotheses,
    effective_spec,
    eval_phi_n,
    mollify_coefficients,
    phi_n_derivatives,
    phi_n_exact,
    phi_n_inequality_gaps,
    regularity_exponent,
    truncate_flux,
)
from spde_engine.models.coefficients import Mollified, MollifiedNoise, Truncated
from spde_engine.models.problem import CATALOG_KEYS, catalog_problem
from spde_engine.models.regularization import RegularizationParams, Scheme
from spde_engine.utils.exceptions import DomainError


class TestAudit:
    @pytest.mark.parametrize("key", CATALOG_KEYS)
    def test_catalog_problems_pass(self, key):
        report = audit_hypotheses(catalog_problem(key, modes=8), samples=512, seed=1)
        assert report.passed, report.failures()
        assert len(report.checks) == 7

    def test_catalog_problems_pass_in_two_dimensions(self):
        report = audit_hypotheses(catalog_problem("degenerate-multiplicative", dim=2, modes=4), samples=256)
        assert report.passed, report.failures()

    def test_understated_constant_is_caught(self, stochastic_spec):
        weak = replace(stochastic_spec, constants=replace(stochastic_spec.constants, C_G=1e-4))
        report = audit_hypotheses(weak, samples=256, seed=0)
        assert not report.passed
        assert report.failures() == ["noise-growth"]
        check = report.check("noise-growth")
        assert check.max_ratio > 1.0
        assert "xi" in check.witness
        assert check.observed_constant > 1e-4

    def test_report_is_deterministic(self, stochastic_spec):
        first = audit_hypotheses(stochastic_spec, samples=128, seed=5)
        second = audit_hypotheses(stochastic_spec, samples=128, seed=5)
        assert first.to_dict() == second.to_dict()

    def test_rejects_empty_sample(self, heat_spec):
        with pytest.raises(DomainError):
            audit_hypotheses(heat_spec, samples=0)

    def test_frame_lists_every_check(self, heat_spec):
        frame = audit_hypotheses(heat_spec, samples=64).to_frame()
        assert frame["hypothesis"].tolist()[:2] == ["flux-growth", "sigma-holder"]
        assert frame["passed"].all()


class TestRegularityExponent:
    def test_values(self):
        assert regularity_exponent(1.0, 1.0) == pytest.approx(0.5)
        assert regularity_exponent(0.75, 0.5) == pytest.approx(0.5 / 1.75)
        assert regularity_exponent(1.0, 0.2) == pytest.approx(0.4 / 1.2)

    @pytest.mark.parametrize("gamma,alpha", [(0.5, 1.0), (1.1, 1.0), (1.0, 0.0), (1.0, 1.5)])
    def test_domain(self, gamma, alpha):
        with pytest.raises(DomainError):
            regularity_exponent(gamma, alpha)


class TestCascadeCoefficients:
    def test_affine_flux_is_never_truncated(self):
        spec = catalog_problem("linear-transport")
        assert truncate_flux(spec, 0.5) is spec

    def test_burgers_flux_truncated(self, burgers_spec):
        truncated = truncate_flux(burgers_spec, 2.0)
        assert isinstance(truncated.flux.profile, Truncated)
        assert float(np.max(truncated.flux.speed(np.linspace(-10, 10, 101)))) == pytest.approx(2.0)

    def test_mollification_doubles_growth_constant(self, stochastic_spec):
        mollified = mollify_coefficients(stochastic_spec, 0.1)
        assert isinstance(mollified.flux.profile, Mollified)
        assert isinstance(mollified.noise, MollifiedNoise)
        assert mollified.constants.C_G == pytest.approx(2.0 * stochastic_spec.constants.C_G)

    def test_mollified_spec_still_passes_audit(self, stochastic_spec):
        assert audit_hypotheses(mollify_coefficients(stochastic_spec, 0.1), samples=256).passed

    def test_effective_spec_follows_scheme(self, burgers_spec):
        tau_params = RegularizationParams(dt=0.01, T=0.1, tau=0.1)
        assert effective_spec(burgers_spec, tau_params) is burgers_spec
        r_params = RegularizationParams(dt=0.01, T=0.1, R=3.0, scheme=Scheme.R)
        assert isinstance(effective_spec(burgers_spec, r_params).flux.profile, Truncated)
        eta_params = RegularizationParams(dt=0.01, T=0.1, eta=0.05, R=3.0, scheme=Scheme.ETA)
        profile = effective_spec(burgers_spec, eta_params).flux.profile
        assert isinstance(profile, Mollified) and isinstance(profile.base, Truncated)


class TestPhiN:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    @pytest.mark.parametrize("p", [2, 3, 4, 6])
    def test_inequalities_hold_exactly(self, n, p):
        for numerator in range(-40, 41):
            xi = Fraction(numerator, 4)
            gaps = phi_n_inequality_gaps(xi, n, p)
            assert all(gap >= 0 for gap in gaps.values()), (xi, gaps)

    def test_inequalities_hold_for_random_real_exponents(self):
        rng = np.random.default_rng(2024)
        count = 10_000
        n = rng.integers(1, 21, size=count).astype(float)
        p = rng.uniform(2.0, 8.0, size=count)
        spread = rng.uniform(-3.0, 3.0, size=count) * n
        knee = rng.choice([-1.0, 1.0], size=count) * n * (1.0 + rng.uniform(-1e-6, 1e-6, size=count))
        xi = np.where(rng.random(count) < 0.5, spread, knee)
        for x, nk, pk in zip(xi, n, p):
            value, first, second = (float(v) for v in phi_n_derivatives(x, nk, pk))
            pairs = (
                (abs(x * first), pk * value),
                (abs(first), pk * (1.0 + value)),
                (abs(first), abs(x) * second),
                (x * x * second, pk * (pk - 1.0) * value),
                (second, pk * (pk - 1.0) * (1.0 + value)),
            )
            for index, (lhs, rhs) in enumerate(pairs):
                assert lhs <= rhs * (1.0 + 1e-12), (index, x, nk, pk, lhs, rhs)

    def test_inequalities_hold_for_random_rational_points(self):
        rng = np.random.default_rng(7)
        for _ in range(10_000):
            n = int(rng.integers(1, 11))
            p = int(rng.integers(2, 9))
            if rng.random() < 0.5:
                xi = Fraction(int(rng.integers(-3000 * n, 3000 * n + 1)), 1000)
            else:
                xi = int(rng.choice([-1, 1])) * (n + Fraction(int(rng.integers(-5, 6)), 10_000))
            gaps = phi_n_inequality_gaps(xi, n, p)
            assert all(gap >= 0 for gap in gaps.values()), (xi, n, p, gaps)

    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_exact_values_inside(self, p):
        value, first, second = phi_n_exact(Fraction(-3, 2), 2, p)
        assert value == Fraction(3, 2) ** p
        assert first == -p * Fraction(3, 2) ** (p - 1)
        assert second == p * (p - 1) * Fraction(3, 2) ** (p - 2)

    @pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 5.0])
    def test_twice_continuously_differentiable_at_the_knee(self, p):
        n = 2.0
        below = np.array(phi_n_derivatives(n - 1e-9, n, p))
        above = np.array(phi_n_derivatives(n + 1e-9, n, p))
        np.testing.assert_allclose(below, above, rtol=1e-6)

    def test_second_derivative_bounded_by_curvature(self):
        xi = np.linspace(-50.0, 50.0, 2001)
        second = phi_n_derivatives(xi, 3.0, 4.0)[2]
        assert np.max(second) == pytest.approx(4.0 * 3.0 * 3.0 ** 2)

    def test_p_two_is_the_square(self):
        xi = np.linspace(-10.0, 10.0, 41)
        np.testing.assert_allclose(eval_phi_n(xi, 1.0, 2.0), xi ** 2)
        assert eval_phi_n(3.0, 1.0, 2.0) == pytest.approx(9.0)

    @pytest.mark.parametrize("n,p", [(0, 2), (1, 1.5)])
    def test_domain(self, n, p):
        with pytest.raises(DomainError):
            phi_n_derivatives(0.0, n, p)

    def test_exact_requires_integers(self):
        with pytest.raises(DomainError):
            phi_n_exact(Fraction(1), 2, 2.5)
        assert math.isfinite(float(phi_n_exact(Fraction(7), 2, 3)[0]))
