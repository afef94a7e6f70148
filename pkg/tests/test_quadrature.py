from __future__ import annotations

import math

import pytest

from cgmy_atm.models import QuadratureConfig, QuadratureError
from cgmy_atm.quadrature import (
    IntegrandError,
    LaplaceDomainError,
    integrate,
    integrate_fourier,
    laplace_breakpoints,
    laplace_exp_integral,
    laplace_frac_integral,
    laplace_scale,
)


class TestIntegrate:
    def test_semi_infinite_exponential(self):
        result = integrate(lambda x: math.exp(-x), 0.0)
        assert result.value == pytest.approx(1.0, rel=1e-12)
        assert result.converged
        assert result.evaluations > 0

    def test_semi_infinite_algebraic_tail(self):
        result = integrate(lambda x: 1.0 / (1.0 + x * x), 0.0)
        assert result.value == pytest.approx(math.pi / 2, rel=1e-12)

    def test_finite_interval(self):
        result = integrate(math.sin, 0.0, math.pi)
        assert result.value == pytest.approx(2.0, rel=1e-12)

    def test_integrable_singularity_at_origin(self):
        result = integrate(lambda x: x**-0.5 * math.exp(-x), 0.0)
        assert result.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_breakpoints_guide_a_sharp_peak(self):
        cfg = QuadratureConfig().with_breakpoints([1e4, 1e5])
        result = integrate(lambda x: math.exp(-x / 1e4) / 1e4, 0.0, cfg=cfg)
        assert result.value == pytest.approx(1.0, rel=1e-12)

    def test_cancelling_segments_meet_absolute_target(self):
        # ∫₀^∞ sin(x) e^{-x} dx = 1/2, with segments of both signs.
        cfg = QuadratureConfig().with_breakpoints([math.pi, 2 * math.pi, 3 * math.pi])
        result = integrate(lambda x: math.sin(x) * math.exp(-x), 0.0, cfg=cfg)
        assert result.value == pytest.approx(0.5, rel=1e-12)

    def test_algebraic_tail_from_one(self):
        result = integrate(lambda x: x**-2, 1.0)
        assert result.value == pytest.approx(1.0, abs=1e-13)

    def test_additive_over_adjacent_intervals(self):
        f = lambda x: math.exp(-x / 5.0) / (1.0 + x * x)  # noqa: E731
        head = integrate(f, 0.0, 2.0)
        tail = integrate(f, 2.0)
        whole = integrate(f, 0.0)
        slack = head.error_estimate + tail.error_estimate + whole.error_estimate + 1e-15
        assert abs(head.value + tail.value - whole.value) <= slack

    def test_is_deterministic(self):
        f = lambda x: math.exp(-(x**1.3)) * math.cos(x)  # noqa: E731
        assert integrate(f, 0.0) == integrate(f, 0.0)

    def test_should_raise_on_non_finite_integrand(self):
        with pytest.raises(IntegrandError) as exc_info:
            integrate(lambda x: math.nan if x > 0.5 else 1.0, 0.0, 1.0)
        assert exc_info.value.abscissa > 0.5
        assert math.isnan(exc_info.value.value)

    @pytest.mark.parametrize("lower, upper", [(-1.0, 1.0), (2.0, 1.0), (math.inf, math.inf)])
    def test_should_reject_bad_limits(self, lower: float, upper: float):
        with pytest.raises(ValueError):
            integrate(math.exp, lower, upper)

    def test_non_converged_result_raises_on_require(self):
        cfg = QuadratureConfig(rel_tol=1e-15, abs_tol=1e-300, max_subdivisions=1)
        result = integrate(lambda x: math.sin(50 * x) ** 2 / math.sqrt(x), 0.0, 10.0, cfg=cfg)
        assert not result.converged
        with pytest.raises(QuadratureError) as exc_info:
            result.require()
        assert exc_info.value.result is result


class TestIntegrateFourier:
    @pytest.mark.parametrize("omega", [0.3, 1.0, 4.0, 10.0, -2.5])
    def test_cosine_transform_of_lorentzian(self, omega: float):
        cfg = QuadratureConfig().with_breakpoints([1.0, 10.0])
        result = integrate_fourier(lambda u: 1.0 / (u * u + 0.25), omega, "cos", cfg=cfg)
        assert result.converged
        assert result.value == pytest.approx(math.pi * math.exp(-abs(omega) / 2), rel=1e-10)

    @pytest.mark.parametrize("omega", [0.5, 2.0, 10.0])
    def test_sine_transform_of_exponential(self, omega: float):
        result = integrate_fourier(lambda u: math.exp(-u), omega, "sin")
        assert result.value == pytest.approx(omega / (1.0 + omega * omega), rel=1e-10)

    def test_lower_limit_past_every_breakpoint(self):
        result = integrate_fourier(lambda u: math.exp(-u), 1.0, "cos", lower=2.0)
        # ∫₂^∞ e^{-u} cos u du = e^{-2}(cos 2 - sin 2)/2
        expected = math.exp(-2.0) * (math.cos(2.0) - math.sin(2.0)) / 2
        assert result.value == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("omega", [0.0, math.inf, math.nan])
    def test_should_reject_bad_frequency(self, omega: float):
        with pytest.raises(ValueError):
            integrate_fourier(math.exp, omega, "cos")

    def test_should_reject_unknown_weight(self):
        with pytest.raises(ValueError):
            integrate_fourier(math.exp, 1.0, "tan")  # type: ignore[arg-type]


class TestQuadratureConfig:
    def test_should_sort_and_deduplicate_breakpoints(self):
        cfg = QuadratureConfig().with_breakpoints([3.0, 1.0, 3.0, -1.0, math.inf])
        assert cfg.breakpoints == (1.0, 3.0)

    def test_should_reject_unsorted_breakpoints(self):
        with pytest.raises(ValueError):
            QuadratureConfig(breakpoints=(2.0, 1.0))

    @pytest.mark.parametrize("field", ["rel_tol", "abs_tol"])
    def test_should_reject_non_positive_tolerances(self, field: str):
        with pytest.raises(ValueError):
            QuadratureConfig(**{field: 0.0})


class TestLaplace:
    def test_scale(self):
        assert laplace_scale(1e-4, 2.0) == pytest.approx(100.0)

    def test_breakpoints_bracket_the_mass(self):
        assert laplace_breakpoints(1e-4, 2.0) == pytest.approx((1.0, 100.0, 1000.0))

    @pytest.mark.parametrize("Y", [1.1, 1.5, 1.9])
    def test_exp_integral_with_matching_moment(self, Y: float):
        assert laplace_exp_integral(1.0, Y, Y - 1.0) == pytest.approx(1.0 / Y, rel=1e-14)

    def test_exp_integral_zero_moment(self):
        assert laplace_exp_integral(1.0, 2.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)

    @pytest.mark.parametrize("lam", [1e-6, 1e-4, 1e-2, 1.0])
    @pytest.mark.parametrize("Y", [1.1, 1.3, 1.5, 1.7, 1.9])
    @pytest.mark.parametrize("p", [0.0, 2.0, 4.0])
    def test_exp_integral_matches_quadrature(self, lam: float, Y: float, p: float):
        cfg = QuadratureConfig().with_breakpoints(laplace_breakpoints(lam, Y))
        quad = integrate(lambda w: math.exp(p * math.log(w) - lam * w**Y), 0.0, cfg=cfg)
        closed = laplace_exp_integral(lam, Y, p)
        assert abs(quad.value - closed) <= 1e-10 * closed

    @pytest.mark.parametrize("lam", [1e-6, 1e-4, 1e-2, 1.0])
    @pytest.mark.parametrize("Y", [1.1, 1.3, 1.5, 1.7, 1.9])
    def test_frac_integral_matches_quadrature(self, lam: float, Y: float):
        alpha = 1.0 - 2.0 / Y
        cfg = QuadratureConfig().with_breakpoints(laplace_breakpoints(lam, Y))
        quad = integrate(lambda u: -math.expm1(-lam * u**Y) * u ** (alpha * Y - 1.0), 0.0, cfg=cfg)
        closed = laplace_frac_integral(lam, Y, alpha)
        assert closed > 0
        assert abs(quad.value - closed) <= 1e-10 * closed

    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5])
    def test_frac_integral_domain(self, alpha: float):
        with pytest.raises(LaplaceDomainError):
            laplace_frac_integral(1.0, 1.5, alpha)

    @pytest.mark.parametrize("lam, Y, p", [(0.0, 1.5, 0.0), (1.0, 1.5, -0.5), (1.0, 0.0, 0.0)])
    def test_exp_integral_rejects_bad_arguments(self, lam: float, Y: float, p: float):
        with pytest.raises(ValueError):
            laplace_exp_integral(lam, Y, p)
