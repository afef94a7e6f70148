from __future__ import annotations

import math

import pytest
from scipy import integrate

from cgmy_atm import expansion
from cgmy_atm.cgmy import derive
from cgmy_atm.harness import FORMULA_ROWS
from cgmy_atm.models import CgmyParams
from tests.conftest import params


class TestClosedFormCoefficients:
    @pytest.mark.parametrize(
        "p,expected", list(FORMULA_ROWS["table_a21"].items()), ids=lambda v: str(v)
    )
    def test_a21_matches_published_formula_row(self, p: CgmyParams, expected: float):
        assert expansion.a21(p) == pytest.approx(expected, abs=5e-7)

    @pytest.mark.parametrize(
        "p,expected", list(FORMULA_ROWS["table_a12"].items()), ids=lambda v: str(v)
    )
    def test_a12_matches_published_formula_row(self, p: CgmyParams, expected: float):
        assert expansion.a12(p) == pytest.approx(expected, abs=5e-4)

    def test_drift_family_starts_with_a21_and_a41(self, p13: CgmyParams):
        assert expansion.a_drift(1, p13) == expansion.a21(p13)
        assert expansion.a_drift(2, p13) == expansion.a41(p13)

    def test_a21_is_half_drift_squared_times_density(self, p15: CgmyParams):
        d = derive(p15)
        expected = d.tilde_b**2 * expansion.stable_density_at_zero(p15, d) / 2
        assert expansion.a21(p15, d) == pytest.approx(expected, rel=1e-14)

    def test_drift_signs_alternate(self, p15: CgmyParams):
        signs = [math.copysign(1.0, expansion.a_drift(k, p15)) for k in range(1, 5)]
        assert signs == [1.0, -1.0, 1.0, -1.0]

    def test_a_drift_rejects_order_zero(self, p15: CgmyParams):
        with pytest.raises(ValueError):
            expansion.a_drift(0, p15)

    def test_a12_depends_on_tempering_only_through_m_plus_g(self):
        assert expansion.a12(params(G=2.0, M=6.0, Y=1.7)) == pytest.approx(
            expansion.a12(params(Y=1.7)), rel=1e-13
        )

    def test_stable_density_matches_quadrature(self, p17: CgmyParams):
        d = derive(p17)
        value, _ = integrate.quad(lambda u: math.exp(-d.sigma_y * u**1.7), 0.0, math.inf)
        assert expansion.stable_density_at_zero(p17, d) == pytest.approx(value / math.pi, rel=1e-9)


class TestIntegralForms:
    @pytest.mark.parametrize("Y", [1.1, 1.5, 1.9])
    def test_d1_closed_form_matches_quadrature(self, Y: float):
        p = params(Y=Y)
        assert expansion.d1_integral(p).require() == pytest.approx(expansion.d1(p), rel=1e-10)

    @pytest.mark.parametrize(
        "p", [params(Y=1.2), params(Y=1.5), params(Y=1.8), params(C=2, G=2, M=3, Y=1.75)],
        ids=lambda p: p.label,
    )
    def test_d2_closed_form_matches_quadrature(self, p: CgmyParams):
        assert expansion.d2_integral(p).require() == pytest.approx(
            expansion.d2_closed_fl(p), abs=5e-6
        )

    def test_d2_depends_on_the_tempering_rates(self):
        d2_m5 = expansion.d2_integral(params(M=5.0, Y=1.5)).require()
        d2_m6 = expansion.d2_integral(params(M=6.0, Y=1.5)).require()
        assert abs(d2_m5 - d2_m6) > 1e-4


class TestKCap:
    @pytest.mark.parametrize(
        "Y,expected", [(1.05, 10), (1.1, 5), (1.2, 2), (1.25, 2), (1.5, 2), (1.9, 2)]
    )
    def test_values(self, Y: float, expected: int):
        assert expansion.k_cap(Y) == expected

    @pytest.mark.parametrize("Y", [1.0, 2.0, 0.5])
    def test_rejects_out_of_range(self, Y: float):
        with pytest.raises(ValueError, match="open interval"):
            expansion.k_cap(Y)


class TestExpansionTerms:
    def test_terms_are_sorted(self, p17: CgmyParams):
        e = expansion.expansion_terms(p17, include_unproven=True)
        exps = [term.exponent for term in e.terms]
        assert exps == sorted(exps)

    def test_drift_and_binomial_terms_tie_at_three_halves(self, p15: CgmyParams):
        e = expansion.expansion_terms(p15)
        tied = {term.label for term in e.terms if term.tie}
        assert tied == {"a2,1", "a1,2"}
        assert any("coalesce" in note for note in e.notes)

    def test_higher_drift_terms_are_absorbed(self, p17: CgmyParams):
        e = expansion.expansion_terms(p17)
        by_label = {term.label: term for term in e.terms}
        assert by_label["a4,1"].absorbed
        assert not by_label["a2,1"].absorbed
        assert any("a4,1" in note for note in e.notes)

    def test_all_drift_orders_precede_binomial_term_near_one(self):
        e = expansion.expansion_terms(params(Y=1.1))
        drift = [term for term in e.terms if term.mechanism == "drift"]
        assert e.k_cap == 5
        assert [term.drift_order for term in drift] == [1, 2, 3, 4, 5]
        assert not any(term.absorbed for term in drift)
        last = {term.label: term for term in e.terms}
        assert last["a10,1"].tie and last["a1,2"].tie

    def test_candidates_only_on_request(self, p17: CgmyParams):
        proven = expansion.expansion_terms(p17)
        assert all(term.proven for term in proven.terms)
        full = expansion.expansion_terms(p17, include_unproven=True)
        unproven = {term.label for term in full.terms if not term.proven}
        assert unproven == {"d_{1+1/Y}", "d_{3/Y}"}

    def test_second_candidate_needs_y_above_three_halves(self, p13: CgmyParams):
        labels = [term.label for term in expansion.higher_candidates(p13)]
        assert labels == ["d_{1+1/Y}"]

    def test_evaluate_skips_unproven_by_default(self, p17: CgmyParams):
        e = expansion.expansion_terms(p17, include_unproven=True)
        t = 1e-3
        proven = math.fsum(term.coefficient * t**term.exponent for term in e.proven_terms())
        assert expansion.evaluate_expansion(e, t) == pytest.approx(proven, rel=1e-15)
        assert expansion.evaluate_expansion(e, t, include_unproven=True) != pytest.approx(
            proven, rel=1e-15
        )

    def test_evaluate_rejects_non_positive_t(self, p15: CgmyParams):
        e = expansion.expansion_terms(p15)
        with pytest.raises(ValueError, match="t must be positive"):
            expansion.evaluate_expansion(e, 0.0)

    def test_json_round_trip(self, p15: CgmyParams):
        e = expansion.expansion_terms(p15, include_unproven=True)
        assert expansion.expansion_from_json(expansion.expansion_to_json(e)) == e


class TestExponentStructure:
    def test_effective_order_below_three_halves(self):
        labels = [label for label, _ in expansion.effective_order(1.3)]
        assert labels == ["2-1/Y", "2/Y"]

    def test_effective_order_at_three_halves_jumps_to_cross_term(self):
        (first, x1), (second, x2) = expansion.effective_order(1.5)
        assert set(first.split("+")) == {"2-1/Y", "2/Y"}
        assert x1 == pytest.approx(4 / 3)
        assert second == "1+1/Y"
        assert x2 == pytest.approx(5 / 3)

    def test_effective_order_above_three_halves(self):
        labels = [label for label, _ in expansion.effective_order(1.7)]
        assert labels == ["2/Y", "2-1/Y"]

    def test_bifurcations(self):
        found = expansion.bifurcations(1, 4)
        assert [(b.n, b.j) for b in found] == [(1, 2), (1, 3), (1, 4)]
        assert [b.Y for b in found] == pytest.approx([1.5, 4 / 3, 1.25])
        assert [b.effective for b in found] == [True, False, True]
        assert "vanishes" in found[1].note

    def test_bifurcations_reject_bad_bounds(self):
        with pytest.raises(ValueError):
            expansion.bifurcations(0, 4)

    def test_lattice_has_one_row_per_curve(self):
        rows = expansion.exponent_lattice([1.2, 1.5, 1.8])
        assert len(rows) == 3 * len(expansion.LATTICE_CURVES)
        vanishing = {row.label for row in rows if row.coefficient_vanishes}
        assert vanishing == {"3-2/Y", "5-4/Y", "7-6/Y"}

    def test_lattice_rejects_y_outside_range(self):
        with pytest.raises(ValueError):
            expansion.exponent_lattice([1.5, 2.0])


class TestCoefficientSummary:
    def test_keys_and_consistency(self, p15: CgmyParams):
        summary = expansion.coefficient_summary(p15)
        assert set(summary) == {"params", "derived", "d1", "d2", "a21", "a41", "a12", "p_z", "k_cap"}
        assert summary["a12"] == expansion.a12(p15)
        assert summary["params"] == {"C": 1.0, "G": 3.0, "M": 5.0, "Y": 1.5}
