from __future__ import annotations

import json
import math

import pytest
from pydantic import ValidationError

from cgmy_atm.cgmy import derive
from cgmy_atm.models import (
    CgmyParams,
    Expansion,
    ExpansionTerm,
    GridSpec,
    PriceRequest,
    QuadratureConfig,
    QuadratureError,
    QuadratureResult,
    TableRow,
)
from tests.conftest import params


class TestCgmyParams:
    @pytest.mark.parametrize(
        "field,value,message",
        [
            ("C", 0.0, "C must be positive"),
            ("G", -0.1, "G must be non-negative"),
            ("M", 1.0, "M must exceed 1"),
            ("Y", 1.0, "open interval"),
            ("Y", 2.0, "open interval"),
            ("C", math.inf, "C must be finite"),
            ("Y", math.nan, "Y must be finite"),
        ],
    )
    def test_rejects_invalid_values(self, field: str, value: float, message: str):
        values = {"C": 1.0, "G": 3.0, "M": 5.0, "Y": 1.5, field: value}
        with pytest.raises(ValidationError, match=message):
            CgmyParams(**values)

    def test_g_zero_is_allowed(self):
        assert params(G=0.0).G == 0.0

    def test_is_frozen_and_hashable(self):
        p = params()
        with pytest.raises(ValidationError):
            p.C = 2.0
        assert {p: 1}[params()] == 1

    def test_label(self):
        assert params(Y=1.75, C=2, G=2, M=3).label == "C=2,G=2,M=3,Y=1.75"


class TestDerivedParams:
    def test_json_dump_splits_complex_values(self):
        dumped = derive(params()).model_dump(mode="json")
        assert len(dumped["beta1"]) == 2
        json.dumps(dumped)


class TestQuadratureConfig:
    def test_rejects_non_positive_tolerance(self):
        with pytest.raises(ValidationError, match="tolerances must be positive"):
            QuadratureConfig(rel_tol=0.0)

    def test_rejects_unsorted_breakpoints(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            QuadratureConfig(breakpoints=(2.0, 1.0))

    def test_with_breakpoints_sorts_and_filters(self):
        cfg = QuadratureConfig().with_breakpoints([10.0, 1.0, 1.0, -3.0, math.inf, 0.0])
        assert cfg.breakpoints == (1.0, 10.0)


class TestQuadratureResult:
    def test_scaled_keeps_error_non_negative(self):
        r = QuadratureResult(value=2.0, error_estimate=1e-12, evaluations=21, converged=True)
        s = r.scaled(-0.5)
        assert (s.value, s.error_estimate) == (-1.0, 5e-13)

    def test_shifted_keeps_error(self):
        r = QuadratureResult(value=2.0, error_estimate=1e-12, evaluations=21, converged=True)
        assert r.shifted(1.0).error_estimate == 1e-12

    def test_combined_adds_values_errors_and_evaluations(self):
        a = QuadratureResult(value=2.0, error_estimate=1e-12, evaluations=21, converged=True)
        b = QuadratureResult(value=-0.5, error_estimate=3e-12, evaluations=42, converged=False)
        c = a.combined(b)
        assert (c.value, c.evaluations) == (1.5, 63)
        assert c.error_estimate == pytest.approx(4e-12)
        assert not c.converged
        assert a.combined(a).converged

    def test_require_raises_with_partial_result(self):
        r = QuadratureResult(value=0.3, error_estimate=1e-3, evaluations=21, converged=False)
        with pytest.raises(QuadratureError, match="did not converge") as info:
            r.require()
        assert info.value.result is r


class TestPriceRequest:
    def test_default_is_at_the_money(self):
        assert PriceRequest(t=0.1).k == 0.0

    @pytest.mark.parametrize("t", [0.0, -1e-3])
    def test_rejects_non_positive_t(self, t: float):
        with pytest.raises(ValidationError, match="t must be positive"):
            PriceRequest(t=t)


class TestExpansionModels:
    def test_drift_term_needs_order(self):
        with pytest.raises(ValidationError, match="drift_order"):
            ExpansionTerm(exponent=1.5, coefficient=1.0, mechanism="drift", label="a2,1")

    def test_terms_must_be_sorted(self):
        a = ExpansionTerm(exponent=1.0, coefficient=1.0, mechanism="second_order", label="d2")
        b = ExpansionTerm(exponent=0.5, coefficient=1.0, mechanism="stable_first_order", label="d1")
        with pytest.raises(ValidationError, match="sorted"):
            Expansion(params=params(), terms=[a, b], k_cap=2)

    def test_proven_terms(self):
        a = ExpansionTerm(exponent=0.5, coefficient=1.0, mechanism="stable_first_order", label="d1")
        b = ExpansionTerm(
            exponent=1.6, coefficient=1.0, mechanism="candidate_kappa_cross", label="x", proven=False
        )
        assert Expansion(params=params(), terms=[a, b], k_cap=2).proven_terms() == [a]


class TestGridSpec:
    def test_rejects_ascending_t(self):
        with pytest.raises(ValidationError, match="descending"):
            GridSpec(parameter_sets=[params()], t_values=[1e-3, 1e-2], target="table_a21")

    def test_rejects_empty_parameter_sets(self):
        with pytest.raises(ValidationError, match="must not be empty"):
            GridSpec(parameter_sets=[], t_values=[1e-2], target="table_a21")


class TestTableRow:
    def test_ratio_must_match(self):
        with pytest.raises(ValidationError, match="ratio must equal"):
            TableRow(
                params_label="x", Y=1.5, t=1e-2, numerator=1.0, reference=2.0, ratio=0.6,
                quad_error=0.0, within_gate=True,
            )

    def test_nan_ratio_allowed_for_failed_cells(self):
        row = TableRow(
            params_label="x", Y=1.5, t=1e-2, numerator=math.nan, reference=math.nan,
            ratio=math.nan, quad_error=math.inf, within_gate=False, converged=False,
        )
        assert math.isnan(row.ratio)
