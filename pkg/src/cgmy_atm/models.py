from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

TableKind = Literal["table_a21", "table_a12", "table_cubic", "table_convergence"]
GridTarget = Literal[
    "table_a21", "table_a12", "table_cubic", "table_convergence", "heatmap_d2", "lattice"
]
Mechanism = Literal[
    "stable_first_order",
    "second_order",
    "drift",
    "binomial_first",
    "candidate_kappa_cross",
    "candidate_second_binomial",
]


def _finite(name: str, v: float) -> float:
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v!r}")
    return v


class CgmyParams(BaseModel):
    model_config = {"frozen": True}

    C: float
    G: float
    M: float
    Y: float

    @field_validator("C")
    @classmethod
    def _check_c(cls, v: float) -> float:
        if not _finite("C", v) > 0:
            raise ValueError(f"C must be positive, got {v!r}")
        return v

    @field_validator("G")
    @classmethod
    def _check_g(cls, v: float) -> float:
        if not _finite("G", v) >= 0:
            raise ValueError(f"G must be non-negative, got {v!r}")
        return v

    @field_validator("M")
    @classmethod
    def _check_m(cls, v: float) -> float:
        if not _finite("M", v) > 1:
            raise ValueError(f"M must exceed 1, got {v!r}")
        return v

    @field_validator("Y")
    @classmethod
    def _check_y(cls, v: float) -> float:
        if not 1 < _finite("Y", v) < 2:
            raise ValueError(f"Y must lie in the open interval (1, 2), got {v!r}")
        return v

    @property
    def label(self) -> str:
        return f"C={self.C:g},G={self.G:g},M={self.M:g},Y={self.Y:g}"


class DerivedParams(BaseModel):
    model_config = {"frozen": True}

    c_gamma: float = Field(description="C * Gamma(-Y)")
    tilde_b: float
    kappa: float
    sigma_y: float
    m_shift: float
    g_shift: float
    beta1: complex
    beta2: complex

    @field_serializer("beta1", "beta2", when_used="json")
    def _complex_pair(self, z: complex) -> list[float]:
        return [z.real, z.imag]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, result: QuadratureResult):
        super().__init__(message)
        self.result = result


class QuadratureConfig(BaseModel):
    model_config = {"frozen": True}

    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_subdivisions: int = 2000
    breakpoints: tuple[float, ...] = ()

    @field_validator("rel_tol", "abs_tol")
    @classmethod
    def _positive_tol(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"tolerances must be positive, got {v!r}")
        return v

    @field_validator("max_subdivisions")
    @classmethod
    def _positive_cap(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"max_subdivisions must be a positive integer, got {v!r}")
        return v

    @field_validator("breakpoints")
    @classmethod
    def _increasing(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(b <= 0 or not math.isfinite(b) for b in v):
            raise ValueError("breakpoints must be positive and finite")
        if any(b >= a for b, a in zip(v, v[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        return v

    def with_breakpoints(self, points: list[float] | tuple[float, ...]) -> QuadratureConfig:
        """Copy with the given split hints, sorted and de-duplicated."""
        cleaned = sorted({float(b) for b in points if b > 0 and math.isfinite(b)})
        return self.model_copy(update={"breakpoints": tuple(cleaned)})


class QuadratureResult(BaseModel):
    model_config = {"frozen": True}

    value: float
    error_estimate: float = Field(ge=0.0)
    evaluations: int = Field(ge=1)
    converged: bool

    def shifted(self, delta: float) -> QuadratureResult:
        return self.model_copy(update={"value": self.value + delta})

    def scaled(self, factor: float) -> QuadratureResult:
        return self.model_copy(
            update={
                "value": self.value * factor,
                "error_estimate": self.error_estimate * abs(factor),
            }
        )

    def combined(self, other: QuadratureResult) -> QuadratureResult:
        return QuadratureResult(
            value=self.value + other.value,
            error_estimate=self.error_estimate + other.error_estimate,
            evaluations=self.evaluations + other.evaluations,
            converged=self.converged and other.converged,
        )

    def require(self) -> float:
        if not self.converged:
            raise QuadratureError(
                f"quadrature did not converge: value={self.value!r}, "
                f"error estimate={self.error_estimate!r} after {self.evaluations} evaluations",
                self,
            )
        return self.value


class PriceRequest(BaseModel):
    model_config = {"frozen": True}

    t: float
    k: float = 0.0

    @field_validator("t")
    @classmethod
    def _positive_t(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("t must be positive")
        return v


class ExpansionTerm(BaseModel):
    model_config = {"frozen": True}

    exponent: float = Field(gt=0.0)
    coefficient: float
    mechanism: Mechanism
    drift_order: int | None = None
    proven: bool = True
    label: str
    tie: bool = False
    absorbed: bool = False

    @model_validator(mode="after")
    def _drift_has_order(self) -> ExpansionTerm:
        if self.mechanism == "drift" and (self.drift_order is None or self.drift_order < 1):
            raise ValueError("drift terms need a positive drift_order")
        return self


class Expansion(BaseModel):
    model_config = {"frozen": True}

    params: CgmyParams
    terms: list[ExpansionTerm]
    k_cap: int = Field(ge=1)
    notes: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _sorted(self) -> Expansion:
        exps = [term.exponent for term in self.terms]
        if exps != sorted(exps):
            raise ValueError("expansion terms must be sorted by exponent")
        return self

    def proven_terms(self) -> list[ExpansionTerm]:
        return [term for term in self.terms if term.proven]


class GridSpec(BaseModel):
    parameter_sets: list[CgmyParams]
    t_values: list[float]
    target: GridTarget

    @field_validator("parameter_sets")
    @classmethod
    def _non_empty(cls, v: list[CgmyParams]) -> list[CgmyParams]:
        if not v:
            raise ValueError("parameter_sets must not be empty")
        return v

    @field_validator("t_values")
    @classmethod
    def _descending(cls, v: list[float]) -> list[float]:
        if any(t <= 0 for t in v):
            raise ValueError("t values must be positive")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("t values must be sorted in strictly descending order")
        return v


class TableRow(BaseModel):
    params_label: str
    Y: float
    t: float
    numerator: float
    reference: float
    ratio: float
    quad_error: float
    within_gate: bool
    gated: bool = True
    converged: bool = True
    published: float | None = None

    @model_validator(mode="after")
    def _ratio_matches(self) -> TableRow:
        if self.reference != 0 and math.isfinite(self.ratio):
            expected = self.numerator / self.reference
            if not math.isclose(self.ratio, expected, rel_tol=1e-12, abs_tol=1e-300):
                raise ValueError("ratio must equal numerator / reference")
        return self


class GridCell(BaseModel):
    M: float
    G: float
    difference: float
    quad_error: float
    converged: bool = True
    error: str | None = None


class LatticeRow(BaseModel):
    Y: float
    exponent: float
    label: str
    coefficient_vanishes: bool


class Bifurcation(BaseModel):
    n: int
    j: int
    Y: float
    effective: bool
    note: str = ""


class RunConfig(BaseModel):
    """Settings shared by the CLI, the tool server and the harness.

    Unknown keys are ignored, so the JSON printed by ``coeffs --format json``
    loads back as a config.
    """

    model_config = {"extra": "ignore"}

    params: CgmyParams | None = None
    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_subdivisions: int = 2000
    workers: int = Field(default=1, ge=1)
    format: Literal["csv", "json"] = "csv"
    t_values: list[float] | None = None
    table_params: dict[TableKind, list[CgmyParams]] = Field(default_factory=dict)
    heatmap_m_range: tuple[float, float] = (2.0, 8.0)
    heatmap_g_range: tuple[float, float] = (1.0, 7.0)
    heatmap_steps: int = Field(default=8, ge=1)

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(
            rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_subdivisions=self.max_subdivisions
        )


class LatticeReport(BaseModel):
    rows: list[LatticeRow]
    bifurcations: list[Bifurcation]
    markers: list[float]
