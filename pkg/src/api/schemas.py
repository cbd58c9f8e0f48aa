"""
raywave - API Request/Response Schemas
Validated inputs and outputs of the computational endpoints.
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator

from src.core.waves.fields import GridSpec
from src.core.waves.sources import ScaleParams, SpatialSource, TemporalSource
from src.runner.run_config import ConstantVelocitySpec, GaussianVelocitySpec, LensVelocitySpec

# Velocity kinds that need no file access
InlineVelocitySpec = Annotated[
    Union[ConstantVelocitySpec, GaussianVelocitySpec, LensVelocitySpec],
    Field(discriminator="kind"),
]


class SymbolsRequest(BaseModel):
    """G0(xi, t) and the even symbols on a list of frequencies."""
    temporal: TemporalSource
    xi: List[float] = Field(..., min_length=1, max_length=2048)
    t: float = Field(default=0.0, ge=0.0)

    @field_validator("xi")
    @classmethod
    def nonnegative(cls, v: List[float]) -> List[float]:
        if any(x < 0 for x in v):
            raise ValueError("xi must be nonnegative")
        return v


class SymbolsResponse(BaseModel):
    xi: List[float]
    G0_re: List[float]
    G0_im: List[float]
    f1: List[float]
    f2: List[float]
    f3: List[float]


class ProfileRequest(BaseModel):
    """F(z, psi) for one angle and a list of z."""
    scales: ScaleParams
    spatial: SpatialSource
    temporal: TemporalSource
    z: List[float] = Field(..., min_length=1, max_length=2048)
    psi: float = 0.0
    mode: Literal["closed_form", "quadrature", "instantaneous"] = "closed_form"


class ProfileResponse(BaseModel):
    omega: float
    z: List[float]
    re: List[float]
    im: List[float]


class TransientRequest(BaseModel):
    """eta_trans on a small grid."""
    scales: ScaleParams
    spatial: SpatialSource
    temporal: TemporalSource
    grid: GridSpec
    t: float = Field(default=0.0, ge=0.0)
    psi_count: int = Field(default=256, ge=8, le=2048)
    mode: Literal["closed_form", "quadrature"] = "closed_form"


class FieldResponse(BaseModel):
    component: str
    t: float
    origin: List[float]
    spacing: List[float]
    nx: int
    ny: int
    values: List[List[float]]


class RaysRequest(BaseModel):
    """Front samples for an analytic velocity field."""
    velocity: InlineVelocitySpec = Field(default_factory=ConstantVelocitySpec)
    psi_count: int = Field(default=64, ge=16, le=1024)
    times: List[float] = Field(..., min_length=1, max_length=64)
    tol: float = Field(default=1e-9, gt=0.0, lt=1e-3)

    @field_validator("times")
    @classmethod
    def positive_times(cls, v: List[float]) -> List[float]:
        if any(t <= 0 for t in v):
            raise ValueError("times must be positive")
        return sorted(v)


class FrontSlicePayload(BaseModel):
    t: float
    X: List[List[float]]
    abs_X_psi: List[float]
    morse: List[int]
    focal: List[bool]


class RaysResponse(BaseModel):
    psi: List[float]
    c0: float
    slices: List[FrontSlicePayload]


class ErrorResponse(BaseModel):
    """API error response."""
    error: str
    detail: Optional[str] = None
