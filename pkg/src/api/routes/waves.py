"""Computational endpoints."""

from typing import NoReturn

import numpy as np
from fastapi import APIRouter, HTTPException

from src.api.schemas import (
    FieldResponse,
    FrontSlicePayload,
    ProfileRequest,
    ProfileResponse,
    RaysRequest,
    RaysResponse,
    SymbolsRequest,
    SymbolsResponse,
    TransientRequest,
)
from src.core.utils.config import get_settings
from src.core.utils.logging import get_logger_with_context
from src.core.waves.errors import RaywaveError
from src.core.waves.fields import transient_field
from src.core.waves.profile import ProfileFn, wave_profile
from src.core.waves.rays import build_front
from src.core.waves.sources import eval_G0, eval_symbols

router = APIRouter(prefix="/api/v1", tags=["Waves"])
logger = get_logger_with_context(module="waves_api")


def _fail(exc: Exception, what: str) -> NoReturn:
    if isinstance(exc, RaywaveError):
        logger.warning(f"{what} rejected: {exc}")
        raise HTTPException(status_code=422, detail=str(exc))
    logger.error(f"{what} failed: {exc}")
    raise HTTPException(status_code=500, detail=str(exc))


@router.get("/status")
async def api_status():
    """API status endpoint."""
    settings = get_settings()
    return {
        "status": "operational",
        "version": settings.version,
        "framework": settings.app_name,
    }


@router.post("/symbols", response_model=SymbolsResponse)
def symbols(request: SymbolsRequest):
    """G0(xi, t), f1, f2 and f3 on the requested frequencies."""
    try:
        xi = np.asarray(request.xi, dtype=float)
        g = eval_G0(request.temporal, xi, request.t)
        f1, f2, f3 = eval_symbols(request.temporal, xi, request.t)
    except Exception as e:
        _fail(e, "symbols")
    return SymbolsResponse(
        xi=request.xi, G0_re=np.real(g).tolist(), G0_im=np.imag(g).tolist(),
        f1=f1.tolist(), f2=f2.tolist(), f3=f3.tolist(),
    )


@router.post("/profile", response_model=ProfileResponse)
def profile(request: ProfileRequest):
    """Wave profile F(z, psi)."""
    try:
        pf = ProfileFn(request.temporal, request.spatial, request.scales.omega, request.mode)
        values = wave_profile(pf, request.z, request.psi)
    except Exception as e:
        _fail(e, "profile")
    return ProfileResponse(omega=request.scales.omega, z=request.z,
                           re=np.real(values).tolist(), im=np.imag(values).tolist())


@router.post("/transient", response_model=FieldResponse)
def transient(request: TransientRequest):
    """Transient component on a small grid."""
    limit = get_settings().api.max_cells
    cells = request.grid.nx * request.grid.ny
    if cells > limit:
        raise HTTPException(status_code=413, detail=f"{cells} cells requested; the limit is {limit}")
    try:
        grid = transient_field(request.scales, request.spatial, request.temporal, request.grid,
                               request.t, psi_count=request.psi_count, mode=request.mode)
    except Exception as e:
        _fail(e, "transient")
    return FieldResponse(component=grid.component, t=grid.t, origin=list(grid.origin),
                         spacing=list(grid.spacing), nx=grid.nx, ny=grid.ny,
                         values=grid.values.tolist())


@router.post("/rays", response_model=RaysResponse)
def rays(request: RaysRequest):
    """Front positions, |X_psi|, Morse indices and focal flags."""
    try:
        velocity = request.velocity.build(base_dir=None)
        front = build_front(velocity, request.psi_count, request.times, tol=request.tol)
    except Exception as e:
        _fail(e, "rays")
    norm = np.linalg.norm(front.X_psi, axis=-1)
    slices = [
        FrontSlicePayload(t=float(t), X=front.X[k].tolist(), abs_X_psi=norm[k].tolist(),
                          morse=front.morse[k].tolist(), focal=front.focal[k].tolist())
        for k, t in enumerate(front.times)
    ]
    return RaysResponse(psi=front.psi.tolist(), c0=front.c0, slices=slices)
