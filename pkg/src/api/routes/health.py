"""Health check endpoints."""

import numpy as np
from fastapi import APIRouter

from src.core.utils.config import get_settings
from src.core.waves.sources import SineSource, eval_G0

router = APIRouter(tags=["Health"])


@router.get("/health")
async def health_check():
    """Simple liveness check."""
    return {"status": "healthy", "version": get_settings().version}


@router.get("/health/detailed")
async def detailed_health():
    """Liveness plus a numerical self-check of the source transforms."""
    settings = get_settings()
    # G0(0, 0) is the integral of g0, which is normalised to one
    value = complex(eval_G0(SineSource(alpha=1.0), np.array([0.0]))[0])
    numerics_ok = abs(value - 1.0) < 1e-10
    return {
        "status": "healthy" if numerics_ok else "degraded",
        "version": settings.version,
        "services": {
            "numerics": {"status": "healthy" if numerics_ok else "unhealthy",
                         "G0_at_origin": [value.real, value.imag]},
            "settings": {"max_api_cells": settings.api.max_cells},
        },
    }
