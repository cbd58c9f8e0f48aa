"""
raywave - API Routes Package
"""

from src.api.routes import health, waves

__all__ = ["health", "waves"]
