"""HTTP service wrapping the geometry package; see ``chgeom.service.app``."""

from .app import app

__all__ = ["app"]
