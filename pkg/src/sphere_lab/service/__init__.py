"""HTTP service wrapping the core toolkit (FastAPI app + schemas)."""

from .app import app, create_app

__all__ = ["app", "create_app"]
