"""FastAPI service wrapping the core package: pydantic request/response
schemas, pure compute handlers, and the HTTP app factory."""

from .app import create_app

__all__ = ["create_app"]
