"""Routers package."""

from fastapi import HTTPException, status

from app.errors import FramingError, MalformedPayloadError, MalformedStreamError, SimulatorError


def http_error(exc: SimulatorError) -> HTTPException:
    """400 for bad configuration or inputs, 422 for wire-level faults."""
    if isinstance(exc, (FramingError, MalformedPayloadError, MalformedStreamError)):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
