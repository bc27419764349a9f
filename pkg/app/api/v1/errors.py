"""Mapping of domain errors onto HTTP responses."""

import logging

from fastapi import HTTPException

from app.exceptions import ForkGameException, InstanceTooLargeError

logger = logging.getLogger(__name__)


def to_http_exception(error: Exception, context: str) -> HTTPException:
    """400 for domain errors, 413 for oversized instances, 500 otherwise."""
    if isinstance(error, InstanceTooLargeError):
        logger.warning(f"{context}: {error.message}")
        return HTTPException(status_code=413, detail=error.to_detail())
    if isinstance(error, ForkGameException):
        return HTTPException(status_code=400, detail=error.to_detail())
    logger.error(f"Error in {context}: {str(error)}")
    return HTTPException(status_code=500, detail=str(error))
