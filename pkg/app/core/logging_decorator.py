"""
Logging Decorators for automatic try-catch logging
"""

import functools
from collections.abc import Callable
from typing import Any, TypeVar

from app.core.logging import get_logger

F = TypeVar("F", bound=Callable[..., Any])


def log_exceptions(logger_name: str = "app", log_args: bool = False) -> Callable[[F], F]:
    """
    Decorator to log exceptions raised by a runner before re-raising them

    Usage:
        @log_exceptions("harness")
        def run_tail(cfg):
            ...
    """

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            logger = get_logger(logger_name)
            try:
                if log_args:
                    logger.debug(
                        f"Calling {func.__name__}",
                        context={"args": str(args), "kwargs": str(kwargs)},
                    )
                return func(*args, **kwargs)
            except Exception as e:
                logger.exception(
                    f"Exception in {func.__name__}",
                    e,
                    context={
                        "function": func.__name__,
                        "args": str(args) if log_args else "hidden",
                        "kwargs": str(kwargs) if log_args else "hidden",
                    },
                )
                raise

        return wrapper  # type: ignore[return-value]

    return decorator
