"""Logging middleware for pipeline commands.

Wraps every CLI subcommand with start/finish logging, timing and error
reporting with a full traceback.
"""
import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any


@dataclass
class CommandContext:
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)
    result: Any = None


class LoggingCommandMiddleware:
    """Logs command execution with timing and arguments."""

    def __init__(self, logger: logging.Logger | None = None):
        self.logger = logger or logging.getLogger(__name__)

    def process(self, context: CommandContext, call_next: Callable[[], Any]) -> Any:
        start_time = time.perf_counter()

        self.logger.info(f"[Command] Running {context.name}")
        self.logger.debug(f"[Command] Arguments: {context.arguments}")

        try:
            context.result = call_next()
            elapsed_time = time.perf_counter() - start_time
            self.logger.info(f"[Command] {context.name} completed successfully in {elapsed_time:.3f}s")
            self.logger.debug(f"[Command] Result: {context.result}")
            return context.result
        except Exception as e:
            elapsed_time = time.perf_counter() - start_time
            self.logger.error(
                f"[Command] {context.name} failed after {elapsed_time:.3f}s: {str(e)}",
                exc_info=True,
            )
            raise


def get_logging_middleware(logger: logging.Logger | None = None) -> LoggingCommandMiddleware:
    return LoggingCommandMiddleware(logger=logger)
