import logging
import os
import sys
from typing import Optional

from ..domain.interfaces import LoggingService

LOGGER_NAME = "NormalDeformations"


class LoggingServiceImpl(LoggingService):
    """Logging service implementation."""

    # =========================================================================
    # INITIALIZATION AND SETUP METHODS (High Priority)
    # These methods handle the initial setup and configuration of the logging service.
    # =========================================================================

    def __init__(self, log_file: Optional[str] = "logs/normal_deformations.log", level: str = "WARNING"):
        """
        Initializes the LoggingServiceImpl with an optional log file.
        Console output goes to stderr so reports written to stdout stay clean.
        """
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(getattr(logging, str(level).upper(), logging.WARNING))

        if getattr(self.logger, "_ndef_configured", False):
            return

        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        if log_file:
            directory = os.path.dirname(log_file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        self.logger._ndef_configured = True

    # =========================================================================
    # LOGGING METHODS (High Priority)
    # These methods provide different levels of logging functionality.
    # =========================================================================

    def info(self, message: str) -> None:
        """Log info message."""
        self.logger.info(message)

    def warning(self, message: str) -> None:
        """Log warning message."""
        self.logger.warning(message)

    def error(self, message: str) -> None:
        """Log error message."""
        self.logger.error(message)

    def debug(self, message: str) -> None:
        """Log debug message."""
        self.logger.debug(message)
