import os
from typing import Optional

from dotenv import load_dotenv

from .domain.entities import ToolkitConfiguration

load_dotenv()


def _optional_float(value: Optional[str]) -> Optional[float]:
    return float(value) if value not in (None, "") else None


class ConfigurationManager:
    """Manages the toolkit's runtime settings, loaded from environment variables."""

    # =========================================================================
    # INITIALIZATION AND SETUP METHODS (High Priority)
    # These methods handle the initial loading of configuration from environment variables.
    # =========================================================================

    def __init__(self):
        """
        Initializes the ConfigurationManager from NDEF_* environment variables.
        Every setting has a default, so no environment is required.
        """
        try:
            self.grid = int(os.getenv("NDEF_GRID", "5"))
            self.random_points = int(os.getenv("NDEF_RANDOM_POINTS", "32"))
            self.seed = int(os.getenv("NDEF_SEED", "0"))
            self.tolerance = _optional_float(os.getenv("NDEF_TOLERANCE"))
        except ValueError as e:
            raise ValueError(f"NDEF_* numeric setting is malformed: {e}") from e
        self.log_level = os.getenv("NDEF_LOG_LEVEL", "WARNING")
        self.log_file = os.getenv("NDEF_LOG_FILE", "logs/normal_deformations.log") or None
        self.schema_path = os.getenv("NDEF_SCHEMA", "data/scenario.schema.json")
        self.catalog_dir = os.getenv("NDEF_CATALOG_DIR", "data/scenarios")

    # =========================================================================
    # CONFIGURATION RETRIEVAL METHODS (High Priority)
    # =========================================================================

    def get_configuration(self) -> ToolkitConfiguration:
        """
        Returns a ToolkitConfiguration object populated with the loaded settings.
        """
        return ToolkitConfiguration(
            grid=self.grid,
            random_points=self.random_points,
            seed=self.seed,
            tolerance=self.tolerance,
            log_level=self.log_level,
            log_file=self.log_file,
            schema_path=self.schema_path,
            catalog_dir=self.catalog_dir,
        )

    # =========================================================================
    # CONFIGURATION VALIDATION METHODS (Medium Priority)
    # These methods ensure the loaded configuration values are within acceptable ranges.
    # =========================================================================

    def validate_configuration(self, config: ToolkitConfiguration) -> None:
        """
        Validates the provided ToolkitConfiguration object.
        Raises ValueError for any invalid configuration settings.
        """
        if config.grid < 2 or config.grid > 64:
            raise ValueError("NDEF_GRID must be between 2 and 64")

        if config.random_points < 0 or config.random_points > 4096:
            raise ValueError("NDEF_RANDOM_POINTS must be between 0 and 4096")

        if config.tolerance is not None and not 0 < config.tolerance < 1:
            raise ValueError("NDEF_TOLERANCE must lie in (0, 1)")

        if config.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"NDEF_LOG_LEVEL '{config.log_level}' is not a logging level")
