"""
Configuration management for cgverify.
Environment variables (a .env file is honoured) take precedence over the
JSON settings store, which takes precedence over built-in defaults.
"""
import os
from pathlib import Path
from typing import Any, Callable

from dotenv import load_dotenv

from settings_store import settings_manager

load_dotenv()


def _from_env(name: str, cast: Callable[[str], Any], fallback: Any) -> Any:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return fallback
    return cast(raw)


def _as_bool(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


class Config:
    """Verification defaults loaded from the environment and the settings store."""

    @property
    def DIFF_SCHEME(self) -> str:
        """Differentiation scheme: jets or fd."""
        return _from_env("CGVERIFY_DIFF", str, settings_manager.get_diff_scheme())

    @property
    def FD_STEP(self) -> float:
        """Base finite-difference step."""
        return _from_env("CGVERIFY_STEP", float, settings_manager.get_setting("fd_step", 1e-4))

    @property
    def RICHARDSON(self) -> bool:
        """Whether finite differences use Richardson extrapolation."""
        return _from_env("CGVERIFY_RICHARDSON", _as_bool, settings_manager.get_setting("richardson", True))

    @property
    def SAMPLES(self) -> int:
        """Random samples per check cell."""
        return _from_env("CGVERIFY_SAMPLES", int, settings_manager.get_samples())

    @property
    def SEED(self) -> int:
        """Sampling seed."""
        return _from_env("CGVERIFY_SEED", int, settings_manager.get_seed())

    @property
    def P_RADIUS(self) -> float:
        """Radius of the fibre ball sampled for p."""
        return _from_env("CGVERIFY_P_RADIUS", float, settings_manager.get_setting("p_radius", 1.5))

    @property
    def TOL_SCALE(self) -> float:
        """Multiplier applied to every check tolerance."""
        return _from_env("CGVERIFY_TOL_SCALE", float, settings_manager.get_tol_scale())

    @property
    def FD_RELAXATION(self) -> float:
        """Tolerance factor applied when the fd scheme is used."""
        return settings_manager.get_setting("fd_relaxation", 100.0)

    @property
    def CONNECTION_TOL(self) -> float:
        return settings_manager.get_setting("connection_tol", 1e-6)

    @property
    def CURVATURE_TOL(self) -> float:
        return settings_manager.get_setting("curvature_tol", 1e-5)

    @property
    def STRUCTURE_TOL(self) -> float:
        return settings_manager.get_setting("structure_tol", 1e-7)

    @property
    def CONDITION_LIMIT(self) -> float:
        """Largest condition number accepted for a metric block."""
        return settings_manager.get_setting("condition_limit", 1e12)

    @property
    def REPORT_FORMAT(self) -> str:
        """Default report format: text or json."""
        return _from_env("CGVERIFY_FORMAT", str, settings_manager.get_setting("report_format", "text"))

    @property
    def LOG_LEVEL(self) -> str:
        """Get console log level."""
        return _from_env("CGVERIFY_LOG_LEVEL", str, settings_manager.get_log_level()).upper()

    @property
    def LOG_DIR(self) -> Path:
        """Directory receiving session log files."""
        return Path(_from_env("CGVERIFY_LOG_DIR", str, settings_manager.get_setting("log_dir", "logs")))

    def validate(self) -> None:
        """Validate configuration settings."""
        if self.DIFF_SCHEME not in ("jets", "fd"):
            raise ValueError("DIFF_SCHEME must be 'jets' or 'fd'")

        if not 0 < self.FD_STEP < 1:
            raise ValueError("FD_STEP must be in (0, 1)")

        if self.SAMPLES < 1:
            raise ValueError("SAMPLES must be at least 1")

        if self.P_RADIUS <= 0:
            raise ValueError("P_RADIUS must be positive")

        if self.TOL_SCALE <= 0:
            raise ValueError("TOL_SCALE must be positive")

        if self.REPORT_FORMAT not in ("text", "json"):
            raise ValueError("REPORT_FORMAT must be 'text' or 'json'")

        if self.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown LOG_LEVEL: {self.LOG_LEVEL}")


# Global config instance
config = Config()
