"""
Settings manager for cgverify.
Persists verification defaults in a JSON file in the user's home directory.
"""
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional
import logging

logger = logging.getLogger(__name__)


def default_settings_path() -> Path:
    """Location of the settings file, overridable through CGVERIFY_SETTINGS."""
    override = os.getenv("CGVERIFY_SETTINGS")
    if override:
        return Path(override)
    return Path.home() / ".cgverify" / "settings.json"


class SettingsManager:
    """Manages verification settings stored as one JSON document."""

    def __init__(self, path: Optional[Path] = None):
        """
        Initialize the settings manager.

        Args:
            path: Settings file; defaults to default_settings_path()
        """
        self.path = Path(path) if path is not None else default_settings_path()

    def _load(self) -> Dict[str, Any]:
        if not self.path.exists():
            return {}
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as e:
            logger.error(f"Failed to read settings file {self.path}: {e}")
            return {}
        if not isinstance(data, dict):
            logger.error(f"Ignoring malformed settings file {self.path}")
            return {}
        return data

    def _store(self, data: Dict[str, Any]) -> bool:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(data, indent=2, sort_keys=True), encoding="utf-8")
            return True
        except (OSError, TypeError) as e:
            logger.error(f"Failed to write settings file {self.path}: {e}")
            return False

    def save_setting(self, name: str, value: Any) -> bool:
        """
        Save a setting.

        Args:
            name: Setting name
            value: JSON-serialisable value (str, int, float, bool, dict or list)

        Returns:
            True if successful
        """
        data = self._load()
        data[name] = value
        if self._store(data):
            logger.debug(f"Saved setting: {name}")
            return True
        return False

    def get_setting(self, name: str, default: Any = None) -> Any:
        """
        Get a setting.

        Args:
            name: Setting name
            default: Default value if not found

        Returns:
            Setting value or default
        """
        data = self._load()
        if name not in data:
            logger.debug(f"Setting not found: {name}, using default: {default}")
            return default
        return data[name]

    def get_all_settings(self) -> Dict[str, Any]:
        """Get all settings as a dictionary."""
        return dict(self._load())

    def clear_all_settings(self) -> bool:
        """Remove every stored setting."""
        try:
            if self.path.exists():
                self.path.unlink()
            logger.info("Cleared all settings")
            return True
        except OSError as e:
            logger.error(f"Failed to clear settings: {e}")
            return False

    # Convenience methods for common settings

    def save_diff_scheme(self, kind: str) -> bool:
        """Save the default differentiation scheme ("jets" or "fd")."""
        return self.save_setting("diff_scheme", kind)

    def get_diff_scheme(self) -> str:
        """Get the differentiation scheme, default jets."""
        return self.get_setting("diff_scheme", "jets")

    def save_samples(self, count: int) -> bool:
        """Save the number of random samples per cell."""
        return self.save_setting("samples", count)

    def get_samples(self) -> int:
        """Get samples per cell, default 20."""
        return self.get_setting("samples", 20)

    def save_seed(self, seed: int) -> bool:
        """Save the sampling seed."""
        return self.save_setting("seed", seed)

    def get_seed(self) -> int:
        """Get the sampling seed, default 42."""
        return self.get_setting("seed", 42)

    def save_tol_scale(self, scale: float) -> bool:
        """Save the global tolerance multiplier."""
        return self.save_setting("tol_scale", scale)

    def get_tol_scale(self) -> float:
        """Get the tolerance multiplier, default 1.0."""
        return self.get_setting("tol_scale", 1.0)

    def get_log_level(self) -> str:
        """Get log level, default INFO."""
        return self.get_setting("log_level", "INFO")


# Global instance
settings_manager = SettingsManager()
