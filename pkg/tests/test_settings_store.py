"""
Unit tests for settings_store module.
Tests the JSON-backed settings manager.
"""
import pytest
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from settings_store import SettingsManager, default_settings_path


@pytest.fixture
def manager(tmp_path):
    """Settings manager backed by a temporary file."""
    return SettingsManager(tmp_path / "cgverify" / "settings.json")


class TestSettingsManager:
    """Test SettingsManager."""

    def test_save_and_get(self, manager):
        """Test a saved setting can be read back."""
        assert manager.save_setting("fd_step", 5e-4)
        assert manager.get_setting("fd_step") == 5e-4
        assert manager.path.exists()

    def test_get_default(self, manager):
        """Test missing settings return the default."""
        assert manager.get_setting("missing", "fallback") == "fallback"

    def test_get_all_and_clear(self, manager):
        """Test listing and clearing every setting."""
        manager.save_setting("a", 1)
        manager.save_setting("b", [1, 2])

        assert manager.get_all_settings() == {"a": 1, "b": [1, 2]}
        assert manager.clear_all_settings()
        assert manager.get_all_settings() == {}

    def test_corrupt_file(self, manager):
        """Test an unreadable file behaves as empty."""
        manager.path.parent.mkdir(parents=True)
        manager.path.write_text("{not json", encoding="utf-8")

        assert manager.get_setting("seed", 3) == 3

    def test_non_object_file(self, manager):
        """Test a JSON document that is not an object is ignored."""
        manager.path.parent.mkdir(parents=True)
        manager.path.write_text("[1, 2, 3]", encoding="utf-8")

        assert manager.get_all_settings() == {}

    def test_unserialisable_value(self, manager):
        """Test values JSON cannot encode are refused."""
        assert not manager.save_setting("bad", object())


class TestConvenienceMethods:
    """Test the typed convenience accessors."""

    def test_defaults(self, manager):
        """Test defaults with an empty store."""
        assert manager.get_diff_scheme() == "jets"
        assert manager.get_samples() == 20
        assert manager.get_seed() == 42
        assert manager.get_tol_scale() == 1.0
        assert manager.get_log_level() == "INFO"

    def test_round_trip(self, manager):
        """Test each convenience setter persists its value."""
        manager.save_diff_scheme("fd")
        manager.save_samples(8)
        manager.save_seed(7)
        manager.save_tol_scale(2.5)
        manager.save_setting("log_level", "DEBUG")

        reloaded = SettingsManager(manager.path)
        assert reloaded.get_diff_scheme() == "fd"
        assert reloaded.get_samples() == 8
        assert reloaded.get_seed() == 7
        assert reloaded.get_tol_scale() == 2.5
        assert reloaded.get_log_level() == "DEBUG"


class TestDefaultPath:
    """Test default_settings_path."""

    def test_env_override(self, monkeypatch, tmp_path):
        """Test CGVERIFY_SETTINGS overrides the home-directory location."""
        target = tmp_path / "custom.json"
        monkeypatch.setenv("CGVERIFY_SETTINGS", str(target))

        assert default_settings_path() == target

    def test_home_location(self, monkeypatch):
        """Test the default lives under ~/.cgverify."""
        monkeypatch.delenv("CGVERIFY_SETTINGS", raising=False)

        path = default_settings_path()
        assert path.name == "settings.json"
        assert path.parent.name == ".cgverify"
