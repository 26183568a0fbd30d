"""Unit tests for environment settings and solver presets."""

from pathlib import Path

import pytest

from src.config import AdmmConfig, AppSettings, DykstraConfig, RoundingConfig, get_preset, list_presets
from src.config.solver_profiles import override


class TestAppSettings:
    """AppSettings.from_env / validate."""

    def test_defaults(self, mock_settings):
        assert mock_settings.threads == 1
        assert mock_settings.tau_scale is None
        assert mock_settings.max_iters is None
        assert mock_settings.local_search_steps is None
        assert mock_settings.output_dir == Path("./outputs")
        assert mock_settings.verbose_logging is False
        mock_settings.validate()

    def test_reads_environment(self, monkeypatch):
        monkeypatch.setenv("TNM_THREADS", "4")
        monkeypatch.setenv("TNM_TAU_SCALE", "400")
        monkeypatch.setenv("TNM_MAX_ITERS", "50")
        monkeypatch.setenv("TNM_LS_STEPS", "0")
        monkeypatch.setenv("TNM_OUTPUT_DIR", "/tmp/masks")
        monkeypatch.setenv("TNM_VERBOSE_LOGGING", "true")
        settings = AppSettings.from_env()
        assert settings.threads == 4
        assert settings.tau_scale == 400.0
        assert settings.max_iters == 50
        assert settings.local_search_steps == 0
        assert settings.output_dir == Path("/tmp/masks")
        assert settings.verbose_logging is True
        settings.validate()

    @pytest.mark.parametrize(
        "field, value",
        [("threads", -1), ("tau_scale", 0.0), ("max_iters", 0), ("local_search_steps", -2)],
    )
    def test_validate_rejects(self, field, value):
        settings = AppSettings(**{field: value})
        with pytest.raises(ValueError):
            settings.validate()


class TestSolverPresets:
    """Solver configuration dataclasses and named presets."""

    def test_default_values(self):
        dcfg = DykstraConfig()
        assert (dcfg.tau_scale, dcfg.max_iters, dcfg.marginal_tol) == (200.0, 300, 1e-4)
        assert dcfg.tau_absolute is False
        assert RoundingConfig().local_search_steps == 10
        admm = AdmmConfig()
        assert admm.rho0 is None
        assert admm.growth == 1.03
        assert admm.max_iters == 300

    def test_presets(self):
        assert list_presets() == ["default", "fast", "precise"]
        assert get_preset("fast").dykstra.max_iters == 100
        precise = get_preset("precise")
        assert precise.dykstra.tau_scale == 800.0
        assert precise.rounding.local_search_steps == 50
        with pytest.raises(ValueError):
            get_preset("nope")

    def test_override_ignores_unset_values(self):
        base = DykstraConfig()
        assert override(base, tau_scale=None) is base
        changed = override(base, tau_scale=50.0, max_iters=None)
        assert changed.tau_scale == 50.0
        assert changed.max_iters == 300

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: DykstraConfig(tau_scale=0),
            lambda: DykstraConfig(max_iters=0),
            lambda: DykstraConfig(marginal_tol=-1),
            lambda: RoundingConfig(local_search_steps=-1),
            lambda: AdmmConfig(growth=1.0),
            lambda: AdmmConfig(rho0=0.0),
            lambda: AdmmConfig(primal_tol=0.0),
        ],
    )
    def test_invalid_configs(self, factory):
        with pytest.raises(ValueError):
            factory()
