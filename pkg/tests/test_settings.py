from pathlib import Path
import sys

sys.path.append(str(Path(__file__).resolve().parents[1] / "src"))

import pytest
from pydantic import ValidationError

from certified_lmc.core.config import load_settings


def test_yaml_profile_is_loaded(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CL_SEED", raising=False)
    config = tmp_path / "config.yaml"
    config.write_text("sampling:\n  threads: 4\nplanner:\n  default_eps: 0.2\n", encoding="utf-8")
    settings = load_settings(config)
    assert settings.sampling.threads == 4
    assert settings.sampling.chunk_size == 64
    assert settings.planner.default_eps == 0.2
    assert settings.resolve_seed(5) == 5


def test_seed_environment_variable_overrides(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("CL_SEED", "1234")
    settings = load_settings(tmp_path / "missing.yaml")
    assert settings.seed_override == 1234
    assert settings.resolve_seed(5) == 1234


def test_nested_environment_values_override_yaml(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CL_SEED", raising=False)
    monkeypatch.setenv("SAMPLING__CHUNK_SIZE", "16")
    config = tmp_path / "config.yaml"
    config.write_text("sampling:\n  chunk_size: 128\n  threads: 2\n", encoding="utf-8")
    settings = load_settings(config)
    assert settings.sampling.chunk_size == 16
    assert settings.sampling.threads == 2


def test_invalid_profile_values_are_rejected(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "config.yaml"
    config.write_text("planner:\n  default_eps: 0.9\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_settings(config)
