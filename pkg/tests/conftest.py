from pathlib import Path

import pytest

from core.paths import HOME_ENV, RESOURCES_DIR


@pytest.fixture(autouse=True)
def _isolated_home(tmp_path, monkeypatch):
    # Logs and other per-user state go to a throwaway directory.
    monkeypatch.setenv(HOME_ENV, str(tmp_path / "home"))


@pytest.fixture
def resources_dir() -> Path:
    return RESOURCES_DIR


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, content: str) -> Path:
        p = tmp_path / name
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(content, encoding="utf-8")
        return p
    return _write
