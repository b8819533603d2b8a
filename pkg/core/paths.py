from __future__ import annotations

import os
from pathlib import Path

APP_DISPLAY_NAME = "BPMN Bench"

HOME_ENV = "BPMN_BENCH_HOME"

# Bundled sample data (dataset, replay responses, config, pricing).
RESOURCES_DIR = Path(__file__).resolve().parents[1] / "resources"


def app_home_dir() -> Path:
    override = os.environ.get(HOME_ENV, "").strip()
    d = Path(override) if override else Path.home() / ".bpmn_bench"
    d.mkdir(parents=True, exist_ok=True)
    return d


def logs_dir() -> Path:
    d = app_home_dir() / "logs"
    d.mkdir(parents=True, exist_ok=True)
    return d
