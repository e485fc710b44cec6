"""Access to the packaged example inputs (toy Hamiltonians, integrals,
fragment specs, and run configs)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def data_dir() -> Path:
    return Path(resources.files("fragprep") / "data")


def data_path(name: str) -> Path:
    path = data_dir() / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled data file named {name!r}")
    return path


def list_data_files() -> list[str]:
    return sorted(p.name for p in data_dir().iterdir() if p.is_file())
