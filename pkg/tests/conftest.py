"""Shared pytest fixtures for hypent tests."""

import sys
from pathlib import Path

import pytest

# Ensure project root is on sys.path
project_root = Path(__file__).resolve().parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))


@pytest.fixture(scope="session")
def regular_group():
    """Regular genus-2 group (octagon with all angles pi/4)."""
    from hyperbolic.fuchsian import build_regular

    return build_regular(2)


@pytest.fixture(scope="session")
def reduction_ball(regular_group):
    """Ball of radius 2·delta0 + 1, the support of the reduction table."""
    from hyperbolic.ballenum import enumerate_ball

    return enumerate_ball(regular_group, regular_group.conservative_slack)


@pytest.fixture(scope="session")
def reduction_table(regular_group, reduction_ball):
    from hyperbolic.fuchsian import build_reduction_table

    return build_reduction_table(regular_group, reduction_ball)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Point the output directory and the ball cache at a temporary folder."""
    import config

    monkeypatch.setattr(config, "OUTPUT_DIR", tmp_path)
    monkeypatch.setattr(config, "CACHE_URL", f"sqlite:///{tmp_path / 'cache.sqlite'}")
    return tmp_path
