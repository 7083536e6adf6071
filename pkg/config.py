# Configuration file
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent

try:
    with (PROJECT_ROOT / "hypent.toml").open("rb") as handle:
        _FILE = tomllib.load(handle).get("hypent", {})
except FileNotFoundError:
    _FILE = {}


def _setting(name, default):
    """Environment wins over hypent.toml, which wins over the default."""
    value = os.getenv(name, _FILE.get(name.lower().removeprefix("hypent_"), default))
    return type(default)(value)


OUTPUT_DIR = Path(_setting("HYPENT_OUTPUT_DIR", str(PROJECT_ROOT / "output")))

CACHE_URL = _setting("HYPENT_CACHE_URL", f"sqlite:///{OUTPUT_DIR / 'hypent_cache.sqlite'}")

# Thread count for per-cell evaluation; results never depend on it.
THREADS = max(1, _setting("HYPENT_THREADS", os.cpu_count() or 1))

BALL_BUDGET = _setting("HYPENT_BALL_BUDGET", 2_000_000)

SEED = _setting("HYPENT_SEED", 20240607)
