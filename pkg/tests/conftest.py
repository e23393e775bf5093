from pathlib import Path

import numpy as np
import pytest

from diracstar import load_config, run

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SQRT23 = np.sqrt(2.0 / 3.0)
SQRT2 = np.sqrt(2.0)
CANONICAL_ALPHAS = (SQRT23, 1.0, SQRT2)


@pytest.fixture(scope="session")
def canonical_config():
    """The shipped transparent three-bond configuration."""
    return load_config(CONFIG_DIR / "transparent_star.cfg")


@pytest.fixture(scope="session")
def canonical_run(canonical_config):
    """One shared execution of the canonical transparent run (t in [0, 10])."""
    return run(canonical_config)
