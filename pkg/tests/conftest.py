import shutil
import sys
from pathlib import Path

import numpy as np
import pytest

from dlsscale.codemap import Iso639Table
from dlsscale.synth import demo_path

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def iso_full():
    return Iso639Table.default()


@pytest.fixture
def demo(tmp_path):
    """A writable copy of the bundled demo inputs."""
    dst = tmp_path / "demo"
    shutil.copytree(demo_path(), dst)
    return dst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def nested_bank(n_lang, n_items, rng):
    """Strictly nested responses: language i passes item j iff i's level exceeds j's threshold."""
    ability = rng.permutation(n_lang)
    thresholds = np.sort(rng.choice(np.arange(1, n_lang), size=n_items, replace=False))
    return ability[:, None] >= thresholds[None, :]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in results.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
