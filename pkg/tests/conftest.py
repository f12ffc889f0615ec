import os
import sys
import tempfile
from pathlib import Path

# keep the polynomial cache out of the working tree
os.environ.setdefault("WITTLAB_CACHE", tempfile.mkdtemp(prefix="wittlab-cache-"))
sys.path.insert(0, str(Path(__file__).parent))

import pytest  # noqa: E402

from wittlab import ring  # noqa: E402


@pytest.fixture(scope="session")
def make_ring():
    cache = {}

    def get(text):
        if text not in cache:
            cache[text] = ring(text)
        return cache[text]
    return get


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
