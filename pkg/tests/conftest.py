import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from snnc.relay import GaussianRelaySpec, cf_rate, cutset_point, optimize_nnc, optimize_snnc  # noqa: E402
from snnc.twrc import TwrcSpec, optimize_twrc_nnc, optimize_twrc_snnc  # noqa: E402

RELAY_GRID = np.linspace(0.05, 0.95, 50)
TWRC_GRID = np.linspace(0.1, 0.9, 25)

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def relay_sweep():
    """Optimized relay schemes on the 50-point grid, with wall times per scheme."""
    out = {"d": RELAY_GRID, "snnc": [], "nnc": [], "cf": [], "cutset": []}
    times = {"snnc": 0.0, "nnc": 0.0}
    for d in RELAY_GRID:
        spec = GaussianRelaySpec.at(float(d))
        t0 = time.perf_counter()
        out["nnc"].append(optimize_nnc(spec)[0])
        t1 = time.perf_counter()
        out["snnc"].append(optimize_snnc(spec)[0])
        t2 = time.perf_counter()
        times["nnc"] += t1 - t0
        times["snnc"] += t2 - t1
        out["cf"].append(cf_rate(spec))
        out["cutset"].append(cutset_point(spec))
    out["times"] = times
    return out


@pytest.fixture(scope="session")
def twrc_sweep():
    out = {"d": TWRC_GRID, "snnc": [], "nnc": []}
    t0 = time.perf_counter()
    for d in TWRC_GRID:
        spec = TwrcSpec(float(d))
        out["nnc"].append(optimize_twrc_nnc(spec)[0])
        out["snnc"].append(optimize_twrc_snnc(spec)[0])
    out["time"] = time.perf_counter() - t0
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
