import numpy as np
import pytest

from zeno_sim.noise_model import desk_spectrum, make_arithmetic_spectrum, default_spectrum


@pytest.fixture(scope="session")
def default_spec():
    return default_spectrum()


@pytest.fixture(scope="session")
def desk():
    return desk_spectrum()


@pytest.fixture
def single():
    return make_arithmetic_spectrum(1.0, 1.0, 5.0, 1.0, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance report --------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[name] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        outcome, duration = _ACCEPTANCE[name]
        number, label = name.split("_")[2], " ".join(name.split("_")[3:])
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {label}  ({duration:.2f} s)")
