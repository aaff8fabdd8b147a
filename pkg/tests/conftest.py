import pytest

from movingcavity.core import DIRAC, SCALAR, CavityConfig

# (criterion, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture
def scalar_cfg():
    return CavityConfig(field_kind=SCALAR, n_max=12)


@pytest.fixture
def dirac_cfg():
    return CavityConfig(field_kind=DIRAC, n_max=12)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE, key=lambda r: (int(r[0].split(".")[0]), r[0])):
        terminalreporter.write_line(f"criterion {name}: {'PASS' if ok else 'FAIL'}  {detail}")
