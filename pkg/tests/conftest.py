from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

OBJ_5X_4Y = (
    '<DECLARATION><OBJ_DIR norm="MAX">maximize</OBJ_DIR> <OBJ_NAME>profit</OBJ_NAME> [IS] '
    "<PARAM>5</PARAM> [TIMES] <VAR>x</VAR> [PLUS] <PARAM>4</PARAM> [TIMES] <VAR>y</VAR></DECLARATION>"
)
X_PLUS_Y_LE_10 = (
    "<DECLARATION><VAR>x</VAR> [PLUS] <VAR>y</VAR> <CONST_DIR>at most</CONST_DIR> "
    "<LIMIT>10</LIMIT></DECLARATION>"
)
X_LE_6 = "<DECLARATION><VAR>x</VAR> <CONST_DIR norm=\"LE\">at most</CONST_DIR> <LIMIT>6</LIMIT></DECLARATION>"

FIXTURE1_LP = (
    "Maximize\n obj: 5 x + 4 y\nSubject To\n c1: x + y <= 10\n c2: x <= 6\n"
    "Bounds\n x >= 0\n y >= 0\nEnd\n"
)


@pytest.fixture
def fixture1_ir() -> str:
    return (FIXTURES / "fixture1.ir").read_text(encoding="utf-8")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


# --- acceptance criteria reporting -----------------------------------------

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, text = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        _CRITERIA.append((str(number), status, text))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text in sorted(_CRITERIA, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"[{status}] criterion {number}: {text}")
