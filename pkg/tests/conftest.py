import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scmlab.scenario import PRESETS, preset  # noqa: E402

PRESET_NAMES = list(PRESETS)


@pytest.fixture(params=PRESET_NAMES)
def any_preset(request):
    return preset(request.param)


@pytest.fixture
def cont():
    return preset("cont")


# ------------------------------------------------------------ acceptance report
#
# Tests marked ``acceptance("<id>", "<title>")`` are collected here and printed
# as one PASS/FAIL line per criterion at the end of the session.

_ACCEPTANCE: dict[str, list[tuple[str, str, bool, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    sub, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and not detail:
        detail = str(rep.longrepr).strip().splitlines()[-1][:160]
    _ACCEPTANCE.setdefault(sub.rstrip("abcde"), []).append((sub, title, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=int):
        parts = sorted(_ACCEPTANCE[key])
        ok = all(p for _, _, p, _ in parts)
        if len(parts) == 1:
            sub, title, _, detail = parts[0]
            tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
        else:
            tr.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}")
            for sub, title, p, detail in parts:
                tr.write_line(f"    {sub}: {'PASS' if p else 'FAIL'}  {title}  [{detail}]")
