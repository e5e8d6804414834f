import numpy as np
import pytest

from hazefuse.image_core import Image


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_rgb(rng, h=32, w=32, lo=0.0, hi=1.0):
    return Image.rgb(rng.uniform(lo, hi, (h, w, 3)))


def random_gray(rng, h=32, w=32):
    return Image.gray(rng.uniform(0.0, 1.0, (h, w)))


# -- acceptance reporting ----------------------------------------------------
# Tests marked ``@pytest.mark.acceptance(n, "title")`` get one PASS/FAIL line
# each in the terminal summary. Details recorded with ``record_property``
# ("detail", ...) are appended to the line.

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    n, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _ACCEPTANCE[n] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
