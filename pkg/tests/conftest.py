import math

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

unit = st.floats(-1.0, 1.0, allow_nan=False)


@st.composite
def disc_points(draw, radius=1.0):
    r = radius * math.sqrt(draw(st.floats(0.0, 1.0)))
    a = draw(st.floats(0.0, 2 * math.pi))
    return (r * math.cos(a), r * math.sin(a))


@st.composite
def box_points(draw, halfwidth=1.0):
    return (halfwidth * draw(unit), halfwidth * draw(unit))


@st.composite
def half_plane_points(draw):
    if draw(st.integers(0, 9)) == 0:
        return draw(st.sampled_from([(0.0, 0.0), (1.0, 0.0)]))
    return (draw(st.floats(-3.0, 3.0)), draw(st.floats(1e-6, 3.0)))


@st.composite
def sum_points(draw):
    return (draw(disc_points()), draw(st.floats(0.0, 1.0)))


# -- acceptance summary ------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_runtest_logreport(report):
    mark = _marks.get(report.nodeid)
    if mark is None:
        return
    ok = _criteria.get(mark, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _criteria[mark] = ok


_marks = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _marks[item.nodeid] = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (number, title), ok in sorted(_criteria.items()):
        tr.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
