import numpy as np
import pytest
from hypothesis import strategies as st

from pseudocentroid import build_matrix

M4_ROWS = [[0, 1, 3, 7], [1, 0, 2, 6], [3, 2, 0, 4], [7, 6, 4, 0]]


@pytest.fixture
def m4():
    # distances between points 0, 1, 3, 7 on a line
    return build_matrix(np.array(M4_ROWS))


@st.composite
def sym_matrices(draw, n_min=2, n_max=10, hi=20):
    """Symmetric non-negative integer matrices with a zero diagonal.

    A small ``hi`` makes ties common, which is where index tie-breaks matter.
    """
    n = draw(st.integers(n_min, n_max))
    vals = draw(st.lists(st.integers(1, hi), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    d = np.zeros((n, n), dtype=np.int64)
    d[np.triu_indices(n, 1)] = vals
    return build_matrix(d + d.T)


# one summary line per acceptance criterion, printed after the run
_criteria: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _criteria[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        status, title, detail = _criteria[number]
        line = f"criterion {number:2d}: {status}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
