import pytest

from recordgof.records import RecordSample

# times (minutes) between 48 consecutive calls, in arrival order
CALL_TIMES = [
    1.34, 0.14, 0.33, 1.68, 1.86, 1.31, 0.83, 0.33,
    2.20, 0.62, 3.20, 1.38, 0.96, 0.28, 0.44, 0.59,
    0.25, 0.51, 1.61, 1.85, 0.47, 0.41, 1.46, 0.09,
    2.18, 0.07, 0.02, 0.64, 0.28, 0.68, 1.07, 3.25,
    0.59, 2.39, 0.27, 0.34, 2.18, 0.41, 1.08, 0.57,
    0.35, 0.69, 0.25, 0.57, 1.90, 0.56, 0.09, 0.28,
]


@pytest.fixture
def call_times():
    return list(CALL_TIMES)


@pytest.fixture
def calls():
    """Records of the call-time data."""
    return RecordSample([1.34, 0.14, 0.09, 0.07, 0.02], [1, 22, 2, 1, 22])


@pytest.fixture
def aircon():
    """Successive minima of air-conditioning failure times, plane 7914."""
    return RecordSample([50, 44, 22, 3], [1, 3, 2, 18])


@pytest.fixture
def simulated_w4():
    """Records of a simulated W(4, 1) sample of size 30."""
    return RecordSample([0.879, 0.765, 0.735, 0.220], [3, 2, 2, 23])


@pytest.fixture(params=["calls", "aircon", "simulated_w4"])
def worked_example(request):
    return request.getfixturevalue(request.param)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion; shown in the terminal summary."""
    lines = request.config.stash.setdefault(_CRITERIA, [])

    def report(number, failures, summary):
        status = "PASS" if not failures else "FAIL"
        line = f"criterion {number}: {status}  {summary}"
        if failures:
            line += "  | " + "; ".join(failures)
        lines.append((number, line))
        print(line)
        assert not failures, "\n".join(failures)

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
