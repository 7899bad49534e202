import pytest

from apbias.curves import open_dataset, parse_dataset
from apbias.data import fixture_path

ACCEPTANCE_LINES = []


def load_fixture(name, **kw):
    with open_dataset(fixture_path(name)) as fh:
        return list(parse_dataset(fh, **kw))


@pytest.fixture(scope="session")
def newform_records():
    return load_fixture("newform_levels", isogeny_classes=True)


@pytest.fixture(scope="session")
def all_curves():
    return load_fixture("allcurves_20000")


@pytest.fixture(scope="session")
def class_reps():
    return load_fixture("allcurves_20000", isogeny_classes=True)


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict, shown in the terminal summary."""
    def _report(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
