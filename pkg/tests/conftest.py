import pytest

from flowkit.datastore import StoreRegistry
from flowkit.signature import INT, STR, List, Port, Tuple

VINT = Port("Var", INT)
VSTR = Port("Var", STR)
VLIST = Port("Var", List(INT))
WORDS_FILE = Port("FileStore", List(STR))
WORDS_CSL = Port("CommaSepFile", List(STR))
COUNTS_CSV = Port("CSVStore", List(Tuple(STR, INT)))


@pytest.fixture
def registry(tmp_path):
    return StoreRegistry(tmp_path / "work")


# one "PASS/FAIL criterion N" line per acceptance check, shown in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
