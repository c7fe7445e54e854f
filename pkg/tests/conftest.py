from collections import OrderedDict

import pytest

_ACCEPTANCE = OrderedDict()


class AcceptanceLog:
    """Collects acceptance sub-checks; one summary line per criterion is printed at the end."""

    def record(self, criterion, label, ok, detail=""):
        _ACCEPTANCE.setdefault(criterion, []).append((label, bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        rows = _ACCEPTANCE[crit]
        failed = [lab for lab, ok, _ in rows if not ok]
        status = "PASS" if not failed else "FAIL"
        tail = "" if not failed else "  (not met: " + "; ".join(failed) + ")"
        tr.write_line(f"criterion {crit}: {status}  [{len(rows) - len(failed)}/{len(rows)} checks]{tail}")
        for lab, ok, detail in rows:
            tr.write_line(f"    {'ok ' if ok else 'not'} {lab}: {detail}")
