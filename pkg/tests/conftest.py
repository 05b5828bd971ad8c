import contextlib

ACCEPTANCE = []


@contextlib.contextmanager
def criterion(number, title):
    """Record one acceptance line; the assertion error (if any) still propagates."""
    details = []
    try:
        yield details
    except BaseException as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        ACCEPTANCE.append((number, "FAIL", title, "; ".join(details + [msg])))
        raise
    ACCEPTANCE.append((number, "PASS", title, "; ".join(details)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, detail in sorted(ACCEPTANCE):
        line = f"[{status}] {number}. {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
