"""Shared record of acceptance outcomes, printed at the end of the session."""

RESULTS = []


def record(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok
