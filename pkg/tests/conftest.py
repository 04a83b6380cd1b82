import random

import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()
DETAIL_KEY = pytest.StashKey[str]()

from eok.formula import Clause, Formula


def random_formula(rng: random.Random, n: int, m: int, k: int = 3, eps: float = 0.5) -> Formula:
    clauses = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), k)
        clauses.append(Clause(tuple(-v if rng.random() < eps else v for v in vs)))
    return Formula(n, k, eps, tuple(clauses))


def literal_true(lit: int, bits: str) -> bool:
    return (bits[abs(lit) - 1] == "1") == (lit > 0)


def brute_solutions(f: Formula) -> list[str]:
    """All satisfying bitstrings, evaluated literal by literal."""
    out = []
    for x in range(2**f.n):
        s = format(x, f"0{f.n}b") if f.n else ""
        if all(sum(literal_true(l, s) for l in c.literals) == 1 for c in f.clauses):
            out.append(s)
    return out


@pytest.fixture
def single_clause():
    return Formula(3, 3, 0.5, (Clause((1, 2, 3)),))


@pytest.fixture
def two_clauses():
    return Formula(4, 3, 0.5, (Clause((1, 2, 3)), Clause((1, 2, 4))))


@pytest.fixture
def detail(request):
    """Call with a string to attach a summary to this acceptance line."""
    def put(text: str) -> None:
        request.node.stash[DETAIL_KEY] = text
        print(text)
    return put


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    verdict = "PASS" if rep.passed else "FAIL"
    text = item.stash.get(DETAIL_KEY, "")
    if rep.failed and not text:
        text = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
    item.config.stash.setdefault(ACCEPTANCE_KEY, []).append((mark.args[0], f"{verdict} | {text}"))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, line in sorted(lines):
        terminalreporter.write_line(f"criterion {number:>2}: {line}")
