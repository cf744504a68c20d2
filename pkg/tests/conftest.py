import pytest

from puppychase.geometry import build_embedding

F1 = {
    "vertices": {"a": ["0", "0"], "b": ["0", "2"], "c": ["2", "2"], "d": ["2", "0"]},
    "edges": {"e1": ["a", "b"], "e2": ["b", "c"], "e3": ["c", "d"]},
}


def _f2():
    verts, edges = {}, {}

    def v(x, y):
        name = f"v{x}_{y}"
        verts[name] = [str(x), str(y)]
        return name

    def e(name, p, q):
        edges[name] = [v(*p), v(*q)]

    e("t1", (0, 4), (3, 4))
    e("t2", (3, 4), (5, 4))
    e("t3", (5, 4), (6, 4))
    e("t4", (7, 4), (10, 4))
    e("t5", (10, 4), (12, 4))
    e("c1a", (0, 4), (0, 0))
    e("c1b", (0, 0), (10, 0))
    e("c1c", (10, 0), (10, 4))
    e("c2a", (3, 4), (3, 1))
    e("c2b", (3, 1), (7, 1))
    e("c2c", (7, 1), (7, 4))
    e("c3", (5, 4), (5, 2))
    e("c4", (6, 4), (6, 3))
    e("c5", (12, 4), (12, 3))
    return {"vertices": verts, "edges": edges}


F2 = _f2()

# two rails joined by a post on the right
F3 = {
    "vertices": {"bl": ["0", "0"], "br": ["6", "0"], "tl": ["0", "2"], "tr": ["6", "2"]},
    "edges": {"bottom": ["bl", "br"], "post": ["br", "tr"], "top": ["tl", "tr"]},
}

C1 = frozenset({"c1a", "c1b", "c1c"})
C2 = frozenset({"c2a", "c2b", "c2c"})
C3 = frozenset({"c3"})
C4 = frozenset({"c4"})
C5 = frozenset({"c5"})


@pytest.fixture
def f1():
    return build_embedding(F1)


@pytest.fixture
def f2():
    return build_embedding(F2)


@pytest.fixture
def f3():
    return build_embedding(F3)


# acceptance verdicts, filled in by test_acceptance and echoed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
