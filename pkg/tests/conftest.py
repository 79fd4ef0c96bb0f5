from __future__ import annotations

import pytest

from hgnplan.grounding import make_task


@pytest.fixture
def chain3():
    """a --o1--> b --o2--> g, unit costs; h* from {a} is 2."""
    return make_task(
        ["a", "b", "g"],
        [("o1", ["a"], ["b"], [], 1), ("o2", ["b"], ["g"], [], 1)],
        ["a"], ["g"],
    )


@pytest.fixture
def fork():
    """o1: a->b, o2: a->c, o3: {b,c}->g, unit costs; h* from {a} is 3."""
    return make_task(
        ["a", "b", "c", "g"],
        [("o1", ["a"], ["b"], [], 1), ("o2", ["a"], ["c"], [], 1),
         ("o3", ["b", "c"], ["g"], [], 1)],
        ["a"], ["g"],
    )
