"""Memory state machine and rule manager."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetsim.hardware import QuantumMemory
from qnetsim.kernel import make_timeline
from qnetsim.resource import (ENTANGLED, LEGAL_TRANSITIONS, OCCUPIED, RAW, MemoryManager,
                              MemoryState, ResourceError, Rule, RuleManager)


def manager(n=4):
    tl = make_timeline(0)
    mems = [QuantumMemory("n", i, tl) for i in range(n)]
    changes = []
    return MemoryManager(mems, on_change=lambda c: changes.append(dict(c))), changes


def test_legal_transitions():
    assert (RAW, ENTANGLED) not in LEGAL_TRANSITIONS
    mm, changes = manager()
    info = mm.infos[0]
    with pytest.raises(ResourceError):
        mm.update(info, ENTANGLED)
    mm.update(info, OCCUPIED)
    with pytest.raises(ResourceError):
        mm.update(info, ENTANGLED)  # no record
    info.memory.entangle(("m", 0), 0.9, 10**12)
    mm.update(info, ENTANGLED)
    mm.update(info, OCCUPIED)
    mm.update(info, ENTANGLED)
    mm.update(info, RAW)
    assert changes[-1] == {RAW: 4, ENTANGLED: 0, OCCUPIED: 0}
    assert mm.transitions[(OCCUPIED, ENTANGLED)] == 2
    assert set(MemoryState.ALL) == {RAW, ENTANGLED, OCCUPIED}


def test_entangled_index():
    mm, _ = manager()
    for i, partner in enumerate(["a", "a", "b"]):
        info = mm.infos[i]
        info.reservation = "R"
        mm.update(info, OCCUPIED)
        info.memory.entangle((partner, i), 0.9, 10**12)
        mm.update(info, ENTANGLED)
    assert sorted(x.index for x in mm.entangled_with("R", "a")) == [0, 1]
    assert [x.index for x in mm.entangled_with("R", "b")] == [2]
    assert list(mm.entangled_with("S", "a")) == []
    mm.update(mm.infos[0], OCCUPIED)
    assert [x.index for x in mm.entangled_with("R", "a")] == [1]
    assert mm.fractions() == (0.25, 0.5, 0.25)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from([RAW, ENTANGLED, OCCUPIED])),
                max_size=60))
def test_counts_conserved_under_any_sequence(ops):
    mm, changes = manager()
    for idx, state in ops:
        info = mm.infos[idx]
        if state is ENTANGLED and info.memory.record is None:
            info.memory.entangle(("m", idx), 0.9, 10**12)
        try:
            mm.update(info, state)
        except ResourceError:
            assert (info.state, state) not in LEGAL_TRANSITIONS or info.state is state
        if info.state is RAW:
            info.memory.record = None
    assert sum(mm.counts.values()) == 4
    assert mm.counts == {s: sum(i.state is s for i in mm.infos) for s in (RAW, ENTANGLED, OCCUPIED)}
    for c in changes:
        assert sum(c.values()) == 4


def test_rule_priority_and_insertion_order():
    rm_ = RuleManager()
    fired = []

    def make(tag, prio, matches=True, **kw):
        return Rule(prio, lambda info, rm: [info] if matches else None,
                    lambda rm, infos: fired.append(tag), name=tag, **kw)

    rm_.install(make("late-low", 30))
    rm_.install(make("high-a", 10, matches=False))
    rm_.install(make("mid-1", 20))
    rm_.install(make("mid-2", 20))
    assert [r.name for r in rm_.rules] == ["high-a", "mid-1", "mid-2", "late-low"]

    class Info:
        state = RAW
        reservation = None

    assert rm_.evaluate(Info(), None, 0).name == "mid-1"
    assert fired == ["mid-1"]
    occupied = Info()
    occupied.state = OCCUPIED
    assert rm_.evaluate(occupied, None, 0) is None


def test_rule_windows_and_reservation_scope():
    rm_ = RuleManager()
    r = Rule(1, lambda i, rm: [i], lambda rm, infos: None, reservation="R", start=10, end=20)
    rm_.install(r)

    class Info:
        state = RAW
        reservation = "R"

    assert rm_.evaluate(Info(), None, 5) is None
    assert rm_.evaluate(Info(), None, 10) is r
    assert rm_.evaluate(Info(), None, 20) is r
    other = Info()
    other.reservation = "S"
    assert rm_.evaluate(other, None, 15) is None
    assert rm_.uninstall_expired(20) == []
    assert rm_.uninstall_expired(21) == [r]
    assert rm_.rules == []
