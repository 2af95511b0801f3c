"""Random-request application."""

from qnetsim.app import RandomRequestApp, RequestRanges
from qnetsim.kernel import make_timeline
from qnetsim.units import SECOND


class FakeNetwork:
    def __init__(self, app_box, approve):
        self.app_box = app_box
        self.approve = approve
        self.requests = []

    def request(self, res):
        self.requests.append(res)
        app = self.app_box[0]
        (app.on_approve if self.approve(res) else app.on_reject)(res)


class FakeNode:
    def __init__(self, name, network):
        self.name = name
        self.network = network


def make_app(approve, seed=3, capacity=50):
    box = [None]
    net = FakeNetwork(box, approve)
    tl = make_timeline(seed)
    app = RandomRequestApp(FakeNode("me", net), tl, ["x", "y", "z"], capacity)
    box[0] = app
    return tl, app, net


def test_requests_within_ranges():
    tl, app, net = make_app(lambda r: True)
    app.start(0)
    tl.run(500 * SECOND)
    assert len(net.requests) > 20
    prev_end = 0
    for res in net.requests:
        assert res.responder in ("x", "y", "z")
        assert 0.8 <= res.target_fidelity <= 1.0
        assert 10 <= res.memory_size <= 25
        delay = res.start - prev_end
        assert 1 * SECOND <= delay <= 2 * SECOND
        assert 10 * SECOND <= res.end - res.start <= 20 * SECOND
        prev_end = res.end
    assert all(r.outcome == "approved" for r in app.log)


def test_retry_keeps_responder_and_fidelity():
    calls = []

    def approve(res):
        calls.append(res)
        return len(calls) > 2

    tl, app, net = make_app(approve)
    app.start(0)
    tl.run(2 * SECOND + 1)
    first, second, third = net.requests[:3]
    assert first.responder == second.responder == third.responder
    assert first.target_fidelity == second.target_fidelity == third.target_fidelity
    assert app.sent_at[:3] == [0, SECOND, 2 * SECOND]
    assert [r.outcome for r in app.log[:3]] == ["rejected", "rejected", "approved"]


def test_small_array_bounds():
    tl, app, _ = make_app(lambda r: True, capacity=12)
    assert app.memory_bounds == (6, 6)
    assert RequestRanges().fidelity == (0.8, 1.0)


def test_request_stream_independent_of_physics_draws():
    seqs = []
    for burn in (0, 1000):
        tl, app, net = make_app(lambda r: True)
        for _ in range(burn):
            tl.rng.random()
        app.start(0)
        tl.run(100 * SECOND)
        seqs.append([(r.responder, r.target_fidelity, r.memory_size, r.start, r.end)
                     for r in net.requests])
    assert seqs[0] == seqs[1]
