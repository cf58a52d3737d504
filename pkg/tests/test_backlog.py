import inspect

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backpressure.backlog import (
    EXPQ,
    HOL,
    QUEUE_LENGTH,
    SJB,
    BacklogMetric,
    CommodityQueue,
    backlog_value,
    expq_step,
    update_expq,
)

ALL = [BacklogMetric(k) for k in (QUEUE_LENGTH, HOL, SJB)] + [BacklogMetric(EXPQ, 0.01)]


@pytest.mark.parametrize("metric", ALL)
def test_empty_queue_has_no_backlog(metric):
    assert backlog_value(CommodityQueue(), metric, 17) == 0


def test_sojourn_metrics():
    q = CommodityQueue()
    for pid, t in enumerate((5, 7, 9)):
        q.enqueue([pid], t)
    assert backlog_value(q, BacklogMetric(HOL), 10) == 5
    assert backlog_value(q, BacklogMetric(SJB), 10) == 5 + 3 + 1
    assert backlog_value(q, BacklogMetric(QUEUE_LENGTH), 10) == 3


def test_expq_drains_to_zero():
    for eps in (0.0, 0.01, 0.5):
        assert expq_step(10.0, eps, 10, 10, 0) == 0.0


def test_expq_grows_when_unserved():
    assert expq_step(4.0, 0.01, 4, 0, 0) == pytest.approx(4.04, abs=1e-12)


def test_expq_empty_base_case():
    assert expq_step(0.0, 0.01, 0, 0, 7) == 7.0


def test_expq_contract():
    with pytest.raises(ValueError):
        expq_step(3.0, 0.01, 3, 4, 0)
    with pytest.raises(ValueError):
        BacklogMetric(EXPQ, -0.1)
    with pytest.raises(ValueError):
        BacklogMetric("age")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=60))
def test_expq_without_epsilon_tracks_length(ops):
    q = CommodityQueue()
    nxt = 0
    for t, (tx, rx) in enumerate(ops):
        before = len(q)
        tx = min(tx, before)
        q.dequeue(tx)
        q.enqueue(range(nxt, nxt + rx), t)
        nxt += rx
        update_expq(q, 0.0, before, tx, rx)
        assert q.expq_value == len(q)
        assert backlog_value(q, BacklogMetric(EXPQ), t) == backlog_value(q, BacklogMetric(QUEUE_LENGTH), t)


@given(st.one_of(st.just(0.0), st.floats(1e-6, 1e6)), st.floats(1e-4, 1.0), st.integers(0, 50))
def test_expq_monotone_without_traffic(old, eps, qlen):
    new = expq_step(old, eps, qlen, 0, 0)
    assert (new > old) == (old > 0)


def test_expq_update_reads_no_timestamps():
    class NoStamps(CommodityQueue):
        __slots__ = ()

        def head_arrival(self):
            raise AssertionError("expQ must not read packet stamps")

        def arrivals(self):
            raise AssertionError("expQ must not read packet stamps")

    q = NoStamps()
    q.enqueue([1, 2, 3], 0)
    q.expq_value = 3.0
    assert update_expq(q, 0.01, 3, 1, 2) == pytest.approx(1.01 * 3 * 2 / 3 + 2)
    assert set(inspect.signature(expq_step).parameters) == {"old", "epsilon", "q_len_before", "n_tx", "n_rx"}


def test_fifo_basics():
    q = CommodityQueue()
    q.enqueue([10, 11, 12], 0)
    assert q.dequeue(2) == [10, 11]
    assert len(q) == 1
    assert q.dequeue(0) == [] and q.packet_ids() == [12]
    with pytest.raises(ValueError):
        q.dequeue(2)


@given(st.lists(st.tuples(st.booleans(), st.integers(0, 12)), max_size=80))
def test_fifo_matches_reference_list(ops):
    q = CommodityQueue()
    ref = []
    departed, ref_departed = [], []
    nxt = 0
    for t, (push, k) in enumerate(ops):
        if push:
            ids = list(range(nxt, nxt + k))
            nxt += k
            q.enqueue(ids, t)
            ref.extend((p, t) for p in ids)
        else:
            k = min(k, len(ref))
            departed += q.dequeue(k)
            ref_departed += [p for p, _ in ref[:k]]
            del ref[:k]
        assert q.packet_ids() == [p for p, _ in ref]
        assert q.arrivals() == [s for _, s in ref]
        assert q.stamp_sum == sum(s for _, s in ref)
    assert departed == ref_departed
