"""Egress port with eight priority queues, TAS gates and length-aware guard."""
from __future__ import annotations

from collections import deque

from .model import NUM_QUEUES, gate_open, next_gate_close, port_id, transmission_time

ENQUEUED = "enqueued"
DROPPED_OVERFLOW = "dropped_overflow"


class EgressPort:
    """Transmission side of one directed link.

    A frame counts toward its queue's occupancy from enqueue until its last
    bit has left (tx_end). `gcl=None` means every gate is always open.
    """

    def __init__(self, node, peer, rate, gcl=None, propagation_delay=0,
                 capacity=0, l1_overhead=False):
        self.node = node
        self.peer = peer
        self.port_id = port_id(node, peer)
        self.rate = rate
        self.gcl = gcl
        self.propagation_delay = propagation_delay
        self.capacity = capacity
        self.l1_overhead = l1_overhead
        self.queues = [deque() for _ in range(NUM_QUEUES)]
        self.occupancy = [0] * NUM_QUEUES
        self.busy_until = 0
        self.in_tx = None  # (queue, frame) while transmitting
        self.gates = gcl.entry_at(0).gates if gcl is not None else 0xFF
        self.deferred = set()  # (frame key, queue) pairs blocked by the guard
        self.overflow_drops = 0
        self.peak = [0] * NUM_QUEUES

    def duration(self, frame):
        return transmission_time(frame.size, self.rate, self.l1_overhead)

    def enqueue(self, frame, queue, t):
        if self.capacity and self.occupancy[queue] + frame.size > self.capacity:
            self.overflow_drops += 1
            return DROPPED_OVERFLOW
        self.queues[queue].append(frame)
        self.occupancy[queue] += frame.size
        if self.occupancy[queue] > self.peak[queue]:
            self.peak[queue] = self.occupancy[queue]
        return ENQUEUED

    def is_open(self, queue, t):
        return self.gcl is None or gate_open(self.gcl, queue, t)

    def fits(self, queue, duration, t):
        if self.gcl is None:
            return True
        return duration <= next_gate_close(self.gcl, queue, t) - t

    def try_transmit(self, t):
        """Start the next eligible frame, if any.

        Returns (queue, frame, duration) or None. Highest priority wins among
        queues that are non-empty, gate-open, and whose head frame completes
        before that queue's gate next closes.
        """
        if self.in_tx is not None or t < self.busy_until:
            return None
        for q in range(NUM_QUEUES - 1, -1, -1):
            queue = self.queues[q]
            if not queue or not self.is_open(q, t):
                continue
            head = queue[0]
            d = self.duration(head)
            if not self.fits(q, d, t):
                self.deferred.add((head.key, q))
                continue
            queue.popleft()
            self.in_tx = (q, head)
            self.busy_until = t + d
            return q, head, d
        return None

    def on_gate_transition(self, t):
        """Refresh the gate vector; return [(queue, is_open)] for changed gates."""
        new = self.gcl.entry_at(t).gates
        changed = [(q, bool(new >> q & 1)) for q in range(NUM_QUEUES)
                   if (new ^ self.gates) >> q & 1]
        self.gates = new
        return changed

    def complete(self, t):
        q, frame = self.in_tx
        self.in_tx = None
        self.occupancy[q] -= frame.size
        return q, frame

    def frames_held(self):
        held = sum(len(q) for q in self.queues)
        return held + (1 if self.in_tx is not None else 0)
