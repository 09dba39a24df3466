"""Rendezvous (unbuffered) channels between coordinator processes."""

from __future__ import annotations

from collections import deque
from typing import TYPE_CHECKING

from .errors import ShutdownInterrupt
from .mux import Source
from .terms import check_message
from .trace import TraceEvent, TraceKind

if TYPE_CHECKING:
    from .runtime import Runtime


class _Offer:
    __slots__ = ("message", "taken")

    def __init__(self, message: str):
        self.message = message
        self.taken = False


class Channel:
    """A named rendezvous point.

    ``send`` returns only once some receiver (a blocking :meth:`receive`
    or a mux polling :meth:`source`) has taken the message. Nothing is
    stored for a future receiver: an offer that is withdrawn because of
    shutdown is never delivered. Waiting senders are served in arrival
    order, which gives per-sender FIFO.

    The id is a debug label only; two channels with equal ids are
    unrelated.
    """

    def __init__(self, id: str, runtime: Runtime):
        self.id = id
        self._rt = runtime
        self._offers: deque[_Offer] = deque()
        self._source = ChannelSource(self)

    def __repr__(self) -> str:
        return f"Channel({self.id!r})"

    def send(self, message: str) -> None:
        check_message(message)
        rt = self._rt
        rt.emit(TraceEvent(TraceKind.CHAN_SEND, self.id, message))
        offer = _Offer(message)
        with rt.cond:
            rt.check_running()
            self._offers.append(offer)
            rt.cond.notify_all()
            while not offer.taken:
                if rt.shut_down:
                    self._offers.remove(offer)
                    raise ShutdownInterrupt(f"send on channel {self.id!r}")
                rt.cond.wait()

    def receive(self) -> str:
        rt = self._rt
        with rt.cond:
            while True:
                rt.check_running()
                if self._offers:
                    return self._take()
                rt.cond.wait()

    def source(self) -> ChannelSource:
        """The mux source for this channel (one per channel)."""
        return self._source

    def _take(self) -> str:
        # caller holds rt.cond
        offer = self._offers.popleft()
        offer.taken = True
        self._rt.cond.notify_all()
        return offer.message


class ChannelSource(Source):
    def __init__(self, channel: Channel):
        self.channel = channel

    def __repr__(self) -> str:
        return f"ChannelSource({self.channel.id!r})"

    def poll(self):
        if self.channel._offers:
            return self.channel._take()
        return None
