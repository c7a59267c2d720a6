"""Envelope transports: in-memory channel and framed TCP.

The in-memory channel is the hermetic default; it moves serialized envelope
bytes between peers synchronously under simulated time and taps both
directions for evidence capture. The TCP flavor exists so an external
device can be attached: frames are a 4-byte big-endian length prefix
followed by the JSON envelope, requests flowing manager-to-radio and
replies (plus asynchronous notifications) back on the same stream.
"""

from __future__ import annotations

import json
import socket
import struct
import threading
from typing import Callable

_LEN = struct.Struct("!I")
MAX_FRAME = 1 << 24


def write_frame(sock: socket.socket, payload: bytes) -> None:
    if len(payload) > MAX_FRAME:
        raise ValueError("frame too large")
    sock.sendall(_LEN.pack(len(payload)) + payload)


def read_frame(sock: socket.socket) -> bytes | None:
    head = _read_exact(sock, _LEN.size)
    if head is None:
        return None
    (length,) = _LEN.unpack(head)
    if length > MAX_FRAME:
        raise ValueError("frame length exceeds limit")
    body = _read_exact(sock, length)
    if body is None:
        raise ConnectionError("connection closed mid-frame")
    return body


def _read_exact(sock: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            if buf:
                raise ConnectionError("connection closed mid-read")
            return None
        buf += chunk
    return buf


class InMemoryChannel:
    """Synchronous request/reply pipe with an optional evidence tap."""

    def __init__(
        self,
        serve: Callable[[bytes], bytes],
        tap: Callable[[int, bytes], None] | None = None,
    ) -> None:
        # tap(direction, frame): 0 = toward the radio, 1 = from the radio
        self._serve = serve
        self._tap = tap

    def request(self, data: bytes) -> bytes:
        if self._tap:
            self._tap(0, data)
        reply = self._serve(data)
        if self._tap:
            self._tap(1, reply)
        return reply


class TcpChannel:
    """Manager side of a framed TCP stream with reply/notification demux."""

    def __init__(
        self, sock: socket.socket, on_notification: Callable[[bytes], None] | None = None
    ) -> None:
        self._sock = sock
        self._on_notification = on_notification
        self._pending: dict[int, bytes] = {}
        self._lock = threading.Lock()
        self._got = threading.Condition(self._lock)
        self._closed = False
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def request(self, data: bytes) -> bytes:
        message_id = int(json.loads(data.decode())["message_id"])
        write_frame(self._sock, data)
        with self._got:
            while message_id not in self._pending:
                if self._closed:
                    raise ConnectionError("transport closed while awaiting reply")
                self._got.wait(timeout=5.0)
        with self._lock:
            return self._pending.pop(message_id)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    def _read_loop(self) -> None:
        try:
            while True:
                frame = read_frame(self._sock)
                if frame is None:
                    break
                doc = json.loads(frame.decode())
                if "notification" in doc:
                    if self._on_notification:
                        self._on_notification(frame)
                    continue
                with self._got:
                    self._pending[int(doc["message_id"])] = frame
                    self._got.notify_all()
        except (OSError, ValueError, ConnectionError):
            pass
        finally:
            with self._got:
                self._closed = True
                self._got.notify_all()


def serve_envelopes(
    sock: socket.socket, serve: Callable[[bytes], bytes]
) -> threading.Thread:
    """Radio side of a framed TCP stream: answer requests until EOF.

    Returns the serving thread; notifications can be pushed concurrently by
    writing frames to the same socket (writes are locked).
    """
    lock = threading.Lock()

    def loop() -> None:
        try:
            while True:
                frame = read_frame(sock)
                if frame is None:
                    break
                reply = serve(frame)
                with lock:
                    write_frame(sock, reply)
        except (OSError, ConnectionError):
            pass

    thread = threading.Thread(target=loop, daemon=True)
    thread.start()
    thread.push_lock = lock  # type: ignore[attr-defined]
    return thread
