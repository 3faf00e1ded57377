"""Trigger delivery chain: datagrams, serial stimulus frames and an exciter emulator.

Two fixed-length frame formats, both closed by an XOR checksum over all
preceding bytes::

    trigger datagram (16 bytes, little-endian)
      0-1  magic 0x48 0x42 ("HB")
      2    version 0x01
      3    code 1..4
      4-7  seq        uint32
      8-11 onset      uint32, EEG sample clock
      12-14 reserved  zero
      15   checksum

    stimulus command (5 bytes)
      0    start byte 0x53 ("S")
      1    exciter channel 0..3
      2    burst duration in ms
      3    seq & 0xFF
      4    checksum

The exciter answers each command with ACK (0x06) or NAK (0x15).
"""
import socket
import struct
from collections import deque
from dataclasses import dataclass
from functools import reduce
from operator import xor

import numpy as np

from .errors import (CodeRangeError, CorruptionError, FrameLengthError,
                     InvalidParameterError, ProtocolError, WireError)
from .stim import BURST_MS, StimulusEvent

MAGIC = b"HB"
VERSION = 0x01
TRIGGER_LEN = 16
START_BYTE = 0x53
STIM_LEN = 5
ACK = 0x06
NAK = 0x15

_TRIGGER_BODY = struct.Struct("<2sBBII3x")


def checksum(data):
    return reduce(xor, data, 0)


def encode_trigger(ev):
    if ev.code not in (1, 2, 3, 4):
        raise InvalidParameterError(f"code {ev.code} outside 1..4")
    if not 0 <= ev.seq < 2**32 or not 0 <= ev.onset_sample < 2**32:
        raise InvalidParameterError(f"seq/onset must fit in uint32: {ev}")
    body = _TRIGGER_BODY.pack(MAGIC, VERSION, ev.code, ev.seq, ev.onset_sample)
    return body + bytes([checksum(body)])


def decode_trigger(buf):
    """Parse a 16-byte trigger datagram back into a StimulusEvent.

    Raises FrameLengthError, ProtocolError (magic/version/reserved),
    CorruptionError (checksum) or CodeRangeError, in that order of checking.
    """
    buf = bytes(buf)
    if len(buf) != TRIGGER_LEN:
        raise FrameLengthError(f"trigger datagram must be {TRIGGER_LEN} bytes, got {len(buf)}")
    if buf[:2] != MAGIC or buf[2] != VERSION:
        raise ProtocolError(f"bad trigger header {buf[:3].hex()}")
    if checksum(buf[:15]) != buf[15]:
        raise CorruptionError(f"trigger checksum {buf[15]:#04x} != {checksum(buf[:15]):#04x}")
    if buf[12:15] != b"\x00\x00\x00":
        raise ProtocolError("reserved trigger bytes are not zero")
    _, _, code, seq, onset = _TRIGGER_BODY.unpack(buf[:15])
    if code not in (1, 2, 3, 4):
        raise CodeRangeError(f"trigger code {code} outside 1..4")
    return StimulusEvent(code, onset, seq)


@dataclass(frozen=True)
class StimCommand:
    channel: int
    duration_ms: int
    seq: int


def encode_stim_command(channel, seq, duration_ms=BURST_MS):
    if channel not in (0, 1, 2, 3):
        raise InvalidParameterError(f"exciter channel {channel} outside 0..3")
    if not 0 < duration_ms < 256:
        raise InvalidParameterError(f"duration {duration_ms} ms does not fit one byte")
    body = bytes([START_BYTE, channel, duration_ms, seq & 0xFF])
    return body + bytes([checksum(body)])


def decode_stim_command(buf):
    buf = bytes(buf)
    if len(buf) != STIM_LEN:
        raise FrameLengthError(f"stimulus frame must be {STIM_LEN} bytes, got {len(buf)}")
    if buf[0] != START_BYTE:
        raise ProtocolError(f"bad start byte {buf[0]:#04x}")
    if checksum(buf[:4]) != buf[4]:
        raise CorruptionError(f"frame checksum {buf[4]:#04x} != {checksum(buf[:4]):#04x}")
    if buf[1] > 3:
        raise CodeRangeError(f"exciter channel {buf[1]} outside 0..3")
    return StimCommand(buf[1], buf[2], buf[3])


def bridge(dgram):
    """Turn one trigger datagram into the serial command for its exciter."""
    ev = decode_trigger(dgram)
    return encode_stim_command(ev.code - 1, ev.seq % 256, BURST_MS)


@dataclass(frozen=True)
class ExciterLogEntry:
    channel: int
    receive_index: int
    duration_ms: int


class ExciterEmulator:
    """Four-exciter board: validates frames, logs bursts, answers ACK/NAK.

    ``receive_index`` counts every frame that reached the board, valid or
    not, so it is strictly increasing along the log.
    """

    def __init__(self):
        self.log = []
        self._n_received = 0
        self._pending = bytearray()

    def feed(self, frame):
        idx = self._n_received
        self._n_received += 1
        try:
            cmd = decode_stim_command(frame)
        except WireError:
            return NAK
        self.log.append(ExciterLogEntry(cmd.channel, idx, cmd.duration_ms))
        return ACK

    def feed_bytes(self, data):
        """Consume a raw serial byte stream; return the ACK/NAK bytes produced.

        Frames may arrive split across calls. Bytes before a start byte
        are skipped; after a failed frame the parser resumes at the next
        start byte following the failed one.
        """
        self._pending.extend(data)
        out = bytearray()
        buf = self._pending
        while True:
            start = buf.find(START_BYTE)
            if start < 0:
                buf.clear()
                break
            del buf[:start]
            if len(buf) < STIM_LEN:
                break
            reply = self.feed(bytes(buf[:STIM_LEN]))
            out.append(reply)
            del buf[:STIM_LEN if reply == ACK else 1]
        return bytes(out)


def exciter_emulator(frames):
    emu = ExciterEmulator()
    acks = [emu.feed(f) for f in frames]
    return acks, emu.log


class LoopbackDatagramChannel:
    """In-memory, order-preserving datagram transport."""

    def __init__(self):
        self._q = deque()

    def send(self, payload):
        self._q.append(bytes(payload))

    def recv(self):
        return self._q.popleft() if self._q else None


class LoopbackByteStream:
    def __init__(self):
        self._buf = bytearray()

    def write(self, data):
        self._buf.extend(data)

    def read(self, n=-1):
        n = len(self._buf) if n < 0 else min(n, len(self._buf))
        out = bytes(self._buf[:n])
        del self._buf[:n]
        return out


class UdpDatagramChannel:
    """One trigger per UDP packet; same send/recv surface as the loopback."""

    def __init__(self, local=("127.0.0.1", 0), peer=None, timeout=1.0):
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind(local)
        self.sock.settimeout(timeout)
        self.peer = peer

    @property
    def address(self):
        return self.sock.getsockname()

    def send(self, payload):
        self.sock.sendto(bytes(payload), self.peer)

    def recv(self):
        try:
            return self.sock.recv(64)
        except socket.timeout:
            return None

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def deliver(events, dgram_channel=None, serial=None, emulator=None):
    """Push events through encode -> datagram -> bridge -> serial -> exciter.

    Returns ``(acks, log)`` for this batch. Datagrams that fail to decode
    at the bridge produce no serial frame.
    """
    dgram_channel = dgram_channel or LoopbackDatagramChannel()
    serial = serial or LoopbackByteStream()
    emulator = emulator or ExciterEmulator()
    n_logged = len(emulator.log)
    for ev in events:
        dgram_channel.send(encode_trigger(ev))
    acks = bytearray()
    for _ in events:
        dgram = dgram_channel.recv()
        if dgram is None:
            break
        try:
            serial.write(bridge(dgram))
        except WireError:
            continue
        acks.extend(emulator.feed_bytes(serial.read()))
    return bytes(acks), emulator.log[n_logged:]


def selftest(n_events=10_000, seed=0):
    """Round-trip random events and scan every single-byte corruption.

    Returns a dict of counters; ``undetected`` and ``roundtrip_failures``
    must both be zero.
    """
    rng = np.random.default_rng(seed)
    codes = rng.integers(1, 5, n_events)
    seqs = rng.integers(0, 2**32, n_events, dtype=np.uint64)
    onsets = rng.integers(0, 2**32, n_events, dtype=np.uint64)
    roundtrip_failures = 0
    for c, s, o in zip(codes, seqs, onsets):
        ev = StimulusEvent(int(c), int(o), int(s))
        frame = encode_trigger(ev)
        cmd = decode_stim_command(bridge(frame))
        if (decode_trigger(frame) != ev
                or cmd != StimCommand(ev.code - 1, BURST_MS, ev.seq % 256)):
            roundtrip_failures += 1

    scanned = undetected = 0
    fixed = [(encode_trigger(StimulusEvent(3, 1234, 567)), decode_trigger),
             (encode_stim_command(2, 77), decode_stim_command)]
    for frame, decode in fixed:
        for pos in range(len(frame)):
            for wrong in range(256):
                if wrong == frame[pos]:
                    continue
                bad = bytearray(frame)
                bad[pos] = wrong
                scanned += 1
                try:
                    decode(bytes(bad))
                except WireError:
                    continue
                undetected += 1
    return {"events": n_events, "roundtrip_failures": roundtrip_failures,
            "corruptions_scanned": scanned, "undetected": undetected}
