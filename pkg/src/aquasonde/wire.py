"""Binary framing for the sensor-node telemetry stream.

Frame layout (11 bytes, multi-byte fields big-endian):

    offset  size  field
    ------  ----  -----
    0       2     sync pair ``A5 5A``
    2       1     protocol version (currently 1)
    3       1     sequence counter, wraps 255 -> 0
    4       2     pH channel, raw ADC counts 0-1023
    6       2     temperature channel, raw ADC counts 0-1023
    8       1     battery charge, percent 0-100
    9       1     flags: bit0 = pH valid, bit1 = temperature valid,
                  bits 2-7 reserved, must be zero
    10      1     checksum, chosen so that sum(bytes[2:11]) % 256 == 0

The additive checksum detects every single-byte corruption of bytes
2-10.  ``StreamDecoder`` reassembles frames from arbitrarily chunked
input and resynchronizes on the next sync pair after corruption; the
full recovery rules are documented in docs/wire-format.md.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

SYNC = b"\xa5\x5a"
FRAME_SIZE = 11
PROTOCOL_VERSION = 1
ADC_MAX = 1023
BATTERY_MAX = 100

FLAG_PH_VALID = 0x01
FLAG_TEMP_VALID = 0x02
RESERVED_FLAG_MASK = 0xFC

# Longest partial frame worth holding between feed() calls: a sync pair
# plus all but one byte of the body.
MAX_PENDING = FRAME_SIZE - 1


class InvalidFrame(ValueError):
    """Raised when the encoder is handed a frame violating its invariants."""


class FrameErrorKind(enum.Enum):
    BAD_SYNC = "BadSync"
    UNSUPPORTED_VERSION = "UnsupportedVersion"
    CHECKSUM_MISMATCH = "ChecksumMismatch"
    FIELD_OUT_OF_RANGE = "FieldOutOfRange"
    TRUNCATED = "Truncated"


@dataclass(frozen=True)
class FrameError:
    """One decode failure.

    ``byte_offset`` is relative to the 11-byte input for
    :func:`decode_frame` (the position where the check failed) and
    cumulative over the whole stream for :class:`StreamDecoder` (the
    first byte of the offending frame or skipped run).
    """

    kind: FrameErrorKind
    byte_offset: int


@dataclass(frozen=True)
class SensorFrame:
    """One raw telemetry sample from the sensor node."""

    seq: int
    ph_adc: int
    temp_adc: int
    battery_pct: int
    flags: int = FLAG_PH_VALID | FLAG_TEMP_VALID
    version: int = PROTOCOL_VERSION

    def invariant_violation(self) -> str | None:
        """Return a description of the first violated invariant, or None."""
        if not 0 <= self.version <= 0xFF:
            return f"version {self.version} not an unsigned byte"
        if not 0 <= self.seq <= 0xFF:
            return f"seq {self.seq} outside 0-255"
        if not 0 <= self.ph_adc <= ADC_MAX:
            return f"ph_adc {self.ph_adc} outside 0-{ADC_MAX}"
        if not 0 <= self.temp_adc <= ADC_MAX:
            return f"temp_adc {self.temp_adc} outside 0-{ADC_MAX}"
        if not 0 <= self.battery_pct <= BATTERY_MAX:
            return f"battery_pct {self.battery_pct} outside 0-{BATTERY_MAX}"
        if not 0 <= self.flags <= 0xFF:
            return f"flags {self.flags} not an unsigned byte"
        if self.flags & RESERVED_FLAG_MASK:
            return f"reserved flag bits set in 0x{self.flags:02X}"
        return None

    @property
    def ph_valid(self) -> bool:
        return bool(self.flags & FLAG_PH_VALID)

    @property
    def temp_valid(self) -> bool:
        return bool(self.flags & FLAG_TEMP_VALID)


def _checksum(body: bytes) -> int:
    """Checksum byte for the 8-byte body (frame bytes 2-9)."""
    return (-sum(body)) & 0xFF


def encode_frame(frame: SensorFrame) -> bytes:
    """Encode a frame into its 11-byte wire form.

    Raises:
        InvalidFrame: if any field is outside its valid range; the
            encoder never emits a malformed frame.
    """
    violation = frame.invariant_violation()
    if violation is not None:
        raise InvalidFrame(violation)
    body = bytes(
        [
            frame.version,
            frame.seq,
            frame.ph_adc >> 8,
            frame.ph_adc & 0xFF,
            frame.temp_adc >> 8,
            frame.temp_adc & 0xFF,
            frame.battery_pct,
            frame.flags,
        ]
    )
    return SYNC + body + bytes([_checksum(body)])


def decode_frame(data: bytes) -> SensorFrame | FrameError:
    """Decode exactly 11 bytes into a frame or the first failing check.

    Check order is fixed: sync, version, checksum, field ranges.
    """
    if len(data) != FRAME_SIZE:
        raise ValueError(f"decode_frame needs exactly {FRAME_SIZE} bytes, got {len(data)}")
    if data[0:2] != SYNC:
        return FrameError(FrameErrorKind.BAD_SYNC, 0)
    if data[2] != PROTOCOL_VERSION:
        return FrameError(FrameErrorKind.UNSUPPORTED_VERSION, 2)
    if sum(data[2:]) % 256 != 0:
        return FrameError(FrameErrorKind.CHECKSUM_MISMATCH, 10)
    ph_adc = (data[4] << 8) | data[5]
    temp_adc = (data[6] << 8) | data[7]
    if ph_adc > ADC_MAX:
        return FrameError(FrameErrorKind.FIELD_OUT_OF_RANGE, 4)
    if temp_adc > ADC_MAX:
        return FrameError(FrameErrorKind.FIELD_OUT_OF_RANGE, 6)
    if data[8] > BATTERY_MAX:
        return FrameError(FrameErrorKind.FIELD_OUT_OF_RANGE, 8)
    if data[9] & RESERVED_FLAG_MASK:
        return FrameError(FrameErrorKind.FIELD_OUT_OF_RANGE, 9)
    return SensorFrame(
        seq=data[3],
        ph_adc=ph_adc,
        temp_adc=temp_adc,
        battery_pct=data[8],
        flags=data[9],
        version=data[2],
    )


def seq_gap(prev_seq: int, next_seq: int) -> int:
    """Count frames missing between two observed sequence numbers.

    Consecutive frames give 0; the counter wraps 255 -> 0.
    """
    return (next_seq - prev_seq - 1) % 256


class StreamDecoder:
    """Incremental frame decoder with resynchronization.

    Feed arbitrary byte chunks; frames and errors come back in stream
    order, independent of how the input was chunked.  Recovery rules:

    * Bytes skipped while hunting for a sync pair are reported as one
      BadSync per maximal run (offset = first skipped byte), except runs
      consumed while resynchronizing after a frame-level error, which
      are attributed to that error.
    * A frame-level failure (version, checksum, range) consumes only the
      sync pair, so a sync pair inside the corrupt payload is tried too;
      that can cost one extra ChecksumMismatch but never a lost frame.
    * At most ``MAX_PENDING`` unconsumed bytes are retained between
      calls.  ``flush()`` reports a trailing partial frame as Truncated.

    One decoder per device session; the state is single-owner.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self._base = 0  # stream offset of _buf[0]
        self._skip_start: int | None = None
        self._resyncing = False

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)

    def feed(self, chunk: bytes) -> tuple[list[SensorFrame], list[FrameError]]:
        """Consume a chunk; return (frames, errors) found so far."""
        frames: list[SensorFrame] = []
        errors: list[FrameError] = []
        buf = self._buf
        buf.extend(chunk)
        while True:
            i = buf.find(SYNC)
            if i == -1:
                # No sync pair: all but a possible trailing half-sync
                # byte can never start a frame.
                keep = 1 if buf.endswith(SYNC[:1]) else 0
                self._drop(len(buf) - keep)
                break
            if i > 0:
                self._drop(i)
            if self._skip_start is not None:
                if not self._resyncing:
                    errors.append(FrameError(FrameErrorKind.BAD_SYNC, self._skip_start))
                self._skip_start = None
            if len(buf) < FRAME_SIZE:
                break
            result = decode_frame(bytes(buf[:FRAME_SIZE]))
            if isinstance(result, FrameError):
                errors.append(FrameError(result.kind, self._base))
                self._resyncing = True
                self._consume(2)
            else:
                frames.append(result)
                self._resyncing = False
                self._consume(FRAME_SIZE)
        return frames, errors

    def flush(self) -> list[FrameError]:
        """Report what is left at end of stream; resets nothing else.

        A sync-prefixed partial frame surfaces as Truncated; a pending
        skipped run (including a lone trailing 0xA5) as BadSync, unless
        it belongs to an earlier frame error's resync.
        """
        errors: list[FrameError] = []
        if self._buf == bytearray(SYNC[:1]):
            if self._skip_start is None:
                self._skip_start = self._base
            self._consume(1)
        if self._skip_start is not None:
            if not self._resyncing:
                errors.append(FrameError(FrameErrorKind.BAD_SYNC, self._skip_start))
            self._skip_start = None
        if self._buf[:2] == SYNC:
            errors.append(FrameError(FrameErrorKind.TRUNCATED, self._base))
        return errors

    def _drop(self, n: int) -> None:
        if n <= 0:
            return
        if self._skip_start is None:
            self._skip_start = self._base
        del self._buf[:n]
        self._base += n

    def _consume(self, n: int) -> None:
        del self._buf[:n]
        self._base += n


def decode_stream(data: bytes) -> tuple[list[SensorFrame], list[FrameError]]:
    """Decode a complete byte stream in one call (feed + flush)."""
    decoder = StreamDecoder()
    frames, errors = decoder.feed(data)
    errors.extend(decoder.flush())
    return frames, errors
