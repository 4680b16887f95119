"""Byte <-> symbol mapping for frames.

A frame serialises as: one length byte, the payload, then the 16-bit CRC of
length byte + payload (when enabled).  The bit stream is packed MSB-first
into consecutive sf-bit symbols and the final symbol is zero-padded.  The
mapping is deterministic and invertible, which is what makes CRC checking
of candidate symbol sequences meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chirp import LoRaParams
from .crc import CrcConfig, crc16


class MalformedFrameError(ValueError):
    """Symbol stream does not deserialise to a well-formed frame."""


@dataclass(frozen=True)
class FrameSpec:
    """A payload with its declared length and (optional) trailing CRC word."""

    payload: bytes
    crc16: int | None = None

    def __post_init__(self) -> None:
        if len(self.payload) < 1:
            raise MalformedFrameError("payload must contain at least one byte")
        if len(self.payload) > 255:
            raise MalformedFrameError("payload longer than one length byte allows")

    @property
    def declared_length(self) -> int:
        return len(self.payload)


def make_frame(payload: bytes, crc_cfg: CrcConfig = CrcConfig()) -> FrameSpec:
    """Build a frame whose CRC covers the length byte and the payload."""
    if len(payload) < 1:
        raise MalformedFrameError("payload must contain at least one byte")
    return FrameSpec(payload, crc16(bytes([len(payload)]) + payload, crc_cfg))


def frame_crc_ok(frame: FrameSpec, crc_cfg: CrcConfig = CrcConfig()) -> bool:
    if frame.crc16 is None:
        return False
    body = bytes([frame.declared_length]) + frame.payload
    return crc16(body, crc_cfg) == frame.crc16


def _frame_bits(frame: FrameSpec, params: LoRaParams) -> tuple[bytes, int]:
    data = bytes([frame.declared_length]) + frame.payload
    if params.payload_crc:
        if frame.crc16 is None:
            raise MalformedFrameError("payload_crc enabled but frame carries no CRC")
        data += frame.crc16.to_bytes(2, "big")
    return data, len(data) * 8


def frame_to_symbols(frame: FrameSpec, params: LoRaParams) -> tuple[int, ...]:
    """Serialise a frame into sf-bit symbol values, MSB first, zero-padded."""
    data, nbits = _frame_bits(frame, params)
    sf = params.sf
    nsym = -(-nbits // sf)
    pad = nsym * sf - nbits
    stream = int.from_bytes(data, "big") << pad
    mask = params.bins - 1
    return tuple((stream >> (sf * (nsym - 1 - i))) & mask for i in range(nsym))


def symbols_to_frame(symbols: tuple[int, ...] | list[int], params: LoRaParams) -> FrameSpec:
    """Inverse of frame_to_symbols; the embedded length truncates the padding.

    Raises MalformedFrameError when the declared length does not fit the
    symbol stream or the zero padding is violated.
    """
    sf = params.sf
    nbits = len(symbols) * sf
    stream = 0
    for v in symbols:
        if not isinstance(v, int) or not 0 <= v < params.bins:
            raise MalformedFrameError(f"symbol {v!r} is not a concrete sf-bit value")
        stream = (stream << sf) | v
    if nbits < 8:
        raise MalformedFrameError("symbol stream shorter than the length byte")
    length = (stream >> (nbits - 8)) & 0xFF
    if length < 1:
        raise MalformedFrameError("declared length 0")
    used = 8 + 8 * length + (16 if params.payload_crc else 0)
    if used > nbits:
        raise MalformedFrameError(
            f"declared length {length} needs {used} bits, only {nbits} present"
        )
    if nbits - used >= sf:
        raise MalformedFrameError("trailing symbols beyond the declared frame")
    if stream & ((1 << (nbits - used)) - 1):
        raise MalformedFrameError("non-zero padding after the frame body")
    body = (stream >> (nbits - used)) & ((1 << used) - 1)
    raw = body.to_bytes(used // 8, "big")
    if params.payload_crc:
        return FrameSpec(raw[1:-2], int.from_bytes(raw[-2:], "big"))
    return FrameSpec(raw[1:], None)
