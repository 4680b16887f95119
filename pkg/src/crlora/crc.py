"""Bitwise CRC-16 in the CCITT family (default parameters: XMODEM-style,
polynomial 0x1021, init 0, no reflection, no final xor)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class CrcConfig:
    """CRC variant plus the per-frame cap on disambiguation attempts."""

    polynomial: int = 0x1021
    init: int = 0x0000
    reflect_in: bool = False
    reflect_out: bool = False
    xor_out: int = 0x0000
    max_attempts: int = 4

    def __post_init__(self) -> None:
        if self.max_attempts < 0:
            raise ValueError("max_attempts must be >= 0")


def _reflect(value: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


def crc16(data: bytes, cfg: CrcConfig = CrcConfig()) -> int:
    """Bit-by-bit CRC-16 of ``data``, MSB first.  Empty input returns init."""
    crc = cfg.init & 0xFFFF
    for byte in data:
        if cfg.reflect_in:
            byte = _reflect(byte, 8)
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ cfg.polynomial) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    if cfg.reflect_out:
        crc = _reflect(crc, 16)
    return crc ^ cfg.xor_out
