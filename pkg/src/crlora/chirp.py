"""Symbol-level LoRa math: durations, frequency trajectories, time on air.

Frequencies are integer bins in ``[0, 2**sf)``, never Hz.  Time inside a
symbol is measured in ticks of the frequency-edge detection resolution,
with ``ticks_per_symbol`` ticks per symbol duration; ``ticks_per_symbol``
must divide ``2**sf`` so a chirp advances an exact integer number of bins
per tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction


@dataclass(frozen=True)
class LoRaParams:
    """Radio configuration governing all timing math.

    ``cr`` is the coding-rate index 1..4 (1 means rate 4/5).  When
    ``low_dr_optimize`` is left to None it is enabled for SF11/SF12 at
    125 kHz, the usual rule.
    """

    sf: int = 7
    bw: float = 125_000.0
    cr: int = 1
    preamble_symbols: int = 6
    explicit_header: bool = True
    payload_crc: bool = True
    low_dr_optimize: bool | None = None

    def __post_init__(self) -> None:
        if not 3 <= self.sf <= 12:
            raise ValueError(f"sf must be in 3..12, got {self.sf}")
        if self.bw <= 0:
            raise ValueError(f"bw must be positive, got {self.bw}")
        if not 1 <= self.cr <= 4:
            raise ValueError(f"cr must be in 1..4, got {self.cr}")
        if self.preamble_symbols < 1:
            raise ValueError("preamble_symbols must be >= 1")
        if self.low_dr_optimize is None:
            object.__setattr__(
                self, "low_dr_optimize", self.sf >= 11 and self.bw <= 125_000.0
            )

    @property
    def bins(self) -> int:
        """Size of the symbol alphabet (one bin per encodable value)."""
        return 1 << self.sf


def symbol_duration(params: LoRaParams) -> float:
    """Duration of one chirp in seconds: 2**sf / bw."""
    return params.bins / params.bw


def bins_per_tick(params: LoRaParams, ticks_per_symbol: int) -> int:
    """Bins a chirp advances per detection tick; ticks must divide 2**sf."""
    if ticks_per_symbol < 1:
        raise ValueError("ticks_per_symbol must be >= 1")
    if params.bins % ticks_per_symbol != 0:
        raise ValueError(
            f"ticks_per_symbol {ticks_per_symbol} does not divide 2**{params.sf}"
        )
    return params.bins // ticks_per_symbol


def advance_bins(freq: int, ticks: int, params: LoRaParams, ticks_per_symbol: int) -> int:
    """Frequency of an up-chirp ``ticks`` detection ticks later (mod wrap)."""
    return (freq + ticks * bins_per_tick(params, ticks_per_symbol)) % params.bins


def instantaneous_frequency(symbol: int, elapsed: Fraction | float, params: LoRaParams) -> int:
    """Frequency bin of an up-chirp ``elapsed`` symbol-fractions after it starts.

    ``elapsed`` must lie in [0, 1) and be an exact multiple of 1/2**sf of a
    symbol (in practice a multiple of the tick width), so the advance is an
    integer number of bins.
    """
    if not 0 <= symbol < params.bins:
        raise ValueError(f"symbol {symbol} out of range for sf={params.sf}")
    frac = Fraction(elapsed).limit_denominator(params.bins)
    if not 0 <= frac < 1:
        raise ValueError(f"elapsed must be in [0, 1), got {elapsed}")
    shift = frac * params.bins
    if shift.denominator != 1:
        raise ValueError(f"elapsed {elapsed} is not aligned to a bin boundary")
    return (symbol + int(shift)) % params.bins


def payload_symbol_count(params: LoRaParams, payload_bytes: int) -> int:
    """Number of payload symbols after the preamble (Semtech airtime formula).

    Assumptions:
    - explicit header contributes H=0 in the formula, implicit header H=1;
    - payload CRC adds 16 bits when enabled;
    - low data-rate optimisation reduces the symbol capacity divisor.
    """
    if payload_bytes < 1:
        raise ValueError("payload_bytes must be >= 1")
    h = 0 if params.explicit_header else 1
    crc = 1 if params.payload_crc else 0
    de = 1 if params.low_dr_optimize else 0
    numer = 8 * payload_bytes - 4 * params.sf + 28 + 16 * crc - 20 * h
    denom = 4 * (params.sf - 2 * de)
    return 8 + max(math.ceil(numer / denom) * (params.cr + 4), 0)


def time_on_air(params: LoRaParams, payload_bytes: int) -> float:
    """Total frame airtime in seconds, preamble (plus 4.25 sync/SFD symbols)
    and payload included."""
    sd = symbol_duration(params)
    t_preamble = (params.preamble_symbols + 4.25) * sd
    return t_preamble + payload_symbol_count(params, payload_bytes) * sd


def lora_bitrate(params: LoRaParams) -> float:
    """Useful PHY bitrate in bits/s for the configured SF/BW/CR."""
    return params.sf * (4 / (4 + params.cr)) * params.bw / params.bins
