"""CRC-based disambiguation of partially decoded frames.

A frame whose decoded stream still carries candidate sets spans a known
number of concrete realisations (the product of the set sizes).  When that
number is within the configured attempt cap, every realisation is
deserialised and CRC-checked; exactly one pass identifies the frame.  Above
the cap nothing is evaluated at all, which keeps the cost bounded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .chirp import LoRaParams
from .crc import CrcConfig
from .decoder import STAR, DecodedFrame
from .framing import FrameSpec, MalformedFrameError, frame_crc_ok, symbols_to_frame


class ResolutionKind(Enum):
    RESOLVED = "resolved"
    AMBIGUOUS = "ambiguous"
    SKIPPED = "skipped"
    ALREADY_CONCRETE = "already_concrete"


@dataclass(frozen=True)
class ResolutionOutcome:
    kind: ResolutionKind
    candidate_count: int
    attempts_used: int = 0
    passing_count: int = 0
    frame: FrameSpec | None = None
    symbols: tuple[int, ...] | None = None


def candidate_count(frame: DecodedFrame, params: LoRaParams) -> int:
    """Number of concrete symbol sequences consistent with the decode.

    Star placeholders (which a finished two-transmitter decode never
    leaves behind) count as the full alphabet.
    """
    count = 1
    for s in frame.symbols:
        if isinstance(s, int):
            continue
        if s is STAR:
            count *= params.bins
        else:
            count *= len(s)
    return count


def _position_choices(frame: DecodedFrame, params: LoRaParams):
    for i, s in enumerate(frame.symbols):
        if isinstance(s, int):
            continue
        if s is STAR:
            yield i, tuple(range(params.bins))
        else:
            yield i, tuple(sorted(s))


def disambiguate(
    frame: DecodedFrame, cfg: CrcConfig, params: LoRaParams
) -> ResolutionOutcome:
    """Enumerate candidate realisations in lexicographic position order and
    CRC-check each; a candidate that fails to deserialise counts as a CRC
    failure without an evaluation."""
    count = candidate_count(frame, params)
    if count == 1:
        return ResolutionOutcome(ResolutionKind.ALREADY_CONCRETE, 1)
    if count > cfg.max_attempts:
        return ResolutionOutcome(ResolutionKind.SKIPPED, count)

    positions = list(_position_choices(frame, params))
    base = list(frame.symbols)
    attempts = 0
    passes: list[tuple[tuple[int, ...], FrameSpec]] = []
    for combo in itertools.product(*(choices for _, choices in positions)):
        for (i, _), v in zip(positions, combo):
            base[i] = v
        symbols = tuple(base)  # all concrete now
        try:
            candidate = symbols_to_frame(symbols, params)
        except MalformedFrameError:
            continue
        attempts += 1
        if frame_crc_ok(candidate, cfg):
            passes.append((symbols, candidate))
    if len(passes) == 1:
        symbols, spec = passes[0]
        return ResolutionOutcome(
            ResolutionKind.RESOLVED, count, attempts, 1, spec, symbols
        )
    return ResolutionOutcome(
        ResolutionKind.AMBIGUOUS, count, attempts, len(passes)
    )
