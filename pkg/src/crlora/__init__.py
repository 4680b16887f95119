"""Superposed-LoRa collision decoding at the frequency-set abstraction and
a beacon-slotted MAC simulator built on top of it."""

from .analysis import aggregate, p_distinct, p_distinct_mc
from .channel import (
    DesyncError,
    FrontierEvent,
    ObservationTrace,
    TransmissionInstance,
    generate_trace,
    read_trace,
    validate_desync,
    write_trace,
)
from .chirp import LoRaParams, instantaneous_frequency, symbol_duration, time_on_air
from .crc import CrcConfig, crc16
from .decoder import (
    STAR,
    DecodedFrame,
    DecodeError,
    DecodeResult,
    SameSubslotCollisionError,
    decode_many,
    decode_two,
    detect_same_subslot,
)
from .framing import FrameSpec, frame_to_symbols, make_frame, symbols_to_frame
from .resolver import ResolutionKind, ResolutionOutcome, candidate_count, disambiguate
from .sim import (
    Metrics,
    SimConfig,
    compute_energy_efficiency,
    run_aloha,
    run_cr_mac,
    run_crc_bench,
    run_simulation,
)

__all__ = [
    "CrcConfig",
    "DecodeError",
    "DecodeResult",
    "DecodedFrame",
    "DesyncError",
    "FrameSpec",
    "FrontierEvent",
    "LoRaParams",
    "Metrics",
    "ObservationTrace",
    "ResolutionKind",
    "ResolutionOutcome",
    "STAR",
    "SameSubslotCollisionError",
    "SimConfig",
    "TransmissionInstance",
    "aggregate",
    "candidate_count",
    "compute_energy_efficiency",
    "crc16",
    "decode_many",
    "decode_two",
    "detect_same_subslot",
    "disambiguate",
    "frame_to_symbols",
    "generate_trace",
    "instantaneous_frequency",
    "make_frame",
    "p_distinct",
    "p_distinct_mc",
    "read_trace",
    "run_aloha",
    "run_cr_mac",
    "run_crc_bench",
    "run_simulation",
    "symbol_duration",
    "symbols_to_frame",
    "time_on_air",
    "validate_desync",
    "write_trace",
]

__version__ = "0.1.0"
