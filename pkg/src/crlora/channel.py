"""Receiver-view oracle for superposed, slightly desynchronised transmissions.

The channel works at the frequency-set abstraction: at every symbol
frontier of every transmitter it reports the set of frequency bins present
on air (duplicates collapse; the receiver cannot tell how many chirps share
a bin).  Frontiers that overlap the tail down-chirps of a later-starting
preamble are reported as undetectable.  The preamble itself is not
event-expanded: the superposed preamble is assumed to reveal each
transmitter's frontier phase, which the trace publishes directly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chirp import LoRaParams, bins_per_tick

#: Ticks of preamble ahead of the first data symbol (two up-chirps plus one
#: down-chirp in the illustrative short preamble; only the final one-symbol
#: down-chirp window affects what the trace reports).
DEFAULT_PREAMBLE_SYMBOLS = 3


class DesyncError(ValueError):
    """Transmission offsets violate the slight-desynchronisation window."""


@dataclass(frozen=True)
class TransmissionInstance:
    """One transmitter: start offset in detection ticks plus its data symbols."""

    node_id: int
    start_offset: int
    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.start_offset < 0:
            raise ValueError("start_offset must be >= 0")
        if len(self.symbols) < 2 or len(set(self.symbols)) < 2:
            raise ValueError("frame needs at least one symbol change")


@dataclass(frozen=True)
class FrontierEvent:
    """One symbol-boundary instant; ``freqs`` is None when undetectable."""

    time: int
    owner: int
    symbol_index: int
    freqs: frozenset[int] | None


@dataclass(frozen=True)
class ObservationTrace:
    params: LoRaParams
    ticks_per_symbol: int
    phases: tuple[int, ...]  # first data-frontier tick per node, id order
    events: tuple[FrontierEvent, ...]
    end_time: int

    @property
    def node_count(self) -> int:
        return len(self.phases)


def validate_desync(offsets: list[int] | tuple[int, ...], ticks_per_symbol: int) -> bool:
    """True iff offsets are pairwise distinct modulo the symbol length and
    span at most one symbol minus one tick."""
    if not offsets:
        return False
    residues = [o % ticks_per_symbol for o in offsets]
    if len(set(residues)) != len(residues):
        return False
    return max(offsets) - min(offsets) <= ticks_per_symbol - 1


def generate_trace(
    transmissions: list[TransmissionInstance],
    params: LoRaParams,
    ticks_per_symbol: int,
    preamble_symbols: int = DEFAULT_PREAMBLE_SYMBOLS,
    allow_same_subslot: bool = False,
) -> ObservationTrace:
    """Superpose the transmissions and emit the frontier-event trace.

    Same-offset transmissions are rejected unless ``allow_same_subslot`` is
    set, in which case they merge into a single observed phase (the receiver
    sees one frontier and the union of their frequencies).
    """
    if not transmissions:
        raise ValueError("at least one transmission required")
    bpt = bins_per_tick(params, ticks_per_symbol)
    bins = params.bins

    # Group by offset so forced same-sub-slot cases share one phase.
    by_offset: dict[int, list[TransmissionInstance]] = {}
    for tx in sorted(transmissions, key=lambda t: (t.start_offset, t.node_id)):
        by_offset.setdefault(tx.start_offset, []).append(tx)
    offsets = sorted(by_offset)
    if len(offsets) != len(transmissions) and not allow_same_subslot:
        raise DesyncError("transmissions share a start offset")
    if len(offsets) > 1 and not validate_desync(offsets, ticks_per_symbol):
        raise DesyncError(f"offsets {offsets} violate the desync window")

    pre_ticks = preamble_symbols * ticks_per_symbol
    starts = [o + pre_ticks for o in offsets]
    ends = [
        start + max(len(tx.symbols) for tx in by_offset[o]) * ticks_per_symbol
        for o, start in zip(offsets, starts)
    ]
    end_time = max(ends)

    def freqs_at(tick: int) -> frozenset[int]:
        out = set()
        for o, start in zip(offsets, starts):
            for tx in by_offset[o]:
                rel = tick - start
                if 0 <= rel < len(tx.symbols) * ticks_per_symbol:
                    sym = tx.symbols[rel // ticks_per_symbol]
                    out.add((sym + (rel % ticks_per_symbol) * bpt) % bins)
        return frozenset(out)

    # A frontier inside any other transmitter's closing down-chirp cannot be
    # frequency-detected (up-chirp and down-chirp superposed).
    def undetectable(tick: int, own_start: int) -> bool:
        return any(
            s - ticks_per_symbol <= tick < s for s in starts if s != own_start
        )

    events = []
    for node, start in enumerate(starts, start=1):
        tick = start
        idx = 0
        while tick <= end_time:
            if undetectable(tick, start):
                events.append(FrontierEvent(tick, node, idx, None))
            else:
                events.append(FrontierEvent(tick, node, idx, freqs_at(tick)))
            tick += ticks_per_symbol
            idx += 1
    events.sort(key=lambda e: e.time)
    return ObservationTrace(params, ticks_per_symbol, tuple(starts), tuple(events), end_time)


# ---------------------------------------------------------------------------
# Line-delimited text export / import


def write_trace(trace: ObservationTrace) -> str:
    lines = [
        "# crlora trace v1",
        f"sf={trace.params.sf}",
        f"bw={trace.params.bw:g}",
        f"ticks_per_symbol={trace.ticks_per_symbol}",
        f"nodes={trace.node_count}",
    ]
    for i, phase in enumerate(trace.phases, start=1):
        lines.append(f"phase.{i}={phase}")
    lines.append(f"end_time={trace.end_time}")
    for ev in trace.events:
        if ev.freqs is None:
            tail = "undetectable"
        else:
            tail = "freqs=" + ",".join(str(f) for f in sorted(ev.freqs))
        lines.append(f"event t={ev.time} owner={ev.owner} idx={ev.symbol_index} {tail}")
    return "\n".join(lines) + "\n"


class TraceParseError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def read_trace(text: str) -> ObservationTrace:
    header: dict[str, str] = {}
    phases: dict[int, int] = {}
    events = []
    saw_any = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        saw_any = True
        if line.startswith("event "):
            fields = line.split()
            try:
                t = int(fields[1].removeprefix("t="))
                owner = int(fields[2].removeprefix("owner="))
                idx = int(fields[3].removeprefix("idx="))
                tail = fields[4]
                if tail == "undetectable":
                    freqs = None
                elif tail.startswith("freqs="):
                    body = tail.removeprefix("freqs=")
                    freqs = frozenset(int(v) for v in body.split(",") if v != "")
                else:
                    raise ValueError(f"unrecognised event field {tail!r}")
            except (IndexError, ValueError) as exc:
                raise TraceParseError(lineno, str(exc)) from None
            events.append(FrontierEvent(t, owner, idx, freqs))
        elif "=" in line:
            key, value = line.split("=", 1)
            if key.startswith("phase."):
                try:
                    phases[int(key.removeprefix("phase."))] = int(value)
                except ValueError:
                    raise TraceParseError(lineno, f"bad phase entry {line!r}") from None
            else:
                header[key] = value
        else:
            raise TraceParseError(lineno, f"unrecognised line {line!r}")
    if not saw_any:
        raise TraceParseError(1, "empty trace file")
    try:
        params = LoRaParams(sf=int(header["sf"]), bw=float(header.get("bw", 125000)))
        tps = int(header["ticks_per_symbol"])
        nodes = int(header["nodes"])
        end_time = int(header["end_time"])
    except KeyError as exc:
        raise TraceParseError(1, f"missing header field {exc}") from None
    if sorted(phases) != list(range(1, nodes + 1)):
        raise TraceParseError(1, "phase entries do not match declared node count")
    phase_tuple = tuple(phases[i] for i in range(1, nodes + 1))
    return ObservationTrace(params, tps, phase_tuple, tuple(events), end_time)
