"""Frontier-by-frontier decoding of superposed transmissions.

``decode_two`` recovers both frames of a two-transmitter trace exactly: a
frontier where the frequency set did not change can only mean the owner
repeated its previous symbol, so repeats chain through a star placeholder
that is backfilled once the first change reveals the value.

``decode_many`` handles three or more transmitters, where an unchanged set
no longer implies a repeat (the owner's frequency may have moved between
two superposed bins).  Unresolved positions carry the candidate bin set and
may be retro-resolved when the owner's next frontier exposes the departing
frequency.

Both walks advance the previously detected set to the current tick before
differencing: ``new = detected - advanced`` and ``old = advanced - detected``.
Two or more appearing frequencies at one frontier mean several transmitters
share the same sub-slot, which is exactly how a gateway detects that case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .channel import ObservationTrace
from .chirp import bins_per_tick


class DecodeError(ValueError):
    """Trace is inconsistent with the assumptions of the decoding walk."""


class SameSubslotCollisionError(DecodeError):
    """Two or more frequencies appeared at a single frontier."""


class _Star:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return "*"


#: Placeholder for a leading repeated symbol awaiting backfill.
STAR = _Star()

Symbol = int | frozenset  # concrete value or candidate set


@dataclass(frozen=True)
class DecodedFrame:
    node_id: int
    symbols: tuple[Symbol, ...]
    truncated_length: int | None = None

    @property
    def is_concrete(self) -> bool:
        return all(isinstance(s, int) for s in self.symbols)


@dataclass(frozen=True)
class DecodeStep:
    """One processed frontier, recorded for inspection and debug output."""

    time: int
    owner: int
    symbol_index: int
    action: str  # skip | init | star | repeat | assign | candidates | collision | end
    f_minus: tuple[int, ...] | None = None
    f_plus: tuple[int, ...] | None = None


@dataclass
class DecodeResult:
    frames: list[DecodedFrame]
    steps: list[DecodeStep] = field(default_factory=list)
    same_subslot_detected: bool = False
    corrupted_nodes: frozenset[int] = frozenset()


def _sole(freqs: frozenset) -> int:
    (value,) = freqs
    return value


def format_symbols(symbols: tuple[Symbol, ...]) -> str:
    """Render a decoded symbol sequence with ``*`` and ``{a,b}`` notation."""
    parts = []
    for s in symbols:
        if isinstance(s, int):
            parts.append(str(s))
        elif isinstance(s, frozenset):
            parts.append("{" + ",".join(str(v) for v in sorted(s)) + "}")
        else:
            parts.append("*")
    return " ".join(parts)


class _Walk:
    """Shared frontier iteration: skip undetectable frontiers, seed on the
    first detected set, then advance-and-diff at every later frontier."""

    def __init__(self, trace: ObservationTrace) -> None:
        self.trace = trace
        self.bins = trace.params.bins
        self.bpt = bins_per_tick(trace.params, trace.ticks_per_symbol)

    def __iter__(self):
        prev: frozenset | None = None
        prev_time = 0
        for ev in self.trace.events:
            if ev.freqs is None:
                yield ev, None, None
                continue
            if prev is None:
                prev, prev_time = ev.freqs, ev.time
                yield ev, None, ev.freqs
                continue
            dt = ev.time - prev_time
            f_minus = frozenset((f + dt * self.bpt) % self.bins for f in prev)
            yield ev, f_minus, ev.freqs
            prev, prev_time = ev.freqs, ev.time


def _trim_and_finalize(
    entries: dict[int, dict[int, object]],
    last_owner: int,
    node_count: int,
    backfill_stars: bool,
    lenient: frozenset[int] = frozenset(),
) -> list[DecodedFrame]:
    frames = []
    for node in range(1, node_count + 1):
        slots = entries.get(node, {})
        if slots and node != last_owner:
            del slots[max(slots)]  # the symbol predicted past the frame end
        symbols: list[Symbol] = []
        for idx in range(max(slots) + 1 if slots else 0):
            if idx not in slots:
                if node in lenient:
                    symbols.append(frozenset())
                    continue
                raise DecodeError(f"node {node} has a gap at symbol {idx}")
            symbols.append(slots[idx])  # type: ignore[arg-type]
        if backfill_stars:
            first_known = next((s for s in symbols if isinstance(s, int)), None)
            if first_known is None:
                raise DecodeError(f"node {node} never changed symbol")
            symbols = [first_known if s is STAR else s for s in symbols]
        frames.append(DecodedFrame(node, tuple(symbols)))
    return frames


def decode_two(trace: ObservationTrace, record_steps: bool = False) -> DecodeResult:
    """Decode a two-transmitter trace exactly.

    The walk skips the first transmitter's first frontier (undetectable
    under the second preamble's down-chirp) and seeds the ledger at the
    second transmitter's first frontier.  An unchanged set is a repeat; a
    changed set pins the owner's previous symbol from the vanished
    frequency (or the surviving one when the vanished bin was shared) and
    the new symbol from the appearing frequency (same sharing rule).
    """
    if trace.node_count != 2:
        raise DecodeError(f"expected a 2-node trace, got {trace.node_count}")
    entries: dict[int, dict[int, object]] = {1: {}, 2: {}}
    steps: list[DecodeStep] = []
    last_owner = None

    def record(ev, action, f_minus=None, f_plus=None):
        if record_steps:
            steps.append(
                DecodeStep(
                    ev.time,
                    ev.owner,
                    ev.symbol_index,
                    action,
                    None if f_minus is None else tuple(sorted(f_minus)),
                    None if f_plus is None else tuple(sorted(f_plus)),
                )
            )

    def assign(node: int, idx: int, value: int) -> None:
        cur = entries[node].get(idx)
        if isinstance(cur, int) and cur != value:
            raise DecodeError(
                f"node {node} symbol {idx} decoded twice with {cur} then {value}"
            )
        entries[node][idx] = value

    for ev, f_minus, f_plus in _Walk(trace):
        if f_plus is None:
            record(ev, "skip")
            continue
        if f_minus is None:
            record(ev, "init", None, f_plus)
            continue
        if len(f_plus) > 2:
            raise DecodeError("more than two frequencies: not a 2-node trace")
        k, j = ev.owner, ev.symbol_index
        if not f_plus:
            if len(f_minus) != 1:
                raise DecodeError("trace ended with several frequencies on air")
            assign(k, j - 1, _sole(f_minus))
            record(ev, "end", f_minus, f_plus)
            last_owner = k
            break
        new_f = f_plus - f_minus
        old_f = f_minus - f_plus
        if len(new_f) >= 2 or len(old_f) >= 2:
            raise SameSubslotCollisionError(
                f"{max(len(new_f), len(old_f))} frequencies changed at t={ev.time}"
            )
        if f_plus == f_minus:
            prev = entries[k].get(j - 1)
            if prev is None or prev is STAR:
                entries[k][j - 1] = STAR
                entries[k][j] = STAR
                record(ev, "star", f_minus, f_plus)
            else:
                entries[k][j] = prev
                record(ev, "repeat", f_minus, f_plus)
            continue
        # the departing chirp wraps back to its symbol value at the owner's
        # own frontier, so no translation is needed for either value
        if old_f:
            v_old = _sole(old_f)
        elif len(f_minus) == 1:
            v_old = _sole(f_minus)  # vanished bin was shared with the other node
        else:
            raise DecodeError(f"ambiguous previous symbol at t={ev.time}")
        if new_f:
            v_new = _sole(new_f)
        elif len(f_plus) == 1:
            v_new = _sole(f_plus)  # appearing bin coincides with the other node
        else:
            raise DecodeError(f"ambiguous new symbol at t={ev.time}")
        assign(k, j - 1, v_old)
        assign(k, j, v_new)
        record(ev, "assign", f_minus, f_plus)
    else:
        raise DecodeError("trace has no final empty detection")

    frames = _trim_and_finalize(entries, last_owner, 2, backfill_stars=True)
    return DecodeResult(frames, steps)


def decode_many(
    trace: ObservationTrace,
    n: int | None = None,
    on_same_subslot: str = "raise",
    record_steps: bool = False,
) -> DecodeResult:
    """Decode a trace of two or more transmitters, keeping candidate sets.

    Unlike the two-transmitter walk this never assumes a repeat: an
    unchanged set leaves the new symbol as the candidate set of detected
    bins, and an undetermined previous symbol as the candidate set of
    advanced bins.  Later frontiers resolve candidates whenever the
    departing frequency vanishes visibly.

    ``on_same_subslot`` is either "raise" (strict, the default) or "mark",
    which records the offending owners in ``corrupted_nodes`` and keeps
    walking; marked owners' frames are not trustworthy.
    """
    if n is not None and n != trace.node_count:
        raise DecodeError(f"trace carries {trace.node_count} nodes, caller said {n}")
    if on_same_subslot not in ("raise", "mark"):
        raise ValueError("on_same_subslot must be 'raise' or 'mark'")
    entries: dict[int, dict[int, object]] = {
        node: {} for node in range(1, trace.node_count + 1)
    }
    corrupted: set[int] = set()
    steps: list[DecodeStep] = []
    last_owner = None

    def record(ev, action, f_minus=None, f_plus=None):
        if record_steps:
            steps.append(
                DecodeStep(
                    ev.time,
                    ev.owner,
                    ev.symbol_index,
                    action,
                    None if f_minus is None else tuple(sorted(f_minus)),
                    None if f_plus is None else tuple(sorted(f_plus)),
                )
            )

    def set_known(node: int, idx: int, value: int) -> None:
        cur = entries[node].get(idx)
        if isinstance(cur, int) and cur != value:
            if on_same_subslot == "mark":
                corrupted.add(node)
                return
            raise DecodeError(
                f"node {node} symbol {idx} decoded twice with {cur} then {value}"
            )
        if isinstance(cur, frozenset) and value not in cur:
            if on_same_subslot == "mark":
                corrupted.add(node)
                return
            raise DecodeError(
                f"node {node} symbol {idx}: {value} outside candidates {sorted(cur)}"
            )
        entries[node][idx] = value

    def set_candidates(node: int, idx: int, freqs: frozenset) -> None:
        if len(freqs) == 1:
            set_known(node, idx, _sole(freqs))
        else:
            entries[node][idx] = freqs

    for ev, f_minus, f_plus in _Walk(trace):
        if f_plus is None:
            record(ev, "skip")
            continue
        if f_minus is None:
            record(ev, "init", None, f_plus)
            continue
        k, j = ev.owner, ev.symbol_index
        if not f_plus:
            if len(f_minus) == 1:
                set_known(k, j - 1, _sole(f_minus))
            elif on_same_subslot == "raise":
                raise DecodeError("trace ended with several frequencies on air")
            record(ev, "end", f_minus, f_plus)
            last_owner = k
            break
        new_f = f_plus - f_minus
        old_f = f_minus - f_plus
        if len(new_f) >= 2 or len(old_f) >= 2:
            if on_same_subslot == "raise":
                raise SameSubslotCollisionError(
                    f"{max(len(new_f), len(old_f))} frequencies changed at t={ev.time}"
                )
            corrupted.add(k)
            record(ev, "collision", f_minus, f_plus)
            continue
        # previous symbol: a vanished bin pins it; otherwise it survives
        # among the advanced bins, which only helps if nothing is known yet
        if old_f:
            set_known(k, j - 1, _sole(old_f))
        elif entries[k].get(j - 1) is None:
            set_candidates(k, j - 1, f_minus)
        # new symbol: an appearing bin pins it; otherwise any detected bin
        if new_f:
            set_known(k, j, _sole(new_f))
            record(ev, "assign", f_minus, f_plus)
        else:
            set_candidates(k, j, f_plus)
            record(ev, "candidates", f_minus, f_plus)
    else:
        raise DecodeError("trace has no final empty detection")

    frames = _trim_and_finalize(
        entries,
        last_owner,
        trace.node_count,
        backfill_stars=False,
        lenient=frozenset(corrupted),
    )
    return DecodeResult(
        frames,
        steps,
        same_subslot_detected=bool(corrupted),
        corrupted_nodes=frozenset(corrupted),
    )


def detect_same_subslot(trace: ObservationTrace) -> bool:
    """True iff some frontier shows two or more appearing frequencies."""
    try:
        result = decode_many(trace, on_same_subslot="mark")
    except DecodeError:
        return True
    return result.same_subslot_detected
