"""Seeded simulator comparing random-access uplink (ALOHA) against the
beacon-slotted collision-resolving MAC.

Traffic model: every device regenerates a frame at a uniformly jittered
interval (+-30%) with mean ``time_on_air / duty_cycle`` after its previous
first attempt completes, i.e. it saturates its duty-cycle budget.  The duty
cycle is enforced the way LoRa radios do it: each transmission is followed
by an off-period of ``time_on_air * (1/duty - 1)`` before the device may
transmit again.  A cumulative-from-zero budget rule would instead park
every device on the same k*(ToA/duty) lattice and synchronise their
transmissions, which is a simulation artifact, not a protocol property.

The single ideal retransmission granted to a destroyed frame is an
accounting device: it is charged full airtime energy and delay but does not
occupy the channel or the duty budget, so it never destroys other frames.

Every simulated quantity is derived from per-device random streams seeded
from (run seed, device id), which makes runs bit-reproducible regardless of
scheduling or thread-pool layout.
"""

from __future__ import annotations

import hashlib
import heapq
import math
import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, fields

from .channel import TransmissionInstance, generate_trace
from .chirp import LoRaParams, symbol_duration, time_on_air
from .crc import CrcConfig
from .decoder import decode_many
from .framing import frame_to_symbols, make_frame
from .resolver import ResolutionKind, disambiguate

PROTOCOLS = ("aloha", "cr_mac")
ALOHA_RULES = ("start_during", "any_overlap")
BEACON_LISTEN = ("always", "when_pending")


class SimConfigError(ValueError):
    """A scenario field is missing, unknown or out of range."""


@dataclass(frozen=True)
class SimConfig:
    protocol: str = "cr_mac"
    num_devices: int = 100
    frame_payload_bytes: int = 50
    sf: int = 7
    bw: float = 125_000.0
    sub_slots: int = 4
    slots_per_beacon: int = 100
    beacon_payload_bytes: int = 10
    duty_cycle: float = 0.01
    sim_duration: float = 120.0
    warmup: float = -1.0  # negative: default to one mean traffic interval
    seed: int = 42
    tx_power_w: float = 0.066
    rx_power_w: float = 0.0195
    crc_max_attempts: int = 4
    retransmission: bool = True
    aloha_collision_rule: str = "start_during"
    beacon_listen: str = "always"

    def __post_init__(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise SimConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.num_devices < 1:
            raise SimConfigError("num_devices must be >= 1")
        if self.frame_payload_bytes < 1:
            raise SimConfigError("frame_payload_bytes must be >= 1")
        if self.sub_slots < 1:
            raise SimConfigError("sub_slots must be >= 1")
        if self.slots_per_beacon < 1:
            raise SimConfigError("slots_per_beacon must be >= 1")
        if not 0 < self.duty_cycle <= 1:
            raise SimConfigError("duty_cycle must be in (0, 1]")
        if self.sim_duration <= 0:
            raise SimConfigError("sim_duration must be positive")
        if self.aloha_collision_rule not in ALOHA_RULES:
            raise SimConfigError(f"aloha_collision_rule must be one of {ALOHA_RULES}")
        if self.beacon_listen not in BEACON_LISTEN:
            raise SimConfigError(f"beacon_listen must be one of {BEACON_LISTEN}")

    @property
    def params(self) -> LoRaParams:
        return LoRaParams(sf=self.sf, bw=self.bw)

    @property
    def crc_config(self) -> CrcConfig:
        return CrcConfig(max_attempts=self.crc_max_attempts)


@dataclass
class Metrics:
    offered: int = 0
    delivered: int = 0
    first_attempt_success: int = 0
    clean: int = 0
    resolved_by_decoder: int = 0
    resolved_by_crc: int = 0
    lost_same_subslot: int = 0
    lost_unresolved: int = 0
    lost_overlap: int = 0
    retransmissions: int = 0
    crc_attempts: int = 0
    bits_delivered: int = 0
    tx_energy_j: float = 0.0
    beacon_energy_j: float = 0.0
    energy_j: float = 0.0
    mean_delay_s: float = 0.0
    throughput_bps: float = 0.0
    decode_success_fraction: float = 0.0
    metered_duration_s: float = 0.0

    def as_row(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def compute_energy_efficiency(metrics: Metrics) -> float:
    """Successfully delivered bits per joule of consumed energy."""
    if metrics.bits_delivered == 0:
        return 0.0
    if metrics.energy_j <= 0:
        raise ValueError("metrics carry delivered bits but zero energy")
    return metrics.bits_delivered / metrics.energy_j


def device_rng(seed: int, device: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{device}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-run seed for sweep entry ``index`` under a master seed."""
    digest = hashlib.sha256(f"{master_seed}/{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# ---------------------------------------------------------------------------
# Frame bookkeeping shared by both protocols


@dataclass
class _Frame:
    device: int
    gen: float
    start: float = 0.0
    end: float = 0.0
    lost: bool = False
    category: str = ""
    delivered_at: float = -1.0
    attempts: int = 1
    crc_attempts: int = 0


def _finalize(cfg: SimConfig, frames: list[_Frame], toa: float, beacon_energy: float) -> Metrics:
    warmup = cfg.warmup if cfg.warmup >= 0 else toa / cfg.duty_cycle
    metered = [f for f in frames if warmup <= f.gen < cfg.sim_duration]
    m = Metrics()
    m.metered_duration_s = max(cfg.sim_duration - warmup, 0.0)
    m.offered = len(metered)
    delays = []
    for f in metered:
        if f.category == "clean":
            m.clean += 1
        elif f.category == "decoded":
            m.resolved_by_decoder += 1
        elif f.category == "crc":
            m.resolved_by_crc += 1
        elif f.category == "same_subslot":
            m.lost_same_subslot += 1
        elif f.category == "unresolved":
            m.lost_unresolved += 1
        elif f.category == "overlap":
            m.lost_overlap += 1
        if not f.lost:
            m.first_attempt_success += 1
        else:
            m.retransmissions += f.attempts - 1
        if f.delivered_at >= 0:
            m.delivered += 1
            delays.append(f.delivered_at - f.gen)
        m.tx_energy_j += f.attempts * cfg.tx_power_w * toa
    m.crc_attempts = sum(f.crc_attempts for f in metered)
    m.beacon_energy_j = beacon_energy
    m.energy_j = m.tx_energy_j + m.beacon_energy_j
    m.bits_delivered = m.delivered * cfg.frame_payload_bytes * 8
    m.mean_delay_s = sum(delays) / len(delays) if delays else 0.0
    if m.metered_duration_s > 0:
        m.throughput_bps = m.bits_delivered / m.metered_duration_s
    m.decode_success_fraction = (
        m.first_attempt_success / m.offered if m.offered else 0.0
    )
    return m


# ---------------------------------------------------------------------------
# Conventional random-access uplink


def run_aloha(config: SimConfig) -> Metrics:
    """Simulate class-A style random access on one channel and SF.

    Under the default collision rule a transmission is destroyed when
    another transmission begins during it (simultaneous starts destroy each
    other); the "any_overlap" rule additionally destroys a frame that
    starts while another is already in flight.
    """
    if config.protocol != "aloha":
        raise SimConfigError("run_aloha requires protocol='aloha'")
    params = config.params
    toa = time_on_air(params, config.frame_payload_bytes)
    mean_gap = toa / config.duty_cycle
    off_period = toa * (1.0 / config.duty_cycle - 1.0)
    frames: list[_Frame] = []

    for dev in range(config.num_devices):
        rng = device_rng(config.seed, dev)
        duty_gate = 0.0
        t = rng.uniform(0, 2 * mean_gap)
        while t < config.sim_duration:
            f = _Frame(dev, gen=t)
            f.start = max(t, duty_gate)
            f.end = f.start + toa
            duty_gate = f.end + off_period
            frames.append(f)
            t = f.end + mean_gap * rng.uniform(0.7, 1.3)

    frames.sort(key=lambda f: (f.start, f.device))
    starts = [f.start for f in frames]
    ends_running_max = 0.0
    for i, f in enumerate(frames):
        if config.aloha_collision_rule == "start_during":
            # other starts (or a simultaneous one) inside [start, end)
            lo = bisect_left(starts, f.start)
            hi = bisect_left(starts, f.end)
            f.lost = hi - lo >= 2
        else:
            later = i + 1 < len(frames) and starts[i + 1] < f.end
            f.lost = later or f.start < ends_running_max
        ends_running_max = max(ends_running_max, f.end)

    for f in frames:
        if not f.lost:
            f.category = "clean"
            f.delivered_at = f.end
        else:
            f.category = "overlap"
            if config.retransmission:
                # the ideal retry still waits out the regulatory off-period
                f.attempts = 2
                f.delivered_at = f.end + off_period + toa
    return _finalize(config, frames, toa, beacon_energy=0.0)


# ---------------------------------------------------------------------------
# Beacon-slotted collision-resolving MAC


def _slot_start(cfg: SimConfig, beacon_toa: float, slot_dur: float, g: int) -> float:
    period = beacon_toa + cfg.slots_per_beacon * slot_dur
    return (g // cfg.slots_per_beacon) * period + beacon_toa + (
        g % cfg.slots_per_beacon
    ) * slot_dur


def _first_slot_at_or_after(
    cfg: SimConfig, beacon_toa: float, slot_dur: float, t: float
) -> int:
    period = beacon_toa + cfg.slots_per_beacon * slot_dur
    p = max(int(t // period), 0)
    within = t - p * period
    if within <= beacon_toa:
        return p * cfg.slots_per_beacon
    k = math.ceil((within - beacon_toa) / slot_dur - 1e-12)
    if k < cfg.slots_per_beacon:
        return p * cfg.slots_per_beacon + k
    return (p + 1) * cfg.slots_per_beacon


def _random_frame_symbols(rng: random.Random, cfg: SimConfig) -> tuple[int, ...]:
    while True:
        frame = make_frame(rng.randbytes(cfg.frame_payload_bytes), cfg.crc_config)
        symbols = frame_to_symbols(frame, cfg.params)
        if len(set(symbols)) >= 2:
            return symbols


def _decode_slot(
    cfg: SimConfig,
    entries: list[tuple[int, tuple[int, ...], int]],  # (device, symbols, sub_slot)
) -> dict[int, tuple[str, int]]:
    """Decode one slot's superposition; returns device -> (category, attempts).

    When two or more devices picked the same sub-slot the frontier walk
    breaks down for the whole slot (the gateway sees several frequencies
    appear at one frontier and discards everything); otherwise the slot is
    decoded for real and surviving candidate sets go through the CRC
    resolver under the configured attempt cap.
    """
    params = cfg.params
    by_subslot: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
    for dev, symbols, sub in entries:
        by_subslot.setdefault(sub, []).append((dev, symbols))

    if any(len(members) > 1 for members in by_subslot.values()):
        return {dev: ("same_subslot", 0) for dev, _, _ in entries}

    transmissions = [
        TransmissionInstance(node_id=dev, start_offset=sub, symbols=symbols)
        for dev, symbols, sub in entries
    ]
    trace = generate_trace(transmissions, params, cfg.sub_slots)
    result = decode_many(trace)
    phase_of = {sub: i + 1 for i, sub in enumerate(sorted(by_subslot))}

    outcome: dict[int, tuple[str, int]] = {}
    for sub, members in by_subslot.items():
        dev, symbols = members[0]
        decoded = result.frames[phase_of[sub] - 1]
        if decoded.is_concrete:
            outcome[dev] = (
                "decoded" if decoded.symbols == symbols else "unresolved",
                0,
            )
        else:
            res = disambiguate(decoded, cfg.crc_config, params)
            if res.kind is ResolutionKind.RESOLVED and res.symbols == symbols:
                outcome[dev] = ("crc", res.attempts_used)
            else:
                outcome[dev] = ("unresolved", res.attempts_used)
    return outcome


def run_cr_mac(config: SimConfig) -> Metrics:
    """Simulate the beacon-slotted MAC with sub-slot collision resolution.

    Pending devices transmit at the next slot start, delayed by a uniformly
    drawn sub-slot; all transmissions of a slot are superposed, decoded,
    and CRC-disambiguated.  A slot whose frames all chose distinct
    sub-slots usually delivers every one of them on the first attempt.
    """
    if config.protocol != "cr_mac":
        raise SimConfigError("run_cr_mac requires protocol='cr_mac'")
    params = config.params
    toa = time_on_air(params, config.frame_payload_bytes)
    beacon_toa = time_on_air(params, config.beacon_payload_bytes)
    sd = symbol_duration(params)
    slot_dur = toa + sd
    subslot_dur = sd / config.sub_slots
    mean_gap = toa / config.duty_cycle
    period = beacon_toa + config.slots_per_beacon * slot_dur

    off_period = toa * (1.0 / config.duty_cycle - 1.0)
    rngs = [device_rng(config.seed, dev) for dev in range(config.num_devices)]
    duty_gates = [0.0] * config.num_devices
    frames: list[_Frame] = []

    # (ready time, device, frame) sorted by ready; ready respects the duty
    # off-period so a slot never admits an over-budget transmitter
    heap: list[tuple[float, int, _Frame]] = []
    for dev in range(config.num_devices):
        gen = rngs[dev].uniform(0, 2 * mean_gap)
        if gen < config.sim_duration:
            heapq.heappush(heap, (gen, dev, _Frame(dev, gen)))

    while heap:
        ready, _, _ = heap[0]
        g = _first_slot_at_or_after(config, beacon_toa, slot_dur, ready)
        ts = _slot_start(config, beacon_toa, slot_dur, g)
        batch: list[_Frame] = []
        while heap and heap[0][0] <= ts:
            batch.append(heapq.heappop(heap)[2])
        batch.sort(key=lambda f: f.device)

        entries = []
        subslots = {}
        for f in batch:
            u = rngs[f.device].randrange(config.sub_slots)
            symbols = _random_frame_symbols(rngs[f.device], config)
            subslots[f.device] = (u, symbols)
            entries.append((f.device, symbols, u))

        if len(batch) == 1:
            outcomes = {batch[0].device: ("clean", 0)}
        else:
            outcomes = _decode_slot(config, entries)

        for f in batch:
            u, _ = subslots[f.device]
            category, attempts_used = outcomes[f.device]
            f.crc_attempts = attempts_used
            f.start = ts + u * subslot_dur
            f.end = f.start + toa
            duty_gates[f.device] = f.end + off_period
            f.category = category
            if category in ("clean", "decoded", "crc"):
                f.delivered_at = f.end
            else:
                f.lost = True
                if config.retransmission:
                    # retry at the first slot past the regulatory off-period
                    f.attempts = 2
                    u2 = rngs[f.device].randrange(config.sub_slots)
                    g2 = _first_slot_at_or_after(
                        config, beacon_toa, slot_dur, f.end + off_period
                    )
                    retry_ts = _slot_start(config, beacon_toa, slot_dur, g2)
                    f.delivered_at = retry_ts + u2 * subslot_dur + toa
            frames.append(f)
            gen = f.end + mean_gap * rngs[f.device].uniform(0.7, 1.3)
            if gen < config.sim_duration:
                heapq.heappush(
                    heap,
                    (max(gen, duty_gates[f.device]), f.device, _Frame(f.device, gen)),
                )

    warmup = config.warmup if config.warmup >= 0 else mean_gap
    if config.beacon_listen == "always":
        first = math.ceil(warmup / period - 1e-12)
        last = math.ceil(config.sim_duration / period - 1e-12)
        n_beacons = max(last - first, 0)
        beacon_energy = (
            n_beacons * config.num_devices * config.rx_power_w * beacon_toa
        )
    else:
        beacon_times = [p * period for p in range(int(config.sim_duration / period) + 1)]
        beacon_energy = 0.0
        for f in frames:
            if not warmup <= f.gen < config.sim_duration:
                continue
            lo = bisect_right(beacon_times, f.gen)
            hi = bisect_right(beacon_times, f.start)
            beacon_energy += (hi - lo) * config.rx_power_w * beacon_toa
    return _finalize(config, frames, toa, beacon_energy)


def run_simulation(config: SimConfig) -> Metrics:
    if config.protocol == "aloha":
        return run_aloha(config)
    return run_cr_mac(config)


# ---------------------------------------------------------------------------
# Forced-collision CRC benchmark


@dataclass(frozen=True)
class CrcBenchRow:
    colliding_frames: int
    cap: int
    trials: int
    decoded_no_crc: float  # mean fraction of frames fully decoded outright
    decoded_with_crc: float  # plus frames recovered by CRC enumeration
    avg_crc_attempts: float  # CRC evaluations per frame (0 when skipped)


def run_crc_bench(
    max_frames: int = 8,
    caps: tuple[int, ...] = (4, 100),
    trials: int = 1000,
    payload_bytes: int = 50,
    sf: int = 7,
    sub_slots: int = 8,
    seed: int = 42,
) -> list[CrcBenchRow]:
    """Force n-frame collisions at consecutive sub-slot offsets and measure
    decoding with and without CRC disambiguation under each attempt cap."""
    params = LoRaParams(sf=sf)
    cfgs = {cap: CrcConfig(max_attempts=cap) for cap in caps}
    rows = []
    for n in range(1, max_frames + 1):
        rng = random.Random(derive_seed(seed, n))
        full = 0
        crc_extra = {cap: 0 for cap in caps}
        attempts = {cap: 0 for cap in caps}
        for _ in range(trials):
            txs = []
            for node in range(n):
                while True:
                    frame = make_frame(rng.randbytes(payload_bytes))
                    symbols = frame_to_symbols(frame, params)
                    if len(set(symbols)) >= 2:
                        break
                txs.append(TransmissionInstance(node + 1, node, symbols))
            trace = generate_trace(txs, params, sub_slots)
            result = decode_many(trace)
            for tx, decoded in zip(txs, result.frames):
                if decoded.is_concrete:
                    full += 1
                    continue
                for cap in caps:
                    res = disambiguate(decoded, cfgs[cap], params)
                    attempts[cap] += res.attempts_used
                    if (
                        res.kind is ResolutionKind.RESOLVED
                        and res.symbols == tx.symbols
                    ):
                        crc_extra[cap] += 1
        total = n * trials
        for cap in caps:
            rows.append(
                CrcBenchRow(
                    n,
                    cap,
                    trials,
                    full / total,
                    (full + crc_extra[cap]) / total,
                    attempts[cap] / total,
                )
            )
    return rows
