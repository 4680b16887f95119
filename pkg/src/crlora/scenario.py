"""Flat key=value scenario files with sweep directives, plus the presets
behind each published figure or table.

A scenario line is ``field = value`` (``#`` starts a comment).  A directive
``sweep.<field> = v1,v2,...`` runs the cartesian product of all sweeps in
file order; ``runs_per_config = N`` repeats every combination with N
derived seeds.  Run seeds always derive from (master seed, run index), so
the expansion is reproducible; an explicit ``seed`` key is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .sim import Metrics, SimConfig, SimConfigError, derive_seed

_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}
_SWEEPABLE = {name for name in _FIELD_TYPES if name != "seed"}


@dataclass
class Scenario:
    base: dict = field(default_factory=dict)
    sweeps: list[tuple[str, list]] = field(default_factory=list)
    runs_per_config: int = 1


def _coerce(name: str, raw: str):
    raw = raw.strip()
    kind = _FIELD_TYPES[name]
    if kind in ("bool", bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise SimConfigError(f"field {name!r}: expected a boolean, got {raw!r}")
    if kind in ("int", int):
        try:
            return int(raw)
        except ValueError:
            raise SimConfigError(f"field {name!r}: expected an integer, got {raw!r}") from None
    if kind in ("float", float):
        try:
            return float(raw)
        except ValueError:
            raise SimConfigError(f"field {name!r}: expected a number, got {raw!r}") from None
    return raw


def parse_scenario(text: str) -> Scenario:
    scenario = Scenario()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SimConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "runs_per_config":
            scenario.runs_per_config = int(value)
            if scenario.runs_per_config < 1:
                raise SimConfigError(f"line {lineno}: runs_per_config must be >= 1")
        elif key.startswith("sweep."):
            name = key.removeprefix("sweep.")
            if name not in _SWEEPABLE:
                raise SimConfigError(f"line {lineno}: unknown sweep field {name!r}")
            values = [_coerce(name, v) for v in value.split(",") if v.strip()]
            if not values:
                raise SimConfigError(f"line {lineno}: sweep {name!r} has no values")
            scenario.sweeps.append((name, values))
        elif key == "seed":
            raise SimConfigError(
                f"line {lineno}: 'seed' is not a scenario key; use the --seed flag"
            )
        elif key in _SWEEPABLE:
            scenario.base[key] = _coerce(key, value)
        else:
            raise SimConfigError(f"line {lineno}: unknown field {key!r}")
    return scenario


def serialize_scenario(scenario: Scenario) -> str:
    def fmt(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return f"{v:g}"
        return str(v)

    lines = [f"{k} = {fmt(v)}" for k, v in scenario.base.items()]
    lines += [f"sweep.{name} = " + ",".join(fmt(v) for v in values) for name, values in scenario.sweeps]
    if scenario.runs_per_config != 1:
        lines.append(f"runs_per_config = {scenario.runs_per_config}")
    return "\n".join(lines) + "\n"


def expand_scenario(scenario: Scenario, master_seed: int) -> list[SimConfig]:
    """Materialise every (sweep combination, repeat) into a seeded config,
    in deterministic scenario order."""
    combos: list[dict] = [dict(scenario.base)]
    for name, values in scenario.sweeps:
        combos = [dict(c, **{name: v}) for c in combos for v in values]
    configs = []
    index = 0
    for combo in combos:
        for _ in range(scenario.runs_per_config):
            try:
                configs.append(SimConfig(seed=derive_seed(master_seed, index), **combo))
            except TypeError as exc:
                raise SimConfigError(str(exc)) from None
            index += 1
    return configs


# ---------------------------------------------------------------------------
# Presets reproducing the published experiment grids


@dataclass(frozen=True)
class FigureMeta:
    name: str
    x_field: str
    y_column: str
    series_fields: tuple[str, ...]
    x_label: str
    y_label: str
    log_y: bool = False


_GRID_DEVICES = "10,50,100,150,200,250"

FIGURE_SCENARIOS: dict[str, str] = {
    "7": (
        "num_devices = 100\nsf = 7\nsim_duration = 240\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sub_slots = 2,4,8\n"
        "sweep.frame_payload_bytes = 10,20,30,40,50,60,70,80,90,100\n"
    ),
    "8": (
        "frame_payload_bytes = 50\nsub_slots = 4\nsim_duration = 1500\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sf = 7,12\n"
        f"sweep.num_devices = {_GRID_DEVICES}\n"
    ),
    "9": (
        "frame_payload_bytes = 50\nsub_slots = 4\nsim_duration = 1500\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sf = 7,12\n"
        f"sweep.num_devices = {_GRID_DEVICES}\n"
    ),
    "10a": (
        "num_devices = 100\nframe_payload_bytes = 50\nsf = 7\nsub_slots = 4\n"
        "sim_duration = 240\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.slots_per_beacon = 10,25,50,100,200\n"
    ),
    "10b": (
        "num_devices = 100\nframe_payload_bytes = 50\nsf = 12\nsub_slots = 4\n"
        "sim_duration = 4000\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.slots_per_beacon = 10,25,50,100,200\n"
    ),
    "11": (
        "frame_payload_bytes = 50\nsub_slots = 4\nsim_duration = 1500\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sf = 7,12\n"
        f"sweep.num_devices = {_GRID_DEVICES}\n"
    ),
    "12": (
        "num_devices = 100\nsub_slots = 4\nsim_duration = 4000\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sf = 7,12\n"
        "sweep.frame_payload_bytes = 10,25,50,75,100\n"
    ),
    "t5": (
        "frame_payload_bytes = 50\nsub_slots = 4\nsim_duration = 1500\nruns_per_config = 3\n"
        "sweep.protocol = aloha,cr_mac\nsweep.sf = 7,12\n"
        f"sweep.num_devices = {_GRID_DEVICES}\n"
    ),
}

FIGURE_META: dict[str, FigureMeta] = {
    "7": FigureMeta("fig7", "frame_payload_bytes", "decode_success_pct",
                    ("protocol", "sub_slots"), "Size of frames (bytes)", "% successful decoding"),
    "8": FigureMeta("fig8", "num_devices", "decode_success_pct",
                    ("protocol", "sf"), "Number of end-devices", "% successful decoding"),
    "9": FigureMeta("fig9", "num_devices", "throughput_bps",
                    ("protocol", "sf"), "Number of end-devices", "Average throughput (bps)", log_y=True),
    "10a": FigureMeta("fig10a", "slots_per_beacon", "energy_efficiency_bpj",
                      ("protocol",), "Number of slots in a beacon period", "Energy efficiency (bpJ)"),
    "10b": FigureMeta("fig10b", "slots_per_beacon", "energy_efficiency_bpj",
                      ("protocol",), "Number of slots in a beacon period", "Energy efficiency (bpJ)"),
    "11": FigureMeta("fig11", "num_devices", "mean_delay_s",
                     ("protocol", "sf"), "Number of end-devices", "Delay (seconds)"),
    "12": FigureMeta("fig12", "frame_payload_bytes", "mean_delay_s",
                     ("protocol", "sf"), "Frame size (bytes)", "Delay (seconds)"),
    "t5": FigureMeta("table5", "num_devices", "energy_efficiency_bpj",
                     ("protocol", "sf"), "Number of end-devices", "Energy efficiency (bpJ)", log_y=True),
}


# Columns of one CSV row: the scenario-relevant config fields followed by
# every metric field and the derived energy efficiency.
CONFIG_COLUMNS = tuple(f.name for f in fields(SimConfig))
METRIC_COLUMNS = tuple(f.name for f in fields(Metrics)) + ("energy_efficiency_bpj",)


def result_row(config: SimConfig, metrics: Metrics) -> dict:
    from .sim import compute_energy_efficiency

    row = {name: getattr(config, name) for name in CONFIG_COLUMNS}
    row.update(metrics.as_row())
    row["energy_efficiency_bpj"] = (
        compute_energy_efficiency(metrics) if metrics.bits_delivered else 0.0
    )
    row["decode_success_pct"] = 100.0 * metrics.decode_success_fraction
    return row


def format_csv(rows: list[dict]) -> str:
    """Render rows with stable column order and stable float formatting."""
    if not rows:
        return ""
    columns = list(rows[0].keys())
    out = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            if isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, float):
                cells.append(f"{v:.10g}")
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"
