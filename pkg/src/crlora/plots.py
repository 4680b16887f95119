"""Matplotlib rendering of figure-preset results next to their CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import aggregate
from .scenario import FigureMeta

_MARKERS = ("o", "s", "^", "v", "D", "x", "*", "+")


def _series_label(meta: FigureMeta, key: tuple) -> str:
    parts = []
    for name, value in zip(meta.series_fields, key):
        if name == "protocol":
            parts.append("LoRaWAN" if value == "aloha" else "CR-MAC")
        elif name == "sub_slots":
            parts.append(f"s={value}")
        elif name == "sf":
            parts.append(f"SF{value}")
        else:
            parts.append(f"{name}={value}")
    return " ".join(parts)


def render_figure(rows: list[dict], meta: FigureMeta, out_path: str) -> None:
    """Average repeated runs per (series, x) and draw one line per series."""
    summary = aggregate(
        rows, group_by=list(meta.series_fields) + [meta.x_field], values=[meta.y_column]
    )
    series: dict[tuple, list[tuple[float, float]]] = {}
    seen_labels = set()
    for entry in summary:
        key = tuple(entry[f] for f in meta.series_fields)
        # sub-slot sweeps do not change the random-access baseline; keep one
        if entry.get("protocol") == "aloha" and "sub_slots" in meta.series_fields:
            key = ("aloha", "-")
        series.setdefault(key, []).append(
            (entry[meta.x_field], entry[f"{meta.y_column}_mean"])
        )

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, (key, points) in enumerate(sorted(series.items(), key=lambda kv: str(kv[0]))):
        points = sorted(set(points))
        label = _series_label(meta, key) if key[-1] != "-" else "LoRaWAN"
        if label in seen_labels:
            continue
        seen_labels.add(label)
        ax.plot(
            [p[0] for p in points],
            [p[1] for p in points],
            marker=_MARKERS[i % len(_MARKERS)],
            label=label,
        )
    ax.set_xlabel(meta.x_label)
    ax.set_ylabel(meta.y_label)
    if meta.log_y:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_crc_bench(rows: list[dict], out_attempts: str, out_decoded: str) -> None:
    """Two companion plots: CRC attempts per frame, and decoded fraction
    with/without CRC, both against the number of colliding frames."""
    caps = sorted({r["cap"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, cap in enumerate(caps):
        pts = sorted((r["colliding_frames"], r["avg_crc_attempts"]) for r in rows if r["cap"] == cap)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=_MARKERS[i], label=f"cap {cap}")
    ax.set_xlabel("Number of frames in collision")
    ax.set_ylabel("Average number of CRC attempts per frame")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_attempts, dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    base = sorted((r["colliding_frames"], r["decoded_no_crc"]) for r in rows if r["cap"] == caps[0])
    ax.plot([p[0] for p in base], [100 * p[1] for p in base], marker="o", label="without CRC")
    for i, cap in enumerate(caps):
        pts = sorted((r["colliding_frames"], r["decoded_with_crc"]) for r in rows if r["cap"] == cap)
        ax.plot(
            [p[0] for p in pts],
            [100 * p[1] for p in pts],
            marker=_MARKERS[i + 1],
            label=f"with CRC, cap {cap}",
        )
    ax.set_xlabel("Number of frames in collision")
    ax.set_ylabel("Decoded frames (%)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_decoded, dpi=150)
    plt.close(fig)
