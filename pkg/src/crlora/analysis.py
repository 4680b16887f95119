"""Closed-form sub-slot collision probability, its Monte-Carlo check, and
aggregation of simulation metric rows."""

from __future__ import annotations

import math
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

#: Grid printed by the `table3` subcommand.
TABLE3_DEVICES = tuple(range(2, 9))
TABLE3_SUBSLOTS = (2, 4, 8)


def p_distinct(n: int, s: int) -> float:
    """Probability that n devices drawing uniformly among s sub-slots all
    pick distinct ones: s!/((s-n)! * s**n), computed multiplicatively."""
    if n < 1 or s < 1:
        raise ValueError("n and s must be >= 1")
    if n > s:
        return 0.0
    p = 1.0
    for i in range(n):
        p *= (s - i) / s
    return p


def p_distinct_mc(n: int, s: int, trials: int, seed: int = 0) -> float:
    """Monte-Carlo estimate of ``p_distinct`` over ``trials`` draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n > s:
        return 0.0  # pigeonhole; the draw can never be distinct
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 1 << 18
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        draws = rng.integers(0, s, size=(m, n), dtype=np.int8)
        draws.sort(axis=1)
        if n > 1:
            hits += int((np.diff(draws, axis=1) != 0).all(axis=1).sum())
        else:
            hits += m
        done += m
    return hits / trials


def round3(value: float) -> float:
    """Round half-up to three decimals, matching tabulated presentation."""
    return float(Decimal(repr(value)).quantize(Decimal("0.001"), ROUND_HALF_UP))


def distinct_probability_table() -> dict[tuple[int, int], float]:
    """All (devices, sub-slots) cells of the collision-probability grid,
    rounded to three decimals."""
    return {
        (n, s): round3(p_distinct(n, s))
        for n in TABLE3_DEVICES
        for s in TABLE3_SUBSLOTS
    }


def aggregate(
    rows: list[dict],
    group_by: list[str] | tuple[str, ...],
    values: list[str] | tuple[str, ...] | None = None,
) -> list[dict]:
    """Mean and sample standard deviation of numeric columns per group.

    Groups appear in first-seen order; empty input yields an empty table.
    """
    group_by = tuple(group_by)
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row[k] for k in group_by)
        groups.setdefault(key, []).append(row)
    if values is None and rows:
        values = tuple(
            k
            for k, v in rows[0].items()
            if k not in group_by and isinstance(v, (int, float))
        )
    out = []
    for key, members in groups.items():
        summary: dict = dict(zip(group_by, key))
        summary["count"] = len(members)
        for col in values or ():
            xs = [float(m[col]) for m in members]
            mean = sum(xs) / len(xs)
            summary[f"{col}_mean"] = mean
            if len(xs) > 1:
                var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
                summary[f"{col}_std"] = math.sqrt(var)
            else:
                summary[f"{col}_std"] = 0.0
        out.append(summary)
    return out
