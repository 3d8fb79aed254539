"""Writers for run records: a per-step CSV and a JSON summary."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .sim import RunRecord

PURSUER_COLUMNS = ("x", "y", "V", "gamma", "tgo", "acmd", "afilt")
TARGET_COLUMNS = ("x_T", "y_T", "V_T", "gamma_T")


def csv_header(n_pursuers: int) -> list[str]:
    """``time``, then seven columns per pursuer (suffix ``_1`` .. ``_n``), then the target."""
    cols = ["time"]
    for i in range(1, n_pursuers + 1):
        cols += [f"{c}_{i}" for c in PURSUER_COLUMNS]
    return cols + list(TARGET_COLUMNS)


def record_rows(record: RunRecord) -> np.ndarray:
    """The CSV body as a float array; headings are degrees, everything else SI."""
    m, n = record.tgo.shape
    table = np.empty((m, 1 + 7 * n + 4))
    table[:, 0] = record.times
    for i in range(n):
        base = 1 + 7 * i
        ps = record.pursuer_states[:, i]
        table[:, base] = ps[:, 0]
        table[:, base + 1] = ps[:, 1]
        table[:, base + 2] = ps[:, 2]
        table[:, base + 3] = np.degrees(ps[:, 3])
        table[:, base + 4] = record.tgo[:, i]
        table[:, base + 5] = record.a_raw[:, i]
        table[:, base + 6] = record.a_filt[:, i]
    ts = record.target_states
    table[:, -4:] = np.column_stack([ts[:, 0], ts[:, 1], ts[:, 2], np.degrees(ts[:, 3])])
    return table


def write_csv(record: RunRecord, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header(record.n_pursuers))
        for row in record_rows(record):
            writer.writerow(["" if math.isnan(v) else repr(float(v)) for v in row])


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (np.floating, np.integer)):
        return _json_safe(value.item())
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def summary_dict(record: RunRecord, **extra: Any) -> dict[str, Any]:
    s = record.summary
    out = {
        "status": s.status,
        "interception_times": s.interception_times,
        "miss_distances": s.miss_distances,
        "consensus_time": s.consensus_time,
        "consensus_times": s.consensus_times,
        "spread": s.interception_spread,
        "final_tgo_spread": s.final_spread,
        "message": s.message,
        "events": [e.to_dict() for e in record.events],
    }
    out.update(extra)
    return _json_safe(out)


def write_summary(record: RunRecord, path: str | Path, **extra: Any) -> None:
    Path(path).write_text(json.dumps(summary_dict(record, **extra), indent=2) + "\n", encoding="utf-8")
