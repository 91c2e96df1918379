"""Response metrics and the ranked comparison report.

Settling uses the classical 2% band: the settling time is the first
sample time after which the error magnitude stays within 2% of the initial
error magnitude for the rest of the run. Overshoot is measured on the
first excursion past the setpoint, relative to the initial displacement,
since the bench regulates to a fixed setpoint rather than tracking a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sim import SimConfig, Trajectory

SETTLE_BAND_FRACTION = 0.02

STABLE = "stable"
MARGINAL = "marginal"
UNSTABLE = "unstable"


@dataclass(frozen=True)
class ResponseMetrics:
    settling_time: float | None
    overshoot_pct: float
    rms_error: float
    peak_abs_u: float
    verdict: str


def compute_metrics(tr: Trajectory, sc: SimConfig) -> ResponseMetrics:
    if len(tr) == 0:
        raise InputError("trajectory is empty")
    error = tr.pitch - sc.setpoint
    abs_error = np.abs(error)
    initial = float(abs_error[0])

    band = SETTLE_BAND_FRACTION * initial
    outside = np.nonzero(abs_error > band)[0]
    if outside.size == 0:
        settling_time = float(tr.t[0])
    elif outside[-1] == len(tr) - 1:
        settling_time = None
    else:
        settling_time = float(tr.t[outside[-1] + 1])

    overshoot_pct = 0.0
    if initial > 0.0:
        sign = math.copysign(1.0, error[0])
        crossed = np.nonzero(sign * error < 0.0)[0]
        if crossed.size > 0:
            start = crossed[0]
            end = start
            while end + 1 < len(tr) and sign * error[end + 1] < 0.0:
                end += 1
            peak = float(np.max(abs_error[start:end + 1]))
            overshoot_pct = 100.0 * peak / initial

    rms_error = float(np.sqrt(np.mean(error ** 2)))
    peak_abs_u = float(np.max(np.abs(tr.u)))

    if tr.diverged or float(abs_error[-1]) > initial:
        verdict = UNSTABLE
    elif settling_time is not None:
        verdict = STABLE
    else:
        verdict = MARGINAL
    return ResponseMetrics(settling_time=settling_time, overshoot_pct=overshoot_pct,
                           rms_error=rms_error, peak_abs_u=peak_abs_u, verdict=verdict)


def rank_results(results: list[tuple[str, ResponseMetrics]]) -> list[tuple[str, ResponseMetrics]]:
    """Stable entries first, fastest settling first; unstable entries last.

    Ties break on the label, so the ordering is total.
    """
    if not results:
        raise InputError("no results to rank")
    order = {STABLE: 0, MARGINAL: 1, UNSTABLE: 2}

    def key(item: tuple[str, ResponseMetrics]):
        label, m = item
        settle = m.settling_time if m.settling_time is not None else math.inf
        return (order[m.verdict], settle, label)

    return sorted(results, key=key)


def compare(results: list[tuple[str, ResponseMetrics]]) -> str:
    """Plain-text ranking table of labeled metrics."""
    ranked = rank_results(results)
    header = ("label", "verdict", "settling_s", "overshoot_pct", "rms_rad", "peak_abs_u")
    rows = [header]
    for label, m in ranked:
        rows.append((
            label,
            m.verdict,
            f"{m.settling_time:.3f}" if m.settling_time is not None else "-",
            f"{m.overshoot_pct:.2f}",
            f"{m.rms_error:.6f}",
            f"{m.peak_abs_u:.4f}",
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def report_csv(results: list[tuple[str, ResponseMetrics]]) -> str:
    """Machine-readable variant of the comparison report."""
    ranked = rank_results(results)
    lines = ["label,verdict,settling_time,overshoot_pct,rms_error,peak_abs_u"]
    for label, m in ranked:
        settle = repr(m.settling_time) if m.settling_time is not None else ""
        lines.append(f"{label},{m.verdict},{settle},{m.overshoot_pct!r},{m.rms_error!r},{m.peak_abs_u!r}")
    return "\n".join(lines) + "\n"
