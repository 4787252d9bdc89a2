"""Efficiency metrics: percentage increases, per-length loop spread, success ratio."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import ContractError, UndefinedMetricError

SPARSE_BUCKET = 5


@dataclass
class EfficiencyRecord:
    seed_loops: int
    adv_loops: int
    seed_latency_ns: float = 1.0
    adv_latency_ns: float = 1.0
    seed_energy: float = 1.0
    adv_energy: float = 1.0
    input_length: int = 0


def percent_increase(before: float, after: float) -> float:
    if before == 0:
        raise UndefinedMetricError("metric undefined for a zero baseline")
    return (after - before) / before * 100.0


def i_loops(record: EfficiencyRecord) -> float:
    return percent_increase(record.seed_loops, record.adv_loops)


def i_latency(record: EfficiencyRecord) -> float:
    return percent_increase(record.seed_latency_ns, record.adv_latency_ns)


def i_energy(record: EfficiencyRecord) -> float:
    return percent_increase(record.seed_energy, record.adv_energy)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------


class EnergyMeter(Protocol):
    def measure(self, translate, tokens):
        """Run ``translate(tokens)``; return (trace, energy)."""


@dataclass
class StepCountMeter:
    """Energy proxy proportional to decoder steps."""

    cost_constant: float = 1.0

    def measure(self, translate, tokens):
        trace = translate(tokens)
        return trace, trace.loops * self.cost_constant


# ---------------------------------------------------------------------------
# natural per-length variability
# ---------------------------------------------------------------------------


@dataclass
class Bucket:
    count: int
    mean: float
    rms_deviation: float
    sparse: bool = False


def _bucket(values) -> Bucket:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    rms = float(np.sqrt(np.mean((arr - mean) ** 2)))
    return Bucket(len(arr), mean, rms, len(arr) < SPARSE_BUCKET)


@dataclass
class LengthBucketStats:
    buckets: dict
    pooled: Bucket

    def effective(self, length: int) -> Bucket:
        """Bucket for ``length``, or the pooled statistic if missing or sparse."""
        b = self.buckets.get(length)
        if b is None or b.sparse:
            return self.pooled
        return b

    def table(self) -> list:
        return [
            {"input_length": n, "count": b.count, "mean_loops": b.mean, "rms_deviation": b.rms_deviation, "sparse": b.sparse}
            for n, b in sorted(self.buckets.items())
        ]


def build_length_stats(seed_traces) -> LengthBucketStats:
    """Per-input-length loop statistics from (input_length, loops) pairs."""
    pairs = [(int(n), int(l)) for n, l in seed_traces]
    if not pairs:
        raise ContractError("need at least one seed trace")
    grouped = {}
    for n, loops in pairs:
        grouped.setdefault(n, []).append(loops)
    buckets = {n: _bucket(v) for n, v in sorted(grouped.items())}
    pooled = _bucket([l for _, l in pairs])
    pooled.sparse = False
    return LengthBucketStats(buckets, pooled)


def success_ratio(records, lam: float, stats: LengthBucketStats) -> float:
    """Percentage of records whose loop increase reaches lam x natural spread."""
    records = list(records)
    if not records:
        raise ContractError("success ratio of an empty record list")
    if lam < 0:
        raise ContractError("lambda must be >= 0")
    hits = 0
    for r in records:
        spread = stats.effective(r.input_length).rms_deviation
        if (r.adv_loops - r.seed_loops) >= lam * spread:
            hits += 1
    return hits / len(records) * 100.0


# ---------------------------------------------------------------------------
# latency
# ---------------------------------------------------------------------------


def timed_runs(translate, tokens, repeats: int):
    """Warm up once, then time ``repeats`` runs; returns (ns list, traces)."""
    if repeats < 1:
        raise ContractError("repeats must be >= 1")
    translate(tokens)
    times, traces = [], []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        trace = translate(tokens)
        times.append(max(time.perf_counter_ns() - t0, 1))
        traces.append(trace)
    return times, traces


def measure_latency(model, tokens, repeats: int = 3) -> float:
    """Median wall-clock nanoseconds of one translation."""
    times, _ = timed_runs(model.translate, tokens, repeats)
    return float(statistics.median(times))


# ---------------------------------------------------------------------------
# beam-size sensitivity
# ---------------------------------------------------------------------------


@dataclass
class SweepRow:
    num_beams: int
    cells: dict = field(default_factory=dict)  # (epsilon, kind) -> mean I-Loops or None
    errors: dict = field(default_factory=dict)


def beam_sensitivity_sweep(seeds, model, vocab, epsilons=(1,), kinds=("char",), lexicon=None, rng_seed=0, beams=range(1, 6)):
    """Mean I-Loops for each beam width and (epsilon, kind) cell.

    A cell whose generation raises is recorded as failed (value ``None``)
    instead of aborting the sweep.
    """
    from .sloth import Kind, generate_test

    seeds = list(seeds)
    if not seeds:
        raise ContractError("beam sweep needs seeds")
    rows = []
    for k in beams:
        m = model.with_config(num_beams=k)
        row = SweepRow(k)
        for eps in epsilons:
            for kind in kinds:
                key = (eps, getattr(kind, "value", kind))
                try:
                    vals = []
                    for i, s in enumerate(seeds):
                        case = generate_test(s, eps, Kind(kind), m, vocab, lexicon, rng_seed=[rng_seed, i])
                        vals.append(percent_increase(case.seed_trace.loops, case.adv_trace.loops))
                    row.cells[key] = float(np.mean(vals))
                except Exception as exc:  # noqa: BLE001 - cell-level isolation
                    row.cells[key] = None
                    row.errors[key] = repr(exc)
        rows.append(row)
    return rows
