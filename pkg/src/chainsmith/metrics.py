"""Figures of merit: minimum parameter distance, success probability,
success ratios against a baseline chain coupling, optimal-coupling histograms
and answer-set coverage."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .problem import PhysicalProblem

DEDUP_TOL = 1e-12
BASELINE_C = 1.6


class UndefinedMPD(ValueError):
    pass


@dataclass(frozen=True)
class InstanceResult:
    instance_id: str
    strategy: str
    c: float
    srt_index: int
    success_probability: float
    unique_answers: int
    mpd: float
    reads: int


def programmed_values(p: PhysicalProblem) -> list[float]:
    """Nonzero biases and problem couplings, plus the signed chain couplings."""
    vals = [v for v in p.biases.values() if abs(v) > DEDUP_TOL]
    vals += [v for v in p.problem_couplings.values() if abs(v) > DEDUP_TOL]
    vals += list(p.chain_couplings.values())
    return vals


def mpd_of_values(values: Iterable[float]) -> float:
    vals = sorted(values)
    if not vals:
        raise UndefinedMPD("no programmed values")
    distinct = [vals[0]]
    for v in vals[1:]:
        if v - distinct[-1] > DEDUP_TOL:
            distinct.append(v)
    if len(distinct) < 2:
        return math.inf
    return min(b - a for a, b in zip(distinct, distinct[1:]))


def mpd(p: PhysicalProblem) -> float:
    """Smallest gap between two distinct programmed values; ``inf`` if only one value."""
    return mpd_of_values(programmed_values(p))


def success_probability(multiplicity, satisfied) -> float:
    """Multiplicity-weighted fraction of reads whose decoded answer is accepted."""
    m = np.asarray(multiplicity, dtype=np.float64)
    ok = np.asarray(satisfied, dtype=bool)
    total = m.sum()
    if total == 0:
        raise ValueError("empty sample set")
    return float(m[ok].sum() / total)


def success_ratio(by_c: Mapping[float, float], baseline_c: float = BASELINE_C) -> dict[float, float] | None:
    """``P(c) / P(baseline)`` for one instance; ``None`` when the baseline is zero."""
    base = _lookup(by_c, baseline_c)
    if base == 0:
        return None
    return {c: p / base for c, p in by_c.items()}


def _lookup(by_c: Mapping[float, float], c: float) -> float:
    for k, v in by_c.items():
        if abs(k - c) < 1e-9:
            return v
    raise KeyError(f"no result at c={c}")


@dataclass
class RatioCurve:
    median: dict[float, float]
    included: int
    excluded: list[str]


def median_success_ratio(per_instance: Mapping[str, Mapping[float, float]], baseline_c: float = BASELINE_C) -> RatioCurve:
    ratios: dict[float, list[float]] = {}
    excluded = []
    for inst, by_c in sorted(per_instance.items()):
        r = success_ratio(by_c, baseline_c)
        if r is None:
            excluded.append(inst)
            continue
        for c, v in r.items():
            ratios.setdefault(c, []).append(v)
    median = {c: statistics.median(v) for c, v in sorted(ratios.items())}
    return RatioCurve(median, len(per_instance) - len(excluded), excluded)


@dataclass
class Histogram:
    counts: dict[float, int]
    ties: int
    tied_instances: list[str]
    skipped: list[str]


def optimal_c_histogram(per_instance: Mapping[str, Mapping[float, float]], c_grid: Iterable[float]) -> Histogram:
    """Count each instance at the coupling where its success peaks.

    Ties go to the lowest coupling and are tallied; instances that never
    succeed are skipped.
    """
    grid = sorted(c_grid)
    counts = {c: 0 for c in grid}
    ties, tied, skipped = 0, [], []
    for inst, by_c in sorted(per_instance.items()):
        ps = [(c, _lookup(by_c, c)) for c in grid]
        top = max(p for _, p in ps)
        if top <= 0:
            skipped.append(inst)
            continue
        winners = [c for c, p in ps if p == top]
        counts[winners[0]] += 1
        if len(winners) > 1:
            ties += 1
            tied.append(inst)
    return Histogram(counts, ties, tied, skipped)


def answer_set_fraction(unique_observed: int, total_known: int) -> float:
    if total_known <= 0:
        raise ValueError("solution count must be positive")
    if unique_observed > total_known:
        raise ValueError("observed more distinct answers than exist")
    return unique_observed / total_known


def encode_answers(assignments: np.ndarray) -> list[int]:
    """Sorted distinct integer codes of +-1 rows; bit ``v`` set when variable ``v+1`` is true."""
    if len(assignments) == 0:
        return []
    weights = 1 << np.arange(assignments.shape[1], dtype=np.int64)
    codes = ((assignments > 0).astype(np.int64) * weights).sum(axis=1)
    return sorted(set(int(c) for c in codes))
