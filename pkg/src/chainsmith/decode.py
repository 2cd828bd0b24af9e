"""Decoding physical readouts into logical assignments.

Three decoders: the heaviest chain member, a plain majority vote and a
weighted majority vote. Votes that come out exactly even are settled by a
fair coin from the caller's random stream, drawn read by read and chain by
chain so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paramset import WeightTable
from .problem import Embedding

ZERO_TOL = 1e-12
DECODERS = ("single", "majority", "weighted_majority")


@dataclass(frozen=True)
class DecodedSample:
    v: np.ndarray
    broken_chains: frozenset[int]
    decoder: str
    tie_count: int = 0


@dataclass
class DecodedBatch:
    """Decoder output for many reads: ``values`` is ``(reads, n)``."""

    values: np.ndarray
    broken: np.ndarray  # (reads, n) bool
    ties: np.ndarray  # (reads,) int
    decoder: str

    def sample(self, x: int) -> DecodedSample:
        return DecodedSample(
            self.values[x].copy(),
            frozenset(int(i) for i in np.flatnonzero(self.broken[x])),
            self.decoder,
            int(self.ties[x]),
        )


def _as_batch(s) -> tuple[np.ndarray, bool]:
    s = np.asarray(s)
    return (s[None, :], True) if s.ndim == 1 else (s, False)


def broken_chains(states: np.ndarray, e: Embedding) -> np.ndarray:
    out = np.zeros((states.shape[0], len(e.chains)), dtype=bool)
    for i, chain in enumerate(e.chains):
        vals = states[:, list(chain)]
        out[:, i] = (vals != vals[:, :1]).any(axis=1)
    return out


def _vote(states, e: Embedding, weights, rng, decoder: str, tol: float) -> DecodedBatch:
    R, n = states.shape[0], len(e.chains)
    totals = np.zeros((R, n))
    for i, chain in enumerate(e.chains):
        vals = states[:, list(chain)].astype(np.float64)
        w = np.ones(len(chain)) if weights is None else np.asarray(weights[i], dtype=np.float64)
        totals[:, i] = vals @ w
    values = np.where(totals > 0, 1, -1).astype(np.int8)
    tie = np.abs(totals) <= tol
    ties = tie.sum(axis=1)
    if tie.any():
        if rng is None:
            raise ValueError("tied vote needs a random stream")
        # one coin per tie, read-major then chain order
        coins = rng.integers(0, 2, size=int(ties.sum())) * 2 - 1
        values[tie] = coins.astype(np.int8)
    return DecodedBatch(values, broken_chains(states, e), ties.astype(np.int64), decoder)


def decode_single_batch(states, e: Embedding, w: WeightTable) -> DecodedBatch:
    states = np.asarray(states)
    R, n = states.shape[0], len(e.chains)
    values = np.empty((R, n), dtype=np.int8)
    for i, chain in enumerate(e.chains):
        wi = w.w[i]
        top = max(wi)
        pick = min(q for q, x in zip(chain, wi) if x == top)
        values[:, i] = states[:, pick]
    return DecodedBatch(values, broken_chains(states, e), np.zeros(R, dtype=np.int64), "single")


def decode_majority_batch(states, e: Embedding, rng=None) -> DecodedBatch:
    return _vote(np.asarray(states), e, None, rng, "majority", 0.5)


def decode_weighted_majority_batch(states, e: Embedding, w: WeightTable, rng=None) -> DecodedBatch:
    return _vote(np.asarray(states), e, w.w, rng, "weighted_majority", ZERO_TOL)


def decode_single(s, e: Embedding, w: WeightTable) -> DecodedSample:
    """Value of the highest-weight chain member (ties to the lowest qubit index)."""
    states, _ = _as_batch(s)
    return decode_single_batch(states, e, w).sample(0)


def decode_majority(s, e: Embedding, rng: np.random.Generator) -> DecodedSample:
    """``sign(sum_k s_ik)``; an even split is a fair coin from ``rng``."""
    states, _ = _as_batch(s)
    return decode_majority_batch(states, e, rng).sample(0)


def decode_weighted_majority(s, e: Embedding, w: WeightTable, rng: np.random.Generator) -> DecodedSample:
    """``sign(sum_k w_ik s_ik)``; a sum within 1e-12 of zero is a fair coin."""
    states, _ = _as_batch(s)
    return decode_weighted_majority_batch(states, e, w, rng).sample(0)


def decode_concert_batch(states, e: Embedding, w: WeightTable, rng) -> dict[str, DecodedBatch]:
    states = np.asarray(states)
    return {
        "single": decode_single_batch(states, e, w),
        "majority": decode_majority_batch(states, e, rng),
        "weighted_majority": decode_weighted_majority_batch(states, e, w, rng),
    }


def decode_concert(s, e: Embedding, w: WeightTable, rng) -> list[DecodedSample]:
    """All three decodings of one readout: single, majority, weighted majority."""
    states, _ = _as_batch(s)
    return [batch.sample(0) for batch in decode_concert_batch(states, e, w, rng).values()]


POLICIES = ("any", "majority-only")


def accepted(candidates: dict[str, np.ndarray], policy: str = "any") -> np.ndarray:
    """Combine per-decoder boolean verdicts (``(reads,)`` each) under ``policy``."""
    if policy == "any":
        out = np.zeros_like(next(iter(candidates.values())))
        for ok in candidates.values():
            out = out | ok
        return out
    if policy == "majority-only":
        return candidates["majority"]
    raise ValueError(f"unknown concert policy {policy!r}")
