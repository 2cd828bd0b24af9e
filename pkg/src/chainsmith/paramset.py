"""Parameter setting: spreading logical terms over chains, and spin reversal.

Four strategies map a logical problem and an embedding to a physical problem:

* ``single``: each logical term on one device (most-connected chain member,
  first available coupler), everything else zero.
* ``even``: ``h_i / K_i`` on every member; when that falls below ``h_min``,
  ``h_min``-sized pieces go to the best-connected members and the remainder to
  the next one.
* ``weighted``: ``h_i * w_ik`` with ``w_ik = d_ik / D_i``; pieces below ``h_min``
  are dropped and their value spread over the survivors.
* ``weighted_regularized``: a floor of ``h_min`` per member plus the rest of
  ``h_i`` by weight.

Couplers use the even scheme for every strategy except ``single``. Chain edges
receive ``-c``, then the problem terms are rescaled to unit maximum.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .problem import (
    Edge,
    Embedding,
    HardwareGraph,
    LogicalProblem,
    PhysicalProblem,
    rescale_with_report,
    validate_embedding,
)
from .seeds import derive_seed

log = logging.getLogger(__name__)

DEFAULT_H_MIN = 1.0 / 16


class StrategyKind(str, enum.Enum):
    SINGLE = "single"
    EVEN = "even"
    WEIGHTED = "weighted"
    WEIGHTED_REGULARIZED = "weighted_regularized"

    @classmethod
    def parse(cls, name) -> "StrategyKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"wr": "weighted_regularized", "regularized": "weighted_regularized"}
        return cls(aliases.get(key, key))


ALL_STRATEGIES = tuple(StrategyKind)


class SrtMode(str, enum.Enum):
    ALL_TERMS = "all-terms"
    PROBLEM_TERMS_ONLY = "problem-terms-only"


@dataclass(frozen=True)
class ParamConfig:
    strategy: StrategyKind = StrategyKind.EVEN
    c: float = 2.0
    h_min: float = DEFAULT_H_MIN
    srt: tuple[int, ...] | None = None
    srt_mode: SrtMode = SrtMode.ALL_TERMS
    rescale: bool = True

    def __post_init__(self):
        object.__setattr__(self, "strategy", StrategyKind.parse(self.strategy))
        object.__setattr__(self, "srt_mode", SrtMode(self.srt_mode))
        if not self.c > 0:
            raise ValueError(f"chain coupling magnitude must be positive, got {self.c}")
        if not 0 <= self.h_min < 1:
            raise ValueError(f"h_min must lie in [0, 1), got {self.h_min}")


@dataclass(frozen=True)
class WeightTable:
    """Per logical qubit: inter-chain coupler counts ``d``, total ``D`` and weights ``w``.

    Entries are aligned with ``Embedding.chains[i]``.
    """

    d: tuple[tuple[int, ...], ...]
    D: tuple[int, ...]
    w: tuple[tuple[float, ...], ...] = field(default=())

    def weights(self, i: int) -> tuple[float, ...]:
        return self.w[i]


def compute_weights(l: LogicalProblem, g: HardwareGraph, e: Embedding) -> WeightTable:
    """Count active couplers from each chain member to chains of logical neighbors.

    Chain-internal couplers are excluded. A chain with no such couplers gets
    uniform weights ``1 / K_i``.
    """
    owner = e.owner()
    adj_l = l.neighbors()
    adj_p = g.adjacency()
    ds, Ds, ws = [], [], []
    for i, chain in enumerate(e.chains):
        nbrs = adj_l.get(i, set())
        d = tuple(sum(1 for r in adj_p.get(q, ()) if owner.get(r) in nbrs) for q in chain)
        D = sum(d)
        w = tuple(x / D for x in d) if D else tuple(1.0 / len(chain) for _ in chain)
        ds.append(d)
        Ds.append(D)
        ws.append(w)
    return WeightTable(tuple(ds), tuple(Ds), tuple(ws))


def _sign(x: float) -> float:
    return math.copysign(1.0, x) if x else 0.0


def _clipped_even(value: float, ranked: list, h_min: float) -> dict:
    """Split ``value`` evenly over ``ranked``; clip to ``h_min`` pieces if needed.

    ``ranked`` must already be in priority order. Returns item -> share.
    """
    k = len(ranked)
    out = {item: 0.0 for item in ranked}
    if value == 0.0 or k == 0:
        return out
    share = value / k
    if abs(share) >= h_min:
        return {item: share for item in ranked}
    whole = min(int(math.floor(abs(value) / h_min)), k - 1)
    sign = _sign(value)
    for item in ranked[:whole]:
        out[item] = sign * h_min
    out[ranked[whole]] = value - sign * h_min * whole
    return out


def _weighted(value: float, chain, weights, h_min: float) -> dict:
    if value == 0.0:
        return {q: 0.0 for q in chain}
    survivors = [x for x, w in enumerate(weights) if w > 0]
    while True:
        total = sum(weights[x] for x in survivors)
        shares = {x: value * weights[x] / total for x in survivors}
        keep = [x for x in survivors if abs(shares[x]) >= h_min]
        if len(keep) == len(survivors):
            break
        if not keep:
            # nothing clears the floor: the heaviest member takes the full value
            best = max(survivors, key=lambda x: (weights[x], -chain[x]))
            shares = {best: value}
            break
        survivors = keep
    return {q: shares.get(x, 0.0) for x, q in enumerate(chain)}


def _rank_members(chain, d) -> list[int]:
    """Members by decreasing inter-chain coupler count, ties to the lower qubit index."""
    return [q for _, q in sorted(zip(d, chain), key=lambda t: (-t[0], t[1]))]


def distribute_biases(l: LogicalProblem, e: Embedding, wt: WeightTable, cfg: ParamConfig) -> dict[int, float]:
    biases: dict[int, float] = {}
    s = cfg.strategy
    for i, chain in enumerate(e.chains):
        hi = l.bias(i)
        d, w = wt.d[i], wt.w[i]
        if s is StrategyKind.SINGLE:
            share = {q: 0.0 for q in chain}
            if hi != 0.0:
                if wt.D[i] == 0 and len(chain) > 1:
                    log.warning("logical qubit %d has no inter-chain couplers; bias placed on qubit %d", i, min(chain))
                share[_rank_members(chain, d)[0]] = hi
        elif s is StrategyKind.EVEN:
            share = _clipped_even(hi, _rank_members(chain, d), cfg.h_min)
        elif s is StrategyKind.WEIGHTED:
            share = _weighted(hi, chain, w, cfg.h_min)
        else:
            K = len(chain)
            if hi == 0.0:
                share = {q: 0.0 for q in chain}
            elif abs(hi) < K * cfg.h_min:
                share = _clipped_even(hi, _rank_members(chain, d), cfg.h_min)
            else:
                floor = cfg.h_min * _sign(hi)
                rest = hi - K * floor
                share = {q: floor + rest * wk for q, wk in zip(chain, w)}
        biases.update(share)
    return biases


def distribute_couplings(l: LogicalProblem, g: HardwareGraph, e: Embedding, cfg: ParamConfig) -> dict[Edge, float]:
    out: dict[Edge, float] = {}
    for i, j in l.edges:
        Jij = l.J[(i, j)]
        couplers = e.couplers(g, i, j)
        if not couplers:
            raise ValueError(f"logical edge ({i}, {j}) has no physical coupler")
        if cfg.strategy is StrategyKind.SINGLE:
            share = {couplers[0]: Jij}
        else:
            share = _clipped_even(Jij, couplers, cfg.h_min)
        for k, v in share.items():
            if v != 0.0:
                out[k] = out.get(k, 0.0) + v
    return out


def parameterize(
    l: LogicalProblem,
    g: HardwareGraph,
    e: Embedding,
    cfg: ParamConfig,
    weights: WeightTable | None = None,
    check: bool = True,
) -> PhysicalProblem:
    """Build the physical problem for one strategy and chain coupling.

    Before rescaling, the physical biases of each chain sum to ``h_i`` and the
    physical couplers between two chains sum to ``J_ij``. If ``cfg.srt`` is set
    the reversal is applied last.
    """
    if check:
        report = validate_embedding(l, g, e)
        if not report.valid:
            raise ValueError(f"invalid embedding: {report.violations}")
    wt = weights or compute_weights(l, g, e)
    biases = distribute_biases(l, e, wt, cfg)
    couplings = distribute_couplings(l, g, e, cfg)
    chains = {ce: -cfg.c for ce in e.chain_edges(g)}
    p = PhysicalProblem(g.N, biases, couplings, chains, 1.0)
    if cfg.rescale:
        p, _ = rescale_with_report(p)
    if cfg.srt is not None:
        p = apply_srt(p, cfg.srt, cfg.srt_mode)
    return p


def apply_srt(p: PhysicalProblem, r, mode: SrtMode | str = SrtMode.ALL_TERMS) -> PhysicalProblem:
    """Gauge-transform ``p`` by the reversal vector ``r`` (length ``num_qubits``).

    In all-terms mode ``E'(s) = E(r * s)``. Problem-terms-only mode leaves the
    chain couplings untouched.
    """
    mode = SrtMode(mode)
    r = np.asarray(r)
    if r.shape != (p.num_qubits,):
        raise ValueError(f"reversal vector of shape {r.shape} does not match {p.num_qubits} qubits")
    if not np.all(np.abs(r) == 1):
        raise ValueError("reversal vector entries must be +-1")
    biases = {q: float(r[q]) * v for q, v in p.biases.items()}
    pc = {(a, b): float(r[a] * r[b]) * v for (a, b), v in p.problem_couplings.items()}
    if mode is SrtMode.ALL_TERMS:
        cc = {(a, b): float(r[a] * r[b]) * v for (a, b), v in p.chain_couplings.items()}
    else:
        cc = dict(p.chain_couplings)
    return PhysicalProblem(p.num_qubits, biases, pc, cc, p.scale)


def srt_set(
    N: int,
    count: int,
    rng_seed: int = 0,
    chain_constant: bool = False,
    e: Embedding | None = None,
) -> list[np.ndarray]:
    """``count`` reversal vectors; the first is the identity."""
    if count < 1:
        raise ValueError("need at least one transformation")
    if chain_constant and e is None:
        raise ValueError("chain-constant reversals need an embedding")
    out = [np.ones(N, dtype=np.int8)]
    for t in range(1, count):
        rng = np.random.default_rng(derive_seed(rng_seed, "srt", t))
        r = rng.choice(np.array([-1, 1], dtype=np.int8), size=N)
        if chain_constant:
            for chain in e.chains:
                r[list(chain)] = r[chain[0]]
        out.append(r)
    return out


def chain_bound(p: PhysicalProblem, e: Embedding) -> float:
    """Largest total problem-term magnitude touching any single chain.

    A chain coupling strictly above this makes every broken-chain state
    strictly worse than repairing it, so exact ground states have intact chains.
    """
    incident = {q: abs(v) for q, v in p.biases.items()}
    for (a, b), v in p.problem_couplings.items():
        incident[a] = incident.get(a, 0.0) + abs(v)
        incident[b] = incident.get(b, 0.0) + abs(v)
    return max((sum(incident.get(q, 0.0) for q in chain) for chain in e.chains), default=0.0)
