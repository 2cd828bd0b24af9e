"""Chimera hardware graphs and a greedy minor embedder.

Qubit indexing is row-major over cells, then side, then in-cell index::

    q = ((row * cols + col) * 2 + side) * cell_half + k

Side 0 qubits couple to the same ``k`` in the cell below (row + 1); side 1
qubits couple to the same ``k`` in the cell to the right (col + 1). Within a
cell every side-0 qubit couples to every side-1 qubit.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .problem import Embedding, HardwareGraph, LogicalProblem, validate_embedding
from .seeds import derive_seed

log = logging.getLogger(__name__)


class EmbeddingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChimeraSpec:
    rows: int
    cols: int
    cell_half: int = 4
    dead: tuple[int, ...] = ()

    def __post_init__(self):
        if min(self.rows, self.cols, self.cell_half) < 1:
            raise ValueError("rows, cols and cell_half must be positive")
        object.__setattr__(self, "dead", tuple(sorted(set(int(q) for q in self.dead))))
        for q in self.dead:
            if not 0 <= q < self.N:
                raise ValueError(f"dead qubit {q} outside [0, {self.N})")

    @property
    def N(self) -> int:
        return self.rows * self.cols * 2 * self.cell_half

    def index(self, row: int, col: int, side: int, k: int) -> int:
        return ((row * self.cols + col) * 2 + side) * self.cell_half + k

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "cell_half": self.cell_half, "dead": list(self.dead)}

    @classmethod
    def from_json(cls, data: dict) -> "ChimeraSpec":
        return cls(int(data["rows"]), int(data["cols"]), int(data.get("cell_half", 4)), tuple(data.get("dead", ())))


def chimera_edges(spec: ChimeraSpec) -> set[tuple[int, int]]:
    t = spec.cell_half
    out = set()
    for r in range(spec.rows):
        for c in range(spec.cols):
            for k in range(t):
                a = spec.index(r, c, 0, k)
                for m in range(t):
                    out.add((a, spec.index(r, c, 1, m)))
                if r + 1 < spec.rows:
                    out.add((a, spec.index(r + 1, c, 0, k)))
                if c + 1 < spec.cols:
                    out.add((spec.index(r, c, 1, k), spec.index(r, c + 1, 1, k)))
    return {(a, b) if a < b else (b, a) for a, b in out}


def build_chimera(spec: ChimeraSpec) -> HardwareGraph:
    dead = set(spec.dead)
    return HardwareGraph(
        N=spec.N,
        edges=frozenset(chimera_edges(spec)),
        active=tuple(q not in dead for q in range(spec.N)),
        topology={"kind": "chimera", "rows": spec.rows, "cols": spec.cols, "cell_half": spec.cell_half},
    )


def random_dead_mask(spec: ChimeraSpec, count: int, seed: int) -> ChimeraSpec:
    """Spec with ``count`` uniformly chosen dead qubits (not a real yield map)."""
    rng = np.random.default_rng(seed)
    dead = rng.choice(spec.N, size=count, replace=False)
    return ChimeraSpec(spec.rows, spec.cols, spec.cell_half, tuple(int(q) for q in dead))


def _dijkstra(csr, sources, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Node-weighted shortest paths out of a chain.

    ``dist[q]`` is the summed cost of the qubits on the path from the chain to
    ``q`` (``q`` included, chain excluded); ``pred`` walks back to the chain.
    Unreachable or inactive qubits get ``inf``.
    """
    indptr, indices = csr
    graph = scipy.sparse.csr_matrix((cost[indices], indices, indptr), shape=(len(cost), len(cost)))
    dist, pred, _ = scipy.sparse.csgraph.dijkstra(
        graph, directed=True, indices=list(sources), min_only=True, return_predecessors=True
    )
    return dist, pred


def _placement_order(l: LogicalProblem, rng: np.random.Generator) -> list[int]:
    """Random breadth-first order so most qubits have a placed neighbor."""
    adj = l.neighbors()
    order: list[int] = []
    placed = set()
    for root in rng.permutation(l.n):
        root = int(root)
        if root in placed:
            continue
        placed.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            order.append(v)
            nbrs = sorted(adj[v] - placed)
            for u in rng.permutation(nbrs) if nbrs else ():
                u = int(u)
                placed.add(u)
                queue.append(u)
    return order


class _Router:
    """Chain router that tolerates shared qubits while it searches.

    A qubit's cost is ``(1 + history) * (1 + pressure * usage)``, where
    ``usage`` counts the other chains holding it and ``history`` grows every
    round the qubit stays shared, so persistent hot spots become expensive.
    """

    def __init__(self, l: LogicalProblem, g: HardwareGraph, rng: np.random.Generator):
        self.l, self.g, self.rng = l, g, rng
        self.adj = l.neighbors()
        self.active = np.array(g.active, dtype=bool)
        self.usage = np.zeros(g.N, dtype=np.int64)
        self.history = np.zeros(g.N)
        self.chains: dict[int, set[int]] = {}
        self.pressure = 0.5
        nbrs = [[] for _ in range(g.N)]
        for a, b in g.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        indptr = np.cumsum([0] + [len(x) for x in nbrs])
        self.csr = (indptr, np.array([b for x in nbrs for b in sorted(x)], dtype=np.int64))

    def _cost(self, strict: bool = False) -> np.ndarray:
        if strict:
            cost = np.where(self.usage > 0, np.inf, 1.0)
        else:
            cost = (1.0 + self.history) * (1.0 + self.pressure * self.usage)
        cost[~self.active] = np.inf
        return cost

    def next_round(self) -> None:
        self.history[self.usage > 1] += 1.0
        self.pressure *= 1.6

    def _pick(self, scores: np.ndarray) -> int:
        best = scores.min()
        ties = np.flatnonzero(scores <= best + 1e-9)
        return int(ties[int(self.rng.integers(len(ties)))])

    def place(self, v: int, strict: bool = False) -> bool:
        cost = self._cost(strict)
        placed = sorted(u for u in self.adj[v] if u in self.chains)
        if not placed:
            self.chains[v] = {self._pick(cost)}
        else:
            searches = [_dijkstra(self.csr, sorted(self.chains[u]), cost) for u in placed]
            with np.errstate(invalid="ignore"):
                scores = sum(d for d, _ in searches) - (len(searches) - 1) * cost
            scores[np.isnan(scores)] = np.inf
            for u in placed:
                # a root inside a neighbor chain would merge the two chains
                scores[list(self.chains[u])] = np.inf
            if not np.isfinite(scores).any():
                return False
            root = self._pick(scores)
            chain = {root}
            for u, (_, pred) in zip(placed, searches):
                q = root
                src = self.chains[u]
                while True:
                    q = int(pred[q])
                    if q < 0 or q in src:
                        break
                    chain.add(q)
            self.chains[v] = chain
        for q in self.chains[v]:
            self.usage[q] += 1
        return True

    def rip(self, v: int) -> set[int]:
        chain = self.chains.pop(v)
        for q in chain:
            self.usage[q] -= 1
        return chain

    def restore(self, v: int, chain: set[int]) -> None:
        self.chains[v] = set(chain)
        for q in chain:
            self.usage[q] += 1

    def shrink(self, rounds: int) -> None:
        """Re-route each chain over free qubits only, keeping it if shorter."""
        for _ in range(rounds):
            improved = False
            for v in self.rng.permutation(self.l.n):
                v = int(v)
                old = self.rip(v)
                if self.place(v, strict=True) and len(self.chains[v]) < len(old):
                    improved = True
                    continue
                if v in self.chains:
                    self.rip(v)
                self.restore(v, old)
            if not improved:
                break

    def overlapping(self) -> bool:
        return bool((self.usage > 1).any())

    def hot_vertices(self) -> list[int]:
        """Chains on shared qubits together with their logical neighbors."""
        hot = set(np.flatnonzero(self.usage > 1).tolist())
        core = {v for v, c in self.chains.items() if c & hot}
        out = set(core)
        for v in core:
            out |= self.adj[v]
        return sorted(out)


def _embed_once(l: LogicalProblem, g: HardwareGraph, rng: np.random.Generator, rounds: int = 30) -> Embedding | None:
    router = _Router(l, g, rng)
    for v in _placement_order(l, rng):
        if not router.place(v):
            return None
    for _ in range(rounds):
        if not router.overlapping():
            break
        router.next_round()
        for v in rng.permutation(l.n):
            v = int(v)
            router.rip(v)
            if not router.place(v):
                return None
        if router.overlapping():
            hot = router.hot_vertices()
            for v in hot:
                router.rip(v)
            for v in rng.permutation(hot):
                if not router.place(int(v)):
                    return None
    if router.overlapping():
        return None
    router.shrink(rounds=5)
    return Embedding(tuple(tuple(sorted(router.chains[i])) for i in range(l.n)))


def greedy_embed(l: LogicalProblem, g: HardwareGraph, rng_seed: int = 0, max_tries: int = 10) -> Embedding:
    """Embed ``l`` into ``g`` by growing chains along shortest paths.

    Logical qubits are placed in a seeded random breadth-first order. Each
    chain is rooted at the qubit minimizing the summed path cost to the chains
    of already placed neighbors, then extended along those paths. Qubits held
    by other chains stay usable at a cost that grows with every repair round;
    each round rips up and re-routes every chain until no qubit is shared.
    Attempt ``t`` uses seed ``derive_seed(rng_seed, "embed", t)``; the first
    success wins. Raises ``EmbeddingError`` after ``max_tries`` failures.
    """
    if l.n == 0:
        return Embedding(())
    for attempt in range(max_tries):
        rng = np.random.default_rng(derive_seed(rng_seed, "embed", attempt))
        emb = _embed_once(l, g, rng)
        if emb is None:
            continue
        report = validate_embedding(l, g, emb)
        if not report.valid:
            raise AssertionError(f"greedy embedder produced an invalid embedding: {report.violations}")
        return emb
    raise EmbeddingError(f"no embedding found after {max_tries} attempts")
