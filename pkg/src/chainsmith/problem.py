"""Logical and physical Ising problems, energies, rescaling and embedding checks.

Spins take values in {-1, +1}; energies are minimized. A physical problem is
indexed by global hardware qubit labels, so its spin vectors have length
``num_qubits`` (the full chip), and qubits outside ``variables`` are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

ATOL = 1e-9

Edge = tuple[int, int]


class DimensionError(ValueError):
    """Spin vector length does not match the problem."""


def edge(a: int, b: int) -> Edge:
    a, b = int(a), int(b)
    if a == b:
        raise ValueError(f"self-edge ({a}, {a}) is not allowed")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class LogicalProblem:
    """Ising problem over ``n`` logical spins, plus a constant energy offset."""

    n: int
    h: Mapping[int, float] = field(default_factory=dict)
    J: Mapping[Edge, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        h = {int(i): float(v) for i, v in self.h.items()}
        J: dict[Edge, float] = {}
        for (i, j), v in self.J.items():
            key = edge(i, j)
            if key in J:
                raise ValueError(f"duplicate coupling {key}")
            J[key] = float(v)
        for i in h:
            if not 0 <= i < self.n:
                raise ValueError(f"bias index {i} outside [0, {self.n})")
        for i, j in J:
            if j >= self.n or i < 0:
                raise ValueError(f"coupling {(i, j)} outside [0, {self.n})")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)

    @property
    def edges(self) -> list[Edge]:
        """Logical edge set: couplings with a nonzero value."""
        return sorted(k for k, v in self.J.items() if v != 0.0)

    def neighbors(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(self.n)}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def bias(self, i: int) -> float:
        return self.h.get(i, 0.0)

    @property
    def num_spins(self) -> int:
        return self.n

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    def dense(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(h, upper-triangular J, offset) over ``variables``."""
        h = np.zeros(self.n)
        for i, v in self.h.items():
            h[i] = v
        J = np.zeros((self.n, self.n))
        for (i, j), v in self.J.items():
            J[i, j] += v
        return h, J, self.offset

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "h": [{"i": i, "v": v} for i, v in sorted(self.h.items())],
            "J": [{"i": i, "j": j, "v": v} for (i, j), v in sorted(self.J.items())],
            "offset": self.offset,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LogicalProblem":
        return cls(
            n=int(data["n"]),
            h={int(t["i"]): float(t["v"]) for t in data.get("h", [])},
            J={(int(t["i"]), int(t["j"])): float(t["v"]) for t in data.get("J", [])},
            offset=float(data.get("offset", 0.0)),
        )


@dataclass(frozen=True)
class HardwareGraph:
    """Physical qubits ``0..N-1`` with an activity mask and an edge set.

    Edges touching inactive qubits are dropped at construction.
    """

    N: int
    edges: frozenset[Edge]
    active: tuple[bool, ...] = ()
    topology: Mapping | None = None

    def __post_init__(self):
        active = tuple(bool(a) for a in self.active) if self.active else (True,) * self.N
        if len(active) != self.N:
            raise ValueError("active mask length must equal N")
        kept = set()
        for a, b in self.edges:
            e = edge(a, b)
            if not (0 <= e[0] and e[1] < self.N):
                raise ValueError(f"edge {e} outside [0, {self.N})")
            if active[e[0]] and active[e[1]]:
                kept.add(e)
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "edges", frozenset(kept))
        object.__setattr__(self, "_adj", None)

    @property
    def dead(self) -> list[int]:
        return [q for q, a in enumerate(self.active) if not a]

    def adjacency(self) -> dict[int, list[int]]:
        if self._adj is None:
            adj: dict[int, list[int]] = {q: [] for q in range(self.N) if self.active[q]}
            for a, b in sorted(self.edges):
                adj[a].append(b)
                adj[b].append(a)
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def has_edge(self, a: int, b: int) -> bool:
        return a != b and edge(a, b) in self.edges

    def to_json(self) -> dict:
        if self.topology and self.topology.get("kind") == "chimera":
            t = self.topology
            return {"rows": t["rows"], "cols": t["cols"], "cell_half": t["cell_half"], "dead": self.dead}
        return {"N": self.N, "edges": [list(e) for e in sorted(self.edges)], "dead": self.dead}

    @classmethod
    def from_json(cls, data: dict) -> "HardwareGraph":
        if "rows" in data:
            from .chimera import ChimeraSpec, build_chimera

            spec = ChimeraSpec(
                rows=int(data["rows"]),
                cols=int(data["cols"]),
                cell_half=int(data.get("cell_half", 4)),
                dead=tuple(int(q) for q in data.get("dead", [])),
            )
            return build_chimera(spec)
        N = int(data["N"])
        dead = set(int(q) for q in data.get("dead", []))
        return cls(
            N=N,
            edges=frozenset(edge(a, b) for a, b in data["edges"]),
            active=tuple(q not in dead for q in range(N)),
        )


@dataclass(frozen=True)
class Embedding:
    """``chains[i]`` lists the physical qubits representing logical qubit ``i``."""

    chains: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "chains", tuple(tuple(int(q) for q in c) for c in self.chains))

    def __len__(self) -> int:
        return len(self.chains)

    def owner(self) -> dict[int, int]:
        """Physical qubit -> logical index."""
        return {q: i for i, chain in enumerate(self.chains) for q in chain}

    @property
    def qubits(self) -> list[int]:
        return sorted(q for c in self.chains for q in c)

    def chain_edges(self, g: HardwareGraph) -> list[Edge]:
        out = []
        for chain in self.chains:
            members = sorted(chain)
            for x, a in enumerate(members):
                for b in members[x + 1:]:
                    if g.has_edge(a, b):
                        out.append((a, b))
        return sorted(out)

    def couplers(self, g: HardwareGraph, i: int, j: int) -> list[Edge]:
        """Physical edges joining chain ``i`` to chain ``j``, sorted."""
        cj = set(self.chains[j])
        out = [edge(a, b) for a in self.chains[i] for b in g.adjacency().get(a, ()) if b in cj]
        return sorted(set(out))

    def to_json(self) -> dict:
        return {"chains": [list(c) for c in self.chains]}

    @classmethod
    def from_json(cls, data: dict) -> "Embedding":
        return cls(chains=tuple(tuple(c) for c in data["chains"]))


@dataclass(frozen=True)
class PhysicalProblem:
    """Embedded Ising problem on hardware qubit labels.

    ``biases`` carries an entry (possibly 0.0) for every programmed qubit.
    Chain couplings are stored signed, i.e. ``-c`` for a ferromagnetic chain.
    ``scale`` is the factor applied to the problem terms by rescaling.
    """

    num_qubits: int
    biases: Mapping[int, float] = field(default_factory=dict)
    problem_couplings: Mapping[Edge, float] = field(default_factory=dict)
    chain_couplings: Mapping[Edge, float] = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self):
        biases = {int(q): float(v) for q, v in self.biases.items()}
        pc = {edge(*e): float(v) for e, v in self.problem_couplings.items()}
        cc = {edge(*e): float(v) for e, v in self.chain_couplings.items()}
        overlap = set(pc) & set(cc)
        if overlap:
            raise ValueError(f"edges used as both problem and chain couplers: {sorted(overlap)[:3]}")
        for q in list(biases) + [q for e in list(pc) + list(cc) for q in e]:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} outside [0, {self.num_qubits})")
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "problem_couplings", pc)
        object.__setattr__(self, "chain_couplings", cc)

    @property
    def variables(self) -> tuple[int, ...]:
        qs = set(self.biases)
        for a, b in list(self.problem_couplings) + list(self.chain_couplings):
            qs.add(a)
            qs.add(b)
        return tuple(sorted(qs))

    @property
    def num_spins(self) -> int:
        return self.num_qubits

    @property
    def offset(self) -> float:
        return 0.0

    def couplings(self) -> dict[Edge, float]:
        out = dict(self.problem_couplings)
        out.update(self.chain_couplings)
        return out

    def dense(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(h, upper-triangular J, offset) over ``variables`` in sorted order."""
        var = self.variables
        pos = {q: x for x, q in enumerate(var)}
        h = np.zeros(len(var))
        for q, v in self.biases.items():
            h[pos[q]] = v
        J = np.zeros((len(var), len(var)))
        for (a, b), v in self.couplings().items():
            J[pos[a], pos[b]] += v
        return h, J, 0.0

    def matrix(self) -> tuple[np.ndarray, tuple[int, ...]]:
        """Symmetric coupling matrix ``A`` over ``variables``; biases on the diagonal.

        Off-diagonal entries hold the full programmed coupler value on both sides.
        """
        var = self.variables
        pos = {q: x for x, q in enumerate(var)}
        A = np.zeros((len(var), len(var)))
        for q, v in self.biases.items():
            A[pos[q], pos[q]] = v
        for (a, b), v in self.couplings().items():
            A[pos[a], pos[b]] = A[pos[b], pos[a]] = v
        return A, var

    @classmethod
    def from_matrix(
        cls,
        A: np.ndarray,
        variables: Iterable[int],
        chain_edges: Iterable[Edge],
        num_qubits: int,
        scale: float = 1.0,
    ) -> "PhysicalProblem":
        var = tuple(variables)
        chain = {edge(*e) for e in chain_edges}
        biases = {q: float(A[x, x]) for x, q in enumerate(var)}
        pc, cc = {}, {}
        for x, a in enumerate(var):
            for y in range(x + 1, len(var)):
                v = float(A[x, y])
                e = edge(a, var[y])
                if e in chain:
                    cc[e] = v
                elif v != 0.0:
                    pc[e] = v
        return cls(num_qubits, biases, pc, cc, scale)

    def to_json(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "scale": self.scale,
            "biases": [{"q": q, "v": v} for q, v in sorted(self.biases.items())],
            "problem_couplings": [{"a": a, "b": b, "v": v} for (a, b), v in sorted(self.problem_couplings.items())],
            "chain_couplings": [{"a": a, "b": b, "v": v} for (a, b), v in sorted(self.chain_couplings.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PhysicalProblem":
        return cls(
            num_qubits=int(data["num_qubits"]),
            biases={int(t["q"]): float(t["v"]) for t in data["biases"]},
            problem_couplings={(int(t["a"]), int(t["b"])): float(t["v"]) for t in data["problem_couplings"]},
            chain_couplings={(int(t["a"]), int(t["b"])): float(t["v"]) for t in data["chain_couplings"]},
            scale=float(data.get("scale", 1.0)),
        )


Problem = LogicalProblem | PhysicalProblem


def energy(problem: Problem, s) -> float:
    """Ising energy of spin vector ``s`` (length ``problem.num_spins``)."""
    s = np.asarray(s)
    if s.ndim != 1 or s.shape[0] != problem.num_spins:
        raise DimensionError(f"spin vector of length {s.shape} does not match {problem.num_spins} spins")
    if isinstance(problem, LogicalProblem):
        h, J = problem.h, problem.J
    else:
        h, J = problem.biases, problem.couplings()
    e = problem.offset
    for i, v in h.items():
        e += v * s[i]
    for (i, j), v in J.items():
        e += v * s[i] * s[j]
    return float(e)


def energies(problem: Problem, states: np.ndarray) -> np.ndarray:
    """Vectorized energies for a ``(reads, num_spins)`` array of spins."""
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != problem.num_spins:
        raise DimensionError(f"states of shape {states.shape} do not match {problem.num_spins} spins")
    h, J, offset = problem.dense()
    var = list(problem.variables)
    S = states[:, var].astype(np.float64)
    return S @ h + np.einsum("ri,ri->r", S @ J, S) + offset


@dataclass
class RescaleReport:
    scale: float
    all_zero: bool


def rescale_to_hardware(p: PhysicalProblem, h_range: float = 1.0, j_range: float = 1.0) -> PhysicalProblem:
    """Scale problem biases and couplings so the largest magnitude is exactly 1.

    Chain couplings are left as programmed; they are expressed in units of
    the rescaled problem. ``h_range``/``j_range`` are the hardware limits and
    must both admit the unit scale.
    """
    if h_range < 1.0 or j_range < 1.0:
        raise ValueError("hardware ranges must admit a unit-scaled problem term")
    problem, _ = rescale_with_report(p)
    return problem


def rescale_with_report(p: PhysicalProblem) -> tuple[PhysicalProblem, RescaleReport]:
    terms = [abs(v) for v in p.biases.values()] + [abs(v) for v in p.problem_couplings.values()]
    biggest = max(terms, default=0.0)
    if biggest == 0.0:
        return p, RescaleReport(scale=1.0, all_zero=True)
    k = 1.0 / biggest
    out = PhysicalProblem(
        p.num_qubits,
        {q: v * k for q, v in p.biases.items()},
        {e: v * k for e, v in p.problem_couplings.items()},
        dict(p.chain_couplings),
        p.scale * k,
    )
    return out, RescaleReport(scale=k, all_zero=False)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def _connected(nodes: set[int], g: HardwareGraph) -> bool:
    if not nodes:
        return False
    adj = g.adjacency()
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for r in adj.get(q, ()):
            if r in nodes and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen == nodes


def validate_embedding(l: LogicalProblem, g: HardwareGraph, e: Embedding) -> ValidationReport:
    report = ValidationReport()
    v = report.violations
    if len(e.chains) != l.n:
        v.append(f"embedding has {len(e.chains)} chains for {l.n} logical qubits")
    seen: dict[int, int] = {}
    for i, chain in enumerate(e.chains):
        if not chain:
            v.append(f"empty chain for logical qubit {i}")
            continue
        for q in chain:
            if not 0 <= q < g.N:
                v.append(f"chain {i} uses qubit {q} outside the hardware")
            elif not g.active[q]:
                v.append(f"chain {i} uses inactive qubit {q}")
            if q in seen and seen[q] != i:
                v.append(f"overlapping chains {seen[q]} and {i} share qubit {q}")
            seen[q] = i
        if len(set(chain)) != len(chain):
            v.append(f"chain {i} repeats a qubit")
        if not _connected(set(chain), g):
            v.append(f"disconnected chain {i}")
    for i, j in l.edges:
        if i < len(e.chains) and j < len(e.chains) and not e.couplers(g, i, j):
            v.append(f"logical edge ({i}, {j}) has no physical coupler")
    return report


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
