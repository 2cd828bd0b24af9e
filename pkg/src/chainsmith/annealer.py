"""Samplers for physical problems: exact enumeration and simulated annealing.

Both return a :class:`SampleSet` whose rows are full-length spin vectors over
the problem's ``num_spins`` labels. Labels outside ``problem.variables`` are
fixed to +1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .problem import ATOL, energies

MAX_EXACT_SPINS = 30


class CapacityError(ValueError):
    pass


class BackendError(ValueError):
    pass


@dataclass(frozen=True)
class SaSchedule:
    sweeps: int = 1000
    beta_start: float = 0.1
    beta_end: float = 5.0
    reads: int = 1000

    def __post_init__(self):
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be at least 1")
        if not self.beta_end > self.beta_start > 0:
            raise ValueError("need beta_end > beta_start > 0")

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_start, self.beta_end, self.sweeps)

    def to_json(self) -> dict:
        return {"sweeps": self.sweeps, "beta_start": self.beta_start, "beta_end": self.beta_end, "reads": self.reads}


@dataclass
class SampleSet:
    states: np.ndarray  # (rows, num_spins) int8
    multiplicity: np.ndarray  # (rows,) int
    energy: np.ndarray  # (rows,) float
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def reads(self) -> int:
        return int(self.multiplicity.sum())

    def aggregate(self) -> "SampleSet":
        """Merge identical rows, keeping first-occurrence order."""
        seen: dict[bytes, int] = {}
        keep, mult = [], []
        for x, row in enumerate(self.states):
            key = row.tobytes()
            if key in seen:
                mult[seen[key]] += int(self.multiplicity[x])
            else:
                seen[key] = len(keep)
                keep.append(x)
                mult.append(int(self.multiplicity[x]))
        return SampleSet(self.states[keep], np.array(mult), self.energy[keep], dict(self.provenance))

    def to_csv(self, variables) -> str:
        """Rows ``read_index,bitstring,energy,multiplicity``; bits over ``variables``, '1' = +1."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["read_index", "bitstring", "energy", "multiplicity"])
        var = list(variables)
        for x in range(len(self)):
            bits = "".join("1" if v > 0 else "0" for v in self.states[x, var])
            w.writerow([x, bits, f"{self.energy[x]:.17g}", int(self.multiplicity[x])])
        return buf.getvalue()

    def save(self, path, variables) -> None:
        path = Path(path)
        path.write_text(self.to_csv(variables))
        meta = dict(self.provenance, variables=list(variables), num_spins=int(self.states.shape[1]))
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "SampleSet":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        var = meta.pop("variables")
        num = meta.pop("num_spins")
        rows = list(csv.DictReader(path.read_text().splitlines()))
        states = np.ones((len(rows), num), dtype=np.int8)
        for x, row in enumerate(rows):
            states[x, var] = [1 if b == "1" else -1 for b in row["bitstring"]]
        return cls(
            states,
            np.array([int(r["multiplicity"]) for r in rows], dtype=np.int64),
            np.array([float(r["energy"]) for r in rows]),
            meta,
        )


def _index_states(indices: np.ndarray, V: int) -> np.ndarray:
    """Spin rows for integer states; bit ``k`` set -> variable ``k`` is +1."""
    bits = (indices[:, None] >> np.arange(V, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def exact_ground_states(problem, chunk: int = 1 << 16) -> tuple[np.ndarray, float]:
    """All global minimizers as a ``(k, num_spins)`` array, and the ground energy.

    Enumerates the ``2**V`` states of the problem's variables in chunks.
    Rows are ordered by their integer encoding.
    """
    var = list(problem.variables)
    V = len(var)
    if V > MAX_EXACT_SPINS:
        raise CapacityError(f"{V} variables exceeds the exact-enumeration limit of {MAX_EXACT_SPINS}")
    h, J, offset = problem.dense()
    best = np.inf
    found: list[np.ndarray] = []
    for start in range(0, 1 << V, chunk):
        idx = np.arange(start, min(start + chunk, 1 << V), dtype=np.int64)
        S = _index_states(idx, V).astype(np.float64)
        e = S @ h + np.einsum("ri,ri->r", S @ J, S) + offset
        m = e.min()
        if m < best - ATOL:
            best = m
            found = []
        if m <= best + ATOL:
            found.append(idx[e <= best + ATOL])
            best = min(best, m)
    winners = np.concatenate(found) if found else np.zeros(0, dtype=np.int64)
    full = np.ones((len(winners), problem.num_spins), dtype=np.int8)
    if V:
        full[:, var] = _index_states(winners, V)
    # drop entries admitted under an earlier, slightly higher best
    e = energies(problem, full) if len(full) else np.zeros(0)
    keep = e <= e.min() + ATOL if len(e) else np.zeros(0, dtype=bool)
    return full[keep], float(e[keep].min()) if keep.any() else float(offset)


def _csr(problem):
    var = list(problem.variables)
    pos = {q: x for x, q in enumerate(var)}
    V = len(var)
    h = np.zeros(V)
    nbr: list[list[tuple[int, float]]] = [[] for _ in range(V)]
    if hasattr(problem, "biases"):
        hmap, jmap = problem.biases, problem.couplings()
    else:
        hmap, jmap = problem.h, problem.J
    for q, v in hmap.items():
        h[pos[q]] += v
    for (a, b), v in jmap.items():
        nbr[pos[a]].append((pos[b], v))
        nbr[pos[b]].append((pos[a], v))
    indptr = np.zeros(V + 1, dtype=np.int64)
    for x in range(V):
        indptr[x + 1] = indptr[x] + len(nbr[x])
    indices = np.array([t[0] for row in nbr for t in row], dtype=np.int64)
    weights = np.array([t[1] for row in nbr for t in row], dtype=np.float64)
    return var, h, indptr, indices, weights


@numba.njit(cache=True)
def _anneal(h, indptr, indices, weights, betas, seeds, init, use_init):
    reads = seeds.shape[0]
    V = h.shape[0]
    out = np.empty((reads, V), dtype=np.int8)
    s = np.empty(V, dtype=np.int8)
    for r in range(reads):
        np.random.seed(seeds[r])
        if use_init:
            for k in range(V):
                s[k] = init[r, k]
        else:
            for k in range(V):
                s[k] = 1 if np.random.random() < 0.5 else -1
        for t in range(betas.shape[0]):
            beta = betas[t]
            for k in range(V):
                f = h[k]
                for p in range(indptr[k], indptr[k + 1]):
                    f += weights[p] * s[indices[p]]
                delta = -2.0 * s[k] * f
                if delta < 0.0:
                    s[k] = -s[k]
                elif delta == 0.0:
                    # a sure flip here would march domain walls in lockstep under the fixed sweep order
                    if np.random.random() < 0.5:
                        s[k] = -s[k]
                elif np.random.random() < np.exp(-beta * delta):
                    s[k] = -s[k]
        for k in range(V):
            out[r, k] = s[k]
    return out


def sample_sa(problem, sched: SaSchedule = SaSchedule(), rng_seed: int = 0, initial_states=None) -> SampleSet:
    """Independent Metropolis annealing runs over a geometric beta ladder.

    Each read restarts from a random state (or ``initial_states[read]``) with
    its own seed derived from ``rng_seed``; a sweep visits variables in fixed
    sorted order. Uphill flips are accepted with probability ``exp(-beta * dE)``
    and zero-cost flips with probability 1/2. Rows are returned in read order
    with multiplicity 1.
    """
    var, h, indptr, indices, weights = _csr(problem)
    seeds = np.random.SeedSequence(rng_seed).generate_state(sched.reads, dtype=np.uint32).astype(np.int64)
    if initial_states is not None:
        init = np.asarray(initial_states, dtype=np.int8)
        if init.shape[1] == problem.num_spins:
            init = init[:, var]
        init = np.broadcast_to(init, (sched.reads, len(var))).copy()
        use_init = True
    else:
        init = np.zeros((1, 1), dtype=np.int8)
        use_init = False
    compact = _anneal(h, indptr, indices, weights, sched.betas(), seeds, init, use_init)
    states = np.ones((sched.reads, problem.num_spins), dtype=np.int8)
    states[:, var] = compact
    return SampleSet(
        states,
        np.ones(sched.reads, dtype=np.int64),
        energies(problem, states),
        {"backend": "sa", "seed": int(rng_seed), "schedule": sched.to_json()},
    )


@dataclass(frozen=True)
class BackendConfig:
    name: str = "sa"
    reads: int = 1000
    schedule: SaSchedule | None = None

    def sa_schedule(self) -> SaSchedule:
        if self.schedule is not None:
            return self.schedule
        return SaSchedule(reads=self.reads)


def _sample_exact(problem, reads: int) -> SampleSet:
    states, e0 = exact_ground_states(problem)
    var = list(problem.variables)
    keys = ["".join("1" if v > 0 else "0" for v in row[var]) for row in states]
    order = sorted(range(len(states)), key=lambda x: keys[x])
    k = len(order)
    base, extra = divmod(reads, k)
    mult = np.array([base + (1 if rank < extra else 0) for rank in range(k)], dtype=np.int64)
    keep = mult > 0
    states = states[order][keep]
    return SampleSet(
        states,
        mult[keep],
        energies(problem, states),
        {"backend": "exact", "ground_energy": e0},
    )


def sample(problem, backend: BackendConfig | str = "sa", rng_seed: int = 0) -> SampleSet:
    """Dispatch to a named backend.

    ``exact`` spreads ``reads`` evenly over the ground states, the remainder
    going to the lexicographically smallest bitstrings ('0' < '1', -1 -> '0').
    """
    if isinstance(backend, str):
        backend = BackendConfig(name=backend)
    if backend.name == "exact":
        return _sample_exact(problem, backend.reads)
    if backend.name == "sa":
        return sample_sa(problem, backend.sa_schedule(), rng_seed)
    raise BackendError(f"unknown backend {backend.name!r}")
