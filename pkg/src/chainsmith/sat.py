"""Mixed-SAT instances: generation, DIMACS I/O, capped model counting and
reduction to an Ising penalty Hamiltonian.

Variables are 1-based DIMACS literals. In the Ising form, variable ``v`` is
logical spin ``v - 1`` with true <-> +1; ancillas follow the originals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .problem import LogicalProblem

MAX_COUNT_VARS = 30
DEFAULT_CAP = 1_000_000


class DimacsError(ValueError):
    pass


class CapacityError(ValueError):
    pass


class UnsatisfiableClause(ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        clauses = tuple(tuple(int(x) for x in c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise ValueError(f"literal {lit} out of range for {self.n_vars} variables")
            if len({abs(x) for x in c}) != len(c):
                raise ValueError(f"repeated variable in clause {c}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def alpha(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment) -> bool:
        """``assignment[v-1]`` is truthy for true (or +1 / -1 spins)."""
        vals = [bool(a > 0) if not isinstance(a, (bool, np.bool_)) else bool(a) for a in assignment]
        return all(any(vals[abs(x) - 1] == (x > 0) for x in c) for c in self.clauses)

    def check(self, spins: np.ndarray) -> np.ndarray:
        """Vectorized satisfaction over rows of ``spins`` (first n_vars columns, +-1)."""
        spins = np.asarray(spins)
        ok = np.ones(spins.shape[0], dtype=bool)
        for c in self.clauses:
            idx = [abs(x) - 1 for x in c]
            sgn = np.array([1 if x > 0 else -1 for x in c])
            ok &= (spins[:, idx] == sgn).any(axis=1)
        return ok


def generate_mixed_sat(n: int, alpha: int, max_len: int = 3, rng_seed: int = 0) -> CnfFormula:
    """Random formula with ``alpha`` clauses whose lengths are uniform in [1, max_len]."""
    if n < 1 or alpha < 0:
        raise ValueError("need n >= 1 and alpha >= 0")
    if not 1 <= max_len <= n:
        raise ValueError(f"max_len must lie in [1, n={n}], got {max_len}")
    rng = np.random.default_rng(rng_seed)
    clauses = []
    for _ in range(alpha):
        k = int(rng.integers(1, max_len + 1))
        vs = rng.choice(n, size=k, replace=False) + 1
        signs = rng.integers(0, 2, size=k) * 2 - 1
        clauses.append(tuple(int(v * s) for v, s in zip(vs, signs)))
    return CnfFormula(n, tuple(clauses))


# --- DIMACS ---------------------------------------------------------------

def parse_dimacs(text: str) -> CnfFormula:
    n_vars = n_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            continue
        if n_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > n_vars:
                raise DimacsError(f"line {lineno}: literal {lit} out of range")
            else:
                current.append(lit)
    if n_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != n_clauses:
        raise DimacsError(f"header declares {n_clauses} clauses, found {len(clauses)}")
    try:
        return CnfFormula(n_vars, tuple(clauses))
    except ValueError as exc:
        raise DimacsError(str(exc)) from None


def emit_dimacs(f: CnfFormula, comment: str | None = None) -> str:
    """Canonical form: optional ``c`` line, header, one clause per line ending in `` 0``."""
    lines = []
    if comment:
        lines.append(f"c {comment}")
    lines.append(f"p cnf {f.n_vars} {len(f.clauses)}")
    lines.extend(" ".join(str(x) for x in c) + " 0" for c in f.clauses)
    return "\n".join(lines) + "\n"


# --- counting ---------------------------------------------------------------

# bit b of _LOW_MASKS[j] is bit j of b, for the six variables packed inside a word
_LOW_MASKS = np.array(
    [sum(1 << b for b in range(64) if (b >> j) & 1) for j in range(6)], dtype=np.uint64
)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class CountResult:
    count: int
    capped: bool


def count_solutions(f: CnfFormula, cap: int = DEFAULT_CAP, chunk_words: int = 1 << 18) -> CountResult:
    """Exact model count by bit-parallel enumeration, aborting once above ``cap``.

    Assignment ``a`` sets variable ``v`` true iff bit ``v - 1`` of ``a`` is set.
    Assignments are packed 64 per machine word: the first six variables vary
    inside a word, the rest across words. Returns ``CountResult(cap, True)`` as
    soon as the running count exceeds ``cap``.
    """
    n = f.n_vars
    if n > MAX_COUNT_VARS:
        raise CapacityError(f"{n} variables exceeds the enumeration limit of {MAX_COUNT_VARS}")
    low = min(n, 6)
    n_words = 1 << (n - low)
    tail = np.uint64((1 << (1 << low)) - 1) if low < 6 else _ALL
    total = 0
    for start in range(0, n_words, chunk_words):
        w = np.arange(start, min(start + chunk_words, n_words), dtype=np.uint64)
        var_words = []
        for v in range(n):
            if v < 6:
                var_words.append(np.full(w.shape, _LOW_MASKS[v], dtype=np.uint64))
            else:
                bit = (w >> np.uint64(v - 6)) & np.uint64(1)
                var_words.append(np.uint64(0) - bit)
        sat = np.full(w.shape, tail, dtype=np.uint64)
        for c in f.clauses:
            cw = np.zeros(w.shape, dtype=np.uint64)
            for lit in c:
                x = var_words[abs(lit) - 1]
                cw |= x if lit > 0 else ~x
            sat &= cw
        total += int(np.bitwise_count(sat).sum())
        if total > cap:
            return CountResult(cap, True)
    return CountResult(total, False)


def satisfying_assignments(f: CnfFormula) -> list[tuple[int, ...]]:
    """All satisfying assignments as +-1 tuples, by plain enumeration (small n)."""
    out = []
    for bits in itertools.product((-1, 1), repeat=f.n_vars):
        if all(any(bits[abs(x) - 1] == (1 if x > 0 else -1) for x in c) for c in f.clauses):
            out.append(bits)
    return out


# --- reduction to Ising ---------------------------------------------------------

class _SpinPoly:
    """Quadratic polynomial in +-1 spins: keys are sorted index tuples of length <= 2."""

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, ...], float] = dict(terms or {})

    @staticmethod
    def literal_false(lit: int, var: int) -> "_SpinPoly":
        # 1 when the literal is false: (1 - sign * s) / 2
        sign = 1 if lit > 0 else -1
        return _SpinPoly({(): 0.5, (var,): -0.5 * sign})

    @staticmethod
    def binary(var: int) -> "_SpinPoly":
        return _SpinPoly({(): 0.5, (var,): 0.5})

    def __add__(self, other: "_SpinPoly") -> "_SpinPoly":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0.0) + v
        return _SpinPoly(out)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return _SpinPoly({k: v * other for k, v in self.terms.items()})
        out: dict[tuple[int, ...], float] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                # s_i * s_i = 1
                idx = set(k1) ^ set(k2)
                key = tuple(sorted(idx))
                if len(key) > 2:
                    raise ValueError("product exceeds quadratic order")
                out[key] = out.get(key, 0.0) + v1 * v2
        return _SpinPoly(out)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ReductionMap:
    n_original: int
    n_ancilla: int
    # clause index (in the preprocessed formula) -> ancilla logical indices
    clause_ancillas: dict[int, tuple[int, ...]] = field(default_factory=dict)
    # ancillas introduced while splitting long clauses, keyed by original clause index
    split_ancillas: dict[int, tuple[int, ...]] = field(default_factory=dict)
    penalty_weights: tuple[float, ...] = ()

    @property
    def size(self) -> int:
        return self.n_original + self.n_ancilla

    def to_json(self) -> dict:
        return {
            "n_original": self.n_original,
            "n_ancilla": self.n_ancilla,
            "clause_ancillas": {str(k): list(v) for k, v in self.clause_ancillas.items()},
            "split_ancillas": {str(k): list(v) for k, v in self.split_ancillas.items()},
            "penalty_weights": list(self.penalty_weights),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReductionMap":
        return cls(
            int(data["n_original"]),
            int(data["n_ancilla"]),
            {int(k): tuple(v) for k, v in data.get("clause_ancillas", {}).items()},
            {int(k): tuple(v) for k, v in data.get("split_ancillas", {}).items()},
            tuple(data.get("penalty_weights", ())),
        )


def split_long_clauses(f: CnfFormula) -> tuple[CnfFormula, dict[int, tuple[int, ...]]]:
    """Rewrite clauses longer than 3 as chains of 3-clauses linked by fresh variables.

    ``(l1 v l2 v ... v lk)`` becomes ``(l1 v l2 v y1) (-y1 v l3 v y2) ... (-y_{k-3} v l_{k-1} v lk)``,
    which is satisfiable for exactly the assignments of the originals that satisfy it.
    """
    n = f.n_vars
    out = []
    created: dict[int, tuple[int, ...]] = {}
    for ci, c in enumerate(f.clauses):
        if len(c) <= 3:
            out.append(c)
            continue
        fresh = []
        prev = None
        lits = list(c)
        for pos in range(len(lits) - 2):
            last = pos == len(lits) - 3
            head = [lits[0], lits[1]] if prev is None else [-prev, lits[pos + 1]]
            if last:
                out.append(tuple(head + [lits[-1]]))
            else:
                n += 1
                fresh.append(n)
                out.append(tuple(head + [n]))
                prev = n
        created[ci] = tuple(v - 1 for v in fresh)
    return CnfFormula(n, tuple(out)), created


def sat_to_ising(f: CnfFormula, weight: float = 1.0) -> tuple[LogicalProblem, ReductionMap]:
    """Penalty Ising model whose zero-energy ground states are the satisfying assignments.

    Each clause adds ``weight`` times its violation indicator. One- and
    two-literal clauses expand the indicator directly. A three-literal clause
    ``z1 z2 z3`` (``z`` = literal is false) becomes ``a z3 + (z1 z2 - 2 a z1 - 2 a z2 + 3 a)``
    with one binary ancilla ``a``; its minimum over ``a`` is exactly ``z1 z2 z3``.
    """
    for c in f.clauses:
        if not c:
            raise UnsatisfiableClause("empty clause cannot be satisfied")
    g, split = split_long_clauses(f)
    poly = _SpinPoly()
    next_var = g.n_vars
    clause_anc: dict[int, tuple[int, ...]] = {}
    for ci, c in enumerate(g.clauses):
        z = [_SpinPoly.literal_false(lit, abs(lit) - 1) for lit in c]
        if len(c) == 1:
            term = z[0]
        elif len(c) == 2:
            term = z[0] * z[1]
        else:
            a = _SpinPoly.binary(next_var)
            clause_anc[ci] = (next_var,)
            next_var += 1
            term = a * z[2] + z[0] * z[1] + (a * z[0]) * -2.0 + (a * z[1]) * -2.0 + a * 3.0
        poly = poly + term * weight
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = 0.0
    for key, v in poly.terms.items():
        if abs(v) < 1e-12:
            continue
        if len(key) == 0:
            offset += v
        elif len(key) == 1:
            h[key[0]] = v
        else:
            J[key] = v
    problem = LogicalProblem(n=next_var, h=h, J=J, offset=offset)
    rmap = ReductionMap(
        n_original=f.n_vars,
        n_ancilla=next_var - f.n_vars,
        clause_ancillas=clause_anc,
        split_ancillas=split,
        penalty_weights=tuple(weight for _ in g.clauses),
    )
    return problem, rmap


# --- corpus ----------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    instance_id: str
    n: int
    alpha: int
    seed: int
    solution_count: int
    capped: bool
    max_len: int = 3

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "n": self.n,
            "alpha": self.alpha,
            "seed": self.seed,
            "solution_count": self.solution_count,
            "capped": self.capped,
            "max_len": self.max_len,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CorpusEntry":
        return cls(d["instance_id"], int(d["n"]), int(d["alpha"]), int(d["seed"]),
                   int(d["solution_count"]), bool(d["capped"]), int(d.get("max_len", 3)))

    def formula(self) -> CnfFormula:
        return generate_mixed_sat(self.n, self.alpha, self.max_len, self.seed)
