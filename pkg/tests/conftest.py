import itertools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chainsmith.chimera import ChimeraSpec, EmbeddingError, build_chimera, greedy_embed
from chainsmith.problem import LogicalProblem, PhysicalProblem

settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("dev", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def random_logical(rng, n, density=0.5, scale=1.0):
    """Connected-ish random Ising model with integer-ish values."""
    h = {i: float(rng.integers(-4, 5)) / 4 * scale for i in range(n)}
    J = {}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < density:
            J[(i, j)] = float(rng.choice([-1, 1]) * rng.integers(1, 5)) / 4 * scale
    # a path keeps the problem connected
    for i in range(n - 1):
        J.setdefault((i, i + 1), float(rng.choice([-1, 1])) / 2 * scale)
    return LogicalProblem(n, h, J)


def random_physical(rng, N, density=0.4):
    biases = {q: float(rng.normal()) for q in range(N)}
    pc, cc = {}, {}
    for a, b in itertools.combinations(range(N), 2):
        u = rng.random()
        if u < density / 2:
            pc[(a, b)] = float(rng.normal())
        elif u < density:
            cc[(a, b)] = -float(rng.uniform(1, 3))
    return PhysicalProblem(N, biases, pc, cc)


def brute_energies(p):
    """Energies of every state by direct summation; state x sets qubit k to +1 iff bit k is set."""
    var = list(p.variables)
    out = []
    for bits in itertools.product((-1, 1), repeat=len(var)):
        s = dict(zip(reversed(var), bits))
        e = sum(v * s[q] for q, v in p.biases.items())
        e += sum(v * s[a] * s[b] for (a, b), v in p.couplings().items())
        out.append(e)
    return np.array(out)


def embedded_instance(seed, n=None, max_qubits=None, grid=(2, 2, 4), tries=50):
    """(logical, hardware, embedding), redrawn until the embedding fits."""
    rng = np.random.default_rng(seed)
    g = build_chimera(ChimeraSpec(*grid))
    for _ in range(tries):
        l = random_logical(rng, n or int(rng.integers(2, 7)))
        try:
            e = greedy_embed(l, g, int(rng.integers(1 << 31)), max_tries=5)
        except EmbeddingError:
            continue
        if max_qubits is None or len(e.qubits) <= max_qubits:
            return l, g, e
    raise RuntimeError("could not draw a small enough instance")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
