import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainsmith.paramset import (
    ALL_STRATEGIES,
    ParamConfig,
    SrtMode,
    StrategyKind,
    apply_srt,
    chain_bound,
    compute_weights,
    parameterize,
    srt_set,
)
from chainsmith.problem import Embedding, HardwareGraph, LogicalProblem, PhysicalProblem

from conftest import brute_energies, embedded_instance, random_physical

H_MINS = (0.0, 1 / 16, 1 / 8)


def _hw(n, edges):
    return HardwareGraph(N=n, edges=frozenset(edges))


def _raw(l, g, e, strategy, h_min=0.1, c=2.0):
    return parameterize(l, g, e, ParamConfig(strategy, c, h_min, rescale=False))


# --- weights ----------------------------------------------------------------

def _two_chain_setup():
    # logical 0 on (0, 1); logical 1 on (2, 3, 4); qubit 0 sees 3 couplers, qubit 1 sees 1
    g = _hw(5, [(0, 1), (2, 3), (3, 4), (0, 2), (0, 3), (0, 4), (1, 2)])
    e = Embedding(((0, 1), (2, 3, 4)))
    return g, e


def test_weights_from_coupler_counts():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {}, {(0, 1): 1.0})
    wt = compute_weights(l, g, e)
    assert wt.d[0] == (3, 1) and wt.D[0] == 4
    assert wt.w[0] == (0.75, 0.25)


def test_weights_ignore_chain_edges_and_non_neighbors():
    g, e = _two_chain_setup()
    # no logical edge: every physical inter-chain coupler is irrelevant
    wt = compute_weights(LogicalProblem(2), g, e)
    assert wt.D == (0, 0)
    assert wt.w[0] == (0.5, 0.5) and wt.w[1] == pytest.approx((1 / 3,) * 3)


def test_weight_of_singleton_chain():
    g = _hw(2, [(0, 1)])
    wt = compute_weights(LogicalProblem(2, {}, {(0, 1): 1.0}), g, Embedding(((0,), (1,))))
    assert wt.w == ((1.0,), (1.0,))


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_weights_sum_to_one(seed):
    l, g, e = embedded_instance(seed)
    wt = compute_weights(l, g, e)
    for i in range(l.n):
        assert sum(wt.w[i]) == pytest.approx(1.0, abs=1e-12)
        assert all(0 <= w <= 1 for w in wt.w[i])


# --- strategy examples ------------------------------------------------------

def test_single_puts_bias_on_busiest_member():
    g = _hw(4, [(0, 1), (1, 2), (1, 3)])
    e = Embedding(((0, 1, 2), (3,)))
    l = LogicalProblem(2, {0: 0.5}, {(0, 1): 1.0})
    p = _raw(l, g, e, "single")
    assert [p.biases[q] for q in (0, 1, 2)] == [0.0, 0.5, 0.0]


def test_single_ties_to_lowest_index_and_first_coupler():
    g = _hw(4, [(0, 1), (2, 3), (0, 2), (1, 3)])
    e = Embedding(((0, 1), (2, 3)))
    l = LogicalProblem(2, {0: 0.4, 1: -0.2}, {(0, 1): 0.8})
    p = _raw(l, g, e, "single")
    assert p.biases == {0: 0.4, 1: 0.0, 2: -0.2, 3: 0.0}
    assert p.problem_couplings == {(0, 2): 0.8}


def test_even_clipping_example():
    g = _hw(5, [(0, 1), (1, 2), (2, 3), (0, 4), (1, 4), (2, 4)])
    e = Embedding(((0, 1, 2, 3), (4,)))
    l = LogicalProblem(2, {0: 0.25}, {(0, 1): 1.0})
    p = _raw(l, g, e, "even", h_min=0.1)
    vals = [p.biases[q] for q in (0, 1, 2, 3)]
    assert vals == pytest.approx([0.1, 0.1, 0.05, 0.0])
    assert sum(vals) == pytest.approx(0.25, abs=1e-12)


def test_even_without_clipping_is_uniform():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 0.8, 1: -0.9}, {(0, 1): 1.0})
    p = _raw(l, g, e, "even")
    assert p.biases[0] == p.biases[1] == 0.4
    assert p.biases[2] == p.biases[3] == p.biases[4] == pytest.approx(-0.3)


def test_even_coupler_split():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {}, {(0, 1): 1.0})
    p = _raw(l, g, e, "even")
    assert p.problem_couplings == {k: 0.25 for k in [(0, 2), (0, 3), (0, 4), (1, 2)]}
    # clipped: 0.15 over four couplers with h_min 0.1 -> 0.1 + 0.05 in lexicographic order
    l = LogicalProblem(2, {}, {(0, 1): 0.15})
    p = _raw(l, g, e, "even")
    assert p.problem_couplings == pytest.approx({(0, 2): 0.1, (0, 3): 0.05})


def test_weighted_regularized_example():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 0.8}, {(0, 1): 1.0})
    p = _raw(l, g, e, "weighted_regularized", h_min=0.1)
    assert (p.biases[0], p.biases[1]) == pytest.approx((0.55, 0.25))


def test_weighted_regularized_small_bias_falls_back_to_even():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 0.15}, {(0, 1): 1.0})
    wr = _raw(l, g, e, "weighted_regularized", h_min=0.1)
    ev = _raw(l, g, e, "even", h_min=0.1)
    assert wr.biases == ev.biases
    assert (wr.biases[0], wr.biases[1]) == pytest.approx((0.1, 0.05))


def test_weighted_proportional_and_redistributed():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 0.8}, {(0, 1): 1.0})
    p = _raw(l, g, e, "weighted", h_min=0.1)
    assert (p.biases[0], p.biases[1]) == pytest.approx((0.6, 0.2))
    # 0.3 * 0.25 falls below 0.1, so qubit 0 takes it all
    l = LogicalProblem(2, {0: 0.3}, {(0, 1): 1.0})
    p = _raw(l, g, e, "weighted", h_min=0.1)
    assert (p.biases[0], p.biases[1]) == pytest.approx((0.3, 0.0))


def test_weighted_tiny_bias_goes_to_heaviest():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 0.01}, {(0, 1): 1.0})
    p = _raw(l, g, e, "weighted", h_min=0.1)
    assert (p.biases[0], p.biases[1]) == pytest.approx((0.01, 0.0))


@pytest.mark.parametrize("strategy", ALL_STRATEGIES)
def test_zero_bias_stays_zero(strategy):
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {}, {(0, 1): 1.0})
    p = _raw(l, g, e, strategy)
    assert all(v == 0.0 for v in p.biases.values())


def test_chain_edges_get_negative_c_and_survive_rescale():
    g, e = _two_chain_setup()
    l = LogicalProblem(2, {0: 4.0}, {(0, 1): 2.0})
    p = parameterize(l, g, e, ParamConfig("even", c=1.8))
    assert p.chain_couplings == {(0, 1): -1.8, (2, 3): -1.8, (3, 4): -1.8}
    assert max(abs(v) for v in list(p.biases.values()) + list(p.problem_couplings.values())) == pytest.approx(1.0)
    assert p.scale == pytest.approx(0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        ParamConfig("even", c=0.0)
    with pytest.raises(ValueError):
        ParamConfig("even", h_min=1.0)
    with pytest.raises(ValueError):
        ParamConfig("median")
    assert ParamConfig("WR").strategy is StrategyKind.WEIGHTED_REGULARIZED


def test_invalid_embedding_rejected():
    g = _hw(3, [(0, 1)])
    l = LogicalProblem(2, {}, {(0, 1): 1.0})
    with pytest.raises(ValueError):
        parameterize(l, g, Embedding(((0,), (2,))), ParamConfig())


# --- invariants over random instances --------------------------------------

def _chain_sums(l, e, p):
    return [sum(p.biases[q] for q in chain) for chain in e.chains]


def _edge_sums(l, g, e, p):
    return {ij: sum(p.problem_couplings.get(k, 0.0) for k in e.couplers(g, *ij)) for ij in l.edges}


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1), st.sampled_from(ALL_STRATEGIES), st.sampled_from(H_MINS))
def test_conservation(seed, strategy, h_min):
    l, g, e = embedded_instance(seed)
    p = parameterize(l, g, e, ParamConfig(strategy, 2.0, h_min, rescale=False))
    for i, total in enumerate(_chain_sums(l, e, p)):
        assert abs(total - l.bias(i)) <= 1e-9
    for ij, total in _edge_sums(l, g, e, p).items():
        assert abs(total - l.J[ij]) <= 1e-9


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_single_count(seed):
    l, g, e = embedded_instance(seed)
    p = _raw(l, g, e, "single")
    for chain in e.chains:
        assert sum(p.biases[q] != 0 for q in chain) <= 1
    for ij in l.edges:
        assert sum(p.problem_couplings.get(k, 0.0) != 0 for k in e.couplers(g, *ij)) == 1


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_even_uniform_and_weighted_proportional_without_clipping(seed):
    l, g, e = embedded_instance(seed)
    even = _raw(l, g, e, "even", h_min=0.0)
    wtd = _raw(l, g, e, "weighted", h_min=0.0)
    wt = compute_weights(l, g, e)
    for i, chain in enumerate(e.chains):
        vals = [even.biases[q] for q in chain]
        assert max(vals) - min(vals) <= 1e-12
        for (qa, wa), (qb, wb) in itertools.combinations(zip(chain, wt.w[i]), 2):
            assert wtd.biases[qa] * wb == pytest.approx(wtd.biases[qb] * wa, abs=1e-12)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.sampled_from(ALL_STRATEGIES), st.sampled_from(H_MINS))
def test_clipped_values_respect_floor(seed, strategy, h_min):
    l, g, e = embedded_instance(seed)
    p = _raw(l, g, e, strategy, h_min=h_min)
    if strategy is StrategyKind.WEIGHTED:
        for i, chain in enumerate(e.chains):
            nonzero = [abs(p.biases[q]) for q in chain if p.biases[q] != 0]
            if abs(l.bias(i)) >= h_min and nonzero:
                assert min(nonzero) >= h_min - 1e-12


# --- spin reversal ----------------------------------------------------------

def test_identity_srt():
    p = random_physical(np.random.default_rng(0), 6)
    assert apply_srt(p, np.ones(6, dtype=int)) == p


def test_single_flip_negates_incident_terms():
    p = PhysicalProblem(3, {0: 0.5, 1: -0.2, 2: 0.1}, {(0, 1): 0.3}, {(1, 2): -2.0})
    r = np.array([1, -1, 1])
    out = apply_srt(p, r)
    assert out.biases == {0: 0.5, 1: 0.2, 2: 0.1}
    assert out.problem_couplings == {(0, 1): -0.3}
    assert out.chain_couplings == {(1, 2): 2.0}
    kept = apply_srt(p, r, SrtMode.PROBLEM_TERMS_ONLY)
    assert kept.chain_couplings == {(1, 2): -2.0}


def test_srt_length_and_value_checks():
    p = random_physical(np.random.default_rng(0), 4)
    with pytest.raises(ValueError):
        apply_srt(p, np.ones(3))
    with pytest.raises(ValueError):
        apply_srt(p, np.array([1, 0, 1, 1]))


@given(st.integers(0, 2**32 - 1))
def test_srt_preserves_spectrum(seed):
    rng = np.random.default_rng(seed)
    p = random_physical(rng, int(rng.integers(2, 9)))
    r = rng.choice([-1, 1], size=p.num_qubits)
    before = np.sort(brute_energies(p))
    after = np.sort(brute_energies(apply_srt(p, r)))
    assert np.allclose(before, after, atol=1e-9, rtol=0)


def test_srt_set_shapes():
    rs = srt_set(10, 4, rng_seed=3)
    assert len(rs) == 4 and (rs[0] == 1).all()
    assert all(r.shape == (10,) and set(np.unique(r)) <= {-1, 1} for r in rs)
    assert len(srt_set(10, 1)) == 1
    with pytest.raises(ValueError):
        srt_set(10, 0)
    with pytest.raises(ValueError):
        srt_set(10, 2, chain_constant=True)


def test_srt_set_chain_constant():
    l, g, e = embedded_instance(3)
    for r in srt_set(g.N, 6, 11, chain_constant=True, e=e):
        for chain in e.chains:
            assert len(set(r[list(chain)])) == 1


def test_srt_via_config():
    l, g, e = embedded_instance(5)
    r = srt_set(g.N, 2, 9)[1]
    direct = apply_srt(parameterize(l, g, e, ParamConfig("even")), r)
    via = parameterize(l, g, e, ParamConfig("even", srt=tuple(int(x) for x in r)))
    assert direct == via


# --- chain bound ------------------------------------------------------------

def test_chain_bound_sums_incident_terms():
    g, e = _two_chain_setup()
    p = PhysicalProblem(5, {0: 0.5, 1: -0.25, 2: 0.0, 3: 0.0, 4: 0.0}, {(0, 2): 0.5, (1, 2): -1.0}, {})
    # chain (0,1): 0.5 + 0.25 + 0.5 + 1.0; chain (2,3,4): 0.5 + 1.0
    assert chain_bound(p, e) == pytest.approx(2.25)
