import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqid.channels import (
    CqChannel,
    IndexedChannelFamily,
    SparseInputDistribution,
    bsc,
    constant_channel,
    noiseless_channel,
)
from cqid.errors import (
    DimGuardExceeded,
    NoCodeFound,
    PreconditionViolated,
    SizeMismatch,
)
from cqid.idcodes import (
    IdCode,
    SetFamily,
    assemble_id_code,
    build_transmission_code,
    evaluate_id_errors,
    gilbert_family,
    parse_code_bundle,
    sequential_identification,
    sequential_query_bound,
    serialize_code_bundle,
    transmission_errors,
)
from cqid.linalg import random_density

import oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)

BSC_REPETITION_PGM = 0.0154987667845915  # classical_pgm_error(BSC .1, {00000, 11111})


def all_strings(a, n):
    return [tuple(x) for x in itertools.product(range(a), repeat=n)]


def noiseless_code(n=2):
    return build_transmission_code(noiseless_channel(2), n, 2**n, codewords=all_strings(2, n))


def test_transmission_code_examples():
    tc = noiseless_code()
    assert tc.max_error == pytest.approx(0.0, abs=1e-12)
    const = build_transmission_code(constant_channel(np.eye(2) / 2, 2), 1, 2, codewords=[(0,), (1,)])
    assert const.max_error >= 0.5 - 1e-12
    rep = build_transmission_code(bsc(0.1), 5, 2, codewords=[(0,) * 5, (1,) * 5])
    assert rep.max_error == pytest.approx(BSC_REPETITION_PGM, abs=1e-12)


def test_transmission_code_errors():
    with pytest.raises(DimGuardExceeded):
        build_transmission_code(bsc(0.1), 13, 2)
    with pytest.raises(NoCodeFound):
        build_transmission_code(constant_channel(np.eye(2) / 2, 2), 2, 4, lambda_target=0.1)
    with pytest.raises(SizeMismatch):
        build_transmission_code(bsc(0.1), 2, 5)


@settings(max_examples=10)
@given(seeds)
def test_recorded_error_matches_reevaluation(seed):
    tc = build_transmission_code(bsc(0.05), 4, 8, seed=seed % 10000, attempts=2)
    errs = transmission_errors(tc.channel, tc.codewords, tc.decoder)
    assert errs.max() == pytest.approx(tc.max_error, abs=1e-9)
    assert tc.max_error == pytest.approx(oracles.classical_pgm_error(
        [[0.95, 0.05], [0.05, 0.95]], tc.codeword_strings()), abs=1e-9)
    assert np.allclose(tc.decoder.sum(axis=0), np.eye(16), atol=1e-9)


def test_gilbert_examples():
    one = gilbert_family(64, 1 / 16, 0.9, 1)
    assert one.size == 1 and one.verify()
    pairs = gilbert_family(64, 1 / 32, 0.5, 32)
    assert pairs.subset_size == 2 and pairs.max_intersection() == 0
    big = gilbert_family(1024, 1 / 32, 0.5, 200)
    g = big.intersections()
    off = g[~np.eye(200, dtype=bool)]
    assert big.subset_size == 32 and off.max() <= 15
    with pytest.raises(PreconditionViolated):
        gilbert_family(8, 0.25, 0.9, 2)


@settings(max_examples=20)
@given(seeds, st.sampled_from([(64, 1 / 16, 0.9), (128, 1 / 32, 0.5), (200, 0.05, 0.75)]),
       st.integers(2, 40))
def test_gilbert_always_verifies(seed, params, n_target):
    m, eps, lam = params
    fam = gilbert_family(m, eps, lam, n_target, seed=seed)
    assert fam.size == n_target
    # exhaustive check written out independently of SetFamily.verify
    k = fam.subset_size
    for a, b in itertools.combinations(fam.subsets, 2):
        assert len(set(a) & set(b)) < lam * k
    assert all(len(set(s)) == k for s in fam.subsets)


def test_id_code_noiseless_disjoint():
    tc = noiseless_code()
    fam = SetFamily(4, 2, [(0, 1), (2, 3)], 0.5, 0.5)
    code = assemble_id_code(tc, fam)
    assert code.lambda1 == pytest.approx(0.0, abs=1e-12)
    assert code.lambda2 == pytest.approx(0.0, abs=1e-12)
    assert code.check_coarse_graining()
    with pytest.raises(SizeMismatch):
        assemble_id_code(tc, SetFamily(8, 2, [(0, 1)], 0.25, 0.5))


def test_overlap_fraction_gives_second_kind_error():
    tc = noiseless_code(3)
    fam = SetFamily(8, 4, [(0, 1, 2, 3), (2, 3, 4, 5), (1, 5, 6, 7)], 0.5, 1.0)
    code = assemble_id_code(tc, fam)
    res = evaluate_id_errors(code, noiseless_channel(2))
    inc = fam.intersections() / 4
    off = ~np.eye(3, dtype=bool)
    assert np.allclose(res.second_kind[off], inc[off])
    assert res.lambda2 == pytest.approx(0.5)
    assert res.lambda1 == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=8)
@given(seeds)
def test_id_errors_follow_transmission_error(seed):
    tc = build_transmission_code(bsc(0.05), 5, 32, seed=seed % 1000, attempts=2)
    fam = gilbert_family(32, 1 / 16, 0.9, 12, seed=seed)
    code = assemble_id_code(tc, fam)
    lam = max(tc.max_error, fam.lam)
    assert code.lambda1 <= tc.max_error + 1e-12
    assert code.lambda2 <= lam + tc.max_error + 1e-12
    for _, d in code.pairs:
        w = np.linalg.eigvalsh(d)
        assert w.min() >= -1e-9 and w.max() <= 1 + 1e-9


def random_cq(rng, a=2, d=2):
    return CqChannel(np.stack([random_density(d, rng) for _ in range(a)]))


def small_quantum_code(rng, n=3, N=3):
    strings = all_strings(2, n)
    pairs = []
    povm = []
    for i in range(N):
        picks = rng.choice(len(strings), size=2, replace=False)
        dist = SparseInputDistribution(n, ((strings[picks[0]], 0.3), (strings[picks[1]], 0.7)))
        r = random_density(2**n, rng)
        pairs.append((dist, r / np.linalg.eigvalsh(r).max()))
    return IdCode(n, pairs)


def test_avc_exact_matches_brute_force():
    rng = np.random.default_rng(11)
    fam = IndexedChannelFamily((random_cq(rng), random_cq(rng)), "avc")
    code = small_quantum_code(rng)
    res = evaluate_id_errors(code, fam, mode="avc")
    assert res.exact
    pairs = [([(x, w) for x, w in p.support], d) for p, d in code.pairs]
    lam1, w1, lam2, w2 = oracles.avc_brute_force(pairs, [m.states for m in fam.members], 3)
    assert res.lambda1 == pytest.approx(lam1, abs=1e-12)
    assert res.lambda2 == pytest.approx(lam2, abs=1e-12)
    assert res.first_witness == w1
    assert res.second_witness == w2


@settings(max_examples=8)
@given(seeds)
def test_sampled_path_never_exceeds_exact(seed):
    rng = np.random.default_rng(seed)
    fam = IndexedChannelFamily((random_cq(rng), random_cq(rng)), "avc")
    code = small_quantum_code(rng, n=3, N=2)
    exact = evaluate_id_errors(code, fam, mode="avc")
    sampled = evaluate_id_errors(code, fam, mode="avc", enumeration_guard=2, sample_budget=3, seed=seed)
    assert not sampled.exact
    assert sampled.lambda1 <= exact.lambda1 + 1e-12
    assert sampled.lambda2 <= exact.lambda2 + 1e-12


@settings(max_examples=8)
@given(seeds)
def test_avc_singleton_equals_compound(seed):
    rng = np.random.default_rng(seed)
    ch = random_cq(rng)
    code = small_quantum_code(rng, n=2, N=3)
    a = evaluate_id_errors(code, IndexedChannelFamily((ch,), "avc"), mode="avc")
    c = evaluate_id_errors(code, IndexedChannelFamily((ch,)), mode="compound")
    assert a.lambda1 == c.lambda1 and a.lambda2 == c.lambda2
    assert np.array_equal(a.first_kind, c.first_kind)


def test_compound_mode_takes_worst_member():
    tc = build_transmission_code(IndexedChannelFamily((bsc(0.02), bsc(0.1))), 3, 4, seed=1)
    fam = SetFamily(4, 2, [(0, 1), (2, 3)], 0.5, 0.75)
    code = assemble_id_code(tc, fam)
    per_member = [evaluate_id_errors(code, m) for m in tc.channel.members]
    assert code.lambda1 == pytest.approx(max(r.lambda1 for r in per_member))
    assert code.lambda2 == pytest.approx(max(r.lambda2 for r in per_member))


def test_sequential_query_bound():
    assert sequential_query_bound(0.2, 0.001) == 10
    assert sequential_query_bound(0.1, 0.01) == 0


def test_sequential_projective_code_is_exact():
    tc = noiseless_code(3)
    fam = SetFamily(8, 1, [(m,) for m in range(8)], 0.125, 1.0)
    code = assemble_id_code(tc, fam)
    rep = sequential_identification(code, noiseless_channel(2), 5, [0, 5, 3, 7, 5], trials=500)
    assert rep.all_correct_rate == 1.0
    assert np.all(rep.per_query_error == 0)


def test_sequential_commuting_matches_classical_probabilities():
    # diagonal decoders and states: the instrument acts classically, so the
    # chance that every answer is right is a product over outcome strings
    tc = build_transmission_code(bsc(0.1), 3, 4, codewords=[(0, 0, 0), (1, 1, 1), (0, 1, 1), (1, 0, 0)],
                                 decoder="ml")
    fam = SetFamily(4, 1, [(m,) for m in range(4)], 0.25, 1.0)
    code = assemble_id_code(tc, fam)
    queries = [1, 0, 2]
    rho = oracles.product_state(bsc(0.1).states, (0, 0, 0))
    y_probs = np.real(np.diagonal(rho))
    decs = [np.real(np.diagonal(d)) for _, d in code.pairs]
    classical = sum(py * np.prod([decs[q][y] if q == 0 else 1 - decs[q][y] for q in queries])
                    for y, py in enumerate(y_probs))
    chain = oracles.sequential_chain([d for _, d in code.pairs], rho, queries, 0)
    assert chain == pytest.approx(classical, abs=1e-12)
    rep = sequential_identification(code, bsc(0.1), 0, queries, trials=40000, seed=3)
    assert abs(rep.all_correct_rate - classical) <= 4 * np.sqrt(classical * (1 - classical) / 40000)


def test_sequential_noisy_code_matches_chain_oracle():
    rng = np.random.default_rng(5)
    ch = random_cq(rng)
    code = small_quantum_code(rng, n=2, N=4)
    queries = [2, 0, 3]
    rho = sum(w * oracles.product_state(ch.states, x) for x, w in code.pairs[0][0].support)
    p = oracles.sequential_chain([d for _, d in code.pairs], rho, queries, 0)
    rep = sequential_identification(code, ch, 0, queries, trials=20000, seed=9)
    sigma = np.sqrt(p * (1 - p) / 20000)
    assert abs(rep.all_correct_rate - p) <= 3 * sigma + 1e-12


def test_code_bundle_round_trip():
    tc = build_transmission_code(bsc(0.05), 3, 8, seed=2)
    code = assemble_id_code(tc, SetFamily(8, 2, [(0, 1), (1, 2), (5, 7)], 0.25, 1.0))
    for obj in (tc, code):
        text = serialize_code_bundle(obj)
        back = parse_code_bundle(text)
        assert serialize_code_bundle(back) == text
    back = parse_code_bundle(serialize_code_bundle(code))
    assert back.check_coarse_graining()
    assert back.lambda1 == code.lambda1


@settings(max_examples=15)
@given(seeds)
def test_diagonal_pgm_matches_dense_formula(seed):
    from cqid.idcodes import pretty_good_measurement

    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(6), size=4)
    probs[:, 5] = 0.0  # an outcome no codeword reaches lands in the kernel
    probs /= probs.sum(axis=1, keepdims=True)
    states = np.stack([np.diag(p) for p in probs]).astype(complex)
    fast = pretty_good_measurement(states)
    s = states.sum(axis=0)
    w, v = np.linalg.eigh(s)
    keep = w > 1e-12
    inv = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    kernel = np.eye(6) - v[:, keep] @ v[:, keep].conj().T
    dense = np.stack([inv @ st @ inv + kernel / 4 for st in states])
    assert np.allclose(fast, dense, atol=1e-12)
    assert np.allclose(fast.sum(axis=0), np.eye(6))
