import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqid.channels import (
    CqChannel,
    IndexedChannelFamily,
    SparseInputDistribution,
    WiretapPair,
    avc_output,
    bsc,
    channel_distance,
    classical_channel,
    constant_channel,
    depolarized,
    directed_family_distance,
    family_distance,
    noiseless_channel,
    output_state,
    output_under_distribution,
    parse_channel_document,
    pure_state_channel,
    serialize_channel_document,
    tensor_families,
    tensor_wiretap,
    wiretap_distance,
)
from cqid.errors import (
    BadLetter,
    DimGuardExceeded,
    InvariantViolation,
    ParseError,
    SemanticsMismatch,
    ShapeMismatch,
)
from cqid.linalg import random_density, trace_norm, von_neumann_entropy

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_channel(rng, a=2, d=2) -> CqChannel:
    return CqChannel(np.stack([random_density(d, rng) for _ in range(a)]))


def test_output_state_examples():
    out = output_state(noiseless_channel(2), [0, 1], 2)
    assert out[1, 1] == 1 and np.count_nonzero(out) == 1
    ch = bsc(0.2)
    assert np.array_equal(output_state(ch, [1]), ch.states[1])
    assert np.allclose(output_state(bsc(0.1), [0, 0]), np.diag([0.81, 0.09, 0.09, 0.01]))


def test_output_state_errors():
    with pytest.raises(BadLetter):
        output_state(bsc(0.1), [0, 2])
    with pytest.raises(DimGuardExceeded):
        output_state(bsc(0.1), [0] * 13)
    assert output_state(bsc(0.1), [0] * 13, dim_guard=2**13).shape == (8192, 8192)


def test_output_under_distribution_examples():
    ch = bsc(0.1)
    assert np.array_equal(output_under_distribution(ch, SparseInputDistribution.point_mass([0, 1])),
                          output_state(ch, [0, 1]))
    pure = pure_state_channel([[1, 0], [0, 1]])
    mix = output_under_distribution(pure, SparseInputDistribution.uniform([[0], [1]]))
    assert np.allclose(mix, np.eye(2) / 2)
    mix = output_under_distribution(ch, SparseInputDistribution.uniform([[0, 0], [1, 1]]))
    assert np.allclose(mix, np.diag([0.41, 0.09, 0.09, 0.41]))


def test_sparse_distribution_invariants():
    with pytest.raises(InvariantViolation):
        SparseInputDistribution(2, (((0, 1), 0.5), ((1, 1), 0.4)))
    with pytest.raises(InvariantViolation):
        SparseInputDistribution(2, (((0,), 1.0),))
    merged = SparseInputDistribution(1, (((0,), 0.25), ((0,), 0.25), ((1,), 0.5)))
    assert merged.strings() == [(0,), (1,)]
    assert np.allclose(merged.weights(), [0.5, 0.5])


def test_avc_output_examples():
    rng = np.random.default_rng(1)
    w1, w2 = random_channel(rng), random_channel(rng)
    fam = IndexedChannelFamily((w1, w2), "avc")
    assert np.allclose(avc_output(fam, [1], [0]), w2.states[0])
    assert np.allclose(avc_output(fam, [0, 1], [0, 1]), np.kron(w1.states[0], w2.states[1]))
    single = IndexedChannelFamily((w1,), "avc")
    assert np.array_equal(avc_output(single, [0, 0], [1, 0]), output_state(w1, [1, 0]))


@given(seeds, st.integers(1, 4))
def test_avc_constant_sequence_is_member_output(seed, n):
    rng = np.random.default_rng(seed)
    fam = IndexedChannelFamily((random_channel(rng), random_channel(rng)), "avc")
    x = rng.integers(0, 2, size=n)
    for t in range(2):
        assert np.array_equal(avc_output(fam, [t] * n, x), output_state(fam[t], x))


@given(seeds, st.integers(1, 4))
def test_entropy_additive_over_tensor_products(seed, n):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, a=3)
    x = rng.integers(0, 3, size=n)
    total = sum(von_neumann_entropy(ch.states[c]) for c in x)
    assert von_neumann_entropy(output_state(ch, x)) == pytest.approx(total, abs=1e-9)


def test_channel_distance_examples():
    ch = bsc(0.1)
    assert channel_distance(ch, ch) == 0.0
    a = pure_state_channel([[1, 0], [0, 1]])
    b = pure_state_channel([[0, 1], [0, 1]])
    assert channel_distance(a, b) == pytest.approx(2.0)
    rng = np.random.default_rng(4)
    w = random_channel(rng, a=3)
    dw = depolarized(w, 0.3)
    oracle = max(np.abs(np.linalg.eigvalsh(s - t)).sum() for s, t in zip(w.states, dw.states))
    assert channel_distance(w, dw) == pytest.approx(oracle)
    with pytest.raises(ShapeMismatch):
        channel_distance(bsc(0.1), noiseless_channel(3))


def test_family_distance_examples():
    w1, w2 = bsc(0.1), bsc(0.3)
    f1 = IndexedChannelFamily((w1,))
    f12 = IndexedChannelFamily((w1, w2))
    assert family_distance(f12, f12) == 0.0
    assert directed_family_distance(f12, f1) == pytest.approx(channel_distance(w2, w1))
    assert directed_family_distance(f1, f12) == 0.0
    assert family_distance(f1, f12) == family_distance(f12, f1) == pytest.approx(channel_distance(w1, w2))


@given(seeds)
def test_family_distance_pseudometric(seed):
    rng = np.random.default_rng(seed)
    fams = [IndexedChannelFamily(tuple(random_channel(rng) for _ in range(rng.integers(1, 4))))
            for _ in range(3)]
    a, b, c = fams
    assert family_distance(a, b) == family_distance(b, a)
    assert family_distance(a, c) <= family_distance(a, b) + family_distance(b, c) + 1e-12
    dup = IndexedChannelFamily(a.members + a.members[:1])
    assert family_distance(a, dup) == 0.0


@given(seeds)
def test_left_factor_perturbation_bound(seed):
    rng = np.random.default_rng(seed)
    w, w2, v = random_channel(rng), random_channel(rng), random_channel(rng)
    lhs = family_distance(tensor_families(w, v), tensor_families(w2, v))
    assert lhs <= channel_distance(w, w2) + 1e-9


def test_wiretap_distance_and_flavours():
    p1 = WiretapPair(bsc(0.1), bsc(0.3))
    p2 = WiretapPair(bsc(0.1), bsc(0.2))
    assert wiretap_distance(p1, p2) == pytest.approx(channel_distance(bsc(0.3), bsc(0.2)))
    lifted = WiretapPair(bsc(0.1), bsc(0.3), "compound")
    assert isinstance(lifted.legal, IndexedChannelFamily) and lifted.legal.semantics == "compound"
    with pytest.raises(InvariantViolation):
        WiretapPair(bsc(0.1), noiseless_channel(3))


def test_tensor_families():
    rng = np.random.default_rng(2)
    f1 = IndexedChannelFamily(tuple(random_channel(rng) for _ in range(2)))
    f2 = IndexedChannelFamily(tuple(random_channel(rng, a=3) for _ in range(3)))
    prod = tensor_families(f1, f2)
    assert prod.index_count == 6 and prod.alphabet_size == 6
    for t1 in range(2):
        for t2 in range(3):
            member = prod[t1 * 3 + t2]
            for x1 in range(2):
                for x2 in range(3):
                    assert np.allclose(member.states[x1 * 3 + x2],
                                       np.kron(f1[t1].states[x1], f2[t2].states[x2]))
    single = tensor_families(bsc(0.1), bsc(0.2))
    assert single.index_count == 1
    with pytest.raises(SemanticsMismatch):
        tensor_families(f1, f2.with_semantics("avc"))
    wp = tensor_wiretap(WiretapPair(bsc(0.1), bsc(0.2)), WiretapPair(bsc(0.1), bsc(0.2)))
    assert wp.legal.alphabet_size == 4


def test_document_round_trip():
    rng = np.random.default_rng(3)
    objs = [
        random_channel(rng, a=3, d=3),
        IndexedChannelFamily((random_channel(rng), random_channel(rng)), "avc"),
        WiretapPair(random_channel(rng), random_channel(rng, d=3)),
        WiretapPair(IndexedChannelFamily((random_channel(rng),) * 2),
                    IndexedChannelFamily((random_channel(rng),)), "compound"),
    ]
    for obj in objs:
        back = parse_channel_document(serialize_channel_document(obj))
        assert type(back) is type(obj)
        assert serialize_channel_document(back) == serialize_channel_document(obj)


def test_document_errors():
    doc = serialize_channel_document(bsc(0.1)).replace("0.9", "0.8", 1)
    with pytest.raises(InvariantViolation) as err:
        parse_channel_document(doc)
    assert err.value.check == "trace"
    with pytest.raises(ParseError) as err:
        parse_channel_document('{"kind": "cq",\n "alphabet_size": 2,,}')
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        parse_channel_document('{"kind": "cq", "alphabet_size": 2, "out_dim": 2, "states": [[]]}')
    assert err.value.field == "states"
    with pytest.raises(ParseError) as err:
        parse_channel_document('{"kind": "qq", "alphabet_size": 2, "out_dim": 2, "states": []}')
    assert err.value.field == "kind"


def test_corpus_bsc_file_loads():
    from pathlib import Path

    from cqid.channels import load_channel

    ch = load_channel(Path(__file__).resolve().parents[1] / "corpus" / "bsc01.chan")
    assert isinstance(ch, CqChannel) and ch.alphabet_size == 2 and ch.out_dim == 2
    assert ch.same_as(bsc(0.1))


def test_constructors():
    assert constant_channel(np.eye(2) / 2, 3).alphabet_size == 3
    assert classical_channel([[1, 0, 0], [0, 0.5, 0.5]]).out_dim == 3
    assert noiseless_channel(3).is_classical()
    assert not pure_state_channel([[1, 1], [1, -1]]).is_classical()
