import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqid.channels import (
    CqChannel,
    IndexedChannelFamily,
    WiretapPair,
    bsc,
    classical_channel,
    constant_channel,
    noiseless_channel,
    pure_state_channel,
)
from cqid.errors import InvariantViolation, ShapeMismatch
from cqid.instances import adder_avc, compound_wiretap, noisy_avc, swapped_pair
from cqid.linalg import random_density
from cqid.measures import (
    AuxiliaryChannel,
    avc_secrecy_lower_bound,
    avc_transmission_capacity,
    compound_capacity,
    compound_secrecy_lower_bound,
    convex_hull_member,
    holevo_capacity,
    holevo_information,
    random_coding_capacity,
    secrecy_lower_bound_single_letter,
    symmetrizability_check,
)

import oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)

# frozen from tests/oracles.py (grid and Blahut-Arimoto references)
BSC_WIRETAP_GRID = 0.4122953056414116       # secrecy_grid(BSC .1, BSC .3, 60)
NOISY_AVC_GRID = 0.2552762092531805         # grid_minimax(noisy_avc, 400)
BSC_PAIR_GRID = 0.39015969528359956         # grid_minimax(BSC .05, BSC .15, 400)
TERNARY_BA = 0.3288443361135445             # blahut_arimoto on TERNARY


TERNARY = [[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]]


def random_cq(rng, a=2, d=2) -> CqChannel:
    return CqChannel(np.stack([random_density(d, rng) for _ in range(a)]))


def test_holevo_information_examples():
    assert holevo_information([0.5, 0.5], noiseless_channel(2)) == pytest.approx(1.0)
    assert holevo_information([0.3, 0.7], constant_channel(np.eye(2) / 2, 2)) == pytest.approx(0.0, abs=1e-12)
    assert holevo_information([0.5, 0.5], bsc(0.1)) == pytest.approx(1 - oracles.h2(0.1), abs=1e-12)
    with pytest.raises(ShapeMismatch):
        holevo_information([1 / 3] * 3, bsc(0.1))


@given(seeds)
def test_holevo_information_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    ch = random_cq(rng, a=3, d=3)
    p = rng.dirichlet(np.ones(3))
    assert holevo_information(p, ch) == pytest.approx(oracles.holevo(p, ch.states), abs=1e-9)


@given(seeds, st.floats(0, 1))
def test_holevo_information_concave(seed, mix):
    rng = np.random.default_rng(seed)
    ch = random_cq(rng, a=3)
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    lhs = holevo_information(mix * p + (1 - mix) * q, ch)
    rhs = mix * holevo_information(p, ch) + (1 - mix) * holevo_information(q, ch)
    assert lhs >= rhs - 1e-9


def test_holevo_capacity_examples():
    assert holevo_capacity(pure_state_channel([[1, 0], [0, 1]])).value == pytest.approx(1.0, abs=1e-6)
    assert holevo_capacity(constant_channel(np.eye(2) / 2, 3)).value == pytest.approx(0.0, abs=1e-6)
    rep = holevo_capacity(bsc(0.1), tol=1e-9)
    assert rep.value == pytest.approx(1 - oracles.h2(0.1), abs=1e-9)
    assert rep.gap_estimate <= 1e-9 and rep.upper_bound >= rep.value
    assert np.allclose(rep.optimizer, [0.5, 0.5], atol=1e-4)
    assert holevo_capacity(classical_channel(TERNARY), tol=1e-9).value == pytest.approx(TERNARY_BA, abs=1e-8)


@settings(max_examples=15)
@given(seeds)
def test_holevo_capacity_certificate(seed):
    rng = np.random.default_rng(seed)
    ch = random_cq(rng, a=3, d=2)
    rep = holevo_capacity(ch, tol=1e-7)
    assert rep.value >= 0 and rep.gap_estimate >= 0
    assert rep.gap_estimate <= 1e-7
    assert holevo_information(rep.optimizer, ch) == pytest.approx(rep.value, abs=1e-9)
    # no random input beats the certified upper bound
    for _ in range(20):
        assert holevo_information(rng.dirichlet(np.ones(3)), ch) <= rep.upper_bound + 1e-9


def test_compound_capacity_examples():
    single = compound_capacity(IndexedChannelFamily((bsc(0.1),)))
    assert single.value == pytest.approx(holevo_capacity(bsc(0.1)).value, abs=1e-6)
    with_const = IndexedChannelFamily((bsc(0.1), constant_channel(np.eye(2) / 2, 2)))
    assert compound_capacity(with_const).value == pytest.approx(0.0, abs=1e-6)
    rep = compound_capacity(IndexedChannelFamily((bsc(0.1), bsc(0.2))), tol=1e-8)
    assert rep.value == pytest.approx(1 - oracles.h2(0.2), abs=1e-7)
    assert rep.active == (1,)


@settings(max_examples=10)
@given(seeds)
def test_compound_below_member_capacities(seed):
    rng = np.random.default_rng(seed)
    fam = IndexedChannelFamily(tuple(random_cq(rng, a=2) for _ in range(3)))
    rep = compound_capacity(fam, tol=1e-6)
    caps = [holevo_capacity(m, tol=1e-7).value for m in fam.members]
    assert rep.value <= min(caps) + 1e-6
    mins = min(holevo_information(rep.optimizer, m) for m in fam.members)
    assert mins == pytest.approx(rep.value, abs=1e-6)


def test_convex_hull_member():
    rng = np.random.default_rng(0)
    fam = IndexedChannelFamily((random_cq(rng), random_cq(rng), random_cq(rng)))
    assert np.allclose(convex_hull_member(fam, [0, 1, 0]).states, fam[1].states)
    q = [0.2, 0.5, 0.3]
    oracle = sum(w * m.states for w, m in zip(q, fam.members))
    assert np.allclose(convex_hull_member(fam, q).states, oracle)
    hull = convex_hull_member(swapped_pair(), [0.5, 0.5])
    assert np.allclose(hull.states, np.eye(2) / 2)
    with pytest.raises(ShapeMismatch):
        convex_hull_member(fam, [0.5, 0.5])


def test_random_coding_capacity_examples():
    single = random_coding_capacity(IndexedChannelFamily((bsc(0.1),), "avc"))
    assert single.value == pytest.approx(1 - oracles.h2(0.1), abs=1e-6)
    assert random_coding_capacity(swapped_pair()).value == pytest.approx(0.0, abs=1e-6)
    pair = random_coding_capacity(IndexedChannelFamily((bsc(0.05), bsc(0.15)), "avc"), tol=1e-7)
    assert pair.value == pytest.approx(BSC_PAIR_GRID, abs=1e-6)
    assert pair.value == pytest.approx(1 - oracles.h2(0.15), abs=1e-6)
    noisy = random_coding_capacity(noisy_avc(), tol=1e-7)
    assert noisy.value == pytest.approx(NOISY_AVC_GRID, abs=5e-6)
    assert noisy.gap_estimate <= 1e-7


@settings(max_examples=10)
@given(seeds)
def test_random_coding_below_vertex_capacities(seed):
    rng = np.random.default_rng(seed)
    fam = IndexedChannelFamily(tuple(random_cq(rng) for _ in range(2)), "avc")
    rep = random_coding_capacity(fam, tol=1e-6)
    assert rep.value >= 0
    assert rep.value <= min(holevo_capacity(m, tol=1e-7).value for m in fam.members) + 1e-6
    # the minimising hull channel certifies the value from above
    hull = convex_hull_member(fam, rep.state_weights)
    assert holevo_information(rep.optimizer, hull) == pytest.approx(rep.value, abs=1e-5)


def test_symmetrizability_examples():
    const = IndexedChannelFamily((bsc(0.5), bsc(0.5)), "avc")
    assert symmetrizability_check(const).symmetrizable
    single = symmetrizability_check(IndexedChannelFamily((bsc(0.1),), "avc"))
    assert not single.symmetrizable
    assert single.residual == pytest.approx(0.8, abs=1e-9)
    cert = symmetrizability_check(swapped_pair())
    assert cert.symmetrizable and cert.residual <= 1e-10
    states = swapped_pair().stack
    for x in range(2):
        for x2 in range(2):
            lhs = sum(cert.tau[x, t] * states[t, x2] for t in range(2))
            rhs = sum(cert.tau[x2, t] * states[t, x] for t in range(2))
            assert np.abs(lhs - rhs).max() <= 1e-10
    assert symmetrizability_check(adder_avc()).symmetrizable
    assert not symmetrizability_check(noisy_avc()).symmetrizable


def _diag_family(w0, w1) -> IndexedChannelFamily:
    return IndexedChannelFamily((classical_channel(w0), classical_channel(w1)), "avc")


@settings(max_examples=20)
@given(seeds)
def test_symmetrizability_agrees_with_grid(seed):
    rng = np.random.default_rng(seed)
    w0 = rng.dirichlet(np.ones(2), size=2)
    w1 = rng.dirichlet(np.ones(2), size=2)
    grid = oracles.symmetrizable_on_grid(w0, w1)
    cert = symmetrizability_check(_diag_family(w0, w1))
    # the LP optimum never exceeds a grid point, and the grid is at most one step coarser
    assert cert.residual <= grid + 1e-9
    assert grid <= cert.residual + 1 / 50 + 1e-9
    if cert.symmetrizable:
        assert np.allclose(cert.tau.sum(axis=1), 1) and (cert.tau >= -1e-12).all()


def test_avc_capacity_rule():
    assert avc_transmission_capacity(swapped_pair()).value == 0.0
    assert avc_transmission_capacity(IndexedChannelFamily((noiseless_channel(2),), "avc")).value == pytest.approx(1.0, abs=1e-6)
    rep = avc_transmission_capacity(noisy_avc(), tol=1e-7)
    assert not rep.certificate.symmetrizable
    assert rep.value == pytest.approx(random_coding_capacity(noisy_avc(), tol=1e-7).value, abs=1e-6)


def test_auxiliary_channel_validates():
    aux = AuxiliaryChannel(2, [0.5, 0.5], [[1, 0], [0.5, 0.5]])
    assert np.allclose(aux.input_distribution(), [0.75, 0.25])
    with pytest.raises(InvariantViolation):
        AuxiliaryChannel(2, [0.5, 0.5], [[1, 0.1], [0.5, 0.5]])


def test_secrecy_examples():
    same = WiretapPair(bsc(0.1), bsc(0.1))
    assert secrecy_lower_bound_single_letter(same).value == 0.0
    clean = WiretapPair(noiseless_channel(2), constant_channel(np.eye(2) / 2, 2))
    assert secrecy_lower_bound_single_letter(clean).value == pytest.approx(1.0, abs=1e-6)
    proxy = secrecy_lower_bound_single_letter(WiretapPair(bsc(0.1), bsc(0.3)))
    assert proxy.value == pytest.approx(BSC_WIRETAP_GRID, abs=1e-6)
    assert proxy.value >= BSC_WIRETAP_GRID - 1e-9
    assert proxy.value <= holevo_capacity(bsc(0.1)).value + 1e-6


def test_compound_secrecy_examples():
    single = WiretapPair(IndexedChannelFamily((bsc(0.1),)), IndexedChannelFamily((bsc(0.3),)), "compound")
    assert compound_secrecy_lower_bound(single).value == pytest.approx(BSC_WIRETAP_GRID, abs=1e-6)
    copied = WiretapPair(IndexedChannelFamily((bsc(0.1), bsc(0.2))),
                         IndexedChannelFamily((bsc(0.1), bsc(0.2), bsc(0.4))), "compound")
    assert compound_secrecy_lower_bound(copied).value == pytest.approx(0.0, abs=1e-9)
    # worse legal member is BSC(0.1), so the grid oracle over both agrees with the point value
    assert compound_secrecy_lower_bound(compound_wiretap()).value == pytest.approx(BSC_WIRETAP_GRID, abs=1e-6)


def test_avc_secrecy_proxy():
    from cqid.instances import superactivation_pairs

    first, second = superactivation_pairs()
    assert avc_secrecy_lower_bound(first).value > 0.1
    assert avc_secrecy_lower_bound(second).value == pytest.approx(0.0, abs=1e-9)


@settings(max_examples=8)
@given(seeds)
def test_secrecy_proxy_properties(seed):
    rng = np.random.default_rng(seed)
    w, v = random_cq(rng), random_cq(rng)
    wp = WiretapPair(w, v)
    p1 = secrecy_lower_bound_single_letter(wp, u_size=1, n_starts=3, seed=seed % 1000)
    p2 = secrecy_lower_bound_single_letter(wp, u_size=2, n_starts=3, seed=seed % 1000)
    assert 0 <= p1.value <= p2.value + 1e-12
    assert p2.value <= holevo_capacity(w).value + 1e-6
    assert secrecy_lower_bound_single_letter(WiretapPair(w, w), n_starts=2).value == 0.0
    assert math.isfinite(p2.raw)
