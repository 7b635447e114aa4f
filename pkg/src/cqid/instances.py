"""Small named channels used by the corpus, the scripts and the tests."""

from __future__ import annotations

import numpy as np

from .channels import (
    CqChannel,
    IndexedChannelFamily,
    WiretapPair,
    bsc,
    classical_channel,
    constant_channel,
    noiseless_channel,
    pure_state_channel,
)


def swapped_pair() -> IndexedChannelFamily:
    """W_0: 0 -> |0>, 1 -> |1>; W_1 swaps the two outputs."""
    w0 = pure_state_channel([[1, 0], [0, 1]])
    w1 = pure_state_channel([[0, 1], [1, 0]])
    return IndexedChannelFamily((w0, w1), "avc")


def adder_avc() -> IndexedChannelFamily:
    """y = x + t on {0, 1, 2}: symmetrizable, yet every hull member is informative."""
    w0 = classical_channel([[1, 0, 0], [0, 1, 0]])
    w1 = classical_channel([[0, 1, 0], [0, 0, 1]])
    return IndexedChannelFamily((w0, w1), "avc")


def noisy_avc() -> IndexedChannelFamily:
    """A non-symmetrizable pair of binary classical channels."""
    w0 = classical_channel([[0.9, 0.1], [0.3, 0.7]])
    w1 = classical_channel([[0.6, 0.4], [0.05, 0.95]])
    return IndexedChannelFamily((w0, w1), "avc")


def mixed_bit(a: int = 2) -> CqChannel:
    return constant_channel(np.eye(2) / 2, a)


def noiseless_w_constant_v() -> WiretapPair:
    return WiretapPair(noiseless_channel(2), mixed_bit())


def v_equals_w() -> WiretapPair:
    return WiretapPair(noiseless_channel(2), noiseless_channel(2))


def bsc_wiretap(p: float = 0.1, q: float = 0.3) -> WiretapPair:
    return WiretapPair(bsc(p), bsc(q))


def compound_wiretap() -> WiretapPair:
    return WiretapPair(IndexedChannelFamily((bsc(0.05), bsc(0.1))),
                       IndexedChannelFamily((bsc(0.3),)), "compound")


def superactivation_pairs() -> tuple[WiretapPair, WiretapPair]:
    """First: symmetrizable legal family with a useless eavesdropper. Second:
    non-symmetrizable legal channel that Eve receives exactly."""
    first = WiretapPair(adder_avc(), IndexedChannelFamily((mixed_bit(),), "avc"), "avc")
    bit = noiseless_channel(2)
    second = WiretapPair(IndexedChannelFamily((bit,), "avc"), IndexedChannelFamily((bit,), "avc"), "avc")
    return first, second


def corpus() -> dict:
    """File name -> channel object for the on-disk corpus."""
    first, second = superactivation_pairs()
    return {
        "bsc01.chan": bsc(0.1),
        "noiseless-bit.chan": noiseless_channel(2),
        "constant.chan": mixed_bit(),
        "bsc-pair.chan": IndexedChannelFamily((bsc(0.1), bsc(0.2))),
        "swapped-pair.chan": swapped_pair(),
        "adder-avc.chan": adder_avc(),
        "noisy-avc.chan": noisy_avc(),
        "noiseless-w-constant-v.chan": noiseless_w_constant_v(),
        "v-equals-w.chan": v_equals_w(),
        "bsc-wiretap.chan": bsc_wiretap(),
        "compound-wiretap.chan": compound_wiretap(),
        "avwc-symmetrizable.chan": first,
        "avwc-copied.chan": second,
    }
