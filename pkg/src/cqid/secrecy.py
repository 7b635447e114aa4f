"""Wiretap-side analysis.

Eavesdropper distinguishability and the two entropy bounds that link ID
error probabilities to Holevo quantities, the dichotomy evaluators, the
two-layer wiretap ID construction with its colouring statistics, and the
continuity / super-activation condition probes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .channels import (
    DIM_GUARD,
    CqChannel,
    IndexedChannelFamily,
    SparseInputDistribution,
    WiretapPair,
    as_family,
    channel_to_dict,
    tensor_wiretap,
    wiretap_distance,
)
from .errors import (
    ComponentCodeFailure,
    DomainError,
    NotCommuting,
    PreconditionViolated,
    SolverError,
)
from .idcodes import (
    ENUMERATION_GUARD,
    IdCode,
    TransmissionCode,
    _guard,
    _string_state,
    build_transmission_code,
    code_from_dict,
    code_to_dict,
    evaluate_id_errors,
)
from .linalg import binary_entropy, trace_norm
from .measures import (
    SecrecyProxy,
    avc_secrecy_lower_bound,
    avc_transmission_capacity,
    compound_capacity,
    compound_secrecy_lower_bound,
    holevo_capacity,
    holevo_information_states,
    secrecy_lower_bound_single_letter,
    symmetrizability_check,
)

POSITIVE = "POSITIVE"
ZERO_PROXY = "ZERO_PROXY"
ZERO_CERTIFIED = "ZERO_CERTIFIED"
CERTIFIED_POSITIVE = "CERTIFIED_POSITIVE"
INCONCLUSIVE = "INCONCLUSIVE"
EXACT_PAIR_LIMIT = 128


# ---------------------------------------------------------------------------
# distinguishability and entropy bounds


@dataclass
class Distinguishability:
    mu: float
    helstrom_error: float
    witness: tuple  # (i, j, s or s^n)
    pairs_checked: int
    pairs_total: int

    @property
    def exact(self) -> bool:
        return self.pairs_checked == self.pairs_total


def _dist_state(letter_states: np.ndarray, dist: SparseInputDistribution) -> np.ndarray:
    return sum(w * _string_state(letter_states, x, False) for x, w in dist.support)


def _avc_dist_state(fam: IndexedChannelFamily, s_seq, dist) -> np.ndarray:
    out = None
    for x, w in dist.support:
        term = None
        for s, c in zip(s_seq, x):
            m = fam.members[s].states[c]
            term = m if term is None else np.kron(term, m)
        out = w * term if out is None else out + w * term
    return out


def eavesdropper_distinguishability(code: Sequence[SparseInputDistribution], eve, mode: str = "point",
                                    seed: int = 0, dim_guard: int = DIM_GUARD,
                                    enumeration_guard: int = ENUMERATION_GUARD) -> Distinguishability:
    """mu = max over message pairs (and Eve's channel index or state sequence)
    of half the trace norm of V(Q_i) - V(Q_j); Helstrom error is (1 - mu)/2.

    All pairs are checked up to 128 messages, beyond that a random subset of
    pairs of the same size.
    """
    code = list(code)
    fam = as_family(eve, "avc" if mode == "avc" else "compound")
    n = code[0].block_length
    _guard(fam.out_dim, n, dim_guard)
    N = len(code)
    all_pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
    pairs = all_pairs
    if N > EXACT_PAIR_LIMIT:
        rng = np.random.default_rng(seed)
        budget = EXACT_PAIR_LIMIT * (EXACT_PAIR_LIMIT - 1) // 2
        pick = rng.choice(len(all_pairs), size=budget, replace=False)
        pairs = [all_pairs[k] for k in sorted(pick)]
    if mode == "avc" and fam.index_count > 1:
        T = fam.index_count
        if T**n > enumeration_guard:
            raise PreconditionViolated(f"|Sigma|^n = {T**n} exceeds enumeration guard")
        indices = [tuple(int(c) for c in np.unravel_index(k, (T,) * n)) for k in range(T**n)]
        states = {s: [_avc_dist_state(fam, s, q) for q in code] for s in indices}
    else:
        indices = list(range(fam.index_count))
        states = {s: [_dist_state(fam.members[s].states, q) for q in code] for s in indices}
    mu, witness = 0.0, ()
    for i, j in pairs:
        for s in indices:
            v = min(1.0, 0.5 * trace_norm(states[s][i] - states[s][j]))
            if not witness or v > mu:
                mu, witness = v, (i, j, s)
    return Distinguishability(mu, 0.5 * (1 - mu), witness, len(pairs), len(all_pairs))


def lemma3_bound(mu: float) -> float:
    """Upper bound h(mu/2) on I(Q; V~) for uniform Q on two messages at distance mu."""
    mu = float(mu)
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"mu = {mu!r} outside [0, 1]")
    return binary_entropy(mu / 2)


def lemma4_bound(lambda1: float, lambda2: float) -> float:
    """Lower bound h((1 + l1 - l2)/2) - h(l1)/2 - h(l2)/2 on I(Q; W~), clamped at 0."""
    l1, l2 = float(lambda1), float(lambda2)
    for name, v in (("lambda1", l1), ("lambda2", l2)):
        if not 0.0 <= v <= 0.5:
            raise DomainError(f"{name} = {v!r} outside [0, 1/2]")
    val = binary_entropy(0.5 * (1 + l1 - l2)) - 0.5 * binary_entropy(l1) - 0.5 * binary_entropy(l2)
    return max(0.0, val)


def two_message_channel(p_i: SparseInputDistribution, p_j: SparseInputDistribution, ch,
                        n: int | None = None, dim_guard: int = DIM_GUARD) -> CqChannel:
    """Binary-input channel 0 -> W^n(P_i), 1 -> W^n(P_j)."""
    n = p_i.block_length if n is None else n
    if p_i.block_length != n or p_j.block_length != n:
        raise PreconditionViolated("distributions and block length disagree")
    _guard(ch.out_dim, n, dim_guard)
    return CqChannel(np.stack([_dist_state(ch.states, p_i), _dist_state(ch.states, p_j)]))


@dataclass
class GapTest:
    verdict: str
    lam: float
    threshold: float  # 1 - 2 h(lam)
    info_legal: float
    info_eve: float

    @property
    def gap(self) -> float:
        return self.info_legal - self.info_eve


def dichotomy_gap_test(lambda1: float, lambda2: float, mu: float, w_tilde: CqChannel,
                       v_tilde: CqChannel, tol: float = 1e-6) -> GapTest:
    """CERTIFIED_POSITIVE when lam = max(l1, l2, mu) <= 1/15 and the numeric
    Holevo gap I(Q;W~) - I(Q;V~) is at least 1 - 2h(lam) - tol."""
    lam = max(float(lambda1), float(lambda2), float(mu))
    q = np.array([0.5, 0.5])
    info_w = holevo_information_states(q, w_tilde.states)
    info_v = holevo_information_states(q, v_tilde.states)
    if lam > 0.5:
        return GapTest(INCONCLUSIVE, lam, float("nan"), info_w, info_v)
    threshold = 1.0 - 2.0 * binary_entropy(lam)
    ok = lam <= 1 / 15 and info_w - info_v >= threshold - tol
    return GapTest(CERTIFIED_POSITIVE if ok else INCONCLUSIVE, lam, threshold, info_w, info_v)


@dataclass
class CommutingDecomposition:
    mu: float
    bound: float
    information: float
    lemma3: float
    shared_state: np.ndarray | None  # normalized min(v_i, v_j); absent when mu = 1
    residual_i: np.ndarray | None  # absent when mu = 0
    residual_j: np.ndarray | None
    reconstruction_error: float


def _common_basis(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    for c in (math.sqrt(2) - 1, math.pi / 7, math.e / 5):
        _, u = np.linalg.eigh(a + c * b)
        da = u.conj().T @ a @ u
        db = u.conj().T @ b @ u
        off = max(np.abs(da - np.diag(np.diag(da))).max(), np.abs(db - np.diag(np.diag(db))).max())
        if off <= 10 * tol:
            return u
    raise NotCommuting("no common eigenbasis found")


def commuting_case_bound(v_i, v_j, tol: float = 1e-9) -> CommutingDecomposition:
    """For commuting states: v_x = mu V_x^0 + (1 - mu) V_shared with V_shared the
    normalized pointwise minimum in the common eigenbasis; then I(Q;V~) <= mu."""
    a = np.asarray(v_i, dtype=complex)
    b = np.asarray(v_j, dtype=complex)
    comm = np.abs(a @ b - b @ a).max()
    if comm > tol:
        raise NotCommuting(f"max |[v_i, v_j]| = {comm:.3e}")
    u = _common_basis(a, b, tol)
    ea = np.clip(np.diag(u.conj().T @ a @ u).real, 0.0, None)
    eb = np.clip(np.diag(u.conj().T @ b @ u).real, 0.0, None)
    low = np.minimum(ea, eb)
    mu = float(min(1.0, 0.5 * np.abs(ea - eb).sum()))
    shared = res_i = res_j = None
    recon_i = np.zeros_like(a)
    recon_j = np.zeros_like(b)
    low_op = (u * low) @ u.conj().T
    if mu < 1.0:
        shared = low_op / (1.0 - mu)
        recon_i = recon_i + (1 - mu) * shared
        recon_j = recon_j + (1 - mu) * shared
    if mu > 0.0:
        res_i = (u * (ea - low)) @ u.conj().T / mu
        res_j = (u * (eb - low)) @ u.conj().T / mu
        recon_i = recon_i + mu * res_i
        recon_j = recon_j + mu * res_j
    err = float(max(np.abs(recon_i - a).max(), np.abs(recon_j - b).max()))
    info = holevo_information_states([0.5, 0.5], np.stack([a, b]))
    return CommutingDecomposition(mu, mu, info, lemma3_bound(mu), shared, res_i, res_j, err)


# ---------------------------------------------------------------------------
# dichotomy evaluators


@dataclass
class DichotomyReport:
    flavour: str
    transmission_capacity: float
    secrecy_positive: str
    sid_capacity: float
    rationale: list
    proxy: SecrecyProxy | None = None
    capacity_gap: float = 0.0
    symmetrizable: bool | None = None

    def __post_init__(self):
        expected = self.transmission_capacity if self.secrecy_positive == POSITIVE else 0.0
        if self.sid_capacity != expected:
            raise AssertionError("sid_capacity must be C when secrecy is positive and 0 otherwise")


def _members(ch) -> tuple:
    return ch.members if isinstance(ch, IndexedChannelFamily) else (ch,)


def _legal_copied_by_eve(wp: WiretapPair) -> bool:
    """Some legal member has an exact copy among Eve's channels (then Eve can
    always learn what that receiver learns, so the secrecy capacity is 0)."""
    return any(w.same_as(v) for w in _members(wp.legal) for v in _members(wp.eve))


def _constant_legal(wp: WiretapPair) -> bool:
    return any(bool(np.all(w.states == w.states[0])) for w in _members(wp.legal))


def _positivity(wp: WiretapPair, proxy_fn, tol: float, gap_certificate, rationale: list,
                u_size, seed: int) -> tuple[str, SecrecyProxy | None]:
    if _legal_copied_by_eve(wp):
        rationale.append("secrecy zero certified: a legal channel is reproduced exactly in Eve's set")
        return ZERO_CERTIFIED, None
    if _constant_legal(wp):
        rationale.append("secrecy zero certified: a legal channel has constant output")
        return ZERO_CERTIFIED, None
    proxy = proxy_fn(wp, u_size=u_size, tol=tol, seed=seed)
    if proxy.value > tol:
        rationale.append(f"single-letter secrecy proxy {proxy.value:.6g} > tol: secrecy capacity positive")
        return POSITIVE, proxy
    if gap_certificate is not None and getattr(gap_certificate, "verdict", gap_certificate) == CERTIFIED_POSITIVE:
        rationale.append("proxy not positive, but the ID-code gap test certifies positive secrecy")
        return POSITIVE, proxy
    rationale.append(f"single-letter proxy {proxy.value:.3g} <= tol: not certified zero")
    return ZERO_PROXY, proxy


def dichotomy_point(wp: WiretapPair, tol: float = 1e-6, u_size: int | None = None, seed: int = 0,
                    gap_certificate=None) -> DichotomyReport:
    """C_SID = C(W) if the secrecy capacity is positive, 0 otherwise."""
    cap = holevo_capacity(wp.legal, tol)
    rationale = [f"C(W) = {cap.value:.9g} (Holevo capacity)"]
    status, proxy = _positivity(wp, secrecy_lower_bound_single_letter, tol, gap_certificate,
                                rationale, u_size, seed)
    sid = cap.value if status == POSITIVE else 0.0
    return DichotomyReport("point", cap.value, status, sid, rationale, proxy, cap.gap_estimate)


def dichotomy_compound(wp: WiretapPair, tol: float = 1e-6, u_size: int | None = None, seed: int = 0,
                       gap_certificate=None) -> DichotomyReport:
    fam = as_family(wp.legal)
    cap = compound_capacity(fam, tol)
    rationale = [f"C(compound W) = {cap.value:.9g} (max-min Holevo)"]
    if wp.flavour == "point":
        wp = WiretapPair(fam, as_family(wp.eve), "compound")
    status, proxy = _positivity(wp, compound_secrecy_lower_bound, tol, gap_certificate,
                                rationale, u_size, seed)
    sid = cap.value if status == POSITIVE else 0.0
    return DichotomyReport("compound", cap.value, status, sid, rationale, proxy, cap.gap_estimate)


def dichotomy_avwc(wp: WiretapPair, tol: float = 1e-6, tol_symm: float = 1e-7,
                   u_size: int | None = None, seed: int = 0, gap_certificate=None) -> DichotomyReport:
    """Symmetrizable legal family: 0. Otherwise C_ran if the random-coding
    secrecy capacity is positive, 0 if it vanishes."""
    fam = as_family(wp.legal, "avc")
    cap = avc_transmission_capacity(fam, tol, tol_symm)
    sym = bool(cap.certificate.symmetrizable)
    if sym:
        rationale = [f"legal family symmetrizable (residual {cap.certificate.residual:.3g}): "
                     "transmission and secure ID capacities are 0"]
        return DichotomyReport("avc", 0.0, ZERO_CERTIFIED, 0.0, rationale, None, 0.0, True)
    rationale = [f"legal family not symmetrizable (residual {cap.certificate.residual:.3g}); "
                 f"C_ran = {cap.value:.9g}"]
    if wp.flavour != "avc":
        wp = WiretapPair(fam, as_family(wp.eve, "avc"), "avc")
    status, proxy = _positivity(wp, avc_secrecy_lower_bound, tol, gap_certificate,
                                rationale, u_size, seed)
    sid = cap.value if status == POSITIVE else 0.0
    return DichotomyReport("avc", cap.value, status, sid, rationale, proxy, cap.gap_estimate, False)


def dichotomy(wp: WiretapPair, **kw) -> DichotomyReport:
    if wp.flavour == "point":
        return dichotomy_point(wp, **kw)
    if wp.flavour == "compound":
        return dichotomy_compound(wp, **kw)
    return dichotomy_avwc(wp, **kw)


# ---------------------------------------------------------------------------
# two-layer wiretap ID codes


@dataclass
class WiretapIdCode:
    outer: TransmissionCode
    inner: TransmissionCode
    colorings: np.ndarray  # (N, M')
    code: IdCode
    lambda1: float | None = None
    lambda2: float | None = None
    mu: float | None = None
    mu_inner: float | None = None
    lambda_outer: float | None = None
    lambda_inner: float | None = None

    @property
    def size(self) -> int:
        return self.colorings.shape[0]

    @property
    def outer_size(self) -> int:
        return self.outer.size

    @property
    def inner_size(self) -> int:
        return self.inner.size

    @property
    def block_length(self) -> int:
        return self.outer.block_length + self.inner.block_length


def inner_block_length(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 0 else 0


def assemble_wiretap_code(outer: TransmissionCode, inner: TransmissionCode,
                          colorings: np.ndarray) -> IdCode:
    """Q_i uniform over u'_j u''_{T_i(j)}; D_i = sum_j D'_j (x) D''_{T_i(j)}."""
    colorings = np.asarray(colorings, dtype=np.int64)
    m_in = inner.size
    u_out = outer.codeword_strings()
    u_in = inner.codeword_strings()
    base = np.stack([np.kron(e1, e2) for e1 in outer.decoder for e2 in inner.decoder])
    pairs, subsets = [], []
    for row in colorings:
        strings = [u_out[j] + u_in[int(c)] for j, c in enumerate(row)]
        idx = [j * m_in + int(c) for j, c in enumerate(row)]
        pairs.append((SparseInputDistribution.uniform(strings), base[idx].sum(axis=0)))
        subsets.append(tuple(idx))
    n = outer.block_length + inner.block_length
    return IdCode(n, pairs, True, base, subsets)


def build_wiretap_id_code(wp: WiretapPair, n: int, m_outer: int, m_inner: int, n_messages: int,
                          seed: int = 0, attempts: int = 8, inner_n: int | None = None,
                          outer_codewords=None, inner_codewords=None,
                          dim_guard: int = DIM_GUARD) -> WiretapIdCode:
    """Concatenate an outer transmission code of length n with an inner code of
    length ceil(sqrt(n)) through N random colourings T_i : [M'] -> [M'']."""
    if wp.flavour not in ("point", "compound"):
        raise PreconditionViolated("two-layer construction needs a point or compound wiretap pair")
    n2 = inner_block_length(n)
    if inner_n is not None and inner_n != n2:
        raise PreconditionViolated(f"inner block length must be ceil(sqrt({n})) = {n2}, got {inner_n}")
    legal = as_family(wp.legal)
    eve = as_family(wp.eve)
    _guard(max(legal.out_dim, eve.out_dim), n + n2, dim_guard)
    try:
        outer = build_transmission_code(legal, n, m_outer, seed=seed, attempts=attempts,
                                        codewords=outer_codewords, dim_guard=dim_guard)
        inner = build_transmission_code(legal, n2, m_inner, seed=seed + 1, attempts=attempts,
                                        codewords=inner_codewords, dim_guard=dim_guard)
    except SolverError as exc:
        raise ComponentCodeFailure(f"component code construction failed: {exc}") from exc
    mu_inner = eavesdropper_distinguishability(inner.codewords, eve, "compound").mu
    rng = np.random.default_rng(seed)
    colorings = rng.integers(0, m_inner, size=(n_messages, m_outer))
    code = assemble_wiretap_code(outer, inner, colorings)
    errs = evaluate_id_errors(code, legal, "compound", dim_guard=dim_guard)
    code.lambda1, code.lambda2 = errs.lambda1, errs.lambda2
    mu = eavesdropper_distinguishability(code.distributions(), eve, "compound", seed=seed).mu
    return WiretapIdCode(outer, inner, colorings, code, errs.lambda1, errs.lambda2, mu, mu_inner,
                         outer.max_error, inner.max_error)


@dataclass
class CollisionStats:
    psi: np.ndarray  # indicator per outer message j
    count: int
    mean: float
    expected: float
    sigma: float  # standard deviation of the mean
    lam: float
    binomial_tail: float  # Pr{Bin(M', 1/M'') > M' lam}
    existence_lhs: float  # (N - 1) * tail
    existence_holds: bool
    hoeffding_bound: float


def _tail_and_hoeffding(m_out: int, m_in: int, lam: float) -> tuple[float, float]:
    p = 1.0 / m_in
    tail = float(binom.sf(math.floor(m_out * lam + 1e-12), m_out, p))
    hoeff = math.exp(-2 * m_out * (lam - p) ** 2) if lam > p else 1.0
    return tail, hoeff


def collision_statistics(code: WiretapIdCode, pair: tuple[int, int], lam: float = 0.5) -> CollisionStats:
    """Psi_j = [T_i(j) = T_i'(j)] for one pair of colourings, with the exact
    binomial tail check (N - 1) Pr{sum Psi_j > M' lam} < 1."""
    i, k = pair
    psi = (code.colorings[i] == code.colorings[k]).astype(np.int64)
    m_out, m_in = code.outer_size, code.inner_size
    p = 1.0 / m_in
    tail, hoeff = _tail_and_hoeffding(m_out, m_in, lam)
    lhs = (code.size - 1) * tail
    return CollisionStats(psi, int(psi.sum()), float(psi.mean()), p,
                          math.sqrt(p * (1 - p) / m_out), lam, tail, lhs, lhs < 1, hoeff)


@dataclass
class PooledCollisions:
    pairs: int
    total: int
    mean: float
    expected: float
    sigma: float
    deviation_sigmas: float


def pooled_collision_statistics(colorings: np.ndarray, m_inner: int) -> PooledCollisions:
    """Collision frequency over all unordered colouring pairs. The indicators
    are pairwise independent under uniform colourings, so the variance of the
    pooled mean is exactly p(1 - p) / (pairs * M')."""
    colorings = np.asarray(colorings)
    N, m_out = colorings.shape
    total = 0
    for c in range(m_inner):
        hits = (colorings == c).sum(axis=0)
        total += int((hits * (hits - 1) // 2).sum())
    pairs = N * (N - 1) // 2
    p = 1.0 / m_inner
    if pairs == 0:
        return PooledCollisions(0, 0, float("nan"), p, float("nan"), 0.0)
    mean = total / (pairs * m_out)
    sigma = math.sqrt(p * (1 - p) / (pairs * m_out))
    return PooledCollisions(pairs, total, mean, p, sigma, abs(mean - p) / sigma)


@dataclass
class ImpliedRate:
    epsilon: float  # C - log2(M') / n
    log_log_predicted: float  # log2 M' + log2(lam sqrt(n) eps - 1), nan when the argument is <= 0
    log_log_constructed: float  # log2 log2 N for the constructed N (nan for N <= 1)
    rate_predicted: float
    rate_constructed: float
    note: str = ""


def implied_rate_report(n: int, m_outer: int, capacity: float, lam: float, n_messages: int) -> ImpliedRate:
    eps = capacity - math.log2(m_outer) / n
    arg = lam * math.sqrt(n) * eps - 1
    note = ""
    if arg > 0:
        pred = math.log2(m_outer) + math.log2(arg)
    else:
        pred = float("nan")
        note = "lam sqrt(n) eps <= 1: the asymptotic chain is vacuous at this block length"
    built = math.log2(math.log2(n_messages)) if n_messages > 2 else float("nan")
    return ImpliedRate(eps, pred, built, pred / n, built / n, note)


# ---------------------------------------------------------------------------
# continuity and super-activation


@dataclass
class DiscontinuityReport:
    capacity: float
    capacity_positive: bool
    proxy: float
    proxy_zero: bool
    condition3: str  # FOUND or NOT_FOUND_WITHIN_BUDGET
    witness: WiretapPair | None = None
    witness_distance: float | None = None
    witness_proxy: float | None = None
    tries: int = 0

    @property
    def is_candidate(self) -> bool:
        return self.capacity_positive and self.proxy_zero and self.condition3 == "FOUND"


def _project_state(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    out = (v * w) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def _perturb(ch: CqChannel, delta: float, sigma: np.ndarray, jitter: float,
             rng: np.random.Generator) -> CqChannel:
    d = ch.out_dim
    out = []
    for s in ch.states:
        h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = 0.5 * (h + h.conj().T)
        h -= np.trace(h) / d * np.eye(d)
        h *= jitter / max(np.abs(np.linalg.eigvalsh(h)).sum(), 1e-300)
        out.append(_project_state((1 - delta) * s + delta * sigma + h))
    return CqChannel(np.stack(out))


def _probe(wp: WiretapPair, epsilon: float, search_budget: int, seed: int, tol: float,
           capacity: float, proxy_fn, u_size) -> DiscontinuityReport:
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    base = proxy_fn(wp, u_size=u_size, tol=tol, seed=seed).value
    report = DiscontinuityReport(capacity, capacity > tol, base, base <= tol, "NOT_FOUND_WITHIN_BUDGET")
    rng = np.random.default_rng(seed)
    eves = _members(wp.eve)
    d = eves[0].out_dim
    from .linalg import random_density

    for k in range(search_budget):
        # a distance budget strictly below epsilon, shrinking over the search
        frac = 0.9 * (0.5 + 0.5 * rng.random()) * (0.85**(k // 4))
        delta = frac * epsilon / 2.2
        jitter = 0.1 * frac * epsilon / 2.2
        sigma = np.eye(d) / d if k % 2 == 0 else random_density(d, rng)
        new_eves = tuple(_perturb(v, delta, sigma, jitter, rng) for v in eves)
        if wp.flavour == "point":
            cand = WiretapPair(wp.legal, new_eves[0])
        else:
            cand = WiretapPair(wp.legal, IndexedChannelFamily(new_eves, wp.flavour), wp.flavour)
        dist = wiretap_distance(wp, cand)
        report.tries = k + 1
        if dist >= epsilon:
            continue
        val = proxy_fn(cand, u_size=u_size, tol=tol, seed=seed + 1 + k).value
        if val > tol:
            report.condition3 = "FOUND"
            report.witness, report.witness_distance, report.witness_proxy = cand, dist, val
            break
    return report


def discontinuity_probe_point(wp: WiretapPair, epsilon: float, search_budget: int = 20, seed: int = 0,
                              tol: float = 1e-6, u_size: int | None = None) -> DiscontinuityReport:
    """Check C(W) > 0, proxy zero at (W, V), and search for a nearby pair with a positive proxy."""
    cap = holevo_capacity(wp.legal, tol).value
    return _probe(wp, epsilon, search_budget, seed, tol, cap, secrecy_lower_bound_single_letter, u_size)


def discontinuity_probe_compound(wp: WiretapPair, epsilon: float, search_budget: int = 20, seed: int = 0,
                                 tol: float = 1e-6, u_size: int | None = None) -> DiscontinuityReport:
    if wp.flavour == "point":
        wp = WiretapPair(as_family(wp.legal), as_family(wp.eve), "compound")
    cap = compound_capacity(wp.legal, tol).value
    return _probe(wp, epsilon, search_budget, seed, tol, cap, compound_secrecy_lower_bound, u_size)


@dataclass
class ComponentStatus:
    symmetrizable: bool
    residual: float
    secrecy: str  # POSITIVE / ZERO_PROXY / ZERO_CERTIFIED
    proxy: float | None
    sid: str  # POSITIVE / ZERO / UNKNOWN
    c_ran: float | None = None


@dataclass
class SuperactivationReport:
    verdict: str  # SUPERACTIVATION_CERTIFIED / NO_SUPERACTIVATION / UNKNOWN
    first: ComponentStatus
    second: ComponentStatus
    tensor: ComponentStatus
    reasons: list
    superadditivity: bool = False


def _component(wp: WiretapPair, tol: float, tol_symm: float, seed: int, u_size,
               compute_proxy: bool = True) -> ComponentStatus:
    fam = as_family(wp.legal, "avc")
    cert = symmetrizability_check(fam, tol_symm)
    if _legal_copied_by_eve(wp) or _constant_legal(wp):
        secrecy, proxy = ZERO_CERTIFIED, None
    elif compute_proxy:
        proxy = avc_secrecy_lower_bound(wp, u_size=u_size, tol=tol, seed=seed).value
        secrecy = POSITIVE if proxy > tol else ZERO_PROXY
    else:
        secrecy, proxy = ZERO_PROXY, None
    if cert.symmetrizable or secrecy == ZERO_CERTIFIED:
        sid = "ZERO"
    elif secrecy == POSITIVE:
        sid = "POSITIVE"
    else:
        sid = "UNKNOWN"
    return ComponentStatus(cert.symmetrizable, cert.residual, secrecy, proxy, sid)


def _canonical_key(wp: WiretapPair) -> str:
    return json.dumps(channel_to_dict(wp), sort_keys=True)


def superactivation_check(wp1: WiretapPair, wp2: WiretapPair, tol: float = 1e-6,
                          tol_symm: float = 1e-7, seed: int = 0, u_size: int | None = None,
                          dim_guard: int = DIM_GUARD) -> SuperactivationReport:
    """Case analysis for C_SID(W1 (x) W2, V1 (x) V2) > 0 with both components at 0.

    The tensor product's legal family is non-symmetrizable iff one component
    is; its random-coding secrecy capacity is positive when a component's is.
    Arguments are put in a canonical order first, so the verdict does not
    depend on which pair is passed first.
    """
    for wp in (wp1, wp2):
        if wp.flavour != "avc":
            raise PreconditionViolated("super-activation check needs AVC wiretap pairs")
    swapped = _canonical_key(wp1) > _canonical_key(wp2)
    a, b = (wp2, wp1) if swapped else (wp1, wp2)
    if a.legal.out_dim * b.legal.out_dim > dim_guard or a.eve.out_dim * b.eve.out_dim > dim_guard:
        from .errors import DimGuardExceeded

        raise DimGuardExceeded("tensor product dimension exceeds guard")
    ca = _component(a, tol, tol_symm, seed, u_size)
    cb = _component(b, tol, tol_symm, seed, u_size)
    wt = tensor_wiretap(a, b)
    component_positive = POSITIVE in (ca.secrecy, cb.secrecy)
    ct = _component(wt, tol, tol_symm, seed, None, compute_proxy=not component_positive)
    reasons = []
    if component_positive and ct.secrecy != ZERO_CERTIFIED:
        ct.secrecy = POSITIVE
        reasons.append("tensor secrecy positive: inherited from a component with positive proxy")
        ct.sid = "ZERO" if ct.symmetrizable else "POSITIVE"
    if ct.sid == "POSITIVE" and ca.sid == "ZERO" and cb.sid == "ZERO":
        verdict = "SUPERACTIVATION_CERTIFIED"
        reasons.append("both components certified 0; tensor non-symmetrizable with positive secrecy")
    elif "POSITIVE" in (ca.sid, cb.sid):
        verdict = "NO_SUPERACTIVATION"
        reasons.append("a component already has positive secure ID capacity")
    elif ct.sid == "ZERO":
        verdict = "NO_SUPERACTIVATION"
        reasons.append("tensor product certified 0 (symmetrizable or copied by Eve)")
    else:
        verdict = "UNKNOWN"
        limited = [name for name, c in (("first", ca), ("second", cb), ("tensor", ct)) if c.sid == "UNKNOWN"]
        reasons.append("proxy-limited: secrecy positivity undecided for " + ", ".join(limited))
    # super-additivity clause: C_SID(1) > 0, C_S(2) = 0 but C_ran(2) > 0
    superadd = False
    for x, y in ((ca, cb), (cb, ca)):
        wy = b if y is cb else a
        if x.sid == "POSITIVE" and y.secrecy == ZERO_CERTIFIED and not y.symmetrizable:
            y.c_ran = avc_transmission_capacity(as_family(wy.legal, "avc"), tol, tol_symm).value
            if y.c_ran > tol:
                superadd = True
                reasons.append("super-additivity clause applies: one pair has positive C_SID, "
                               "the other zero secrecy but positive C_ran")
    first, second = (cb, ca) if swapped else (ca, cb)
    return SuperactivationReport(verdict, first, second, ct, reasons, superadd)


# ---------------------------------------------------------------------------
# bundle format for two-layer codes


def wiretap_code_to_dict(code: WiretapIdCode) -> dict:
    def f(v):
        return None if v is None else float(v)

    return {"kind": "wiretap-id-code",
            "outer": code_to_dict(code.outer), "inner": code_to_dict(code.inner),
            "colorings": code.colorings.astype(int).tolist(),
            "id_code": code_to_dict(code.code),
            "lambda1": f(code.lambda1), "lambda2": f(code.lambda2), "mu": f(code.mu),
            "mu_inner": f(code.mu_inner), "lambda_outer": f(code.lambda_outer),
            "lambda_inner": f(code.lambda_inner)}


def wiretap_code_from_dict(doc: dict) -> WiretapIdCode:
    from .errors import ParseError

    for key in ("outer", "inner", "colorings", "id_code"):
        if key not in doc:
            raise ParseError("missing required field", field=key)
    outer = code_from_dict(doc["outer"])
    inner = code_from_dict(doc["inner"])
    col = np.asarray(doc["colorings"], dtype=np.int64)
    if col.ndim != 2 or col.shape[1] != outer.size or (col.size and (col.min() < 0 or col.max() >= inner.size)):
        raise ParseError("colourings must be an N x M' table with entries in [0, M'')", field="colorings")
    code = code_from_dict(doc["id_code"])

    def f(key):
        v = doc.get(key)
        return None if v is None else float(v)

    return WiretapIdCode(outer, inner, col, code, f("lambda1"), f("lambda2"), f("mu"), f("mu_inner"),
                         f("lambda_outer"), f("lambda_inner"))
