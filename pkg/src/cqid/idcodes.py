"""Transmission codes, set families and identification codes built from them.

An ID code is assembled from a transmission code (codewords c_m, decoder
E_m) and a family of k-subsets A_i of the message set: P_i is uniform on
{c_m : m in A_i} and D_i = sum_{m in A_i} E_m. Errors are evaluated exactly,
over every channel index (compound) or every state sequence (AVC).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import (
    DIM_GUARD,
    CqChannel,
    IndexedChannelFamily,
    SparseInputDistribution,
    _decode_matrix,
    _encode_matrix,
    as_family,
)
from .errors import (
    BadLetter,
    ConstructionExhausted,
    DimGuardExceeded,
    NoCodeFound,
    ParseError,
    PreconditionViolated,
    SizeMismatch,
)

ENUMERATION_GUARD = 1_000_000
TIE_TOL = 1e-12


def _guard(d: int, n: int, dim_guard: int) -> None:
    if d**n > dim_guard:
        raise DimGuardExceeded(f"output dimension {d}^{n} = {d**n} exceeds guard {dim_guard}")


def _all_diagonal(mats: np.ndarray) -> bool:
    d = mats.shape[-1]
    diag = np.einsum("...ii->...i", mats)
    return bool(np.all(mats - diag[..., :, None] * np.eye(d) == 0))


def _string_state(letter_states: np.ndarray, x: Sequence[int], diag: bool) -> np.ndarray:
    """Tensor power output for one input string; diagonal vectors when `diag`."""
    out = None
    for c in x:
        s = letter_states[c]
        s = np.diagonal(s).real if diag else s
        out = s if out is None else np.kron(out, s)
    return out


def _distinct_strings(dists: Sequence[SparseInputDistribution]) -> tuple[list[tuple], np.ndarray]:
    """Union of supports and the (len(dists), |S|) weight matrix."""
    index: dict[tuple, int] = {}
    for dist in dists:
        for x in dist.strings():
            index.setdefault(x, len(index))
    weights = np.zeros((len(dists), len(index)))
    for i, dist in enumerate(dists):
        for x, w in dist.support:
            weights[i, index[x]] += w
    return list(index), weights


def _trace_table(ch: CqChannel, strings: list[tuple], elements: np.ndarray, diag: bool) -> np.ndarray:
    """G[s, j] = Tr(W^n(x_s) E_j)."""
    if diag:
        states = np.stack([_string_state(ch.states, x, True) for x in strings])
        return states @ np.einsum("jii->ji", elements).real.T
    states = np.stack([_string_state(ch.states, x, False) for x in strings])
    return np.einsum("sab,jba->sj", states, elements).real


# ---------------------------------------------------------------------------
# transmission codes


@dataclass
class TransmissionCode:
    """(n, M, lambda) code: codeword distributions and a decoding POVM on (C^d)^{(x)n}."""

    block_length: int
    codewords: list
    decoder: np.ndarray  # (M, d^n, d^n)
    max_error: float
    channel: IndexedChannelFamily | None = field(default=None, repr=False)
    errors: np.ndarray | None = field(default=None, repr=False)  # (|Theta|, M)

    @property
    def size(self) -> int:
        return len(self.codewords)

    def codeword_strings(self) -> list[tuple]:
        return [c.strings()[0] for c in self.codewords]


def transmission_errors(fam, codewords: Sequence[SparseInputDistribution],
                        decoder: np.ndarray) -> np.ndarray:
    """err[t, m] = 1 - Tr W_t^n(c_m) E_m for every channel index t."""
    fam = as_family(fam)
    decoder = np.asarray(decoder, dtype=complex)
    strings, weights = _distinct_strings(codewords)
    diag = _all_diagonal(fam.stack) and _all_diagonal(decoder)
    out = []
    for member in fam.members:
        g = weights @ _trace_table(member, strings, decoder, diag)
        out.append(1.0 - np.diagonal(g))
    return np.clip(np.array(out), 0.0, 1.0)


def pretty_good_measurement(states: np.ndarray) -> np.ndarray:
    """E_m = S^{-1/2} rho_m S^{-1/2} with S = sum rho_m; the kernel of S is shared evenly."""
    states = np.asarray(states, dtype=complex)
    m, dim = states.shape[0], states.shape[1]
    if _all_diagonal(states):
        probs = np.einsum("mii->mi", states).real
        s = probs.sum(axis=0)
        keep = s > 1e-12 * max(1.0, s.max())
        vals = np.where(keep, probs / np.where(keep, s, 1.0), 1.0 / m)
        elems = np.zeros((m, dim, dim), dtype=complex)
        idx = np.arange(dim)
        elems[:, idx, idx] = vals
        return elems
    s = states.sum(axis=0)
    w, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    keep = w > 1e-12 * max(1.0, w.max())
    inv_sqrt = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    kernel = np.eye(dim) - v[:, keep] @ v[:, keep].conj().T
    elems = inv_sqrt @ states @ inv_sqrt + kernel[None] / m
    return 0.5 * (elems + np.conj(np.swapaxes(elems, 1, 2)))


def maximum_likelihood_decoder(states: np.ndarray) -> np.ndarray:
    """Hard 0/1 regions for diagonal states; ties and unreachable outcomes go to the lowest index."""
    probs = np.einsum("mii->mi", np.asarray(states)).real
    winner = np.argmax(probs, axis=0)
    m, dim = probs.shape
    elems = np.zeros((m, dim, dim), dtype=complex)
    elems[winner, np.arange(dim), np.arange(dim)] = 1.0
    return elems


def _decoder_for(fam: IndexedChannelFamily, book: list[tuple], kind: str) -> np.ndarray:
    """Decoder for the index-averaged codeword outputs."""
    if _all_diagonal(fam.stack):
        probs = np.mean([np.stack([_string_state(m.states, x, True) for x in book])
                         for m in fam.members], axis=0)
        dim = probs.shape[1]
        avg = np.zeros((len(book), dim, dim))
        avg[:, np.arange(dim), np.arange(dim)] = probs
    else:
        avg = np.mean([np.stack([_string_state(m.states, x, False) for x in book])
                       for m in fam.members], axis=0)
    return pretty_good_measurement(avg) if kind == "pgm" else maximum_likelihood_decoder(avg)


def _sample_codebook(p: np.ndarray, n: int, size: int, rng: np.random.Generator) -> list[tuple]:
    a = p.size
    support = int(np.count_nonzero(p > 1e-12))
    if support**n < size:
        # not enough distinct strings in the support; fall back to a full-support mixture
        p = 0.5 * p + 0.5 / a
    seen: dict[tuple, None] = {}
    tries = 0
    while len(seen) < size:
        x = tuple(int(c) for c in rng.choice(a, size=n, p=p))
        seen.setdefault(x, None)
        tries += 1
        if tries > 1000 * size:
            raise NoCodeFound("could not draw enough distinct codewords")
    return list(seen)


def build_transmission_code(fam, n: int, size: int, seed: int = 0, attempts: int = 8,
                            input_dist=None, codewords=None, decoder: str = "pgm",
                            lambda_target: float | None = None,
                            dim_guard: int = DIM_GUARD) -> TransmissionCode:
    """Random codebook i.i.d. from the compound-capacity-achieving input (or
    `input_dist`), decoded by the square-root measurement of the index-averaged
    outputs. The best of `attempts` codebooks by exact worst-case error wins."""
    fam = as_family(fam)
    a, d = fam.alphabet_size, fam.out_dim
    _guard(d, n, dim_guard)
    if size < 1:
        raise SizeMismatch("code size must be positive")
    if size > a**n:
        raise SizeMismatch(f"only {a**n} distinct strings of length {n}")
    if decoder not in ("pgm", "ml"):
        raise ValueError(f"unknown decoder {decoder!r}")
    if decoder == "ml" and not _all_diagonal(fam.stack):
        raise ValueError("maximum-likelihood regions need diagonal outputs")
    rng = np.random.default_rng(seed)
    if codewords is None and input_dist is None:
        from .measures import compound_capacity

        input_dist = compound_capacity(fam).optimizer
    books = []
    if codewords is not None:
        books.append([tuple(int(c) for c in x) for x in codewords])
        for x in books[0]:
            if len(x) != n or any(not 0 <= c < a for c in x):
                raise BadLetter(f"codeword {x} is not a length-{n} string over {a} letters")
        if len(books[0]) != size:
            raise SizeMismatch(f"{len(books[0])} codewords supplied, size {size}")
    else:
        p = np.asarray(input_dist, dtype=float)
        books = [_sample_codebook(p, n, size, rng) for _ in range(max(1, attempts))]
    best = None
    for book in books:
        cws = [SparseInputDistribution.point_mass(x) for x in book]
        elems = _decoder_for(fam, book, decoder)
        errs = transmission_errors(fam, cws, elems)
        lam = float(errs.max())
        if best is None or lam < best.max_error:
            best = TransmissionCode(n, cws, elems, lam, fam, errs)
    if lambda_target is not None and best.max_error > lambda_target:
        raise NoCodeFound(f"best max error {best.max_error:.4g} exceeds target {lambda_target:.4g}")
    return best


# ---------------------------------------------------------------------------
# set families with small pairwise intersections


@dataclass
class SetFamily:
    ground_size: int
    subset_size: int
    subsets: list
    epsilon: float
    lam: float

    @property
    def size(self) -> int:
        return len(self.subsets)

    def incidence(self) -> np.ndarray:
        a = np.zeros((len(self.subsets), self.ground_size), dtype=np.int64)
        for i, s in enumerate(self.subsets):
            a[i, list(s)] = 1
        return a

    def intersections(self) -> np.ndarray:
        a = self.incidence()
        return a @ a.T

    def max_intersection(self) -> int:
        if self.size < 2:
            return 0
        g = self.intersections()
        np.fill_diagonal(g, -1)
        return int(g.max())

    def verify(self) -> bool:
        if any(len(s) != self.subset_size or len(set(s)) != len(s) for s in self.subsets):
            return False
        if any(not 0 <= m < self.ground_size for s in self.subsets for m in s):
            return False
        return self.max_intersection() < self.lam * self.subset_size


def gilbert_bound(ground_size: int, epsilon: float) -> float:
    """Guaranteed family size 2^{floor(eps M)} / M."""
    return 2.0 ** math.floor(epsilon * ground_size) / ground_size


def gilbert_family(ground_size: int, epsilon: float, lam: float, n_target: int, seed: int = 0,
                   rejection_tries: int = 200, greedy_restarts: int = 50) -> SetFamily:
    """N_target subsets of size floor(eps M) with every pairwise intersection < lam k.

    Each subset is first drawn uniformly and kept if compatible; after
    `rejection_tries` failures a randomized greedy builder adds elements one
    by one while tracking overlap counts with the accepted subsets.
    """
    if not 0 < epsilon < 0.5 or lam <= 0:
        raise PreconditionViolated(f"need 0 < eps < 1/2 and lam > 0, got eps={epsilon}, lam={lam}")
    if lam * math.log2(1 / epsilon - 1) <= 2:
        raise PreconditionViolated(
            f"lam * log2(1/eps - 1) = {lam * math.log2(1 / epsilon - 1):.4f} must exceed 2")
    k = math.floor(epsilon * ground_size)
    if k < 1:
        raise PreconditionViolated(f"subset size floor(eps M) = {k} < 1")
    if n_target < 1:
        raise ValueError("n_target must be positive")
    limit = lam * k  # intersections must be strictly below
    rng = np.random.default_rng(seed)
    incidence = np.zeros((0, ground_size), dtype=np.int64)
    subsets: list[tuple] = []

    def accept(s: np.ndarray) -> None:
        nonlocal incidence
        row = np.zeros(ground_size, dtype=np.int64)
        row[s] = 1
        incidence = np.vstack([incidence, row])
        subsets.append(tuple(sorted(int(m) for m in s)))

    def greedy() -> np.ndarray | None:
        counts = np.zeros(len(subsets), dtype=np.int64)
        chosen: list[int] = []
        for m in rng.permutation(ground_size):
            if len(chosen) == k:
                break
            col = incidence[:, m]
            if np.all(counts + col < limit):
                chosen.append(int(m))
                counts += col
        return np.array(chosen) if len(chosen) == k else None

    while len(subsets) < n_target:
        found = None
        for _ in range(rejection_tries):
            s = rng.choice(ground_size, size=k, replace=False)
            if incidence.shape[0] == 0 or np.all(incidence[:, s].sum(axis=1) < limit):
                found = s
                break
        if found is None:
            for _ in range(greedy_restarts):
                found = greedy()
                if found is not None:
                    break
        if found is None:
            raise ConstructionExhausted(
                f"stuck at {len(subsets)} of {n_target} subsets (M={ground_size}, k={k}, lam={lam})")
        accept(found)
    fam = SetFamily(ground_size, k, subsets, epsilon, lam)
    if not fam.verify():
        raise ConstructionExhausted("constructed family failed verification")
    return fam


# ---------------------------------------------------------------------------
# identification codes


@dataclass
class IdCode:
    block_length: int
    pairs: list  # (SparseInputDistribution P_i, decoder element D_i)
    simultaneous: bool = False
    base_povm: np.ndarray | None = field(default=None, repr=False)
    subsets: list | None = None
    lambda1: float | None = None
    lambda2: float | None = None

    @property
    def size(self) -> int:
        return len(self.pairs)

    def distributions(self) -> list:
        return [p for p, _ in self.pairs]

    def decoders(self) -> np.ndarray:
        return np.stack([d for _, d in self.pairs])

    def check_coarse_graining(self, tol: float = 1e-9) -> bool:
        if not self.simultaneous or self.base_povm is None or self.subsets is None:
            return False
        return all(np.max(np.abs(self.base_povm[list(s)].sum(axis=0) - d)) <= tol
                   for s, (_, d) in zip(self.subsets, self.pairs))


def assemble_id_code(tc: TransmissionCode, fam: SetFamily, evaluate: bool = True) -> IdCode:
    """P_i uniform on {c_m : m in A_i}, D_i = sum_{m in A_i} E_m."""
    if fam.ground_size != tc.size:
        raise SizeMismatch(f"family over {fam.ground_size} messages, code has {tc.size}")
    pairs = []
    for s in fam.subsets:
        strings = [tc.codewords[m].strings()[0] if len(tc.codewords[m].support) == 1 else None
                   for m in s]
        if any(x is None for x in strings):
            support = [(x, w / len(s)) for m in s for x, w in tc.codewords[m].support]
            dist = SparseInputDistribution(tc.block_length, tuple(support))
        else:
            dist = SparseInputDistribution.uniform(strings)
        pairs.append((dist, tc.decoder[list(s)].sum(axis=0)))
    code = IdCode(tc.block_length, pairs, True, tc.decoder, [tuple(s) for s in fam.subsets])
    if evaluate and tc.channel is not None:
        res = evaluate_id_errors(code, tc.channel, "compound")
        code.lambda1, code.lambda2 = res.lambda1, res.lambda2
    return code


@dataclass
class IdErrors:
    lambda1: float
    lambda2: float
    first_witness: tuple  # (i, t or t^n)
    second_witness: tuple  # (i, j, t or t^n)
    exact: bool
    first_kind: np.ndarray  # worst first-kind error per message
    second_kind: np.ndarray  # worst Tr W(P_i) D_j per ordered pair, nan on the diagonal
    worst_states: dict = field(default_factory=dict, repr=False)  # (i, j) -> t or t^n

    def rows(self) -> list[tuple]:
        """(i, j, worst state, error) for every ordered pair; i == j is the first kind."""
        out = []
        n = self.first_kind.size
        for i in range(n):
            for j in range(n):
                err = self.first_kind[i] if i == j else self.second_kind[i, j]
                out.append((i, j, self.worst_states[(i, j)], float(err)))
        return out


def _argbest(values: np.ndarray, maximize: bool) -> int:
    """Lexicographically first index within TIE_TOL of the optimum (C order)."""
    flat = values.ravel()
    if maximize:
        return int(np.flatnonzero(flat >= flat.max() - TIE_TOL)[0])
    return int(np.flatnonzero(flat <= flat.min() + TIE_TOL)[0])


def _compound_tables(code: IdCode, fam: IndexedChannelFamily) -> np.ndarray:
    """V[t, i, j] = Tr W_t^n(P_i) D_j."""
    strings, weights = _distinct_strings(code.distributions())
    decs = code.decoders()
    diag = _all_diagonal(fam.stack) and _all_diagonal(decs)
    return np.stack([weights @ _trace_table(m, strings, decs, diag) for m in fam.members])


def _contract(element: np.ndarray, stacks: list[np.ndarray], d: int, diag: bool) -> np.ndarray:
    """Tr((S_1[t_1] (x) ... (x) S_n[t_n]) E) for every (t_1..t_n), shape (T_1, ..., T_n).

    `element` is E (or its diagonal when `diag`), `stacks[k]` has shape
    (T_k, d, d) (or (T_k, d)).
    """
    n = len(stacks)
    if diag:
        f = np.asarray(element).reshape((d,) * n)
        for s in stacks:
            f = np.tensordot(f, s, axes=([0], [1]))
        return f
    # axes of E reshaped: rows a_1..a_n, cols b_1..b_n; Tr(R E) = sum R[b, a] E[a, b]
    f = np.asarray(element).reshape((d,) * (2 * n))
    for k, s in enumerate(stacks):
        rem = n - k
        f = np.tensordot(f, s, axes=([0, rem], [2, 1]))
    return f.real


def _avc_pair_value(fam_stack, strings, weights_i, element, t_stacks_fn, d, diag):
    total = None
    for s_idx, x in enumerate(strings):
        w = weights_i[s_idx]
        if w == 0:
            continue
        stacks = t_stacks_fn(x)
        term = w * _contract(element, stacks, d, diag)
        total = term if total is None else total + term
    return total


def evaluate_id_errors(code: IdCode, fam, mode: str = "compound",
                       enumeration_guard: int = ENUMERATION_GUARD, sample_budget: int = 256,
                       seed: int = 0, dim_guard: int = DIM_GUARD) -> IdErrors:
    """Worst-case first- and second-kind errors of an ID code.

    compound: the worst member W_t used for the whole block. avc: the worst
    state sequence t^n, by exact enumeration when |Theta|^n fits the guard,
    otherwise random sampling plus greedy coordinate ascent (then `exact`
    is False and the errors are lower bounds on the true worst case).
    """
    fam = as_family(fam, mode if mode in ("compound", "avc") else "compound")
    if mode not in ("compound", "avc"):
        raise ValueError(f"unknown mode {mode!r}")
    n, d, T = code.block_length, fam.out_dim, fam.index_count
    _guard(d, n, dim_guard)
    N = code.size
    first = np.zeros(N)
    second = np.full((N, N), np.nan)
    worst: dict = {}
    if mode == "compound" or T == 1:
        v = _compound_tables(code, fam)
        for i in range(N):
            t = _argbest(v[:, i, i], maximize=False)
            first[i] = 1.0 - v[t, i, i]
            worst[(i, i)] = t
            for j in range(N):
                if j != i:
                    t = _argbest(v[:, i, j], maximize=True)
                    second[i, j] = v[t, i, j]
                    worst[(i, j)] = t
        if mode == "avc":
            worst = {k: (0,) * n for k in worst}
        exact = True
    else:
        strings, weights = _distinct_strings(code.distributions())
        decs = code.decoders()
        stack = fam.stack  # (T, a, d, d)
        diag = _all_diagonal(stack) and _all_diagonal(decs)
        letters = np.einsum("taii->tai", stack).real if diag else stack
        exact = T**n <= enumeration_guard
        rng = np.random.default_rng(seed)

        def stacks_for(x, t_seq=None):
            if t_seq is None:
                return [letters[:, c] for c in x]
            return [letters[tk:tk + 1, c] for tk, c in zip(t_seq, x)]

        for j in range(N):
            element = np.diagonal(decs[j]).real if diag else decs[j]
            for i in range(N):
                if exact:
                    vals = _avc_pair_value(stack, strings, weights[i], element, stacks_for, d, diag)
                    best = _argbest(vals, maximize=(i != j))
                    t_seq = tuple(int(c) for c in np.unravel_index(best, vals.shape))
                    value = float(vals.ravel()[best])
                else:
                    t_seq, value = _adversary_search(
                        lambda ts: float(_avc_pair_value(
                            stack, strings, weights[i], element,
                            lambda x: stacks_for(x, ts), d, diag).ravel()[0]),
                        n, T, maximize=(i != j), budget=sample_budget, rng=rng)
                if i == j:
                    first[i] = 1.0 - value
                else:
                    second[i, j] = value
                worst[(i, j)] = t_seq
    first = np.clip(first, 0.0, 1.0)
    second = np.where(np.isnan(second), np.nan, np.clip(second, 0.0, 1.0))
    i1 = int(np.argmax(first))
    lam1 = float(first[i1])
    if N > 1:
        masked = np.where(np.isnan(second), -np.inf, second)
        flat = int(np.argmax(masked))
        i2, j2 = divmod(flat, N)
        lam2 = float(second[i2, j2])
        w2 = (i2, j2, worst[(i2, j2)])
    else:
        lam2, w2 = 0.0, ()
    return IdErrors(lam1, lam2, (i1, worst[(i1, i1)]), w2, exact, first, second, worst)


def _adversary_search(value_fn, n: int, T: int, maximize: bool, budget: int,
                      rng: np.random.Generator) -> tuple[tuple, float]:
    """Random sampling then greedy coordinate ascent over state sequences."""
    sign = 1.0 if maximize else -1.0
    starts = [tuple(int(c) for c in rng.integers(0, T, size=n)) for _ in range(max(1, budget))]
    scored = sorted(((-sign * value_fn(s), s) for s in starts))
    best_score, best_seq = scored[0]
    for score, seq in scored[:4]:
        seq = list(seq)
        improved = True
        while improved:
            improved = False
            for k in range(n):
                for t in range(T):
                    if t == seq[k]:
                        continue
                    trial = seq.copy()
                    trial[k] = t
                    s = -sign * value_fn(tuple(trial))
                    if s < score - TIE_TOL:
                        seq, score, improved = trial, s, True
        if score < best_score:
            best_score, best_seq = score, tuple(seq)
    return tuple(best_seq), -sign * best_score


# ---------------------------------------------------------------------------
# sequential identification


def sequential_query_bound(epsilon: float, lam: float) -> int:
    """Largest k with k <= eps^2 / (4 lam)."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    return int(math.floor(epsilon**2 / (4 * lam) + 1e-9))


@dataclass
class SequentialReport:
    true_message: int
    queries: tuple
    trials: int
    per_query_error: np.ndarray
    all_correct_rate: float
    failure_rate: float
    sigma: float
    k_bound: int | None = None
    epsilon: float | None = None
    claim_holds: bool | None = None


def _sqrt_pair(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (d + d.conj().T))
    w = np.clip(w, 0.0, 1.0)
    yes = (v * np.sqrt(w)) @ v.conj().T
    no = (v * np.sqrt(1.0 - w)) @ v.conj().T
    return yes, no


def sequential_identification(code: IdCode, channel, true_message: int, queries: Sequence[int],
                              trials: int = 10000, seed: int = 0, epsilon: float | None = None,
                              lam: float | None = None, dim_guard: int = DIM_GUARD) -> SequentialReport:
    """Ask "was message q sent?" for each q in turn on one copy of the output.

    Each query applies the instrument {sqrt(D_q), sqrt(1 - D_q)} and updates
    the state. Trials sharing an outcome history share a state, so the
    simulation splits counts binomially instead of looping over trials.
    """
    ch = channel.members[0] if isinstance(channel, IndexedChannelFamily) else channel
    n = code.block_length
    _guard(ch.out_dim, n, dim_guard)
    if not 0 <= true_message < code.size:
        raise BadLetter(f"message {true_message} outside 0..{code.size - 1}")
    queries = tuple(int(q) for q in queries)
    for q in queries:
        if not 0 <= q < code.size:
            raise BadLetter(f"query {q} outside 0..{code.size - 1}")
    p_i = code.pairs[true_message][0]
    rho = sum(w * _string_state(ch.states, x, False) for x, w in p_i.support)
    rng = np.random.default_rng(seed)
    instruments = {q: _sqrt_pair(code.pairs[q][1]) for q in set(queries)}
    # group: (state, count, all answers correct so far)
    groups = [(rho, int(trials), True)]
    wrong = np.zeros(len(queries), dtype=np.int64)
    for k, q in enumerate(queries):
        yes_op, no_op = instruments[q]
        nxt = []
        for state, count, ok in groups:
            post_yes = yes_op @ state @ yes_op.conj().T
            p_yes = float(np.clip(np.trace(post_yes).real, 0.0, 1.0))
            n_yes = int(rng.binomial(count, p_yes))
            for answer, c, op in ((True, n_yes, yes_op), (False, count - n_yes, no_op)):
                if c == 0:
                    continue
                post = post_yes if answer else op @ state @ op.conj().T
                post = post / np.trace(post).real
                correct = answer == (q == true_message)
                if not correct:
                    wrong[k] += c
                nxt.append((post, c, ok and correct))
        groups = nxt
    all_correct = sum(c for _, c, ok in groups if ok) / trials
    failure = 1.0 - all_correct
    sigma = math.sqrt(max(failure * (1 - failure), 0.0) / trials)
    rep = SequentialReport(true_message, queries, trials, wrong / trials, all_correct, failure, sigma)
    if epsilon is not None and lam is not None:
        rep.epsilon = epsilon
        rep.k_bound = sequential_query_bound(epsilon, lam)
        rep.claim_holds = len(queries) > rep.k_bound or failure <= epsilon + 3 * sigma
    return rep


# ---------------------------------------------------------------------------
# code bundle documents (JSON)


def _dist_to_obj(dist: SparseInputDistribution) -> list:
    return [[list(x), float(w)] for x, w in dist.support]


def _dist_from_obj(obj, path: str) -> SparseInputDistribution:
    if not isinstance(obj, list) or not obj:
        raise ParseError("expected a non-empty list of [string, weight]", field=path)
    try:
        support = tuple((tuple(int(c) for c in x), float(w)) for x, w in obj)
        return SparseInputDistribution(len(support[0][0]), support)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), field=path) from exc


def _float_or_none(v):
    return None if v is None else float(v)


def code_to_dict(obj) -> dict:
    if isinstance(obj, TransmissionCode):
        return {"kind": "transmission-code", "block_length": obj.block_length,
                "dim": int(obj.decoder.shape[1]),
                "codewords": [_dist_to_obj(c) for c in obj.codewords],
                "decoder": [_encode_matrix(e) for e in obj.decoder],
                "max_error": float(obj.max_error)}
    if isinstance(obj, IdCode):
        dim = int(obj.pairs[0][1].shape[0])
        doc = {"kind": "id-code", "block_length": obj.block_length, "dim": dim,
               "distributions": [_dist_to_obj(p) for p, _ in obj.pairs],
               "decoders": [_encode_matrix(d) for _, d in obj.pairs],
               "simultaneous": bool(obj.simultaneous),
               "lambda1": _float_or_none(obj.lambda1), "lambda2": _float_or_none(obj.lambda2)}
        if obj.simultaneous and obj.base_povm is not None:
            doc["base_povm"] = [_encode_matrix(e) for e in obj.base_povm]
            doc["subsets"] = [list(map(int, s)) for s in obj.subsets]
        return doc
    from .secrecy import WiretapIdCode, wiretap_code_to_dict

    if isinstance(obj, WiretapIdCode):
        return wiretap_code_to_dict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize_code_bundle(obj, indent: int | None = None) -> str:
    return json.dumps(code_to_dict(obj), indent=indent, sort_keys=True)


def _matrices(doc: dict, key: str, dim: int) -> np.ndarray:
    if key not in doc or not isinstance(doc[key], list):
        raise ParseError("missing or malformed matrix list", field=key)
    return np.stack([_decode_matrix(m, f"{key}[{i}]", dim) for i, m in enumerate(doc[key])])


def code_from_dict(doc: dict):
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    kind = doc.get("kind")
    if kind == "wiretap-id-code":
        from .secrecy import wiretap_code_from_dict

        return wiretap_code_from_dict(doc)
    if kind not in ("transmission-code", "id-code"):
        raise ParseError(f"unknown kind {kind!r}", field="kind")
    for key in ("block_length", "dim"):
        if not isinstance(doc.get(key), int) or doc[key] < 1:
            raise ParseError("must be a positive integer", field=key)
    n, dim = doc["block_length"], doc["dim"]
    if kind == "transmission-code":
        cws = [_dist_from_obj(c, f"codewords[{m}]") for m, c in enumerate(doc.get("codewords", []))]
        dec = _matrices(doc, "decoder", dim)
        if len(cws) != dec.shape[0]:
            raise ParseError("codeword and decoder counts differ", field="decoder")
        return TransmissionCode(n, cws, dec, float(doc.get("max_error", 1.0)))
    dists = [_dist_from_obj(p, f"distributions[{i}]") for i, p in enumerate(doc.get("distributions", []))]
    decs = _matrices(doc, "decoders", dim)
    if len(dists) != decs.shape[0]:
        raise ParseError("distribution and decoder counts differ", field="decoders")
    code = IdCode(n, list(zip(dists, decs)), bool(doc.get("simultaneous", False)),
                  lambda1=_float_or_none(doc.get("lambda1")),
                  lambda2=_float_or_none(doc.get("lambda2")))
    if "base_povm" in doc:
        code.base_povm = _matrices(doc, "base_povm", dim)
        code.subsets = [tuple(int(m) for m in s) for s in doc.get("subsets", [])]
    return code


def parse_code_bundle(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return code_from_dict(doc)


def load_code(path):
    with open(path, encoding="utf-8") as fh:
        return parse_code_bundle(fh.read())


def save_code(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_code_bundle(obj, indent=1))
        fh.write("\n")
