"""Holevo information and single-letter capacity quantities.

Every solver returns a `CapacityReport` whose `value` is attained by the
reported optimizer and whose `upper_bound` is certified (Blahut-Arimoto
divergence bound, cutting-plane LP value, or Frank-Wolfe gap), so
`gap_estimate = upper_bound - value` is an honest error bar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from ._optim import BoundedOptimum, cutting_plane_maximize, pairwise_fw_minimize
from .channels import CqChannel, IndexedChannelFamily, WiretapPair, as_family
from .errors import ConvergenceFailure, ShapeMismatch, SolverFailure
from .linalg import as_distribution

ZERO_EIG = 1e-15
ZERO_WEIGHT = 1e-13


@dataclass
class CapacityReport:
    value: float
    optimizer: np.ndarray
    iterations: int
    gap_estimate: float
    tolerance: float
    upper_bound: float
    state_weights: np.ndarray | None = None
    active: tuple = ()
    method: str = ""
    certificate: "SymmetrizabilityCertificate | None" = None


@dataclass
class SymmetrizabilityCertificate:
    symmetrizable: bool
    tau: np.ndarray | None
    residual: float
    tol_symm: float


# ---------------------------------------------------------------------------
# state representations: classical stacks are kept as probability vectors


def _representation(states: np.ndarray) -> np.ndarray:
    """(..., d, d) -> (..., d) real diagonals when every matrix is diagonal."""
    d = states.shape[-1]
    diag = np.einsum("...ii->...i", states)
    off = states - diag[..., :, None] * np.eye(d)
    if np.all(off == 0):
        return np.clip(diag.real, 0.0, None)
    return states



def _spectrum_batch(rep: np.ndarray, classical: bool) -> np.ndarray:
    if classical:
        return rep
    return np.linalg.eigvalsh(rep)


def _entropy_batch(rep: np.ndarray, classical: bool) -> np.ndarray:
    w = np.clip(_spectrum_batch(rep, classical), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, -w * np.log2(np.where(w > 0, w, 1.0)), 0.0)
    return np.clip(terms.sum(axis=-1), 0.0, None)


def _log_pairing(stack: np.ndarray, m: np.ndarray, classical: bool) -> np.ndarray:
    """Tr(S_k log2 m) for each S_k in `stack`; -inf when S_k leaves the support of m."""
    if classical:
        w, weights = m, stack
    else:
        w, v = np.linalg.eigh(m)
        weights = np.einsum("ia,kij,ja->ka", v.conj(), stack, v, optimize=True).real
    zero = w <= ZERO_EIG
    logw = np.log2(np.where(zero, 1.0, w))
    out = (weights * np.where(zero, 0.0, logw)).sum(axis=-1)
    leak = (weights * zero).sum(axis=-1) > ZERO_WEIGHT
    return np.where(leak, -np.inf, out)


class _Stack:
    """Output states of one cq-channel with cached entropies."""

    def __init__(self, states: np.ndarray):
        self.rep = _representation(np.asarray(states, dtype=complex))
        self.classical = self.rep.ndim == 2
        self.entropies = _entropy_batch(self.rep, self.classical)
        self.size = self.rep.shape[0]

    def mix(self, p: np.ndarray) -> np.ndarray:
        return np.tensordot(p, self.rep, axes=1)

    def entropy(self, m: np.ndarray) -> float:
        return float(_entropy_batch(m[None], self.classical)[0])

    def divergences(self, p: np.ndarray) -> np.ndarray:
        """D(W(x) || W(p)) in bits for every letter x."""
        return -self.entropies - _log_pairing(self.rep, self.mix(p), self.classical)

    def information(self, p: np.ndarray) -> float:
        return max(0.0, self.entropy(self.mix(p)) - float(p @ self.entropies))


def _dist(p, size: int) -> np.ndarray:
    p = as_distribution(p)
    if p.size != size:
        raise ShapeMismatch(f"distribution over {p.size} letters, channel has {size}")
    return np.array(p)


def holevo_information(p, ch: CqChannel) -> float:
    """S(sum_x p(x) W(x)) - sum_x p(x) S(W(x)) in bits."""
    p = _dist(p, ch.alphabet_size)
    return _Stack(ch.states).information(p)


def holevo_information_states(p, states) -> float:
    states = np.asarray(states, dtype=complex)
    return _Stack(states).information(_dist(p, states.shape[0]))


# ---------------------------------------------------------------------------
# point capacity


def _ba_polish(stack: _Stack, p: np.ndarray, tol: float, max_iter: int,
               cuts: list[np.ndarray]) -> BoundedOptimum:
    def oracle(q):
        d = stack.divergences(q)
        return float(q @ d), [d]

    return cutting_plane_maximize(oracle, stack.size, tol, max_iter=max_iter, x0=p,
                                  initial_cuts=cuts)


def holevo_capacity(ch: CqChannel, tol: float = 1e-6, max_iter: int = 20000,
                    switch_after: int = 2000) -> CapacityReport:
    """max_P I(P; W) by Blahut-Arimoto iteration p <- p 2^{D(W(x)||W(p))}.

    The divergence bound max_x D(W(x)||W(p)) certifies the gap. When the
    iteration is slow (optimum on the boundary) a cutting-plane finisher
    takes over, seeded with the divergence vectors already computed.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    stack = _Stack(ch.states)
    a = stack.size
    p = np.full(a, 1.0 / a)
    best_p, best_val, upper = p, 0.0, np.inf
    recent: list[np.ndarray] = []
    it = 0
    for it in range(1, min(max_iter, switch_after) + 1):
        d = stack.divergences(p)
        val = float(p @ d)
        upper = min(upper, float(d.max()))
        if val > best_val:
            best_p, best_val = p, val
        if upper - best_val <= tol:
            break
        recent.append(d)
        if len(recent) > 64:
            recent.pop(0)
        e = d - d.max()
        p = p * np.exp2(e)
        p = p / p.sum()
    method = "blahut-arimoto"
    if upper - best_val > tol and max_iter > it:
        res = _ba_polish(stack, best_p, tol, max_iter - it, recent)
        it += res.iterations
        if res.value > best_val:
            best_p, best_val = res.x, res.value
        upper = min(upper, res.bound)
        method = "blahut-arimoto+cutting-plane"
    best_val = stack.information(best_p)
    gap = max(0.0, upper - best_val)
    if gap > tol:
        raise ConvergenceFailure(f"holevo_capacity gap {gap:.3e} > tol {tol:.1e} after {it} iterations")
    return CapacityReport(best_val, best_p, it, gap, tol, upper, method=method)


# ---------------------------------------------------------------------------
# compound capacity


def _active_indices(values: np.ndarray, tol: float) -> tuple:
    lo = float(values.min())
    return tuple(int(t) for t in np.flatnonzero(values <= lo + tol))


def compound_capacity(fam: IndexedChannelFamily, tol: float = 1e-6,
                      max_iter: int = 3000) -> CapacityReport:
    """max_P min_t I(P; W_t) by cutting planes on the concave pointwise minimum."""
    fam = as_family(fam)
    if fam.index_count == 1:
        rep = holevo_capacity(fam.members[0], tol)
        rep.active = (0,)
        return rep
    stacks = [_Stack(m.states) for m in fam.members]
    a = fam.alphabet_size

    def oracle(p):
        ds = [s.divergences(p) for s in stacks]
        return min(float(p @ d) for d in ds), ds

    res = cutting_plane_maximize(oracle, a, tol, max_iter=max_iter)
    infos = np.array([s.information(res.x) for s in stacks])
    value = float(infos.min())
    gap = max(0.0, res.bound - value)
    if gap > tol:
        raise ConvergenceFailure(f"compound_capacity gap {gap:.3e} > tol {tol:.1e}")
    return CapacityReport(value, res.x, res.iterations, gap, tol, res.bound,
                          active=_active_indices(infos, tol), method="cutting-plane")


# ---------------------------------------------------------------------------
# convex hull and random coding capacity


def convex_hull_member(fam: IndexedChannelFamily, q) -> CqChannel:
    """Letterwise mixture W_q(x) = sum_t q(t) W_t(x)."""
    q = _dist(q, fam.index_count)
    return CqChannel(np.tensordot(q, fam.stack, axes=1))


class _Hull:
    """I(p; W_q) as a function of hull weights q, with gradient."""

    MIX = 1e-10

    def __init__(self, stack: np.ndarray):
        # stack: (T, a, d, d)
        self.rep = _representation(np.asarray(stack, dtype=complex))
        self.classical = self.rep.ndim == 3
        self.T = self.rep.shape[0]

    def value_grad(self, p: np.ndarray, q: np.ndarray) -> tuple[float, np.ndarray]:
        q_eval = (1 - self.MIX) * q + self.MIX / self.T
        f = self.value(p, q)
        letters = np.flatnonzero(p > 0)
        wt_x = self.rep[:, letters]  # (T, k, ...)
        pk = p[letters]
        wt_p = np.tensordot(pk, wt_x, axes=([0], [1]))  # (T, ...)
        wq_p = np.tensordot(q_eval, wt_p, axes=1)
        g = -_log_pairing(wt_p, wq_p, self.classical)
        for j, x in enumerate(letters):
            wq_x = np.tensordot(q_eval, wt_x[:, j], axes=1)
            g = g + pk[j] * _log_pairing(wt_x[:, j], wq_x, self.classical)
        return f, g

    def value(self, p: np.ndarray, q: np.ndarray) -> float:
        wq = np.tensordot(q, self.rep, axes=1)  # (a, ...)
        ent = _entropy_batch(wq, self.classical)
        mixed = np.tensordot(p, wq, axes=1)
        return max(0.0, float(_entropy_batch(mixed[None], self.classical)[0] - p @ ent))

    def minimize(self, p: np.ndarray, tol: float, q0=None) -> BoundedOptimum:
        return pairwise_fw_minimize(lambda q: self.value_grad(p, q), self.T, tol, x0=q0)


def hull_min_information(fam: IndexedChannelFamily, p, tol: float = 1e-9) -> BoundedOptimum:
    """min over q of I(p; W_q); `bound` is a certified lower bound."""
    p = _dist(p, fam.alphabet_size)
    return _Hull(fam.stack).minimize(p, tol)


def random_coding_capacity(fam: IndexedChannelFamily, tol: float = 1e-6,
                           max_iter: int = 2000) -> CapacityReport:
    """max_p min_{q} I(p; W_q) over the convex hull of the family.

    Outer cutting planes on p (each cut I(.; W_q*) is a valid majorant of the
    hull minimum), inner pairwise Frank-Wolfe on q. The reported gap is the
    smaller of the LP bound and the capacity of the final hull channel, minus
    the certified lower bound of the hull minimum at the final p.
    """
    fam = as_family(fam, "avc")
    if fam.index_count == 1:
        rep = holevo_capacity(fam.members[0], tol)
        rep.state_weights = np.ones(1)
        return rep
    hull = _Hull(fam.stack)
    T = fam.index_count
    inner_tol = tol / 20
    last_q = {"q": np.full(T, 1.0 / T)}

    def oracle(p):
        res = hull.minimize(p, inner_tol, q0=None)
        last_q["q"] = res.x
        stack = _Stack(np.tensordot(res.x, fam.stack, axes=1))
        return float(res.bound), [stack.divergences(p)]

    outer = cutting_plane_maximize(oracle, fam.alphabet_size, tol / 2, max_iter=max_iter)
    p = outer.x
    inner = hull.minimize(p, inner_tol)
    q = inner.x
    lower = max(0.0, float(inner.bound))
    # second certified upper bound: capacity of the minimizing hull channel
    hull_cap = holevo_capacity(convex_hull_member(fam, q), tol / 4)
    upper = min(outer.bound, hull_cap.upper_bound)
    value = float(inner.value)
    gap = max(0.0, upper - lower)
    if gap > tol:
        raise ConvergenceFailure(f"random_coding_capacity gap {gap:.3e} > tol {tol:.1e}")
    return CapacityReport(value, p, outer.iterations, gap, tol, upper, state_weights=q,
                          method="cutting-plane/pairwise-frank-wolfe")


# ---------------------------------------------------------------------------
# symmetrizability


def _symmetrization_residual(stack: np.ndarray, tau: np.ndarray) -> float:
    """max over x<x' and entries of |sum_t tau(t|x) W_t(x') - tau(t|x') W_t(x)| (re/im parts)."""
    T, a = stack.shape[0], stack.shape[1]
    worst = 0.0
    for x in range(a):
        for y in range(x + 1, a):
            lhs = np.tensordot(tau[x], stack[:, y], axes=1)
            rhs = np.tensordot(tau[y], stack[:, x], axes=1)
            diff = lhs - rhs
            worst = max(worst, float(np.abs(diff.real).max()), float(np.abs(diff.imag).max()))
    return worst


def symmetrizability_check(fam: IndexedChannelFamily, tol_symm: float = 1e-7) -> SymmetrizabilityCertificate:
    """Minimize the worst symmetrization residual over row-stochastic tau by LP.

    The residual of an entry is measured as max(|Re|, |Im|), which keeps the
    problem linear.
    """
    stack = np.asarray(fam.stack)
    T, a, d = stack.shape[0], stack.shape[1], stack.shape[2]
    nv = a * T + 1
    rows, iu = [], np.triu_indices(d)
    for x in range(a):
        for y in range(x + 1, a):
            # coefficient of tau(t|x) is W_t(y), of tau(t|y) is -W_t(x)
            for part in (np.real, np.imag):
                cx = part(stack[:, y][:, iu[0], iu[1]])  # (T, n_entries)
                cy = part(stack[:, x][:, iu[0], iu[1]])
                for e in range(cx.shape[1]):
                    if not (np.any(cx[:, e]) or np.any(cy[:, e])):
                        continue
                    row = np.zeros(nv)
                    row[x * T:(x + 1) * T] = cx[:, e]
                    row[y * T:(y + 1) * T] -= cy[:, e]
                    rows.append(row)
    if not rows:
        tau = np.full((a, T), 1.0 / T)
        return SymmetrizabilityCertificate(True, tau, 0.0, tol_symm)
    rows = np.array(rows)
    a_ub = np.vstack([rows, -rows])
    a_ub[:, -1] = -1.0
    b_ub = np.zeros(a_ub.shape[0])
    a_eq = np.zeros((a, nv))
    for x in range(a):
        a_eq[x, x * T:(x + 1) * T] = 1.0
    c = np.zeros(nv)
    c[-1] = 1.0
    bounds = [(0, None)] * (a * T) + [(0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.ones(a), bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": 1e-10,
                                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise SolverFailure(f"symmetrizability LP failed: {res.message}")
    tau = np.clip(res.x[:-1].reshape(a, T), 0.0, None)
    tau /= tau.sum(axis=1, keepdims=True)
    residual = _symmetrization_residual(stack, tau)
    ok = residual <= tol_symm
    return SymmetrizabilityCertificate(ok, tau if ok else None, residual, tol_symm)


def avc_transmission_capacity(fam: IndexedChannelFamily, tol: float = 1e-6,
                              tol_symm: float = 1e-7) -> CapacityReport:
    """0 for symmetrizable families, the random coding capacity otherwise.

    The same rule gives the AVC identification capacity.
    """
    fam = as_family(fam, "avc")
    cert = symmetrizability_check(fam, tol_symm)
    if cert.symmetrizable:
        a = fam.alphabet_size
        return CapacityReport(0.0, np.full(a, 1.0 / a), 0, 0.0, tol, 0.0,
                              method="symmetrizable", certificate=cert)
    rep = random_coding_capacity(fam, tol)
    rep.certificate = cert
    return rep


# ---------------------------------------------------------------------------
# single-letter secrecy proxies


@dataclass
class AuxiliaryChannel:
    """Prior on U and a row-stochastic kernel U -> X."""

    u_size: int
    prior: np.ndarray
    kernel: np.ndarray

    def __post_init__(self):
        self.prior = np.array(as_distribution(self.prior))
        self.kernel = np.array([as_distribution(r) for r in np.asarray(self.kernel, dtype=float)])
        if self.prior.size != self.u_size or self.kernel.shape[0] != self.u_size:
            raise ShapeMismatch("prior/kernel sizes disagree with u_size")

    def input_distribution(self) -> np.ndarray:
        return self.prior @ self.kernel


@dataclass
class SecrecyProxy:
    """Best auxiliary-variable value found for I(U;B) - I(U;E) (clamped at 0)."""

    value: float
    raw: float
    prior: np.ndarray
    kernel: np.ndarray
    legal_information: float
    eve_information: float
    u_size: int
    evaluations: int = 0
    history: list = field(default_factory=list)

    def __float__(self) -> float:
        return self.value

    @property
    def auxiliary(self) -> AuxiliaryChannel:
        prior = np.clip(self.prior, 0.0, None)
        kernel = np.clip(self.kernel, 0.0, None)
        return AuxiliaryChannel(self.u_size, prior / prior.sum(),
                                kernel / kernel.sum(axis=1, keepdims=True))


def _softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _info_from(prior: np.ndarray, rep: np.ndarray, classical: bool) -> float:
    ent = _entropy_batch(rep, classical)
    mixed = np.tensordot(prior, rep, axes=1)
    return float(_entropy_batch(mixed[None], classical)[0] - prior @ ent)


class _SecrecyObjective:
    """I(U; legal) - I(U; eve) for U -> X with kernel K and prior pi.

    legal / eve are lists of per-index state stacks. `legal_mode` is "min"
    (compound), "hull" (avc) or "single"; Eve's term is a max over her list.
    """

    def __init__(self, legal: Sequence[np.ndarray], eve: Sequence[np.ndarray], legal_mode: str,
                 hull_tol: float = 1e-9):
        self.legal = [_representation(np.asarray(s, dtype=complex)) for s in legal]
        self.eve = [_representation(np.asarray(s, dtype=complex)) for s in eve]
        self.legal_classical = [r.ndim == 2 for r in self.legal]
        self.eve_classical = [r.ndim == 2 for r in self.eve]
        self.mode = legal_mode
        self.hull_tol = hull_tol
        self.a = self.legal[0].shape[0]
        if legal_mode == "hull":
            self.hull_stack = np.stack(self.legal)
            self.hull_classical = self.hull_stack.ndim == 3

    def parts(self, prior: np.ndarray, kernel: np.ndarray) -> tuple[float, float]:
        eve = max(_info_from(prior, np.tensordot(kernel, r, axes=1), c)
                  for r, c in zip(self.eve, self.eve_classical))
        if self.mode == "hull":
            # states seen by Bob for each (t, u): (T, u, ...)
            stack = np.tensordot(kernel, self.hull_stack, axes=([1], [1]))
            stack = np.moveaxis(stack, 0, 1)
            hull = _Hull.__new__(_Hull)
            hull.rep, hull.classical, hull.T = stack, self.hull_classical, stack.shape[0]
            legal = float(hull.minimize(prior, self.hull_tol).value)
        else:
            legal = min(_info_from(prior, np.tensordot(kernel, r, axes=1), c)
                        for r, c in zip(self.legal, self.legal_classical))
        return legal, eve

    def __call__(self, prior, kernel) -> float:
        legal, eve = self.parts(prior, kernel)
        return legal - eve


def _unpack(theta: np.ndarray, u: int, a: int) -> tuple[np.ndarray, np.ndarray]:
    return _softmax(theta[:u]), _softmax(theta[u:].reshape(u, a), axis=1)


def _logits(prior: np.ndarray, kernel: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    return np.concatenate([np.log(np.clip(prior, floor, None)),
                           np.log(np.clip(kernel, floor, None)).ravel()])


def _maximize_proxy(obj: _SecrecyObjective, u_size: int, tol: float, n_starts: int,
                    rng: np.random.Generator, extra_starts=()) -> SecrecyProxy:
    from scipy.optimize import minimize

    a = obj.a
    evals = [0]

    def neg(theta):
        evals[0] += 1
        prior, kernel = _unpack(theta, u_size, a)
        return -obj(prior, kernel)

    starts = [np.asarray(s, dtype=float) for s in extra_starts]
    if u_size >= a:
        kernel = np.full((u_size, a), 1e-9)
        for u in range(u_size):
            kernel[u, u % a] = 1.0
        kernel /= kernel.sum(axis=1, keepdims=True)
        prior = np.zeros(u_size) + 1e-9
        prior[:a] = 1.0
        starts.append(_logits(prior / prior.sum(), kernel))
    for _ in range(n_starts):
        starts.append(rng.normal(scale=2.0, size=u_size + u_size * a))
    scored = sorted(((neg(s), i) for i, s in enumerate(starts)))
    best_theta, best_val = starts[scored[0][1]], -scored[0][0]
    polish = [starts[i] for _, i in scored[: max(3, len(extra_starts) + 1)]]
    for s in polish:
        res = minimize(neg, s, method="Powell",
                       options={"xtol": 1e-8, "ftol": max(tol * 1e-3, 1e-14), "maxfev": 20000})
        if -res.fun > best_val:
            best_theta, best_val = res.x, -res.fun
    prior, kernel = _unpack(best_theta, u_size, a)
    legal, eve = obj.parts(prior, kernel)
    raw = legal - eve
    return SecrecyProxy(max(0.0, raw), raw, prior, kernel, legal, eve, u_size, evals[0])


def _proxy_ladder(obj: _SecrecyObjective, u_size: int, tol: float, n_starts: int,
                  seed: int) -> SecrecyProxy:
    """Optimize for |U| = 1..u_size, seeding each size with the previous optimum
    (padded with a zero-probability symbol), so the value is nondecreasing in u_size."""
    rng = np.random.default_rng(seed)
    a = obj.a
    best: SecrecyProxy | None = None
    history = []
    for u in range(1, u_size + 1):
        extra = []
        if best is not None:
            prior = np.append(best.prior, 0.0)
            kernel = np.vstack([best.kernel, np.full(a, 1.0 / a)])
            extra.append(_logits(prior, kernel, floor=1e-300))
        cur = _maximize_proxy(obj, u, tol, n_starts if u > 1 else 1, rng, extra)
        if best is not None and cur.raw < best.raw:
            prior = np.append(best.prior, 0.0)
            kernel = np.vstack([best.kernel, np.full(a, 1.0 / a)])
            cur = SecrecyProxy(best.value, best.raw, prior, kernel, best.legal_information,
                               best.eve_information, u, cur.evaluations)
        history.append(cur.value)
        best = cur
    best.history = history
    return best


def _stacks(ch) -> list[np.ndarray]:
    if isinstance(ch, CqChannel):
        return [np.asarray(ch.states)]
    return [np.asarray(m.states) for m in ch.members]


def secrecy_lower_bound_single_letter(wp: WiretapPair, u_size: int | None = None,
                                      tol: float = 1e-6, n_starts: int = 6,
                                      seed: int = 0) -> SecrecyProxy:
    """max over U -> X of I(U;B) - I(U;E) at block length one, clamped at 0.

    This is an achievable lower bound on the secrecy capacity, not the
    capacity itself.
    """
    if wp.flavour != "point":
        raise ShapeMismatch("use compound_secrecy_lower_bound / avc_secrecy_lower_bound")
    u_size = wp.alphabet_size if u_size is None else int(u_size)
    if u_size < 1:
        raise ValueError("u_size must be >= 1")
    obj = _SecrecyObjective(_stacks(wp.legal), _stacks(wp.eve), "single")
    return _proxy_ladder(obj, u_size, tol, n_starts, seed)


def compound_secrecy_lower_bound(wp: WiretapPair, u_size: int | None = None,
                                 tol: float = 1e-6, n_starts: int = 6,
                                 seed: int = 0) -> SecrecyProxy:
    """Single-letter min_t I(U;B_t) - max_s I(U;E_s), clamped at 0."""
    u_size = wp.alphabet_size if u_size is None else int(u_size)
    obj = _SecrecyObjective(_stacks(wp.legal), _stacks(wp.eve), "min")
    return _proxy_ladder(obj, u_size, tol, n_starts, seed)


def avc_secrecy_lower_bound(wp: WiretapPair, u_size: int | None = None,
                            tol: float = 1e-6, n_starts: int = 4,
                            seed: int = 0) -> SecrecyProxy:
    """Single-letter random-coding secrecy proxy:
    min over the legal convex hull of I(U;B_q) minus max_s I(U;E_s)."""
    u_size = wp.alphabet_size if u_size is None else int(u_size)
    legal = _stacks(wp.legal)
    mode = "hull" if len(legal) > 1 else "single"
    obj = _SecrecyObjective(legal, _stacks(wp.eve), mode)
    return _proxy_ladder(obj, u_size, tol, n_starts, seed)
