"""Channel data structures, memoryless extensions, distances and the channel document format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadLetter,
    DimGuardExceeded,
    InvariantViolation,
    ParseError,
    SemanticsMismatch,
    ShapeMismatch,
)
from .linalg import DEFAULT_TOL, Tolerances, as_density, difference_norm, tensor_product

DIM_GUARD = 4096
SEMANTICS = ("compound", "avc")
FLAVOURS = ("point", "compound", "avc")


@dataclass(frozen=True, eq=False)
class CqChannel:
    """Map from a finite alphabet {0..a-1} to density operators on C^d.

    `states[x]` is the output for input letter x.
    """

    states: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        raw = np.asarray(self.states, dtype=complex)
        if raw.ndim != 3 or raw.shape[0] < 1 or raw.shape[1] != raw.shape[2]:
            raise InvariantViolation("shape", f"expected (a, d, d) stack, got {raw.shape}")
        stack = np.stack([as_density(s, self.tol) for s in raw])
        stack.setflags(write=False)
        object.__setattr__(self, "states", stack)

    @property
    def alphabet_size(self) -> int:
        return self.states.shape[0]

    @property
    def out_dim(self) -> int:
        return self.states.shape[1]

    def __getitem__(self, x: int) -> np.ndarray:
        return self.states[x]

    def __len__(self) -> int:
        return self.alphabet_size

    def is_classical(self) -> bool:
        off = self.states - np.einsum("xii->xi", self.states)[:, :, None] * np.eye(self.out_dim)
        return bool(np.all(off == 0))

    def same_as(self, other: "CqChannel", atol: float = 0.0) -> bool:
        return (
            self.states.shape == other.states.shape
            and bool(np.all(np.abs(self.states - other.states) <= atol))
        )


@dataclass(frozen=True, eq=False)
class IndexedChannelFamily:
    """Finite family {W_t}; `semantics` says whether the index is fixed per block
    ("compound") or chosen letter by letter ("avc")."""

    members: tuple
    semantics: str = "compound"

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvariantViolation("index-set", "family needs at least one member")
        if self.semantics not in SEMANTICS:
            raise InvariantViolation("semantics", f"unknown semantics {self.semantics!r}")
        shape = members[0].states.shape
        for t, m in enumerate(members):
            if not isinstance(m, CqChannel):
                raise InvariantViolation("members", f"member {t} is not a CqChannel")
            if m.states.shape != shape:
                raise InvariantViolation(
                    "shared-shape", f"member {t} has shape {m.states.shape}, expected {shape}"
                )
        object.__setattr__(self, "members", members)

    @property
    def index_count(self) -> int:
        return len(self.members)

    @property
    def alphabet_size(self) -> int:
        return self.members[0].alphabet_size

    @property
    def out_dim(self) -> int:
        return self.members[0].out_dim

    @property
    def stack(self) -> np.ndarray:
        """Array of shape (|Theta|, a, d, d)."""
        return np.stack([m.states for m in self.members])

    def __getitem__(self, t: int) -> CqChannel:
        return self.members[t]

    def __len__(self) -> int:
        return len(self.members)

    def with_semantics(self, semantics: str) -> "IndexedChannelFamily":
        return IndexedChannelFamily(self.members, semantics)


Channelish = Union[CqChannel, IndexedChannelFamily]


def as_family(ch: Channelish, semantics: str = "compound") -> IndexedChannelFamily:
    if isinstance(ch, IndexedChannelFamily):
        return ch
    return IndexedChannelFamily((ch,), semantics)


@dataclass(frozen=True, eq=False)
class WiretapPair:
    """Legal channel (Bob) and eavesdropper channel (Eve) on one input alphabet.

    For the compound and avc flavours a bare `CqChannel` is lifted to a
    one-member family.
    """

    legal: Channelish
    eve: Channelish
    flavour: str = "point"

    def __post_init__(self):
        if self.flavour not in FLAVOURS:
            raise InvariantViolation("flavour", f"unknown flavour {self.flavour!r}")
        if self.flavour == "point":
            if not (isinstance(self.legal, CqChannel) and isinstance(self.eve, CqChannel)):
                raise InvariantViolation("flavour", "point wiretap pair needs two CqChannels")
        else:
            legal = as_family(self.legal, self.flavour)
            eve = as_family(self.eve, self.flavour)
            if legal.semantics != self.flavour or eve.semantics != self.flavour:
                raise InvariantViolation("flavour", "family semantics disagree with flavour")
            object.__setattr__(self, "legal", legal)
            object.__setattr__(self, "eve", eve)
        if self.legal.alphabet_size != self.eve.alphabet_size:
            raise InvariantViolation(
                "shared-alphabet",
                f"legal has {self.legal.alphabet_size} inputs, eve has {self.eve.alphabet_size}",
            )

    @property
    def alphabet_size(self) -> int:
        return self.legal.alphabet_size


@dataclass(frozen=True)
class SparseInputDistribution:
    """Distribution on X^n stored as (string, weight) pairs with positive weight."""

    block_length: int
    support: tuple

    def __post_init__(self):
        n = int(self.block_length)
        if n < 1:
            raise InvariantViolation("block-length", f"n = {n}")
        merged: dict[tuple, float] = {}
        for x, w in self.support:
            x = tuple(int(c) for c in x)
            if len(x) != n:
                raise InvariantViolation("string-length", f"{x} has length {len(x)}, expected {n}")
            if any(c < 0 for c in x):
                raise BadLetter(f"negative letter in {x}")
            w = float(w)
            if not np.isfinite(w) or w < -DEFAULT_TOL.prob:
                raise InvariantViolation("nonnegative", f"weight {w!r} for {x}")
            merged[x] = merged.get(x, 0.0) + max(w, 0.0)
        total = sum(merged.values())
        if abs(total - 1.0) > DEFAULT_TOL.prob:
            raise InvariantViolation("normalization", f"weights sum to {total!r}")
        items = tuple((x, w) for x, w in merged.items() if w > 0)
        object.__setattr__(self, "block_length", n)
        object.__setattr__(self, "support", items)

    @classmethod
    def point_mass(cls, x: Sequence[int]) -> "SparseInputDistribution":
        x = tuple(x)
        return cls(len(x), ((x, 1.0),))

    @classmethod
    def uniform(cls, strings: Iterable[Sequence[int]]) -> "SparseInputDistribution":
        strings = [tuple(s) for s in strings]
        if not strings:
            raise InvariantViolation("support", "uniform distribution over an empty set")
        w = 1.0 / len(strings)
        return cls(len(strings[0]), tuple((s, w) for s in strings))

    def strings(self) -> list[tuple]:
        return [x for x, _ in self.support]

    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.support])


# ---------------------------------------------------------------------------
# constructors for common desk channels


def classical_channel(rows) -> CqChannel:
    """Embed a row-stochastic matrix as a cq-channel with diagonal outputs."""
    p = np.asarray(rows, dtype=float)
    if p.ndim != 2:
        raise InvariantViolation("shape", "classical channel needs a 2-d stochastic matrix")
    return CqChannel(np.stack([np.diag(r).astype(complex) for r in p]))


def bsc(p: float) -> CqChannel:
    return classical_channel([[1 - p, p], [p, 1 - p]])


def pure_state_channel(vectors) -> CqChannel:
    states = []
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        states.append(np.outer(v, v.conj()))
    return CqChannel(np.stack(states))


def constant_channel(rho, alphabet_size: int) -> CqChannel:
    rho = np.asarray(rho, dtype=complex)
    return CqChannel(np.stack([rho] * alphabet_size))


def noiseless_channel(a: int) -> CqChannel:
    return classical_channel(np.eye(a))


def depolarized(ch: CqChannel, p: float, sigma=None) -> CqChannel:
    d = ch.out_dim
    sigma = np.eye(d) / d if sigma is None else np.asarray(sigma, dtype=complex)
    return CqChannel((1 - p) * ch.states + p * sigma[None])


# ---------------------------------------------------------------------------
# memoryless extensions


def _check_guard(d: int, n: int, dim_guard: int) -> None:
    if d**n > dim_guard:
        raise DimGuardExceeded(f"output dimension {d}^{n} = {d**n} exceeds guard {dim_guard}")


def _check_letters(x_seq: Sequence[int], a: int) -> tuple:
    x = tuple(int(c) for c in x_seq)
    for c in x:
        if not 0 <= c < a:
            raise BadLetter(f"letter {c} outside alphabet of size {a}")
    return x


def output_state(ch: CqChannel, x_seq: Sequence[int], n: int | None = None,
                 dim_guard: int = DIM_GUARD) -> np.ndarray:
    """W(x_1) (x) ... (x) W(x_n)."""
    x = _check_letters(x_seq, ch.alphabet_size)
    if n is not None and n != len(x):
        raise BadLetter(f"input string has length {len(x)}, expected {n}")
    if not x:
        raise BadLetter("empty input string")
    _check_guard(ch.out_dim, len(x), dim_guard)
    return tensor_product(*(ch.states[c] for c in x))


def output_under_distribution(ch: CqChannel, dist: SparseInputDistribution,
                              dim_guard: int = DIM_GUARD) -> np.ndarray:
    _check_guard(ch.out_dim, dist.block_length, dim_guard)
    out = None
    for x, w in dist.support:
        term = w * output_state(ch, x, dim_guard=dim_guard)
        out = term if out is None else out + term
    return out


def avc_output(fam: IndexedChannelFamily, t_seq: Sequence[int], x_seq: Sequence[int],
               dim_guard: int = DIM_GUARD) -> np.ndarray:
    """W_{t_1}(x_1) (x) ... (x) W_{t_n}(x_n)."""
    t = tuple(int(c) for c in t_seq)
    x = _check_letters(x_seq, fam.alphabet_size)
    if len(t) != len(x) or not x:
        raise BadLetter(f"state string length {len(t)} != input string length {len(x)}")
    for c in t:
        if not 0 <= c < fam.index_count:
            raise BadLetter(f"state {c} outside index set of size {fam.index_count}")
    _check_guard(fam.out_dim, len(x), dim_guard)
    return tensor_product(*(fam.members[tk].states[xk] for tk, xk in zip(t, x)))


def avc_output_under_distribution(fam: IndexedChannelFamily, t_seq: Sequence[int],
                                  dist: SparseInputDistribution,
                                  dim_guard: int = DIM_GUARD) -> np.ndarray:
    out = None
    for x, w in dist.support:
        term = w * avc_output(fam, t_seq, x, dim_guard)
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# distances


def channel_distance(w: CqChannel, w2: CqChannel) -> float:
    """max_x ||W(x) - W'(x)||_1 with the full (unhalved) trace norm."""
    if w.states.shape != w2.states.shape:
        raise ShapeMismatch(f"{w.states.shape} vs {w2.states.shape}")
    return max(difference_norm(a, b) for a, b in zip(w.states, w2.states))


def _members(f: Channelish) -> tuple:
    return f.members if isinstance(f, IndexedChannelFamily) else (f,)


def directed_family_distance(f1: Channelish, f2: Channelish) -> float:
    """G(f1, f2) = max over members of f1 of the distance to the nearest member of f2."""
    m1, m2 = _members(f1), _members(f2)
    if m1[0].states.shape != m2[0].states.shape:
        raise ShapeMismatch(f"{m1[0].states.shape} vs {m2[0].states.shape}")
    table = np.array([[channel_distance(a, b) for b in m2] for a in m1])
    return float(table.min(axis=1).max())


def family_distance(f1: Channelish, f2: Channelish) -> float:
    return max(directed_family_distance(f1, f2), directed_family_distance(f2, f1))


def wiretap_distance(p1: WiretapPair, p2: WiretapPair) -> float:
    """d_S for point pairs and D_S for family pairs."""
    if p1.flavour == "point" and p2.flavour == "point":
        return max(channel_distance(p1.legal, p2.legal), channel_distance(p1.eve, p2.eve))
    return max(family_distance(p1.legal, p2.legal), family_distance(p1.eve, p2.eve))


# ---------------------------------------------------------------------------
# parallel (tensor) channels


def tensor_channels(w1: CqChannel, w2: CqChannel) -> CqChannel:
    """(x1, x2) -> W1(x1) (x) W2(x2), inputs flattened as x1 * a2 + x2."""
    states = [np.kron(s1, s2) for s1 in w1.states for s2 in w2.states]
    return CqChannel(np.stack(states))


def tensor_families(f1: Channelish, f2: Channelish) -> IndexedChannelFamily:
    if isinstance(f1, IndexedChannelFamily) and isinstance(f2, IndexedChannelFamily):
        if f1.semantics != f2.semantics:
            raise SemanticsMismatch(f"{f1.semantics} vs {f2.semantics}")
        semantics = f1.semantics
    else:
        semantics = next(
            (f.semantics for f in (f1, f2) if isinstance(f, IndexedChannelFamily)), "compound"
        )
    members = tuple(tensor_channels(a, b) for a in _members(f1) for b in _members(f2))
    return IndexedChannelFamily(members, semantics)


def tensor_wiretap(p1: WiretapPair, p2: WiretapPair) -> WiretapPair:
    if p1.flavour != p2.flavour:
        raise SemanticsMismatch(f"{p1.flavour} vs {p2.flavour}")
    if p1.flavour == "point":
        return WiretapPair(tensor_channels(p1.legal, p2.legal), tensor_channels(p1.eve, p2.eve))
    return WiretapPair(
        tensor_families(p1.legal, p2.legal), tensor_families(p1.eve, p2.eve), p1.flavour
    )


# ---------------------------------------------------------------------------
# channel documents (JSON)


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _decode_matrix(obj, path: str, dim: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != dim:
        raise ParseError(f"expected {dim} rows", field=path)
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"expected {dim} entries", field=f"{path}[{i}]")
        for j, z in enumerate(row):
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out[i, j] = float(z)
            elif (isinstance(z, list) and len(z) == 2
                  and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in z)):
                out[i, j] = complex(z[0], z[1])
            else:
                raise ParseError("entry must be [re, im]", field=f"{path}[{i}][{j}]")
    return out


def _decode_stack(obj, path: str, a: int, dim: int) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != a:
        raise ParseError(f"expected one matrix per input letter ({a})", field=path)
    return np.stack([_decode_matrix(m, f"{path}[{x}]", dim) for x, m in enumerate(obj)])


def _decode_family(obj, path: str, a: int, dim: int, tol: Tolerances) -> list[CqChannel]:
    if not isinstance(obj, list) or not obj:
        raise ParseError("expected a non-empty list of channels", field=path)
    out = []
    for t, stack in enumerate(obj):
        out.append(CqChannel(_decode_stack(stack, f"{path}[{t}]", a, dim), tol))
    return out


def _require_int(doc: dict, key: str) -> int:
    if key not in doc:
        raise ParseError("missing required field", field=key)
    v = doc[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ParseError(f"must be a positive integer, got {v!r}", field=key)
    return v


def parse_channel_document(text: str, tol: Tolerances = DEFAULT_TOL):
    """Load a channel document; returns CqChannel, IndexedChannelFamily or WiretapPair."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    kind = doc.get("kind")
    if kind not in ("cq", "compound", "avc", "wiretap"):
        raise ParseError(f"unknown kind {kind!r}", field="kind")
    a = _require_int(doc, "alphabet_size")
    d = _require_int(doc, "out_dim")
    if "states" not in doc:
        raise ParseError("missing required field", field="states")
    if kind == "cq":
        return CqChannel(_decode_stack(doc["states"], "states", a, d), tol)
    if kind in ("compound", "avc"):
        return IndexedChannelFamily(tuple(_decode_family(doc["states"], "states", a, d, tol)), kind)
    flavour = doc.get("flavour", "point")
    if flavour not in FLAVOURS:
        raise ParseError(f"unknown flavour {flavour!r}", field="flavour")
    e = _require_int(doc, "eve_dim")
    if "eve_states" not in doc:
        raise ParseError("missing required field", field="eve_states")
    if flavour == "point":
        legal = CqChannel(_decode_stack(doc["states"], "states", a, d), tol)
        eve = CqChannel(_decode_stack(doc["eve_states"], "eve_states", a, e), tol)
    else:
        legal = IndexedChannelFamily(tuple(_decode_family(doc["states"], "states", a, d, tol)), flavour)
        eve = IndexedChannelFamily(tuple(_decode_family(doc["eve_states"], "eve_states", a, e, tol)), flavour)
    return WiretapPair(legal, eve, flavour)


def channel_to_dict(obj) -> dict:
    if isinstance(obj, CqChannel):
        return {"kind": "cq", "alphabet_size": obj.alphabet_size, "out_dim": obj.out_dim,
                "states": [_encode_matrix(s) for s in obj.states]}
    if isinstance(obj, IndexedChannelFamily):
        return {"kind": obj.semantics, "alphabet_size": obj.alphabet_size, "out_dim": obj.out_dim,
                "states": [[_encode_matrix(s) for s in m.states] for m in obj.members]}
    if isinstance(obj, WiretapPair):
        doc = {"kind": "wiretap", "flavour": obj.flavour, "alphabet_size": obj.alphabet_size,
               "out_dim": obj.legal.out_dim, "eve_dim": obj.eve.out_dim}
        if obj.flavour == "point":
            doc["states"] = [_encode_matrix(s) for s in obj.legal.states]
            doc["eve_states"] = [_encode_matrix(s) for s in obj.eve.states]
        else:
            doc["states"] = [[_encode_matrix(s) for s in m.states] for m in obj.legal.members]
            doc["eve_states"] = [[_encode_matrix(s) for s in m.states] for m in obj.eve.members]
        return doc
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize_channel_document(obj, indent: int | None = None) -> str:
    return json.dumps(channel_to_dict(obj), indent=indent)


def load_channel(path) -> Channelish | WiretapPair:
    with open(path, encoding="utf-8") as fh:
        return parse_channel_document(fh.read())


def save_channel(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_channel_document(obj, indent=1))
        fh.write("\n")
