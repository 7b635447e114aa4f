"""Command-line experiment runner.

    cqid capacity corpus/bsc01.chan
    cqid symmetrizable corpus/swapped-pair.chan --format json
    cqid dichotomy corpus/noiseless-w-constant-v.chan

Exit status: 0 on success, 2 for bad input or violated preconditions,
3 when a solver fails to reach its target.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from .channels import (
    CqChannel,
    IndexedChannelFamily,
    WiretapPair,
    as_family,
    channel_distance,
    family_distance,
    load_channel,
    wiretap_distance,
)
from .errors import ParseError, PreconditionError, SolverError
from .idcodes import (
    IdCode,
    assemble_id_code,
    build_transmission_code,
    evaluate_id_errors,
    gilbert_family,
    load_code,
    save_code,
    sequential_identification,
)
from .measures import (
    avc_secrecy_lower_bound,
    avc_transmission_capacity,
    compound_capacity,
    compound_secrecy_lower_bound,
    holevo_capacity,
    secrecy_lower_bound_single_letter,
    symmetrizability_check,
)
from .secrecy import (
    WiretapIdCode,
    collision_statistics,
    dichotomy,
    discontinuity_probe_compound,
    discontinuity_probe_point,
    implied_rate_report,
    pooled_collision_statistics,
    superactivation_check,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_SOLVER = 0, 2, 3
COLUMNS = ("experiment", "quantity", "value", "tolerance", "flag")


@dataclass
class ExperimentConfig:
    command: str
    inputs: list
    seed: int = 0
    tol: float = 1e-6
    tol_symm: float = 1e-7
    dim_guard: int = 4096
    enum_guard: int = 1_000_000
    output: str | None = None
    format: str = "text"
    options: dict = field(default_factory=dict)


@dataclass
class ReportRow:
    experiment: str
    quantity: str
    value: object
    tolerance: float | None = None
    flag: str = ""


@dataclass
class Report:
    experiment: str
    rows: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def add(self, quantity: str, value, tolerance=None, flag: str = "") -> None:
        self.rows.append(ReportRow(self.experiment, quantity, value, tolerance, flag))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CQID_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items) -> list:
    """Ordered map; at most CQID_THREADS workers."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _plain(v):
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not np.isfinite(v):
        return None if np.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        s = f"{v:.12g}"
        return s + ".0" if s.lstrip("-").isdigit() else s
    return str(v)


# ---------------------------------------------------------------------------
# subcommands


def _load(path: str):
    try:
        return load_channel(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _load_code(path: str):
    try:
        return load_code(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _need(obj, types, what: str):
    if not isinstance(obj, types):
        raise PreconditionError(f"expected {what}, got {type(obj).__name__}")
    return obj


def cmd_capacity(cfg: ExperimentConfig) -> Report:
    rep = Report("capacity")
    chans = [_need(_load(p), CqChannel, "a cq channel document") for p in cfg.inputs]
    results = parallel_map(lambda ch: holevo_capacity(ch, cfg.tol), chans)
    for path, res in zip(cfg.inputs, results):
        rep.add("C", res.value, res.gap_estimate, os.path.basename(path))
        rep.lines.append(f"{os.path.basename(path)}: C = {res.value:.12g} bits (gap {res.gap_estimate:.3g})")
        rep.details.setdefault("optimizers", []).append(res.optimizer)
    return rep


def cmd_compound(cfg: ExperimentConfig) -> Report:
    rep = Report("compound-capacity")
    fam = as_family(_need(_load(cfg.inputs[0]), (CqChannel, IndexedChannelFamily), "a channel or family"))
    res = compound_capacity(fam, cfg.tol)
    rep.add("C_compound", res.value, res.gap_estimate)
    rep.lines.append(f"C_compound = {res.value:.12g} bits; active indices {list(res.active)}")
    rep.details.update(optimizer=res.optimizer, active=list(res.active))
    return rep


def cmd_avc(cfg: ExperimentConfig) -> Report:
    rep = Report("avc-capacity")
    fam = as_family(_need(_load(cfg.inputs[0]), (CqChannel, IndexedChannelFamily), "a channel or family"), "avc")
    res = avc_transmission_capacity(fam, cfg.tol, cfg.tol_symm)
    sym = bool(res.certificate.symmetrizable)
    if not sym:
        rep.add("C_ran", res.value, res.gap_estimate)
    rep.add("C_avc", res.value, res.gap_estimate, "symmetrizable" if sym else "")
    rep.lines.append(f"C_avc = {res.value:.12g} bits ({'symmetrizable' if sym else 'not symmetrizable'})")
    rep.details.update(optimizer=res.optimizer, state_weights=res.state_weights,
                       residual=res.certificate.residual)
    return rep


def cmd_symmetrizable(cfg: ExperimentConfig) -> Report:
    rep = Report("symmetrizable")
    fam = as_family(_need(_load(cfg.inputs[0]), (CqChannel, IndexedChannelFamily), "a channel or family"), "avc")
    cert = symmetrizability_check(fam, cfg.tol_symm)
    rep.add("symmetrizable", bool(cert.symmetrizable), cfg.tol_symm)
    rep.add("residual", cert.residual, cfg.tol_symm)
    rep.lines.append(f"symmetrizable: {_fmt(bool(cert.symmetrizable))}")
    if cert.tau is not None:
        rep.lines.append("tau (rows x, columns t):")
        rep.lines.extend("  " + " ".join(f"{v:.6g}" for v in row) for row in cert.tau)
    rep.details.update(tau=cert.tau, residual=cert.residual)
    return rep


def _wiretap(path: str) -> WiretapPair:
    return _need(_load(path), WiretapPair, "a wiretap document")


def cmd_secrecy_lb(cfg: ExperimentConfig) -> Report:
    rep = Report("secrecy-lb")
    wp = _wiretap(cfg.inputs[0])
    fn = {"point": secrecy_lower_bound_single_letter, "compound": compound_secrecy_lower_bound,
          "avc": avc_secrecy_lower_bound}[wp.flavour]
    res = fn(wp, u_size=cfg.options.get("u_size"), tol=cfg.tol, seed=cfg.seed)
    rep.add("secrecy_proxy", res.value, cfg.tol, "POSITIVE" if res.value > cfg.tol else "ZERO_PROXY")
    rep.lines.append(f"single-letter secrecy lower bound = {res.value:.12g} bits (|U| = {res.u_size})")
    rep.details.update(prior=res.prior, kernel=res.kernel, history=res.history)
    return rep


def cmd_id_build(cfg: ExperimentConfig) -> Report:
    rep = Report("id-build")
    o = cfg.options
    fam = as_family(_need(_load(cfg.inputs[0]), (CqChannel, IndexedChannelFamily), "a channel or family"))
    tc = build_transmission_code(fam, o["n"], o["M"], seed=cfg.seed, attempts=o["attempts"],
                                 decoder=o["decoder"], dim_guard=cfg.dim_guard)
    sf = gilbert_family(o["M"], o["epsilon"], o["lam"], o["N"], seed=cfg.seed)
    code = assemble_id_code(tc, sf)
    rep.add("lambda_transmission", tc.max_error)
    rep.add("max_intersection", sf.max_intersection(), None, f"k={sf.subset_size}")
    rep.add("lambda1", code.lambda1, tc.max_error, "ok" if code.lambda1 <= tc.max_error + 1e-12 else "VIOLATED")
    rep.add("lambda2", code.lambda2)
    rep.lines.append(f"ID code: N = {code.size}, n = {code.block_length}, lambda1 = {code.lambda1:.12g}, "
                     f"lambda2 = {code.lambda2:.12g}")
    if o.get("save"):
        save_code(code, o["save"])
        rep.lines.append(f"code written to {o['save']}")
    return rep


def cmd_id_eval(cfg: ExperimentConfig) -> Report:
    rep = Report("id-eval")
    code = _load_code(cfg.inputs[0])
    if isinstance(code, WiretapIdCode):
        code = code.code
    _need(code, IdCode, "an id-code bundle")
    ch = _need(_load(cfg.inputs[1]), (CqChannel, IndexedChannelFamily), "a channel or family")
    mode = cfg.options.get("mode") or (ch.semantics if isinstance(ch, IndexedChannelFamily) else "compound")
    res = evaluate_id_errors(code, ch, mode, enumeration_guard=cfg.enum_guard, seed=cfg.seed,
                             dim_guard=cfg.dim_guard)
    flag = "" if res.exact else "lower-bound"
    for i, j, t, err in res.rows():
        rep.add(f"error[{i},{j}]", err, None, f"t={_fmt(t)}")
    rep.add("lambda1", res.lambda1, None, flag)
    rep.add("lambda2", res.lambda2, None, flag)
    rep.lines.append(f"lambda1 = {res.lambda1:.12g} at {res.first_witness}; "
                     f"lambda2 = {res.lambda2:.12g} at {res.second_witness}"
                     + ("" if res.exact else " (sampled adversary: lower bounds)"))
    return rep


def cmd_seq_id(cfg: ExperimentConfig) -> Report:
    rep = Report("seq-id")
    o = cfg.options
    code = _need(_load_code(cfg.inputs[0]), IdCode, "an id-code bundle")
    ch = _need(_load(cfg.inputs[1]), (CqChannel, IndexedChannelFamily), "a channel or family")
    queries = [int(q) for q in o["queries"].split(",") if q.strip()]
    res = sequential_identification(code, ch, o["message"], queries, trials=o["trials"], seed=cfg.seed,
                                    epsilon=o.get("epsilon"), lam=o.get("lam"), dim_guard=cfg.dim_guard)
    for k, e in enumerate(res.per_query_error):
        rep.add(f"query_error[{k}]", float(e))
    rep.add("failure_rate", res.failure_rate, res.sigma)
    if res.k_bound is not None:
        rep.add("k_bound", res.k_bound)
        rep.add("claim_holds", bool(res.claim_holds))
    rep.lines.append(f"all {len(queries)} answers correct in {res.all_correct_rate:.6f} of {res.trials} trials")
    return rep


def cmd_wiretap_build(cfg: ExperimentConfig) -> Report:
    from .secrecy import build_wiretap_id_code

    rep = Report("wiretap-id-build")
    o = cfg.options
    wp = _wiretap(cfg.inputs[0])
    code = build_wiretap_id_code(wp, o["n"], o["M_outer"], o["M_inner"], o["N"], seed=cfg.seed,
                                 attempts=o["attempts"], dim_guard=cfg.dim_guard)
    bound = code.lambda_outer + code.lambda_inner
    rep.add("lambda_outer", code.lambda_outer)
    rep.add("lambda_inner", code.lambda_inner)
    rep.add("lambda1", code.lambda1, bound, "ok" if code.lambda1 <= bound + 1e-12 else "VIOLATED")
    rep.add("lambda2", code.lambda2)
    rep.add("mu", code.mu)
    rep.add("mu_inner", code.mu_inner)
    pooled = pooled_collision_statistics(code.colorings, code.inner_size)
    rep.add("collision_mean", pooled.mean, pooled.sigma, f"expected={1 / code.inner_size:.12g}")
    if code.size > 1:
        cs = collision_statistics(code, (0, 1), o["lam"])
        rep.add("existence_lhs", cs.existence_lhs, None, "holds" if cs.existence_holds else "fails")
    cap = compound_capacity(as_family(wp.legal), cfg.tol).value
    rate = implied_rate_report(o["n"], o["M_outer"], cap, o["lam"], o["N"])
    rep.add("implied_epsilon", rate.epsilon)
    rep.add("loglogN_predicted", rate.log_log_predicted, None, rate.note and "vacuous")
    rep.lines.append(f"wiretap ID code: N = {code.size}, lambda1 = {code.lambda1:.12g} "
                     f"(<= {bound:.12g}), lambda2 = {code.lambda2:.12g}, mu = {code.mu:.12g}")
    if o.get("save"):
        save_code(code, o["save"])
        rep.lines.append(f"code written to {o['save']}")
    return rep


def cmd_dichotomy(cfg: ExperimentConfig) -> Report:
    rep = Report("dichotomy")
    wp = _wiretap(cfg.inputs[0])
    kw = dict(tol=cfg.tol, seed=cfg.seed, u_size=cfg.options.get("u_size"))
    if wp.flavour == "avc":
        kw["tol_symm"] = cfg.tol_symm
    res = dichotomy(wp, **kw)
    rep.add("C", res.transmission_capacity, res.capacity_gap)
    rep.add("C_SID", res.sid_capacity, None, res.secrecy_positive)
    rep.lines.append(f"C_SID = {res.sid_capacity:.12g} ({res.secrecy_positive})")
    rep.lines.extend("  " + r for r in res.rationale)
    rep.details.update(rationale=res.rationale)
    return rep


def cmd_distance(cfg: ExperimentConfig) -> Report:
    rep = Report("distance")
    a, b = _load(cfg.inputs[0]), _load(cfg.inputs[1])
    if isinstance(a, WiretapPair) and isinstance(b, WiretapPair):
        d, name = wiretap_distance(a, b), "d_S" if a.flavour == b.flavour == "point" else "D_S"
    elif isinstance(a, CqChannel) and isinstance(b, CqChannel):
        d, name = channel_distance(a, b), "d"
    elif not isinstance(a, WiretapPair) and not isinstance(b, WiretapPair):
        d, name = family_distance(a, b), "D"
    else:
        raise PreconditionError("cannot compare a wiretap pair with a plain channel")
    rep.add(name, d)
    rep.lines.append(f"{name} = {d:.12g}")
    return rep


def cmd_discontinuity(cfg: ExperimentConfig) -> Report:
    rep = Report("discontinuity-probe")
    o = cfg.options
    wp = _wiretap(cfg.inputs[0])
    fn = discontinuity_probe_point if wp.flavour == "point" else discontinuity_probe_compound
    if wp.flavour == "avc":
        raise PreconditionError("discontinuity probe covers point and compound pairs")
    res = fn(wp, o["epsilon"], search_budget=o["budget"], seed=cfg.seed, tol=cfg.tol)
    rep.add("C", res.capacity, None, "positive" if res.capacity_positive else "zero")
    rep.add("secrecy_proxy", res.proxy, cfg.tol, "zero" if res.proxy_zero else "positive")
    rep.add("condition3", res.condition3)
    if res.witness is not None:
        rep.add("witness_distance", res.witness_distance, o["epsilon"])
        rep.add("witness_proxy", res.witness_proxy, cfg.tol)
    rep.add("discontinuity_candidate", res.is_candidate)
    rep.lines.append(f"(1) C > 0: {_fmt(res.capacity_positive)}; (2) proxy zero: {_fmt(res.proxy_zero)}; "
                     f"(3) {res.condition3}")
    return rep


def cmd_superactivation(cfg: ExperimentConfig) -> Report:
    rep = Report("superactivation")
    a, b = _wiretap(cfg.inputs[0]), _wiretap(cfg.inputs[1])
    res = superactivation_check(a, b, cfg.tol, cfg.tol_symm, seed=cfg.seed, dim_guard=cfg.dim_guard)
    for name, c in (("first", res.first), ("second", res.second), ("tensor", res.tensor)):
        rep.add(f"{name}.symmetrizable", bool(c.symmetrizable))
        rep.add(f"{name}.secrecy", c.secrecy)
        rep.add(f"{name}.C_SID", c.sid)
    rep.add("verdict", res.verdict)
    rep.add("superadditivity", bool(res.superadditivity))
    rep.lines.append(f"verdict: {res.verdict}")
    rep.lines.extend("  " + r for r in res.reasons)
    return rep


COMMANDS = {
    "capacity": (cmd_capacity, "Holevo capacity of cq channels"),
    "compound-capacity": (cmd_compound, "max-min capacity of a compound family"),
    "avc-capacity": (cmd_avc, "AVC capacity (0 if symmetrizable, else C_ran)"),
    "symmetrizable": (cmd_symmetrizable, "LP symmetrizability check"),
    "secrecy-lb": (cmd_secrecy_lb, "single-letter secrecy lower bound"),
    "id-build": (cmd_id_build, "build a transmission code, a set family and the ID code"),
    "id-eval": (cmd_id_eval, "worst-case ID errors of a code bundle"),
    "seq-id": (cmd_seq_id, "sequential identification simulation"),
    "wiretap-id-build": (cmd_wiretap_build, "two-layer wiretap ID code"),
    "dichotomy": (cmd_dichotomy, "secure ID capacity by the dichotomy rule"),
    "distance": (cmd_distance, "channel / family / wiretap distance"),
    "discontinuity-probe": (cmd_discontinuity, "check the discontinuity conditions"),
    "superactivation": (cmd_superactivation, "super-activation case analysis"),
}

_INPUTS = {
    "capacity": ("channels", "+"), "distance": ("inputs", 2), "superactivation": ("inputs", 2),
    "id-eval": ("inputs", 2), "seq-id": ("inputs", 2),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--tol-symm", type=float, default=1e-7)
    common.add_argument("--dim-guard", type=int, default=4096)
    common.add_argument("--enum-guard", type=int, default=1_000_000)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--out", default=None)
    parser = argparse.ArgumentParser(prog="cqid", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"cqid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        dest, nargs = _INPUTS.get(name, ("inputs", 1))
        p.add_argument("inputs", nargs=nargs, metavar="PATH")
        subs[name] = p
    subs["secrecy-lb"].add_argument("--u-size", type=int, default=None)
    subs["dichotomy"].add_argument("--u-size", type=int, default=None)
    p = subs["id-build"]
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--attempts", type=int, default=8)
    p.add_argument("--decoder", choices=("pgm", "ml"), default="pgm")
    p.add_argument("--save", default=None)
    subs["id-eval"].add_argument("--mode", choices=("compound", "avc"), default=None)
    p = subs["seq-id"]
    p.add_argument("--message", type=int, required=True)
    p.add_argument("--queries", required=True, help="comma-separated message indices")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--lam", type=float, default=None)
    p = subs["wiretap-id-build"]
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M-outer", type=int, required=True)
    p.add_argument("--M-inner", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--attempts", type=int, default=8)
    p.add_argument("--save", default=None)
    p = subs["discontinuity-probe"]
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--budget", type=int, default=20)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    core = {"command", "inputs", "seed", "tol", "tol_symm", "dim_guard", "enum_guard", "format", "out"}
    options = {k: v for k, v in vars(args).items() if k not in core}
    return ExperimentConfig(args.command, list(args.inputs), args.seed, args.tol, args.tol_symm,
                            args.dim_guard, args.enum_guard, args.out, args.format, options)


def run(cfg: ExperimentConfig) -> Report:
    fn, _ = COMMANDS[cfg.command]
    return fn(cfg)


# ---------------------------------------------------------------------------
# output


def emit_plot_data(report: Report | None, stream=None) -> str:
    """CSV with one line per ReportRow and a fixed column order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in (report.rows if report is not None else []):
        w.writerow([r.experiment, r.quantity, _fmt(_plain(r.value)),
                    "" if r.tolerance is None else _fmt(float(r.tolerance)), r.flag])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def structured_document(cfg: ExperimentConfig, report: Report) -> str:
    doc = {
        "config": _plain(asdict(cfg)),
        "versions": {"cqid": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "rows": [_plain(asdict(r)) for r in report.rows],
        "details": _plain(report.details),
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def render_text(report: Report) -> str:
    out = list(report.lines)
    for r in report.rows:
        extra = []
        if r.tolerance is not None:
            extra.append(f"tol {_fmt(float(r.tolerance))}")
        if r.flag:
            extra.append(str(r.flag))
        suffix = f"  [{', '.join(extra)}]" if extra else ""
        out.append(f"{r.quantity} = {_fmt(_plain(r.value))}{suffix}")
    return "\n".join(out) + "\n"


def render(cfg: ExperimentConfig, report: Report) -> str:
    if cfg.format == "json":
        return structured_document(cfg, report)
    if cfg.format == "csv":
        return emit_plot_data(report)
    return render_text(report)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = config_from_args(args)
    try:
        report = run(cfg)
    except PreconditionError as exc:
        print(f"cqid {cfg.command}: precondition error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SolverError as exc:
        print(f"cqid {cfg.command}: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = render(cfg, report)
    if cfg.output:
        try:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cqid {cfg.command}: cannot write {cfg.output}: {exc.strerror}", file=sys.stderr)
            return EXIT_PRECONDITION
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
