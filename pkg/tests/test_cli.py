import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from cqid import cli
from cqid.channels import bsc, save_channel
from cqid.errors import ConvergenceFailure
from cqid.idcodes import evaluate_id_errors, load_code

import oracles

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return {r["quantity"]: r for r in csv.DictReader(io.StringIO(text))}


def test_capacity_bsc(capsys):
    code, out, _ = run(capsys, "capacity", CORPUS / "bsc01.chan", "--format", "csv")
    assert code == 0
    value = float(rows_of(out)["C"]["value"])
    assert value == pytest.approx(1 - oracles.h2(0.1), abs=1e-9)


def test_symmetrizable_swapped_pair(capsys):
    code, out, _ = run(capsys, "symmetrizable", CORPUS / "swapped-pair.chan")
    assert code == 0
    assert "symmetrizable: true" in out
    assert "tau" in out


def test_dichotomy_noiseless_constant(capsys):
    code, out, _ = run(capsys, "dichotomy", CORPUS / "noiseless-w-constant-v.chan")
    assert code == 0
    assert "C_SID = 1 (POSITIVE)" in out


@pytest.mark.parametrize("argv", [
    ("compound-capacity", "bsc-pair.chan"),
    ("avc-capacity", "noisy-avc.chan"),
    ("avc-capacity", "swapped-pair.chan"),
    ("secrecy-lb", "bsc-wiretap.chan"),
    ("distance", "bsc01.chan", "bsc01.chan"),
    ("superactivation", "avwc-symmetrizable.chan", "avwc-copied.chan"),
    ("discontinuity-probe", "v-equals-w.chan", "--epsilon", "0.1", "--budget", "3"),
])
def test_subcommands_succeed(capsys, argv):
    args = [argv[0]] + [CORPUS / a if a.endswith(".chan") else a for a in argv[1:]]
    code, out, err = run(capsys, *args)
    assert code == 0, err
    assert out


def test_exit_codes(capsys, tmp_path, monkeypatch):
    code, _, err = run(capsys, "capacity", tmp_path / "missing.chan")
    assert code == 2 and "precondition" in err
    bad = tmp_path / "bad.chan"
    bad.write_text('{"kind": "cq", "alphabet_size": 2,')
    assert run(capsys, "capacity", bad)[0] == 2
    # a family where a single channel is required
    assert run(capsys, "capacity", CORPUS / "bsc-pair.chan")[0] == 2
    # set-family precondition violated
    code, _, _ = run(capsys, "id-build", CORPUS / "bsc01.chan", "--n", "3", "--M", "8", "--N", "2",
                     "--epsilon", "0.25", "--lam", "0.9")
    assert code == 2
    assert run(capsys, "capacity", CORPUS / "bsc01.chan", "--out", tmp_path / "no" / "dir.txt")[0] == 2

    def fail(*a, **k):
        raise ConvergenceFailure("no convergence")

    monkeypatch.setattr(cli, "holevo_capacity", fail)
    code, _, err = run(capsys, "capacity", CORPUS / "bsc01.chan")
    assert code == 3 and "solver error" in err


def test_id_build_eval_round_trip(capsys, tmp_path):
    bundle = tmp_path / "code.json"
    code, out, err = run(capsys, "id-build", CORPUS / "bsc01.chan", "--n", "4", "--M", "16", "--N", "5",
                         "--epsilon", "0.0625", "--lam", "0.9", "--save", bundle, "--format", "csv")
    assert code == 0, err
    built = rows_of(out)
    code, out, err = run(capsys, "id-eval", bundle, CORPUS / "bsc01.chan", "--format", "csv")
    assert code == 0, err
    rows = rows_of(out)
    assert float(rows["lambda1"]["value"]) == pytest.approx(float(built["lambda1"]["value"]), abs=1e-12)
    # error grid passes through unchanged
    res = evaluate_id_errors(load_code(bundle), bsc(0.1))
    for i, j, t, err_ij in res.rows():
        assert float(rows[f"error[{i},{j}]"]["value"]) == pytest.approx(err_ij, rel=1e-11, abs=1e-15)
    code, out, err = run(capsys, "seq-id", bundle, CORPUS / "bsc01.chan", "--message", "0",
                         "--queries", "1,0,2", "--trials", "500")
    assert code == 0, err


def test_wiretap_build(capsys, tmp_path):
    code, out, err = run(capsys, "wiretap-id-build", CORPUS / "bsc-wiretap.chan", "--n", "4",
                         "--M-outer", "8", "--M-inner", "2", "--N", "4", "--attempts", "2",
                         "--format", "csv")
    assert code == 0, err
    rows = rows_of(out)
    assert float(rows["lambda1"]["value"]) <= (float(rows["lambda_outer"]["value"])
                                              + float(rows["lambda_inner"]["value"]) + 1e-12)


def test_json_is_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / "report.json"
        assert run(capsys, "secrecy-lb", CORPUS / "bsc-wiretap.chan", "--seed", "7", "--format", "json",
                   "--out", path)[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["config"]["seed"] == 7 and "numpy" in doc["versions"]


def test_emit_plot_data():
    assert cli.emit_plot_data(cli.Report("empty")) == "experiment,quantity,value,tolerance,flag\n"
    rep = cli.Report("sweep")
    ps = [round(0.1 * k, 1) for k in range(6)]
    for p in ps:
        rep.add("C", cli.holevo_capacity(bsc(p), 1e-9).value, None, f"p={p}")
    values = [float(r["value"]) for r in csv.DictReader(io.StringIO(cli.emit_plot_data(rep)))]
    assert values[0] == pytest.approx(1.0, abs=1e-9) and values[-1] == pytest.approx(0.0, abs=1e-9)
    assert all(a > b for a, b in zip(values, values[1:]))
    for p, v in zip(ps, values):
        assert v == pytest.approx(1 - oracles.h2(p), abs=1e-9)


def test_parallel_map_is_ordered(monkeypatch):
    monkeypatch.setenv("CQID_THREADS", "4")
    assert cli.parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    monkeypatch.setenv("CQID_THREADS", "bogus")
    assert cli.thread_count() == 1


def test_twelve_digit_fidelity(capsys, tmp_path):
    path = tmp_path / "b.chan"
    save_channel(bsc(0.123456789), path)
    code, out, _ = run(capsys, "capacity", path, "--format", "csv", "--tol", "1e-10")
    assert code == 0
    value = float(rows_of(out)["C"]["value"])
    assert value == pytest.approx(1 - oracles.h2(0.123456789), rel=1e-11)
    assert np.isfinite(value)
