import json

import pytest

from sessionkit import cli, fixtures


@pytest.fixture
def sat(tmp_path):
    p = tmp_path / "sat.st"
    p.write_text(fixtures.SATELLITE_TYPES)
    return str(p)


@pytest.fixture
def sw(tmp_path):
    p = tmp_path / "sw.st"
    p.write_text(fixtures.SERVER_WORKER_TYPES)
    return str(p)


@pytest.fixture
def server(tmp_path):
    p = tmp_path / "server.cap"
    p.write_text(fixtures.SERVER_PROGRAM)
    return str(p)


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_subtype_yes_exit_0(capsys, sat):
    code, out = run(capsys, "subtype", "--rel", "fair", sat, "S", "U")
    assert code == 0
    assert "yes" in out and "witness" in out


def test_subtype_no_exit_1(capsys, sat):
    code, out = run(capsys, "subtype", "--rel", "sync", sat, "S", "U")
    assert code == 1
    assert "counterexample" in out


def test_compose_unknown_exit_2(capsys, sw):
    code, out = run(capsys, "compose", sw, "S", "U", "--max-pairs", "2000")
    assert code == 2
    assert "unknown" in out


def test_parse_round_trip(capsys, sat, tmp_path):
    code, out = run(capsys, "parse", sat)
    assert code == 0
    p2 = tmp_path / "again.st"
    p2.write_text(out)
    code2, out2 = run(capsys, "parse", str(p2))
    assert code2 == 0


def test_dual_and_labels(capsys, sat):
    code, out = run(capsys, "dual", sat, "S")
    assert code == 0 and out.startswith("type dual_S")
    code, out = run(capsys, "labels", sat, "S", "--dir", "out", "--mode", "must")
    assert code == 0 and set(out.split()) == {"!cmd", "!stop"}


def test_step(capsys, sat):
    code, _ = run(capsys, "step", sat, "S", "--label", "!cmd")
    assert code == 0
    code, _ = run(capsys, "step", sat, "S", "--label", "?cmd")
    assert code == 1


def test_typecheck_assume(capsys, server):
    code, out = run(capsys, "typecheck", server, "--assume", "cut-y")
    assert code == 2  # conditional: the assumption is recorded, not proved
    assert "assumed" in out


def test_run_and_probe(capsys, server):
    code, out = run(capsys, "run", server, "--scheduler", "minmeasure",
                    "--max-steps", "200")
    assert code == 0 and "DoneReached" in out
    code, _ = run(capsys, "probe", server, "--budget", "500")
    assert code == 0


def test_run_writes_trace(capsys, server, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, _ = run(capsys, "run", server, "--trace", str(trace))
    assert code == 0
    lines = trace.read_text().strip().splitlines()
    assert lines
    for line in lines:
        entry = json.loads(line)
        assert "rule" in entry


def test_qm_commands(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps(fixtures.QM_COUNTDOWN))
    code, out = run(capsys, "qm-sim", str(m), "--input", "aa")
    assert code == 0 and "Accepted" in out
    code, out = run(capsys, "qm-encode", str(m), "--input", "a")
    assert code == 0 and "type" in out


def test_json_mode(capsys, sat):
    code, out = run(capsys, "--json", "subtype", "--rel", "fair", sat, "S", "U")
    assert code == 0
    blob = json.loads(out)
    assert blob["answer"] == "yes"
    assert blob["witness"]


def test_corpus_list(capsys):
    code, out = run(capsys, "corpus", "list")
    assert code == 0
    assert len(out.strip().splitlines()) >= 15
    for name in ("satellite-subtyping", "slot-machine-fair", "failed-variance",
                 "server-worker-compose", "output-anticipation"):
        assert name in out


def test_usage_errors_exit_3(capsys, tmp_path):
    assert cli.main(["bogus"]) == 3
    capsys.readouterr()
    missing = str(tmp_path / "nope.st")
    assert cli.main(["parse", missing]) == 3
    bad = tmp_path / "bad.st"
    bad.write_text("type S = +{")
    assert cli.main(["parse", str(bad)]) == 3
