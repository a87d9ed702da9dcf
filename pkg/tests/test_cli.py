import json

from bakerakhiezer.cli import main


def test_list(capsys):
    assert main(["list-identities"]) == 0
    assert "cmm" in capsys.readouterr().out


def test_verify_a1(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    code = main(["verify", "--case", "b", "--family", "A", "--rank", "1", "--m", "1",
                 "--identity", "eigen", "--identity", "cmm", "--out", str(out)])
    assert code == 0
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert recs and all(r["verdict"] == "pass" for r in recs)


def test_tolerance_error_exit(tmp_path):
    out = tmp_path / "r.jsonl"
    code = main(["verify", "--family", "A", "--rank", "1", "--m", "1", "--identity", "cmm",
                 "--tol", "0", "--out", str(out)])
    assert code == 3
    rec = json.loads(out.read_text().splitlines()[0])
    assert rec["verdict"] == "error" and rec["error"] == "ToleranceUnreachable"


def test_bad_identity():
    assert main(["verify", "--identity", "nope"]) == 1


def test_bad_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"ell": "two"}))
    assert main(["verify", "--config", str(p)]) == 1


def test_not_admissible():
    assert main(["construct", "--case", "c", "--family", "C", "--rank", "1",
                 "--m", "1/2,0,1/2,0,0", "--ell", "3"]) == 2


def test_construct_json(capsys):
    assert main(["construct", "--family", "A", "--rank", "1", "--m", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["terms"]) == 2


def test_describe(capsys):
    assert main(["describe-datum", "--family", "B", "--rank", "2", "--m", "1,2"]) == 0
    assert json.loads(capsys.readouterr().out)
