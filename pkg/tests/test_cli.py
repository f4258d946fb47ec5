import json

from zecap.cli import main
from zecap.linalg import max_abs
from zecap.specio import channel_from_spec, make_builtin


def run(args):
    return main(args)


def read_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_verify_e21_core_suites(tmp_path):
    out = tmp_path / "report.json"
    code = run(["verify", "--builtin", "e21",
                "--suite", "properties,ce,two-use,privacy",
                "--seed", "7", "--restarts", "120", "--out", str(out)])
    assert code == 0
    doc = read_report(out)
    assert doc["verdict"] == "pass"
    names = {c["name"] for c in doc["checks"]}
    assert "properties/exact/transpose[0]" in names
    assert "ce/alpha-local-one" in names
    assert "two-use/A'/orthogonal" in names
    assert "privacy/AB" in names


def test_verify_em1_suites(tmp_path):
    out = tmp_path / "report.json"
    code = run(["verify", "--builtin", "em1:3",
                "--suite", "properties,ce,two-use,privacy",
                "--seed", "3", "--restarts", "120", "--out", str(out)])
    assert code == 0
    assert read_report(out)["verdict"] == "pass"


def test_verify_variant_slot_b_passes(tmp_path):
    out = tmp_path / "report.json"
    code = run(["verify", "--builtin", "variant34", "--suite", "properties",
                "--slots", "B", "--seed", "1", "--out", str(out)])
    assert code == 0
    assert read_report(out)["verdict"] == "pass"


def test_verify_variant_slot_a_fails(tmp_path):
    out = tmp_path / "report.json"
    code = run(["verify", "--builtin", "variant34", "--suite", "properties",
                "--slots", "A,B", "--seed", "1", "--out", str(out)])
    assert code == 1
    doc = read_report(out)
    assert doc["verdict"] == "fail"
    failed = [c["name"] for c in doc["checks"] if not c["passed"]]
    assert any("@0" in name for name in failed)
    assert all("@1" not in name for name in failed)


def test_verify_e12_teleport(tmp_path):
    out = tmp_path / "report.json"
    code = run(["verify", "--builtin", "e12", "--suite", "all",
                "--seed", "5", "--out", str(out)])
    assert code == 0
    doc = read_report(out)
    assert doc["verdict"] == "pass"
    names = {c["name"] for c in doc["checks"]}
    assert "teleport/codeword-0" in names
    assumed = [c for c in doc["checks"]
               if c["name"] == "teleport/assumed-indistinguishable"]
    assert assumed and assumed[0]["informational"]


def test_verify_inapplicable_suite_is_usage_error(tmp_path):
    code = run(["verify", "--builtin", "e12", "--suite", "ce",
                "--out", str(tmp_path / "r.json")])
    assert code == 3


def test_verify_reports_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["verify", "--builtin", "em1:3", "--suite", "properties,two-use",
            "--seed", "11"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_renyi_gap_e21(tmp_path):
    out = tmp_path / "gap.json"
    code = run(["renyi-gap", "--builtin", "e21", "--budget", "300",
                "--seed", "2", "--out", str(out)])
    assert code == 0
    doc = read_report(out)
    assert doc["verdict"] == "pass"
    assert doc["extra"]["single_use_floor"] == 4
    assert doc["extra"]["two_use_rank"] == 15
    assert len(doc["extra"]["witness"]) == 16


def test_renyi_gap_needs_two_senders(tmp_path):
    code = run(["renyi-gap", "--builtin", "em1:3",
                "--out", str(tmp_path / "r.json")])
    assert code == 3


def test_renyi_gap_full_space_spec(tmp_path):
    unit = {"r": [1, 1], "s": [0, 1]}
    spec = {
        "format": "zecap-channel/1",
        "name": "full-span",
        "kind": "binary-projective",
        "sender_dims": [2, 2],
        "receiver_dims": [2],
        "u_slots": [0, 1],
        "s0_basis": [[{"index": i, "coeff": {"re": unit}}] for i in range(4)],
    }
    path = tmp_path / "full.json"
    path.write_text(json.dumps(spec))
    out = tmp_path / "gap.json"
    code = run(["renyi-gap", "--spec", str(path), "--budget", "50",
                "--seed", "0", "--out", str(out)])
    assert code == 0
    doc = read_report(out)
    checks = {c["name"]: c for c in doc["checks"]}
    assert checks["renyi/verdict"]["value"] == "no-gap"


def test_describe_builtins(tmp_path):
    for name, basis_count in [("e21", 8), ("em1:4", 8), ("variant34", 6)]:
        out = tmp_path / "spec.json"
        assert run(["describe", name, "--out", str(out)]) == 0
        doc = read_report(out)
        assert len(doc["s0_basis"]) == basis_count
    assert run(["describe", "e12", "--out", str(tmp_path / "e12.json")]) == 0
    doc = read_report(tmp_path / "e12.json")
    assert doc["kind"] == "cq"
    assert len(doc["outputs"]) == 2


def test_describe_unknown_builtin():
    assert run(["describe", "nonsense"]) == 3


def test_describe_roundtrip_through_file(tmp_path):
    spec_path = tmp_path / "e21.json"
    assert run(["describe", "e21", "--out", str(spec_path)]) == 0
    report = tmp_path / "report.json"
    code = run(["verify", "--spec", str(spec_path), "--suite", "properties",
                "--seed", "0", "--out", str(report)])
    assert code == 0
    original = make_builtin("e21")
    loaded = channel_from_spec(read_report(spec_path))
    assert max_abs(loaded.payload.s0.projector
                   - original.payload.s0.projector) < 1e-12


def test_malformed_spec_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "zecap-channel/1", "kind": "mystery",
                               "sender_dims": [2], "receiver_dims": [2]}))
    code = run(["verify", "--spec", str(bad), "--suite", "properties"])
    assert code == 3


def test_missing_channel_argument_is_usage_error():
    assert run(["verify", "--suite", "properties"]) == 3


def test_seed_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("ZECAP_SEED", "123")
    out = tmp_path / "r.json"
    assert run(["verify", "--builtin", "em1:3", "--suite", "two-use",
                "--out", str(out)]) == 0
    assert read_report(out)["seed"] == 123
