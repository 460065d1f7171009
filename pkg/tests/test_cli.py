"""End-to-end command-line behavior: exit codes, formats, determinism."""

import pytest

from epskit.cli import main
from epskit import parse_cipher, parse_joint


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def skewed4(tmp_path):
    return write(tmp_path, "skewed4.dist", "a\t0.3\nb\t0.3\nc\t0.3\nd\t0.1\n")


@pytest.fixture
def ninety_ten(tmp_path):
    return write(tmp_path, "ninety.dist", "hi\t0.9\nlo\t0.1\n")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------


def test_analyze_prints_floors(skewed4, capsys):
    code, out, _ = run(capsys, "analyze", skewed4)
    assert code == 0
    assert "H(U): 1.8955 bits" in out
    assert "min mass pi: 1/10" in out
    assert ">= 2.0000 bits" in out


def test_analyze_rejects_undersized_candidate_key(skewed4, tmp_path, capsys):
    key1 = write(tmp_path, "key1.dist", "r0\t0.4\nr1\t0.2\nr2\t0.2\nr3\t0.2\n")
    code, out, _ = run(capsys, "analyze", skewed4, "--candidate-key", key1)
    assert code == 1
    assert "key_entropy_floor\t1.9219\t2.0000\tFAIL" in out
    key2 = write(tmp_path, "key2.dist", "r0\t0.4\nr1\t0.15\nr2\t0.15\nr3\t0.15\nr4\t0.15\n")
    code, out, _ = run(capsys, "analyze", skewed4, "--candidate-key", key2)
    assert code == 1
    assert "max_key_mass\t2/5\t1/4\tFAIL" in out
    assert "key_entropy_floor\t2.1710\t2.0000\tPASS" in out


def test_analyze_nats(skewed4, capsys):
    code, out, _ = run(capsys, "analyze", skewed4, "--base", "e")
    assert code == 0
    assert "nats" in out
    assert "H(U): 1.3138 nats" in out  # 1.8955 * ln 2


def test_build_writes_cipher_and_joint(skewed4, tmp_path, capsys):
    cipher_path = str(tmp_path / "out.cipher")
    joint_path = str(tmp_path / "out.joint")
    code, out, _ = run(
        capsys, "build", skewed4, "--scheme", "partition",
        "--out", cipher_path, "--joint-out", joint_path,
    )
    assert code == 0
    assert "consumption I(R;UX): 1.8955 bits" in out
    assert "channel uses ceil(log2 theta): 4" in out
    spec = parse_cipher((tmp_path / "out.cipher").read_text())
    assert spec.name.startswith("partition")
    joint = parse_joint((tmp_path / "out.joint").read_text())
    assert len(joint.r_labels) == 10


def test_build_refuses_giant_theta(tmp_path, capsys):
    dist = write(tmp_path, "big.dist", "a\t9999/10000\nb\t1/10000\n")
    code, _, err = run(capsys, "build", dist, "--scheme", "partition")
    assert code == 2
    assert "too large" in err


def test_verify_accepts_built_joint(skewed4, tmp_path, capsys):
    joint_path = str(tmp_path / "otp.joint")
    run(capsys, "build", skewed4, "--scheme", "otp", "--joint-out", joint_path)
    code, out, _ = run(capsys, "verify", joint_path, "--format", "table")
    assert code == 0
    assert "CHECK\tsecrecy\t0\t0\tPASS" in out
    assert "one_shot.max_key_mass" in out
    assert "min_channel.consumption_equals_log_message_count" in out
    assert "FAIL" not in out


def test_verify_flags_perturbed_joint(tmp_path, capsys):
    joint_path = write(
        tmp_path,
        "broken.joint",
        "0\t0\t0\t3/8\n1\t0\t1\t1/8\n0\t1\t1\t1/4\n1\t1\t0\t1/4\n",
    )
    code, out, err = run(capsys, "verify", joint_path, "--format", "table")
    assert code == 1
    assert "CHECK\tsecrecy" in out and "FAIL" in out
    assert "secrecy" in err


def test_verify_json_mode(skewed4, tmp_path, capsys):
    import json

    joint_path = str(tmp_path / "otp.joint")
    run(capsys, "build", skewed4, "--scheme", "otp", "--joint-out", joint_path)
    code, out, _ = run(capsys, "verify", joint_path, "--json")
    assert code == 0
    first = out.index("{")
    decoder = json.JSONDecoder()
    payload, _ = decoder.raw_decode(out[first:])
    assert payload["is_eps"] is True


def test_tables_golden(capsys):
    code, out, _ = run(capsys, "tables", "--which", "1")
    assert code == 0
    assert "huffman\t2.357\t6" in out
    assert "shannon\t2.679\t5" in out
    assert "partition\t2.291\t5" in out
    assert out.count("PASS") == 3
    code, out, _ = run(capsys, "tables", "--which", "2")
    assert code == 0
    assert "partition (9,1)\t0.469\t4" in out
    assert out.count("PASS") == 4


def test_simulate_deterministic_and_correct(ninety_ten, capsys):
    code, out1, _ = run(capsys, "simulate", ninety_ten, "--scheme", "cep-shannon",
                        "--rounds", "6", "--seed", "42")
    assert code == 0
    code, out2, _ = run(capsys, "simulate", ninety_ten, "--scheme", "cep-shannon",
                        "--rounds", "6", "--seed", "42")
    assert out1 == out2
    assert out1.count("\tyes") == 6
    assert "expected consumption per round: 1.3000 bits" in out1


def test_recycle_writes_plan(tmp_path, capsys):
    target = write(tmp_path, "t.dist", "s0\t1/8\ns1\t1/8\ns2\t1/8\ns3\t1/8\ns4\t1/2\n")
    residual = write(tmp_path, "r.dist", "k0\t1/2\nk1\t1/2\n")
    plan_path = str(tmp_path / "plan.txt")
    code, out, _ = run(capsys, "recycle", "--target", target, "--residual", residual,
                       "--out", plan_path)
    assert code == 0
    assert "upper bound (gain <= residual): PASS" in out
    text = (tmp_path / "plan.txt").read_text()
    assert text.startswith("#epskit-v1 extraction-plan")
    assert "TARGET" in text and "ASSIGN" in text


def test_sweep_csv(ninety_ten, tmp_path, capsys):
    out_path = str(tmp_path / "sweep.csv")
    code, _, _ = run(capsys, "sweep", ninety_ten, "--thetas", "10,100", "--out", out_path)
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "theta,consumption,divergence,h_x"
    assert len(lines) == 3


def test_frontier_csv(skewed4, capsys):
    code, out, _ = run(capsys, "frontier", skewed4, "--grid", "5", "--gamma-max", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "gamma,consumption,h_x,witness"
    assert len(lines) == 6
    assert lines[1].split(",")[1] == "2.0000"


def test_usage_errors_exit_two(capsys, tmp_path):
    assert main(["no-such-command"]) == 2
    assert main(["analyze"]) == 2
    missing = str(tmp_path / "missing.dist")
    code, _, err = run(capsys, "analyze", missing)
    assert code == 2
    bad = write(tmp_path, "bad.dist", "a\tnot-a-number\n")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 2
    assert "error:" in err
