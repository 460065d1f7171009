"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Everything here goes through the public API; expected numbers come
from printed benchmark values (5e-4 tolerance) or from independent oracles
computed inside the tests.
"""

import math
import random
from fractions import Fraction
from itertools import product

import pytest
from conftest import example3_joint, random_source, strict_feasible_by_lp

from epskit import (
    FiniteDist,
    binary_entropy,
    build_compress_encrypt_pad,
    build_example2,
    build_one_time_pad,
    build_partition_code,
    check_candidate_marginal,
    check_eps,
    entropy,
    enumerate_decoding_systems,
    extraction_metrics,
    build_extraction,
    huffman_code,
    induced_joint,
    info_report,
    is_independent,
    key_metrics,
    max_target_preimages,
    pad_ciphertext,
    partition_channel_uses,
    psi_exact,
    psi_floor,
    scenario_independent_pads,
    scenario_message_reused_as_key,
    scenario_recycled_bit,
    shannon_code,
    theta_sweep,
    tradeoff_frontier,
)

F = Fraction
TOL_PRINTED = 5e-4
TOL_BITS = 1e-9


def report(criterion: int, text: str) -> None:
    print(f"ACCEPTANCE {criterion:02d}: PASS - {text}")


# ---------------------------------------------------------------------------


def test_criterion_01_table1_reproduction():
    phi = (1, 1, 1, 3, 4, 7, 11)
    source = FiniteDist.from_masses([F(v, 28) for v in phi], labels=range(1, 8))

    rep_h = info_report(induced_joint(build_compress_encrypt_pad(source, huffman_code(source))))
    assert rep_h.i_r_uxjoint == pytest.approx(2.357, abs=TOL_PRINTED)
    assert rep_h.h_x == pytest.approx(6.0, abs=TOL_BITS)

    rep_s = info_report(induced_joint(build_compress_encrypt_pad(source, shannon_code(source))))
    assert rep_s.i_r_uxjoint == pytest.approx(2.679, abs=TOL_PRINTED)
    assert rep_s.h_x == pytest.approx(5.0, abs=TOL_BITS)

    rep_p = info_report(induced_joint(build_partition_code(source, list(phi))))
    assert rep_p.i_r_uxjoint == pytest.approx(2.291, abs=TOL_PRINTED)
    assert rep_p.i_r_uxjoint == pytest.approx(rep_p.h_u, abs=TOL_BITS)
    assert partition_channel_uses(28) == 5
    report(1, "table-1 schemes reproduce (huffman 2.357/6, shannon 2.679/5, partition 2.291/5)")


def test_criterion_02_table2_reproduction():
    source = FiniteDist.from_masses([F(9, 10), F(1, 10)], labels=(1, 2))
    results = {}
    for name, code_fn in (("huffman", huffman_code), ("shannon", shannon_code)):
        rep = info_report(induced_joint(build_compress_encrypt_pad(source, code_fn(source))))
        results[name] = (rep.i_r_uxjoint, round(rep.h_x))
    for name, psi in (("partition91", [9, 1]), ("partition11", [1, 1])):
        rep = info_report(induced_joint(build_partition_code(source, psi)))
        results[name] = (rep.i_r_uxjoint, partition_channel_uses(sum(psi)))
    golden = {
        "huffman": (1.0, 1),
        "shannon": (1.3, 4),
        "partition91": (0.469, 4),
        "partition11": (1.0, 1),
    }
    for name, (want_c, want_u) in golden.items():
        got_c, got_u = results[name]
        assert got_c == pytest.approx(want_c, abs=TOL_PRINTED), name
        assert got_u == want_u, name
    report(2, "table-2 schemes reproduce for the (0.9, 0.1) source")


def test_criterion_03_entropy_values_and_candidate_keys():
    assert entropy(FiniteDist.from_masses(["0.3", "0.3", "0.3", "0.1"])) == pytest.approx(
        1.895, abs=TOL_PRINTED
    )
    assert entropy(FiniteDist.from_masses(["0.4", "0.2", "0.2", "0.2"])) == pytest.approx(
        1.922, abs=TOL_PRINTED
    )
    assert entropy(FiniteDist.from_masses(["0.4"] + ["0.15"] * 4)) == pytest.approx(
        2.171, abs=TOL_PRINTED
    )
    first = check_candidate_marginal(
        FiniteDist.from_masses(["0.4", "0.2", "0.2", "0.2"]), 4
    )
    assert not first.all_ok
    assert not first.check("key_entropy_floor").ok  # 1.922 < 2 bits
    second = check_candidate_marginal(
        FiniteDist.from_masses(["0.4", "0.15", "0.15", "0.15", "0.15"]), 4
    )
    assert not second.all_ok
    assert second.check("key_entropy_floor").ok  # 2.171 >= 2 bits
    assert not second.check("max_key_mass").ok  # 2/5 > 1/4, exact
    assert second.check("max_key_mass").exact
    report(3, "benchmark entropies match and both undersized candidate keys are rejected")


def test_criterion_04_variable_consumption_scheme():
    scheme = build_example2(2)
    assert scheme.expected_consumption == F(3, 2)
    joint = induced_joint(scheme.cipher)
    assert info_report(joint).i_r_uxjoint == pytest.approx(1.5, abs=TOL_BITS)
    report(4, "variable-consumption scheme spends exactly 1.5 bits per round")


def test_criterion_05_handmade_low_entropy_system():
    joint = example3_joint()
    assert check_eps(joint).is_eps
    assert is_independent(joint, ("X",), ("R",))
    h_x = entropy(joint.marginal("X"))
    h_r = entropy(joint.marginal("R"))
    assert h_x == pytest.approx(1.9219, abs=1e-4)
    assert h_r == pytest.approx(1.9219, abs=1e-4)
    assert h_x < math.log2(5)

    assert enumerate_decoding_systems(F(2, 5), 4, 4)
    assert enumerate_decoding_systems(F(2, 5), 3, 3) == []
    # brute-force oracle: every 3x3 binary matrix, feasibility by float LP
    for bits in product((0, 1), repeat=9):
        matrix = (bits[0:3], bits[3:6], bits[6:9])
        transpose = tuple(tuple(matrix[i][j] for i in range(3)) for j in range(3))
        assert not (
            strict_feasible_by_lp(matrix, F(2, 5))
            and strict_feasible_by_lp(transpose, F(2, 5))
        )
    report(5, "handmade 4x4 system verified; 4x4 feasible, 3x3 empty (LP cross-check)")


def _random_eps_joint(rng: random.Random, kind: str):
    source = random_source(rng)
    if kind == "otp":
        return induced_joint(build_one_time_pad(source))
    if kind == "partition_exact":
        return induced_joint(build_partition_code(source, psi_exact(source)))
    if kind == "partition_random":
        psi = [rng.randint(1, 4) for _ in source.labels]
        return induced_joint(build_partition_code(source, psi))
    code_fn = huffman_code if kind == "cep_huffman" else shannon_code
    return induced_joint(build_compress_encrypt_pad(source, code_fn(source)))


def test_criterion_06_max_mass_bounds_never_fail():
    rng = random.Random(660)
    kinds = ["otp", "partition_exact", "partition_random", "cep_huffman", "cep_shannon"]
    checked = 0
    for i in range(200):
        joint = _random_eps_joint(rng, kinds[i % len(kinds)])
        assert check_eps(joint).is_eps
        cap = F(1, len(joint.u_labels))
        for axis in ("X", "R"):
            marg = joint.marginal(axis)
            assert marg.max_mass <= cap  # exact rational comparison
            equality = marg.max_mass == cap
            uniform_at_cap = all(mass == cap for mass in marg.masses)
            assert equality == uniform_at_cap
        checked += 1
    assert checked == 200
    report(6, "200 random systems: max masses within 1/|U|, equality iff uniform at 1/|U|")


FIXED_IRREGULAR_SOURCES = [
    ["1/3", "2/3"],
    ["2/7", "5/7"],
    ["1/7", "2/7", "4/7"],
    ["3/11", "4/11", "4/11"],
    ["5/13", "6/13", "2/13"],
    ["4/17", "6/17", "7/17"],
    ["7/19", "5/19", "4/19", "3/19"],
    ["9/23", "8/23", "6/23"],
    ["11/29", "10/29", "8/29"],
    ["13/31", "9/31", "5/31", "4/31"],
]


def test_criterion_07_exact_partitions_and_floor_sweeps():
    rng = random.Random(770)
    for _ in range(100):
        source = random_source(rng)
        joint = induced_joint(build_partition_code(source, psi_exact(source)))
        rep = info_report(joint)
        assert abs(rep.i_r_uxjoint - rep.h_u) < TOL_BITS
        assert is_independent(joint, ("X",), ("R",))
    for masses in FIXED_IRREGULAR_SOURCES:
        source = FiniteDist.from_masses(masses)
        points = theta_sweep(source, [100, 1000, 10000])
        assert all(p.divergence >= 0.0 for p in points)
        assert points[-1].divergence < 1e-3
    report(7, "100 exact partitions at zero excess; floor sweeps below 1e-3 bits by theta=1e4")


def _random_precondition_pair(rng: random.Random):
    contexts = {}
    n_ctx = rng.randint(1, 2)
    min_residual = F(1)
    for c in range(n_ctx):
        k = rng.randint(2, 4)
        numerators = [rng.randint(2, 5) for _ in range(k)]
        total = sum(numerators)
        residual = FiniteDist.from_masses([F(v, total) for v in numerators])
        contexts[f"ctx{c}"] = residual
        min_residual = min(min_residual, residual.min_mass)
    if rng.random() < 0.5:
        size = rng.randint(int(1 / min_residual) + 1, 40)
        target = FiniteDist.uniform(size)
    else:
        target = None
        for _ in range(200):
            candidate = random_source(rng, max_support=18, min_support=12, max_denominator=60)
            if candidate.max_mass < min_residual:
                target = candidate
                break
        if target is None:
            target = FiniteDist.uniform(int(1 / min_residual) + 2)
    weights = FiniteDist.uniform(tuple(contexts.keys()))
    return target, contexts, weights


def test_criterion_08_extraction_bounds():
    rng = random.Random(880)
    for _ in range(50):
        target, contexts, weights = _random_precondition_pair(rng)
        plan = build_extraction(target, contexts)
        assert plan.guarantee, "generator must satisfy the width precondition"
        for ctx, extraction in plan.per_context.items():
            assert extraction.induced_target(target.labels) == target
        rep = extraction_metrics(plan, weights)
        assert rep.bound_newkey2
        assert rep.bound_newkey3
        assert max_target_preimages(plan) <= 2
    report(8, "50 extraction plans: gain in [residual - 1, residual], <= 2 preimages, exact target law")


def test_criterion_09_two_round_composition():
    compliant = [
        scenario_independent_pads(),
        scenario_recycled_bit(3),
        scenario_recycled_bit(4),
    ]
    for rep in compliant:
        assert rep.preconditions_ok
        assert rep.joint_secrecy_exact
        assert rep.joint_secrecy_mi == pytest.approx(0.0, abs=TOL_BITS)
        assert rep.h_v_given_u <= rep.residual_first_round + TOL_BITS
    bad = scenario_message_reused_as_key()
    assert not bad.joint_secrecy_exact
    assert bad.joint_secrecy_mi > 0.5
    report(9, "two-round secrecy exact on compliant scenarios; key-reuse counterexample flagged")


def test_criterion_10_padding_and_frontier():
    source = FiniteDist.from_masses(["0.3", "0.3", "0.3", "0.1"])
    base = induced_joint(build_one_time_pad(source))
    base_metrics = key_metrics(base)
    for masses in (["1/2", "1/2"], ["0.9", "0.1"], ["1/3", "1/3", "1/3"]):
        padded = pad_ciphertext(base, FiniteDist.from_masses(masses))
        assert key_metrics(padded).consumption == pytest.approx(
            base_metrics.consumption, abs=TOL_BITS
        )
    grid = [0.37 * i for i in range(10)]
    points = tradeoff_frontier(source, grid)
    assert len(points) == 10
    for a, b in zip(points, points[1:]):
        assert a.consumption >= b.consumption - 1e-12
    assert points[0].gamma == 0.0
    assert points[0].consumption == 2.0
    report(10, "padding leaves consumption invariant; 10-point frontier non-increasing from exactly 2 bits")


def test_criterion_11_code_oracles():
    rng = random.Random(1100)
    for _ in range(500):
        source = random_source(rng)
        h_code = huffman_code(source)
        s_code = shannon_code(source)
        assert h_code.expected_length(source) <= s_code.expected_length(source)
        for label, mass in zip(source.labels, source.masses):
            k = 0
            while mass.denominator > mass.numerator * (1 << k):
                k += 1
            assert s_code.length(label) == k
    high = FiniteDist.from_masses(["0.3", "0.23", "0.2", "0.17", "0.1"])
    low = FiniteDist.from_masses(["0.25", "0.25", "0.25", "0.15", "0.1"])
    assert entropy(high) < entropy(low)
    assert huffman_code(high).expected_length(high) == F(227, 100)
    assert huffman_code(low).expected_length(low) == F(225, 100)
    assert huffman_code(high).expected_length(high) > huffman_code(low).expected_length(low)
    report(11, "500 random sources: huffman <= shannon, exact ceilings; shorter-code-higher-entropy pair")
