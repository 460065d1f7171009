"""Command-line front end.

Subcommands: analyze, build, verify, simulate, recycle, sweep, frontier,
tables.  Exit status 0 means success and every requested check passed;
1 means a verification or golden-table comparison failed; 2 means a
usage or input-parsing problem.  All analytic commands are sample-free
and deterministic; only ``simulate`` draws randomness, from a seeded
generator, so identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .ciphers import (
    CipherSpec,
    build_compress_encrypt_pad,
    build_one_time_pad,
    build_partition_code,
    decrypt,
    format_cipher,
    huffman_code,
    induced_joint,
    partition_channel_uses,
    psi_exact,
    psi_floor,
    shannon_code,
)
from .eps_verifier import (
    bound_report_lines,
    check_bounds,
    check_candidate_marginal,
    check_eps,
    eps_report_lines,
    key_metrics,
    min_entropy_floor_bits,
    report_to_json,
)
from .key_recycle import build_extraction, extraction_metrics, format_extraction_plan, max_target_preimages
from .prob_core import (
    TOL_BITS,
    FiniteDist,
    entropy,
    format_joint,
    info_report,
    is_independent,
    parse_dist,
    parse_joint,
)
from .tradeoff_search import frontier_table, sweep_table, theta_sweep, tradeoff_frontier

JOINT_BUILD_CAP = 4096  # largest key/ciphertext alphabet the CLI will materialize


def _load_dist(path: str) -> FiniteDist:
    return parse_dist(Path(path).read_text(encoding="utf-8"))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _unit(base: str) -> tuple[float, str]:
    if base == "e":
        return math.log(2.0), "nats"
    return 1.0, "bits"


def _build_cipher(args, source: FiniteDist) -> CipherSpec:
    if args.scheme == "otp":
        return build_one_time_pad(source)
    if args.scheme == "partition":
        if args.psi:
            psi = [int(v) for v in args.psi.split(",")]
            spec = None
        elif args.theta:
            spec = psi_floor(source, args.theta)
            psi = None
        else:
            spec = psi_exact(source)
            psi = None
        chosen = spec if spec is not None else psi
        theta = spec.theta if spec is not None else sum(psi)
        if theta > JOINT_BUILD_CAP:
            raise ValueError(
                f"theta={theta} too large to materialize as a cipher (cap {JOINT_BUILD_CAP}); "
                "use `epskit sweep` for large-theta metrics"
            )
        return build_partition_code(source, chosen)
    if args.scheme == "cep-huffman":
        return build_compress_encrypt_pad(source, huffman_code(source, args.arity))
    if args.scheme == "cep-shannon":
        return build_compress_encrypt_pad(source, shannon_code(source, args.arity))
    raise ValueError(f"unknown scheme {args.scheme!r}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    source = _load_dist(args.dist)
    scale, unit = _unit(args.base)
    p = args.precision
    m = len(source)
    pi = source.min_mass
    refined, plain = min_entropy_floor_bits(pi)
    lines = [
        f"symbols: {m}",
        f"H(U): {entropy(source) * scale:.{p}f} {unit}",
        f"min mass pi: {pi}",
        f"max mass: {source.max_mass}",
        f"one-shot floor: H(X), H(R) >= {math.log2(m) * scale:.{p}f} {unit}; "
        f"max ciphertext/key mass <= 1/{m}",
        f"zero-excess floor: min{{H(X), H(R)}} >= {refined * scale:.{p}f} {unit} "
        f">= {plain * scale:.{p}f} {unit}",
        f"consumption floor: I(R;UX) >= H(U) = {entropy(source) * scale:.{p}f} {unit}",
    ]
    print("\n".join(lines))
    status = 0
    if args.candidate_key:
        key = _load_dist(args.candidate_key)
        report = check_candidate_marginal(key, m, role="key")
        print("candidate key checks:")
        for line in bound_report_lines(report, p):
            print(line)
        if not report.all_ok:
            failing = [c.name for c in report.checks if not c.ok]
            print(f"candidate key rejected: {', '.join(failing)}")
            status = 1
    return status


def cmd_build(args) -> int:
    source = _load_dist(args.dist)
    cipher = _build_cipher(args, source)
    if len(cipher.key) > JOINT_BUILD_CAP:
        raise ValueError(f"key alphabet of {len(cipher.key)} exceeds the build cap")
    joint = induced_joint(cipher)
    rep = info_report(joint)
    metrics = key_metrics(joint, rep)
    p = args.precision
    scale, unit = _unit(args.base)
    print(f"scheme: {cipher.name}")
    print(f"H(U): {rep.h_u * scale:.{p}f} {unit}")
    print(f"H(X): {rep.h_x * scale:.{p}f} {unit}")
    print(f"H(R): {rep.h_r * scale:.{p}f} {unit}")
    print(f"consumption I(R;UX): {metrics.consumption * scale:.{p}f} {unit}")
    print(f"residual H(R|UX): {metrics.residual * scale:.{p}f} {unit}")
    print(f"excess I(X;R): {metrics.excess * scale:.{p}f} {unit}")
    if cipher.name.startswith("partition"):
        theta = len(cipher.key)
        print(f"channel uses ceil(log2 theta): {partition_channel_uses(theta)}")
    if args.out:
        Path(args.out).write_text(format_cipher(cipher), encoding="utf-8")
        print(f"cipher written to {args.out}")
    if args.joint_out:
        Path(args.joint_out).write_text(format_joint(joint), encoding="utf-8")
        print(f"induced joint written to {args.joint_out}")
    return 0


def cmd_verify(args) -> int:
    joint = parse_joint(Path(args.joint).read_text(encoding="utf-8"))
    p = args.precision
    eps = check_eps(joint)
    reports = []
    lines = eps_report_lines(eps, p)
    ok = eps.is_eps
    if eps.is_eps:
        reports.append(check_bounds(joint, "one_shot"))
        if is_independent(joint, ("X",), ("R",)):
            reports.append(check_bounds(joint, "min_key"))
        h_x = entropy(joint.marginal("X"))
        if abs(h_x - math.log2(len(joint.u_labels))) <= TOL_BITS:
            reports.append(check_bounds(joint, "min_channel"))
        for rep in reports:
            lines.extend(bound_report_lines(rep, p))
            ok = ok and rep.all_ok
    if args.json:
        print(report_to_json(eps, p))
        for rep in reports:
            print(report_to_json(rep, p))
    elif args.format == "table":
        for line in lines:
            print(line)
    else:
        verdict = "EPS system" if eps.is_eps else "NOT an EPS system"
        print(f"{verdict}: secrecy={eps.secrecy_ok} zero_error={eps.zero_error_ok} "
              f"key_independence={eps.key_independence_ok}")
        for v in eps.violations[:10]:
            print(f"  violated {v.constraint} at {v.cell}: {v.detail}")
        if eps.is_eps:
            metrics = key_metrics(joint)
            print(f"consumption I(R;UX): {metrics.consumption:.{p}f} bits")
            print(f"residual H(R|UX): {metrics.residual:.{p}f} bits")
            print(f"excess I(X;R): {metrics.excess:.{p}f} bits")
        for line in lines:
            print(line)
    if not ok:
        failing = [v.constraint for v in eps.violations[:1]]
        for rep in reports:
            failing.extend(f"{rep.regime}.{c.name}" for c in rep.checks if not c.ok)
        if failing:
            print(f"FAILED: {', '.join(failing)}", file=sys.stderr)
    return 0 if ok else 1


def _sample(rng: random.Random, dist: FiniteDist):
    roll = rng.random()
    acc = 0.0
    for label, mass in zip(dist.labels, dist.masses):
        acc += float(mass)
        if roll < acc:
            return label
    return dist.labels[-1]


def cmd_simulate(args) -> int:
    source = _load_dist(args.dist)
    cipher = _build_cipher(args, source)
    joint = induced_joint(cipher)
    metrics = key_metrics(joint)
    rng = random.Random(args.seed)
    p = args.precision
    print(f"#epskit-v1 simulation scheme={cipher.name} seed={args.seed} rounds={args.rounds}")
    print("round\tu\tr\tx\tdecoded\tok")
    failures = 0
    for i in range(1, args.rounds + 1):
        u = _sample(rng, source)
        r = _sample(rng, cipher.key)
        row = cipher.encoder[(u, r)]
        aux_dist = FiniteDist(tuple(e.aux for e in row), tuple(e.prob for e in row))
        aux = _sample(rng, aux_dist)
        x = next(e.ciphertext for e in row if e.aux == aux)
        decoded = decrypt(cipher, x, r)
        ok = decoded == u
        failures += 0 if ok else 1
        print(f"{i}\t{u}\t{r}\t{x}\t{decoded}\t{'yes' if ok else 'NO'}")
    print(f"key-pool ledger: initial share H(R) = {entropy(cipher.key):.{p}f} bits per round")
    print(f"expected consumption per round: {metrics.consumption:.{p}f} bits")
    print(f"residual per round: {metrics.residual:.{p}f} bits")
    print(f"total expected consumption over {args.rounds} rounds: "
          f"{metrics.consumption * args.rounds:.{p}f} bits")
    return 0 if failures == 0 else 1


def cmd_recycle(args) -> int:
    target = _load_dist(args.target)
    residual = _load_dist(args.residual)
    plan = build_extraction(target, {"ctx": residual})
    weights = FiniteDist(("ctx",), (Fraction(1),))
    report = extraction_metrics(plan, weights)
    p = args.precision
    print(f"guarantee precondition (max target < min residual): "
          f"{'holds' if plan.guarantee else 'does not hold'}")
    print(f"H(S): {entropy(target):.{p}f} bits")
    print(f"residual H(R|UX): {report.residual_first_round:.{p}f} bits")
    print(f"extraction gain H(S) - H(A|R,U,X): {report.newkey_gain:.{p}f} bits")
    print(f"upper bound (gain <= residual): {'PASS' if report.bound_newkey2 else 'FAIL'}")
    if report.bound_newkey3 is None:
        print("lower bound (gain >= residual - 1): not asserted (precondition fails)")
    else:
        print(f"lower bound (gain >= residual - 1): {'PASS' if report.bound_newkey3 else 'FAIL'}")
    print(f"max residual values per extracted key value: {max_target_preimages(plan)}")
    if args.out:
        Path(args.out).write_text(format_extraction_plan(plan), encoding="utf-8")
        print(f"plan written to {args.out}")
    ok = report.bound_newkey2 and report.bound_newkey3 in (None, True)
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    source = _load_dist(args.dist)
    thetas = [int(v) for v in args.thetas.split(",")]
    points = theta_sweep(source, thetas)
    _emit(sweep_table(points, args.precision), args.out)
    return 0


def cmd_frontier(args) -> int:
    source = _load_dist(args.dist)
    if args.gammas:
        grid = [float(v) for v in args.gammas.split(",")]
    else:
        step = args.gamma_max / (args.grid - 1) if args.grid > 1 else 0.0
        grid = [i * step for i in range(args.grid)]
    points = tradeoff_frontier(source, grid, max_matrix_dim=args.max_matrix_dim)
    _emit(frontier_table(points, args.precision), args.out)
    return 0


TABLE1_PHI = (1, 1, 1, 3, 4, 7, 11)
TABLE1_GOLDEN = {"huffman": (2.357, 6), "shannon": (2.679, 5), "partition": (2.291, 5)}
TABLE2_GOLDEN = {
    "huffman": (1.0, 1),
    "shannon": (1.3, 4),
    "partition (9,1)": (0.469, 4),
    "partition (1,1)": (1.0, 1),
}
GOLDEN_TOL = 5e-4


def _scheme_rows(which: int):
    if which == 1:
        total = sum(TABLE1_PHI)
        source = FiniteDist.from_masses(
            [Fraction(v, total) for v in TABLE1_PHI], labels=range(1, len(TABLE1_PHI) + 1)
        )
        partitions = [("partition", list(TABLE1_PHI))]
        golden = TABLE1_GOLDEN
    else:
        source = FiniteDist.from_masses([Fraction(9, 10), Fraction(1, 10)], labels=(1, 2))
        partitions = [("partition (9,1)", [9, 1]), ("partition (1,1)", [1, 1])]
        golden = TABLE2_GOLDEN
    rows = []
    for name, code_fn in (("huffman", huffman_code), ("shannon", shannon_code)):
        cipher = build_compress_encrypt_pad(source, code_fn(source))
        rep = info_report(induced_joint(cipher))
        rows.append((name, rep.i_r_uxjoint, round(rep.h_x)))
    for name, psi in partitions:
        rep = info_report(induced_joint(build_partition_code(source, psi)))
        rows.append((name, rep.i_r_uxjoint, partition_channel_uses(sum(psi))))
    return rows, golden


def cmd_tables(args) -> int:
    rows, golden = _scheme_rows(args.which)
    print(f"#epskit-v1 tables which={args.which}")
    print("scheme\tconsumption\tchannel_uses\tgolden\tstatus")
    failures = 0
    for name, consumption, uses in rows:
        want_c, want_u = golden[name]
        ok = abs(consumption - want_c) < GOLDEN_TOL and uses == want_u
        failures += 0 if ok else 1
        print(f"{name}\t{consumption:.3f}\t{uses}\t({want_c}, {want_u})\t{'PASS' if ok else 'FAIL'}")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--base", choices=("2", "e"), default="2", help="entropy unit base")
    sub.add_argument("--precision", type=int, default=4, help="printed decimal places")
    sub.add_argument("--seed", type=int, default=0, help="seed for sampling commands")
    sub.add_argument("--out", default=None, help="write the main payload to a file")
    sub.add_argument("--format", choices=("text", "table"), default="text")


def _add_build_flags(sub):
    sub.add_argument("--scheme", required=True,
                     choices=("otp", "partition", "cep-huffman", "cep-shannon"))
    sub.add_argument("--psi", default=None, help="comma-separated slot counts for partition")
    sub.add_argument("--theta", type=int, default=None,
                     help="floor-partition size (partition scheme)")
    sub.add_argument("--arity", type=int, default=2, help="code arity for cep schemes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epskit",
        description="construct, verify and analyze error-free perfect-secrecy ciphers",
    )
    parser.add_argument("--version", action="version", version=f"epskit {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("analyze", help="entropy and bound floors of a source")
    sub.add_argument("dist")
    sub.add_argument("--candidate-key", default=None,
                     help="distribution file to test as a key for this source")
    _add_common(sub)
    sub.set_defaults(func=cmd_analyze)

    sub = commands.add_parser("build", help="construct a cipher and report its metrics")
    sub.add_argument("dist")
    _add_build_flags(sub)
    sub.add_argument("--joint-out", default=None, help="also write the induced joint")
    _add_common(sub)
    sub.set_defaults(func=cmd_build)

    sub = commands.add_parser("verify", help="check a joint file against every bound")
    sub.add_argument("joint")
    sub.add_argument("--json", action="store_true", help="emit structured reports")
    _add_common(sub)
    sub.set_defaults(func=cmd_verify)

    sub = commands.add_parser("simulate", help="seeded multi-round encryption session")
    sub.add_argument("dist")
    _add_build_flags(sub)
    sub.add_argument("--rounds", type=int, default=10)
    _add_common(sub)
    sub.set_defaults(func=cmd_simulate)

    sub = commands.add_parser("recycle", help="build and evaluate a key-extraction plan")
    sub.add_argument("--target", required=True, help="target key distribution file")
    sub.add_argument("--residual", required=True, help="residual key distribution file")
    _add_common(sub)
    sub.set_defaults(func=cmd_recycle)

    sub = commands.add_parser("sweep", help="floor-partition metrics over a theta list")
    sub.add_argument("dist")
    sub.add_argument("--thetas", required=True, help="comma-separated theta values")
    _add_common(sub)
    sub.set_defaults(func=cmd_sweep)

    sub = commands.add_parser("frontier", help="consumption-vs-channel-use envelope")
    sub.add_argument("dist")
    sub.add_argument("--gammas", default=None, help="comma-separated gamma grid")
    sub.add_argument("--grid", type=int, default=10, help="number of grid points")
    sub.add_argument("--gamma-max", type=float, default=3.0)
    sub.add_argument("--max-matrix-dim", type=int, default=4)
    _add_common(sub)
    sub.set_defaults(func=cmd_frontier)

    sub = commands.add_parser("tables", help="regenerate the benchmark tables and diff")
    sub.add_argument("--which", type=int, choices=(1, 2), required=True)
    _add_common(sub)
    sub.set_defaults(func=cmd_tables)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
