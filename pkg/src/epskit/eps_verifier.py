"""Verification of error-free perfect-secrecy systems and their bounds.

The three defining constraints of an EPS system are exact statements
about a rational joint table, and they are checked exactly here:

* secrecy: the (U, X) marginal factorizes, cell by cell;
* zero error: every positive-probability (r, x) pair decodes to a unique u;
* key independence: the (U, R) marginal factorizes.

Bound checks come in three regimes matching how a system is being used:

* ``one_shot`` -- the floor on initial key size and channel uses: no
  ciphertext or key symbol may carry more than 1/|U| mass, and both
  H(X) and H(R) are at least log2 |U| (equality iff the marginal is
  uniform at exactly 1/|U|);
* ``min_key`` -- for systems with exactly zero excess consumption
  (I(X;R) = 0): max masses drop to min_u P_U(u), and the entropy floor
  sharpens to h(pi * floor(1/pi)) + pi * floor(1/pi) * log2 floor(1/pi)
  >= log2(1/pi), with equality iff 1/pi is an integer;
* ``min_channel`` -- for systems already at H(X) = log2 |U|: the
  consumption is pinned to log2 |U| and the ciphertext is a deterministic
  function of (message, key).

Max-mass comparisons are exact rational; entropy comparisons use the
global 1e-9 bit tolerance.  The verifier only reports -- it never mutates
or repairs a joint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .prob_core import (
    FORMAT_HEADER,
    TOL_BITS,
    FiniteDist,
    InfoReport,
    JointSystem,
    binary_entropy,
    entropy,
    info_report,
    is_independent,
)

REGIMES = ("one_shot", "min_key", "min_channel")


@dataclass(frozen=True)
class Violation:
    constraint: str
    cell: tuple
    detail: str


@dataclass(frozen=True)
class EpsReport:
    """Exact verdicts for the three defining constraints, with witnesses."""

    secrecy_ok: bool
    zero_error_ok: bool
    key_independence_ok: bool
    violations: tuple[Violation, ...]

    @property
    def is_eps(self) -> bool:
        return self.secrecy_ok and self.zero_error_ok and self.key_independence_ok

    def failing_constraints(self) -> tuple[str, ...]:
        names = []
        if not self.secrecy_ok:
            names.append("secrecy")
        if not self.zero_error_ok:
            names.append("zero_error")
        if not self.key_independence_ok:
            names.append("key_independence")
        return tuple(names)


@dataclass(frozen=True)
class BoundCheck:
    """One inequality: name, both sides, verdict, and whether it was exact."""

    name: str
    lhs: object  # Fraction for exact checks, float for entropy checks
    rhs: object
    ok: bool
    exact: bool
    note: str = ""


@dataclass(frozen=True)
class BoundReport:
    regime: str
    checks: tuple[BoundCheck, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(f"no check named {name!r} in regime {self.regime}")


class KeyMetrics(NamedTuple):
    """(expected consumption, residual randomness, excess consumption) in bits."""

    consumption: float
    residual: float
    excess: float


def _factorization_violations(joint: JointSystem, axis_a: str, axis_b: str, constraint: str):
    marg_a = joint.marginal_table((axis_a,))
    marg_b = joint.marginal_table((axis_b,))
    pair = joint.marginal_table((axis_a, axis_b))
    zero = Fraction(0)
    out = []
    for (a,), pa in marg_a.items():
        for (b,), pb in marg_b.items():
            got = pair.get((a, b), zero)
            if got != pa * pb:
                out.append(Violation(constraint, (a, b), f"P={got}, product={pa * pb}"))
    return out


def check_eps(joint: JointSystem) -> EpsReport:
    """Exact check of the three EPS constraints, listing witness cells."""
    violations: list[Violation] = []

    secrecy_violations = _factorization_violations(joint, "U", "X", "secrecy")
    violations.extend(secrecy_violations)

    key_violations = _factorization_violations(joint, "U", "R", "key_independence")
    violations.extend(key_violations)

    decode: dict[tuple, set] = {}
    for (u, r, x) in joint.table:
        decode.setdefault((r, x), set()).add(u)
    zero_error_ok = True
    for (r, x), us in decode.items():
        if len(us) > 1:
            zero_error_ok = False
            violations.append(
                Violation("zero_error", (r, x), f"decodes to {len(us)} messages: {sorted(map(str, us))}")
            )

    return EpsReport(
        secrecy_ok=not secrecy_violations,
        zero_error_ok=zero_error_ok,
        key_independence_ok=not key_violations,
        violations=tuple(violations),
    )


def key_metrics(joint: JointSystem, report: InfoReport | None = None) -> KeyMetrics:
    """Consumption I(R;UX), residual H(R|UX) and excess I(R;X) of an EPS joint.

    Rejects non-EPS input, naming the failing constraint; the identity
    excess == consumption - H(U) then holds within the bit tolerance.
    """
    eps = check_eps(joint)
    if not eps.is_eps:
        raise ValueError(
            f"not an EPS system; failing constraint(s): {', '.join(eps.failing_constraints())}"
        )
    rep = report if report is not None else info_report(joint)
    return KeyMetrics(
        consumption=rep.i_r_uxjoint,
        residual=rep.h_r_given_ux,
        excess=rep.i_xr,
    )


def min_entropy_floor_bits(pi: Fraction) -> tuple[float, float]:
    """The sharpened and plain entropy floors for min-consumption systems.

    Returns (h(pi*k) + pi*k*log2 k, log2(1/pi)) where k = floor(1/pi);
    the first is always >= the second, with equality iff 1/pi is integral.
    """
    if not isinstance(pi, Fraction) or pi <= 0 or pi > 1:
        raise ValueError(f"pi must be a Fraction in (0, 1], got {pi!r}")
    k = pi.denominator // pi.numerator
    mass = pi * k  # Fraction in (0, 1]
    refined = binary_entropy(float(mass)) + float(mass) * math.log2(k)
    plain = math.log2(pi.denominator / pi.numerator)
    return refined, plain


def check_candidate_marginal(
    dist: FiniteDist, message_support: int, role: str = "key"
) -> BoundReport:
    """Test whether a candidate key (or ciphertext) marginal could ever serve
    in an EPS system protecting a message alphabet of the given size.

    Two necessary conditions are checked: no symbol may carry more than
    1/|U| mass (exact), and the entropy must reach log2 |U| (within the
    bit tolerance).  Failing either makes the candidate unusable no matter
    how the encoder is designed.
    """
    if message_support < 1:
        raise ValueError("message support size must be >= 1")
    cap = Fraction(1, message_support)
    floor_bits = math.log2(message_support)
    h = entropy(dist)
    checks = (
        BoundCheck(
            name=f"max_{role}_mass",
            lhs=dist.max_mass,
            rhs=cap,
            ok=dist.max_mass <= cap,
            exact=True,
        ),
        BoundCheck(
            name=f"{role}_entropy_floor",
            lhs=h,
            rhs=floor_bits,
            ok=h >= floor_bits - TOL_BITS,
            exact=False,
        ),
    )
    return BoundReport(regime="one_shot", checks=checks)


def check_bounds(joint: JointSystem, regime: str) -> BoundReport:
    """Evaluate every bound applicable to the given regime on an EPS joint.

    Preconditions are hard errors: the joint must pass check_eps in all
    regimes; ``min_key`` additionally requires exact I(X;R) = 0 and
    ``min_channel`` requires H(X) = log2 |U| within tolerance.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    eps = check_eps(joint)
    if not eps.is_eps:
        raise ValueError(
            f"{regime} bounds need an EPS system; failing: {', '.join(eps.failing_constraints())}"
        )
    p_u = joint.marginal("U")
    p_r = joint.marginal("R")
    p_x = joint.marginal("X")
    m = len(p_u)
    h_x = entropy(p_x)
    h_r = entropy(p_r)
    log_m = math.log2(m)
    checks: list[BoundCheck] = []

    if regime == "one_shot":
        cap = Fraction(1, m)
        checks.append(BoundCheck("max_ciphertext_mass", p_x.max_mass, cap, p_x.max_mass <= cap, True))
        checks.append(BoundCheck("max_key_mass", p_r.max_mass, cap, p_r.max_mass <= cap, True))
        checks.append(BoundCheck("ciphertext_entropy_floor", h_x, log_m, h_x >= log_m - TOL_BITS, False))
        checks.append(BoundCheck("key_entropy_floor", h_r, log_m, h_r >= log_m - TOL_BITS, False))
        for name, h_val, dist in (
            ("ciphertext_entropy_equality_iff_uniform", h_x, p_x),
            ("key_entropy_equality_iff_uniform", h_r, p_r),
        ):
            at_floor = abs(h_val - log_m) <= TOL_BITS
            uniform_at_cap = all(mass == Fraction(1, m) for mass in dist.masses)
            checks.append(
                BoundCheck(
                    name, h_val, log_m, at_floor == uniform_at_cap, False,
                    note="equality holds exactly when every mass is 1/|U|",
                )
            )
        return BoundReport(regime, tuple(checks))

    if regime == "min_key":
        if not is_independent(joint, ("X",), ("R",)):
            raise ValueError("min_key regime requires exact ciphertext-key independence I(X;R) = 0")
        pi = p_u.min_mass
        checks.append(BoundCheck("max_ciphertext_mass", p_x.max_mass, pi, p_x.max_mass <= pi, True))
        checks.append(BoundCheck("max_key_mass", p_r.max_mass, pi, p_r.max_mass <= pi, True))
        refined, plain = min_entropy_floor_bits(pi)
        low = min(h_x, h_r)
        checks.append(
            BoundCheck("min_entropy_refined_floor", low, refined, low >= refined - TOL_BITS, False)
        )
        checks.append(
            BoundCheck("min_entropy_plain_floor", low, plain, low >= plain - TOL_BITS, False)
        )
        integer_reciprocal = pi.numerator == 1
        checks.append(
            BoundCheck(
                "floors_coincide_iff_integer_reciprocal",
                refined,
                plain,
                (abs(refined - plain) <= TOL_BITS) == integer_reciprocal,
                False,
            )
        )
        return BoundReport(regime, tuple(checks))

    # min_channel
    if abs(h_x - log_m) > TOL_BITS:
        raise ValueError(
            f"min_channel regime requires H(X) = log2 |U| (got {h_x:.9f} vs {log_m:.9f})"
        )
    rep = info_report(joint)
    checks.append(
        BoundCheck(
            "consumption_equals_log_message_count",
            rep.i_r_uxjoint,
            log_m,
            abs(rep.i_r_uxjoint - log_m) <= TOL_BITS,
            False,
        )
    )
    per_pair: dict[tuple, set] = {}
    for (u, r, x) in joint.table:
        per_pair.setdefault((u, r), set()).add(x)
    deterministic = all(len(xs) == 1 for xs in per_pair.values())
    checks.append(
        BoundCheck(
            "ciphertext_determined_by_message_and_key",
            max(len(xs) for xs in per_pair.values()),
            1,
            deterministic,
            True,
            note="each (message, key) pair must emit exactly one ciphertext",
        )
    )
    return BoundReport(regime, tuple(checks))


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


def _fmt_side(value, precision: int) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{precision}f}"
    return str(value)


def eps_report_lines(report: EpsReport, precision: int = 4) -> list[str]:
    """Line-oriented CHECK format: name, violation count vs 0, PASS/FAIL."""
    lines = []
    for name, ok in (
        ("secrecy", report.secrecy_ok),
        ("zero_error", report.zero_error_ok),
        ("key_independence", report.key_independence_ok),
    ):
        count = sum(1 for v in report.violations if v.constraint == name)
        lines.append(f"CHECK\t{name}\t{count}\t0\t{'PASS' if ok else 'FAIL'}")
    return lines


def bound_report_lines(report: BoundReport, precision: int = 4) -> list[str]:
    lines = []
    for c in report.checks:
        lines.append(
            f"CHECK\t{report.regime}.{c.name}\t{_fmt_side(c.lhs, precision)}"
            f"\t{_fmt_side(c.rhs, precision)}\t{'PASS' if c.ok else 'FAIL'}"
        )
    return lines


def _side_to_json(value):
    if isinstance(value, Fraction):
        return {"exact": str(value), "float": float(value)}
    return value


def report_to_json(report, precision: int = 4) -> str:
    """Machine-readable rendering of an EpsReport or BoundReport."""
    if isinstance(report, EpsReport):
        payload = {
            "format": f"{FORMAT_HEADER} eps-report",
            "secrecy_ok": report.secrecy_ok,
            "zero_error_ok": report.zero_error_ok,
            "key_independence_ok": report.key_independence_ok,
            "is_eps": report.is_eps,
            "violations": [
                {"constraint": v.constraint, "cell": [str(c) for c in v.cell], "detail": v.detail}
                for v in report.violations
            ],
        }
    elif isinstance(report, BoundReport):
        payload = {
            "format": f"{FORMAT_HEADER} bound-report",
            "regime": report.regime,
            "all_ok": report.all_ok,
            "checks": [
                {
                    "name": c.name,
                    "lhs": _side_to_json(c.lhs),
                    "rhs": _side_to_json(c.rhs),
                    "ok": c.ok,
                    "exact": c.exact,
                    "note": c.note,
                }
                for c in report.checks
            ],
        }
    else:
        raise TypeError(f"cannot serialize {type(report).__name__}")
    return json.dumps(payload, indent=2, sort_keys=True)
