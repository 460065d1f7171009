"""Multi-round key accounting: residual randomness extraction and two-round
composition checks.

After one use of an error-free perfect-secrecy system the sender and
receiver still share H(R|UX) bits of secret randomness.  Two results make
that number operational, and both are mechanised here at desk scale:

* a second message V can be sent securely only if H(V|U) <= H(R|UX),
  checked by :func:`simulate_two_rounds` on an exact five-variable joint
  over (U, V, R, X, Y);
* a fresh near-uniform key S can be distilled from the residual with the
  help of one secret auxiliary message A.  :func:`build_extraction`
  performs the interval-overlay construction: for each (u, x) context the
  unit interval is partitioned once by the target key law and once by the
  residual key law, A enumerates the overlap sub-cells inside each
  residual cell, and S is the target cell each sub-cell lands in.  All
  interval arithmetic is exact, so the induced law of S equals the target
  exactly in every context -- which is precisely why S leaks nothing
  about (U, X).

The extraction gain H(S) - H(A|R,U,X) is sandwiched between H(R|UX) and
H(R|UX) - 1 bit, the lower bound holding whenever every target cell is
narrower than every residual cell (then a target cell can straddle at
most one residual boundary, so (S, context) pins R to at most 2 values).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping

from .ciphers import CipherSpec, EncoderEntry
from .prob_core import (
    FORMAT_HEADER,
    TOL_BITS,
    FiniteDist,
    entropy,
    project_table,
    table_entropy,
    tables_factorize,
)

Label = Hashable
Context = Hashable


@dataclass(frozen=True)
class ContextExtraction:
    """Per-context pieces: residual law, A-kernel per residual value, S map."""

    residual: FiniteDist
    a_kernel: Mapping[Label, FiniteDist]
    s_map: Mapping[tuple[Label, Label], Label]

    def induced_target(self, target_labels) -> FiniteDist:
        """Exact law of S in this context: sum of sub-cell widths per target cell."""
        acc: dict[Label, Fraction] = {}
        for r, r_mass in zip(self.residual.labels, self.residual.masses):
            kernel = self.a_kernel[r]
            for a, a_mass in zip(kernel.labels, kernel.masses):
                s = self.s_map[(r, a)]
                acc[s] = acc.get(s, Fraction(0)) + r_mass * a_mass
        return FiniteDist(tuple(target_labels), tuple(acc[s] for s in target_labels))


@dataclass(frozen=True)
class ExtractionPlan:
    """Interval-overlay assignment of A and S for every (u, x) context.

    ``guarantee`` records whether the strict max-target < min-residual
    precondition held; only then is the 1-bit lower bound on the gain
    asserted.
    """

    target_key: FiniteDist
    per_context: Mapping[Context, ContextExtraction]
    guarantee: bool


def _overlay(target: FiniteDist, residual: FiniteDist):
    ends: list[tuple[Fraction, Label]] = []
    cum = Fraction(0)
    for s, mass in zip(target.labels, target.masses):
        cum += mass
        ends.append((cum, s))
    a_kernel: dict[Label, FiniteDist] = {}
    s_map: dict[tuple[Label, Label], Label] = {}
    lo = Fraction(0)
    k = 0
    for r, r_mass in zip(residual.labels, residual.masses):
        hi = lo + r_mass
        pos = lo
        labels: list[int] = []
        masses: list[Fraction] = []
        while pos < hi:
            while ends[k][0] <= pos:
                k += 1
            t_end, s_label = ends[k]
            seg_end = min(hi, t_end)
            labels.append(len(labels) + 1)
            masses.append((seg_end - pos) / r_mass)
            s_map[(r, labels[-1])] = s_label
            pos = seg_end
        a_kernel[r] = FiniteDist(tuple(labels), tuple(masses))
        lo = hi
    return a_kernel, s_map


def build_extraction(
    target_key: FiniteDist,
    residual_by_context: Mapping[Context, FiniteDist],
) -> ExtractionPlan:
    """Overlay the target partition on each context's residual partition.

    Boundary coincidences produce no zero-mass A values: segments are
    emitted only with strictly positive width.  The induced law of S is
    verified to equal the target exactly in every context.
    """
    if not residual_by_context:
        raise ValueError("at least one (u, x) context is required")
    per_context: dict[Context, ContextExtraction] = {}
    min_residual = None
    for ctx, residual in residual_by_context.items():
        if not isinstance(residual, FiniteDist):
            raise TypeError(f"context {ctx!r}: residual must be a FiniteDist")
        a_kernel, s_map = _overlay(target_key, residual)
        extraction = ContextExtraction(residual, a_kernel, s_map)
        induced = extraction.induced_target(target_key.labels)
        if induced != target_key:
            raise AssertionError(f"context {ctx!r}: induced S law differs from target")
        per_context[ctx] = extraction
        low = residual.min_mass
        min_residual = low if min_residual is None else min(min_residual, low)
    guarantee = target_key.max_mass < min_residual
    return ExtractionPlan(target_key, per_context, guarantee)


def max_target_preimages(plan: ExtractionPlan) -> int:
    """Largest number of residual values consistent with one (S, context)."""
    worst = 0
    for extraction in plan.per_context.values():
        per_s: dict[Label, set] = {}
        for (r, _a), s in extraction.s_map.items():
            per_s.setdefault(s, set()).add(r)
        worst = max(worst, max(len(rs) for rs in per_s.values()))
    return worst


@dataclass(frozen=True)
class TwoRoundReport:
    """Metrics for two-round use and for key extraction, in bits.

    The two-round fields are None on extraction-only reports and vice
    versa.  ``bound_newkey3`` is None when the max/min precondition did
    not hold, since the 1-bit lower bound is only promised under it.
    """

    h_v_given_u: float | None = None
    residual_first_round: float | None = None
    joint_secrecy_mi: float | None = None
    joint_secrecy_exact: bool | None = None
    preconditions_ok: bool | None = None
    newkey_gain: float | None = None
    bound_newkey2: bool | None = None
    bound_newkey3: bool | None = None

    @property
    def second_round_fits(self) -> bool | None:
        """H(V|U) <= H(R|UX) within tolerance; None outside two-round runs."""
        if self.h_v_given_u is None or self.residual_first_round is None:
            return None
        return self.h_v_given_u <= self.residual_first_round + TOL_BITS


def extraction_metrics(plan: ExtractionPlan, weights: FiniteDist) -> TwoRoundReport:
    """Evaluate H(S) - H(A|R, context) against the residual-randomness bounds.

    ``weights`` is the distribution of contexts (the (u, x) law of the
    underlying system).  Its labels must match the plan's contexts.
    """
    if set(weights.labels) != set(plan.per_context.keys()):
        raise ValueError("weights labels do not match the plan's contexts")
    h_s = entropy(plan.target_key)
    h_a_given_rux = 0.0
    h_residual = 0.0
    for ctx, w in zip(weights.labels, weights.masses):
        extraction = plan.per_context[ctx]
        h_residual += float(w) * entropy(extraction.residual)
        for r, r_mass in zip(extraction.residual.labels, extraction.residual.masses):
            h_a_given_rux += float(w) * float(r_mass) * entropy(extraction.a_kernel[r])
    gain = h_s - h_a_given_rux
    return TwoRoundReport(
        residual_first_round=h_residual,
        newkey_gain=gain,
        bound_newkey2=gain <= h_residual + TOL_BITS,
        bound_newkey3=(gain >= h_residual - 1.0 - TOL_BITS) if plan.guarantee else None,
    )


# ---------------------------------------------------------------------------
# Two-round simulation
# ---------------------------------------------------------------------------

RoundTwoKernel = Callable[[Label, Label, Label, Label], FiniteDist]


def simulate_two_rounds(
    round1: CipherSpec,
    round2_kernel: RoundTwoKernel,
    message_coupling: FiniteDist,
) -> TwoRoundReport:
    """Exact five-variable joint over (U, V, R, X, Y) and its secrecy checks.

    ``message_coupling`` is the joint law of (U, V) with tuple labels;
    its U-marginal must equal round1's source exactly.  ``round2_kernel``
    maps a first-round realisation (u, r, x) plus the second message v to
    the law of the second ciphertext Y -- this is where "round 2 keys off
    the residual of round 1" is encoded.

    A residual too small for the second message does not raise: it
    surfaces as a failed zero-error or secrecy verdict in the report.
    """
    u_marginal: dict[Label, Fraction] = {}
    for (u, _v), mass in zip(message_coupling.labels, message_coupling.masses):
        u_marginal[u] = u_marginal.get(u, Fraction(0)) + mass
    if u_marginal != round1.source.as_dict():
        raise ValueError("message coupling's U-marginal differs from round 1 source")

    key_mass = round1.key.as_dict()
    table: dict[tuple, Fraction] = {}
    for (u, v), m_uv in zip(message_coupling.labels, message_coupling.masses):
        for r in round1.key.labels:
            base = m_uv * key_mass[r]
            for entry in round1.encoder[(u, r)]:
                x = entry.ciphertext
                y_dist = round2_kernel(u, r, x, v)
                for y, m_y in zip(y_dist.labels, y_dist.masses):
                    cell = (u, v, r, x, y)
                    table[cell] = table.get(cell, Fraction(0)) + base * entry.prob * m_y
    assert sum(table.values()) == 1

    # positions: u=0, v=1, r=2, x=3, y=4
    decode_u: dict[tuple, set] = {}
    decode_v: dict[tuple, set] = {}
    for (u, v, r, x, y) in table:
        decode_u.setdefault((r, x), set()).add(u)
        decode_v.setdefault((r, x, y), set()).add(v)
    zero_error_u = all(len(s) == 1 for s in decode_u.values())
    zero_error_v = all(len(s) == 1 for s in decode_v.values())

    marg_uv = project_table(table, (0, 1))
    marg_xy = project_table(table, (3, 4))
    joint_msg_cipher: dict[tuple, Fraction] = {}
    for cell, mass in table.items():
        key = ((cell[0], cell[1]), (cell[3], cell[4]))
        joint_msg_cipher[key] = joint_msg_cipher.get(key, Fraction(0)) + mass
    secrecy_exact = tables_factorize(joint_msg_cipher, marg_uv, marg_xy)

    h_uv = table_entropy(marg_uv)
    h_xy = table_entropy(marg_xy)
    h_uvxy = table_entropy(joint_msg_cipher)
    mi = max(h_uv + h_xy - h_uvxy, 0.0)

    h_u = table_entropy(project_table(table, (0,)))
    h_ux = table_entropy(project_table(table, (0, 3)))
    h_urx = table_entropy(project_table(table, (0, 2, 3)))

    return TwoRoundReport(
        h_v_given_u=h_uv - h_u,
        residual_first_round=h_urx - h_ux,
        joint_secrecy_mi=mi,
        joint_secrecy_exact=secrecy_exact,
        preconditions_ok=secrecy_exact and zero_error_u and zero_error_v,
    )


# ---------------------------------------------------------------------------
# The variable-consumption scheme: half the time the cipher smuggles a fresh
# key bit to the receiver, so only one of the two pad bits is spent.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Example2Scheme:
    """Two-bit pad over an expanded message, with per-message key accounting.

    The source (1/2, 1/4, 1/4) is expanded to two bits: message 0 becomes
    (0, F) with F a fresh fair bit generated at the sender, messages 1
    and 2 become (1, 0) and (1, 1).  The expansion is XORed with the
    first two bits of an n-bit key stream.  When the message is 0 the
    receiver also recovers F, which joins the shared pool: net spend one
    key bit instead of two.
    """

    cipher: CipherSpec
    n: int
    expected_consumption: Fraction
    consumption_by_message: Mapping[Label, int]
    residual_bits_by_message: Mapping[Label, tuple[str, ...]]


def _bit_strings(n: int):
    from itertools import product

    for bits in product("01", repeat=n):
        yield "".join(bits)


def build_example2(n: int) -> Example2Scheme:
    """Build the variable-consumption scheme over an n-bit key stream, n >= 2."""
    if n < 2:
        raise ValueError("the scheme pads with two key bits; need n >= 2")
    source = FiniteDist((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    key = FiniteDist.uniform(tuple(_bit_strings(n)))
    half = Fraction(1, 2)
    one = Fraction(1)
    encoder: dict[tuple, tuple[EncoderEntry, ...]] = {}
    decoder: dict[tuple, Label] = {}
    for r in key.labels:
        r0, r1 = int(r[0]), int(r[1])
        # message 0: expansion (0, F), F fair and fresh
        entries = []
        for fresh in (0, 1):
            x = f"{0 ^ r0}{fresh ^ r1}"
            entries.append(EncoderEntry(aux=fresh, prob=half, ciphertext=x))
            decoder[(r, x)] = 0
        encoder[(0, r)] = tuple(entries)
        for u, second in ((1, 0), (2, 1)):
            x = f"{1 ^ r0}{second ^ r1}"
            encoder[(u, r)] = (EncoderEntry(aux=0, prob=one, ciphertext=x),)
            decoder[(r, x)] = u
    cipher = CipherSpec(source, key, encoder, decoder, name=f"variable-consumption n={n}")
    stream = tuple(f"B{i}" for i in range(3, n + 1))
    return Example2Scheme(
        cipher=cipher,
        n=n,
        expected_consumption=Fraction(1, 2) * 1 + Fraction(1, 4) * 2 + Fraction(1, 4) * 2,
        consumption_by_message={0: 1, 1: 2, 2: 2},
        residual_bits_by_message={
            0: stream + (f"B{n + 1}",),
            1: stream,
            2: stream,
        },
    )


# ---------------------------------------------------------------------------
# Canned two-round scenarios
# ---------------------------------------------------------------------------


def _point(label) -> FiniteDist:
    return FiniteDist((label,), (Fraction(1),))


def scenario_independent_pads() -> TwoRoundReport:
    """Two fair-bit messages, a two-bit key, each round pads with its own bit."""
    source = FiniteDist.uniform((0, 1))
    key = FiniteDist.uniform(("00", "01", "10", "11"))
    one = Fraction(1)
    encoder = {}
    decoder = {}
    for u in (0, 1):
        for r in key.labels:
            x = (u + int(r[0])) % 2
            encoder[(u, r)] = (EncoderEntry(aux=0, prob=one, ciphertext=x),)
            decoder[(r, x)] = u
    round1 = CipherSpec(source, key, encoder, decoder, name="pad-with-first-bit")
    coupling = FiniteDist.uniform(tuple((u, v) for u in (0, 1) for v in (0, 1)))

    def kernel(u, r, x, v):
        return _point((v + int(r[1])) % 2)

    return simulate_two_rounds(round1, kernel, coupling)


def scenario_message_reused_as_key() -> TwoRoundReport:
    """Insecure composition: the first message itself pads the second round."""
    from .ciphers import build_one_time_pad

    round1 = build_one_time_pad(FiniteDist.uniform((0, 1)))
    coupling = FiniteDist.uniform(tuple((u, v) for u in (0, 1) for v in (0, 1)))

    def kernel(u, r, x, v):
        return _point((v + u) % 2)

    return simulate_two_rounds(round1, kernel, coupling)


def scenario_recycled_bit(n: int = 3) -> TwoRoundReport:
    """Variable-consumption round one, then a one-bit pad keyed off the pool.

    When the first message was 0 the fresh bit smuggled in round one pads
    the second message; otherwise the next unspent stream bit does.
    Either way the pad is uniform and independent of everything public,
    so the composition stays exactly secure.
    """
    if n < 3:
        raise ValueError("need n >= 3 so an unspent stream bit exists")
    scheme = build_example2(n)
    round1 = scheme.cipher
    pairs = []
    masses = []
    for u, mass in zip(round1.source.labels, round1.source.masses):
        for v in (0, 1):
            pairs.append((u, v))
            masses.append(mass * Fraction(1, 2))
    coupling = FiniteDist(tuple(pairs), tuple(masses))

    def kernel(u, r, x, v):
        if u == 0:
            pad = (int(x[1]) + int(r[1])) % 2  # the recovered fresh bit
        else:
            pad = int(r[2])
        return _point((v + pad) % 2)

    return simulate_two_rounds(round1, kernel, coupling)


# ---------------------------------------------------------------------------
# Plan serialization
# ---------------------------------------------------------------------------


def format_extraction_plan(plan: ExtractionPlan) -> str:
    """Sectioned text export: a TARGET block then one CONTEXT block each."""
    lines = [f"{FORMAT_HEADER} extraction-plan guarantee={'yes' if plan.guarantee else 'no'}"]
    lines.append("TARGET")
    for s, mass in zip(plan.target_key.labels, plan.target_key.masses):
        lines.append(f"{s}\t{mass}")
    for ctx, extraction in plan.per_context.items():
        lines.append(f"CONTEXT\t{ctx}")
        lines.append("RESIDUAL")
        for r, mass in zip(extraction.residual.labels, extraction.residual.masses):
            lines.append(f"{r}\t{mass}")
        lines.append("ASSIGN")
        for r in extraction.residual.labels:
            kernel = extraction.a_kernel[r]
            for a, mass in zip(kernel.labels, kernel.masses):
                lines.append(f"{r}\t{a}\t{mass}\t{extraction.s_map[(r, a)]}")
    return "\n".join(lines) + "\n"
