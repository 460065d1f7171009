"""Cipher constructions over finite alphabets with exact rational kernels.

Three families are built here, all of which satisfy perfect secrecy
I(U;X)=0, zero decoding error H(U|RX)=0 and key independence I(U;R)=0
exactly (the verifier in :mod:`epskit.eps_verifier` re-checks this on the
induced joint rather than trusting the construction):

* one-time pad: X = (U + R) mod M with R uniform on the message alphabet;
* partition code C(psi): message u is first randomised uniformly into one
  of psi_u consecutive slots of {0..theta-1}, theta = sum(psi), then masked
  with a uniform key, X = (slot + R) mod theta.  With psi proportional to
  the source masses the expected key consumption I(R;UX) drops to H(U);
* compress-encrypt-pad: a prefix code compresses U to sigma(u) digits,
  a uniform key masks them digit-wise mod d, and uniform digits pad the
  result to the longest codeword length so that the ciphertext length
  leaks nothing.

A :class:`CipherSpec` stores the probabilistic encoder with an explicit
auxiliary-randomness alphabet, so encryption is a deterministic function
of (u, r, aux) and the induced joint is an exact rational product.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Hashable, Mapping, Sequence

from .prob_core import FORMAT_HEADER, FiniteDist, JointSystem, as_mass, entropy

Label = Hashable


class InvalidCiphertextError(ValueError):
    """Raised when decrypting an (r, x) pair of zero joint probability."""


@dataclass(frozen=True)
class EncoderEntry:
    """One deterministic branch of a probabilistic encoder row."""

    aux: Label
    prob: Fraction
    ciphertext: Label


@dataclass(frozen=True)
class CipherSpec:
    """A complete cipher: source, key, probabilistic encoder, decoder.

    ``encoder`` maps (u, r) to a tuple of EncoderEntry; each row is a
    probability distribution over the auxiliary alphabet.  ``decoder``
    maps (r, x) back to u and is total on positive-probability pairs.
    Construction verifies zero-error: every encoder branch round-trips.
    """

    source: FiniteDist
    key: FiniteDist
    encoder: Mapping[tuple[Label, Label], tuple[EncoderEntry, ...]]
    decoder: Mapping[tuple[Label, Label], Label]
    name: str = "cipher"

    def __post_init__(self):
        for u in self.source.labels:
            for r in self.key.labels:
                row = self.encoder.get((u, r))
                if not row:
                    raise ValueError(f"encoder row missing for (u={u!r}, r={r!r})")
                total = Fraction(0)
                seen_aux = set()
                for entry in row:
                    if entry.prob <= 0:
                        raise ValueError(f"encoder branch {(u, r, entry.aux)} has mass {entry.prob}")
                    if entry.aux in seen_aux:
                        raise ValueError(f"duplicate aux {entry.aux!r} in row (u={u!r}, r={r!r})")
                    seen_aux.add(entry.aux)
                    total += entry.prob
                    if self.decoder.get((r, entry.ciphertext)) != u:
                        raise ValueError(
                            f"zero-error violated: decoder({r!r}, {entry.ciphertext!r}) != {u!r}"
                        )
                if total != 1:
                    raise ValueError(f"encoder row (u={u!r}, r={r!r}) sums to {total}")

    def ciphertext_labels(self) -> tuple[Label, ...]:
        """Ciphertext alphabet in order of first appearance in the encoder."""
        seen: list[Label] = []
        for u in self.source.labels:
            for r in self.key.labels:
                for entry in self.encoder[(u, r)]:
                    if entry.ciphertext not in seen:
                        seen.append(entry.ciphertext)
        return tuple(seen)


def encrypt(spec: CipherSpec, u: Label, r: Label, aux: Label) -> Label:
    """Deterministic encryption: the ciphertext of branch ``aux`` at (u, r)."""
    row = spec.encoder.get((u, r))
    if row is None:
        raise ValueError(f"(u={u!r}, r={r!r}) outside the cipher's alphabets")
    for entry in row:
        if entry.aux == aux:
            return entry.ciphertext
    raise ValueError(f"aux {aux!r} not in the randomness alphabet of (u={u!r}, r={r!r})")


def decrypt(spec: CipherSpec, x: Label, r: Label) -> Label:
    if r not in spec.key.labels:
        raise ValueError(f"key symbol {r!r} outside the key alphabet")
    try:
        return spec.decoder[(r, x)]
    except KeyError:
        raise InvalidCiphertextError(
            f"(r={r!r}, x={x!r}) has zero joint probability under this cipher"
        ) from None


def induced_joint(spec: CipherSpec) -> JointSystem:
    """Exact joint P(u, r, x) = P_U(u) P_R(r) sum_aux P(aux | u, r)."""
    cells: dict[tuple, Fraction] = {}
    key_mass = spec.key.as_dict()
    for u, pu in zip(spec.source.labels, spec.source.masses):
        for r in spec.key.labels:
            base = pu * key_mass[r]
            for entry in spec.encoder[(u, r)]:
                cell = (u, r, entry.ciphertext)
                cells[cell] = cells.get(cell, Fraction(0)) + base * entry.prob
    return JointSystem(
        spec.source.labels, spec.key.labels, spec.ciphertext_labels(), cells
    )


# ---------------------------------------------------------------------------
# One-time pad
# ---------------------------------------------------------------------------


def build_one_time_pad(source: FiniteDist) -> CipherSpec:
    """X = (U + R) mod M with R uniform on {0..M-1}.

    The source's labels are mapped positionally onto {0..M-1}; the decoder
    returns the original label.
    """
    m = len(source)
    key = FiniteDist.uniform(m)
    one = Fraction(1)
    encoder = {}
    decoder = {}
    for idx, u in enumerate(source.labels):
        for r in range(m):
            x = (idx + r) % m
            encoder[(u, r)] = (EncoderEntry(aux=0, prob=one, ciphertext=x),)
            decoder[(r, x)] = u
    return CipherSpec(source, key, encoder, decoder, name=f"one-time-pad M={m}")


# ---------------------------------------------------------------------------
# Partition codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionCodeSpec:
    """Slot counts psi_1..psi_l with theta = sum(psi) and their prefix sums."""

    psi: tuple[int, ...]
    theta: int
    cumulative: tuple[int, ...]

    def __post_init__(self):
        if not self.psi:
            raise ValueError("psi must be nonempty")
        for count in self.psi:
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"slot count {count!r} must be a positive integer")
        if self.theta != sum(self.psi):
            raise ValueError(f"theta {self.theta} != sum(psi) = {sum(self.psi)}")
        expected = tuple(_prefix_sums(self.psi))
        if self.cumulative != expected:
            raise ValueError("cumulative must be the prefix sums of psi")

    @classmethod
    def from_psi(cls, psi: Sequence[int]) -> "PartitionCodeSpec":
        psi = tuple(int(p) for p in psi)
        return cls(psi, sum(psi), tuple(_prefix_sums(psi)))

    def induced_q(self) -> FiniteDist:
        """The slot-frequency distribution Q(i) = psi_i / theta."""
        return FiniteDist(
            tuple(range(1, len(self.psi) + 1)),
            tuple(Fraction(p, self.theta) for p in self.psi),
        )


def _prefix_sums(values: Sequence[int]):
    total = 0
    out = [0]
    for v in values:
        total += v
        out.append(total)
    return out


def psi_exact(source: FiniteDist) -> PartitionCodeSpec:
    """Smallest partition with slot frequencies exactly equal to the source.

    theta is the lcm of the mass denominators, the minimal integer making
    every theta * P_U(i) integral; the resulting code has zero excess key
    consumption.
    """
    theta = 1
    for mass in source.masses:
        theta = theta * mass.denominator // math.gcd(theta, mass.denominator)
    psi = tuple(int(mass * theta) for mass in source.masses)
    return PartitionCodeSpec.from_psi(psi)


def psi_floor(source: FiniteDist, theta: int) -> PartitionCodeSpec:
    """Floor-rounded partition at a given theta, with a remainder slot.

    Each message gets floor(P_U(i) * theta) slots; whatever is left over
    becomes one extra slot bucket that no message uses.  Requires theta
    large enough that every message gets at least one slot.
    """
    if theta < 1:
        raise ValueError("theta must be a positive integer")
    psi = []
    for label, mass in zip(source.labels, source.masses):
        slots = math.floor(mass * theta)
        if slots < 1:
            raise ValueError(
                f"theta={theta} too small: symbol {label!r} with mass {mass} gets zero slots"
            )
        psi.append(slots)
    remainder = theta - sum(psi)
    if remainder > 0:
        psi.append(remainder)
    return PartitionCodeSpec.from_psi(psi)


def build_partition_code(source: FiniteDist, psi: Sequence[int] | PartitionCodeSpec) -> CipherSpec:
    """Cipher realising the partition code with the given slot counts.

    Message i (positionally) owns slots [cumulative_i, cumulative_{i+1});
    the encoder draws a slot uniformly (the auxiliary randomness), then
    masks it: X = (slot + R) mod theta with R uniform.  ``psi`` may be
    longer than the source support; trailing slot buckets are then dead
    weight, which is how floor-rounded partitions carry their remainder.
    """
    spec = psi if isinstance(psi, PartitionCodeSpec) else PartitionCodeSpec.from_psi(psi)
    if len(spec.psi) < len(source):
        raise ValueError(
            f"{len(spec.psi)} slot buckets for {len(source)} messages; need one per message"
        )
    theta = spec.theta
    key = FiniteDist.uniform(theta)
    encoder = {}
    decoder = {}
    for idx, u in enumerate(source.labels):
        offset = spec.cumulative[idx]
        width = spec.psi[idx]
        branch_prob = Fraction(1, width)
        for r in range(theta):
            entries = []
            for draw in range(1, width + 1):
                slot = offset + draw - 1
                x = (slot + r) % theta
                entries.append(EncoderEntry(aux=draw, prob=branch_prob, ciphertext=x))
                decoder[(r, x)] = u
            encoder[(u, r)] = tuple(entries)
    return CipherSpec(source, key, encoder, decoder, name=f"partition theta={theta}")


# ---------------------------------------------------------------------------
# Prefix codes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrefixCode:
    """A d-ary prefix-free code given as digit strings per source label."""

    arity: int
    codewords: Mapping[Label, str]

    def __post_init__(self):
        if self.arity < 2:
            raise ValueError("arity must be >= 2")
        if self.arity > 10:
            raise ValueError("digit-string codewords support arity up to 10")
        if not self.codewords:
            raise ValueError("code has no codewords")
        words = list(self.codewords.values())
        for w in words:
            if any(not ("0" <= ch < str(self.arity)) for ch in w):
                raise ValueError(f"codeword {w!r} has digits outside base {self.arity}")
        for i, a in enumerate(words):
            for b in words[i + 1:]:
                if a.startswith(b) or b.startswith(a):
                    raise ValueError(f"not prefix-free: {a!r} / {b!r}")
        if self.kraft_sum() > 1:
            raise ValueError(f"Kraft sum {self.kraft_sum()} exceeds 1")

    def length(self, label: Label) -> int:
        return len(self.codewords[label])

    def max_length(self) -> int:
        return max(len(w) for w in self.codewords.values())

    def kraft_sum(self) -> Fraction:
        return sum(
            (Fraction(1, self.arity ** len(w)) for w in self.codewords.values()),
            Fraction(0),
        )

    def expected_length(self, source: FiniteDist) -> Fraction:
        """Exact expected codeword length sum_u P_U(u) sigma(u)."""
        return sum(
            (mass * len(self.codewords[label])
             for label, mass in zip(source.labels, source.masses)),
            Fraction(0),
        )


def huffman_code(source: FiniteDist, arity: int = 2) -> PrefixCode:
    """Optimal prefix code by d-ary Huffman merging.

    Deterministic tie-breaking: among equal masses the earliest-created
    node merges first, and digit 0 goes to the first-merged child.  For
    d > 2 the alphabet is padded with zero-mass dummies so every merge
    takes exactly d nodes; dummies receive no codewords.  A one-symbol
    source gets the empty codeword.
    """
    if arity < 2:
        raise ValueError("arity must be >= 2")
    n = len(source)
    if n == 1:
        return PrefixCode(arity, {source.labels[0]: ""})

    # node: (mass, creation_index); children stored per merged node
    heap: list[tuple[Fraction, int]] = []
    children: dict[int, list[int]] = {}
    leaf_label: dict[int, Label] = {}
    counter = 0
    for label, mass in zip(source.labels, source.masses):
        heapq.heappush(heap, (mass, counter))
        leaf_label[counter] = label
        counter += 1
    pad = 0
    if arity > 2:
        pad = (arity - 1 - (n - 1) % (arity - 1)) % (arity - 1)
    for _ in range(pad):
        heapq.heappush(heap, (Fraction(0), counter))
        leaf_label[counter] = None  # dummy: no codeword
        counter += 1

    while len(heap) > 1:
        merged = [heapq.heappop(heap) for _ in range(arity)]
        children[counter] = [idx for _, idx in merged]
        heapq.heappush(heap, (sum(m for m, _ in merged), counter))
        counter += 1

    codewords: dict[Label, str] = {}
    root = heap[0][1]
    stack = [(root, "")]
    while stack:
        node, word = stack.pop()
        if node in children:
            for digit, child in enumerate(children[node]):
                stack.append((child, word + str(digit)))
        else:
            label = leaf_label[node]
            if label is not None:
                codewords[label] = word
    return PrefixCode(arity, {label: codewords[label] for label in source.labels})


def _exact_ceil_log(ratio: Fraction, base: int) -> int:
    """Smallest k >= 0 with base**k >= ratio, on exact rationals."""
    k = 0
    power = Fraction(1)
    while power < ratio:
        power *= base
        k += 1
    return k


def shannon_code(source: FiniteDist, arity: int = 2) -> PrefixCode:
    """Prefix code with lengths ceil(log_d 1/p), ceilings taken on rationals.

    Codewords are assigned canonically: symbols sorted by decreasing
    probability (original order breaking ties), codeword = first sigma(u)
    digits of the d-ary expansion of the cumulative probability.
    """
    if arity < 2:
        raise ValueError("arity must be >= 2")
    order = sorted(range(len(source)), key=lambda i: (-source.masses[i], i))
    codewords: dict[Label, str] = {}
    cumulative = Fraction(0)
    for i in order:
        mass = source.masses[i]
        sigma = _exact_ceil_log(1 / mass, arity)
        digits = []
        frac = cumulative
        for _ in range(sigma):
            frac *= arity
            digit = int(frac)  # floor: frac stays in [0, arity)
            digits.append(str(digit))
            frac -= digit
        codewords[source.labels[i]] = "".join(digits)
        cumulative += mass
    code = PrefixCode(arity, {label: codewords[label] for label in source.labels})
    return code


# ---------------------------------------------------------------------------
# Compress-encrypt-pad
# ---------------------------------------------------------------------------


def _digit_strings(arity: int, length: int):
    if length == 0:
        yield ""
        return
    for digits in product("0123456789"[:arity], repeat=length):
        yield "".join(digits)


def _mask(word: str, key: str, arity: int) -> str:
    return "".join(str((int(a) + int(b)) % arity) for a, b in zip(word, key))


def build_compress_encrypt_pad(source: FiniteDist, code: PrefixCode) -> CipherSpec:
    """Prefix-compress, mask digit-wise with a uniform key, pad to fixed length.

    The ciphertext is the masked codeword followed by uniformly random pad
    digits up to gamma = max sigma(u), so its length reveals nothing.  The
    key is gamma uniform digits; only the first sigma(u) are consumed.  The
    receiver unmasks digit by digit until the digits read so far form a
    codeword, then ignores the rest.
    """
    missing = [label for label in source.labels if label not in code.codewords]
    if missing:
        raise ValueError(f"code lacks codewords for source symbols {missing}")
    d = code.arity
    gamma = max(len(code.codewords[label]) for label in source.labels)
    key_labels = tuple(_digit_strings(d, gamma))
    key = FiniteDist.uniform(key_labels)

    encoder = {}
    for u in source.labels:
        word = code.codewords[u]
        sigma = len(word)
        pad_prob = Fraction(1, d ** (gamma - sigma))
        for r in key_labels:
            masked = _mask(word, r[:sigma], d)
            entries = tuple(
                EncoderEntry(aux=tail, prob=pad_prob, ciphertext=masked + tail)
                for tail in _digit_strings(d, gamma - sigma)
            )
            encoder[(u, r)] = entries

    word_to_label = {code.codewords[label]: label for label in source.labels}
    decoder = {}
    for r in key_labels:
        for x in _digit_strings(d, gamma):
            prefix = ""
            for k in range(gamma + 1):
                if prefix in word_to_label:
                    decoder[(r, x)] = word_to_label[prefix]
                    break
                if k < gamma:
                    prefix += str((int(x[k]) - int(r[k])) % d)
    return CipherSpec(source, key, encoder, decoder, name=f"compress-encrypt-pad gamma={gamma}")


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------


def format_prefix_code(code: PrefixCode) -> str:
    lines = [f"{FORMAT_HEADER} prefix-code arity={code.arity}"]
    for label, word in code.codewords.items():
        lines.append(f"{label}\t{word}")
    return "\n".join(lines) + "\n"


def format_cipher(spec: CipherSpec) -> str:
    """Sectioned text export: SOURCE / KEY / ENCODER / DECODER blocks."""
    lines = [f"{FORMAT_HEADER} cipher {spec.name}"]
    lines.append("SOURCE")
    for label, mass in zip(spec.source.labels, spec.source.masses):
        lines.append(f"{label}\t{mass}")
    lines.append("KEY")
    for label, mass in zip(spec.key.labels, spec.key.masses):
        lines.append(f"{label}\t{mass}")
    lines.append("ENCODER")
    for u in spec.source.labels:
        for r in spec.key.labels:
            for entry in spec.encoder[(u, r)]:
                lines.append(f"{u}\t{r}\t{entry.aux}\t{entry.prob}\t{entry.ciphertext}")
    lines.append("DECODER")
    for (r, x), u in spec.decoder.items():
        lines.append(f"{r}\t{x}\t{u}")
    return "\n".join(lines) + "\n"


def parse_cipher(text: str) -> CipherSpec:
    """Parse the sectioned cipher format written by :func:`format_cipher`.

    All labels come back as strings; the cipher re-validates on load.
    """
    section = None
    name = "cipher"
    source_pairs: list[tuple[str, Fraction]] = []
    key_pairs: list[tuple[str, Fraction]] = []
    encoder: dict[tuple, list[EncoderEntry]] = {}
    decoder: dict[tuple, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line.split()
            if len(parts) >= 3 and parts[1] == "cipher":
                name = " ".join(parts[2:])
            continue
        if line in ("SOURCE", "KEY", "ENCODER", "DECODER"):
            section = line
            continue
        fields = line.split("\t")
        if section == "SOURCE" and len(fields) == 2:
            source_pairs.append((fields[0], as_mass(fields[1])))
        elif section == "KEY" and len(fields) == 2:
            key_pairs.append((fields[0], as_mass(fields[1])))
        elif section == "ENCODER" and len(fields) == 5:
            u, r, aux, prob, x = fields
            encoder.setdefault((u, r), []).append(
                EncoderEntry(aux=aux, prob=as_mass(prob), ciphertext=x)
            )
        elif section == "DECODER" and len(fields) == 3:
            decoder[(fields[0], fields[1])] = fields[2]
        else:
            raise ValueError(f"line {lineno}: unexpected content {line!r} in section {section}")
    return CipherSpec(
        FiniteDist.from_pairs(source_pairs),
        FiniteDist.from_pairs(key_pairs),
        {k: tuple(v) for k, v in encoder.items()},
        decoder,
        name=name,
    )


def partition_channel_uses(theta: int) -> int:
    """Whole binary channel uses needed to convey a theta-ary ciphertext."""
    return _exact_ceil_log(Fraction(theta), 2)


def partition_consumption_bits(source: FiniteDist, spec: PartitionCodeSpec) -> float:
    """I(R;UX) of a partition code: sum_i P_U(i) log2(theta / psi_i).

    Evaluated from the slot counts, so it stays cheap for large theta.
    Equals H(U) + D(P_U || Q_U) where Q is the slot-frequency distribution.
    """
    total = 0.0
    for mass, slots in zip(source.masses, spec.psi):
        total += float(mass) * math.log2(spec.theta / slots)
    return total


def partition_divergence_bits(source: FiniteDist, spec: PartitionCodeSpec) -> float:
    """D(P_U || Q_U) in bits for a partition spec aligned positionally."""
    if all(
        mass == Fraction(slots, spec.theta)
        for mass, slots in zip(source.masses, spec.psi)
    ):
        return 0.0
    total = 0.0
    for mass, slots in zip(source.masses, spec.psi):
        total += float(mass) * math.log2(float(mass) * spec.theta / slots)
    return total
