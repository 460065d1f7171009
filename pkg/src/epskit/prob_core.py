"""Exact finite probability distributions and information measures.

Every probability mass in this package is a ``fractions.Fraction``.  The
secrecy and independence statements we need to check are exact equalities
between rational numbers, and a floating-point test of ``MI ~ 0`` cannot
distinguish "independent" from "almost independent".  The split enforced
here is:

* probability masses, marginalisation, factorisation tests -> exact rationals;
* entropies and mutual informations -> floats, compared with a global
  tolerance of ``TOL_BITS`` (1e-9 bits).

Two container types carry all the data:

* :class:`FiniteDist` -- a labelled distribution with strictly positive
  masses summing to exactly 1.  Zero-mass symbols are excluded so that
  ``len(dist)`` is always the support size.
* :class:`JointSystem` -- an exact joint table over a (message, key,
  ciphertext) triple, the object every verifier runs on.

Text formats (one symbol per line, tab separated, ``#`` comments, masses
written either as ``p/q`` or as a terminating decimal) are handled by
:func:`parse_dist` / :func:`format_dist` and the joint equivalents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

TOL_BITS = 1e-9

AXES = ("U", "R", "X")

Label = Hashable


class DivergenceInfiniteError(ValueError):
    """Raised when D(p || q) is infinite because q lacks part of p's support."""


def as_mass(value) -> Fraction:
    """Coerce ``value`` to an exact Fraction in [0, 1].

    Accepts Fraction, int, numerator/denominator strings ("3/10") and
    terminating decimals ("0.3").  Floats are rejected: binary floats do
    not represent decimal literals exactly, so passing one would silently
    corrupt the arithmetic this package promises to keep exact.
    """
    if isinstance(value, float):
        raise TypeError(
            "floats are inexact; pass a Fraction or a string such as '0.3' or '3/10'"
        )
    if isinstance(value, Fraction):
        mass = value
    elif isinstance(value, int):
        mass = Fraction(value)
    elif isinstance(value, str):
        try:
            mass = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse mass {value!r}: {exc}") from None
    else:
        raise TypeError(f"cannot interpret {type(value).__name__} as a probability mass")
    if mass < 0 or mass > 1:
        raise ValueError(f"probability mass {mass} outside [0, 1]")
    return mass


@dataclass(frozen=True)
class FiniteDist:
    """A finite probability distribution with exact rational masses.

    Invariants enforced at construction: masses are strictly positive
    Fractions, they sum to exactly 1, and labels are unique.
    """

    labels: tuple[Label, ...]
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.masses):
            raise ValueError("labels and masses must have the same length")
        if len(self.labels) == 0:
            raise ValueError("a distribution needs at least one symbol")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels in distribution")
        for mass in self.masses:
            if not isinstance(mass, Fraction):
                raise TypeError("masses must be Fractions; use FiniteDist.from_masses")
            if mass <= 0:
                raise ValueError(
                    f"mass {mass} not strictly positive; drop zero-mass symbols"
                )
        if sum(self.masses) != 1:
            raise ValueError(f"masses sum to {sum(self.masses)}, expected exactly 1")

    @classmethod
    def from_masses(cls, masses: Iterable, labels: Sequence[Label] | None = None) -> "FiniteDist":
        converted = tuple(as_mass(m) for m in masses)
        if labels is None:
            labels = tuple(range(len(converted)))
        return cls(tuple(labels), converted)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Label, object]]) -> "FiniteDist":
        pairs = list(pairs)
        return cls.from_masses([m for _, m in pairs], [l for l, _ in pairs])

    @classmethod
    def uniform(cls, labels_or_size) -> "FiniteDist":
        if isinstance(labels_or_size, int):
            labels = tuple(range(labels_or_size))
        else:
            labels = tuple(labels_or_size)
        n = len(labels)
        return cls(labels, tuple(Fraction(1, n) for _ in labels))

    def __len__(self) -> int:
        return len(self.labels)

    def mass(self, label: Label) -> Fraction:
        try:
            return self.masses[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"label {label!r} not in distribution") from None

    def as_dict(self) -> dict[Label, Fraction]:
        return dict(zip(self.labels, self.masses))

    @property
    def max_mass(self) -> Fraction:
        return max(self.masses)

    @property
    def min_mass(self) -> Fraction:
        return min(self.masses)

    def is_uniform(self) -> bool:
        return all(m == self.masses[0] for m in self.masses)

    def sorted_desc(self) -> tuple[Fraction, ...]:
        return tuple(sorted(self.masses, reverse=True))


# ---------------------------------------------------------------------------
# Generic exact-table helpers.  A "table" is a mapping from coordinate tuples
# to positive Fractions summing to 1; these back both JointSystem and the
# larger ad-hoc joints used by the multi-round machinery.
# ---------------------------------------------------------------------------


def project_table(table: Mapping[tuple, Fraction], positions: Sequence[int]) -> dict[tuple, Fraction]:
    """Exact marginal of a table onto the given coordinate positions."""
    out: dict[tuple, Fraction] = {}
    for cell, mass in table.items():
        key = tuple(cell[i] for i in positions)
        out[key] = out.get(key, Fraction(0)) + mass
    return out


def table_entropy(table: Mapping, base: float = 2.0) -> float:
    """Shannon entropy of the table's masses, in log-``base`` units."""
    if base <= 0 or base == 1:
        raise ValueError("entropy base must be positive and != 1")
    log_base = math.log(base)
    total = 0.0
    for mass in table.values():
        p = float(mass)
        if p > 0.0:
            total -= p * math.log(p) / log_base
    return max(total, 0.0)


def tables_factorize(
    joint_ab: Mapping[tuple, Fraction],
    marg_a: Mapping, marg_b: Mapping,
) -> bool:
    """Exact test of P_AB == P_A x P_B, including zero cells of the product."""
    zero = Fraction(0)
    for ka, pa in marg_a.items():
        for kb, pb in marg_b.items():
            if joint_ab.get((ka, kb), zero) != pa * pb:
                return False
    return True


@dataclass(frozen=True)
class JointSystem:
    """Exact joint distribution over (message U, key R, ciphertext X).

    ``table`` maps (u, r, x) triples to strictly positive Fractions; zero
    cells are simply absent.  Label tuples fix iteration order, and every
    listed label must carry positive marginal mass.
    """

    u_labels: tuple[Label, ...]
    r_labels: tuple[Label, ...]
    x_labels: tuple[Label, ...]
    table: Mapping[tuple[Label, Label, Label], Fraction]

    def __post_init__(self):
        if not self.table:
            raise ValueError("joint table is empty")
        total = Fraction(0)
        u_set, r_set, x_set = set(self.u_labels), set(self.r_labels), set(self.x_labels)
        seen_u, seen_r, seen_x = set(), set(), set()
        for (u, r, x), mass in self.table.items():
            if not isinstance(mass, Fraction):
                raise TypeError("joint masses must be Fractions")
            if mass <= 0:
                raise ValueError(f"cell {(u, r, x)} has non-positive mass {mass}")
            if u not in u_set or r not in r_set or x not in x_set:
                raise ValueError(f"cell {(u, r, x)} uses a label missing from the alphabets")
            total += mass
            seen_u.add(u)
            seen_r.add(r)
            seen_x.add(x)
        if total != 1:
            raise ValueError(f"joint masses sum to {total}, expected exactly 1")
        if seen_u != u_set or seen_r != r_set or seen_x != x_set:
            raise ValueError("every listed label must have positive marginal mass")

    @classmethod
    def from_cells(cls, cells: Mapping[tuple[Label, Label, Label], Fraction]) -> "JointSystem":
        """Build a joint from a cell map, deriving label order from first appearance."""
        u_labels: list[Label] = []
        r_labels: list[Label] = []
        x_labels: list[Label] = []
        for (u, r, x), mass in cells.items():
            if mass == 0:
                continue
            if u not in u_labels:
                u_labels.append(u)
            if r not in r_labels:
                r_labels.append(r)
            if x not in x_labels:
                x_labels.append(x)
        positive = {cell: mass for cell, mass in cells.items() if mass != 0}
        return cls(tuple(u_labels), tuple(r_labels), tuple(x_labels), positive)

    def _axis_positions(self, axes: Sequence[str]) -> tuple[int, ...]:
        positions = []
        for axis in axes:
            if axis not in AXES:
                raise ValueError(f"unknown axis {axis!r}; expected members of {AXES}")
            positions.append(AXES.index(axis))
        return tuple(positions)

    def marginal_table(self, axes: Sequence[str]) -> dict[tuple, Fraction]:
        return project_table(self.table, self._axis_positions(axes))

    def marginal(self, axis: str) -> FiniteDist:
        """Exact single-axis marginal as a FiniteDist, in alphabet order."""
        table = self.marginal_table((axis,))
        labels = {"U": self.u_labels, "R": self.r_labels, "X": self.x_labels}[axis]
        return FiniteDist(tuple(labels), tuple(table[(label,)] for label in labels))

    def labels_for(self, axis: str) -> tuple[Label, ...]:
        return {"U": self.u_labels, "R": self.r_labels, "X": self.x_labels}[axis]


@dataclass(frozen=True)
class InfoReport:
    """Floating-point information measures of a JointSystem, in bits by default.

    ``i_r_uxjoint`` is I(R; UX), the expected key consumption of an EPS
    system; ``h_r_given_ux`` is its residual secret randomness.
    """

    h_u: float
    h_r: float
    h_x: float
    i_ux: float
    i_ur: float
    i_xr: float
    h_u_given_rx: float
    h_r_given_ux: float
    h_x_given_ur: float
    i_r_uxjoint: float


def entropy(dist: FiniteDist, base: float = 2.0) -> float:
    """Shannon entropy -sum p log_base p over the support."""
    return table_entropy(dict(enumerate(dist.masses)), base)


def binary_entropy(gamma, base: float = 2.0) -> float:
    """Entropy of a (gamma, 1-gamma) coin; 0 at both endpoints."""
    g = float(gamma)
    if g < 0.0 or g > 1.0:
        raise ValueError(f"binary_entropy argument {g} outside [0, 1]")
    if g == 0.0 or g == 1.0:
        return 0.0
    log_base = math.log(base)
    return -(g * math.log(g) + (1.0 - g) * math.log(1.0 - g)) / log_base


def relative_entropy(p: FiniteDist, q: FiniteDist, base: float = 2.0) -> float:
    """D(p || q), aligned by label.  Exactly 0 iff p == q cell by cell.

    Raises DivergenceInfiniteError when q gives zero mass to part of p's
    support (q's support is its label set, so this means a missing label).
    """
    q_map = q.as_dict()
    for label in p.labels:
        if label not in q_map:
            raise DivergenceInfiniteError(
                f"divergence infinite: q has no mass on label {label!r}"
            )
    if all(q_map[label] == mass for label, mass in zip(p.labels, p.masses)):
        return 0.0
    log_base = math.log(base)
    total = 0.0
    for label, mass in zip(p.labels, p.masses):
        total += float(mass) * math.log(float(mass) / float(q_map[label])) / log_base
    return total


def _clamp_mi(value: float) -> float:
    if value < 0.0:
        if value < -TOL_BITS:
            raise ArithmeticError(f"mutual information {value} below -{TOL_BITS}")
        return 0.0
    return value


def _clamp_h(value: float) -> float:
    return 0.0 if -TOL_BITS < value < 0.0 else value


def info_report(joint: JointSystem, base: float = 2.0) -> InfoReport:
    """All single, pairwise and conditional measures of a joint system.

    Marginalisation is exact; only the final entropies are floats.
    """
    h_u = table_entropy(joint.marginal_table(("U",)), base)
    h_r = table_entropy(joint.marginal_table(("R",)), base)
    h_x = table_entropy(joint.marginal_table(("X",)), base)
    h_ur = table_entropy(joint.marginal_table(("U", "R")), base)
    h_ux = table_entropy(joint.marginal_table(("U", "X")), base)
    h_rx = table_entropy(joint.marginal_table(("R", "X")), base)
    h_urx = table_entropy(joint.table, base)
    return InfoReport(
        h_u=h_u,
        h_r=h_r,
        h_x=h_x,
        i_ux=_clamp_mi(h_u + h_x - h_ux),
        i_ur=_clamp_mi(h_u + h_r - h_ur),
        i_xr=_clamp_mi(h_x + h_r - h_rx),
        h_u_given_rx=_clamp_h(h_urx - h_rx),
        h_r_given_ux=_clamp_h(h_urx - h_ux),
        h_x_given_ur=_clamp_h(h_urx - h_ur),
        i_r_uxjoint=_clamp_mi(h_r + h_ux - h_urx),
    )


def is_independent(joint: JointSystem, group_a: Iterable[str], group_b: Iterable[str]) -> bool:
    """Exact independence test between two disjoint groups of axes.

    True iff the joint marginal over group_a + group_b factorizes cell by
    cell as a product of Fractions.  No floating tolerance is involved.
    """
    axes_a = tuple(group_a)
    axes_b = tuple(group_b)
    if not axes_a or not axes_b:
        raise ValueError("both groups must be nonempty")
    if set(axes_a) & set(axes_b):
        raise ValueError(f"groups overlap: {set(axes_a) & set(axes_b)}")
    pos_a = joint._axis_positions(axes_a)
    pos_b = joint._axis_positions(axes_b)
    marg_a = project_table(joint.table, pos_a)
    marg_b = project_table(joint.table, pos_b)
    joint_ab: dict[tuple, Fraction] = {}
    for cell, mass in joint.table.items():
        key = (tuple(cell[i] for i in pos_a), tuple(cell[i] for i in pos_b))
        joint_ab[key] = joint_ab.get(key, Fraction(0)) + mass
    return tables_factorize(joint_ab, marg_a, marg_b)


def majorizes(p: FiniteDist, q: FiniteDist) -> bool:
    """True iff p majorizes q: sorted partial sums of p dominate those of q.

    Distributions are padded with zeros to a common length, so supports of
    different sizes compare naturally (a point mass majorizes everything).
    """
    n = max(len(p), len(q))
    ps = list(p.sorted_desc()) + [Fraction(0)] * (n - len(p))
    qs = list(q.sorted_desc()) + [Fraction(0)] * (n - len(q))
    run_p = Fraction(0)
    run_q = Fraction(0)
    for a, b in zip(ps, qs):
        run_p += a
        run_q += b
        if run_p < run_q:
            return False
    return True


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

FORMAT_HEADER = "#epskit-v1"


def format_dist(dist: FiniteDist, kind: str = "dist") -> str:
    lines = [f"{FORMAT_HEADER} {kind}"]
    for label, mass in zip(dist.labels, dist.masses):
        lines.append(f"{label}\t{mass}")
    return "\n".join(lines) + "\n"


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def parse_dist(text: str) -> FiniteDist:
    """Parse the one-symbol-per-line distribution format.

    Each data line is ``<label><TAB><mass>`` with the mass written as
    ``p/q`` or a terminating decimal; ``#`` lines are comments.
    """
    pairs: list[tuple[str, Fraction]] = []
    for lineno, line in _data_lines(text):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected '<label><TAB><mass>', got {line!r}")
        pairs.append((fields[0], as_mass(fields[1])))
    if not pairs:
        raise ValueError("no distribution data found")
    return FiniteDist.from_pairs(pairs)


def format_joint(joint: JointSystem) -> str:
    lines = [f"{FORMAT_HEADER} joint"]
    for (u, r, x), mass in joint.table.items():
        lines.append(f"{u}\t{r}\t{x}\t{mass}")
    return "\n".join(lines) + "\n"


def parse_joint(text: str) -> JointSystem:
    """Parse the ``<u><TAB><r><TAB><x><TAB><mass>`` joint format."""
    cells: dict[tuple, Fraction] = {}
    for lineno, line in _data_lines(text):
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(
                f"line {lineno}: expected '<u>\\t<r>\\t<x>\\t<mass>', got {line!r}"
            )
        key = (fields[0], fields[1], fields[2])
        if key in cells:
            raise ValueError(f"line {lineno}: duplicate cell {key}")
        mass = as_mass(fields[3])
        if mass > 0:
            cells[key] = mass
    if not cells:
        raise ValueError("no joint data found")
    return JointSystem.from_cells(cells)
