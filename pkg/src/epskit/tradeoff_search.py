"""The consumption-versus-channel-use tradeoff, explored constructively.

For a binary message, every minimal-excess system (I(X;R) = 0) with finite
alphabets is described by a 0/1 decoding matrix G -- entry (i, j) is the
message decoded from ciphertext i under key j -- together with strictly
positive rational marginals x, r satisfying the balance constraints

    G r = p * 1        (every ciphertext sees the same posterior),
    x^T G = p * 1^T    (every key sees the same posterior),
    sum x = sum r = 1,

with p the mass of message 1.  :func:`enumerate_decoding_systems` searches
these exhaustively (up to row/column permutation symmetry) with exact
rational feasibility tests, and :func:`reduce_dependent_rows` applies the
mass-shift that removes a linearly dependent row while preserving all
four constraints, shrinking the ciphertext support by at least one.
Iterating the reduction always terminates in a square invertible system
with a rational solution, which is why irrational message masses cannot
be served by finite alphabets at zero excess.

For general sources the module assembles a constructive upper envelope of
the consumption-vs-H(X) frontier from partition codes, compress-encrypt-
pad schemes, matrix enumeration and spurious ciphertext padding.  The
envelope is reported as an upper bound only; the exact frontier is not
claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations
from typing import Sequence

from .ciphers import (
    huffman_code,
    partition_consumption_bits,
    partition_divergence_bits,
    psi_exact,
    psi_floor,
    shannon_code,
)
from .eps_verifier import check_eps
from .prob_core import FiniteDist, JointSystem, as_mass, entropy, info_report

DEFAULT_DIM_CAP = 5


@dataclass(frozen=True)
class FeasibleWitness:
    """A decoding matrix with strictly positive balanced marginals.

    Rows index ciphertext symbols, columns index key symbols, and entries
    are the decoded binary message.  Construction re-checks all four
    balance constraints exactly and rejects zero masses.
    """

    g_matrix: tuple[tuple[int, ...], ...]
    x_vec: tuple[Fraction, ...]
    r_vec: tuple[Fraction, ...]
    p_u1: Fraction

    def __post_init__(self):
        n = len(self.g_matrix)
        if n == 0:
            raise ValueError("empty decoding matrix")
        m = len(self.g_matrix[0])
        if any(len(row) != m for row in self.g_matrix):
            raise ValueError("ragged decoding matrix")
        if any(entry not in (0, 1) for row in self.g_matrix for entry in row):
            raise ValueError("decoding matrix entries must be 0 or 1")
        if len(self.x_vec) != n or len(self.r_vec) != m:
            raise ValueError("marginal lengths do not match the matrix shape")
        if not (0 < self.p_u1 < 1):
            raise ValueError("message mass must lie strictly between 0 and 1")
        if any(v <= 0 for v in self.x_vec) or any(v <= 0 for v in self.r_vec):
            raise ValueError("marginals must be strictly positive on their support")
        if sum(self.x_vec) != 1 or sum(self.r_vec) != 1:
            raise ValueError("marginals must sum to exactly 1")
        for i, row in enumerate(self.g_matrix):
            if sum(g * r for g, r in zip(row, self.r_vec)) != self.p_u1:
                raise ValueError(f"row balance fails at ciphertext {i}")
        for j in range(m):
            if sum(self.g_matrix[i][j] * self.x_vec[i] for i in range(n)) != self.p_u1:
                raise ValueError(f"column balance fails at key {j}")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.g_matrix), len(self.g_matrix[0])


def witness_joint(witness: FeasibleWitness) -> JointSystem:
    """The joint system a witness describes: P(x=i, r=j) = x_i r_j, u = G[i][j]."""
    cells = {}
    for i, row in enumerate(witness.g_matrix):
        for j, u in enumerate(row):
            cells[(u, j, i)] = witness.x_vec[i] * witness.r_vec[j]
    return JointSystem.from_cells(cells)


# ---------------------------------------------------------------------------
# Exact rational linear algebra (tiny systems only)
# ---------------------------------------------------------------------------


def _rref(matrix: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    rows = [row[:] for row in matrix]
    pivots: list[int] = []
    lead = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot_row = None
        for i in range(lead, len(rows)):
            if rows[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[lead], rows[pivot_row] = rows[pivot_row], rows[lead]
        factor = rows[lead][col]
        rows[lead] = [v / factor for v in rows[lead]]
        for i in range(len(rows)):
            if i != lead and rows[i][col] != 0:
                scale = rows[i][col]
                rows[i] = [a - scale * b for a, b in zip(rows[i], rows[lead])]
        pivots.append(col)
        lead += 1
        if lead == len(rows):
            break
    return rows, pivots


def _solve_unique(a_rows: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Solve A v = b when it has exactly one solution; None otherwise."""
    ncols = len(a_rows[0])
    augmented = [row + [rhs] for row, rhs in zip(a_rows, b)]
    reduced, pivots = _rref(augmented)
    if ncols in pivots:
        return None  # inconsistent
    if len(pivots) < ncols:
        return None  # underdetermined
    solution = [Fraction(0)] * ncols
    for row, col in zip(reduced, pivots):
        solution[col] = row[-1]
    return solution


def _nullspace(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of {v : M v = 0} via reduced row echelon form."""
    ncols = len(matrix[0])
    reduced, pivots = _rref(matrix)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            vec[p] = -row[f]
        basis.append(vec)
    return basis


def _strictly_positive_solution(
    eq_rows: list[list[Fraction]], rhs: list[Fraction], nvars: int
) -> tuple[Fraction, ...] | None:
    """A strictly positive point of {v >= 0 : A v = b}, or None.

    The polytope is bounded (a sum-to-one row is always present), so it is
    the convex hull of its basic feasible points; max v_k over the polytope
    is attained at one of them.  The barycenter of all of them is therefore
    strictly positive exactly when a strictly positive point exists.
    """
    vertices: set[tuple[Fraction, ...]] = set()
    for size in range(1, nvars + 1):
        for support in combinations(range(nvars), size):
            sub = [[row[j] for j in support] for row in eq_rows]
            solution = _solve_unique(sub, rhs)
            if solution is None or any(v < 0 for v in solution):
                continue
            full = [Fraction(0)] * nvars
            for j, v in zip(support, solution):
                full[j] = v
            vertices.add(tuple(full))
    if not vertices:
        return None
    count = len(vertices)
    barycenter = tuple(sum(col, Fraction(0)) / count for col in zip(*sorted(vertices)))
    if any(v <= 0 for v in barycenter):
        return None
    return barycenter


# ---------------------------------------------------------------------------
# Matrix enumeration
# ---------------------------------------------------------------------------


def _canonical_matrix(rows: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    """Class representative under row/column permutations.

    Sorting rows after any column permutation yields a class invariant;
    the lexicographic minimum over column permutations is canonical.
    """
    m = len(rows[0])
    best = None
    for perm in permutations(range(m)):
        candidate = tuple(sorted((tuple(row[j] for j in perm) for row in rows), reverse=True))
        if best is None or candidate < best:
            best = candidate
    return best


def enumerate_decoding_systems(
    p_u1, n: int, m: int, dim_cap: int = DEFAULT_DIM_CAP
) -> list[FeasibleWitness]:
    """All feasible decoding systems with n ciphertexts and m keys.

    Exhaustive over binary matrices up to row/column permutation symmetry;
    each surviving matrix gets an exact rational strict-feasibility test
    for both marginals.  Returns one witness per feasible canonical
    matrix, in deterministic order (possibly empty).
    """
    p = as_mass(p_u1)
    if not (0 < p < 1):
        raise ValueError("message mass must lie strictly in (0, 1)")
    if not (2 <= n <= dim_cap and 2 <= m <= dim_cap):
        raise ValueError(
            f"alphabet sizes n={n}, m={m} outside the enumeration budget [2, {dim_cap}]"
        )
    # Rows of all zeros or all ones force the message mass to 0 or 1.
    row_values = [
        tuple((value >> (m - 1 - k)) & 1 for k in range(m))
        for value in range(2 ** m - 2, 0, -1)
    ]
    one = Fraction(1)
    ones_row = [one] * m
    rhs_r = [p] * n + [one]
    rhs_x = [p] * m + [one]
    seen: set[tuple] = set()
    witnesses: list[FeasibleWitness] = []
    for combo in combinations_with_replacement(row_values, n):
        column_sums = [sum(row[j] for row in combo) for j in range(m)]
        if any(s == 0 or s == n for s in column_sums):
            continue
        matrix = _canonical_matrix(combo)
        if matrix in seen:
            continue
        seen.add(matrix)
        r_rows = [[Fraction(v) for v in row] for row in matrix] + [ones_row[:]]
        r_vec = _strictly_positive_solution(r_rows, rhs_r, m)
        if r_vec is None:
            continue
        x_rows = [[Fraction(matrix[i][j]) for i in range(n)] for j in range(m)] + [[one] * n]
        x_vec = _strictly_positive_solution(x_rows, rhs_x, n)
        if x_vec is None:
            continue
        witnesses.append(FeasibleWitness(matrix, x_vec, r_vec, p))
    witnesses.sort(key=lambda w: w.g_matrix)
    return witnesses


def reduce_dependent_rows(witness: FeasibleWitness) -> FeasibleWitness:
    """One step of the dependent-row mass shift; identity if rows independent.

    A rational dependency sum_i c_i G_i = 0 splits into positive and
    negative index sets with equal coefficient sums.  Shifting ciphertext
    mass by the largest step that keeps everything nonnegative zeroes out
    at least one row, which is then dropped; all four balance constraints
    survive the shift exactly.
    """
    g_rows = [[Fraction(v) for v in row] for row in witness.g_matrix]
    transpose = [[g_rows[i][j] for i in range(len(g_rows))] for j in range(len(g_rows[0]))]
    dependencies = _nullspace(transpose)
    if not dependencies:
        return witness
    coeffs = dependencies[0]
    assert sum(coeffs) == 0, "row balance forces dependency coefficients to cancel"
    step, pivot = min(
        (witness.x_vec[i] / abs(c), i) for i, c in enumerate(coeffs) if c != 0
    )
    if coeffs[pivot] < 0:
        coeffs = [-c for c in coeffs]
    new_x = [x - step * c for x, c in zip(witness.x_vec, coeffs)]
    keep = [i for i, v in enumerate(new_x) if v != 0]
    assert len(keep) < len(new_x)
    return FeasibleWitness(
        tuple(witness.g_matrix[i] for i in keep),
        tuple(new_x[i] for i in keep),
        witness.r_vec,
        witness.p_u1,
    )


def _transpose_witness(witness: FeasibleWitness) -> FeasibleWitness:
    n, m = witness.shape
    return FeasibleWitness(
        tuple(tuple(witness.g_matrix[i][j] for i in range(n)) for j in range(m)),
        witness.r_vec,
        witness.x_vec,
        witness.p_u1,
    )


def reduce_to_square(witness: FeasibleWitness) -> FeasibleWitness:
    """Iterate row and column reductions until both are independent.

    The result is a square invertible decoding system; with rational
    inputs its marginals are the unique rational solution of the balance
    equations.
    """
    current = witness
    while True:
        reduced = reduce_dependent_rows(current)
        if reduced is not current:
            current = reduced
            continue
        flipped = _transpose_witness(current)
        reduced = reduce_dependent_rows(flipped)
        if reduced is not flipped:
            current = _transpose_witness(reduced)
            continue
        return current


# ---------------------------------------------------------------------------
# Spurious-randomness padding and sweeps
# ---------------------------------------------------------------------------


def pad_ciphertext(joint: JointSystem, pad: FiniteDist) -> JointSystem:
    """Append independent spurious randomness to the ciphertext.

    X' = (X, A) with A ~ pad independent of everything raises H(X) by
    exactly H(pad) and leaves the key consumption unchanged; the output
    is again a valid EPS system.
    """
    eps = check_eps(joint)
    if not eps.is_eps:
        raise ValueError(
            f"padding requires an EPS input; failing: {', '.join(eps.failing_constraints())}"
        )
    cells = {}
    for (u, r, x), mass in joint.table.items():
        for a, pa in zip(pad.labels, pad.masses):
            cells[(u, r, (x, a))] = mass * pa
    return JointSystem.from_cells(cells)


@dataclass(frozen=True)
class SweepPoint:
    theta: int
    consumption: float
    divergence: float
    h_x: float


def theta_sweep(source: FiniteDist, thetas: Sequence[int]) -> list[SweepPoint]:
    """Floor-partition metrics for each theta, evaluated from the slot counts.

    Returns (theta, I(R;UX), D(P||Q), H(X)) per theta; the divergence is
    nonnegative and tends to zero as theta grows.  Large theta stays cheap
    because nothing here builds the theta^2-cell joint.
    """
    points = []
    for theta in thetas:
        spec = psi_floor(source, theta)
        points.append(
            SweepPoint(
                theta=theta,
                consumption=partition_consumption_bits(source, spec),
                divergence=partition_divergence_bits(source, spec),
                h_x=math.log2(theta),
            )
        )
    return points


@dataclass(frozen=True)
class TradeoffPoint:
    gamma: float
    consumption: float
    h_x: float
    witness: str


def tradeoff_frontier(
    source: FiniteDist,
    gamma_grid: Sequence[float],
    max_matrix_dim: int = 4,
    theta_cap: int = 4096,
) -> list[TradeoffPoint]:
    """Constructive upper envelope of achievable (gamma, consumption) pairs.

    gamma is the channel-use excess H(X) - log2 |U|.  Candidate systems:
    the one-time pad, exact and floor partition codes, compress-encrypt-
    pad with Huffman and Shannon codes, and (for binary sources) every
    feasible decoding matrix up to ``max_matrix_dim``.  A system found at
    gamma0 covers every grid point gamma >= gamma0, since spurious
    ciphertext padding buys extra gamma for free; the envelope is
    therefore non-increasing by construction.
    """
    if any(g < 0 for g in gamma_grid):
        raise ValueError("gamma values must be nonnegative")
    m = len(source)
    log_m = math.log2(m)
    h_u = entropy(source)
    candidates: list[tuple[float, float, str]] = [(0.0, log_m, "one-time pad")]

    exact = psi_exact(source)
    if exact.theta <= theta_cap:
        candidates.append(
            (math.log2(exact.theta) - log_m, h_u, f"partition theta={exact.theta}")
        )

    floor_thetas = sorted(
        {math.ceil(m * 2.0 ** g) for g in gamma_grid if m * 2.0 ** g <= theta_cap}
    )
    min_theta = math.ceil(1 / source.min_mass)
    for theta in floor_thetas:
        if theta < min_theta or theta < m + 1:
            continue
        spec = psi_floor(source, theta)
        candidates.append(
            (
                math.log2(theta) - log_m,
                partition_consumption_bits(source, spec),
                f"floor partition theta={theta}",
            )
        )

    for label, code in (("huffman", huffman_code(source)), ("shannon", shannon_code(source))):
        gamma0 = code.max_length() - log_m
        candidates.append(
            (gamma0, float(code.expected_length(source)), f"compress-encrypt-pad {label}")
        )

    if m == 2 and max_matrix_dim >= 2:
        p1 = source.masses[1]
        for dim in range(2, max_matrix_dim + 1):
            for witness in enumerate_decoding_systems(p1, dim, dim, dim_cap=max_matrix_dim):
                rep = info_report(witness_joint(witness))
                candidates.append(
                    (
                        max(rep.h_x - log_m, 0.0),
                        rep.i_r_uxjoint,
                        f"decoding matrix {dim}x{dim}",
                    )
                )

    points = []
    for gamma in gamma_grid:
        reachable = [c for c in candidates if c[0] <= gamma + 1e-12]
        gamma0, consumption, label = min(reachable, key=lambda c: (c[1], c[0]))
        if gamma0 < gamma - 1e-12:
            label += " + padding"
        points.append(
            TradeoffPoint(
                gamma=float(gamma), consumption=consumption, h_x=log_m + gamma, witness=label
            )
        )
    return points


def frontier_table(points: Sequence[TradeoffPoint], precision: int = 6) -> str:
    """Plot-ready CSV: gamma,consumption,h_x,witness with deterministic order."""
    lines = ["gamma,consumption,h_x,witness"]
    for p in points:
        lines.append(
            f"{p.gamma:.{precision}f},{p.consumption:.{precision}f},{p.h_x:.{precision}f},{p.witness}"
        )
    return "\n".join(lines) + "\n"


def sweep_table(points: Sequence[SweepPoint], precision: int = 6) -> str:
    lines = ["theta,consumption,divergence,h_x"]
    for p in points:
        lines.append(
            f"{p.theta},{p.consumption:.{precision}f},{p.divergence:.{precision}f},{p.h_x:.{precision}f}"
        )
    return "\n".join(lines) + "\n"
