"""Shared generators and fixture systems for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

from epskit import FiniteDist, JointSystem


def random_source(
    rng: random.Random,
    max_support: int = 6,
    max_denominator: int = 60,
    min_support: int = 2,
) -> FiniteDist:
    """Random rational distribution: cut a denominator-sized bar at random."""
    n = rng.randint(min_support, max_support)
    d = rng.randint(max(n, 2), max_denominator)
    cuts = sorted(rng.sample(range(1, d), n - 1))
    edges = [0] + cuts + [d]
    return FiniteDist.from_masses(
        [Fraction(edges[i + 1] - edges[i], d) for i in range(n)]
    )


def example3_joint() -> JointSystem:
    """The hand-built 2-message, 4-symbol system with zero excess consumption.

    P_X = P_R = (2/5, 1/5, 1/5, 1/5) independent; the message is 0 exactly
    when one of (X, R) is 0 and the other is not, or X = R != 0.
    """
    p = {0: Fraction(2, 5), 1: Fraction(1, 5), 2: Fraction(1, 5), 3: Fraction(1, 5)}
    cells = {}
    for x in range(4):
        for r in range(4):
            u = 0 if ((x == 0) != (r == 0)) or (x == r != 0) else 1
            cells[(u, r, x)] = p[x] * p[r]
    return JointSystem.from_cells(cells)


def product_joint(p_u: FiniteDist, p_r: FiniteDist, p_x: FiniteDist) -> JointSystem:
    """Fully independent triple (no decoder exists; not an EPS system)."""
    cells = {}
    for u, mu in zip(p_u.labels, p_u.masses):
        for r, mr in zip(p_r.labels, p_r.masses):
            for x, mx in zip(p_x.labels, p_x.masses):
                cells[(u, r, x)] = mu * mr * mx
    return JointSystem.from_cells(cells)


def strict_feasible_by_lp(matrix, p) -> bool:
    """Independent float-LP oracle for one marginal of a decoding matrix.

    Maximizes the smallest coordinate of {v >= 0 : Mv = p*1, sum v = 1};
    strict feasibility means the optimum is positive.
    """
    from scipy.optimize import linprog

    n = len(matrix)
    m = len(matrix[0])
    a_eq = [[float(matrix[i][j]) for j in range(m)] + [0.0] for i in range(n)]
    a_eq.append([1.0] * m + [0.0])
    b_eq = [float(p)] * n + [1.0]
    a_ub = [[-(1.0 if j == k else 0.0) for j in range(m)] + [1.0] for k in range(m)]
    b_ub = [0.0] * m
    res = linprog(
        c=[0.0] * m + [-1.0],
        A_eq=a_eq,
        b_eq=b_eq,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=[(0, 1)] * m + [(None, None)],
        method="highs",
    )
    return res.status == 0 and res.x is not None and res.x[-1] > 1e-9
