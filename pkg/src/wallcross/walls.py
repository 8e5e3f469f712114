"""Wall enumeration, crossing signs and the chamber-difference sum.

A wall is the positive-square orthogonal complement of a lattice class alpha
with alpha = c mod 2 and alpha^2 = p1 + 4r < 0.  Crossing the segment between
two period points changes the invariant by the signed sum of difference
terms over the walls the segment meets.  All arithmetic is exact: period
points are rational vectors and every sign test is a rational comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .closed_forms import SOURCE_DERIVED, closed_form_delta
from .errata import ErratumReport, build_erratum_report
from .geometry import (
    PERMUTATION_SUM,
    ArityError,
    GeometryError,
    ManifoldModel,
    SymForm,
    evaluate_on_table,
    pairing_table_for,
    ppoly_str,
)
from .ring import as_fraction

EPSILON_HALF = "half"
EPSILON_QUARTER = "quarter"


class WallError(Exception):
    pass


class ParityError(WallError):
    """c and alpha do not agree mod 2."""


class DegenerateChamberError(WallError):
    """A period point lies on an enumerated wall."""


class InvalidPeriodPointError(WallError):
    """Period point with non-positive square, or endpoints in opposite cones."""


@dataclass(frozen=True)
class WallDatum:
    """One crossed wall: representative class, level, sign, support flag."""

    alpha: tuple[int, ...]
    r: int
    alpha_sq: int
    epsilon: int
    supported: bool


@dataclass(frozen=True)
class CrossingProblem:
    """Two period points, a bundle, and the classes to evaluate on."""

    M: ManifoldModel
    p1: int
    c: tuple[int, ...]
    omega_minus: tuple[Fraction, ...]
    omega_plus: tuple[Fraction, ...]
    l: int
    xs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.M.rank
        for name, vec in (("c", self.c), ("omega_minus", self.omega_minus),
                          ("omega_plus", self.omega_plus)):
            if len(vec) != n:
                raise ArityError(f"{name} has length {len(vec)}, lattice rank is {n}")
        for x in self.xs:
            if len(x) != n:
                raise ArityError("class length does not match the lattice rank")
        for name, omega in (("omega_minus", self.omega_minus), ("omega_plus", self.omega_plus)):
            if self.M.square(omega) <= 0:
                raise InvalidPeriodPointError(f"{name} has non-positive square")
        if self.M.pair(self.omega_minus, self.omega_plus) <= 0:
            raise InvalidPeriodPointError(
                "period points lie in opposite components of the positive cone"
            )

    @property
    def d(self) -> int:
        return -self.p1 - 3


def epsilon_sign(
    c: Sequence[int],
    alpha: Sequence[int],
    M: ManifoldModel,
    exponent_rule: str = EPSILON_HALF,
) -> int:
    """Crossing sign (-1)^((c-alpha)^2 / 2), or the quarter-exponent variant.

    Under the half rule the exponent is 2 beta^2 for c - alpha = 2 beta, so
    the sign is identically +1 on valid input; the quarter rule exposes the
    alternative reading (-1)^(beta^2).
    """
    diff = [ci - ai for ci, ai in zip(c, alpha)]
    if len(diff) != M.rank:
        raise ArityError("class length does not match the lattice rank")
    if any(x % 2 for x in diff):
        raise ParityError("c and alpha do not agree mod 2")
    square = M.square(diff)
    if exponent_rule == EPSILON_HALF:
        exponent = square / 2
    elif exponent_rule == EPSILON_QUARTER:
        exponent = square / 4
    else:
        raise WallError(f"unknown exponent rule {exponent_rule!r}")
    if exponent.denominator != 1:
        raise WallError("non-integer sign exponent")
    return -1 if exponent.numerator % 2 else 1


def _rational_inverse_diagonal(matrix: list[list[Fraction]]) -> list[Fraction]:
    """Diagonal of the inverse of a positive-definite rational matrix."""
    n = len(matrix)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = aug[col][col]
        aug[col] = [x / scale for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n + i] for i in range(n)]


def wall_search_bound(prob: CrossingProblem, alpha_sq: int, grid: int = 8) -> int:
    """Conservative per-coordinate bound for crossed walls of a fixed square.

    A crossed class is orthogonal to some point of the period segment, hence
    lies on the ellipsoid of the positive-definite twisted form
    G_t(x) = 2 (x . w_t)^2 / w_t^2 - x^2 at level |alpha_sq|; the extreme
    coordinate on that ellipsoid is |alpha_sq| (G_t^-1)_ii.  The bound takes
    a rational grid of t and doubles for the continuum gap; the independent
    box search in the tests backstops it.
    """
    n = prob.M.rank
    Q = prob.M.intersection_matrix
    level = Fraction(-alpha_sq)
    worst = Fraction(0)
    for j in range(grid + 1):
        t = Fraction(j, grid)
        omega = tuple(
            (1 - t) * a + t * b for a, b in zip(prob.omega_minus, prob.omega_plus)
        )
        qw = [sum(Fraction(Q[i][k]) * omega[k] for k in range(n)) for i in range(n)]
        wsq = sum(qw[i] * omega[i] for i in range(n))
        G = [
            [2 * qw[i] * qw[j2] / wsq - Q[i][j2] for j2 in range(n)]
            for i in range(n)
        ]
        for inv_ii in _rational_inverse_diagonal(G):
            worst = max(worst, level * inv_ii)
    # smallest integer >= 2 * sqrt(worst)
    num = 4 * worst.numerator
    den = worst.denominator
    return isqrt(num // den) + 2


def enumerate_walls(prob: CrossingProblem, r_max: int = 2) -> list[WallDatum]:
    """All walls the period segment crosses, one representative per +-pair.

    Representatives are normalized to pair positively with omega_plus and
    listed in a deterministic order (by level, then lexicographically).  A
    period point sitting on a wall raises DegenerateChamberError.
    """
    if r_max > 2:
        raise WallError("walls above level r=2 are not supported")
    M = prob.M
    n = M.rank
    found: dict[tuple[int, ...], WallDatum] = {}
    for r in range(0, r_max + 1):
        alpha_sq = prob.p1 + 4 * r
        if alpha_sq >= 0:
            continue
        bound = wall_search_bound(prob, alpha_sq)
        ranges = [range(-bound, bound + 1)] * n
        for alpha in itertools.product(*ranges):
            if not any(alpha):
                continue
            if any((ai - ci) % 2 for ai, ci in zip(alpha, prob.c)):
                continue
            if M.square(alpha) != alpha_sq:
                continue
            u_minus = M.pair(alpha, prob.omega_minus)
            u_plus = M.pair(alpha, prob.omega_plus)
            if u_minus == 0 or u_plus == 0:
                raise DegenerateChamberError(
                    f"period point lies on the wall of alpha={alpha}"
                )
            if (u_minus < 0) == (u_plus < 0):
                continue
            rep = alpha if u_plus > 0 else tuple(-a for a in alpha)
            if rep in found:
                continue
            found[rep] = WallDatum(
                alpha=rep,
                r=r,
                alpha_sq=alpha_sq,
                epsilon=epsilon_sign(prob.c, rep, M),
                supported=r >= 1,
            )
    return sorted(found.values(), key=lambda w: (w.r, w.alpha))


@dataclass(frozen=True)
class WallContribution:
    wall: WallDatum
    delta: SymForm | None
    value: Fraction | None


@dataclass(frozen=True)
class CrossReport:
    """Chamber-difference sum with per-wall data, warnings and errata."""

    problem: CrossingProblem
    walls: tuple[WallContribution, ...]
    total: Fraction
    warnings: tuple[str, ...]
    errata: ErratumReport

    def to_dict(self) -> dict:
        wall_rows = []
        for entry in self.walls:
            row = {
                "alpha": list(entry.wall.alpha),
                "r": entry.wall.r,
                "alpha_sq": entry.wall.alpha_sq,
                "epsilon": entry.wall.epsilon,
                "supported": entry.wall.supported,
            }
            if entry.delta is not None:
                row["delta"] = {
                    "coeffs": {
                        str(k): [str(c) for c in entry.delta.coefficient(k)]
                        for k in entry.delta.q_powers()
                    }
                }
                row["value"] = str(entry.value)
            wall_rows.append(row)
        return {
            "d": self.problem.d,
            "l": self.problem.l,
            "walls": wall_rows,
            "total": str(self.total),
            "warnings": list(self.warnings),
            "errata": self.errata.to_dict(),
        }

    def tsv_lines(self) -> list[str]:
        out = ["alpha\tr\tepsilon\tsupported\tvalue"]
        for entry in self.walls:
            value = "" if entry.value is None else str(entry.value)
            out.append(
                f"{','.join(map(str, entry.wall.alpha))}\t{entry.wall.r}"
                f"\t{entry.wall.epsilon}\t{entry.wall.supported}\t{value}"
            )
        out.append(f"total\t\t\t\t{self.total}")
        return out


def chamber_difference(
    prob: CrossingProblem,
    r_max: int = 2,
    convention: str = PERMUTATION_SUM,
    source: str = SOURCE_DERIVED,
    epsilon_rule: str = EPSILON_HALF,
    include_errata: bool = True,
) -> CrossReport:
    """Sum epsilon(c, alpha) * delta(alpha) over the supported crossed walls.

    Unsupported (r=0) walls are listed with a warning and excluded from the
    sum.  The per-wall difference terms are also returned symbolically.
    """
    d = prob.d
    walls = enumerate_walls(prob, r_max)
    contributions: list[WallContribution] = []
    warnings: list[str] = []
    total = Fraction(0)
    for wall in walls:
        if not wall.supported:
            warnings.append(
                f"wall {wall.alpha} at level r=0 is outside scope and was not summed"
            )
            contributions.append(WallContribution(wall, None, None))
            continue
        m = d - 2 * prob.l
        if len(prob.xs) != m:
            raise ArityError(
                f"bundle needs {m} two-dimensional classes (d={d}, l={prob.l}), "
                f"got {len(prob.xs)}"
            )
        obstruction = wall.alpha_sq == -1
        delta = closed_form_delta(wall.r, d, prob.l, obstruction, source)
        table = pairing_table_for(wall.alpha, prob.xs, prob.M)
        value = evaluate_on_table(delta, table, convention)
        sign = epsilon_sign(prob.c, wall.alpha, prob.M, epsilon_rule)
        total += sign * value
        contributions.append(WallContribution(wall, delta, value))
    errata = build_erratum_report() if include_errata else ErratumReport((), 0)
    return CrossReport(prob, tuple(contributions), total, tuple(warnings), errata)


def erratum_report() -> ErratumReport:
    """Structured diff between the published tables and the derivations."""
    return build_erratum_report()
