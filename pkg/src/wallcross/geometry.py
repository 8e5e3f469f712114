"""Four-manifold data and symmetric difference-term forms.

A ManifoldModel holds the intersection lattice of a simply connected
four-manifold with b+ = 1 together with its characteristic numbers
p_plus = 9 - b_minus and p_minus = -3 - 5 b_minus.  Homology classes are
integer coordinate vectors in the lattice basis.

A SymForm is a difference term written as

    sum over k of  A_k(p_plus) * q^k * alpha^(m - 2k)

with rational-coefficient polynomials A_k of degree at most two in p_plus.
Coefficients are stored in the full-polarization normalization: evaluating
with the ``permutation_sum`` convention reproduces the underlying pairing on
a tuple of homology classes with no further factor.  The two evaluation
conventions differ by the polarization count:

* ``matching_sum``: sum over partitions of the m arguments into k unordered
  pairs and m - 2k singletons of the product of q over pairs and <alpha, .>
  over singletons;
* ``permutation_sum``: 2^k * k! * (m-2k)! times the matching sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterator, Mapping, Sequence

from .ring import as_fraction

MATCHING_SUM = "matching_sum"
PERMUTATION_SUM = "permutation_sum"
#: Display-only convention: coefficients as read off the polynomial function
#: on the diagonal (q and alpha treated as functions of a single class).
DIAGONAL = "diagonal"

CONVENTIONS = (MATCHING_SUM, PERMUTATION_SUM)

HomologyClass = tuple[int, ...]

#: Polynomial in p_plus, coefficients listed from degree zero up.
PPoly = tuple[Fraction, ...]


class GeometryError(Exception):
    pass


class SignatureError(GeometryError):
    """Intersection matrix is not of signature (1, b_minus)."""


class ArityError(GeometryError):
    """Argument count does not match the form's degree."""


# -- p_plus polynomials -----------------------------------------------------------


def ppoly(*coeffs) -> PPoly:
    vals = [as_fraction(c) for c in coeffs]
    while vals and vals[-1] == 0:
        vals.pop()
    return tuple(vals)


def ppoly_add(a: PPoly, b: PPoly) -> PPoly:
    n = max(len(a), len(b))
    out = [Fraction(0)] * n
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return ppoly(*out)


def ppoly_scale(a: PPoly, s) -> PPoly:
    s = as_fraction(s)
    return ppoly(*(c * s for c in a))


def ppoly_eval(a: PPoly, p_plus) -> Fraction:
    p = as_fraction(p_plus)
    total = Fraction(0)
    for i, c in enumerate(a):
        total += c * p**i
    return total


def ppoly_str(a: PPoly, symbol: str = "p+") -> str:
    if not a:
        return "0"
    parts = []
    for i, c in enumerate(a):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append(f"{c}*{symbol}")
        else:
            parts.append(f"{c}*{symbol}^{i}")
    return " + ".join(parts).replace("+ -", "- ")


# -- manifold model -----------------------------------------------------------------


def diagonal_matrix(b_minus: int) -> tuple[tuple[int, ...], ...]:
    n = 1 + b_minus
    return tuple(
        tuple(1 if i == j == 0 else (-1 if i == j else 0) for j in range(n))
        for i in range(n)
    )


def matrix_signature(matrix: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia of a symmetric rational matrix.

    Exact simultaneous row/column elimination (Sylvester's law); a zero
    diagonal with a nonzero off-diagonal entry is repaired by adding one
    row-and-column into the other, which keeps the congruence class.
    """
    n = len(matrix)
    m = [[as_fraction(matrix[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i]:
                raise SignatureError("matrix is not symmetric")
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if m[i][i] != 0), None)
        if piv is None:
            pair = None
            for a in active:
                for b in active:
                    if a != b and m[a][b] != 0:
                        pair = (a, b)
                        break
                if pair:
                    break
            if pair is None:
                return pos, neg, len(active)
            a, b = pair
            for k in range(n):
                m[a][k] += m[b][k]
            for k in range(n):
                m[k][a] += m[k][b]
            piv = a
        p = m[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for j in active:
            f = m[j][piv] / p
            if f == 0:
                continue
            for k in range(n):
                m[j][k] -= f * m[piv][k]
            for k in range(n):
                m[k][j] -= f * m[k][piv]
    return pos, neg, 0


@dataclass(frozen=True)
class ManifoldModel:
    """b+ = 1 lattice with characteristic numbers p_plus = 9 - b_minus."""

    b_minus: int
    intersection_matrix: tuple[tuple[int, ...], ...]
    p_plus: int = field(init=False)
    p_minus: int = field(init=False)

    def __post_init__(self):
        n = 1 + self.b_minus
        mat = tuple(tuple(int(x) for x in row) for row in self.intersection_matrix)
        if len(mat) != n or any(len(row) != n for row in mat):
            raise SignatureError(
                f"intersection matrix must be {n}x{n} for b_minus={self.b_minus}"
            )
        pos, neg, zero = matrix_signature(mat)
        if (pos, neg, zero) != (1, self.b_minus, 0):
            raise SignatureError(
                f"matrix has inertia ({pos},{neg},{zero}), need (1,{self.b_minus},0)"
            )
        object.__setattr__(self, "intersection_matrix", mat)
        object.__setattr__(self, "p_plus", 9 - self.b_minus)
        object.__setattr__(self, "p_minus", -3 - 5 * self.b_minus)
        assert self.p_minus == -48 + 5 * self.p_plus

    @classmethod
    def build(cls, b_minus: int, intersection_matrix=None) -> "ManifoldModel":
        if intersection_matrix is None:
            intersection_matrix = diagonal_matrix(b_minus)
        return cls(b_minus, tuple(tuple(row) for row in intersection_matrix))

    @property
    def rank(self) -> int:
        return 1 + self.b_minus

    def pair(self, x: Sequence, y: Sequence) -> Fraction:
        """Intersection pairing x . y in the lattice basis."""
        if len(x) != self.rank or len(y) != self.rank:
            raise ArityError("class length does not match the lattice rank")
        total = Fraction(0)
        for i, xi in enumerate(x):
            if not xi:
                continue
            row = self.intersection_matrix[i]
            for j, yj in enumerate(y):
                if yj:
                    total += as_fraction(xi) * row[j] * as_fraction(yj)
        return total

    def square(self, x: Sequence) -> Fraction:
        return self.pair(x, x)


# -- pairing tables and symmetric-form evaluation -------------------------------------


@dataclass(frozen=True)
class PairingTable:
    """The numbers a difference-term evaluation consumes."""

    alpha_sq: Fraction
    b: tuple[Fraction, ...]
    q_vals: tuple[tuple[Fraction, ...], ...]
    p_plus: Fraction

    def __post_init__(self):
        n = len(self.b)
        if len(self.q_vals) != n or any(len(r) != n for r in self.q_vals):
            raise ArityError("q_vals shape does not match b")
        for i in range(n):
            for j in range(n):
                if self.q_vals[i][j] != self.q_vals[j][i]:
                    raise GeometryError("q_vals must be symmetric")


def pairing_table_for(
    alpha: Sequence,
    xs: Sequence[Sequence],
    M: ManifoldModel,
    alpha_sq_override=None,
) -> PairingTable:
    """Collect b_i, q(x_i, x_j) and alpha^2 from the lattice.

    When the derivation context fixes alpha^2 symbolically the override wins;
    otherwise the lattice value is used.
    """
    b = tuple(M.pair(alpha, x) for x in xs)
    q = tuple(tuple(M.pair(x, y) for y in xs) for x in xs)
    alpha_sq = (
        as_fraction(alpha_sq_override)
        if alpha_sq_override is not None
        else M.square(alpha)
    )
    return PairingTable(alpha_sq, b, q, Fraction(M.p_plus))


def pair_partitions(m: int, k: int) -> Iterator[tuple[tuple[tuple[int, int], ...], tuple[int, ...]]]:
    """Partitions of range(m) into k unordered pairs and m - 2k singletons."""
    if 2 * k > m:
        return

    def rec(items: tuple[int, ...], k: int):
        if k == 0:
            yield (), items
            return
        first = items[0]
        rest = items[1:]
        for i, other in enumerate(rest):
            remaining = rest[:i] + rest[i + 1 :]
            for pairs, singles in rec(remaining, k - 1):
                yield ((first, other),) + pairs, singles
        # first as a singleton: keep it aside and pair among the rest
        need = 2 * k
        if len(rest) >= need:
            for pairs, singles in rec(rest, k):
                yield pairs, (first,) + singles

    yield from rec(tuple(range(m)), k)


def matching_count(m: int, k: int) -> int:
    """Number of partitions of m items into k pairs plus singletons."""
    if 2 * k > m:
        return 0
    return factorial(m) // (factorial(k) * 2**k * factorial(m - 2 * k))


def polarization_factor(m: int, k: int) -> int:
    """permutation_sum = this factor times matching_sum, per q-power."""
    return 2**k * factorial(k) * factorial(m - 2 * k)


def matching_basis_value(table: PairingTable, m: int, k: int) -> Fraction:
    total = Fraction(0)
    for pairs, singles in pair_partitions(m, k):
        term = Fraction(1)
        for i, j in pairs:
            term *= table.q_vals[i][j]
        for i in singles:
            term *= table.b[i]
        total += term
    return total


# -- the symmetric form -----------------------------------------------------------------


@dataclass(frozen=True)
class SymForm:
    """Difference term sum_k A_k(p_plus) q^k alpha^(m-2k), polarization-normalized."""

    m: int
    coeffs: tuple[tuple[int, PPoly], ...]
    d: int
    l: int
    r: int
    alpha_sq: Fraction | None
    obstruction: bool

    def __post_init__(self):
        seen = set()
        for k, poly in self.coeffs:
            if k in seen:
                raise GeometryError(f"duplicate q-power {k}")
            seen.add(k)
            if 2 * k > self.m:
                raise GeometryError(f"q-power {k} exceeds arity {self.m}")
            if len(poly) > 3:
                raise GeometryError("p_plus polynomial of degree above two")

    @classmethod
    def from_dict(cls, m, coeffs: Mapping[int, PPoly], d, l, r, alpha_sq, obstruction) -> "SymForm":
        items = tuple(
            (k, ppoly(*poly)) for k, poly in sorted(coeffs.items()) if ppoly(*poly)
        )
        alpha_sq = None if alpha_sq is None else as_fraction(alpha_sq)
        return cls(m, items, d, l, r, alpha_sq, obstruction)

    def coefficient(self, k: int) -> PPoly:
        for kk, poly in self.coeffs:
            if kk == k:
                return poly
        return ()

    def q_powers(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.coeffs)

    def coefficient_as(self, k: int, convention: str) -> PPoly:
        """Coefficient converted out of the stored polarization normalization."""
        poly = self.coefficient(k)
        if convention == PERMUTATION_SUM:
            return poly
        if convention == MATCHING_SUM:
            return ppoly_scale(poly, polarization_factor(self.m, k))
        if convention == DIAGONAL:
            return ppoly_scale(poly, factorial(self.m))
        raise GeometryError(f"unknown convention {convention!r}")

    def add(self, other: "SymForm") -> "SymForm":
        if self.m != other.m or self.d != other.d or self.l != other.l:
            raise GeometryError("cannot add forms of different shape")
        merged: dict[int, PPoly] = {k: p for k, p in self.coeffs}
        for k, p in other.coeffs:
            merged[k] = ppoly_add(merged.get(k, ()), p)
        return SymForm.from_dict(
            self.m,
            merged,
            self.d,
            self.l,
            self.r,
            self.alpha_sq if self.alpha_sq is not None else other.alpha_sq,
            self.obstruction or other.obstruction,
        )

    def scale(self, s) -> "SymForm":
        return SymForm.from_dict(
            self.m,
            {k: ppoly_scale(p, s) for k, p in self.coeffs},
            self.d,
            self.l,
            self.r,
            self.alpha_sq,
            self.obstruction,
        )

    def lines(self, convention: str = PERMUTATION_SUM) -> list[str]:
        out = []
        for k, _ in self.coeffs:
            poly = self.coefficient_as(k, convention)
            out.append(f"q^{k} alpha^{self.m - 2 * k}: {ppoly_str(poly)}")
        return out or ["0"]


def evaluate_on_table(f: SymForm, table: PairingTable, convention: str = PERMUTATION_SUM) -> Fraction:
    if len(table.b) != f.m:
        raise ArityError(f"form takes {f.m} classes, table has {len(table.b)}")
    if convention not in CONVENTIONS:
        raise GeometryError(f"unknown convention {convention!r}")
    total = Fraction(0)
    for k, poly in f.coeffs:
        value = matching_basis_value(table, f.m, k)
        if convention == PERMUTATION_SUM:
            value *= polarization_factor(f.m, k)
        total += ppoly_eval(poly, table.p_plus) * value
    return total


def evaluate_sym_form(
    f: SymForm,
    xs: Sequence[Sequence],
    alpha: Sequence,
    M: ManifoldModel,
    convention: str = PERMUTATION_SUM,
) -> Fraction:
    """Evaluate a difference term on homology classes of the lattice."""
    if len(xs) != f.m:
        raise ArityError(f"form takes {f.m} classes, got {len(xs)}")
    table = pairing_table_for(alpha, xs, M)
    return evaluate_on_table(f, table, convention)


def symmetrized_product_pairing(classes: Sequence[Sequence], r: int, M: ManifoldModel) -> Fraction:
    """Brute-force pairing of prod_i (sum_j pi_j^* x_i) over the r-fold product.

    Expands all r**(2r) assignments of the 2r factors to coordinates; only
    assignments putting exactly two classes on each coordinate pair
    nontrivially.  This is the normalization oracle for the q conventions.
    """
    if r < 1 or r > 3:
        raise GeometryError("oracle supports 1 <= r <= 3")
    if len(classes) != 2 * r:
        raise ArityError(f"need exactly {2 * r} classes, got {len(classes)}")
    total = Fraction(0)
    for assignment in itertools.product(range(r), repeat=2 * r):
        buckets: list[list[int]] = [[] for _ in range(r)]
        for idx, coord in enumerate(assignment):
            buckets[coord].append(idx)
        if any(len(b) != 2 for b in buckets):
            continue
        term = Fraction(1)
        for i, j in buckets:
            term *= M.pair(classes[i], classes[j])
        total += term
    return total
