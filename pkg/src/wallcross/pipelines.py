"""First-principles derivation of the difference terms.

Three pipelines, one per geometric model of the link of reducibles:

* level one (one point of concentrated curvature): pairing over the
  projectivization P(C^N + E~) of a rank N+2 bundle over the manifold, with
  c1(E~) = alpha, c2(E~) = (alpha^2 - p_plus)/4, covering degree -2^N;
* level two, upper stratum: pairing over P(C^N + pi1* E~ + pi2* E~) over the
  two-fold product, rank N+4, covering factor 2^(-N-2);
* level two, lower stratum: expansion in the circle-action class c1,
  Thom division by (-c1)^N, substitution c1 = pi* alpha - h, descent of odd
  h-powers to powers of the four-dimensional class wp, and the equivariant
  pushforwards wp^2 -> -5/2, wp^3 -> 48 pt - 25 P_plus supplied by
  :mod:`wallcross.instanton_link`.

Arguments enter as formal factors: b_i h + X_i for a two-dimensional class
(and the doubled diagonal variant on the lower stratum), -h^2 + point for the
generator of zero-dimensional homology, and an obstruction factor (2h on the
projectivizations, pi* alpha - h on the lower stratum) when alpha^2 = -1.
The scalar carriers b_i, q_i_j and p_plus ride through the ring work, and the
output is collected into a :class:`~wallcross.geometry.SymForm`.

Throughout, d = -p1 - 3 and m = d - 2l is the number of two-dimensional
arguments; the level fixes alpha^2 (1 - d at level one, 5 - d at level two)
and N = -alpha^2 - 2 (zero in the obstruction case, where the models drop
their trivial summand).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import instanton_link
from .geometry import (
    SymForm,
    pair_partitions,
    polarization_factor,
    ppoly,
)
from .instanton_link import DEFAULT_OPTIONS, EquivariantOptions
from .ring import (
    BASE,
    FIBER,
    SCALAR,
    GradedElement,
    Generator,
    PairingError,
    RingPresentation,
    pair_geometric,
    substitute,
)


class ParameterError(ValueError):
    """Derivation parameters outside the supported ranges."""


class PipelineError(RuntimeError):
    """An internal invariant of a derivation pipeline failed."""


@dataclass
class DerivationTrace:
    """Staged dumps of a derivation, one section per pipeline stage."""

    stages: list[tuple[str, str]] = field(default_factory=list)

    def record(self, marker: str, pres: RingPresentation, element: GradedElement):
        self.stages.append((marker, pres.dump(element)))

    def render(self) -> str:
        blocks = []
        for marker, text in self.stages:
            blocks.append(f"== {marker} ==\n{text}")
        return "\n".join(blocks)


# -- scalar output ring ---------------------------------------------------------------


def _b_name(i: int) -> str:
    return f"b_{i + 1}"


def _q_name(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"q_{i + 1}_{j + 1}"


@lru_cache(maxsize=None)
def output_ring(m: int) -> RingPresentation:
    gens = [Generator(_b_name(i), 0, SCALAR) for i in range(m)]
    gens += [
        Generator(_q_name(i, j), 0, SCALAR)
        for i in range(m)
        for j in range(i + 1, m)
    ]
    gens.append(Generator("p_plus", 0, SCALAR))
    return RingPresentation(gens)


def collect_symform(
    raw: GradedElement,
    m: int,
    d: int,
    l: int,
    r: int,
    alpha_sq,
    obstruction: bool,
) -> SymForm:
    """Read a symmetric scalar element off into q-power coefficients.

    Every monomial must be a partition monomial: k distinct q pairs on
    disjoint indices, the complementary b singletons, and a p_plus power of
    at most two.  All monomials of one partition class must carry the same
    coefficient and the class must be complete; that is the symmetry check
    guarding the collection.  Coefficients are then divided by the
    polarization count 2^k k! (m-2k)! to land in the stored normalization.
    """
    out = raw.presentation
    by_class: dict[tuple[int, int], dict[tuple, Fraction]] = {}
    p_idx = out._gen_index("p_plus")
    b_idx = {i: out._gen_index(_b_name(i)) for i in range(m)}
    q_idx = {
        (i, j): out._gen_index(_q_name(i, j))
        for i in range(m)
        for j in range(i + 1, m)
    }
    for mono, coeff in raw.terms.items():
        p_exp = mono[p_idx]
        if p_exp > 2:
            raise PipelineError("p_plus power above two in a difference term")
        pairs = []
        covered: set[int] = set()
        for (i, j), gi in q_idx.items():
            e = mono[gi]
            if e == 0:
                continue
            if e > 1 or i in covered or j in covered:
                raise PipelineError(
                    f"non-partition monomial {out.monomial_str(mono)}"
                )
            pairs.append((i, j))
            covered.update((i, j))
        singles = []
        for i, gi in b_idx.items():
            e = mono[gi]
            if e == 0:
                continue
            if e > 1 or i in covered:
                raise PipelineError(
                    f"non-partition monomial {out.monomial_str(mono)}"
                )
            singles.append(i)
            covered.add(i)
        if len(covered) != m:
            raise PipelineError(
                f"monomial {out.monomial_str(mono)} does not cover all arguments"
            )
        k = len(pairs)
        key = (k, p_exp)
        shape = tuple(sorted(pairs))
        by_class.setdefault(key, {})[shape] = coeff

    coeffs: dict[int, list[Fraction]] = {}
    for (k, p_exp), shapes in sorted(by_class.items()):
        expected = sum(1 for _ in pair_partitions(m, k))
        values = set(shapes.values())
        if len(shapes) != expected or len(values) != 1:
            raise PipelineError(
                f"asymmetric q^{k} p^{p_exp} class: "
                f"{len(shapes)} of {expected} monomials, values {sorted(values)}"
            )
        coeffs.setdefault(k, [Fraction(0)] * 3)[p_exp] = values.pop()

    stored = {
        k: ppoly(*(c / polarization_factor(m, k) for c in poly))
        for k, poly in coeffs.items()
    }
    return SymForm.from_dict(m, stored, d, l, r, alpha_sq, obstruction)


# -- shared pairing callables -----------------------------------------------------------


def _base_pairing(
    pres: RingPresentation,
    out: RingPresentation,
    alpha_name: str,
    x_names: dict[str, int],
    pt_name: str,
    p_name: str,
    alpha_sq: Fraction,
    zero_q: bool = False,
):
    """Degree-four pairing on one manifold component.

    alpha^2 pairs to the fixed rational alpha_sq, alpha X_i to b_i, X_i X_j
    to q_i_j, the point class to one and the p_plus class to the carrier.
    """

    def value(spec: dict[str, int]) -> GradedElement:
        names = sorted(spec)
        if spec == {alpha_name: 2}:
            return out.scalar(alpha_sq)
        if spec == {pt_name: 1}:
            return out.one()
        if spec == {p_name: 1}:
            return out.gen("p_plus")
        if len(names) == 2 and all(spec[n] == 1 for n in names):
            a, b = names
            if a == alpha_name and b in x_names:
                return out.gen(_b_name(x_names[b]))
            if b == alpha_name and a in x_names:
                return out.gen(_b_name(x_names[a]))
            if a in x_names and b in x_names:
                if zero_q:
                    return out.zero()
                return out.gen(_q_name(x_names[a], x_names[b]))
        raise PairingError(f"degree-four monomial {spec!r} has no pairing")

    return value


# -- level one -----------------------------------------------------------------------


def _validate(d: int, l: int, obstruction: bool, level: int) -> None:
    general_min = 3 if level == 1 else 7
    obstruction_d = 2 if level == 1 else 6
    if obstruction:
        if d != obstruction_d:
            raise ParameterError(
                f"obstruction case at level {level} needs d={obstruction_d}, got {d}"
            )
    elif d < general_min:
        raise ParameterError(
            f"level {level} general case needs d >= {general_min}, got {d}"
        )
    if l < 0 or 2 * l > d:
        raise ParameterError(f"need 0 <= 2l <= d, got l={l}, d={d}")


def derive_r1(
    d: int, l: int, obstruction: bool = False, trace: DerivationTrace | None = None
) -> SymForm:
    """Difference term of a level-one reducible, from the projectivized model."""
    _validate(d, l, obstruction, level=1)
    if trace is None:
        return _derive_r1_cached(d, l, obstruction)
    return _derive_r1(d, l, obstruction, trace)


@lru_cache(maxsize=None)
def _derive_r1_cached(d, l, obstruction):
    return _derive_r1(d, l, obstruction, None)


def _derive_r1(d, l, obstruction, trace):
    m = d - 2 * l
    N = 0 if obstruction else d - 3
    rank = N + 2
    alpha_sq = Fraction(1 - d)

    gens = [Generator("h", 2, FIBER), Generator("A", 2, BASE)]
    x_names = {}
    for i in range(m):
        name = f"X_{i + 1}"
        gens.append(Generator(name, 2, BASE))
        x_names[name] = i
    gens += [Generator("PT", 4, BASE), Generator("P", 4, BASE)]
    gens += [Generator(_b_name(i), 0, SCALAR) for i in range(m)]

    total_dim = 4 + 2 * (rank - 1)
    free = RingPresentation(
        gens, truncation_degree=total_dim, component_budgets={"base": 4}
    )
    # Leray-Hirsch: h^rank = A h^(rank-1) - (1/4)(A^2 - P) h^(rank-2)
    ruled = RingPresentation(
        gens,
        relations=[
            (
                "h",
                rank,
                [
                    (1, {"A": 1, "h": rank - 1}),
                    (Fraction(-1, 4), {"A": 2, "h": rank - 2}),
                    (Fraction(1, 4), {"P": 1, "h": rank - 2}),
                ],
            )
        ],
        truncation_degree=total_dim,
        fiber_top=("h", rank - 1, Fraction((-1) ** (rank - 1))),
        component_budgets={"base": 4},
    )

    integrand = free.scalar(Fraction(-1, 2**N))
    for i in range(m):
        factor = free.element([(1, {_b_name(i): 1, "h": 1}), (1, {f"X_{i + 1}": 1})])
        integrand = free.mul(integrand, factor)
    point = free.element([(-1, {"h": 2}), (1, {"PT": 1})])
    integrand = free.mul(integrand, free.pow(point, l))
    if obstruction:
        integrand = free.mul(integrand, free.element([(2, {"h": 1})]))
    if trace is not None:
        trace.record("expand", free, integrand)

    reduced = substitute(integrand, ruled)
    if trace is not None:
        trace.record("leray-hirsch", ruled, reduced)

    integrated = ruled.fiber_integrate(reduced)
    out = output_ring(m)
    raw = pair_geometric(
        integrated,
        out,
        {"base": _base_pairing(ruled, out, "A", x_names, "PT", "P", alpha_sq)},
    )
    if trace is not None:
        trace.record("pair", out, raw)
    return collect_symform(raw, m, d, l, 1, alpha_sq, obstruction)


# -- level two, upper stratum ------------------------------------------------------------


def derive_r2_upper(
    d: int,
    l: int,
    obstruction: bool = False,
    trace: DerivationTrace | None = None,
    _swap_factors: bool = False,
    _zero_q: bool = False,
) -> SymForm:
    """Off-diagonal contribution of a level-two reducible."""
    _validate(d, l, obstruction, level=2)
    if trace is None and not _swap_factors and not _zero_q:
        return _derive_r2_upper_cached(d, l, obstruction)
    return _derive_r2_upper(d, l, obstruction, trace, _swap_factors, _zero_q)


@lru_cache(maxsize=None)
def _derive_r2_upper_cached(d, l, obstruction):
    return _derive_r2_upper(d, l, obstruction, None, False, False)


def _derive_r2_upper(d, l, obstruction, trace, swap, zero_q):
    m = d - 2 * l
    N = 0 if obstruction else d - 7
    rank = N + 4
    alpha_sq = Fraction(5 - d)

    factors = ("1", "2") if not swap else ("2", "1")
    gens = [Generator("h", 2, FIBER)]
    x_names: dict[str, dict[str, int]] = {}
    for c in factors:
        comp = f"base{c}"
        gens.append(Generator(f"A{c}", 2, BASE, component=comp))
        x_names[comp] = {}
        for i in range(m):
            name = f"X{c}_{i + 1}"
            gens.append(Generator(name, 2, BASE, component=comp))
            x_names[comp][name] = i
        gens.append(Generator(f"PT{c}", 4, BASE, component=comp))
        gens.append(Generator(f"P{c}", 4, BASE, component=comp))
    gens += [Generator(_b_name(i), 0, SCALAR) for i in range(m)]

    total_dim = 8 + 2 * (rank - 1)
    budgets = {"base1": 4, "base2": 4}
    free = RingPresentation(gens, truncation_degree=total_dim, component_budgets=budgets)

    # Chern classes of C^N + pi1* E~ + pi2* E~, with S_c := (A_c^2 - P_c)/4.
    def relation_terms(p):
        A1 = p.gen(f"A{factors[0]}")
        A2 = p.gen(f"A{factors[1]}")
        S1 = p.element(
            [
                (Fraction(1, 4), {f"A{factors[0]}": 2}),
                (Fraction(-1, 4), {f"P{factors[0]}": 1}),
            ]
        )
        S2 = p.element(
            [
                (Fraction(1, 4), {f"A{factors[1]}": 2}),
                (Fraction(-1, 4), {f"P{factors[1]}": 1}),
            ]
        )
        c1 = p.add(A1, A2)
        c2 = p.add(p.mul(A1, A2), S1, S2)
        c3 = p.add(p.mul(A1, S2), p.mul(A2, S1))
        c4 = p.mul(S1, S2)
        return c1, c2, c3, c4

    c1, c2, c3, c4 = relation_terms(free)
    signs = (1, -1, 1, -1)
    replacement = []
    for idx, cls in enumerate((c1, c2, c3, c4)):
        for mono, coeff in cls.terms.items():
            replacement.append(
                (signs[idx] * coeff, {**free.monomial_spec(mono), "h": rank - 1 - idx})
            )
    ruled = RingPresentation(
        gens,
        relations=[("h", rank, replacement)],
        truncation_degree=total_dim,
        fiber_top=("h", rank - 1, Fraction((-1) ** (rank - 1))),
        component_budgets=budgets,
    )

    integrand = free.scalar(Fraction(1, 2 ** (N + 2)))
    for i in range(m):
        factor = free.element(
            [
                (1, {_b_name(i): 1, "h": 1}),
                (1, {f"X{factors[0]}_{i + 1}": 1}),
                (1, {f"X{factors[1]}_{i + 1}": 1}),
            ]
        )
        integrand = free.mul(integrand, factor)
    point = free.element(
        [(-1, {"h": 2}), (1, {f"PT{factors[0]}": 1}), (1, {f"PT{factors[1]}": 1})]
    )
    integrand = free.mul(integrand, free.pow(point, l))
    if obstruction:
        integrand = free.mul(integrand, free.element([(2, {"h": 1})]))
    if trace is not None:
        trace.record("expand", free, integrand)

    reduced = substitute(integrand, ruled)
    if trace is not None:
        trace.record("leray-hirsch", ruled, reduced)

    integrated = ruled.fiber_integrate(reduced)
    out = output_ring(m)
    tables = {
        f"base{c}": _base_pairing(
            ruled,
            out,
            f"A{c}",
            x_names[f"base{c}"],
            f"PT{c}",
            f"P{c}",
            alpha_sq,
            zero_q=zero_q,
        )
        for c in factors
    }
    raw = pair_geometric(integrated, out, tables)
    if trace is not None:
        trace.record("pair", out, raw)
    return collect_symform(raw, m, d, l, 2, alpha_sq, obstruction)


# -- level two, lower stratum -------------------------------------------------------------


def derive_r2_lower(
    d: int,
    l: int,
    obstruction: bool = False,
    options: EquivariantOptions = DEFAULT_OPTIONS,
    trace: DerivationTrace | None = None,
    _zero_q: bool = False,
) -> SymForm:
    """Diagonal contribution of a level-two reducible."""
    _validate(d, l, obstruction, level=2)
    if trace is None and options == DEFAULT_OPTIONS and not _zero_q:
        return _derive_r2_lower_cached(d, l, obstruction)
    return _derive_r2_lower(d, l, obstruction, options, trace, _zero_q)


@lru_cache(maxsize=None)
def _derive_r2_lower_cached(d, l, obstruction):
    return _derive_r2_lower(d, l, obstruction, DEFAULT_OPTIONS, None, False)


def _derive_r2_lower(d, l, obstruction, options, trace, zero_q):
    m = d - 2 * l
    N = 0 if obstruction else d - 7
    alpha_sq = Fraction(5 - d)

    x_gens = [Generator(f"X_{i + 1}", 2, BASE) for i in range(m)]
    scalars = [Generator(_b_name(i), 0, SCALAR) for i in range(m)]

    cone = RingPresentation(
        [Generator("C", 2, FIBER)] + x_gens + [Generator("PT", 4, BASE)] + scalars,
        component_budgets={"base": 4},
    )
    integrand = cone.one()
    for i in range(m):
        factor = cone.element(
            [
                (Fraction(1, 2), {_b_name(i): 1, "C": 1}),
                (2, {f"X_{i + 1}": 1}),
            ]
        )
        integrand = cone.mul(integrand, factor)
    point = cone.element([(Fraction(-1, 4), {"C": 2}), (2, {"PT": 1})])
    integrand = cone.mul(integrand, cone.pow(point, l))
    if obstruction:
        integrand = cone.mul(integrand, cone.gen("C"))
    if trace is not None:
        trace.record("expand", cone, integrand)

    # Thom division by (-C)^N.
    divided = cone.scale(
        cone.divide_by_gen_power(integrand, "C", N), Fraction((-1) ** N)
    )
    if trace is not None:
        trace.record("thom-divide", cone, divided)

    # Substitute C = pi* alpha - h; base degree caps at four, h-degree at seven.
    sub = RingPresentation(
        [Generator("h", 2, FIBER), Generator("A", 2, BASE)]
        + x_gens
        + [Generator("PT", 4, BASE), Generator("P", 4, BASE)]
        + scalars,
        component_budgets={"base": 4, "fiber": 14},
    )
    substituted = substitute(
        divided, sub, {"C": sub.element([(1, {"A": 1}), (-1, {"h": 1})])}
    )

    # Descend along the double cover: h^(2k+1) -> 2 wp^k, even powers die.
    wp_ring = RingPresentation(
        [Generator("wp", 4, FIBER), Generator("A", 2, BASE)]
        + x_gens
        + [Generator("PT", 4, BASE), Generator("P", 4, BASE)]
        + scalars,
        component_budgets={"base": 4},
    )
    h_idx = sub._gen_index("h")
    descended_terms = []
    for mono, coeff in substituted.terms.items():
        e = mono[h_idx]
        if e % 2 == 0:
            continue
        spec = sub.monomial_spec(mono)
        spec.pop("h")
        k = (e - 1) // 2
        if k:
            spec["wp"] = k
        descended_terms.append((2 * coeff, spec))
    descended = wp_ring.element(descended_terms)
    if trace is not None:
        trace.record("descend", wp_ring, descended)

    # Equivariant pushforward of wp powers along the eight-dimensional fiber.
    push = RingPresentation(
        [Generator("A", 2, BASE)]
        + x_gens
        + [Generator("PT", 4, BASE), Generator("P", 4, BASE)]
        + scalars,
        component_budgets={"base": 4},
    )

    def wp_value(k: int) -> GradedElement:
        if k in (0, 1):
            return push.zero()
        const, cls = instanton_link.pull_to_manifold(
            instanton_link.wp_power_pushforward(k, options)
        )
        value = push.scalar(const)
        converted = substitute(
            cls,
            push,
            {"pt": push.gen("PT"), "P_plus": push.gen("P")},
        )
        return push.add(value, converted)

    wp_idx = wp_ring._gen_index("wp")
    acc: dict = {}
    for mono, coeff in descended.terms.items():
        k = mono[wp_idx]
        if k > 3:
            raise PipelineError(f"wp power {k} out of range")
        spec = wp_ring.monomial_spec(mono)
        spec.pop("wp", None)
        rest = push.element([(coeff, spec)])
        contribution = push.mul(rest, wp_value(k))
        for m2, c2 in contribution.terms.items():
            c = acc.get(m2, Fraction(0)) + c2
            if c:
                acc[m2] = c
            elif m2 in acc:
                del acc[m2]
    pushed = push.normalize(GradedElement(push, acc))
    if trace is not None:
        trace.record("pushforward", push, pushed)

    out = output_ring(m)
    x_names = {f"X_{i + 1}": i for i in range(m)}
    raw = pair_geometric(
        pushed,
        out,
        {"base": _base_pairing(push, out, "A", x_names, "PT", "P", alpha_sq, zero_q)},
    )
    if trace is not None:
        trace.record("pair", out, raw)
    return collect_symform(raw, m, d, l, 2, alpha_sq, obstruction)


def assemble_delta_r2(
    d: int,
    l: int,
    obstruction: bool = False,
    options: EquivariantOptions = DEFAULT_OPTIONS,
) -> SymForm:
    """Full level-two difference term: upper plus lower stratum.

    The transition-region error term vanishes, so the two contributions add
    coefficient-wise.
    """
    upper = derive_r2_upper(d, l, obstruction)
    lower = derive_r2_lower(d, l, obstruction, options)
    return upper.add(lower)
