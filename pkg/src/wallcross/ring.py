"""Exact graded-commutative polynomial kernel.

Every derivation in this package runs on the same currency: finite linear
combinations, with rational coefficients, of monomials in declared
generators, reduced to a canonical normal form.

Generators come in three kinds:

* ``fiber``  -- classes living along the fiber of a fibration (h, eta, H, T);
* ``base``   -- classes pulled up from the base;
* ``scalar`` -- formal number carriers (b_i, q_i_j, p_plus) that ride through
  a computation as symbolic constants; they have degree zero and are never
  truncated.

A presentation fixes the generator list, a triangular rewrite system (at most
one rule per leading generator, strictly decreasing that generator's
exponent), an optional total-degree truncation, optional per-component degree
budgets (products of base classes on a four-manifold component vanish above
degree four), and an optional fiber-top datum for integration over the fiber.

Elements are immutable; all operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

FIBER = "fiber"
BASE = "base"
SCALAR = "scalar"

_ZERO = Fraction(0)


class RingError(Exception):
    """Base class for kernel errors."""


class PresentationError(RingError):
    """Invalid generator table or rewrite system."""


class UndeclaredGeneratorError(RingError):
    """A monomial mentions a generator the presentation does not declare."""


class PairingError(RingError):
    """Top-degree pairing hit an unmapped monomial or a malformed element."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class Generator:
    """A ring generator: name, cohomological degree, kind, truncation component."""

    name: str
    degree: int
    kind: str = BASE
    component: str | None = None

    def __post_init__(self):
        if self.kind not in (FIBER, BASE, SCALAR):
            raise PresentationError(f"unknown generator kind {self.kind!r}")
        if self.kind == SCALAR:
            if self.degree != 0:
                raise PresentationError(
                    f"scalar carrier {self.name!r} must have degree 0"
                )
        else:
            if self.degree < 2 or self.degree % 2:
                raise PresentationError(
                    f"generator {self.name!r} needs a positive even degree"
                )
        if self.component is None:
            object.__setattr__(self, "component", self.kind)


class GradedElement:
    """Immutable rational combination of monomials of one presentation.

    ``terms`` maps dense exponent tuples (aligned with the presentation's
    generator order) to nonzero Fractions.  Equality is structural.
    """

    __slots__ = ("presentation", "terms")

    def __init__(self, presentation: "RingPresentation", terms: dict):
        object.__setattr__(self, "presentation", presentation)
        object.__setattr__(self, "terms", terms)

    def __setattr__(self, *args):  # pragma: no cover - guard
        raise AttributeError("GradedElement is immutable")

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GradedElement)
            and self.presentation is other.presentation
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((id(self.presentation), frozenset(self.terms.items())))

    def __repr__(self):
        return f"GradedElement({self.presentation.dump(self)!r})"


class RingPresentation:
    """One computation context: generators, relations, truncation, fiber top.

    ``relations`` is a sequence of ``(name, power, replacement)`` triples,
    where ``replacement`` lists ``(coeff, {gen: exp, ...})`` terms.  The rule
    rewrites ``name**power`` into the replacement; the replacement must be
    homogeneous of the same degree and must use strictly smaller powers of
    ``name``.  Leading generators must be distinct and the dependency graph
    between ruled generators acyclic, so rewriting terminates in a unique
    normal form.

    ``fiber_top`` is ``(name, power, value)``: integration over the fiber
    extracts the coefficient of ``name**power`` and multiplies by ``value``.
    """

    def __init__(
        self,
        generators: Sequence[Generator],
        relations: Iterable = (),
        truncation_degree: int | None = None,
        fiber_top: tuple | None = None,
        component_budgets: Mapping[str, int] | None = None,
    ):
        self.generators = tuple(generators)
        self._index: dict[str, int] = {}
        for i, g in enumerate(self.generators):
            if g.name in self._index:
                raise PresentationError(f"duplicate generator {g.name!r}")
            self._index[g.name] = i
        self._n = len(self.generators)
        self._scalar_idx = tuple(
            i for i, g in enumerate(self.generators) if g.kind == SCALAR
        )
        self._geom_idx = tuple(
            i for i, g in enumerate(self.generators) if g.kind != SCALAR
        )
        self.truncation_degree = truncation_degree
        self.component_budgets = dict(component_budgets or {})

        self._rules: list[tuple[int, int, dict]] = []
        leads: set[int] = set()
        for name, power, replacement in relations:
            gi = self._gen_index(name)
            if self.generators[gi].kind == SCALAR:
                raise PresentationError(f"cannot rewrite scalar carrier {name!r}")
            if power < 1:
                raise PresentationError(f"rule on {name!r} needs power >= 1")
            if gi in leads:
                raise PresentationError(f"two rules lead with {name!r}")
            leads.add(gi)
            rep: dict[tuple, Fraction] = {}
            lead_degree = self.generators[gi].degree * power
            for coeff, spec in replacement:
                coeff = as_fraction(coeff)
                if coeff == 0:
                    continue
                mono = self._mono_from_spec(spec)
                if mono[gi] >= power:
                    raise PresentationError(
                        f"rule on {name!r} does not decrease its exponent"
                    )
                if self.monomial_degree(mono) != lead_degree:
                    raise PresentationError(
                        f"rule on {name!r} is not degree-homogeneous"
                    )
                rep[mono] = rep.get(mono, _ZERO) + coeff
            rep = {m: c for m, c in rep.items() if c}
            if self.truncation_degree is not None and lead_degree > self.truncation_degree:
                raise PresentationError(
                    f"truncation degree {self.truncation_degree} below rule on {name!r}"
                )
            self._rules.append((gi, power, rep))
        self._rules.sort()
        self._check_rule_termination(leads)

        self.fiber_top = None
        if fiber_top is not None:
            name, power, value = fiber_top
            gi = self._gen_index(name)
            if self.generators[gi].kind != FIBER:
                raise PresentationError(f"fiber top {name!r} is not a fiber class")
            self.fiber_top = (name, int(power), as_fraction(value))

    # -- construction helpers -------------------------------------------------

    def _gen_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UndeclaredGeneratorError(f"undeclared generator {name!r}") from None

    def _mono_from_spec(self, spec: Mapping[str, int]) -> tuple:
        exps = [0] * self._n
        for name, e in spec.items():
            if e < 0:
                raise PresentationError(f"negative exponent for {name!r}")
            exps[self._gen_index(name)] += e
        return tuple(exps)

    def _check_rule_termination(self, leads: set[int]) -> None:
        # Ruled generators may appear in each other's replacements only
        # acyclically, otherwise rewriting need not terminate.
        deps: dict[int, set[int]] = {}
        for gi, _power, rep in self._rules:
            used: set[int] = set()
            for mono in rep:
                for gj in leads:
                    if gj != gi and mono[gj]:
                        used.add(gj)
            deps[gi] = used
        seen: dict[int, int] = {}

        def visit(node: int) -> None:
            state = seen.get(node, 0)
            if state == 1:
                raise PresentationError("cyclic rewrite system")
            if state == 2:
                return
            seen[node] = 1
            for nxt in deps.get(node, ()):
                visit(nxt)
            seen[node] = 2

        for node in deps:
            visit(node)

    # -- monomial utilities ----------------------------------------------------

    def monomial_degree(self, mono: tuple) -> int:
        """Total geometric degree; scalar carriers contribute zero."""
        return sum(self.generators[i].degree * mono[i] for i in self._geom_idx)

    def component_degree(self, mono: tuple, component: str) -> int:
        return sum(
            self.generators[i].degree * mono[i]
            for i in self._geom_idx
            if self.generators[i].component == component
        )

    def _is_truncated(self, mono: tuple) -> bool:
        total = 0
        budgets = self.component_budgets
        used: dict[str, int] = {}
        for i in self._geom_idx:
            e = mono[i]
            if not e:
                continue
            g = self.generators[i]
            d = g.degree * e
            total += d
            if g.component in budgets:
                c = used.get(g.component, 0) + d
                if c > budgets[g.component]:
                    return True
                used[g.component] = c
        return self.truncation_degree is not None and total > self.truncation_degree

    def split_scalar(self, mono: tuple) -> tuple[tuple, tuple]:
        """Split a monomial into (geometric part, scalar part)."""
        geom = [0] * self._n
        scal = [0] * self._n
        for i, e in enumerate(mono):
            if not e:
                continue
            if self.generators[i].kind == SCALAR:
                scal[i] = e
            else:
                geom[i] = e
        return tuple(geom), tuple(scal)

    def monomial_spec(self, mono: tuple) -> dict[str, int]:
        return {
            self.generators[i].name: e for i, e in enumerate(mono) if e
        }

    # -- element construction ---------------------------------------------------

    def zero(self) -> GradedElement:
        return GradedElement(self, {})

    def one(self) -> GradedElement:
        return GradedElement(self, {(0,) * self._n: Fraction(1)})

    def scalar(self, value) -> GradedElement:
        value = as_fraction(value)
        if value == 0:
            return self.zero()
        return GradedElement(self, {(0,) * self._n: value})

    def gen(self, name: str, exp: int = 1) -> GradedElement:
        return self.element([(1, {name: exp})])

    def element(self, terms: Iterable) -> GradedElement:
        """Build and normalize an element from (coeff, {name: exp}) pairs."""
        acc: dict[tuple, Fraction] = {}
        for coeff, spec in terms:
            coeff = as_fraction(coeff)
            if coeff == 0:
                continue
            mono = self._mono_from_spec(spec)
            acc[mono] = acc.get(mono, _ZERO) + coeff
        return self.normalize(GradedElement(self, acc))

    # -- arithmetic ---------------------------------------------------------------

    def add(self, *elements: GradedElement) -> GradedElement:
        acc: dict[tuple, Fraction] = {}
        for e in elements:
            self._own(e)
            for mono, coeff in e.terms.items():
                c = acc.get(mono, _ZERO) + coeff
                if c:
                    acc[mono] = c
                elif mono in acc:
                    del acc[mono]
        return GradedElement(self, acc)

    def sub(self, a: GradedElement, b: GradedElement) -> GradedElement:
        return self.add(a, self.scale(b, -1))

    def scale(self, e: GradedElement, value) -> GradedElement:
        self._own(e)
        value = as_fraction(value)
        if value == 0:
            return self.zero()
        return GradedElement(self, {m: c * value for m, c in e.terms.items()})

    def mul(self, a: GradedElement, b: GradedElement) -> GradedElement:
        self._own(a)
        self._own(b)
        acc: dict[tuple, Fraction] = {}
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                mono = tuple(x + y for x, y in zip(m1, m2))
                if self._is_truncated(mono):
                    continue
                c = acc.get(mono, _ZERO) + c1 * c2
                if c:
                    acc[mono] = c
                elif mono in acc:
                    del acc[mono]
        return self.normalize(GradedElement(self, acc))

    def pow(self, e: GradedElement, k: int) -> GradedElement:
        if k < 0:
            raise RingError("negative power")
        out = self.one()
        for _ in range(k):
            out = self.mul(out, e)
        return out

    def _own(self, e: GradedElement) -> None:
        if e.presentation is not self:
            raise RingError("element belongs to a different presentation")

    # -- normal form ---------------------------------------------------------------

    def normalize(self, e: GradedElement) -> GradedElement:
        """Unique normal form: no rule applies and no monomial is truncated."""
        self._own(e)
        pending = dict(e.terms)
        done: dict[tuple, Fraction] = {}
        rules = self._rules
        while pending:
            mono, coeff = pending.popitem()
            if not coeff or self._is_truncated(mono):
                continue
            hit = None
            for gi, power, rep in rules:
                if mono[gi] >= power:
                    hit = (gi, power, rep)
                    break
            if hit is None:
                c = done.get(mono, _ZERO) + coeff
                if c:
                    done[mono] = c
                elif mono in done:
                    del done[mono]
                continue
            gi, power, rep = hit
            shrunk = list(mono)
            shrunk[gi] -= power
            for rmono, rcoeff in rep.items():
                new = tuple(x + y for x, y in zip(shrunk, rmono))
                c = pending.get(new, _ZERO) + coeff * rcoeff
                if c:
                    pending[new] = c
                elif new in pending:
                    del pending[new]
        return GradedElement(self, done)

    # -- fiber integration and pairing ----------------------------------------------

    def fiber_integrate(self, e: GradedElement) -> GradedElement:
        """Extract the coefficient of the fiber-top power, scaled by its value.

        Terms with smaller fiber exponent integrate to zero; a larger exponent
        surviving normalization is an internal invariant violation.
        """
        if self.fiber_top is None:
            raise RingError("presentation has no fiber top")
        name, power, value = self.fiber_top
        gi = self._gen_index(name)
        e = self.normalize(e)
        acc: dict[tuple, Fraction] = {}
        for mono, coeff in e.terms.items():
            if mono[gi] > power:
                raise RingError(
                    f"fiber exponent {mono[gi]} exceeds top {power} after normalization"
                )
            if mono[gi] != power:
                continue
            rest = list(mono)
            rest[gi] = 0
            acc[tuple(rest)] = coeff * value
        return GradedElement(self, acc)

    def pair_top(self, e: GradedElement, pairing: Mapping, top_degree: int = 4) -> Fraction:
        """Pair a base-only element against numeric top-degree values.

        ``pairing`` maps monomial specs ({name: exp}) to rationals.  Terms of
        lower degree contribute zero; an unmapped top-degree monomial is an
        error naming the monomial.
        """
        table: dict[tuple, Fraction] = {}
        for spec, value in pairing.items():
            table[self._mono_from_spec(dict(spec))] = as_fraction(value)
        e = self.normalize(e)
        total = _ZERO
        for mono, coeff in e.terms.items():
            if any(mono[i] for i in self._scalar_idx):
                raise PairingError("numeric pairing applied to a symbolic element")
            deg = self.monomial_degree(mono)
            if deg < top_degree:
                continue
            if deg > top_degree:
                raise PairingError(
                    f"monomial {self.monomial_str(mono)} above pairing degree"
                )
            if mono not in table:
                raise PairingError(f"unmapped monomial {self.monomial_str(mono)}")
            total += coeff * table[mono]
        return total

    def divide_by_gen_power(self, e: GradedElement, name: str, power: int) -> GradedElement:
        """Divide every term by name**power, rejecting non-divisible terms."""
        self._own(e)
        if power == 0:
            return e
        gi = self._gen_index(name)
        acc: dict[tuple, Fraction] = {}
        for mono, coeff in e.terms.items():
            if mono[gi] < power:
                raise RingError(
                    f"term {self.monomial_str(mono)} not divisible by {name}^{power}"
                )
            new = list(mono)
            new[gi] -= power
            acc[tuple(new)] = coeff
        return GradedElement(self, acc)

    # -- output ------------------------------------------------------------------

    def monomial_str(self, mono: tuple) -> str:
        parts = []
        for i, e in enumerate(mono):
            if not e:
                continue
            name = self.generators[i].name
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts) if parts else "1"

    def dump(self, e: GradedElement) -> str:
        """Canonical one-term-per-line dump, used by golden-file tests."""
        self._own(e)
        lines = [
            f"{e.terms[mono]} * {self.monomial_str(mono)}"
            for mono in sorted(e.terms)
        ]
        return "\n".join(lines) if lines else "0"


# -- cross-presentation maps ----------------------------------------------------------


def substitute(
    e: GradedElement,
    dst: RingPresentation,
    images: Mapping[str, GradedElement] | None = None,
) -> GradedElement:
    """Ring homomorphism determined by generator images.

    Generators without an explicit image map to the same-named generator of
    ``dst``.  The result is normalized in ``dst``.
    """
    src = e.presentation
    images = dict(images or {})
    cache: dict[tuple[str, int], GradedElement] = {}

    def image_power(name: str, exp: int) -> GradedElement:
        key = (name, exp)
        if key not in cache:
            base = images.get(name)
            if base is None:
                base = dst.gen(name)
            cache[key] = dst.pow(base, exp)
        return cache[key]

    acc: dict[tuple, Fraction] = {}
    for mono, coeff in e.terms.items():
        term = None
        for i, exp in enumerate(mono):
            if not exp:
                continue
            factor = image_power(src.generators[i].name, exp)
            term = factor if term is None else dst.mul(term, factor)
            if term.is_zero():
                break
        if term is None:
            term = dst.one()
        for m2, c2 in term.terms.items():
            c = acc.get(m2, _ZERO) + coeff * c2
            if c:
                acc[m2] = c
            elif m2 in acc:
                del acc[m2]
    return dst.normalize(GradedElement(dst, acc))


def pair_geometric(
    e: GradedElement,
    dst: RingPresentation,
    component_values: Mapping[str, Callable[[dict], GradedElement]],
    top_degree: int = 4,
) -> GradedElement:
    """Push an element down to scalars by pairing each geometric component.

    Every geometric component named in ``component_values`` must reach degree
    exactly ``top_degree`` for a term to survive; deficient terms pair to
    zero.  Scalar carriers transfer by name.  The callables map a component's
    monomial spec to an element of ``dst`` and raise PairingError on monomials
    they do not know.
    """
    src = e.presentation
    acc: dict[tuple, Fraction] = {}
    for mono, coeff in e.terms.items():
        geom, scal = src.split_scalar(mono)
        per_component: dict[str, dict[str, int]] = {}
        for i, exp in enumerate(geom):
            if not exp:
                continue
            g = src.generators[i]
            if g.component not in component_values:
                raise PairingError(f"no pairing for component {g.component!r}")
            per_component.setdefault(g.component, {})[g.name] = exp
        dead = False
        for comp in component_values:
            spec = per_component.get(comp, {})
            deg = sum(src.generators[src._gen_index(n)].degree * x for n, x in spec.items())
            if deg != top_degree:
                dead = True
                break
        if dead:
            continue
        term = dst.element([(coeff, src.monomial_spec(scal))])
        for comp, fn in component_values.items():
            term = dst.mul(term, fn(per_component.get(comp, {})))
        for m2, c2 in term.terms.items():
            c = acc.get(m2, _ZERO) + c2
            if c:
                acc[m2] = c
            elif m2 in acc:
                del acc[m2]
    return dst.normalize(GradedElement(dst, acc))


# -- function-style aliases mirroring the module surface -------------------------------


def normalize(e: GradedElement, p: RingPresentation) -> GradedElement:
    return p.normalize(e)


def multiply(a: GradedElement, b: GradedElement, p: RingPresentation) -> GradedElement:
    return p.mul(a, b)


def fiber_integrate(e: GradedElement, p: RingPresentation) -> GradedElement:
    return p.fiber_integrate(e)


def pair_top(e: GradedElement, pairing: Mapping, p: RingPresentation, top_degree: int = 4) -> Fraction:
    return p.pair_top(e, pairing, top_degree)
