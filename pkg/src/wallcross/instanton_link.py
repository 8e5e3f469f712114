"""Equivariant cohomology of the compactified charge-two instanton link.

The lower-stratum pipeline needs the pushforwards of the second and third
powers of the four-dimensional class ``wp`` (the Pontrjagin class of the
framing action) along the eight-dimensional fiber of the compactified link.
The fiber decomposes into a cap and a mapping-cone piece:

* cap: polynomial ring Q[c_L, c_R][H] with the relation
  H^2 + 2*H*c_R + c_R^2 = 0 (a printed variant with a single cross term is
  selectable); ``wp`` restricts to -4H - 4c_R and its pushforward vanishes.
* cone piece: classes T, K_L, K_R over Q[c_L, c_R] with K_R^2 = -T^2 c_R and
  K_L^2 = -T^2 c_L; restriction to the middle sphere-product sends
  T -> eta_L - eta_R, K_R -> eta_L eta_R + c_R, K_L -> -c_L - eta_L eta_R,
  in the ring with eta_L^2 = -c_L, eta_R^2 = -c_R.  Pushing forward divides
  by eta_L eta_R; ``wp`` restricts to T^2 - 4K_R - 4c_R.

Degree bookkeeping: computing the pushforward of wp**k only needs the
(4k - 8)-skeleton of the classifying space, so products of c_L, c_R above
that degree are dropped.  The whole fiber is a degree-four branched cover, so
the sum of the two contributions is divided by four at the very end.

The two sign conventions the source tables leave ambiguous are exposed as
options: ``kr_sign`` flips the c_R term in the K_R restriction, and
``cap_relation`` selects the cap rewrite rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ring import (
    BASE,
    FIBER,
    GradedElement,
    Generator,
    PairingError,
    RingError,
    RingPresentation,
    substitute,
)

KR_SIGN_PLUS = "plus"
KR_SIGN_MINUS = "minus"
CAP_RELATION_DEFAULT = "default"
CAP_RELATION_ALT = "alt"

BRANCHED_COVER_DEGREE = 4


@dataclass(frozen=True)
class EquivariantOptions:
    """Selectable sign conventions; defaults reproduce the verified values."""

    kr_sign: str = KR_SIGN_PLUS
    cap_relation: str = CAP_RELATION_DEFAULT

    def __post_init__(self):
        if self.kr_sign not in (KR_SIGN_PLUS, KR_SIGN_MINUS):
            raise ValueError(f"kr_sign must be plus or minus, got {self.kr_sign!r}")
        if self.cap_relation not in (CAP_RELATION_DEFAULT, CAP_RELATION_ALT):
            raise ValueError(
                f"cap_relation must be default or alt, got {self.cap_relation!r}"
            )


DEFAULT_OPTIONS = EquivariantOptions()

# Shared coefficient ring Q[c_L, c_R].
BASE_RING = RingPresentation(
    [Generator("c_L", 4, BASE), Generator("c_R", 4, BASE)]
)

# Manifold-level degree-four classes: the point class and the class whose
# fundamental pairing is p_plus.
MANIFOLD_RING = RingPresentation(
    [Generator("pt", 4, BASE), Generator("P_plus", 4, BASE)],
    component_budgets={"base": 4},
)


def link_presentation() -> RingPresentation:
    return RingPresentation(
        [
            Generator("eta_L", 2, FIBER),
            Generator("eta_R", 2, FIBER),
            Generator("c_L", 4, BASE),
            Generator("c_R", 4, BASE),
        ],
        relations=[
            ("eta_L", 2, [(-1, {"c_L": 1})]),
            ("eta_R", 2, [(-1, {"c_R": 1})]),
        ],
    )


def cap_presentation(budget: int, options: EquivariantOptions = DEFAULT_OPTIONS) -> RingPresentation:
    if options.cap_relation == CAP_RELATION_DEFAULT:
        replacement = [(-2, {"H": 1, "c_R": 1}), (-1, {"c_R": 2})]
    else:
        replacement = [(-1, {"H": 1, "c_R": 1}), (-1, {"c_R": 2})]
    return RingPresentation(
        [
            Generator("H", 4, FIBER),
            Generator("c_L", 4, BASE),
            Generator("c_R", 4, BASE),
        ],
        relations=[("H", 2, replacement)],
        component_budgets={"base": max(budget, 0)},
    )


def rotation_presentation(budget: int) -> RingPresentation:
    return RingPresentation(
        [
            Generator("T", 2, FIBER),
            Generator("K_L", 4, FIBER),
            Generator("K_R", 4, FIBER),
            Generator("c_L", 4, BASE),
            Generator("c_R", 4, BASE),
        ],
        relations=[
            ("K_L", 2, [(-1, {"T": 2, "c_L": 1})]),
            ("K_R", 2, [(-1, {"T": 2, "c_R": 1})]),
        ],
        component_budgets={"base": max(budget, 0)},
    )


def restriction_images(link: RingPresentation, options: EquivariantOptions = DEFAULT_OPTIONS) -> dict[str, GradedElement]:
    """Images of T, K_L, K_R on the middle sphere product."""
    kr_c = 1 if options.kr_sign == KR_SIGN_PLUS else -1
    return {
        "T": link.element([(1, {"eta_L": 1}), (-1, {"eta_R": 1})]),
        "K_R": link.element([(1, {"eta_L": 1, "eta_R": 1}), (kr_c, {"c_R": 1})]),
        "K_L": link.element([(-1, {"c_L": 1}), (-1, {"eta_L": 1, "eta_R": 1})]),
    }


def p3_pushforward(e: GradedElement) -> GradedElement:
    """Division by eta_L eta_R: coefficient extraction in the link ring.

    Pure c_L/c_R terms push to zero; any other residual eta configuration
    after reduction is an internal error.
    """
    link = e.presentation
    e = link.normalize(e)
    il = link._gen_index("eta_L")
    ir = link._gen_index("eta_R")
    acc = BASE_RING.zero()
    for mono, coeff in e.terms.items():
        el, er = mono[il], mono[ir]
        if (el, er) == (0, 0):
            continue
        if (el, er) != (1, 1):
            raise RingError(
                f"residual eta degree ({el},{er}) after reduction"
            )
        spec = link.monomial_spec(mono)
        spec.pop("eta_L")
        spec.pop("eta_R")
        acc = BASE_RING.add(acc, BASE_RING.element([(coeff, spec)]))
    return acc


def p2_pushforward_T2(x: GradedElement, options: EquivariantOptions = DEFAULT_OPTIONS) -> GradedElement:
    """Push T^2 * x forward: restrict x to the sphere product, then divide."""
    link = link_presentation()
    restricted = substitute(x, link, restriction_images(link, options))
    return p3_pushforward(restricted)


def cap_contribution(k: int, options: EquivariantOptions = DEFAULT_OPTIONS) -> GradedElement:
    """Pushforward of (-4H - 4c_R)**k from the cap; identically zero here."""
    cap = cap_presentation(4 * k - 8, options)
    wp_cap = cap.element([(-4, {"H": 1}), (-4, {"c_R": 1})])
    power = cap.pow(wp_cap, k)
    hi = cap._gen_index("H")
    acc = BASE_RING.zero()
    for mono, coeff in power.terms.items():
        if mono[hi] == 0:
            continue
        if mono[hi] > 1:
            raise RingError("cap relation failed to reduce H powers")
        spec = cap.monomial_spec(mono)
        spec.pop("H")
        acc = BASE_RING.add(acc, BASE_RING.element([(coeff, spec)]))
    return acc


def wp_power_pushforward_parts(
    k: int, options: EquivariantOptions = DEFAULT_OPTIONS
) -> tuple[GradedElement, GradedElement, GradedElement]:
    """Return (cap part, cone part before division, total) for wp**k.

    The cone part expands (T^2 - 4K_R - 4c_R)**k, truncates the coefficient
    ring at degree 4k - 8, factors out T^2 and restricts; the total adds the
    cap part and divides by the branched-cover degree.
    """
    if k not in (2, 3):
        raise ValueError(f"wp power must be 2 or 3, got {k}")
    rot = rotation_presentation(4 * k - 8)
    wp = rot.element(
        [(1, {"T": 2}), (-4, {"K_R": 1}), (-4, {"c_R": 1})]
    )
    expanded = rot.pow(wp, k)
    quotient = rot.divide_by_gen_power(expanded, "T", 2)
    cone = p2_pushforward_T2(quotient, options)
    cap = cap_contribution(k, options)
    total = BASE_RING.scale(
        BASE_RING.add(cap, cone), Fraction(1, BRANCHED_COVER_DEGREE)
    )
    return cap, cone, total


def wp_power_pushforward(k: int, options: EquivariantOptions = DEFAULT_OPTIONS) -> GradedElement:
    """Pushforward of wp**k along the compactified link fiber, in Q[c_L, c_R]."""
    return wp_power_pushforward_parts(k, options)[2]


def pull_to_manifold(e: GradedElement) -> tuple[Fraction, GradedElement]:
    """Pull a Q[c_L, c_R] class back to a b+=1 manifold.

    c_R pulls back to -(1/4) of the p_plus class and c_L to -(1/4) of the
    p_minus class; with p_minus = -48 + 5 p_plus the degree-four part becomes
    a combination of the point class and the p_plus class.  Returns the
    degree-zero part as a rational and the degree-four part as an element of
    MANIFOLD_RING; higher degrees are rejected.
    """
    pres = e.presentation
    for mono in e.terms:
        if pres.monomial_degree(mono) > 4:
            raise PairingError("class of degree above four cannot pull back")
    images = {
        "c_L": MANIFOLD_RING.element(
            [(12, {"pt": 1}), (Fraction(-5, 4), {"P_plus": 1})]
        ),
        "c_R": MANIFOLD_RING.element([(Fraction(-1, 4), {"P_plus": 1})]),
    }
    pulled = substitute(e, MANIFOLD_RING, images)
    const = Fraction(0)
    acc = MANIFOLD_RING.zero()
    for mono, coeff in pulled.terms.items():
        if MANIFOLD_RING.monomial_degree(mono) == 0:
            const += coeff
        else:
            acc = MANIFOLD_RING.add(
                acc, GradedElement(MANIFOLD_RING, {mono: coeff})
            )
    return const, acc


def evaluate_degree_four(cls: GradedElement, p_plus) -> Fraction:
    """Fundamental-class pairing of a MANIFOLD_RING class: pt -> 1, P_plus -> p_plus."""
    return MANIFOLD_RING.pair_top(
        cls, {(("pt", 1),): 1, (("P_plus", 1),): p_plus}, top_degree=4
    )
