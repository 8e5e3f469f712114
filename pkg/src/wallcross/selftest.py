"""Acceptance checks: every exit criterion as one callable, exact throughout.

Each check returns (passed, detail).  Two checks fail on a fresh build by
design: the published level-2 obstruction display they compare against is
adjudicated as a misprint by the derivation engine (see the erratum report);
the checks state the published values literally and report the honest
outcome.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial

from . import instanton_link
from .closed_forms import (
    printed_r1,
    printed_r1_obstruction,
    printed_r2_assembled,
    printed_r2_lower,
    printed_r2_lower_obstruction,
    printed_r2_upper,
    printed_r2_upper_obstruction,
)
from .errata import build_erratum_report
from .geometry import (
    MATCHING_SUM,
    PERMUTATION_SUM,
    ManifoldModel,
    PairingTable,
    SymForm,
    evaluate_on_table,
    evaluate_sym_form,
    pairing_table_for,
    polarization_factor,
    ppoly,
    symmetrized_product_pairing,
)
from .instanton_link import BASE_RING, MANIFOLD_RING, EquivariantOptions
from .pipelines import assemble_delta_r2, derive_r1, derive_r2_lower, derive_r2_upper
from .ring import BASE, FIBER, SCALAR, Generator, RingPresentation
from .walls import (
    CrossingProblem,
    DegenerateChamberError,
    enumerate_walls,
    epsilon_sign,
)

D_MAX = 12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _r1_grid():
    return [(d, l) for d in range(3, D_MAX + 1) for l in range(0, d // 2 + 1)]


def _r2_grid():
    return [(d, l) for d in range(7, D_MAX + 1) for l in range(0, d // 2 + 1)]


def _forms_equal(a: SymForm, b: SymForm) -> list[str]:
    problems = []
    for k in sorted(set(a.q_powers()) | set(b.q_powers())):
        if a.coefficient(k) != b.coefficient(k):
            problems.append(f"q^{k}: {a.coefficient(k)} != {b.coefficient(k)}")
    return problems


def _convention_constants(pairs) -> tuple[bool, dict[int, Fraction]]:
    """Derived == kappa_k * table per q-power, kappa constant over the grid."""
    kappas: dict[int, Fraction] = {}
    for derived, printed in pairs:
        for k in set(derived.q_powers()) | set(printed.q_powers()):
            dp, pp = derived.coefficient(k), printed.coefficient(k)
            if not pp:
                if dp:
                    return False, kappas
                continue
            ref = next(c for c in pp if c)
            idx = pp.index(ref)
            if idx >= len(dp):
                return False, kappas
            kappa = dp[idx] / ref
            if ppoly(*(kappa * c for c in pp)) != dp:
                return False, kappas
            if kappas.setdefault(k, kappa) != kappa:
                return False, kappas
    return True, kappas


# -- criterion 1 ------------------------------------------------------------------------


def check_r1_closed_form(options=None):
    pairs = [(derive_r1(d, l), printed_r1(d, l).to_symform()) for d, l in _r1_grid()]
    constant, kappas = _convention_constants(pairs)
    if not constant:
        return False, "convention constants are not constant over the grid"
    if any(kappa != 1 for kappa in kappas.values()):
        return False, f"convention constants differ from the oracle-fixed 1: {kappas}"
    for (d, l), (derived, printed) in zip(_r1_grid(), pairs):
        problems = _forms_equal(derived, printed)
        if problems:
            return False, f"(d={d}, l={l}): " + "; ".join(problems)
    return True, f"{len(pairs)} grid points, kappa = 1 per q-power"


# -- criterion 2 ------------------------------------------------------------------------


def check_r1_obstruction(options=None):
    for l in (0, 1):
        derived = derive_r1(2, l, True)
        printed = printed_r1_obstruction(l).to_symform()
        problems = _forms_equal(derived, printed)
        if problems:
            return False, f"l={l}: " + "; ".join(problems)
    # permutation-sum evaluation against the displays on a concrete lattice
    M = ManifoldModel.build(2)
    alpha, x1, x2 = (0, 1, 0), (1, 2, 0), (0, 1, 1)
    table = pairing_table_for(alpha, (x1, x2), M)
    value = evaluate_sym_form(derive_r1(2, 0, True), (x1, x2), alpha, M, PERMUTATION_SUM)
    p, b1, b2 = Fraction(M.p_plus), table.b[0], table.b[1]
    q12 = table.q_vals[0][1]
    display = Fraction(1, 4) * ((5 + p) * 2 * b1 * b2 + 4 * 2 * q12)
    if value != display:
        return False, f"delta(x1,x2) = {value} but the display evaluates to {display}"
    one_value = evaluate_sym_form(derive_r1(2, 1, True), (), alpha, M, PERMUTATION_SUM)
    if one_value != Fraction(-1, 4) * (2 * p - 14):
        return False, f"delta(1) = {one_value} != -(2p-14)/4 at p={p}"
    return True, "both displays reproduced exactly under permutation_sum"


# -- criteria 3 and 4 ----------------------------------------------------------------------


def check_equivariant_pushforwards(options=None):
    eq = options.equivariant() if options is not None else EquivariantOptions()
    _, cone2, total2 = instanton_link.wp_power_pushforward_parts(2, eq)
    _, cone3, total3 = instanton_link.wp_power_pushforward_parts(3, eq)
    expect2 = BASE_RING.scalar(Fraction(-5, 2))
    expect3 = BASE_RING.element([(4, {"c_L": 1}), (80, {"c_R": 1})])
    expect3_raw = BASE_RING.element([(16, {"c_L": 1}), (320, {"c_R": 1})])
    if total2 != expect2:
        return False, f"wp^2 pushforward {BASE_RING.dump(total2)} != -5/2"
    if cone3 != expect3_raw:
        return False, f"pre-division wp^3 value is not 16c_L + 320c_R"
    if total3 != expect3:
        return False, f"wp^3 pushforward {BASE_RING.dump(total3)} != 4c_L + 80c_R"
    const, cls = instanton_link.pull_to_manifold(total3)
    pulled_ok = (
        const == 0
        and cls == MANIFOLD_RING.element([(48, {"pt": 1}), (-25, {"P_plus": 1})])
    )
    if not pulled_ok:
        return False, "wp^3 does not pull back to 48 pt - 25 P_plus"
    return True, "wp^2 -> -5/2, wp^3 -> 4c_L + 80c_R (16c_L + 320c_R before division), 48 - 25p"


def check_cap_vanishing(options=None):
    eq = options.equivariant() if options is not None else EquivariantOptions()
    for k in (2, 3):
        cap = instanton_link.cap_contribution(k, eq)
        if not cap.is_zero():
            return False, f"cap contribution for wp^{k} is {BASE_RING.dump(cap)}, not 0"
    return True, f"cap contributions vanish for k=2,3 (cap_relation={eq.cap_relation})"


# -- criteria 5, 6, 7 -----------------------------------------------------------------------


def check_r2_upper(options=None):
    pairs = [(derive_r2_upper(d, l), printed_r2_upper(d, l).to_symform()) for d, l in _r2_grid()]
    constant, kappas = _convention_constants(pairs)
    if not constant or any(kappa != 1 for kappa in kappas.values()):
        return False, "general-case convention constants are not the oracle-fixed 1"
    for (d, l), (derived, printed) in zip(_r2_grid(), pairs):
        problems = _forms_equal(derived, printed)
        if problems:
            return False, f"general (d={d}, l={l}): " + "; ".join(problems)
    problems = []
    for l in range(0, 4):
        derived = derive_r2_upper(6, l, True)
        printed = printed_r2_upper_obstruction(l).to_symform()
        for item in _forms_equal(derived, printed):
            problems.append(f"obstruction l={l}: {item}")
    if problems:
        return False, (
            "general case matches everywhere, but the published alpha^2=-1 display "
            "does not; the derivation adjudicates its alpha-slot as a misprint "
            "(see the erratum report): " + "; ".join(problems[:2])
        )
    return True, "matches the published table on the full grid and obstruction display"


def check_r2_lower_and_erratum(options=None):
    for d, l in _r2_grid():
        derived = derive_r2_lower(d, l)
        corrected = printed_r2_lower(d, l, p_slot=-50).to_symform()
        as_printed = printed_r2_lower(d, l, p_slot=-32).to_symform()
        if derived != corrected:
            return False, f"(d={d}, l={l}): lower stratum does not derive to the -50 table"
        if derived == as_printed:
            return False, f"(d={d}, l={l}): derivation unexpectedly matches the printed -32"
    for l in range(0, 4):
        derived = derive_r2_lower(6, l, True)
        printed = printed_r2_lower_obstruction(l).to_symform()
        if derived != printed:
            return False, f"obstruction l={l}: lower display not reproduced"
    report = build_erratum_report()
    locations = [e.location for e in report.entries]
    expected_two = (
        len(report.entries) == 2
        and any("lower-stratum" in loc for loc in locations)
        and any("assembled" in loc for loc in locations)
        and any("-158" in e.derived_value for e in report.entries)
    )
    if not expected_two:
        return False, (
            "lower stratum derives -50 with both corroborations, but the erratum "
            f"report has {len(report.entries)} entries instead of the two anticipated "
            "(the published level-2 upper alpha^2=-1 alpha-slot is itself a misprint, "
            "so its sum -158 is not what the engine derives); see the erratum report"
        )
    return True, "lower stratum -50 corroborated; erratum report closed at two entries"


def check_assembly(options=None):
    for d, l in _r2_grid():
        derived = assemble_delta_r2(d, l)
        printed = printed_r2_assembled(d, l).to_symform()
        problems = _forms_equal(derived, printed)
        if problems:
            return False, f"(d={d}, l={l}): " + "; ".join(problems)
        m = d - 2 * l
        if m >= 4:
            expected = Fraction((-1) ** (d + l), 2**d) * 8 * Fraction(
                factorial(m), factorial(m - 4)
            )
            got = derived.coefficient_as(2, "diagonal")
            if got != ppoly(expected):
                return False, f"(d={d}, l={l}): q^2 slot {got} != 8 m!/(m-4)!"
        if m < 4 and derived.coefficient(2):
            return False, f"(d={d}, l={l}): q^2 slot should vanish for m={m}"
        if m < 2 and derived.coefficient(1):
            return False, f"(d={d}, l={l}): q slot should vanish for m={m}"
    return True, "assembled table matches (10 p_plus slot included) with vanishing tails"


# -- criterion 8 -----------------------------------------------------------------------------


def _brute_force_polarized(f: SymForm, table: PairingTable) -> Fraction:
    """Independent oracle: full permutation sum divided by 2^k k! (m-2k)!."""
    m = f.m
    total = Fraction(0)
    for k, poly in f.coeffs:
        coeff = Fraction(0)
        for i, c in enumerate(poly):
            coeff += c * table.p_plus**i
        acc = Fraction(0)
        for perm in permutations(range(m)):
            term = Fraction(1)
            for t in range(k):
                term *= table.q_vals[perm[2 * t]][perm[2 * t + 1]]
            for t in range(2 * k, m):
                term *= table.b[perm[t]]
            acc += term
        total += coeff * acc / polarization_factor(m, k)
    return total


def check_symmetrization_oracle(options=None):
    rng = random.Random(20260810)
    trials = 0
    for _ in range(120):
        m = rng.randint(0, 6)
        b = tuple(Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(m))
        q = [[Fraction(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                q[i][j] = q[j][i] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        table = PairingTable(Fraction(-3), b, tuple(map(tuple, q)), Fraction(rng.randint(-9, 9)))
        coeffs = {
            k: ppoly(rng.randint(-4, 4), rng.randint(-4, 4))
            for k in range(0, m // 2 + 1)
        }
        f = SymForm.from_dict(m, coeffs, d=m, l=0, r=1, alpha_sq=None, obstruction=False)
        lhs = evaluate_on_table(f, table, MATCHING_SUM)
        rhs = _brute_force_polarized(f, table)
        if lhs != rhs:
            return False, f"matching_sum disagrees with the brute-force oracle at m={m}"
        perm_lhs = evaluate_on_table(f, table, PERMUTATION_SUM)
        matching_terms = {
            k: evaluate_on_table(
                SymForm.from_dict(m, {k: f.coefficient(k)}, m, 0, 1, None, False),
                table,
                MATCHING_SUM,
            )
            for k in f.q_powers()
        }
        expect_perm = sum(
            (matching_terms[k] * polarization_factor(m, k) for k in matching_terms),
            Fraction(0),
        )
        if perm_lhs != expect_perm:
            return False, "permutation_sum is not the polarization multiple of matching_sum"
        trials += 1

    M = ManifoldModel.build(2)
    x, y = (1, 1, 0), (2, 0, 1)
    if symmetrized_product_pairing((x, y), 1, M) != M.pair(x, y):
        return False, "level-1 product pairing is not the intersection number"
    Q = M.pair(x, x)
    if symmetrized_product_pairing((x, x, x, x), 2, M) != 6 * Q * Q:
        return False, "level-2 product pairing on a diagonal tuple is not 6 q^2"
    if symmetrized_product_pairing((x,) * 6, 3, M) != 90 * Q**3:
        return False, "level-3 product pairing on a diagonal tuple is not 90 q^3"
    return True, f"{trials} random tables; (2r)!/2^r structure holds for r <= 3"


# -- criterion 9 -----------------------------------------------------------------------------


def _box_search(prob: CrossingProblem, r_max: int, bound: int):
    """Independent brute-force wall search over a fixed coordinate box."""
    import itertools as it

    M = prob.M
    hits = set()
    for alpha in it.product(range(-bound, bound + 1), repeat=M.rank):
        if not any(alpha):
            continue
        if any((a - c) % 2 for a, c in zip(alpha, prob.c)):
            continue
        sq = M.square(alpha)
        for r in range(0, r_max + 1):
            if sq == prob.p1 + 4 * r and sq < 0:
                um = M.pair(alpha, prob.omega_minus)
                up = M.pair(alpha, prob.omega_plus)
                if um != 0 and up != 0 and (um < 0) != (up < 0):
                    rep = alpha if up > 0 else tuple(-a for a in alpha)
                    hits.add((rep, r))
    return hits


def check_wall_enumeration(options=None):
    M = ManifoldModel.build(2)
    prob = CrossingProblem(
        M,
        p1=-8,
        c=(0, 0, 0),
        omega_minus=(Fraction(1), Fraction(-3, 10), Fraction(1, 10)),
        omega_plus=(Fraction(1), Fraction(3, 10), Fraction(1, 10)),
        l=0,
        xs=(),
    )
    walls = enumerate_walls(prob, r_max=2)
    got = {(w.alpha, w.r, w.supported) for w in walls}
    expected = {
        ((0, -2, 0), 1, True),
        ((0, -2, -2), 0, False),
        ((0, -2, 2), 0, False),
    }
    # representatives pair positively with omega_plus: alpha.omega_plus > 0
    normalized = set()
    for alpha, r, supported in expected:
        up = M.pair(alpha, prob.omega_plus)
        rep = alpha if up > 0 else tuple(-a for a in alpha)
        normalized.add((rep, r, supported))
    if got != normalized:
        return False, f"crossed set {sorted(got)} != expected {sorted(normalized)}"
    if _box_search(prob, 2, 4) != {(w.alpha, w.r) for w in walls}:
        return False, "independent box search disagrees"
    try:
        degenerate = CrossingProblem(
            M, -8, (0, 0, 0),
            (Fraction(1), Fraction(0), Fraction(1, 10)),
            (Fraction(1), Fraction(3, 10), Fraction(1, 10)),
            0, (),
        )
        enumerate_walls(degenerate, r_max=2)
        return False, "period point on a wall was not rejected"
    except DegenerateChamberError:
        pass
    return True, "crossed set, box search and degenerate rejection all agree"


# -- criterion 10 ----------------------------------------------------------------------------


def check_sign_law(options=None):
    rng = random.Random(11)
    for _ in range(1000):
        b_minus = rng.randint(1, 3)
        M = ManifoldModel.build(b_minus)
        alpha = tuple(rng.randint(-6, 6) for _ in range(M.rank))
        gamma = tuple(rng.randint(-6, 6) for _ in range(M.rank))
        c = tuple(a + 2 * g for a, g in zip(alpha, gamma))
        if epsilon_sign(c, alpha, M) != 1:
            return False, f"literal sign rule returned -1 for c={c}, alpha={alpha}"
    return True, "literal rule is +1 on 1000 randomized valid pairs (exponent 2 beta^2)"


# -- criterion 11 ----------------------------------------------------------------------------


def random_presentation(rng: random.Random) -> RingPresentation:
    """Random triangular presentation over degree-2 generators."""
    n = rng.randint(3, 5)
    gens = [Generator(f"g{i}", 2, FIBER if i == 0 else BASE) for i in range(n)]
    if rng.random() < 0.5:
        gens.append(Generator("s", 0, SCALAR))
    names = [g.name for g in gens if g.kind != SCALAR]
    relations = []
    ruled = rng.sample(names, rng.randint(0, 2))
    for name in ruled:
        power = rng.randint(2, 3)
        others = [nm for nm in names if nm not in ruled]
        terms = []
        for _ in range(rng.randint(1, 2)):
            spec = {}
            remaining = power
            while remaining > 0:
                pick = rng.choice(others + [name])
                take = rng.randint(1, remaining)
                if pick == name:
                    take = min(take, power - 1 - spec.get(name, 0))
                    if take <= 0:
                        continue
                spec[pick] = spec.get(pick, 0) + take
                remaining -= take
            terms.append((Fraction(rng.randint(-3, 3), rng.randint(1, 2)), spec))
        relations.append((name, power, terms))
    return RingPresentation(
        gens,
        relations=relations,
        truncation_degree=2 * rng.randint(4, 8),
    )


def random_element(rng: random.Random, pres: RingPresentation, size: int = 4):
    terms = []
    for _ in range(rng.randint(0, size)):
        spec = {}
        for g in pres.generators:
            if rng.random() < 0.5:
                spec[g.name] = rng.randint(1, 3)
        terms.append((Fraction(rng.randint(-6, 6), rng.randint(1, 3)), spec))
    return pres.element(terms)


def check_ring_properties(options=None):
    rng = random.Random(31415)
    for _ in range(1000):
        pres = random_presentation(rng)
        e = random_element(rng, pres)
        if pres.normalize(e) != e:
            return False, "normalize is not idempotent"
        for mono in e.terms:
            if pres.monomial_degree(mono) > pres.truncation_degree:
                return False, "degree soundness violated"
    rng = random.Random(27182)
    for _ in range(1000):
        pres = random_presentation(rng)
        a, b, c = (random_element(rng, pres, 3) for _ in range(3))
        if pres.mul(a, b) != pres.mul(b, a):
            return False, "multiplication is not commutative"
        if pres.mul(pres.mul(a, b), c) != pres.mul(a, pres.mul(b, c)):
            return False, "multiplication is not associative"
    rng = random.Random(16180)
    for _ in range(1000):
        top = rng.randint(1, 4)
        pres = RingPresentation(
            [Generator("h", 2, FIBER), Generator("x", 2, BASE), Generator("y", 4, BASE)],
            truncation_degree=2 * top + 8,
            fiber_top=("h", top, Fraction((-1) ** top)),
            component_budgets={"base": 8},
        )

        def fiber_element():
            terms = []
            for _ in range(rng.randint(0, 3)):
                spec = {"h": rng.randint(0, top)}
                if rng.random() < 0.7:
                    spec["x"] = rng.randint(1, 2)
                if rng.random() < 0.5:
                    spec["y"] = rng.randint(1, 2)
                terms.append((Fraction(rng.randint(-6, 6), rng.randint(1, 3)), spec))
            return pres.element(terms)

        a = fiber_element()
        b = fiber_element()
        lhs = pres.fiber_integrate(pres.add(a, b))
        rhs = pres.add(pres.fiber_integrate(a), pres.fiber_integrate(b))
        if lhs != rhs:
            return False, "fiber integration is not linear"
        beta = pres.element([(3, {"x": 1})])
        full = pres.mul(pres.gen("h", top), beta)
        if pres.fiber_integrate(full) != pres.scale(beta, Fraction((-1) ** top)):
            return False, "fiber integration of h^top * base is wrong"
        lower = pres.mul(pres.gen("h", top - 1), beta) if top > 1 else beta
        if not pres.fiber_integrate(lower).is_zero():
            return False, "fiber integration does not kill lower fiber degrees"
    return True, "normalize/mul/fiber properties hold on 1000 randomized cases each"


CHECKS = (
    ("criterion 01: level-1 closed form over the grid", check_r1_closed_form),
    ("criterion 02: level-1 obstruction displays", check_r1_obstruction),
    ("criterion 03: equivariant pushforwards", check_equivariant_pushforwards),
    ("criterion 04: cap contribution vanishes", check_cap_vanishing),
    ("criterion 05: level-2 upper stratum", check_r2_upper),
    ("criterion 06: level-2 lower stratum and erratum closure", check_r2_lower_and_erratum),
    ("criterion 07: level-2 assembly", check_assembly),
    ("criterion 08: symmetrization oracle", check_symmetrization_oracle),
    ("criterion 09: wall enumeration", check_wall_enumeration),
    ("criterion 10: sign law", check_sign_law),
    ("criterion 11: ring kernel properties", check_ring_properties),
)


def run_all(options=None) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn(options)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, passed, detail))
    return results
