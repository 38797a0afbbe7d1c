"""Randomized identity suites, runnable headlessly and from the CLI.

Every suite draws germs from a seeded generator (small rational tensor
entries, mixed metric signs) and checks an algebraic identity with exact
arithmetic; the first counterexample, if any, is serialized into the
result.  Suites are deterministic for a fixed seed and count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .contact import b_coefficients, classify_contact_surface, contact_function, planar_contact_order
from .cubic import apolarity_residual, cubic_tensor_appendix, cubic_tensor_closed
from .darboux import (
    GridSpec,
    darboux_directions_surface,
    darboux_locus_scan,
    is_generalized_darboux,
)
from .documents import germ_to_document, graph_to_document
from .errors import InternalCheckError
from .germs import HypersurfaceGerm
from .jets import EXACT, FLOAT, TruncatedPolynomial, scalar_is_zero
from .moutard import (
    SectionSpec,
    moutard_beta,
    moutard_pencil,
    pencil_constructive,
    pencils_equal,
    restrict_quadric,
    section_curve,
    section_germ,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    failures: int = 0
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)


def random_fraction(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-3, 3), rng.randint(1, 4))


def random_signature(rng: random.Random, n: int) -> tuple:
    return tuple(rng.choice((1, -1)) for _ in range(n))


def random_germ(rng: random.Random, n: int, order: int = 4,
                signature: tuple | None = None,
                cubic_override: dict | None = None) -> HypersurfaceGerm:
    if signature is None:
        signature = random_signature(rng, n)
    cubic = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                cubic[(i, j, k)] = random_fraction(rng)
    if cubic_override:
        cubic.update(cubic_override)
    quartic = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                for l in range(k, n):
                    quartic[(i, j, k, l)] = random_fraction(rng)
    return HypersurfaceGerm.from_tensors(signature, cubic, quartic, order, EXACT)


def random_float_surface_germ(rng: random.Random) -> HypersurfaceGerm:
    signature = (1, rng.choice((1, -1)))
    cubic = {idx: rng.uniform(-2.0, 2.0)
             for idx in ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1))}
    quartic = {idx: rng.uniform(-2.0, 2.0)
               for idx in ((0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 1))}
    return HypersurfaceGerm.from_tensors(signature, cubic, quartic, 4, FLOAT)


def _fail(result: SuiteResult, germ: HypersurfaceGerm | None, **info) -> None:
    result.failures += 1
    result.passed = False
    if result.counterexample is None:
        payload = dict(info)
        if germ is not None:
            payload["germ"] = germ_to_document(germ)
        result.counterexample = payload


def _dims(i: int, choices=(2, 3, 4)) -> int:
    return choices[i % len(choices)]


# -- suites -------------------------------------------------------------------


def suite_pencil_equality(seed: int = 0, count: int = 500) -> SuiteResult:
    """Constructive pencil equals the closed-form pencil, member for member,
    and the constructive height^2 constant equals the distinguished
    parameter."""
    rng = random.Random(seed)
    result = SuiteResult("pencil-equality", True, count)
    for i in range(count):
        germ = random_germ(rng, _dims(i))
        try:
            closed = moutard_pencil(germ)
            constructive = pencil_constructive(germ)
        except InternalCheckError as exc:
            _fail(result, germ, error=str(exc))
            continue
        if not pencils_equal(closed, constructive):
            _fail(result, germ, closed_beta=str(closed.distinguished_beta),
                  constructive_beta=str(constructive.distinguished_beta))
    return result


def suite_contact_orders(seed: int = 0, count: int = 200) -> SuiteResult:
    """Planar sections meet generic pencil members to order exactly three
    and the distinguished member to order at least four."""
    rng = random.Random(seed)
    result = SuiteResult("contact-orders", True, count)
    for i in range(count):
        n = _dims(i)
        germ = random_germ(rng, n)
        pencil = moutard_pencil(germ)
        beta0 = pencil.distinguished_beta
        for _ in range(5):
            lam = [random_fraction(rng) for _ in range(n - 1)]
            gamma = section_curve(germ, lam).graph
            spec = SectionSpec(tuple(range(1, n)), tuple(lam))
            for _ in range(5):
                delta = random_fraction(rng)
                if delta == 0:
                    delta = Fraction(1, 2)
                eta = restrict_quadric(pencil.member(beta0 + delta), spec).graph(germ.order)
                order = planar_contact_order(gamma, eta)
                if order != 3:
                    _fail(result, germ, lam=[str(v) for v in lam],
                          beta=str(beta0 + delta), contact=order)
            eta = restrict_quadric(pencil.member(beta0), spec).graph(germ.order)
            order = planar_contact_order(gamma, eta)
            if order < 4:
                _fail(result, germ, lam=[str(v) for v in lam],
                      beta=str(beta0), contact=order)
    return result


def suite_contact_coefficients(seed: int = 0, count: int = 500) -> SuiteResult:
    """Extracted contact coefficients agree with the closed expressions;
    the pure quartic coefficient vanishes exactly at the distinguished
    parameter."""
    rng = random.Random(seed)
    result = SuiteResult("contact-coefficients", True, count)
    for i in range(count):
        n = 2 + i % 4
        germ = random_germ(rng, n)
        pencil = moutard_pencil(germ)
        beta0 = pencil.distinguished_beta
        try:
            at_beta0 = b_coefficients(contact_function(germ, pencil.member(beta0)))
            delta = random_fraction(rng) + Fraction(1, 5)
            shifted = b_coefficients(contact_function(germ, pencil.member(beta0 + delta)))
        except InternalCheckError as exc:
            _fail(result, germ, error=str(exc))
            continue
        if not scalar_is_zero(at_beta0["b111"]) or \
                any(not scalar_is_zero(v) for v in at_beta0["b11"].values()):
            _fail(result, germ, reason="low-order coefficients not zero")
            continue
        if not scalar_is_zero(at_beta0["b1111"]):
            _fail(result, germ, reason="quartic coefficient nonzero at the distinguished parameter")
            continue
        if shifted["b1111"] != delta / 4:
            _fail(result, germ, reason="quartic coefficient is not (beta - beta0)/4",
                  got=str(shifted["b1111"]), want=str(delta / 4))
    return result


def suite_cubic_routes(seed: int = 0, count: int = 500) -> SuiteResult:
    """Normal-construction route equals the closed-form route; the surface
    case also satisfies the classical coefficient identities."""
    rng = random.Random(seed)
    result = SuiteResult("cubic-routes", True, count)
    for i in range(count):
        n = 2 + i % 4
        signature = None
        if n == 2:
            signature = (1, rng.choice((1, -1)))
        germ = random_germ(rng, n, signature=signature)
        try:
            by_construction = cubic_tensor_appendix(germ)
        except InternalCheckError as exc:
            _fail(result, germ, error=str(exc))
            continue
        by_formula = cubic_tensor_closed(germ)
        if not by_construction.same_entries(by_formula):
            _fail(result, germ, reason="cubic-form routes disagree")
            continue
        if n == 2:
            eps2 = germ.signature[1]
            k111 = germ.cubic_coefficient(0, 0, 0)
            k122 = germ.cubic_coefficient(0, 1, 1)
            expected = Fraction(1, 2) * k111 - Fraction(3, 2) * eps2 * k122
            if by_formula.value(0, 0, 0) != expected:
                _fail(result, germ, reason="surface diagonal entry mismatch")
                continue
            jet = contact_function(germ, moutard_pencil(germ).member(0), order=3)
            b122 = jet.b1_diag(1)
            if by_formula.value(0, 0, 0) != Fraction(3, 2) * eps2 * b122:
                _fail(result, germ, reason="C111 != (3 eps / 2) b122")
    return result


def suite_apolarity(seed: int = 0, count: int = 500) -> SuiteResult:
    """Apolarity residual vanishes exactly for both cubic-form routes."""
    rng = random.Random(seed)
    result = SuiteResult("apolarity", True, count)
    for i in range(count):
        n = 2 + i % 4
        germ = random_germ(rng, n)
        for route in (cubic_tensor_appendix, cubic_tensor_closed):
            residual = apolarity_residual(route(germ), germ.signature)
            if any(not scalar_is_zero(r) for r in residual):
                _fail(result, germ, route=route.__name__,
                      residual=[str(r) for r in residual])
    return result


def _impose_b_side(rng: random.Random, n: int) -> HypersurfaceGerm:
    """Random germ whose diagonal q coefficients vanish by construction."""
    signature = random_signature(rng, n)
    k111 = random_fraction(rng)
    override = {(0, 0, 0): k111}
    for s in range(1, n):
        override[(0, s, s)] = Fraction(signature[0] * signature[s], 3) * k111
    return random_germ(rng, n, signature=signature, cubic_override=override)


def _impose_c_side(rng: random.Random, n: int) -> HypersurfaceGerm:
    """Random germ whose cubic-form diagonal slice vanishes, obtained by
    solving the linear system for the K_1ss entries."""
    signature = random_signature(rng, n)
    base = random_germ(rng, n, signature=signature)
    eps = signature
    k111 = base.cubic_coefficient(0, 0, 0)
    m = n - 1
    rows = []
    rhs = []
    for s in range(1, n):
        row = []
        for t in range(1, n):
            if t == s:
                row.append(Fraction(2 * (n + 1), n + 2))
            else:
                row.append(-Fraction(2, n + 2) * eps[s] * eps[t])
        rows.append(row)
        rhs.append(Fraction(2, n + 2) * eps[0] * eps[s] * k111)
    solution = linalg.solve_linear(rows, rhs, EXACT)
    override = {(0, s, s): solution[s - 1] for s in range(1, n)}
    override[(0, 0, 0)] = k111
    return random_germ(rng, n, signature=signature, cubic_override=override)


def suite_lemma42(seed: int = 0, count: int = 1000) -> SuiteResult:
    """Equivalence of the two diagonal linear systems, both directions:
    imposing either side forces the other, exactly."""
    rng = random.Random(seed)
    result = SuiteResult("lemma42", True, count * 4)
    for n in (2, 3, 4, 5):
        for _ in range(count):
            germ = _impose_b_side(rng, n)
            tensor = cubic_tensor_closed(germ)
            bad = [(s, str(tensor.value(0, s, s))) for s in range(0, n)
                   if not scalar_is_zero(tensor.value(0, s, s))]
            if bad:
                _fail(result, germ, direction="b->C", nonzero=bad)
                continue
            germ = _impose_c_side(rng, n)
            tensor = cubic_tensor_closed(germ)
            bad = [(s, str(tensor.value(0, s, s))) for s in range(0, n)
                   if not scalar_is_zero(tensor.value(0, s, s))]
            if bad:
                _fail(result, germ, direction="C-imposed", nonzero=bad)
                continue
            jet = contact_function(germ, moutard_pencil(germ).member(0), order=3)
            bad_b = [s for s in range(1, n) if not scalar_is_zero(jet.b1_diag(s))]
            if bad_b:
                _fail(result, germ, direction="C->b", nonzero=bad_b)
    return result


def suite_prop44(seed: int = 0, count: int = 10000) -> SuiteResult:
    """Agreement of the contact-side and cubic-side Darboux verdicts on
    unconstrained random germs, plus germs constructed to satisfy the
    system."""
    rng = random.Random(seed)
    result = SuiteResult("prop44", True, count)
    darboux_hits = 0
    for i in range(count):
        n = 2 + i % 4
        if i % 8 == 0:
            override = {(0, 0, 0): random_fraction(rng)}
            signature = random_signature(rng, n)
            for s in range(1, n):
                override[(0, s, s)] = Fraction(signature[0] * signature[s], 3) * override[(0, 0, 0)]
                for t in range(s + 1, n):
                    override[(0, s, t)] = Fraction(0)
            germ = random_germ(rng, n, signature=signature, cubic_override=override)
            expect_true = True
        else:
            germ = random_germ(rng, n)
            expect_true = None
        try:
            report = is_generalized_darboux(germ)
        except InternalCheckError as exc:
            _fail(result, germ, error=str(exc))
            continue
        if not report.agreement:
            _fail(result, germ, reason="verdicts disagree")
            continue
        if expect_true and not report.verdict_b:
            _fail(result, germ, reason="constructed Darboux germ not detected")
            continue
        if report.verdict_b:
            darboux_hits += 1
    result.details["darboux_hits"] = darboux_hits
    return result


def suite_sectional(seed: int = 0, count: int = 200) -> SuiteResult:
    """Slicing the distinguished hyperquadric equals the distinguished
    quadric of the sliced germ, exactly, for random slices."""
    rng = random.Random(seed)
    result = SuiteResult("sectional", True, count)
    for i in range(count):
        n = 3 + i % 2
        germ = random_germ(rng, n)
        cut_size = rng.randint(1, n - 1)
        indices = tuple(sorted(rng.sample(range(1, n), cut_size)))
        values = tuple(random_fraction(rng) for _ in indices)
        spec = SectionSpec(indices, values)
        outer = moutard_pencil(germ).distinguished_member()
        restricted = restrict_quadric(outer, spec).normalized()
        inner_germ = section_germ(germ, spec)
        intrinsic = moutard_pencil(inner_germ).distinguished_member().normalized()
        if restricted.poly != intrinsic.poly:
            _fail(result, germ, indices=list(indices),
                  values=[str(v) for v in values])
    return result


def suite_surface_reduction(seed: int = 0, count: int = 50) -> SuiteResult:
    """Higher-order contact classification on a designed witness grid plus
    random samples: E6 iff the cube and pure quartic witnesses are nonzero,
    E7 iff the quartic vanishes (distinguished member) with nonzero mixed
    witness, degenerate otherwise; the reduction must leave only the three
    expected monomials."""
    rng = random.Random(seed)
    grid = []
    for eps2 in (1, -1):
        for k112, c in ((0, 0), (0, 1), (0, -2), (1, 0), (1, 2), (-2, -1)):
            for h1112 in (0, 2, -1):
                for h1111 in (0, 3):
                    for beta_kind in ("distinguished", "offset", "fixed"):
                        grid.append((eps2, k112, c, h1112, h1111, beta_kind))
    for _ in range(count):
        grid.append((
            rng.choice((1, -1)),
            random_fraction(rng),
            random_fraction(rng),
            random_fraction(rng),
            random_fraction(rng),
            rng.choice(("distinguished", "offset", "fixed")),
        ))
    result = SuiteResult("surface-reduction", True, len(grid))
    for eps2, k112, c, h1112, h1111, beta_kind in grid:
        k112 = Fraction(k112)
        c = Fraction(c)
        h1112 = Fraction(h1112)
        h1111 = Fraction(h1111)
        # Realize the cube witness: c = eps2 K112 - K222 / 3.
        k222 = 3 * (eps2 * k112 - c)
        germ = HypersurfaceGerm.from_tensors(
            (1, eps2),
            cubic={(0, 0, 1): k112, (1, 1, 1): k222},
            quartic={(0, 0, 0, 0): h1111, (0, 0, 0, 1): h1112,
                     (0, 0, 1, 1): random_fraction(rng),
                     (0, 1, 1, 1): random_fraction(rng),
                     (1, 1, 1, 1): random_fraction(rng)},
        )
        if beta_kind == "distinguished":
            beta = moutard_beta(germ)
        elif beta_kind == "offset":
            beta = moutard_beta(germ) + Fraction(1)
        else:
            beta = Fraction(-2)
        try:
            outcome = classify_contact_surface(germ, beta)
        except InternalCheckError as exc:
            _fail(result, germ, error=str(exc), beta=str(beta))
            continue
        quartic_defect = h1111 - 3 * beta
        if c == 0:
            expected = "degenerate"
        elif quartic_defect != 0:
            expected = "E6"
        elif h1112 != 0:
            expected = "E7"
        else:
            expected = "degenerate"
        if outcome.kind != expected:
            _fail(result, germ, got=outcome.kind, want=expected, beta=str(beta))
            continue
        if c != 0:
            allowed = {(0, 3), (3, 1), (4, 0)}
            if not set(outcome.residual_support) <= allowed:
                _fail(result, germ, reason="unexpected residual support",
                      support=[list(s) for s in outcome.residual_support])
                continue
            if quartic_defect != 0 and h1112 != 0 and set(outcome.residual_support) != allowed:
                _fail(result, germ, reason="generic case missing a residual monomial",
                      support=[list(s) for s in outcome.residual_support])
    return result


def suite_surface_roots(seed: int = 0, count: int = 100) -> SuiteResult:
    """Every direction returned by the surface root search passes the
    aligned contact-coefficient check; the hand-checkable germ yields the
    known direction triple."""
    rng = random.Random(seed)
    result = SuiteResult("surface-roots", True, count + 1)
    for _ in range(count):
        germ = random_float_surface_germ(rng)
        found = darboux_directions_surface(germ)
        if found.all_directions:
            continue
        for record in found.directions:
            if record.b122 is None:
                continue  # metric-null root: no adapted frame to verify in
            if abs(record.b122) > 1e-9:
                _fail(result, germ, direction=list(record.direction),
                      b122=record.b122)
    hand = HypersurfaceGerm.from_tensors((1, 1), cubic={(0, 0, 0): 1}).to_float()
    found = darboux_directions_surface(hand)
    got = sorted(r.direction for r in found.directions)
    root3 = 3.0 ** 0.5
    want = sorted([(0.0, 1.0), (root3 / 2.0, 0.5), (root3 / 2.0, -0.5)])
    if len(got) != 3 or any(abs(a - b) > 1e-10 for g, w in zip(got, want) for a, b in zip(g, w)):
        _fail(result, None, reason="hand-checkable directions mismatch",
              got=[list(g) for g in got])
    return result


def suite_scan_sanity(seed: int = 0, count: int = 0) -> SuiteResult:
    """Quadric graphs scan as Darboux everywhere; on a cubic-perturbed
    graph the passing cell fraction is monotone in the threshold."""
    result = SuiteResult("scan-sanity", True, 3)
    half = 0.5
    para2 = TruncatedPolynomial.from_terms(
        {(2, 0): half, (0, 2): half}, 2, 4, FLOAT)
    scan2 = darboux_locus_scan(para2, GridSpec((-1.0, -1.0), (1.0, 1.0), (5, 5)),
                               threshold=1e-9, seed=seed)
    if any(e.status != "ok" or not e.verdict or e.q_norm > 1e-9 for e in scan2.entries):
        _fail(result, None, reason="surface quadric scan not Darboux everywhere")
    para3 = TruncatedPolynomial.from_terms(
        {(2, 0, 0): half, (0, 2, 0): half, (0, 0, 2): half}, 3, 4, FLOAT)
    scan3 = darboux_locus_scan(para3, GridSpec((-1.0,) * 3, (1.0,) * 3, (3, 3, 3)),
                               direction_count=32, threshold=1e-9, seed=seed)
    if any(e.status != "ok" or not e.verdict or e.q_norm > 1e-9 for e in scan3.entries):
        _fail(result, None, reason="hypersurface quadric scan not Darboux everywhere")
    perturbed = TruncatedPolynomial.from_terms(
        {(2, 0, 0): half, (0, 2, 0): half, (0, 0, 2): half,
         (3, 0, 0): 0.3, (1, 1, 1): 0.2, (0, 3, 0): -0.15, (0, 1, 2): 0.1},
        3, 4, FLOAT)
    scan = darboux_locus_scan(perturbed, GridSpec((-0.5,) * 3, (0.5,) * 3, (3, 3, 3)),
                              direction_count=48, threshold=1e-9, seed=seed)
    fractions = [scan.cell_pass_fraction(t) for t in (1e-3, 1e-6, 1e-9)]
    if not (fractions[0] >= fractions[1] >= fractions[2]):
        _fail(result, None, reason="cell pass fraction not monotone", fractions=fractions)
    result.details["fractions"] = fractions
    return result


SUITES = {
    "pencil-equality": suite_pencil_equality,
    "contact-orders": suite_contact_orders,
    "contact-coefficients": suite_contact_coefficients,
    "cubic-routes": suite_cubic_routes,
    "apolarity": suite_apolarity,
    "lemma42": suite_lemma42,
    "prop44": suite_prop44,
    "sectional": suite_sectional,
    "surface-reduction": suite_surface_reduction,
    "surface-roots": suite_surface_roots,
    "scan-sanity": suite_scan_sanity,
}


def run_suite(name: str, seed: int = 0, count: int | None = None) -> SuiteResult:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    if count is None:
        return SUITES[name](seed=seed)
    return SUITES[name](seed=seed, count=count)
