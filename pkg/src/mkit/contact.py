"""Contact functions of a germ against quadrics, and the surface
higher-order contact classification.

The contact function of a quadric ``g = 0`` with the graph
``y = f(x)`` is ``phi(x) = g(x, f(x))``.  Against any member of the
distinguished pencil its 2-jet vanishes and its 3-jet splits as
``x_1 q(x) + p3(xbar)`` with ``q`` quadratic; the named Taylor
coefficients ``b_...`` of ``phi`` are extracted directly from the
composition and simultaneously recomputed from closed expressions in the
germ tensors, with exact agreement enforced.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InternalCheckError, JetError
from .germs import HypersurfaceGerm
from .jets import (
    EXACT,
    ScalarValue,
    TruncatedPolynomial,
    graph_contact_order,
    scalar_is_zero,
    zero_scalar,
)
from .moutard import Quadric, moutard_pencil

FLOAT_MATCH_TOL = 1e-9


class ContactJet:
    """Truncated contact function with named coefficient accessors."""

    __slots__ = ("phi", "germ", "beta")

    def __init__(self, phi: TruncatedPolynomial, germ: HypersurfaceGerm, beta: ScalarValue):
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "germ", germ)
        object.__setattr__(self, "beta", beta)

    def __setattr__(self, name, value):
        raise AttributeError("ContactJet is immutable")

    @property
    def n(self) -> int:
        return self.germ.n

    def low_jet_max(self) -> float:
        """Largest absolute coefficient of total degree two or less."""
        return max((abs(float(c)) for idx, c in self.phi.coeffs.items() if sum(idx) <= 2),
                   default=0.0)

    def two_jet_is_zero(self) -> bool:
        if self.phi.backend == EXACT:
            return all(sum(idx) > 2 for idx in self.phi.coeffs)
        return self.low_jet_max() <= FLOAT_MATCH_TOL

    # -- named Taylor coefficients (0-based variable indices) ---------------

    def _coeff(self, exponents: dict) -> ScalarValue:
        idx = [0] * self.n
        for var, e in exponents.items():
            idx[var] += e
        return self.phi.coefficient(tuple(idx))

    def b111(self) -> ScalarValue:
        return self._coeff({0: 3})

    def b11(self, s: int) -> ScalarValue:
        return self._coeff({0: 2, s: 1})

    def b1_diag(self, s: int) -> ScalarValue:
        """Coefficient of ``x_1 x_s^2`` for a tangent index ``s >= 1``."""
        return self._coeff({0: 1, s: 2})

    def b1_cross(self, s: int, t: int) -> ScalarValue:
        """Coefficient of ``x_1 x_s x_t`` for distinct tangent indices."""
        if s == t:
            raise JetError("cross coefficient needs distinct indices")
        return self._coeff({0: 1, s: 1, t: 1})

    def b1111(self) -> ScalarValue:
        return self._coeff({0: 4})

    def q_form(self) -> TruncatedPolynomial:
        """Quadratic form multiplying ``x_1`` in the 3-jet of ``phi``."""
        out = {}
        for idx, value in self.phi.jet_part(3).coeffs.items():
            if idx[0] >= 1:
                lowered = (idx[0] - 1,) + idx[1:]
                out[lowered] = value
        return TruncatedPolynomial(self.n, 2, out, self.phi.backend)

    def transverse_cubic(self) -> TruncatedPolynomial:
        """Part of the 3-jet free of the distinguished coordinate."""
        out = {idx: c for idx, c in self.phi.jet_part(3).coeffs.items() if idx[0] == 0}
        return TruncatedPolynomial(self.n, 3, out, self.phi.backend)


def contact_function(germ: HypersurfaceGerm, quadric: Quadric, order: int | None = None) -> ContactJet:
    """Compose a quadric equation with the germ graph.

    The quadric is rescaled to the ``-1`` height convention first, so the
    recorded pencil parameter is its height-squared coefficient.
    """
    if quadric.n_vars != germ.n + 1:
        raise JetError("quadric does not live in the germ's ambient space")
    if order is None:
        order = germ.order
    if order > germ.order:
        raise JetError("requested order exceeds the germ's truncation order")
    quadric = quadric.normalized()
    backend = germ.backend
    xs = [TruncatedPolynomial.variable(i, germ.n, order, backend) for i in range(germ.n)]
    phi = quadric.poly.compose(xs + [germ.f.truncated(order)])
    beta = quadric.poly.coefficient((0,) * germ.n + (2,))
    return ContactJet(phi, germ, beta)


def b_coefficients(jet: ContactJet) -> dict:
    """Named contact coefficients, extracted and cross-checked.

    Requires ``phi`` computed against a pencil member.  Extraction reads
    the Taylor coefficients of ``phi``; the closed expressions are

        b_111 = 0,     b_11s = 0,
        b_1ss = (eps_1 eps_s / 3) K_111 - K_1ss,
        b_1st = -2 K_1st,
        b_1111 = -H_1111/12 + (2/9) eps_1 K_111^2 + beta/4,

    and any disagreement raises :class:`InternalCheckError`.  The quartic
    entry is present only when ``phi`` holds degree four.
    """
    germ = jet.germ
    n = germ.n
    backend = germ.backend
    eps = germ.signature
    k111 = germ.cubic_coefficient(0, 0, 0)

    extracted: dict[str, object] = {
        "b111": jet.b111(),
        "b11": {s: jet.b11(s) for s in range(1, n)},
        "b1_diag": {s: jet.b1_diag(s) for s in range(1, n)},
        "b1_cross": {(s, t): jet.b1_cross(s, t)
                     for s in range(1, n) for t in range(s + 1, n)},
    }
    closed: dict[str, object] = {
        "b111": zero_scalar(backend),
        "b11": {s: zero_scalar(backend) for s in range(1, n)},
        "b1_diag": {}, "b1_cross": {},
    }
    third = Fraction(1, 3) if backend == EXACT else 1.0 / 3.0
    for s in range(1, n):
        closed["b1_diag"][s] = third * eps[0] * eps[s] * k111 - germ.cubic_coefficient(0, s, s)
    for s in range(1, n):
        for t in range(s + 1, n):
            closed["b1_cross"][(s, t)] = -2 * germ.cubic_coefficient(0, s, t)
    if jet.phi.max_order >= 4:
        extracted["b1111"] = jet.b1111()
        h1111 = germ.quartic_coefficient(0, 0, 0, 0)
        if backend == EXACT:
            closed["b1111"] = (-Fraction(1, 12) * h1111
                               + Fraction(2, 9) * eps[0] * k111 * k111
                               + Fraction(1, 4) * jet.beta)
        else:
            closed["b1111"] = -h1111 / 12.0 + 2.0 / 9.0 * eps[0] * k111 * k111 + jet.beta / 4.0

    _compare_named(extracted, closed, backend)
    return extracted


def _compare_named(extracted: dict, closed: dict, backend: str) -> None:
    def mismatch(a, b) -> bool:
        if backend == EXACT:
            return a != b
        scale = max(1.0, abs(float(a)), abs(float(b)))
        return abs(float(a) - float(b)) > FLOAT_MATCH_TOL * scale

    for key, want in closed.items():
        got = extracted[key]
        if isinstance(want, dict):
            for sub, value in want.items():
                if mismatch(got[sub], value):
                    raise InternalCheckError(
                        f"contact coefficient {key}[{sub}] mismatch: {got[sub]} vs {value}")
        elif mismatch(got, want):
            raise InternalCheckError(f"contact coefficient {key} mismatch: {got} vs {want}")


def planar_contact_order(a: TruncatedPolynomial, b: TruncatedPolynomial, tol: float = 0.0) -> int:
    """Largest degree through which two planar graphs agree (``N`` = at
    least ``N``)."""
    return graph_contact_order(a, b, tol)


@dataclass(frozen=True)
class ContactClass:
    """Outcome of the higher-order surface contact test.

    ``kind`` is ``"E6"``, ``"E7"`` or ``"degenerate"``; the witnesses are
    exact scalars: the perfect-cube coefficient ``c``, the reduced pure
    quartic coefficient on the distinguished axis, and the reduced mixed
    cubic-linear coefficient.
    """

    kind: str
    witnesses: dict
    reason: str | None = None
    residual_support: tuple = ()
    substitution: tuple = ()


def classify_contact_surface(germ: HypersurfaceGerm, beta) -> ContactClass:
    """Classify the degree-4 contact of a surface with a pencil member.

    Preconditions: ``n = 2``, first metric sign ``+1`` and vanishing
    ``K_111`` and ``K_122`` (the distinguished axis is then a direction of
    perfect-cube third-order contact for every pencil member).  A quadratic
    change of the transverse coordinate removes the three mixed quartic
    monomials; classification reads the surviving coefficients:

    * pure quartic on the axis nonzero  ->  E6;
    * pure quartic zero, mixed term nonzero  ->  E7 (the pencil parameter
      then necessarily sits at the distinguished member);
    * anything else is reported degenerate with the failing witness.
    """
    if germ.n != 2:
        raise JetError("contact classification is defined for surfaces only")
    if germ.signature[0] != 1:
        raise JetError("classification expects the first metric sign to be +1")
    backend = germ.backend
    tol = 0.0 if backend == EXACT else FLOAT_MATCH_TOL

    def is_zero(v) -> bool:
        return scalar_is_zero(v) if tol == 0.0 else abs(float(v)) <= tol

    if not is_zero(germ.cubic_coefficient(0, 0, 0)) or not is_zero(germ.cubic_coefficient(0, 1, 1)):
        raise JetError("germ is not in the perfect-cube gauge (K_111 = K_122 = 0 required)")

    member = moutard_pencil(germ).member(beta)
    jet = contact_function(germ, member, order=4)
    phi = jet.phi
    cube = phi.coefficient((0, 3))
    if is_zero(cube):
        return ContactClass("degenerate", {"c": cube}, reason="c=0")

    alpha = -phi.coefficient((2, 2)) / (3 * cube)
    bprime = -phi.coefficient((1, 3)) / (3 * cube)
    gamma = -phi.coefficient((0, 4)) / (3 * cube)
    u1 = TruncatedPolynomial.variable(0, 2, 4, backend)
    u2 = TruncatedPolynomial.variable(1, 2, 4, backend)
    shift = u2 + (u1 * u1).scaled(alpha) + (u1 * u2).scaled(bprime) + (u2 * u2).scaled(gamma)
    reduced = phi.compose([u1, shift])

    allowed = {(0, 3), (3, 1), (4, 0)}
    stray = {idx: c for idx, c in reduced.coeffs.items()
             if idx not in allowed and (tol == 0.0 or abs(float(c)) > tol)}
    if stray:
        raise InternalCheckError(f"reduction left unexpected monomials: {sorted(stray)}")
    support = tuple(sorted(idx for idx, c in reduced.coeffs.items()
                           if idx in allowed and not is_zero(c)))

    quartic_axis = reduced.coefficient((4, 0))
    mixed = reduced.coefficient((3, 1))
    if quartic_axis != phi.coefficient((4, 0)):
        if backend == EXACT or abs(float(quartic_axis) - float(phi.coefficient((4, 0)))) > tol:
            raise InternalCheckError("reduction moved the pure axis quartic coefficient")
    witnesses = {
        "c": cube,
        "quartic_axis": quartic_axis,
        "mixed_cubic": mixed,
    }
    substitution = (alpha, bprime, gamma)
    if not is_zero(quartic_axis):
        return ContactClass("E6", witnesses, residual_support=support,
                            substitution=substitution)
    if not is_zero(mixed):
        return ContactClass("E7", witnesses, residual_support=support,
                            substitution=substitution)
    return ContactClass("degenerate", witnesses,
                        reason="pure and mixed quartic witnesses both vanish",
                        residual_support=support, substitution=substitution)
