"""Osculating conics, quadric pencils and hyperquadric sections.

Conventions.  A quadric in ``m`` variables is stored as a degree-<=2
polynomial whose last variable is the graph ("height") coordinate; it is
defined up to scale and canonicalized so that the linear height coefficient
equals -1.  The distinguished pencil of hyperquadrics attached to a germ in
normal form is

    -y + (1/2) sum_s eps_s x_s^2 + (2/3) K_111 eps_1 x_1 y
       + 2 eps_1 sum_{s>=2} K_11s x_s y + beta y^2,

and the member with fourth-order sectional contact is singled out by
``beta = (3 H_1111 - 8 eps_1 K_111^2) / 9``.  Everything here is computed
twice where it matters: once by these closed expressions and once
constructively from osculating conics of planar sections, with exact
agreement enforced on the rational backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InternalCheckError, JetError
from .germs import HypersurfaceGerm
from .jets import (
    EXACT,
    ScalarValue,
    TruncatedPolynomial,
    graph_contact_order,
    implicit_graph_solve,
    make_scalar,
    one_scalar,
    scalar_is_zero,
    zero_scalar,
)

FLOAT_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class PlanarCurveJet:
    """Graph jet ``y = a2 x^2 + a3 x^3 + a4 x^4 + ...`` of a planar curve."""

    graph: TruncatedPolynomial

    def __post_init__(self):
        if self.graph.n_vars != 1:
            raise JetError("planar curve jets are one-variable graphs")

    @property
    def a2(self) -> ScalarValue:
        return self.graph.coefficient((2,))

    @property
    def a3(self) -> ScalarValue:
        return self.graph.coefficient((3,))

    @property
    def a4(self) -> ScalarValue:
        return self.graph.coefficient((4,))


class Quadric:
    """Degree-<=2 hypersurface, last variable playing the graph role."""

    __slots__ = ("poly",)

    def __init__(self, poly: TruncatedPolynomial):
        if poly.degree() > 2:
            raise JetError("quadric polynomial has degree above 2")
        if poly.max_order != 2:
            poly = poly.truncated(2)
        object.__setattr__(self, "poly", poly)

    def __setattr__(self, name, value):
        raise AttributeError("Quadric is immutable")

    @property
    def n_vars(self) -> int:
        return self.poly.n_vars

    @property
    def backend(self) -> str:
        return self.poly.backend

    def graph_coefficient(self) -> ScalarValue:
        idx = (0,) * (self.n_vars - 1) + (1,)
        return self.poly.coefficient(idx)

    def normalized(self) -> "Quadric":
        """Scale so the linear height coefficient equals -1."""
        c = self.graph_coefficient()
        if scalar_is_zero(c):
            raise JetError("quadric has no linear height term; cannot normalize scale")
        return Quadric(self.poly.scaled(-one_scalar(self.backend) / c))

    def matrix(self) -> list:
        """Symmetric matrix view in homogeneous coordinates (vars..., 1)."""
        m = self.n_vars
        size = m + 1
        half = Fraction(1, 2) if self.backend == EXACT else 0.5
        out = [[zero_scalar(self.backend) for _ in range(size)] for _ in range(size)]
        for idx, value in self.poly.coeffs.items():
            support = [i for i, e in enumerate(idx) if e]
            if not support:
                out[m][m] = out[m][m] + value
            elif sum(idx) == 1:
                i = support[0]
                out[i][m] = out[i][m] + half * value
                out[m][i] = out[m][i] + half * value
            elif len(support) == 1:
                i = support[0]
                out[i][i] = out[i][i] + value
            else:
                i, j = support
                out[i][j] = out[i][j] + half * value
                out[j][i] = out[j][i] + half * value
        return out

    @classmethod
    def from_matrix(cls, matrix: Sequence, backend: str = EXACT) -> "Quadric":
        size = len(matrix)
        m = size - 1
        terms: dict[tuple, ScalarValue] = {}

        def bump(idx, value):
            if not scalar_is_zero(value):
                terms[idx] = terms.get(idx, zero_scalar(backend)) + value

        for i in range(size):
            for j in range(size):
                value = make_scalar(matrix[i][j], backend)
                if scalar_is_zero(value):
                    continue
                if i == m and j == m:
                    bump((0,) * m, value)
                elif i == m or j == m:
                    var = j if i == m else i
                    idx = tuple(1 if t == var else 0 for t in range(m))
                    bump(idx, value)
                else:
                    idx = [0] * m
                    idx[i] += 1
                    idx[j] += 1
                    bump(tuple(idx), value)
        return cls(TruncatedPolynomial(m, 2, terms, backend))

    def graph(self, order: int) -> TruncatedPolynomial:
        """Express the quadric as a height graph ``y = f(x)``, truncated."""
        return implicit_graph_solve(self.poly.truncated(order), order)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Quadric):
            return NotImplemented
        return self.poly == other.poly

    def __repr__(self) -> str:
        return f"Quadric({self.poly})"


@dataclass(frozen=True)
class QuadricPencil:
    """One-parameter family: fixed quadric plus ``beta`` times height^2.

    ``distinguished_beta`` records, when known, the parameter of the member
    with fourth-order sectional contact.
    """

    base: Quadric
    distinguished_beta: ScalarValue | None = None

    @property
    def n_vars(self) -> int:
        return self.base.n_vars

    def member(self, beta) -> Quadric:
        poly = self.base.poly
        beta = make_scalar(beta, poly.backend)
        idx = (0,) * (poly.n_vars - 1) + (2,)
        bump = TruncatedPolynomial(poly.n_vars, 2, {idx: beta}, poly.backend)
        return Quadric(poly + bump)

    def distinguished_member(self) -> Quadric:
        if self.distinguished_beta is None:
            raise JetError("pencil does not carry a distinguished parameter")
        return self.member(self.distinguished_beta)


@dataclass(frozen=True)
class SectionSpec:
    """Slice ``x_i = value_i * y`` for each listed tangent index (0-based).

    Index 0 (the distinguished axis) can never be sectioned away.
    """

    indices: tuple
    values: tuple

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise JetError("section indices and values differ in length")
        if len(set(self.indices)) != len(self.indices):
            raise JetError("section indices must be distinct")
        if any(i < 1 for i in self.indices):
            raise JetError("section indices must avoid the distinguished axis")

    def value_for(self, index: int):
        return dict(zip(self.indices, self.values)).get(index)


def section_curve(germ: HypersurfaceGerm, lam: Sequence) -> PlanarCurveJet:
    """Planar section of the germ through the distinguished axis.

    The slicing plane is ``x_s = lam[s-1] * y`` for every tangent index
    ``s >= 1``; the section projects to a graph over the first coordinate,
    recovered here by an implicit series solve.  The low-order coefficients
    are cross-checked against their closed expressions

        a2 = eps_1 / 2,   a3 = K_111 / 3,
        a4 = H_1111/12 + (eps_1/2) sum K_11s lam_s + (1/8) sum eps_s lam_s^2,

    and any disagreement raises :class:`InternalCheckError`.
    """
    n = germ.n
    if len(lam) != n - 1:
        raise JetError(f"expected {n - 1} section parameters, got {len(lam)}")
    backend = germ.backend
    lam = [make_scalar(v, backend) for v in lam]
    order = germ.order
    y = TruncatedPolynomial.variable(1, 2, order, backend)
    x1 = TruncatedPolynomial.variable(0, 2, order, backend)
    subs = [x1] + [y.scaled(v) for v in lam]
    g = germ.f.compose(subs) - y
    curve = implicit_graph_solve(g, order)

    eps = germ.signature
    half = Fraction(1, 2) if backend == EXACT else 0.5
    a2_closed = half * eps[0]
    a3_closed = germ.cubic_coefficient(0, 0, 0) / 3
    a4_closed = germ.quartic_coefficient(0, 0, 0, 0) / 12
    for s in range(1, n):
        a4_closed = a4_closed + half * eps[0] * germ.cubic_coefficient(0, 0, s) * lam[s - 1]
        a4_closed = a4_closed + eps[s] * lam[s - 1] * lam[s - 1] / 8
    got = (curve.coefficient((2,)), curve.coefficient((3,)), curve.coefficient((4,)))
    want = (a2_closed, a3_closed, a4_closed)
    if backend == EXACT:
        if got != want:
            raise InternalCheckError(
                f"section coefficients disagree with closed form: {got} vs {want}")
    else:
        scale = max(1.0, *(abs(float(w)) for w in want))
        if any(abs(float(g_) - float(w)) > FLOAT_MATCH_TOL * scale for g_, w in zip(got, want)):
            raise InternalCheckError("section coefficients disagree with closed form")
    return PlanarCurveJet(curve)


def osculating_conic(curve: PlanarCurveJet) -> Quadric:
    """Conic with fourth-order contact with a planar curve at the origin.

    For ``y = a2 x^2 + a3 x^3 + a4 x^4 + O(5)`` with ``a2 != 0`` the conic
    is ``y = a2 x^2 + (a3/a2) x y + ((a2 a4 - a3^2)/a2^3) y^2``; the claimed
    contact order is re-verified by solving the conic back into a graph.
    """
    a2, a3, a4 = curve.a2, curve.a3, curve.a4
    if scalar_is_zero(a2):
        raise JetError("curve has an inflection at the origin; no osculating conic")
    backend = curve.graph.backend
    coeff_xy = a3 / a2
    coeff_yy = (a2 * a4 - a3 * a3) / (a2 * a2 * a2)
    terms = {
        (0, 1): -one_scalar(backend),
        (2, 0): a2,
        (1, 1): coeff_xy,
        (0, 2): coeff_yy,
    }
    conic = Quadric(TruncatedPolynomial(2, 2, terms, backend))
    order = curve.graph.max_order
    regraph = conic.graph(order)
    tol = 0.0 if backend == EXACT else FLOAT_MATCH_TOL * max(1.0, float(curve.graph.max_abs_coeff()))
    contact = graph_contact_order(regraph.truncated(min(order, 4)),
                                  curve.graph.truncated(min(order, 4)), tol)
    if contact < 4:
        raise InternalCheckError("osculating conic misses fourth-order contact")
    return conic


def moutard_beta(germ: HypersurfaceGerm) -> ScalarValue:
    """Pencil parameter of the member with fourth-order sectional contact."""
    k111 = germ.cubic_coefficient(0, 0, 0)
    h1111 = germ.quartic_coefficient(0, 0, 0, 0)
    eps1 = germ.signature[0]
    if germ.backend == EXACT:
        return Fraction(1, 9) * (3 * h1111 - 8 * eps1 * k111 * k111)
    return (3.0 * h1111 - 8.0 * eps1 * k111 * k111) / 9.0


def moutard_pencil(germ: HypersurfaceGerm) -> QuadricPencil:
    """Closed-form pencil of hyperquadrics through the distinguished axis."""
    n = germ.n
    backend = germ.backend
    eps = germ.signature
    half = Fraction(1, 2) if backend == EXACT else 0.5
    third2 = Fraction(2, 3) if backend == EXACT else 2.0 / 3.0
    terms: dict[tuple, ScalarValue] = {}
    y_idx = (0,) * n + (1,)
    terms[y_idx] = -one_scalar(backend)
    for s in range(n):
        idx = tuple(2 if i == s else 0 for i in range(n)) + (0,)
        terms[idx] = half * eps[s]
    k111 = germ.cubic_coefficient(0, 0, 0)
    if not scalar_is_zero(k111):
        idx = (1,) + (0,) * (n - 1) + (1,)
        terms[idx] = third2 * k111 * eps[0]
    for s in range(1, n):
        k11s = germ.cubic_coefficient(0, 0, s)
        if not scalar_is_zero(k11s):
            idx = tuple(1 if i == s else 0 for i in range(n)) + (1,)
            terms[idx] = 2 * eps[0] * k11s
    base = Quadric(TruncatedPolynomial(n + 1, 2, terms, backend))
    return QuadricPencil(base, distinguished_beta=moutard_beta(germ))


def pencil_constructive(germ: HypersurfaceGerm) -> QuadricPencil:
    """Rebuild the pencil from osculating conics of planar sections.

    For finitely many section parameters the osculating conic is computed
    from the solved section graph alone; the conic's height^2 coefficient
    is interpolated as a quadratic polynomial in the section parameters
    (its structural degree), checked on extra samples, and the parameters
    are then eliminated through ``lam_s = x_s / y``.  The result must match
    :func:`moutard_pencil` coefficient for coefficient; the interpolation
    constant term is the constructive distinguished parameter.
    """
    n = germ.n
    backend = germ.backend
    zero = zero_scalar(backend)
    one = one_scalar(backend)

    def conic_parts(lam):
        conic = osculating_conic(section_curve(germ, lam)).normalized().poly
        return (conic.coefficient((2, 0)), conic.coefficient((1, 1)),
                conic.coefficient((0, 2)))

    def basis_lam(weights: dict):
        return [make_scalar(weights.get(s, 0), backend) for s in range(1, n)]

    a_ref, b_ref, c0 = conic_parts(basis_lam({}))
    linear = {}
    diag = {}
    cross = {}
    samples_for_check = []
    for s in range(1, n):
        a1, b1, c1 = conic_parts(basis_lam({s: 1}))
        a2_, b2_, c2 = conic_parts(basis_lam({s: 2}))
        for a_, b_ in ((a1, b1), (a2_, b2_)):
            if not _scalars_match(backend, (a_, b_), (a_ref, b_ref)):
                raise InternalCheckError("conic x^2 or xy coefficient depends on the section")
        diag[s] = (c2 - 2 * c1 + c0) / 2
        linear[s] = c1 - c0 - diag[s]
        samples_for_check.append(({s: 3}, c0 + 3 * linear[s] + 9 * diag[s]))
    for s in range(1, n):
        for t in range(s + 1, n):
            _, _, c11 = conic_parts(basis_lam({s: 1, t: 1}))
            cross[(s, t)] = c11 - c0 - linear[s] - linear[t] - diag[s] - diag[t]
    if n > 1:
        mixed = {s: s for s in range(1, n)}
        predicted = c0
        for s in range(1, n):
            predicted = predicted + linear[s] * make_scalar(s, backend) \
                + diag[s] * make_scalar(s * s, backend)
        for (s, t), value in cross.items():
            predicted = predicted + value * make_scalar(s * t, backend)
        samples_for_check.append((mixed, predicted))
    for weights, predicted in samples_for_check:
        _, _, actual = conic_parts(basis_lam(weights))
        if not _scalars_match(backend, (actual,), (predicted,)):
            raise InternalCheckError("conic height^2 coefficient is not quadratic in the section")

    terms: dict[tuple, ScalarValue] = {(0,) * n + (1,): -one}
    terms[(2,) + (0,) * n] = a_ref
    if not scalar_is_zero(b_ref):
        terms[(1,) + (0,) * (n - 1) + (1,)] = b_ref
    for s in range(1, n):
        if not scalar_is_zero(diag[s]):
            terms[tuple(2 if i == s else 0 for i in range(n)) + (0,)] = diag[s]
        if not scalar_is_zero(linear[s]):
            terms[tuple(1 if i == s else 0 for i in range(n)) + (1,)] = linear[s]
    for (s, t), value in cross.items():
        if not scalar_is_zero(value):
            idx = [0] * (n + 1)
            idx[s] = 1
            idx[t] = 1
            terms[tuple(idx)] = value
    base = Quadric(TruncatedPolynomial(n + 1, 2, terms, backend))
    return QuadricPencil(base, distinguished_beta=c0)


def _scalars_match(backend: str, got, want) -> bool:
    if backend == EXACT:
        return tuple(got) == tuple(want)
    scale = max(1.0, *(abs(float(w)) for w in want))
    return all(abs(float(g) - float(w)) <= FLOAT_MATCH_TOL * scale for g, w in zip(got, want))


def pencils_equal(a: QuadricPencil, b: QuadricPencil) -> bool:
    """Exact member-for-member equality, including distinguished parameters."""
    if a.base.normalized().poly != b.base.normalized().poly:
        return False
    return a.distinguished_beta == b.distinguished_beta


def restrict_quadric(quadric: Quadric, section: SectionSpec) -> Quadric:
    """Substitute ``x_i = value_i * y`` and drop the sectioned variables."""
    m = quadric.n_vars
    n = m - 1
    backend = quadric.backend
    chosen = set(section.indices)
    if any(i >= n for i in chosen):
        raise JetError("section index outside the tangent variable range")
    kept = [i for i in range(n) if i not in chosen]
    out_vars = len(kept) + 1
    y_out = TruncatedPolynomial.variable(out_vars - 1, out_vars, 2, backend)
    subs = []
    for i in range(n):
        if i in chosen:
            subs.append(y_out.scaled(make_scalar(section.value_for(i), backend)))
        else:
            subs.append(TruncatedPolynomial.variable(kept.index(i), out_vars, 2, backend))
    subs.append(y_out)
    return Quadric(quadric.poly.compose(subs))


def section_germ(germ: HypersurfaceGerm, section: SectionSpec) -> HypersurfaceGerm:
    """Germ of the sliced hypersurface inside the section subspace.

    The slice keeps the distinguished axis; the sliced graph is recovered by
    an implicit solve and is again in normal form (the sectioned directions
    only feed degrees three and up).
    """
    n = germ.n
    chosen = set(section.indices)
    if any(i >= n for i in chosen):
        raise JetError("section index outside the tangent variable range")
    kept = [i for i in range(n) if i not in chosen]
    m = len(kept)
    if m == 0:
        raise JetError("section removes every tangent direction")
    backend = germ.backend
    order = germ.order
    y = TruncatedPolynomial.variable(m, m + 1, order, backend)
    subs = []
    for i in range(n):
        if i in chosen:
            subs.append(y.scaled(make_scalar(section.value_for(i), backend)))
        else:
            subs.append(TruncatedPolynomial.variable(kept.index(i), m + 1, order, backend))
    g = germ.f.compose(subs) - y
    sliced = implicit_graph_solve(g, order)
    signature = tuple(germ.signature[i] for i in kept)
    return HypersurfaceGerm(m, order, sliced, signature)
