"""Truncated multivariate polynomial arithmetic on two scalar backends.

A :class:`TruncatedPolynomial` is a finite map from exponent multi-indices
to coefficients, with every stored total degree bounded by ``max_order``
(inclusive).  Storage is sparse and canonical: a zero coefficient is never
stored, so two polynomials are equal exactly when their coefficient maps
are equal.

Coefficients live on one of two backends and are never mixed inside a
single computation:

* ``"exact"`` -- ``fractions.Fraction`` (always reduced, positive
  denominator), used for all identity verification;
* ``"float"`` -- IEEE doubles, used for root finding and grid scans.

All operations are pure functions; instances are treated as immutable and
are safe to share across threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .errors import ExactBackendError, ImplicitSolveError, InternalCheckError, JetError

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

MultiIndex = tuple[int, ...]
ScalarValue = Union[Fraction, float]


def make_scalar(value, backend: str) -> ScalarValue:
    """Coerce ``value`` to the given backend.

    The exact backend accepts ints, Fractions and ``"p/q"`` strings; it
    refuses floats so that binary rounding never sneaks into an exact
    computation.
    """
    if backend == EXACT:
        if isinstance(value, float):
            raise JetError("refusing to coerce a float onto the exact backend")
        return Fraction(value)
    if backend == FLOAT:
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)
    raise JetError(f"unknown backend {value!r}: expected 'exact' or 'float'")


def zero_scalar(backend: str) -> ScalarValue:
    return Fraction(0) if backend == EXACT else 0.0


def one_scalar(backend: str) -> ScalarValue:
    return Fraction(1) if backend == EXACT else 1.0


def scalar_is_zero(value: ScalarValue) -> bool:
    return value == 0


def exact_sqrt(value: Fraction) -> Fraction:
    """Square root of a non-negative rational that is a perfect square."""
    if value < 0:
        raise ExactBackendError(f"square root of negative rational {value}")
    num = math.isqrt(value.numerator)
    den = math.isqrt(value.denominator)
    if num * num != value.numerator or den * den != value.denominator:
        raise ExactBackendError(
            f"{value} is not the square of a rational; use the float backend"
        )
    return Fraction(num, den)


def scalar_sqrt(value: ScalarValue, backend: str) -> ScalarValue:
    if backend == EXACT:
        return exact_sqrt(value)
    return math.sqrt(value)


def multinomial(idx: MultiIndex) -> int:
    """Number of distinct orderings of a monomial's variables."""
    out = math.factorial(sum(idx))
    for e in idx:
        out //= math.factorial(e)
    return out


def monomials_of_degree(n_vars: int, degree: int) -> Iterable[MultiIndex]:
    """All multi-indices of the given total degree, lexicographic order."""
    if n_vars == 1:
        yield (degree,)
        return
    for head in range(degree, -1, -1):
        for tail in monomials_of_degree(n_vars - 1, degree - head):
            yield (head,) + tail


class TruncatedPolynomial:
    """Multivariate polynomial modulo total degree ``max_order + 1``."""

    __slots__ = ("n_vars", "max_order", "backend", "coeffs")

    def __init__(self, n_vars: int, max_order: int, coeffs: Mapping[MultiIndex, ScalarValue] | None = None,
                 backend: str = EXACT):
        if n_vars < 1:
            raise JetError(f"n_vars must be positive, got {n_vars}")
        if max_order < 0:
            raise JetError(f"max_order must be non-negative, got {max_order}")
        if backend not in BACKENDS:
            raise JetError(f"unknown backend {backend!r}")
        clean: dict[MultiIndex, ScalarValue] = {}
        if coeffs:
            for idx, value in coeffs.items():
                idx = tuple(idx)
                if len(idx) != n_vars or any(e < 0 for e in idx):
                    raise JetError(f"bad multi-index {idx} for {n_vars} variables")
                if sum(idx) > max_order:
                    continue
                if not scalar_is_zero(value):
                    clean[idx] = value
        object.__setattr__(self, "n_vars", n_vars)
        object.__setattr__(self, "max_order", max_order)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TruncatedPolynomial is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int, max_order: int, backend: str = EXACT) -> "TruncatedPolynomial":
        return cls(n_vars, max_order, {}, backend)

    @classmethod
    def constant(cls, value, n_vars: int, max_order: int, backend: str = EXACT) -> "TruncatedPolynomial":
        return cls(n_vars, max_order, {(0,) * n_vars: make_scalar(value, backend)}, backend)

    @classmethod
    def variable(cls, var: int, n_vars: int, max_order: int, backend: str = EXACT) -> "TruncatedPolynomial":
        if not 0 <= var < n_vars:
            raise JetError(f"variable index {var} out of range for {n_vars} variables")
        idx = tuple(1 if i == var else 0 for i in range(n_vars))
        return cls(n_vars, max_order, {idx: one_scalar(backend)}, backend)

    @classmethod
    def from_terms(cls, terms: Mapping, n_vars: int, max_order: int, backend: str = EXACT) -> "TruncatedPolynomial":
        """Build from a ``{multi-index: raw value}`` mapping, coercing values."""
        coeffs = {tuple(idx): make_scalar(v, backend) for idx, v in terms.items()}
        return cls(n_vars, max_order, coeffs, backend)

    # -- basic queries -----------------------------------------------------

    def coefficient(self, idx: Sequence[int]) -> ScalarValue:
        idx = tuple(idx)
        if len(idx) != self.n_vars:
            raise JetError(f"multi-index length {len(idx)} != n_vars {self.n_vars}")
        return self.coeffs.get(idx, zero_scalar(self.backend))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        """Largest stored total degree (0 for the zero polynomial)."""
        return max((sum(i) for i in self.coeffs), default=0)

    def jet_part(self, degree: int) -> "TruncatedPolynomial":
        """Homogeneous part of exactly the given total degree."""
        if not 0 <= degree <= self.max_order:
            raise JetError(f"degree {degree} outside [0, {self.max_order}]")
        kept = {i: c for i, c in self.coeffs.items() if sum(i) == degree}
        return TruncatedPolynomial(self.n_vars, self.max_order, kept, self.backend)

    def truncated(self, max_order: int) -> "TruncatedPolynomial":
        return TruncatedPolynomial(self.n_vars, max_order, self.coeffs, self.backend)

    def to_float(self) -> "TruncatedPolynomial":
        if self.backend == FLOAT:
            return self
        coeffs = {i: float(c) for i, c in self.coeffs.items()}
        return TruncatedPolynomial(self.n_vars, self.max_order, coeffs, FLOAT)

    def max_abs_coeff(self) -> ScalarValue:
        return max((abs(c) for c in self.coeffs.values()), default=zero_scalar(self.backend))

    # -- arithmetic --------------------------------------------------------

    def _require_compatible(self, other: "TruncatedPolynomial") -> None:
        if self.n_vars != other.n_vars:
            raise JetError(f"variable count mismatch: {self.n_vars} vs {other.n_vars}")
        if self.backend != other.backend:
            raise JetError(f"backend mismatch: {self.backend} vs {other.backend}")

    def __add__(self, other: "TruncatedPolynomial") -> "TruncatedPolynomial":
        self._require_compatible(other)
        order = min(self.max_order, other.max_order)
        out = dict(self.coeffs)
        for idx, value in other.coeffs.items():
            out[idx] = out.get(idx, zero_scalar(self.backend)) + value
        return TruncatedPolynomial(self.n_vars, order, out, self.backend)

    def __neg__(self) -> "TruncatedPolynomial":
        out = {i: -c for i, c in self.coeffs.items()}
        return TruncatedPolynomial(self.n_vars, self.max_order, out, self.backend)

    def __sub__(self, other: "TruncatedPolynomial") -> "TruncatedPolynomial":
        return self + (-other)

    def scaled(self, value) -> "TruncatedPolynomial":
        factor = make_scalar(value, self.backend)
        out = {i: factor * c for i, c in self.coeffs.items()}
        return TruncatedPolynomial(self.n_vars, self.max_order, out, self.backend)

    def __mul__(self, other):
        if not isinstance(other, TruncatedPolynomial):
            return self.scaled(other)
        self._require_compatible(other)
        order = min(self.max_order, other.max_order)
        out: dict[MultiIndex, ScalarValue] = {}
        zero = zero_scalar(self.backend)
        for ia, ca in self.coeffs.items():
            da = sum(ia)
            for ib, cb in other.coeffs.items():
                if da + sum(ib) > order:
                    continue
                idx = tuple(a + b for a, b in zip(ia, ib))
                out[idx] = out.get(idx, zero) + ca * cb
        return TruncatedPolynomial(self.n_vars, order, out, self.backend)

    def __rmul__(self, other):
        return self.scaled(other)

    def __pow__(self, exponent: int) -> "TruncatedPolynomial":
        if exponent < 0:
            raise JetError("negative powers are not defined for truncated polynomials")
        result = TruncatedPolynomial.constant(1, self.n_vars, self.max_order, self.backend)
        for _ in range(exponent):
            result = result * self
        return result

    def derivative(self, var: int) -> "TruncatedPolynomial":
        if not 0 <= var < self.n_vars:
            raise JetError(f"variable index {var} out of range")
        out: dict[MultiIndex, ScalarValue] = {}
        for idx, value in self.coeffs.items():
            e = idx[var]
            if e == 0:
                continue
            lowered = idx[:var] + (e - 1,) + idx[var + 1:]
            out[lowered] = value * e
        return TruncatedPolynomial(self.n_vars, max(self.max_order - 1, 0), out, self.backend)

    def compose(self, subs: Sequence["TruncatedPolynomial"], allow_constant: bool = False) -> "TruncatedPolynomial":
        """Evaluate this polynomial at a tuple of polynomials.

        All ``subs`` must share a common variable count, backend and order;
        the result is truncated at the smallest order among them.  The host
        polynomial is read as exact data on its stored support.  Each
        substituted polynomial must have zero constant term unless
        ``allow_constant`` is set: a silent nonzero constant would break the
        degree accounting of the truncation.
        """
        if len(subs) != self.n_vars:
            raise JetError(f"expected {self.n_vars} substitutions, got {len(subs)}")
        if not subs:
            raise JetError("cannot compose with an empty substitution list")
        n_out = subs[0].n_vars
        order = min(s.max_order for s in subs)
        for s in subs:
            if s.n_vars != n_out:
                raise JetError("substituted polynomials disagree on variable count")
            if s.backend != self.backend:
                raise JetError("substituted polynomial backend differs from host polynomial")
            if not allow_constant and not scalar_is_zero(s.coefficient((0,) * n_out)):
                raise JetError("nonzero constant term in substitution (pass allow_constant=True)")
        one = TruncatedPolynomial.constant(1, n_out, order, self.backend)
        # Power cache per variable, grown on demand.
        powers: list[list[TruncatedPolynomial]] = [[one] for _ in range(self.n_vars)]
        result = TruncatedPolynomial.zero(n_out, order, self.backend)
        for idx in sorted(self.coeffs):
            term = one.scaled(self.coeffs[idx])
            for var, e in enumerate(idx):
                cache = powers[var]
                while len(cache) <= e:
                    cache.append(cache[-1] * subs[var].truncated(order))
                if e:
                    term = term * cache[e]
            result = result + term
        return result

    def evaluate(self, point: Sequence[ScalarValue]) -> ScalarValue:
        if len(point) != self.n_vars:
            raise JetError("evaluation point has wrong length")
        total = zero_scalar(self.backend)
        for idx, value in self.coeffs.items():
            term = value
            for x, e in zip(point, idx):
                for _ in range(e):
                    term = term * x
            total = total + term
        return total

    # -- comparison and display --------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedPolynomial):
            return NotImplemented
        return (self.n_vars == other.n_vars and self.backend == other.backend
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.n_vars, self.backend, frozenset(self.coeffs.items())))

    def coeff_distance(self, other: "TruncatedPolynomial") -> float:
        """Largest absolute coefficient difference; useful on floats."""
        self._require_compatible(other)
        keys = set(self.coeffs) | set(other.coeffs)
        zero = zero_scalar(self.backend)
        return max((abs(float(self.coeffs.get(k, zero)) - float(other.coeffs.get(k, zero)))
                    for k in keys), default=0.0)

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"TruncatedPolynomial({self.n_vars} vars, order {self.max_order}, {format_poly(self)})"


def format_poly(p: TruncatedPolynomial, names: Sequence[str] | None = None) -> str:
    if names is None:
        names = [f"x{i + 1}" for i in range(p.n_vars)]
    if not p.coeffs:
        return "0"
    parts = []
    for idx in sorted(p.coeffs, key=lambda i: (sum(i), i)):
        value = p.coeffs[idx]
        mono = "*".join(
            names[v] if e == 1 else f"{names[v]}^{e}"
            for v, e in enumerate(idx) if e
        )
        if not mono:
            parts.append(str(value))
        elif value == 1:
            parts.append(mono)
        elif value == -1:
            parts.append(f"-{mono}")
        else:
            parts.append(f"{value}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def implicit_graph_solve(g: TruncatedPolynomial, order: int) -> TruncatedPolynomial:
    """Solve ``g(x, y) = 0`` for ``y`` as a truncated series in ``x``.

    ``g`` lives in ``n + 1`` variables, the last one being the graph
    variable.  Requires ``g(0) = 0`` and a nonzero linear ``y`` coefficient
    at the origin.  The unique series ``f`` with ``f(0) = 0`` and
    ``g(x, f(x)) = 0 (mod order + 1)`` is found by a fixed-point iteration
    that gains at least one correct degree per step; on the exact backend
    the result is exact.
    """
    if g.n_vars < 2:
        raise JetError("implicit solve needs at least one independent variable")
    n = g.n_vars - 1
    if order < 1:
        raise JetError("solve order must be positive")
    if not scalar_is_zero(g.coefficient((0,) * g.n_vars)):
        raise ImplicitSolveError("graph equation has nonzero value at the origin")
    slope = g.coefficient((0,) * n + (1,))
    if scalar_is_zero(slope):
        raise ImplicitSolveError("graph variable has zero linear coefficient at the origin")
    xs = [TruncatedPolynomial.variable(i, n, order, g.backend) for i in range(n)]
    f = TruncatedPolynomial.zero(n, order, g.backend)
    residual = g.compose(xs + [f])
    for _ in range(order + 1):
        if residual.is_zero():
            break
        f = f - residual.scaled(Fraction(1) / slope if g.backend == EXACT else 1.0 / slope)
        residual = g.compose(xs + [f])
    if g.backend == EXACT:
        if not residual.is_zero():
            raise InternalCheckError("implicit solve failed to converge on the exact backend")
    else:
        scale = max(1.0, float(g.max_abs_coeff()))
        if float(residual.max_abs_coeff()) > 1e-9 * scale:
            raise InternalCheckError("implicit solve residual too large on the float backend")
    return f


def graph_contact_order(a: TruncatedPolynomial, b: TruncatedPolynomial, tol: float = 0.0) -> int:
    """Largest degree through which two one-variable graphs agree.

    Both graphs must pass through the origin with the same truncation order
    ``N``; a return value of ``N`` means "at least ``N``".
    """
    if a.n_vars != 1 or b.n_vars != 1:
        raise JetError("contact order is defined for one-variable graphs")
    a._require_compatible(b)
    if a.max_order != b.max_order:
        raise JetError("graphs must share a truncation order")
    for d in range(a.max_order + 1):
        ca, cb = a.coefficient((d,)), b.coefficient((d,))
        if tol > 0:
            if abs(float(ca) - float(cb)) > tol:
                return d - 1
        elif ca != cb:
            return d - 1
    return a.max_order
