"""The affine cubic form at the origin, computed along two independent
routes.

Route one follows the construction of the equiaffine normal: the scale
function ``phi`` satisfies ``phi^(n+2) = |det D^2 f|``, so its truncated
series is available exactly through a rational binomial expansion of the
Hessian determinant.  The normal's tangential components ``Z`` solve
``D^2 f(0) Z = -grad phi(0)``; the cubic form is then assembled literally
from the derivative of the metric ``h = (1/phi) D^2 f`` and the induced
connection terms at the origin.

Route two evaluates closed formulas in the degree-3 tensor ``K``:

    C_sss = 2(n-1)/(n+2) K_sss - 6/(n+2) sum_{t != s} eps_s eps_t K_stt
    C_stt = 2(n+1)/(n+2) K_stt - 2 eps_s eps_t/(n+2) K_sss
            - 2 eps_t/(n+2) sum_{r not in {s,t}} eps_r K_srr
    C_str = 2 K_str                  (all indices distinct)

The summation ranges above are the ones forced by route one (diagonal sums
exclude the repeated index; the cross sum excludes both fixed indices);
route one is authoritative and the two are compared exactly in the test
suites.  Both routes satisfy the apolarity identity
``eps_s C_sss + sum_{t != s} eps_t C_stt = 0``.
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
    make_scalar,
    one_scalar,
    scalar_is_zero,
    zero_scalar,
)

FLOAT_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class BlaschkeData:
    """Origin data of the equiaffine normal of a germ in normal form.

    ``scale_at_origin`` is always one; ``scale_gradient`` is the gradient
    of the normal-scale function at the origin; ``tangential`` holds the
    normal's tangential components.
    """

    scale_at_origin: ScalarValue
    scale_gradient: tuple
    tangential: tuple
    signature: tuple


@dataclass(frozen=True)
class CubicTensor:
    """Fully symmetric 3-tensor, stored once per sorted index triple."""

    n: int
    entries: dict
    backend: str = EXACT

    def value(self, i: int, j: int, k: int) -> ScalarValue:
        key = tuple(sorted((i, j, k)))
        if any(not 0 <= t < self.n for t in key):
            raise JetError(f"tensor index {key} out of range")
        return self.entries.get(key, zero_scalar(self.backend))

    def evaluate(self, u: Sequence, v: Sequence, w: Sequence) -> ScalarValue:
        """Trilinear contraction with full symmetrization multiplicities."""
        if not len(u) == len(v) == len(w) == self.n:
            raise JetError("vector length does not match tensor dimension")
        total = zero_scalar(self.backend)
        for i in range(self.n):
            for j in range(self.n):
                for k in range(self.n):
                    c = self.value(i, j, k)
                    if not scalar_is_zero(c):
                        total = total + c * u[i] * v[j] * w[k]
        return total

    def max_abs(self) -> float:
        return max((abs(float(v)) for v in self.entries.values()), default=0.0)

    def same_entries(self, other: "CubicTensor", tol: float = 0.0) -> bool:
        if self.n != other.n:
            return False
        keys = set(self.entries) | set(other.entries)
        for key in keys:
            a = self.entries.get(key, zero_scalar(self.backend))
            b = other.entries.get(key, zero_scalar(other.backend))
            if tol > 0:
                if abs(float(a) - float(b)) > tol:
                    return False
            elif a != b:
                return False
        return True


def cubic_evaluate(tensor: CubicTensor, u: Sequence, v: Sequence, w: Sequence) -> ScalarValue:
    return tensor.evaluate(u, v, w)


def _binomial_series(u: TruncatedPolynomial, num: int, den: int) -> TruncatedPolynomial:
    """Truncated series of ``(1 + u)**(num/den)`` for ``u`` with zero constant."""
    if not scalar_is_zero(u.coefficient((0,) * u.n_vars)):
        raise JetError("binomial series needs a zero constant term")
    backend = u.backend
    if backend == EXACT:
        alpha = Fraction(num, den)
    else:
        alpha = num / den
    result = TruncatedPolynomial.constant(1, u.n_vars, u.max_order, backend)
    term = TruncatedPolynomial.constant(1, u.n_vars, u.max_order, backend)
    coeff = one_scalar(backend)
    for k in range(1, u.max_order + 1):
        coeff = coeff * (alpha - (k - 1)) / k
        term = term * u
        if term.is_zero():
            break
        result = result + term.scaled(coeff)
    return result


def _poly_det(mat: list) -> TruncatedPolynomial:
    """Determinant of a matrix of truncated polynomials (cofactor expansion
    with minors memoized by column subset)."""
    n = len(mat)
    sample = mat[0][0]
    one = TruncatedPolynomial.constant(1, sample.n_vars, sample.max_order, sample.backend)
    zero = TruncatedPolynomial.zero(sample.n_vars, sample.max_order, sample.backend)
    memo: dict[tuple, TruncatedPolynomial] = {}

    def rec(cols: tuple) -> TruncatedPolynomial:
        if not cols:
            return one
        if cols in memo:
            return memo[cols]
        row = n - len(cols)
        total = zero
        for pos, c in enumerate(cols):
            entry = mat[row][c]
            if entry.is_zero():
                continue
            sub = rec(cols[:pos] + cols[pos + 1:])
            term = entry * sub
            total = total + term if pos % 2 == 0 else total - term
        memo[cols] = total
        return total

    return rec(tuple(range(n)))


def _hessian_polys(germ: HypersurfaceGerm) -> list:
    f = germ.f
    return [[f.derivative(i).derivative(j) for j in range(germ.n)] for i in range(germ.n)]


def _normalized_det(germ: HypersurfaceGerm) -> TruncatedPolynomial:
    """Series of ``eps * det(D^2 f)``, equal to one at the origin."""
    eps_prod = 1
    for s in germ.signature:
        eps_prod *= s
    det = _poly_det(_hessian_polys(germ))
    d0 = det.coefficient((0,) * germ.n)
    scaled = det.scaled(eps_prod)
    origin = scaled.coefficient((0,) * germ.n)
    if germ.backend == EXACT:
        if origin != 1:
            raise InternalCheckError(f"normalized Hessian determinant is {origin} at the origin")
    elif abs(float(origin) - 1.0) > FLOAT_MATCH_TOL:
        raise InternalCheckError(f"normalized Hessian determinant is {d0} at the origin")
    return scaled


def scale_series(germ: HypersurfaceGerm) -> TruncatedPolynomial:
    """Normal-scale function ``phi`` as a truncated series at the origin."""
    d = _normalized_det(germ)
    u = d - TruncatedPolynomial.constant(1, germ.n, d.max_order, germ.backend)
    return _binomial_series(u, 1, germ.n + 2)


def _inverse_scale_series(germ: HypersurfaceGerm) -> TruncatedPolynomial:
    d = _normalized_det(germ)
    u = d - TruncatedPolynomial.constant(1, germ.n, d.max_order, germ.backend)
    return _binomial_series(u, -1, germ.n + 2)


def blaschke_data(germ: HypersurfaceGerm) -> BlaschkeData:
    """Origin gradient of the normal scale and the tangential components.

    The gradient is read off the determinant series and independently from
    the closed expression ``(2/(n+2)) sum_t eps_t K_stt`` (sum over all
    ``t``); the two must agree.  The tangential components solve the
    diagonal system ``eps_s Z_s = -grad_s``.
    """
    n = germ.n
    backend = germ.backend
    phi = scale_series(germ)
    grad = []
    for s in range(n):
        idx = tuple(1 if i == s else 0 for i in range(n))
        grad.append(phi.coefficient(idx))
    for s in range(n):
        total = zero_scalar(backend)
        for t in range(n):
            total = total + germ.signature[t] * germ.cubic_coefficient(s, t, t)
        closed = total * (Fraction(2, n + 2) if backend == EXACT else 2.0 / (n + 2))
        if backend == EXACT:
            if grad[s] != closed:
                raise InternalCheckError(
                    f"scale gradient mismatch at {s}: series {grad[s]} vs closed {closed}")
        elif abs(float(grad[s]) - float(closed)) > FLOAT_MATCH_TOL * max(1.0, abs(float(closed))):
            raise InternalCheckError("scale gradient mismatch between routes")
    tangential = tuple(-germ.signature[s] * grad[s] for s in range(n))
    return BlaschkeData(
        scale_at_origin=one_scalar(backend),
        scale_gradient=tuple(grad),
        tangential=tangential,
        signature=germ.signature,
    )


def cubic_tensor_appendix(germ: HypersurfaceGerm) -> CubicTensor:
    """Cubic form assembled from the metric series and connection terms.

    Every entry is the literal covariant derivative of the metric at the
    origin: the directional derivative of ``h_ab = f_ab / phi`` plus the
    connection corrections, which at the origin survive only on the fully
    diagonal entries (as ``+2 Z_s``).
    """
    n = germ.n
    data = blaschke_data(germ)
    inv_phi = _inverse_scale_series(germ)
    hess = _hessian_polys(germ)

    def h_derivative(a: int, b: int, c: int) -> ScalarValue:
        series = hess[a][b] * inv_phi
        idx = tuple(1 if i == c else 0 for i in range(n))
        return series.coefficient(idx)

    entries = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                if i == j == k:
                    value = h_derivative(i, i, i) + 2 * data.tangential[i]
                elif i == j:
                    value = h_derivative(i, i, k)
                elif j == k:
                    value = h_derivative(j, j, i)
                else:
                    value = h_derivative(i, j, k)
                if not scalar_is_zero(value):
                    entries[(i, j, k)] = value
    return CubicTensor(n, entries, germ.backend)


def cubic_tensor_closed(germ: HypersurfaceGerm) -> CubicTensor:
    """Cubic form from the closed expressions in the degree-3 tensor."""
    n = germ.n
    backend = germ.backend
    eps = germ.signature

    def frac(num: int) -> ScalarValue:
        return Fraction(num, n + 2) if backend == EXACT else num / (n + 2)

    entries = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                if i == j == k:
                    s = i
                    value = frac(2 * (n - 1)) * germ.cubic_coefficient(s, s, s)
                    for t in range(n):
                        if t != s:
                            value = value - frac(6) * eps[s] * eps[t] * germ.cubic_coefficient(s, t, t)
                elif i == j or j == k:
                    s, t = (k, i) if i == j else (i, j)
                    value = frac(2 * (n + 1)) * germ.cubic_coefficient(s, t, t)
                    value = value - frac(2) * eps[s] * eps[t] * germ.cubic_coefficient(s, s, s)
                    for r in range(n):
                        if r != s and r != t:
                            value = value - frac(2) * eps[t] * eps[r] * germ.cubic_coefficient(s, r, r)
                else:
                    value = 2 * germ.cubic_coefficient(i, j, k)
                if not scalar_is_zero(value):
                    entries[(i, j, k)] = value
    return CubicTensor(n, entries, backend)


def apolarity_residual(tensor: CubicTensor, signature: Sequence[int]) -> tuple:
    """Trace defect ``eps_s C_sss + sum_{t != s} eps_t C_stt`` per index."""
    n = tensor.n
    if len(signature) != n:
        raise JetError("signature length does not match tensor dimension")
    out = []
    for s in range(n):
        total = signature[s] * tensor.value(s, s, s)
        for t in range(n):
            if t != s:
                total = total + signature[t] * tensor.value(s, t, t)
        out.append(total)
    return tuple(out)
