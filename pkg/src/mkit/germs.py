"""Hypersurface germs in adapted coordinates, and the frame changes that
produce them.

A germ is the truncated graph ``x_{n+1} = f(x_1 .. x_n)`` of a
non-degenerate hypersurface at a point, written so that the point is the
origin, the tangent plane is ``x_{n+1} = 0`` and the quadratic part is
``(1/2) * sum_i eps_i x_i^2`` with ``eps_i = +-1``.  The degree-3 and
degree-4 coefficients are exposed through fully symmetric tensor accessors:
the cubic part of ``f`` is ``(1/3) * sum K_ijk x_i x_j x_k`` and the
quartic part ``(1/12) * sum H_ijkl x_i x_j x_k x_l``, both sums running
over all ordered index tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import DegeneratePointError, ExactBackendError, JetError, NullDirectionError
from .jets import (
    EXACT,
    FLOAT,
    ScalarValue,
    TruncatedPolynomial,
    make_scalar,
    multinomial,
    one_scalar,
    scalar_is_zero,
    scalar_sqrt,
    zero_scalar,
)

Signature = tuple[int, ...]

# Float-backend slack for "this coefficient should be exactly zero/one" checks.
FLOAT_FORM_TOL = 1e-9


@dataclass(frozen=True)
class FrameChange:
    """Affine change of frame recorded by the normalization pipeline.

    New coordinates ``u`` relate to the old graph coordinates ``x`` by
    ``x = translate + linear @ u``; the new height coordinate is
    ``x_{n+1} - height - shear . (x - translate)``.
    """

    translate: tuple
    shear: tuple
    linear: tuple
    height: ScalarValue = 0

    @classmethod
    def identity(cls, n: int, backend: str = EXACT) -> "FrameChange":
        zero = zero_scalar(backend)
        eye = linalg.identity(n, backend)
        return cls(
            translate=tuple(zero for _ in range(n)),
            shear=tuple(zero for _ in range(n)),
            linear=tuple(tuple(row) for row in eye),
            height=zero,
        )

    def linear_matrix(self) -> list:
        return [list(row) for row in self.linear]


class HypersurfaceGerm:
    """Normal-form jet of a non-degenerate hypersurface at a point."""

    __slots__ = ("n", "order", "f", "signature")

    def __init__(self, n: int, order: int, f: TruncatedPolynomial, signature: Sequence[int]):
        if order < 4:
            raise JetError(f"germ order must be at least 4, got {order}")
        if f.n_vars != n:
            raise JetError("graph polynomial has wrong variable count")
        if f.max_order != order:
            f = f.truncated(order)
        signature = tuple(int(s) for s in signature)
        if len(signature) != n or any(s not in (1, -1) for s in signature):
            raise JetError(f"signature must be a length-{n} tuple of +-1")
        self._check_normal_form(f, signature)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "signature", signature)

    def __setattr__(self, name, value):
        raise AttributeError("HypersurfaceGerm is immutable")

    @staticmethod
    def _check_normal_form(f: TruncatedPolynomial, signature: Signature) -> None:
        n = f.n_vars
        tol = 0 if f.backend == EXACT else FLOAT_FORM_TOL
        for idx, value in f.coeffs.items():
            d = sum(idx)
            if d > 2:
                continue
            if d < 2:
                expected = zero_scalar(f.backend)
            elif idx.count(2) == 1:
                var = idx.index(2)
                expected = make_scalar(Fraction(signature[var], 2), f.backend) \
                    if f.backend == EXACT else signature[var] / 2.0
            else:
                expected = zero_scalar(f.backend)
            if tol == 0:
                if value != expected:
                    raise JetError(
                        f"graph is not in normal form: coefficient {value} at {idx}")
            elif abs(float(value) - float(expected)) > tol:
                raise JetError(
                    f"graph is not in normal form: coefficient {value} at {idx}")
        # Missing diagonal quadratic terms are only legal if the stored map
        # already contains them; absence means a zero coefficient.
        for var in range(n):
            idx = tuple(2 if i == var else 0 for i in range(n))
            value = f.coeffs.get(idx)
            if value is None:
                raise JetError("graph is not in normal form: missing diagonal quadratic term")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_tensors(cls, signature: Sequence[int], cubic: dict | None = None,
                     quartic: dict | None = None, order: int = 4,
                     backend: str = EXACT, extra: dict | None = None) -> "HypersurfaceGerm":
        """Assemble a germ from symmetric tensor entries.

        ``cubic`` maps index triples (any order, 0-based) to the tensor
        entries; ``quartic`` likewise for quadruples.  ``extra`` may carry
        raw polynomial coefficients of degree 5 and above.
        """
        signature = tuple(int(s) for s in signature)
        n = len(signature)
        terms: dict[tuple, object] = {}
        for var, s in enumerate(signature):
            idx = tuple(2 if i == var else 0 for i in range(n))
            terms[idx] = Fraction(s, 2) if backend == EXACT else s / 2.0
        for degree, divisor, tensor in ((3, 3, cubic), (4, 12, quartic)):
            for index_tuple, value in (tensor or {}).items():
                idx = _index_to_monomial(index_tuple, n)
                if len(index_tuple) != degree:
                    raise JetError(f"tensor index {index_tuple} has wrong arity")
                value = make_scalar(value, backend)
                weight = Fraction(multinomial(idx), divisor) \
                    if backend == EXACT else multinomial(idx) / divisor
                terms[idx] = terms.get(idx, zero_scalar(backend)) + value * weight
        for idx, value in (extra or {}).items():
            idx = tuple(idx)
            if sum(idx) < 5:
                raise JetError("extra terms must have total degree at least 5")
            terms[idx] = value
        f = TruncatedPolynomial.from_terms(terms, n, order, backend)
        return cls(n, order, f, signature)

    # -- accessors ----------------------------------------------------------

    @property
    def backend(self) -> str:
        return self.f.backend

    def cubic_coefficient(self, i: int, j: int, k: int) -> ScalarValue:
        """Symmetric degree-3 tensor entry ``K_ijk`` (0-based indices)."""
        idx = _index_to_monomial((i, j, k), self.n)
        raw = self.f.coefficient(idx)
        if self.backend == EXACT:
            return raw * Fraction(3, multinomial(idx))
        return raw * 3.0 / multinomial(idx)

    def quartic_coefficient(self, i: int, j: int, k: int, l: int) -> ScalarValue:
        """Symmetric degree-4 tensor entry ``H_ijkl`` (0-based indices)."""
        idx = _index_to_monomial((i, j, k, l), self.n)
        raw = self.f.coefficient(idx)
        if self.backend == EXACT:
            return raw * Fraction(12, multinomial(idx))
        return raw * 12.0 / multinomial(idx)

    def cubic_entries(self) -> dict:
        out = {}
        for i in range(self.n):
            for j in range(i, self.n):
                for k in range(j, self.n):
                    out[(i, j, k)] = self.cubic_coefficient(i, j, k)
        return out

    def metric(self, u: Sequence, v: Sequence) -> ScalarValue:
        """Blaschke metric at the origin: the +-1 diagonal pairing."""
        total = zero_scalar(self.backend)
        for s, a, b in zip(self.signature, u, v):
            total = total + s * a * b
        return total

    def to_float(self) -> "HypersurfaceGerm":
        if self.backend == FLOAT:
            return self
        return HypersurfaceGerm(self.n, self.order, self.f.to_float(), self.signature)

    def transformed(self, matrix) -> "HypersurfaceGerm":
        """Pull the germ back along the tangent substitution ``x = L u``.

        ``L`` must preserve the diagonal metric up to reordering the signs;
        otherwise the result is not in normal form and this raises.
        """
        subs = []
        for j in range(self.n):
            col = {(_unit(i, self.n)): matrix[i][j] for i in range(self.n)}
            subs.append(TruncatedPolynomial(self.n, self.order, col, self.backend))
        new_f = self.f.compose(subs)
        new_sig = []
        for var in range(self.n):
            idx = tuple(2 if i == var else 0 for i in range(self.n))
            value = float(new_f.coefficient(idx))
            new_sig.append(1 if value > 0 else -1)
        return HypersurfaceGerm(self.n, self.order, new_f, tuple(new_sig))

    def __eq__(self, other) -> bool:
        if not isinstance(other, HypersurfaceGerm):
            return NotImplemented
        return (self.n == other.n and self.order == other.order
                and self.signature == other.signature and self.f == other.f)

    def __repr__(self) -> str:
        return f"HypersurfaceGerm(n={self.n}, order={self.order}, signature={self.signature})"


def _unit(i: int, n: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _index_to_monomial(indices: Sequence[int], n: int) -> tuple:
    mono = [0] * n
    for i in indices:
        if not 0 <= int(i) < n:
            raise JetError(f"tensor index {i} out of range for dimension {n}")
        mono[int(i)] += 1
    return tuple(mono)


# -- pointwise normalization -------------------------------------------------


def recenter(graph: TruncatedPolynomial, point: Sequence, order: int):
    """Expand a global graph at a point and strip its affine part.

    Returns the re-expanded jet (constant and linear terms removed by a
    translation plus a shear of the height coordinate) together with the
    recorded :class:`FrameChange`.  The Hessian is not normalized here.
    """
    n = graph.n_vars
    if len(point) != n:
        raise JetError("point has wrong length")
    backend = graph.backend
    point = tuple(make_scalar(p, backend) for p in point)
    subs = []
    for i in range(n):
        subs.append(TruncatedPolynomial(
            n, order,
            {(0,) * n: point[i], _unit(i, n): one_scalar(backend)},
            backend))
    shifted = graph.compose(subs, allow_constant=True)
    height = shifted.coefficient((0,) * n)
    shear = tuple(shifted.coefficient(_unit(i, n)) for i in range(n))
    kept = {idx: c for idx, c in shifted.coeffs.items() if sum(idx) >= 2}
    jet = TruncatedPolynomial(n, order, kept, backend)
    eye = linalg.identity(n, backend)
    frame = FrameChange(translate=point, shear=shear,
                        linear=tuple(tuple(row) for row in eye), height=height)
    return jet, frame


def hessian_of_jet(jet: TruncatedPolynomial) -> list:
    """Second-derivative matrix at the origin of a zero-affine-part jet."""
    n = jet.n_vars
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            idx = [0] * n
            idx[i] += 1
            idx[j] += 1
            value = jet.coefficient(tuple(idx))
            row.append(value * 2 if i == j else value)
        out.append(row)
    return out


def diagonalize_hessian(hess: list, backend: str = EXACT):
    """Congruence-diagonalize a symmetric matrix to ``diag(+-1)``.

    Returns ``(L, signature)`` with ``L^T H L = diag(signature)`` and all
    ``+1`` entries listed first.  Diagonal pivots are rescaled by
    ``1/sqrt(|pivot|)``, which on the exact backend requires each pivot to
    be a rational square; a zero diagonal with a nonzero off-diagonal
    partner is resolved by the exact split-pair substitution, so purely
    hyperbolic blocks stay rational.
    """
    n = len(hess)
    m = [[make_scalar(v, backend) if backend == EXACT or not isinstance(v, float) else v
          for v in row] for row in hess]
    for i in range(n):
        for j in range(n):
            if m[i][j] != m[j][i]:
                raise JetError("Hessian must be symmetric")
    scale = max((abs(float(v)) for row in m for v in row), default=0.0)
    if scale == 0.0:
        raise DegeneratePointError("Hessian is zero")
    zero_tol = 0.0 if backend == EXACT else 1e-12 * scale

    def is_zero(v) -> bool:
        return v == 0 if backend == EXACT else abs(v) <= zero_tol

    L = linalg.identity(n, backend)

    def col_op(dst: int, src: int, factor) -> None:
        # dst-column += factor * src-column, mirrored on rows; same on L.
        for r in range(n):
            m[r][dst] = m[r][dst] + factor * m[r][src]
        for c in range(n):
            m[dst][c] = m[dst][c] + factor * m[src][c]
        for r in range(n):
            L[r][dst] = L[r][dst] + factor * L[r][src]

    def col_swap(a: int, b: int) -> None:
        for r in range(n):
            m[r][a], m[r][b] = m[r][b], m[r][a]
        m[a], m[b] = m[b], m[a]
        for r in range(n):
            L[r][a], L[r][b] = L[r][b], L[r][a]

    for k in range(n):
        if is_zero(m[k][k]):
            diag = [r for r in range(k + 1, n) if not is_zero(m[r][r])]
            if diag:
                pick = diag[0] if backend == EXACT else max(diag, key=lambda r: abs(m[r][r]))
                col_swap(k, pick)
            else:
                off = [c for c in range(k + 1, n) if not is_zero(m[k][c])]
                if not off:
                    raise DegeneratePointError("Hessian is singular (degenerate point)")
                j = off[0] if backend == EXACT else max(off, key=lambda c: abs(m[k][c]))
                # Split the hyperbolic pair exactly: with b_k' = b_k + t b_j,
                # b_j' = b_k - t b_j and t = 1/(2 m[k][j]) the block becomes
                # diag(+1, -1) without any square roots.
                t = (Fraction(1) if backend == EXACT else 1.0) / (2 * m[k][j])
                old_k = [L[r][k] for r in range(n)]
                for r in range(n):
                    L[r][k] = old_k[r] + t * L[r][j]
                    L[r][j] = old_k[r] - t * L[r][j]
                mk = [m[r][k] for r in range(n)]
                mj = [m[r][j] for r in range(n)]
                for r in range(n):
                    m[r][k] = mk[r] + t * mj[r]
                    m[r][j] = mk[r] - t * mj[r]
                rk = list(m[k])
                rj = list(m[j])
                for c in range(n):
                    m[k][c] = rk[c] + t * rj[c]
                    m[j][c] = rk[c] - t * rj[c]
        pivot = m[k][k]
        if is_zero(pivot):
            raise DegeneratePointError("Hessian is singular (degenerate point)")
        for c in range(k + 1, n):
            if not is_zero(m[k][c]):
                col_op(c, k, -m[k][c] / pivot)

    diag = [m[i][i] for i in range(n)]
    if any(is_zero(d) for d in diag):
        raise DegeneratePointError("Hessian is singular (degenerate point)")
    signs = []
    for i in range(n):
        d = diag[i]
        signs.append(1 if float(d) > 0 else -1)
        factor = one_scalar(backend) / scalar_sqrt(abs(d), backend)
        for r in range(n):
            L[r][i] = L[r][i] * factor
    # Reorder so the +1 entries come first (stable permutation).
    order_perm = sorted(range(n), key=lambda i: (0 if signs[i] > 0 else 1, i))
    L_sorted = [[L[r][order_perm[c]] for c in range(n)] for r in range(n)]
    signature = tuple(signs[i] for i in order_perm)
    return L_sorted, signature


def normalize(graph: TruncatedPolynomial, point: Sequence, order: int,
              backend: str | None = None):
    """Bring the graph of a hypersurface to normal form at a point.

    Composes :func:`recenter` with :func:`diagonalize_hessian` into one
    frame change.  On the exact backend the rescaling of each Hessian pivot
    must be rational; otherwise an :class:`ExactBackendError` asks the
    caller to retry on floats (``backend="float"``).
    """
    if backend == FLOAT:
        graph = graph.to_float()
    elif backend == EXACT and graph.backend != EXACT:
        raise JetError("cannot promote a float graph to the exact backend")
    jet, frame = recenter(graph, [make_scalar(p, graph.backend) for p in point], order)
    hess = hessian_of_jet(jet)
    L, signature = diagonalize_hessian(hess, graph.backend)
    subs = []
    for j in range(jet.n_vars):
        col = {_unit(i, jet.n_vars): L[i][j] for i in range(jet.n_vars)}
        subs.append(TruncatedPolynomial(jet.n_vars, order, col, graph.backend))
    f = jet.compose(subs)
    germ = HypersurfaceGerm(jet.n_vars, order, f, signature)
    full = FrameChange(translate=frame.translate, shear=frame.shear,
                       linear=tuple(tuple(row) for row in L), height=frame.height)
    return germ, full


def align_direction(germ: HypersurfaceGerm, direction: Sequence):
    """Rotate the germ so a given tangent direction becomes the first axis.

    The direction must be non-null for the diagonal metric.  The remaining
    axes are completed by Gram-Schmidt in that metric, seeded with the
    standard basis vectors (and their pairwise sums when every projection
    is null), then normalized to unit metric length.  On the exact backend
    each normalization must be a rational square.
    """
    n = germ.n
    backend = germ.backend
    v = [make_scalar(c, backend) for c in direction]
    if all(scalar_is_zero(c) for c in v):
        raise NullDirectionError("zero vector cannot be aligned")
    tol = 0.0 if backend == EXACT else FLOAT_FORM_TOL * max(abs(float(c)) for c in v) ** 2

    def pairing(a, b):
        return germ.metric(a, b)

    def is_null(value) -> bool:
        return value == 0 if backend == EXACT else abs(float(value)) <= tol

    length2 = pairing(v, v)
    if is_null(length2):
        raise NullDirectionError("direction is null for the Blaschke metric")

    basis = [v]
    norms = [length2]
    seeds = [[one_scalar(backend) if i == j else zero_scalar(backend) for i in range(n)]
             for j in range(n)]
    seeds += [[a + b for a, b in zip(seeds[i], seeds[j])]
              for i in range(n) for j in range(i + 1, n)]
    for seed in seeds:
        if len(basis) == n:
            break
        w = list(seed)
        for b, nb in zip(basis, norms):
            coeff = pairing(w, b) / nb
            w = [wi - coeff * bi for wi, bi in zip(w, b)]
        if all(scalar_is_zero(c) for c in w):
            continue
        norm2 = pairing(w, w)
        if is_null(norm2):
            continue
        basis.append(w)
        norms.append(norm2)
    if len(basis) < n:
        raise NullDirectionError("could not complete a metric-orthogonal frame")

    new_signature = []
    columns = []
    for w, norm2 in zip(basis, norms):
        sign = 1 if float(norm2) > 0 else -1
        new_signature.append(sign)
        factor = one_scalar(backend) / scalar_sqrt(abs(norm2), backend)
        columns.append([c * factor for c in w])
    L = [[columns[j][i] for j in range(n)] for i in range(n)]
    aligned = germ.transformed(L)
    if aligned.signature != tuple(new_signature):
        raise ExactBackendError("metric signature drifted during alignment")
    frame = FrameChange(
        translate=tuple(zero_scalar(backend) for _ in range(n)),
        shear=tuple(zero_scalar(backend) for _ in range(n)),
        linear=tuple(tuple(row) for row in L),
        height=zero_scalar(backend))
    return aligned, frame
