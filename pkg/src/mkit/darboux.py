"""Detection of (generalized) Darboux directions and locus scanning.

A tangent direction aligned with the first axis is a generalized Darboux
direction exactly when the quadratic form ``q`` multiplying ``x_1`` in the
contact 3-jet vanishes; equivalently, when the cubic-form slice
``C_1st`` (``s, t >= 2``) vanishes.  Both characterizations are computed
independently and must agree.  For surfaces the Darboux directions are the
real zero directions of the binary cubic ``C(v, v, v)``; a grid scanner
surveys where a hypersurface admits such directions at all.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .contact import b_coefficients, contact_function
from .cubic import cubic_tensor_closed
from .errors import DegeneratePointError, InternalCheckError, NullDirectionError
from .germs import HypersurfaceGerm, align_direction, normalize
from .jets import EXACT, FLOAT, TruncatedPolynomial, scalar_is_zero
from .moutard import moutard_pencil

DEFAULT_THRESHOLD = 1e-9


@dataclass(frozen=True)
class DarbouxReport:
    """Both characterizations of one direction at one point."""

    direction: tuple
    b_diag: dict
    b_cross: dict
    c_slice: dict
    c111: object
    verdict_b: bool
    verdict_c: bool
    agreement: bool
    q_norm: float


def _cubic_scale(germ: HypersurfaceGerm) -> float:
    return max((abs(float(v)) for v in germ.cubic_entries().values()), default=0.0)


def is_generalized_darboux(germ: HypersurfaceGerm,
                           threshold: float = DEFAULT_THRESHOLD) -> DarbouxReport:
    """Test whether the first coordinate axis is a generalized Darboux
    direction of a germ in normal form.

    The contact side reads the ``q`` coefficients off the composed contact
    function (cross-checked against their closed expressions); the
    cubic-form side reads the slice ``C_1st``.  On the exact backend a
    verdict disagreement raises :class:`InternalCheckError`; on floats the
    verdicts use ``threshold`` on coefficients normalized by the cubic
    magnitude and the agreement flag is reported as observed.
    """
    n = germ.n
    member = moutard_pencil(germ).member(0)
    jet = contact_function(germ, member, order=min(germ.order, 3))
    bmap = b_coefficients(jet)
    tensor = cubic_tensor_closed(germ)
    c_slice = {(s, t): tensor.value(0, s, t)
               for s in range(1, n) for t in range(s, n)}
    c111 = tensor.value(0, 0, 0)

    b_values = list(bmap["b1_diag"].values()) + list(bmap["b1_cross"].values())
    denom = max(1.0, _cubic_scale(germ))
    q_norm = max((abs(float(v)) for v in b_values), default=0.0) / denom
    if germ.backend == EXACT:
        verdict_b = all(scalar_is_zero(v) for v in b_values)
        verdict_c = all(scalar_is_zero(v) for v in c_slice.values())
        if verdict_b != verdict_c:
            raise InternalCheckError(
                "contact and cubic-form Darboux verdicts disagree on exact arithmetic")
    else:
        c_denom = max(1.0, tensor.max_abs())
        verdict_b = q_norm <= threshold
        verdict_c = max((abs(float(v)) for v in c_slice.values()), default=0.0) / c_denom <= threshold
    return DarbouxReport(
        direction=tuple(1 if i == 0 else 0 for i in range(n)),
        b_diag=dict(bmap["b1_diag"]),
        b_cross=dict(bmap["b1_cross"]),
        c_slice=c_slice,
        c111=c111,
        verdict_b=verdict_b,
        verdict_c=verdict_c,
        agreement=verdict_b == verdict_c,
        q_norm=q_norm,
    )


@dataclass(frozen=True)
class DirectionRecord:
    """One root direction of the surface cubic, with its verification."""

    direction: tuple
    root: complex
    metric_value: float
    b122: float | None
    verified: bool


@dataclass(frozen=True)
class SurfaceDirections:
    all_directions: bool
    directions: tuple
    complex_pairs: int
    cubic_coefficients: tuple


def _canonical_unit(v: Sequence[float]) -> tuple:
    norm = math.sqrt(sum(c * c for c in v))
    out = [c / norm for c in v]
    lead = next((c for c in out if abs(c) > 1e-12), 1.0)
    if lead < 0:
        out = [-c for c in out]
    return tuple(out)


def darboux_directions_surface(germ: HypersurfaceGerm,
                               b_tol: float = DEFAULT_THRESHOLD,
                               imag_tol: float = 1e-8) -> SurfaceDirections:
    """All real Darboux directions of a surface germ.

    Roots of the dehomogenized binary cubic are found with a companion
    matrix (plus the explicit check of the transverse axis direction),
    polished by Newton steps, and each real direction is verified by
    aligning the frame to it and checking that the ``x_1 x_2^2`` contact
    coefficient vanishes to ``b_tol``.  An identically zero cubic is
    reported as "every direction" (quadratic-type point).
    """
    if germ.n != 2:
        raise InternalCheckError("surface direction search requires n = 2")
    germ = germ.to_float()
    tensor = cubic_tensor_closed(germ)
    a = float(tensor.value(0, 0, 0))
    b3 = 3.0 * float(tensor.value(0, 0, 1))
    c3 = 3.0 * float(tensor.value(0, 1, 1))
    d = float(tensor.value(1, 1, 1))
    coeffs = (a, b3, c3, d)
    scale = max(abs(x) for x in coeffs)
    if scale <= 1e-12 * max(1.0, _cubic_scale(germ)):
        return SurfaceDirections(True, (), 0, coeffs)

    def poly_val(t: float) -> float:
        return ((a * t + b3) * t + c3) * t + d

    def poly_deriv(t: float) -> float:
        return (3.0 * a * t + 2.0 * b3) * t + c3

    raw_directions: list[tuple[float, float, complex]] = []
    complex_roots = 0
    trimmed = list(coeffs)
    while trimmed and abs(trimmed[0]) <= 1e-12 * scale:
        trimmed.pop(0)
    if len(trimmed) < len(coeffs):
        # Leading coefficient vanished: the transverse axis itself is a root.
        raw_directions.append((1.0, 0.0, complex(math.inf)))
    if len(trimmed) >= 2:
        for root in np.roots(trimmed):
            if abs(root.imag) > imag_tol * (1.0 + abs(root.real)):
                complex_roots += 1
                continue
            t = float(root.real)
            for _ in range(3):
                dp = poly_deriv(t)
                if abs(dp) < 1e-300:
                    break
                t -= poly_val(t) / dp
            raw_directions.append((t, 1.0, root))

    records = []
    seen: list[tuple] = []
    for vx, vy, root in raw_directions:
        direction = _canonical_unit((vx, vy))
        if any(max(abs(direction[0] - s[0]), abs(direction[1] - s[1])) < 1e-8 for s in seen):
            continue
        seen.append(direction)
        metric_value = float(germ.metric(direction, direction))
        if abs(metric_value) <= 1e-9:
            records.append(DirectionRecord(direction, root, metric_value, None, False))
            continue
        aligned, _ = align_direction(germ, direction)
        jet = contact_function(aligned, moutard_pencil(aligned).member(0), order=3)
        b122 = float(jet.b1_diag(1))
        records.append(DirectionRecord(direction, root, metric_value, b122,
                                       abs(b122) <= b_tol))
    return SurfaceDirections(False, tuple(records), complex_roots // 2, coeffs)


# -- locus scanning ----------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned sampling grid: inclusive bounds, points per axis."""

    mins: tuple
    maxs: tuple
    counts: tuple

    def points(self) -> list:
        axes = []
        for lo, hi, k in zip(self.mins, self.maxs, self.counts):
            lo, hi, k = float(lo), float(hi), int(k)
            if k < 1:
                raise ValueError("grid counts must be positive")
            if k == 1:
                axes.append([0.5 * (lo + hi)])
            else:
                axes.append([lo + i * (hi - lo) / (k - 1) for i in range(k)])
        return [tuple(p) for p in product(*axes)]


@dataclass(frozen=True)
class ScanEntry:
    index: int
    point: tuple
    status: str
    best_direction: tuple | None
    q_norm: float | None
    verdict: bool
    direction_norms: tuple = ()


@dataclass(frozen=True)
class LocusScanResult:
    entries: tuple
    threshold: float
    seed: int
    direction_count: int

    def ok_entries(self) -> list:
        return [e for e in self.entries if e.status == "ok"]

    def pass_fraction(self) -> float:
        ok = self.ok_entries()
        if not ok:
            return 0.0
        return sum(1 for e in ok if e.verdict) / len(ok)

    def cell_pass_fraction(self, threshold: float) -> float:
        cells = [q for e in self.ok_entries() for q in e.direction_norms]
        if not cells:
            return 0.0
        return sum(1 for q in cells if q <= threshold) / len(cells)

    def summary(self) -> dict:
        ok = self.ok_entries()
        return {
            "points": len(self.entries),
            "degenerate": len(self.entries) - len(ok),
            "passing": sum(1 for e in ok if e.verdict),
            "threshold": self.threshold,
            "pass_fraction": self.pass_fraction(),
        }


def fibonacci_sphere(count: int) -> list:
    """Deterministic quasi-uniform direction lattice on the 2-sphere."""
    golden = math.pi * (3.0 - math.sqrt(5.0))
    out = []
    for i in range(count):
        z = 1.0 - 2.0 * (i + 0.5) / count
        r = math.sqrt(max(0.0, 1.0 - z * z))
        theta = golden * i
        out.append((r * math.cos(theta), r * math.sin(theta), z))
    return out


def sampled_directions(n: int, count: int, seed: int) -> list:
    """Direction sample: Fibonacci lattice for n = 3, seeded Gaussian
    directions for higher dimensions."""
    if n == 3:
        return fibonacci_sphere(count)
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        v = [rng.gauss(0.0, 1.0) for _ in range(n)]
        norm = math.sqrt(sum(c * c for c in v))
        if norm < 1e-6:
            continue
        out.append(tuple(c / norm for c in v))
    return out


def _aligned_q_norm(germ: HypersurfaceGerm, direction: Sequence[float]) -> float | None:
    """Normalized magnitude of the q-form after aligning to a direction.

    Returns None for metric-null directions, which admit no adapted frame.
    """
    metric_value = float(germ.metric(direction, direction))
    if abs(metric_value) <= 1e-9:
        return None
    try:
        aligned, _ = align_direction(germ, direction)
    except NullDirectionError:
        return None
    n = aligned.n
    eps = aligned.signature
    k111 = aligned.cubic_coefficient(0, 0, 0)
    values = []
    for s in range(1, n):
        values.append(eps[0] * eps[s] * k111 / 3.0 - aligned.cubic_coefficient(0, s, s))
        for t in range(s + 1, n):
            values.append(-2.0 * aligned.cubic_coefficient(0, s, t))
    denom = max(1.0, _cubic_scale(aligned))
    return max((abs(v) for v in values), default=0.0) / denom


def darboux_locus_scan(graph: TruncatedPolynomial, grid: GridSpec,
                       direction_count: int = 64,
                       threshold: float = DEFAULT_THRESHOLD,
                       seed: int = 0,
                       max_workers: int | None = None,
                       progress=None) -> LocusScanResult:
    """Survey a sampled region for points carrying a Darboux direction.

    Each grid point is normalized on the float backend (degenerate Hessians
    are reported and skipped).  Surfaces use the exact root search; higher
    dimensions minimize the normalized q magnitude over a fixed direction
    sample, the same sample at every point so runs are reproducible.  Grid
    points are independent work items; results are merged by grid index, so
    the output does not depend on the execution order.
    """
    graph = graph.to_float()
    n = graph.n_vars
    points = grid.points()
    if not points:
        raise ValueError("empty scan grid")
    directions = sampled_directions(n, direction_count, seed) if n >= 3 else []

    def worker(item):
        index, point = item
        try:
            germ, _ = normalize(graph, point, order=4, backend=FLOAT)
        except DegeneratePointError:
            return ScanEntry(index, point, "degenerate", None, None, False)
        if n == 2:
            found = darboux_directions_surface(germ)
            denom = max(1.0, _cubic_scale(germ))
            if found.all_directions:
                return ScanEntry(index, point, "ok",
                                 (1.0, 0.0), 0.0, True, (0.0,))
            norms = []
            best = None
            best_q = math.inf
            for record in found.directions:
                if record.b122 is None:
                    continue
                q = abs(record.b122) / denom
                norms.append(q)
                if q < best_q:
                    best_q, best = q, record.direction
            if best is None:
                return ScanEntry(index, point, "ok", None, math.inf, False)
            return ScanEntry(index, point, "ok", best, best_q,
                             best_q <= threshold, tuple(norms))
        norms = []
        best = None
        best_q = math.inf
        for v in directions:
            q = _aligned_q_norm(germ, v)
            if q is None:
                continue
            norms.append(q)
            if q < best_q:
                best_q, best = q, v
        if best is None:
            return ScanEntry(index, point, "ok", None, math.inf, False)
        return ScanEntry(index, point, "ok", best, best_q,
                         best_q <= threshold, tuple(norms))

    workers = max_workers
    if workers is None:
        env = os.environ.get("MKIT_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(points)))
    indexed = list(enumerate(points))
    if workers == 1:
        results = [worker(item) for item in indexed]
        if progress:
            progress(len(results), len(points))
    else:
        results = []
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for entry in pool.map(worker, indexed):
                results.append(entry)
                if progress and len(results) % 16 == 0:
                    progress(len(results), len(points))
    results.sort(key=lambda e: e.index)
    return LocusScanResult(tuple(results), threshold, seed, direction_count)
