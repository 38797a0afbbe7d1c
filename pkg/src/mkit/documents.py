"""JSON document formats: germ/graph inputs and machine-readable reports.

Input documents carry raw polynomial coefficients under explicit exponent
multi-indices; rational values travel as ``"p/q"`` strings so round trips
are bit-exact.  A document with a ``signature`` field is validated as a
normal-form germ; without one it is read as a global graph polynomial.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import JetError
from .germs import HypersurfaceGerm
from .jets import EXACT, FLOAT, ScalarValue, TruncatedPolynomial

# Convention notes echoed into reports (toggled by --typo-notes).
CONVENTION_NOTES = (
    "note: the higher-order contact class is decided on the reduced pure quartic "
    "coefficient of the distinguished axis; the transverse quartic is removed by "
    "the reduction",
    "note: in the closed cubic-form expressions the diagonal sum excludes the "
    "repeated index and the cross sum excludes both fixed indices; the "
    "normal-construction route is authoritative",
    "note: the perfect-cube coefficient c is read off the composed contact "
    "function rather than any closed expression",
)


def scalar_to_json(value: ScalarValue):
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def scalar_from_json(value, backend: str) -> ScalarValue:
    if backend == EXACT:
        if isinstance(value, float):
            raise JetError("exact documents must carry integers or 'p/q' strings")
        return Fraction(value)
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def poly_to_coeff_list(poly: TruncatedPolynomial) -> list:
    return [{"index": list(idx), "value": scalar_to_json(poly.coeffs[idx])}
            for idx in sorted(poly.coeffs, key=lambda i: (sum(i), i))]


def poly_from_coeff_list(entries, n_vars: int, max_order: int, backend: str) -> TruncatedPolynomial:
    terms = {}
    for entry in entries:
        idx = tuple(int(e) for e in entry["index"])
        if len(idx) != n_vars:
            raise JetError(f"coefficient index {idx} does not have {n_vars} entries")
        if sum(idx) > max_order:
            raise JetError(f"coefficient index {idx} exceeds the stated order {max_order}")
        value = scalar_from_json(entry["value"], backend)
        if idx in terms:
            raise JetError(f"duplicate coefficient index {idx}")
        terms[idx] = value
    return TruncatedPolynomial(n_vars, max_order, terms, backend)


@dataclass(frozen=True)
class ParsedInput:
    """Either a normal-form germ or a global graph polynomial."""

    kind: str
    document: dict
    germ: HypersurfaceGerm | None = None
    graph: TruncatedPolynomial | None = None

    @property
    def backend(self) -> str:
        return self.document["backend"]


def parse_germ_document(doc: dict) -> ParsedInput:
    for key in ("n", "order", "backend", "coefficients"):
        if key not in doc:
            raise JetError(f"germ document is missing the '{key}' field")
    n = int(doc["n"])
    order = int(doc["order"])
    backend = doc["backend"]
    if backend not in (EXACT, FLOAT):
        raise JetError(f"unknown backend {backend!r} in document")
    poly = poly_from_coeff_list(doc["coefficients"], n, order, backend)
    if "signature" in doc and doc["signature"] is not None:
        signature = tuple(int(s) for s in doc["signature"])
        germ = HypersurfaceGerm(n, order, poly, signature)
        return ParsedInput("germ", doc, germ=germ)
    return ParsedInput("graph", doc, graph=poly)


def germ_to_document(germ: HypersurfaceGerm) -> dict:
    return {
        "n": germ.n,
        "order": germ.order,
        "backend": germ.backend,
        "signature": list(germ.signature),
        "coefficients": poly_to_coeff_list(germ.f),
    }


def graph_to_document(poly: TruncatedPolynomial) -> dict:
    return {
        "n": poly.n_vars,
        "order": poly.max_order,
        "backend": poly.backend,
        "coefficients": poly_to_coeff_list(poly),
    }


def document_digest(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def load_document(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


@dataclass
class Report:
    """Machine-readable command outcome.

    Exit-status contract: 0 success, 1 verification failure (a checked
    identity or suite found a counterexample), 2 usage or input error.
    """

    command: str
    input_digest: str | None
    backend: str | None
    results: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    status: int = 0

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "backend": self.backend,
            "results": jsonable(self.results),
            "warnings": list(self.warnings),
            "status": self.status,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def jsonable(obj):
    """Recursively convert report payloads to JSON-safe values."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {_key_str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    if isinstance(obj, TruncatedPolynomial):
        return poly_to_coeff_list(obj)
    if hasattr(obj, "__dict__"):
        return {k: jsonable(v) for k, v in vars(obj).items()}
    return str(obj)


def _key_str(key) -> str:
    if isinstance(key, (tuple, list)):
        return ",".join(str(k) for k in key)
    return str(key)
