"""Exact algebra of piecewise-constant functions and coordinate states.

Piecewise-constant functions on a bounded interval are the state type for
the transport modes; plain 1-D numpy arrays are the states of the
finite-dimensional (Euclidean) modes.  All breakpoint arithmetic is plain
double arithmetic, so dyadic data (breakpoints k/2^m, dyadic shifts) is
handled exactly and structural equality of canonical forms doubles as
functional equality.

Everything here is immutable and the operations are pure, so they are safe
to call concurrently.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError, StructuralError

__all__ = [
    "PiecewiseConstantFn",
    "NormSpec",
    "lp_norm",
    "canonicalize",
    "linear_combine",
    "euclidean_state",
    "state_norm",
]


@dataclass(frozen=True)
class PiecewiseConstantFn:
    """A real function on [domain_lo, domain_hi] that is constant between breakpoints.

    ``values[i]`` is the value on the half-open piece ``[edge_i, edge_{i+1})``
    where the edges are ``domain_lo, *breaks, domain_hi``.  By convention the
    function is identically zero outside its domain; evaluation respects that.

    The constructor checks structure only (sorted breakpoints inside the
    domain, one more value than breakpoints).  Use :func:`canonicalize` to
    merge equal neighbours and drop zero-width pieces; canonical forms are
    unique, so ``==`` on canonical functions is function equality.
    """

    domain_lo: float
    domain_hi: float
    breaks: tuple = ()
    values: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "domain_lo", float(self.domain_lo))
        object.__setattr__(self, "domain_hi", float(self.domain_hi))
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not (math.isfinite(self.domain_lo) and math.isfinite(self.domain_hi)):
            raise StructuralError("domain endpoints must be finite")
        if not self.domain_lo < self.domain_hi:
            raise StructuralError("domain_lo must be strictly below domain_hi")
        if len(self.values) != len(self.breaks) + 1:
            raise StructuralError(
                f"need {len(self.breaks) + 1} values for {len(self.breaks)} "
                f"breakpoints, got {len(self.values)}"
            )
        prev = self.domain_lo
        for b in self.breaks:
            if not math.isfinite(b):
                raise StructuralError("breakpoints must be finite")
            if b < prev:
                raise StructuralError("breakpoints must be sorted")
            prev = b
        if self.breaks and self.breaks[-1] > self.domain_hi:
            raise StructuralError("breakpoints must lie within the domain")
        if self.breaks and self.breaks[0] < self.domain_lo:
            raise StructuralError("breakpoints must lie within the domain")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, domain_lo: float, domain_hi: float) -> "PiecewiseConstantFn":
        return cls(domain_lo, domain_hi, (), (0.0,))

    @classmethod
    def constant(cls, domain_lo: float, domain_hi: float, value: float) -> "PiecewiseConstantFn":
        return cls(domain_lo, domain_hi, (), (float(value),))

    @classmethod
    def indicator(
        cls, domain_lo: float, domain_hi: float, lo: float, hi: float, value: float = 1.0
    ) -> "PiecewiseConstantFn":
        """Indicator of [lo, hi) within the domain, scaled by ``value``."""
        lo = max(float(lo), float(domain_lo))
        hi = min(float(hi), float(domain_hi))
        if not lo < hi:
            return cls.zero(domain_lo, domain_hi)
        breaks = []
        values = []
        if lo > domain_lo:
            breaks.append(lo)
            values.append(0.0)
        values.append(float(value))
        if hi < domain_hi:
            breaks.append(hi)
            values.append(0.0)
        return canonicalize(cls(domain_lo, domain_hi, tuple(breaks), tuple(values)))

    # -- queries ---------------------------------------------------------

    @property
    def domain(self) -> tuple:
        return (self.domain_lo, self.domain_hi)

    def edges(self) -> tuple:
        return (self.domain_lo,) + self.breaks + (self.domain_hi,)

    def pieces(self):
        """Yield (lo, hi, value) triples covering the domain."""
        edges = self.edges()
        for i, v in enumerate(self.values):
            yield edges[i], edges[i + 1], v

    def at(self, s: float) -> float:
        """Point evaluation, with the zero-outside-the-domain convention."""
        if s < self.domain_lo or s >= self.domain_hi:
            return 0.0
        return self.values[bisect_right(self.breaks, s)]

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "domain": [self.domain_lo, self.domain_hi],
            "breaks": list(self.breaks),
            "values": list(self.values),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PiecewiseConstantFn":
        try:
            lo, hi = obj["domain"]
            return cls(lo, hi, tuple(obj["breaks"]), tuple(obj["values"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"bad piecewise-constant JSON: {exc}") from exc


@dataclass(frozen=True)
class NormSpec:
    """Which norm the state space carries.

    ``kind == "lp"`` means the L^p norm with exponent ``p`` on piecewise
    functions; ``kind == "euclidean"`` means the 2-norm on coordinate states.
    """

    p: float = 2.0
    kind: str = "lp"

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if self.kind not in ("lp", "euclidean"):
            raise StructuralError(f"unknown norm kind {self.kind!r}")
        if self.kind == "lp" and not (math.isfinite(self.p) and self.p >= 1.0):
            raise StructuralError("L^p exponent must satisfy 1 <= p < infinity")

    @classmethod
    def euclidean(cls) -> "NormSpec":
        return cls(2.0, "euclidean")

    def to_json(self) -> dict:
        return {"kind": self.kind, "p": self.p}

    @classmethod
    def from_json(cls, obj: dict) -> "NormSpec":
        return cls(obj.get("p", 2.0), obj.get("kind", "lp"))


def canonicalize(f: PiecewiseConstantFn) -> PiecewiseConstantFn:
    """Merge adjacent equal-value pieces and drop zero-width pieces.

    Idempotent; returns ``f`` itself when it is already canonical, so the
    result compares equal structurally iff it is equal as a function.
    """
    pieces = [(lo, hi, v) for lo, hi, v in f.pieces() if hi > lo]
    if not pieces:
        # degenerate: every piece had zero width, which cannot happen for a
        # valid domain; keep a single zero piece for safety
        return PiecewiseConstantFn.zero(f.domain_lo, f.domain_hi)
    merged = [list(pieces[0])]
    for lo, hi, v in pieces[1:]:
        if v == merged[-1][2]:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi, v])
    breaks = tuple(p[0] for p in merged[1:])
    values = tuple(p[2] for p in merged)
    if breaks == f.breaks and values == f.values:
        return f
    return PiecewiseConstantFn(f.domain_lo, f.domain_hi, breaks, values)


def lp_norm_pow(f: PiecewiseConstantFn, p: float) -> float:
    """The p-th power of the L^p norm, sum of |v|^p * piece length."""
    total = 0.0
    if p == 1.0:
        for lo, hi, v in f.pieces():
            if not math.isfinite(v):
                raise InvalidStateError("non-finite value in piecewise function")
            total += abs(v) * (hi - lo)
    elif p == 2.0:
        for lo, hi, v in f.pieces():
            if not math.isfinite(v):
                raise InvalidStateError("non-finite value in piecewise function")
            total += v * v * (hi - lo)
    else:
        for lo, hi, v in f.pieces():
            if not math.isfinite(v):
                raise InvalidStateError("non-finite value in piecewise function")
            total += abs(v) ** p * (hi - lo)
    return total


def lp_norm(f: PiecewiseConstantFn, spec: NormSpec) -> float:
    """L^p norm of ``f``.  Exact for dyadic data up to double rounding."""
    if spec.kind != "lp":
        raise StructuralError("piecewise functions carry an L^p norm, not a Euclidean one")
    p = spec.p
    total = lp_norm_pow(f, p)
    if p == 1.0:
        return total
    if p == 2.0:
        return math.sqrt(total)
    return total ** (1.0 / p)


def linear_combine(
    a: float, f: PiecewiseConstantFn, b: float, g: PiecewiseConstantFn
) -> PiecewiseConstantFn:
    """Pointwise a*f + b*g on the merged breakpoint grid, canonicalized."""
    if f.domain != g.domain:
        raise StructuralError(f"domain mismatch: {f.domain} vs {g.domain}")
    grid = sorted(set(f.breaks) | set(g.breaks))
    edges = [f.domain_lo] + grid + [f.domain_hi]
    values = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        m = 0.5 * (lo + hi)
        values.append(a * f.at(m) + b * g.at(m))
    return canonicalize(
        PiecewiseConstantFn(f.domain_lo, f.domain_hi, tuple(grid), tuple(values))
    )


def euclidean_state(coords) -> np.ndarray:
    """Validate and normalize a coordinate state to a float 1-D array."""
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise StructuralError("coordinate state must be a nonempty 1-D vector")
    if not np.all(np.isfinite(x)):
        raise InvalidStateError("coordinate state has non-finite entries")
    return x


def state_norm(x, spec: NormSpec) -> float:
    """Norm of a state under ``spec``, dispatching on the state kind."""
    if isinstance(x, PiecewiseConstantFn):
        return lp_norm(x, spec)
    if isinstance(x, np.ndarray):
        if spec.kind != "euclidean":
            raise StructuralError("coordinate states require a Euclidean norm spec")
        return float(np.linalg.norm(x))
    raise StructuralError(f"unknown state type {type(x).__name__}")
