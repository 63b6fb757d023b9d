"""The mode zoo: each family of evolution operators T(t) used by the library.

Four kinds of modes are supported:

* ``MatrixMode``        e^{tA} on R^n, via scaling-and-squaring (scipy.linalg.expm).
* ``ShiftAmplifyMode``  translation on a bounded interval that multiplies by a
  fixed factor exactly once, when a characteristic strictly crosses the
  amplification edge.  With the edge at an interior point this reproduces the
  "doubling at the hinge" transport pair on [-1, 1]; with the edge at 4^{-j}
  on [0, 1] it reproduces the amplifying cascade family.  The once-per-crossing
  rule is what makes the family an exact semigroup: T(t+s) = T(t) T(s) holds
  piece by piece on dyadic data.
* ``DiagonalGroupMode`` the scalar group e^{-mu t} I (invertible for every t).
* ``HalfLineShiftMode`` left translation on the half line with truncation at 0;
  strongly stable but with operator norm identically 1.

Transport is implemented directly on the piecewise representation, so dyadic
breakpoints evolve with exact double arithmetic.  All operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .errors import ContractViolation, StructuralError, UnsupportedOperation
from .state_space import PiecewiseConstantFn, canonicalize

__all__ = [
    "MatrixMode",
    "ShiftAmplifyMode",
    "DiagonalGroupMode",
    "HalfLineShiftMode",
    "matrix_mode",
    "apply",
    "apply_adjoint",
    "group_inverse_norm",
    "mode_state_kind",
    "mode_to_json",
    "mode_from_json",
]


@dataclass(frozen=True)
class MatrixMode:
    """Finite-dimensional mode x' = Ax, evolved by the matrix exponential."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise StructuralError("matrix mode requires a nonempty square matrix")
        if not all(math.isfinite(v) for r in rows for v in r):
            raise StructuralError("matrix mode entries must be finite")

    @cached_property
    def matrix(self) -> np.ndarray:
        a = np.array(self.rows, dtype=float)
        a.setflags(write=False)
        return a

    @property
    def dim(self) -> int:
        return len(self.rows)


def matrix_mode(A) -> MatrixMode:
    a = np.atleast_2d(np.asarray(A, dtype=float))
    return MatrixMode(tuple(tuple(row) for row in a))


@dataclass(frozen=True)
class ShiftAmplifyMode:
    """Transport on [domain_lo, domain_hi] with once-per-crossing amplification.

    direction "left" moves mass toward domain_lo; the crossing edge is
    ``amplify_hi``.  direction "right" moves mass toward domain_hi; the
    crossing edge is ``amplify_lo``.  Mass leaving the domain is discarded
    (zero extension), which makes every such mode nilpotent: T(t) = 0 once
    t reaches the domain length.
    """

    domain_lo: float
    domain_hi: float
    direction: str
    amplify_lo: float
    amplify_hi: float
    factor: float

    def __post_init__(self):
        for name in ("domain_lo", "domain_hi", "amplify_lo", "amplify_hi", "factor"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.direction not in ("left", "right"):
            raise StructuralError("direction must be 'left' or 'right'")
        if not self.domain_lo < self.domain_hi:
            raise StructuralError("empty spatial domain")
        if not (self.domain_lo <= self.amplify_lo <= self.amplify_hi <= self.domain_hi):
            raise StructuralError("amplify interval must lie inside the domain")
        if not (self.factor > 0 and math.isfinite(self.factor)):
            raise StructuralError("amplification factor must be positive and finite")

    @property
    def edge(self) -> float:
        """The spatial point whose crossing triggers the amplification."""
        return self.amplify_hi if self.direction == "left" else self.amplify_lo

    @property
    def domain(self) -> tuple:
        return (self.domain_lo, self.domain_hi)

    @property
    def length(self) -> float:
        return self.domain_hi - self.domain_lo


@dataclass(frozen=True)
class DiagonalGroupMode:
    """The scalar group T(t) = e^{-mu t} I, defined for all real t."""

    mu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise StructuralError("group rate mu must be positive")


@dataclass(frozen=True)
class HalfLineShiftMode:
    """Left translation (T(t)f)(s) = f(s+t) on the half line, truncated at 0."""



def mode_state_kind(mode) -> str:
    """'euclidean', 'function', or 'any' (scalar modes act on both)."""
    if isinstance(mode, MatrixMode):
        return "euclidean"
    if isinstance(mode, (ShiftAmplifyMode, HalfLineShiftMode)):
        return "function"
    if isinstance(mode, DiagonalGroupMode):
        return "any"
    raise StructuralError(f"unknown mode type {type(mode).__name__}")


# -- matrix exponential cache -------------------------------------------------

_EXPM_CACHE: dict = {}
_EXPM_CACHE_MAX = 200_000


def _expm(A: np.ndarray, t: float) -> np.ndarray:
    key = (A.tobytes(), A.shape[0], t)
    hit = _EXPM_CACHE.get(key)
    if hit is not None:
        return hit
    val = expm(A * t)
    if len(_EXPM_CACHE) >= _EXPM_CACHE_MAX:
        _EXPM_CACHE.clear()
    _EXPM_CACHE[key] = val
    return val


# -- transport kernels ---------------------------------------------------------


def _rebuild(f: PiecewiseConstantFn, candidates, value_at) -> PiecewiseConstantFn:
    """Build a piecewise function from candidate breakpoints and a sampler.

    ``candidates`` must contain every point where the output can change value;
    values are sampled at piece midpoints, which keeps dyadic data exact.
    """
    lo, hi = f.domain
    pts = sorted({c for c in candidates if lo < c < hi})
    edges = [lo] + pts + [hi]
    values = tuple(value_at(0.5 * (a + b)) for a, b in zip(edges[:-1], edges[1:]))
    return canonicalize(PiecewiseConstantFn(lo, hi, tuple(pts), values))


def _apply_shift_amplify(mode: ShiftAmplifyMode, t: float, f: PiecewiseConstantFn):
    if f.domain != mode.domain:
        raise StructuralError(
            f"state domain {f.domain} does not match mode domain {mode.domain}"
        )
    if t == 0.0:
        return canonicalize(f)
    A, B = mode.domain
    if t >= mode.length:
        return PiecewiseConstantFn.zero(A, B)
    c = mode.edge
    g = mode.factor
    if mode.direction == "left":
        # output s carries f(s+t); amplified on [c - t, c), the set of points
        # whose characteristic crossed the edge during [0, t]
        w_lo, w_hi = c - t, c
        cand = [b - t for b in f.edges()]
        cand += [w_lo, w_hi]

        def value_at(m):
            v = f.at(m + t)
            return v * g if (w_lo <= m < w_hi and v != 0.0) else v

    else:
        w_lo, w_hi = c, c + t
        cand = [b + t for b in f.edges()]
        cand += [w_lo, w_hi]

        def value_at(m):
            v = f.at(m - t)
            return v * g if (w_lo <= m < w_hi and v != 0.0) else v

    return _rebuild(f, cand, value_at)


def _apply_half_line(t: float, f: PiecewiseConstantFn):
    if f.domain_lo != 0.0:
        raise StructuralError("half-line states must live on [0, hi]")
    if t == 0.0:
        return canonicalize(f)
    if t >= f.domain_hi:
        return PiecewiseConstantFn.zero(0.0, f.domain_hi)
    cand = [b - t for b in f.edges()]
    return _rebuild(f, cand, lambda m: f.at(m + t))


# -- public operations ---------------------------------------------------------


def apply(mode, t: float, x):
    """Evolve the state ``x`` by ``mode`` for duration ``t >= 0``.

    Matrix modes require a coordinate state, transport modes a piecewise
    function on the mode's spatial domain; the scalar group acts on either.
    """
    if t < 0:
        raise ContractViolation("evolution time must be nonnegative")
    if isinstance(mode, MatrixMode):
        if not isinstance(x, np.ndarray):
            raise StructuralError("matrix modes act on coordinate states")
        if x.shape != (mode.dim,):
            raise StructuralError(
                f"state dimension {x.shape} does not match mode dimension {mode.dim}"
            )
        if mode.dim == 1:
            return x * math.exp(mode.rows[0][0] * t)
        return _expm(mode.matrix, t) @ x
    if isinstance(mode, DiagonalGroupMode):
        scale = math.exp(-mode.mu * t)
        if isinstance(x, np.ndarray):
            return x * scale
        if isinstance(x, PiecewiseConstantFn):
            return canonicalize(
                PiecewiseConstantFn(
                    x.domain_lo, x.domain_hi, x.breaks, tuple(v * scale for v in x.values)
                )
            )
        raise StructuralError(f"unknown state type {type(x).__name__}")
    if isinstance(mode, ShiftAmplifyMode):
        if not isinstance(x, PiecewiseConstantFn):
            raise StructuralError("transport modes act on piecewise-constant states")
        return _apply_shift_amplify(mode, t, x)
    if isinstance(mode, HalfLineShiftMode):
        if not isinstance(x, PiecewiseConstantFn):
            raise StructuralError("transport modes act on piecewise-constant states")
        return _apply_half_line(t, x)
    raise StructuralError(f"unknown mode type {type(mode).__name__}")


def apply_adjoint(mode, t: float, x: np.ndarray) -> np.ndarray:
    """Evolve by the adjoint semigroup e^{t A^T}; matrix modes only."""
    if not isinstance(mode, MatrixMode):
        raise UnsupportedOperation("adjoint evolution is only defined for matrix modes")
    if t < 0:
        raise ContractViolation("evolution time must be nonnegative")
    if not isinstance(x, np.ndarray) or x.shape != (mode.dim,):
        raise StructuralError("adjoint evolution needs a coordinate state of matching dim")
    if mode.dim == 1:
        return x * math.exp(mode.rows[0][0] * t)
    return _expm(np.ascontiguousarray(mode.matrix.T), t) @ x


def group_inverse_norm(mode, t: float) -> float:
    """Operator norm of the backward flow T(-t) for a scalar group mode."""
    if not isinstance(mode, DiagonalGroupMode):
        raise UnsupportedOperation("inverse-flow norm is only defined for group modes")
    if t < 0:
        raise ContractViolation("t must be nonnegative")
    return math.exp(mode.mu * t)


# -- serialization --------------------------------------------------------------


def mode_to_json(mode) -> dict:
    if isinstance(mode, MatrixMode):
        return {"kind": "matrix", "A": [list(r) for r in mode.rows]}
    if isinstance(mode, ShiftAmplifyMode):
        return {
            "kind": "shift_amplify",
            "domain": [mode.domain_lo, mode.domain_hi],
            "direction": mode.direction,
            "amplify": [mode.amplify_lo, mode.amplify_hi],
            "factor": mode.factor,
        }
    if isinstance(mode, DiagonalGroupMode):
        return {"kind": "diagonal_group", "mu": mode.mu}
    if isinstance(mode, HalfLineShiftMode):
        return {"kind": "half_line_shift"}
    raise StructuralError(f"unknown mode type {type(mode).__name__}")


def mode_from_json(obj: dict):
    try:
        kind = obj["kind"]
    except (KeyError, TypeError) as exc:
        raise StructuralError("mode JSON needs a 'kind' field") from exc
    if kind == "matrix":
        return matrix_mode(obj["A"])
    if kind == "shift_amplify":
        lo, hi = obj["domain"]
        alo, ahi = obj["amplify"]
        return ShiftAmplifyMode(lo, hi, obj["direction"], alo, ahi, obj["factor"])
    if kind == "diagonal_group":
        return DiagonalGroupMode(obj["mu"])
    if kind == "half_line_shift":
        return HalfLineShiftMode()
    raise StructuralError(f"unknown mode kind {kind!r}")
