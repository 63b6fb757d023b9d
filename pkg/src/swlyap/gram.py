"""Finite-dimensional Gram operators of switching signals.

For a signal whose tail mode is Hurwitz, the trajectory energy is the
quadratic form of the symmetric operator

    B = sum_k Phi_k' E_k Phi_k + Phi_tail' P Phi_tail

where E_k is the finite-segment energy integral of segment k, Phi_k the
state transition up to the segment, and P the stationary tail solution.
A finite set of such operators is the computable surrogate for the compact
candidate set behind the worst-case functional; the functional

    v_max(x) = max_B <x, Bx>

is then directionally differentiable with derivative
max over tied maximizers of 2 <psi, B x>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    ContractViolation,
    DegenerateInputError,
    EstimationError,
    StructuralError,
    UnstableTailError,
    UnsupportedOperation,
)
from .semigroups import DiagonalGroupMode, MatrixMode
from .switching import SignalFamily, SwitchedSystem, SwitchingSignal, enumerate_family

__all__ = [
    "GramOperator",
    "CandidateSet",
    "lyapunov_solve",
    "segment_energy",
    "gram_of_signal",
    "candidates_from_family",
    "v_max",
    "argmax_set",
    "ArgmaxSet",
    "directional_derivative",
]

DEFAULT_ARGMAX_TOL = 1e-9


def lyapunov_solve(A, Q) -> np.ndarray:
    """Solve A' P + P A = -Q for symmetric P, as a dense Kronecker system.

    Requires A Hurwitz; the result is the stationary energy operator
    integral(0, inf) e^{A' t} Q e^{A t} dt.  The residual is checked to
    1e-10 ||Q||.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise StructuralError("A and Q must be square matrices of the same size")
    eigs = np.linalg.eigvals(A)
    if np.max(eigs.real) >= -1e-12:
        raise UnstableTailError(
            f"matrix is not Hurwitz (max real eigenvalue {np.max(eigs.real):.3e})"
        )
    eye = np.eye(n)
    M = np.kron(eye, A.T) + np.kron(A.T, eye)
    vec_p = np.linalg.solve(M, -Q.reshape(-1, order="F"))
    P = vec_p.reshape((n, n), order="F")
    P = 0.5 * (P + P.T)
    residual = np.linalg.norm(A.T @ P + P @ A + Q)
    if residual > 1e-10 * max(np.linalg.norm(Q), 1e-30):
        raise EstimationError(f"Lyapunov residual too large: {residual:.3e}")
    return P


def segment_energy(A, d: float) -> np.ndarray:
    """Finite-segment energy integral(0, d) e^{A' t} e^{A t} dt.

    Uses the block-exponential construction: exponentiate
    [[-A', I], [0, A]] * d and combine the off-diagonal block with e^{A d}.
    """
    if d <= 0:
        raise ContractViolation("segment length must be positive")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A.T
    block[:n, n:] = np.eye(n)
    block[n:, n:] = A
    E = expm(block * d)
    G = E[n:, n:].T @ E[:n, n:]
    return 0.5 * (G + G.T)


@dataclass(frozen=True)
class GramOperator:
    """Symmetric PSD operator whose quadratic form is a signal's trajectory energy."""

    B: np.ndarray
    source_signal: SwitchingSignal

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        object.__setattr__(self, "B", B)
        n = B.shape[0]
        if B.shape != (n, n):
            raise StructuralError("Gram operator must be square")
        scale = max(1.0, float(np.linalg.norm(B, 2)))
        if np.linalg.norm(B - B.T, 2) > 1e-12 * scale:
            raise StructuralError("Gram operator must be symmetric")
        if float(np.min(np.linalg.eigvalsh(B))) < -1e-10 * scale:
            raise StructuralError("Gram operator must be positive semidefinite")

    @property
    def dim(self) -> int:
        return self.B.shape[0]

    def quad(self, x: np.ndarray) -> float:
        return float(x @ self.B @ x)

    def to_json(self) -> dict:
        return {"B": self.B.tolist(), "source_signal": self.source_signal.to_json()}


CandidateSet = tuple  # ordered tuple of GramOperator, shared dimension


def _mode_matrix(mode, dim: int) -> np.ndarray:
    if isinstance(mode, MatrixMode):
        return mode.matrix
    if isinstance(mode, DiagonalGroupMode):
        return -mode.mu * np.eye(dim)
    raise UnsupportedOperation("Gram operators are defined for coordinate systems only")


def _system_dim(sys: SwitchedSystem) -> int:
    for m in sys.modes:
        if isinstance(m, MatrixMode):
            return m.dim
    raise UnsupportedOperation("Gram operators need at least one matrix mode")


def gram_of_signal(sys: SwitchedSystem, sig: SwitchingSignal) -> GramOperator:
    """Assemble the trajectory-energy operator of one signal.

    The tail mode must be Hurwitz; otherwise the infinite-horizon energy does
    not exist and the signal is rejected rather than silently truncated.
    """
    dim = _system_dim(sys)
    B = np.zeros((dim, dim))
    Phi = np.eye(dim)
    for mode_id, dwell in sig.segments:
        Ak = _mode_matrix(sys.mode(mode_id), dim)
        B += Phi.T @ segment_energy(Ak, dwell) @ Phi
        Phi = expm(Ak * dwell) @ Phi
    A_tail = _mode_matrix(sys.mode(sig.tail_mode), dim)
    try:
        P = lyapunov_solve(A_tail, np.eye(dim))
    except UnstableTailError as exc:
        raise UnstableTailError(f"tail mode {sig.tail_mode} is not Hurwitz: {exc}") from exc
    B += Phi.T @ P @ Phi
    return GramOperator(0.5 * (B + B.T), sig)


def candidates_from_family(
    sys: SwitchedSystem, fam: SignalFamily | None = None, extra_signals=()
) -> CandidateSet:
    """Gram operators of every family signal plus any user-supplied signals."""
    if fam is None:
        fam = SignalFamily.default(sys.n_modes)
    cands = [gram_of_signal(sys, sig) for sig in enumerate_family(fam)]
    cands += [gram_of_signal(sys, sig) for sig in extra_signals]
    if not cands:
        raise StructuralError("candidate set must be nonempty")
    dims = {c.dim for c in cands}
    if len(dims) != 1:
        raise StructuralError("candidate Gram operators must share one dimension")
    return tuple(cands)


def v_max(cands: CandidateSet, x: np.ndarray) -> float:
    """max over candidates of the quadratic form <x, Bx>."""
    if not cands:
        raise StructuralError("candidate set must be nonempty")
    return max(c.quad(x) for c in cands)


@dataclass(frozen=True)
class ArgmaxSet:
    """Indices of the candidates attaining the max, up to a relative tolerance."""

    indices: tuple
    tol: float

    def __post_init__(self):
        if not self.indices:
            raise StructuralError("argmax set cannot be empty")


def argmax_set(cands: CandidateSet, x: np.ndarray, tol: float = DEFAULT_ARGMAX_TOL) -> ArgmaxSet:
    if float(np.linalg.norm(x)) == 0.0:
        raise DegenerateInputError("all candidates tie at x = 0; argmax set undefined")
    vals = [c.quad(x) for c in cands]
    vm = max(vals)
    cut = vm - tol * max(1.0, vm)
    return ArgmaxSet(tuple(i for i, v in enumerate(vals) if v >= cut), tol)


def directional_derivative(
    cands: CandidateSet, x: np.ndarray, psi: np.ndarray, tol: float = DEFAULT_ARGMAX_TOL
) -> float:
    """One-sided directional derivative of v_max at x along psi.

    Equals the max over tied maximizers of 2 <psi, B x>; at smooth points
    (singleton argmax) this is the classical quadratic-form pairing.
    """
    S = argmax_set(cands, x, tol)
    return max(2.0 * float(psi @ (cands[i].B @ x)) for i in S.indices)
