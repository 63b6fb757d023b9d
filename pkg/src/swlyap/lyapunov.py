"""Trajectory energy and the worst-case Lyapunov functionals.

Two candidate functionals are computed over a finite signal family:

* ``v_sup``   sup over signals of the whole-trajectory energy
  integral(0, inf) ||x(t)||^2 dt, reported with the maximizing signal.
* ``v_tilde`` integral of the pointwise-in-time sup of ||x(t)||^2 over the
  family, always >= the v_sup value on the same family.

Both are lower bounds of the corresponding suprema over all signals; the
family truncation is the only gap.  Segment energies are closed-form for the
scalar group, event-exact for transport (the squared norm is piecewise
polynomial in time there), and adaptive Simpson for matrix modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bounds import DecayBound
from .errors import ContractViolation
from .semigroups import DiagonalGroupMode, MatrixMode, ShiftAmplifyMode, apply
from .state_space import NormSpec, PiecewiseConstantFn, lp_norm_pow, state_norm
from .switching import (
    SignalFamily,
    SwitchedSystem,
    SwitchingSignal,
    enumerate_family,
    evolve,
)

__all__ = [
    "LyapunovEstimate",
    "DerivativeEstimate",
    "trajectory_cost",
    "v_sup",
    "v_tilde",
    "v_tilde_single_mode",
    "generalized_derivative",
    "augment_system",
    "default_derivative_grid",
]

DEFAULT_HORIZON = 10.0
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class LyapunovEstimate:
    """Value of a worst-case functional at one state.

    ``value`` is a certified lower bound of the true supremum (family
    truncation); ``value + tail_bound``, when the tail bound is present,
    is an upper bound for the witness's own infinite-horizon integral.
    """

    value: float
    witness: SwitchingSignal
    horizon: float
    tail_bound: float | None = None
    kind: str = "V"
    upper_bound: float | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "witness": self.witness.to_json(),
            "horizon": self.horizon,
            "tail_bound": self.tail_bound,
            "upper_bound": self.upper_bound,
            "bound_direction": "lower",
        }


@dataclass(frozen=True)
class DerivativeEstimate:
    """Sampled difference-quotient bound for the generalized derivative.

    The reported value is the minimum of (V(T_j(t)x) - V(x)) / t over the
    grid, an upper bound surrogate for the liminf as t tends to 0.
    """

    mode_id: int
    value: float
    t_grid: tuple

    def to_json(self) -> dict:
        return {"mode_id": self.mode_id, "value": self.value, "t_grid": list(self.t_grid)}


def default_derivative_grid() -> tuple:
    return tuple(2.0**-k for k in range(4, 21))


# -- quadrature ----------------------------------------------------------------


def _adaptive_simpson(g, a: float, b: float, rtol: float) -> float:
    """Adaptive Simpson; the tolerance is relative to the whole-interval estimate.

    The budget is split classically (eps halves with the interval), which both
    terminates on dead stretches of a decayed integrand and keeps refinement
    decisions scale-invariant, so scaling the integrand scales the result.
    """
    fa, fm, fb = g(a), g(0.5 * (a + b)), g(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps0 = rtol * (abs(whole) + 1e-300)

    def rec(a, b, fa, fm, fb, whole, eps, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        fine = left + right
        if depth <= 0 or abs(fine - whole) <= 15.0 * eps:
            return fine + (fine - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) + rec(
            m, b, fm, frm, fb, right, 0.5 * eps, depth - 1
        )

    return rec(a, b, fa, fm, fb, whole, eps0, 36)


_GL2 = ((-1.0 / math.sqrt(3.0), 1.0), (1.0 / math.sqrt(3.0), 1.0))
_GL16 = tuple(zip(*np.polynomial.legendre.leggauss(16)))


def _gauss(g, a: float, b: float, nodes) -> float:
    h = 0.5 * (b - a)
    m = 0.5 * (a + b)
    return h * sum(w * g(m + h * z) for z, w in nodes)


# -- per-segment energy ---------------------------------------------------------


def _transport_events(mode, f: PiecewiseConstantFn, d: float):
    """Times in (0, d) where the piecewise structure of the evolved state changes."""
    ev = set()
    if isinstance(mode, ShiftAmplifyMode):
        A, B = mode.domain
        c = mode.edge
        if mode.direction == "left":
            for b in f.edges():
                ev.add(b - A)
                ev.add(b - c)
            ev.add(c - A)
        else:
            for b in f.edges():
                ev.add(B - b)
                ev.add(c - b)
            ev.add(B - c)
        ev.add(B - A)
    else:  # half-line shift
        for b in f.edges():
            ev.add(b)
    return sorted(t for t in ev if 0.0 < t < d)


def _transport_energy(sys, mode, d: float, f: PiecewiseConstantFn) -> float:
    """integral(0, d) of ||T(tau) f||^2 dtau, event-exact for p in {1, 2}."""
    p = sys.norm.p
    cuts = [0.0] + _transport_events(mode, f, d) + [d]
    nodes = _GL2 if p in (1.0, 2.0) else _GL16

    def g(tau):
        s = lp_norm_pow(apply(mode, tau, f), p)
        if p == 2.0:
            return s
        if p == 1.0:
            return s * s
        return s ** (2.0 / p)

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            total += _gauss(g, a, b, nodes)
    return total


def _segment_energy(sys, mode, d: float, x, rtol: float) -> float:
    if d <= 0.0:
        return 0.0
    if isinstance(mode, DiagonalGroupMode):
        n2 = state_norm(x, sys.norm) ** 2
        return n2 * (1.0 - math.exp(-2.0 * mode.mu * d)) / (2.0 * mode.mu)
    if isinstance(mode, MatrixMode):
        if mode.dim == 1:
            a = mode.rows[0][0]
            n2 = float(x[0]) ** 2
            if a == 0.0:
                return n2 * d
            return n2 * math.expm1(2.0 * a * d) / (2.0 * a)

        def g(tau):
            y = apply(mode, tau, x)
            return float(y @ y)

        return _adaptive_simpson(g, 0.0, d, rtol)
    return _transport_energy(sys, mode, d, x)


def _walk_segments(sys, sig, horizon, x):
    """Yield (mode, dwell, state at segment start); final state is also returned."""
    plan = []
    remaining = horizon
    state = x
    for mode_id, dwell in sig.segments:
        if remaining <= 0.0:
            break
        step = dwell if dwell <= remaining else remaining
        mode = sys.mode(mode_id)
        plan.append((mode, step, state))
        state = apply(mode, step, state)
        remaining -= step
    if remaining > 0.0:
        mode = sys.mode(sig.tail_mode)
        plan.append((mode, remaining, state))
        state = apply(mode, remaining, state)
    return plan, state


def trajectory_cost(
    sys: SwitchedSystem,
    sig: SwitchingSignal,
    x,
    horizon: float,
    quad_tol: float = 1e-9,
    decay: DecayBound | None = None,
):
    """Energy integral(0, horizon) ||x(t)||^2 dt along one signal.

    Returns ``(integral, tail_bound)``.  The tail bound covers
    integral(horizon, inf) via the decay envelope when one is supplied
    (K^2 ||x(horizon)||^2 / (2 mu)); otherwise it is None and the result
    is flagged untailed by its absence.
    """
    if horizon <= 0:
        raise ContractViolation("horizon must be positive")
    if quad_tol <= 0:
        raise ContractViolation("quadrature tolerance must be positive")
    plan, final_state = _walk_segments(sys, sig, horizon, x)
    total = 0.0
    for mode, dwell, state in plan:
        total += _segment_energy(sys, mode, dwell, state, quad_tol)
    tail = None
    if decay is not None:
        n2 = state_norm(final_state, sys.norm) ** 2
        tail = decay.K**2 * n2 / (2.0 * decay.mu)
    return total, tail


# -- worst-case functionals ------------------------------------------------------


def _default_horizon(decay: DecayBound | None) -> float:
    if decay is None:
        return DEFAULT_HORIZON
    return max(DEFAULT_HORIZON, 5.0 / decay.mu)


def _refine_dwells(sys, x, sig, cost, horizon, quad_tol, step, max_evals=60):
    """Greedy local search: perturb each dwell by +-step while it improves."""
    best_sig, best_cost = sig, cost
    evals = 0
    improved = True
    while improved and evals < max_evals:
        improved = False
        for i, (mode_id, dwell) in enumerate(best_sig.segments):
            for delta in (step, -step):
                d_new = dwell + delta
                if d_new <= 0.0:
                    continue
                segs = list(best_sig.segments)
                segs[i] = (mode_id, d_new)
                cand = SwitchingSignal(tuple(segs), best_sig.tail_mode)
                c, _ = trajectory_cost(sys, cand, x, horizon, quad_tol)
                evals += 1
                if c > best_cost * (1.0 + _TIE_RTOL) + 1e-300:
                    best_sig, best_cost = cand, c
                    improved = True
    return best_sig, best_cost


def v_sup(
    sys: SwitchedSystem,
    x,
    fam: SignalFamily | None = None,
    horizon: float | None = None,
    quad_tol: float = 1e-9,
    decay: DecayBound | None = None,
    refine: bool = True,
) -> LyapunovEstimate:
    """Maximize the trajectory energy over a finite signal family.

    The result is a lower bound for the true sup over all signals; ties are
    broken by enumeration order, so equal-cost signals report the earliest.
    When a decay envelope is supplied the estimate also carries the certified
    upper bound (K^2 / (2 mu)) ||x||^2 and a tail bound for the witness.
    """
    if fam is None:
        fam = SignalFamily.default(sys.n_modes)
    if horizon is None:
        horizon = _default_horizon(decay)
    best_sig, best_cost = None, -1.0
    for sig in enumerate_family(fam):
        c, _ = trajectory_cost(sys, sig, x, horizon, quad_tol)
        if c > best_cost * (1.0 + _TIE_RTOL) + 1e-300:
            best_sig, best_cost = sig, c
    if refine and best_sig.segments:
        step = 0.5 * min(fam.dwell_grid)
        best_sig, best_cost = _refine_dwells(
            sys, x, best_sig, best_cost, horizon, quad_tol, step
        )
    _, tail = trajectory_cost(sys, best_sig, x, horizon, quad_tol, decay)
    upper = None
    if decay is not None:
        upper = decay.K**2 / (2.0 * decay.mu) * state_norm(x, sys.norm) ** 2
    return LyapunovEstimate(best_cost, best_sig, horizon, tail, "V", upper)


def v_tilde(
    sys: SwitchedSystem,
    x,
    fam: SignalFamily | None = None,
    horizon: float = DEFAULT_HORIZON,
    time_grid=None,
) -> LyapunovEstimate:
    """Integral of the pointwise-in-time sup of the squared norm over a family.

    Dominates the v_sup value on the same family up to quadrature error.  The
    reported witness is the single family signal with the largest energy on
    the same grid.
    """
    if fam is None:
        fam = SignalFamily.default(sys.n_modes)
    if time_grid is None:
        time_grid = np.linspace(0.0, horizon, 801)
    grid = np.asarray(time_grid, dtype=float)
    if grid.size < 2:
        raise ContractViolation("time grid must contain at least two points")
    signals = list(enumerate_family(fam))
    norms2 = np.empty((len(signals), grid.size))
    for i, sig in enumerate(signals):
        norms2[i] = [state_norm(evolve(sys, sig, float(t), x), sys.norm) ** 2 for t in grid]
    pointwise_sup = norms2.max(axis=0)
    value = float(np.trapezoid(pointwise_sup, grid))
    per_signal = np.trapezoid(norms2, grid, axis=1)
    witness = signals[int(np.argmax(per_signal))]
    return LyapunovEstimate(value, witness, float(grid[-1]), None, "V_tilde")


def v_tilde_single_mode(mode, mu: float, x, horizon: float = DEFAULT_HORIZON, grid=None) -> float:
    """Explicit single-mode variant with the scalar group folded in.

    Evaluates integral(0, horizon) of max over s in [0, tau] of
    e^{2 mu (s - tau)} ||T(s) x||^2, by a running-max recursion over the grid.
    """
    if mu <= 0:
        raise ContractViolation("mu must be positive")
    if grid is None:
        grid = np.linspace(0.0, horizon, 2001)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        raise ContractViolation("grid must contain at least two points")
    spec = NormSpec(2.0) if isinstance(x, PiecewiseConstantFn) else NormSpec.euclidean()
    g = np.array([state_norm(apply(mode, float(t), x), spec) ** 2 for t in grid])
    m = np.empty_like(g)
    m[0] = g[0]
    for i in range(1, grid.size):
        m[i] = max(m[i - 1] * math.exp(-2.0 * mu * (grid[i] - grid[i - 1])), g[i])
    return float(np.trapezoid(m, grid))


def generalized_derivative(
    v, sys: SwitchedSystem, mode_id: int, x, t_grid=None
) -> DerivativeEstimate:
    """Difference-quotient estimate of the generalized derivative along one mode.

    ``v`` is any evaluator mapping states to values.  The minimum quotient over
    the decreasing grid upper-bounds the liminf, which is the conservative
    direction when checking a decay condition of the form <= -||x||^2.
    """
    if t_grid is None:
        t_grid = default_derivative_grid()
    t_grid = tuple(sorted((float(t) for t in t_grid), reverse=True))
    if not t_grid or t_grid[-1] <= 0:
        raise ContractViolation("t grid must be positive")
    if t_grid[-1] < 1e-12:
        raise ContractViolation("smallest step is below the machine-safe threshold")
    mode = sys.mode(mode_id)
    v0 = v(x)
    value = math.inf
    for t in t_grid:
        q = (v(apply(mode, t, x)) - v0) / t
        if q < value:
            value = q
    return DerivativeEstimate(mode_id, value, t_grid)


def augment_system(sys: SwitchedSystem, mu: float) -> SwitchedSystem:
    """Append the scalar group e^{-mu t} I as an extra mode.

    The new mode commutes with every other mode, so any time its signal spends
    in it contributes exactly a factor e^{-mu t*} to the state norm.
    """
    if mu <= 0:
        raise ContractViolation("mu must be positive")
    return replace(sys, modes=sys.modes + (DiagonalGroupMode(mu),))
