"""Switching signals, switched evolution, and operator-norm witnesses.

A switching signal is a finite list of (mode_id, dwell) segments followed by
a tail mode that stays active forever; signals are right-continuous and
dwells are strictly positive (no chattering).  ``evolve`` composes the mode
semigroups segment by segment, which on dyadic transport data is exact, so
the concatenation law

    evolve(sig, t + s, x) == evolve(shift_signal(sig, s), t, evolve(sig, s, x))

holds with zero error there (and to matrix-exponential accuracy otherwise).

The set of all signals is infinite; ``SignalFamily`` is the finite grid
surrogate used for suprema.  Anything maximized over a family is therefore a
certified lower bound of the true supremum, never an upper one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from .errors import ContractViolation, FamilySizeError, StructuralError
from .semigroups import apply, mode_state_kind
from .state_space import NormSpec, state_norm

__all__ = [
    "SwitchingSignal",
    "SwitchedSystem",
    "SignalFamily",
    "evolve",
    "shift_signal",
    "operator_norm_witness",
    "family_size",
    "enumerate_family",
]


@dataclass(frozen=True)
class SwitchingSignal:
    """(mode, dwell) segments followed by a tail mode active forever."""

    segments: tuple = ()
    tail_mode: int = 0

    def __post_init__(self):
        segs = tuple((int(m), float(d)) for m, d in self.segments)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "tail_mode", int(self.tail_mode))
        for i, (m, d) in enumerate(segs):
            if m < 0:
                raise StructuralError(f"segment {i}: mode id must be nonnegative")
            if not (d > 0 and math.isfinite(d)):
                raise StructuralError(f"segment {i}: dwell must be strictly positive")
        if self.tail_mode < 0:
            raise StructuralError("tail mode id must be nonnegative")

    @property
    def n_switches(self) -> int:
        return len(self.segments)

    def switch_times(self) -> tuple:
        out, acc = [], 0.0
        for _, d in self.segments:
            acc += d
            out.append(acc)
        return tuple(out)

    def active_mode(self, t: float) -> int:
        """Mode active at time t (right-continuous)."""
        if t < 0:
            raise ContractViolation("time must be nonnegative")
        acc = 0.0
        for m, d in self.segments:
            acc += d
            if t < acc:
                return m
        return self.tail_mode

    def max_mode_id(self) -> int:
        ids = [m for m, _ in self.segments] + [self.tail_mode]
        return max(ids)

    def to_json(self) -> dict:
        return {"segments": [[m, d] for m, d in self.segments], "tail": self.tail_mode}

    @classmethod
    def from_json(cls, obj: dict) -> "SwitchingSignal":
        try:
            return cls(tuple((m, d) for m, d in obj["segments"]), obj["tail"])
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"bad signal JSON: {exc}") from exc


@dataclass(frozen=True)
class SwitchedSystem:
    """An ordered list of modes sharing one state-space kind, plus its norm."""

    modes: tuple
    norm: NormSpec

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise StructuralError("a switched system needs at least one mode")
        kinds = {mode_state_kind(m) for m in self.modes}
        kinds.discard("any")
        if len(kinds) > 1:
            raise StructuralError(f"modes live on different state spaces: {sorted(kinds)}")
        if kinds == {"euclidean"} and self.norm.kind != "euclidean":
            raise StructuralError("coordinate modes require a Euclidean norm")
        if kinds == {"function"} and self.norm.kind != "lp":
            raise StructuralError("function-space modes require an L^p norm")

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode(self, mode_id: int):
        if not 0 <= mode_id < len(self.modes):
            raise StructuralError(f"mode id {mode_id} out of range for {len(self.modes)} modes")
        return self.modes[mode_id]


def evolve(sys: SwitchedSystem, sig: SwitchingSignal, t: float, x):
    """Apply the switched evolution operator of ``sig`` for duration ``t``."""
    if t < 0:
        raise ContractViolation("evolution time must be nonnegative")
    remaining = t
    state = x
    for mode_id, dwell in sig.segments:
        if remaining <= 0.0:
            break
        step = dwell if dwell <= remaining else remaining
        state = apply(sys.mode(mode_id), step, state)
        remaining -= step
    if remaining > 0.0:
        state = apply(sys.mode(sig.tail_mode), remaining, state)
    return state


def shift_signal(sig: SwitchingSignal, s: float) -> SwitchingSignal:
    """The signal seen by an observer starting at time ``s``."""
    if s < 0:
        raise ContractViolation("shift must be nonnegative")
    if s == 0.0:
        return sig
    remaining = s
    for i, (mode_id, dwell) in enumerate(sig.segments):
        if remaining < dwell:
            head = ((mode_id, dwell - remaining),)
            return SwitchingSignal(head + sig.segments[i + 1 :], sig.tail_mode)
        remaining -= dwell
    return SwitchingSignal((), sig.tail_mode)


def operator_norm_witness(sys: SwitchedSystem, sig: SwitchingSignal, t: float, witnesses) -> float:
    """Certified lower bound on the operator norm of the evolution at time t.

    Returns the largest norm ratio over the supplied witness states.  This is
    a lower bound of the true operator norm; it equals it only when the
    witness set contains a maximizing direction.
    """
    witnesses = list(witnesses)
    if not witnesses:
        raise ContractViolation("need at least one witness state")
    best = 0.0
    for w in witnesses:
        nw = state_norm(w, sys.norm)
        if nw == 0.0:
            raise ContractViolation("witness states must be nonzero")
        ratio = state_norm(evolve(sys, sig, t, w), sys.norm) / nw
        if ratio > best:
            best = ratio
    return best


DEFAULT_DWELL_GRID = (0.25, 0.5, 1.0)
DEFAULT_MAX_SWITCHES = 2
_ENUMERATION_LIMIT = 500_000


@dataclass(frozen=True)
class SignalFamily:
    """Finite grid of signals: all mode words with dwells from a fixed grid."""

    dwell_grid: tuple
    max_switches: int
    mode_ids: tuple

    def __post_init__(self):
        grid = tuple(sorted(float(d) for d in self.dwell_grid))
        object.__setattr__(self, "dwell_grid", grid)
        object.__setattr__(self, "max_switches", int(self.max_switches))
        object.__setattr__(self, "mode_ids", tuple(int(m) for m in self.mode_ids))
        if not grid or any(d <= 0 or not math.isfinite(d) for d in grid):
            raise StructuralError("dwell grid must be nonempty with positive entries")
        if self.max_switches < 0:
            raise StructuralError("max_switches must be nonnegative")
        if not self.mode_ids or any(m < 0 for m in self.mode_ids):
            raise StructuralError("mode id set must be nonempty and nonnegative")

    @classmethod
    def default(cls, n_modes: int) -> "SignalFamily":
        return cls(DEFAULT_DWELL_GRID, DEFAULT_MAX_SWITCHES, tuple(range(n_modes)))


def family_size(fam: SignalFamily) -> int:
    n, d = len(fam.mode_ids), len(fam.dwell_grid)
    return sum(n ** (k + 1) * d**k for k in range(fam.max_switches + 1))


def enumerate_family(fam: SignalFamily, limit: int = _ENUMERATION_LIMIT):
    """Deterministic enumeration, lexicographic in (switch count, modes, dwells)."""
    count = family_size(fam)
    if count > limit:
        raise FamilySizeError(count, limit)

    def gen():
        for k in range(fam.max_switches + 1):
            for word in product(fam.mode_ids, repeat=k + 1):
                for dwells in product(fam.dwell_grid, repeat=k):
                    yield SwitchingSignal(tuple(zip(word[:-1], dwells)), word[-1])

    return gen()
