"""Worst-case Lyapunov analysis of switched semigroup systems.

Simulates switched evolution operators exactly on piecewise-constant
transport data and to matrix-exponential accuracy on coordinate data,
searches finite signal families for worst-case trajectory energy, and turns
the resulting bounds into exponential growth/decay certificates.
"""

from .bounds import DatkoCertificate, DecayBound, GrowthBound, NormEquivalence
from .certificates import (
    ConditionReport,
    FitRefusal,
    condition_report,
    datko_certificate,
    fit_decay,
    fit_growth,
    gronwall_certificate,
    group_lower_bound,
)
from .errors import (
    ContractViolation,
    DegenerateInputError,
    EstimationError,
    FamilySizeError,
    InvalidStateError,
    StructuralError,
    SwlyapError,
    UnstableTailError,
    UnsupportedOperation,
)
from .gram import (
    ArgmaxSet,
    GramOperator,
    argmax_set,
    candidates_from_family,
    directional_derivative,
    gram_of_signal,
    lyapunov_solve,
    segment_energy,
    v_max,
)
from .lyapunov import (
    DerivativeEstimate,
    LyapunovEstimate,
    augment_system,
    generalized_derivative,
    trajectory_cost,
    v_sup,
    v_tilde,
    v_tilde_single_mode,
)
from .semigroups import (
    DiagonalGroupMode,
    HalfLineShiftMode,
    MatrixMode,
    ShiftAmplifyMode,
    apply,
    apply_adjoint,
    group_inverse_norm,
    matrix_mode,
)
from .state_space import (
    NormSpec,
    PiecewiseConstantFn,
    canonicalize,
    euclidean_state,
    linear_combine,
    lp_norm,
    state_norm,
)
from .switching import (
    SignalFamily,
    SwitchedSystem,
    SwitchingSignal,
    enumerate_family,
    evolve,
    family_size,
    operator_norm_witness,
    shift_signal,
)

__version__ = "0.1.0"
