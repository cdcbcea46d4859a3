"""Gradient estimation for stochastic programs whose randomness branches.

Forward-mode dual numbers carry the smooth part of a derivative; discrete
Bernoulli draws carry theirs as weighted flipped-outcome alternatives,
pruned to one per run and re-simulated against a coupled continuation.
Score-function and finite-difference estimators of the same gradients are
included for comparison, along with a toy segmented-detector design study,
an exact enumeration oracle for small instances, and a CLI that writes the
study outputs as CSV/JSON.
"""

from .detector import (
    PROB_CEILING,
    PROB_FLOOR,
    DetectorParams,
    clamp_probability,
    interaction_probability,
    material_map,
)
from .discrete import (
    DiscreteAlternative,
    InvalidProbabilityError,
    PruningState,
    bernoulli_stochastic,
    prune_consider,
    pruned_weight,
)
from .dual import DomainError, Dual, constant, datan2, dcos, dexp, dsigmoid, dsin, dsqrt, lift, parameter
from .estimators import (
    EstimatorStats,
    GradientSample,
    Method,
    estimator_stats,
    gradient_samples,
    numeric_gradient,
    primal_losses,
    score_gradient,
    smooth_only_gradient,
    stochad_gradient,
)
from .experiments import (
    AdamState,
    OptimizerDivergedError,
    GradTableRow,
    OptRun,
    ScanGradRow,
    ScanLossRow,
    ScanResult,
    adam_step,
    grad_table,
    optimize,
    scan,
)
from .reference import BernoulliIdentity, SmoothPlusBernoulli
from .oracle import (
    InstanceTooLargeError,
    OracleError,
    PathOutcome,
    TinyInstance,
    enumerate_paths,
    exact_expectation,
    exact_gradient,
    tiny_energy_loss_instance,
)
from .sampling import AlternativeContext, DrawRecord, PrimalContext, PrimalTrace
from .simulate import (
    Event,
    Hit,
    LossProgram,
    Mode,
    ParticleState,
    SimConfig,
    Termination,
    Track,
    loss,
    propagate,
    run_alternative,
    simulate_event,
    split,
)
from .streams import EventStreams, OmegaFifo, RunRng, child_seed, draw_uniform, fifo_pop_or_draw, fifo_push

__version__ = "0.1.0"
