"""Single q-bit decoherence and quantum trajectories from repeated probe interactions."""
from .errors import DegenerateOutcomeError, InvariantViolation, QtrajError, ValidationError
from .states import DensityMatrix, PureState, SchmidtForm
from .measure import KrausPair
from .evolve import InteractionSpec, LindbladParams, TrajectoryRecord, EnsembleResult

__version__ = "0.1.0"
