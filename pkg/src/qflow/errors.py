"""Exceptions and warnings shared across the solvers."""


class QflowError(Exception):
    """Base class for package errors."""


class ValidationError(QflowError, ValueError):
    """Bad inputs or configuration (caller error, exit code 2 in the CLI)."""


class NodeEncountered(QflowError):
    """A wavefunction magnitude fell below the node floor.

    The hydrodynamic decomposition is only defined on nodeless states; the
    offending grid index is carried in ``index``.
    """

    def __init__(self, index, magnitude, floor):
        self.index = int(index)
        self.magnitude = float(magnitude)
        self.floor = float(floor)
        super().__init__(
            f"|psi| = {magnitude:.3e} at grid index {index} is at or below "
            f"the node floor {floor:.3e}; state is not nodeless"
        )


class TrajectoryCrossing(QflowError):
    """Two trajectories met (the flow map lost monotonicity)."""

    def __init__(self, index, time, detail=""):
        self.index = int(index)
        self.time = float(time)
        msg = f"trajectory crossing at label index {index}, t = {time:.6g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NumericalInstability(QflowError):
    """The time integration left its stability envelope (exit code 3)."""


class QtmDerivativeError(QflowError):
    """The scattered-particle derivative fit failed."""

    def __init__(self, particle, reason):
        self.particle = int(particle)
        super().__init__(f"derivative fit failed at particle {particle}: {reason}")


class PhaseInconsistencyWarning(UserWarning):
    """The two phase-assembly routes disagree beyond tolerance (non-fatal)."""


class WrapAroundRiskWarning(UserWarning):
    """Wavepacket density is approaching the periodic domain edge."""


class PathDisagreementWarning(UserWarning):
    """The two acceleration formulas disagree beyond tolerance on a snapshot."""
