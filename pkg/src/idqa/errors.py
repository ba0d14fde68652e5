"""Exception hierarchy. CLI maps ValidationError to exit 1, NumericalError to exit 2."""


class IdqaError(Exception):
    pass


class ValidationError(IdqaError, ValueError):
    """Bad inputs: malformed models, schedules, configs, out-of-range arguments."""


class NumericalError(IdqaError, RuntimeError):
    """Integration or numerical failure at valid inputs."""


class StepSizeUnderflow(NumericalError):
    pass


class MaxStepsExceeded(NumericalError):
    pass


class NormDriftError(NumericalError):
    """State norm drifted beyond tolerance between renormalizations."""


class SingularAmplitudeError(NumericalError):
    """Amplitude hit zero with reg_floor=0; the nonlinear term divides by |c_i|^2."""
