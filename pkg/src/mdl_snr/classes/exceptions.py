class MdlSnrError(RuntimeError):
    pass


class DimensionError(MdlSnrError):
    pass


class ConfigurationError(MdlSnrError):
    pass


class ScenarioParseError(ConfigurationError):
    """
    Raised when a scenario file is not valid JSON.
    line and column point at the offending character.
    """

    def __init__(self, path, line, column, msg):
        self.path = path
        self.line = line
        self.column = column
        super().__init__(
            f"could not parse {path} at line {line}, column {column}: {msg}")


class ScenarioValidationError(ConfigurationError):
    """
    Raised with the full list of violated bounds, so a user
    can fix every field in one pass.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "scenario failed validation:\n"
        msg += "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(msg)


class NonConvergenceError(MdlSnrError):
    pass


class EqualizationError(MdlSnrError):

    def __init__(self, frequency_hz, condition_number):
        self.frequency_hz = frequency_hz
        self.condition_number = condition_number
        super().__init__(
            f"channel matrix is ill-conditioned at {frequency_hz:.6e} Hz "
            f"(condition number {condition_number:.3e})")


class EstimationError(MdlSnrError):
    pass


class EnsembleError(MdlSnrError):

    def __init__(self, failures, num_realizations):
        self.failures = dict(failures)
        self.num_realizations = num_realizations
        msg = (f"{len(self.failures)} of {num_realizations} "
               "realizations failed\n")
        for idx in sorted(self.failures)[:10]:
            msg += f"  realization {idx}: {self.failures[idx]}\n"
        super().__init__(msg)
