"""Exception types shared across the package."""


class MHDShockError(Exception):
    """Base class; `step` names the stage of the iteration that failed."""

    def __init__(self, msg, step=None):
        self.step = step
        if step:
            msg = f"[{step}] {msg}"
        super().__init__(msg)


class DomainError(MHDShockError, ValueError):
    pass


class CavitationError(DomainError):
    pass


class ChokedFlowError(DomainError):
    pass


class NoAdmissibleShockError(DomainError):
    pass


class NoShockPositionError(DomainError):
    pass


class InconsistencyError(MHDShockError):
    pass


class FrontDegeneracyError(MHDShockError):
    pass


class RegimeLossError(MHDShockError):
    pass


class TrustRegionError(MHDShockError):
    pass


class StagnationError(MHDShockError):
    pass


class GeometryError(MHDShockError):
    pass


class ResonanceError(MHDShockError):
    pass


class DivergenceError(MHDShockError):
    pass


class ParityError(MHDShockError, TypeError):
    pass


class ConfigError(MHDShockError):
    def __init__(self, msg, line=None, path=None):
        self.line = line
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {msg}" if loc else msg)
