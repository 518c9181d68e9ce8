"""Exception types raised across the package."""


class InfeasibleGeometryError(ValueError):
    """A waypoint geometry that no vessel can follow (e.g. a full reversal)."""


class DegenerateGeometryError(ValueError):
    """Relative motion is too small for CPA/TCPA to be defined."""


class NoActionRequiredError(ValueError):
    """Own ship is stand-on or not at risk, so no compliant region exists."""


class RegionTooSmallError(RuntimeError):
    """Rejection sampling exhausted its draw cap without an acceptance."""


class ScenarioError(ValueError):
    """A scenario file failed validation.

    ``field`` names the offending key (dotted path) and ``line`` the line of
    the source file where it appears, when it can be located.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = ""
        if field is not None:
            where = f"field '{field}'"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
