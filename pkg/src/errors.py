"""
Error types for the semigroup laboratory.

Every error carries the CLI exit code it maps to, so commands can translate
failures in a single place.
"""

from typing import Any, Dict, List, Optional


class LabError(Exception):
    """Base class for all laboratory failures (runtime failure, exit 3)"""

    exit_code = 3

    def details(self) -> Dict[str, Any]:
        return {'error': type(self).__name__, 'message': str(self)}


class OutsideDomain(LabError):
    pass


class MarginViolation(LabError):
    pass


class EmptySample(LabError):
    pass


class CurveExitsDomain(LabError):
    def __init__(self, message: str, segment: Optional[int] = None):
        super().__init__(message)
        self.segment = segment


class Unreachable(LabError):
    pass


class BadParameter(LabError):
    pass


class Unsupported(LabError):
    pass


class TrajectoryEscape(LabError):
    """A trajectory or an iterate left the domain"""

    def __init__(self, message: str, escape_time: Optional[float] = None,
                 failing_k: Optional[int] = None):
        super().__init__(message)
        self.escape_time = escape_time
        self.failing_k = failing_k

    def details(self) -> Dict[str, Any]:
        info = super().details()
        info.update({'escape_time': self.escape_time, 'failing_k': self.failing_k})
        return info


class StiffnessFailure(LabError):
    pass


class DegeneratePair(LabError):
    pass


class ContractViolation(LabError):
    pass


class Diverging(LabError):
    pass


class HypothesisNotMet(LabError):
    """A sampled hypothesis of an inequality does not hold (exit 4)"""

    exit_code = 4

    def __init__(self, message: str, hypothesis: str = '', witness: Any = None):
        super().__init__(message)
        self.hypothesis = hypothesis
        self.witness = witness

    def details(self) -> Dict[str, Any]:
        info = super().details()
        info.update({'hypothesis': self.hypothesis, 'witness': self.witness})
        return info


class NoDelta1(HypothesisNotMet):
    pass


class ConfigError(LabError):
    """Scenario configuration could not be validated (exit 2)"""

    exit_code = 2

    def __init__(self, problems: List[str]):
        super().__init__('; '.join(problems) if problems else 'invalid configuration')
        self.problems = list(problems)

    def details(self) -> Dict[str, Any]:
        info = super().details()
        info['problems'] = self.problems
        return info
