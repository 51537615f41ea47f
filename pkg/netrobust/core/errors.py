"""
Fehlerklassen für netrobust.
"""


class NetRobustError(Exception):
    """Basisklasse aller fachlichen Fehler."""


class ParameterError(NetRobustError, ValueError):
    """Ungültige Modell- oder Algorithmusparameter."""


class UndefinedValueError(NetRobustError):
    """Kennzahl ist für die gegebene Eingabe nicht definiert (z.B. keine verbundenen Paare)."""


class DomainError(NetRobustError, ValueError):
    """Wert außerhalb des Definitionsbereichs eines Funktionals (z.B. superkritisches Atom)."""


class ConvergenceError(NetRobustError):
    """Iteratives Verfahren hat nicht konvergiert."""

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateRiskError(NetRobustError):
    """Baseline-Risiko degeneriert (z.B. R0 = 0 über alle Replikate)."""


class TruncationDegenerateError(NetRobustError):
    """Trunkierte Posterior hat fast keine Masse im subkritischen Bereich."""

    def __init__(self, message: str, acceptance_rate: float = 0.0):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate
