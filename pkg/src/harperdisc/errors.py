"""Exception hierarchy shared by all harperdisc modules."""


class HarperError(Exception):
    """Base class for every error raised by harperdisc."""


class DomainError(HarperError, ValueError):
    pass


class NonConvergence(HarperError, ArithmeticError):
    pass


class NoBracket(HarperError, ValueError):
    pass


class NotCoprime(HarperError, ValueError):
    pass


class ParityError(HarperError, ValueError):
    pass


class DecompositionError(HarperError, ValueError):
    pass


class PrecisionTooLow(HarperError, ArithmeticError):
    pass


class SingularityError(DomainError):
    pass


class EdgeNotFound(HarperError, ArithmeticError):
    pass


class ClusteringAmbiguous(HarperError):
    pass
