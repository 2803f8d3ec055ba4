"""Exception hierarchy shared by all modules."""


class RicciFosterError(Exception):
    """Base class for every error raised by this package."""


class GraphError(RicciFosterError, ValueError):
    """A weighted graph violates one of its structural invariants."""


class DisconnectedGraph(GraphError):
    pass


class NonpositiveLength(GraphError):
    pass


class DanglingEndpoint(GraphError):
    pass


class DuplicateId(GraphError):
    pass


class UnknownVertex(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownEdge(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class LoopSubdivision(GraphError):
    pass


class SplitOutOfRange(GraphError):
    pass


class SameVertex(RicciFosterError, ValueError):
    pass


class InstanceTooLarge(RicciFosterError, ValueError):
    pass


class InvalidConfig(RicciFosterError, ValueError):
    pass


class StepTooLarge(RicciFosterError, ValueError):
    pass


class NumericalFailure(RicciFosterError, ArithmeticError):
    pass


class NoConvergence(RicciFosterError):
    """The Einstein solver ran out of iterations.

    The best iterate is kept on the exception so callers can still inspect it.
    """

    def __init__(self, message, lengths=None, certificate=None):
        super().__init__(message)
        self.lengths = lengths
        self.certificate = certificate
