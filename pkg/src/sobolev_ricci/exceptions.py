"""Exception types raised across the package."""


class SobolevRicciError(Exception):
    """Base class for all package errors."""


class GraphError(SobolevRicciError, ValueError):
    pass


class NonPositiveLength(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class NotATree(GraphError):
    pass


class UnknownNode(SobolevRicciError, KeyError):
    pass


class SameNode(SobolevRicciError, ValueError):
    pass


class IsolatedNode(SobolevRicciError, ValueError):
    pass


class DegenerateSigma(SobolevRicciError, RuntimeWarning):
    """Every Gaussian weight underflowed; the measure fell back to a Dirac."""


class Unbalanced(SobolevRicciError, ValueError):
    pass


class TransportCertificateError(SobolevRicciError, RuntimeError):
    """The exact solver returned a plan whose duals fail complementary slackness."""


class AllEdgesCollapsed(SobolevRicciError, RuntimeError):
    pass


class CannotConnect(SobolevRicciError, RuntimeError):
    pass


class UnknownKind(SobolevRicciError, ValueError):
    pass


class SizeMismatch(SobolevRicciError, ValueError):
    pass


class MissingLabels(SobolevRicciError, ValueError):
    pass
