"""Exception hierarchy shared by all modules."""


class SpectraError(Exception):
    """Base class for every error raised by loopy_spectra."""


# graph construction and parsing
class OutOfRangeNode(SpectraError, ValueError):
    pass


class MalformedMotif(SpectraError, ValueError):
    pass


class DisconnectedMotif(MalformedMotif):
    pass


class NetworkFormatError(SpectraError, ValueError):
    pass


# generators
class NotMultipleOfSix(SpectraError, ValueError):
    pass


class OddDegreeSum(SpectraError, ValueError):
    pass


class NotGraphical(SpectraError, ValueError):
    """No simple graph realizes the requested degree sequence."""


class GenerationFailed(SpectraError, RuntimeError):
    """Collision redraw did not reach a simple network within its budget."""


# message passing
class NumericalBreakdown(SpectraError, ArithmeticError):
    """A message update hit a (near) singular denominator.

    ``incidence`` is the flat incidence id, ``node``/``motif`` identify it
    in the network when known.
    """

    def __init__(self, message, incidence=None, node=None, motif=None):
        super().__init__(message)
        self.incidence = incidence
        self.node = node
        self.motif = motif


class NearSingular(NumericalBreakdown):
    pass


class GeometricSeriesDivergence(NumericalBreakdown):
    pass


class SingularMotifSolve(NumericalBreakdown):
    pass


class NotConverged(SpectraError, RuntimeError):
    def __init__(self, message, max_delta, iterations):
        super().__init__(message)
        self.max_delta = max_delta
        self.iterations = iterations


class GridTooNarrow(SpectraError, ValueError):
    pass


# closed form
class NonConvergentExtrapolation(SpectraError, RuntimeError):
    pass


# oracles
class TooLarge(SpectraError, ValueError):
    pass


class TooDeep(SpectraError, ValueError):
    pass


# cli / comparison
class DisjointGrids(SpectraError, ValueError):
    pass


class MalformedCSV(SpectraError, ValueError):
    pass
