"""Exception types shared across the library."""


class FockAprError(Exception):
    """Base class for all library-specific errors."""


class InvalidSpec(FockAprError):
    """Weight specification parameters violate the constraints of its kind."""


class NumericalBreakdown(FockAprError):
    """A dense eigensolve or factorization failed to converge."""


class QuadratureUnderResolved(FockAprError):
    """Doubling the quadrature resolution moved the result beyond tolerance."""


class RefinementStalled(FockAprError):
    """Local refinement improved too much over the coarse sphere sample,
    which signals that the initial sample was too sparse."""


class SandwichViolated(FockAprError):
    """A reducing operator failed its two-sided norm certification."""


class RegionTooSmall(FockAprError):
    """Per-cube ratios are still growing at the sweep boundary."""


class NotLatticePoint(FockAprError):
    """A point handed to the lattice walker is not on the step lattice."""


class SeriesDiverging(FockAprError):
    """Partial lattice sums keep growing shell over shell."""


class OverflowGuard(FockAprError):
    """Kernel exponent would exceed the double-precision range."""


class CubeOutsideGrid(FockAprError):
    """Requested cube is not contained in the quadrature grid interior."""


class PowerIterationStall(FockAprError):
    """Power iteration hit its iteration cap before reaching tolerance."""
