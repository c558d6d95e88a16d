"""Exception types shared across the package."""


class RingformError(Exception):
    """Base class for all errors raised by this package."""


class CoincidentAgents(RingformError):
    """Two agents are closer than the coincidence tolerance; bearings are undefined."""


class InvalidOrder(RingformError):
    """Ring size below the minimum of three agents."""


class NotSymmetric(RingformError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""


class InvalidExponent(RingformError):
    """Control exponent outside (0, 1]."""


class DegenerateD(RingformError):
    """A subtended angle sits on {0, pi}, so the bearing diagonal is singular."""


class MixedSignViolated(RingformError):
    """Nonzero entries of D*sigma share one sign; decay-bound precondition fails."""


class PreconditionViolated(RingformError):
    """Matrix fails the null-space / semidefiniteness preconditions of the bound."""


class InfeasibleWinding(RingformError):
    """Winding number not coprime with n, or inconsistent with the target angle."""


class ScenarioError(RingformError):
    """Malformed or inconsistent scenario file."""


class CollisionError(RingformError):
    """A pairwise distance fell below the collision threshold during a step."""

    def __init__(self, time: float, pair: tuple[int, int], dist: float):
        self.time = time
        self.pair = pair
        self.dist = dist
        super().__init__(
            f"agents {pair[0]} and {pair[1]} at distance {dist:.3e} at t={time:.6f}"
        )
