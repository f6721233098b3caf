"""Oriented surfaces of finite type, described by genus and puncture count."""

from dataclasses import dataclass

from .errors import PreconditionError


@dataclass(frozen=True)
class Surface:
    """An oriented surface of genus ``g`` with ``m`` punctures.

    The complexity ``xi = 3g - 3 + m`` counts the curves in a pants
    decomposition.  Internal helpers accept any surface with ``xi >= 1``;
    catalog surfaces additionally satisfy ``xi >= 2``.
    """

    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise PreconditionError("genus and puncture count must be nonnegative")
        if self.euler_characteristic >= 0:
            raise PreconditionError(
                f"surface ({self.genus},{self.punctures}) has nonnegative Euler characteristic"
            )
        if self.complexity < 1:
            raise PreconditionError(
                f"surface ({self.genus},{self.punctures}) has complexity < 1"
            )

    @property
    def complexity(self):
        return 3 * self.genus - 3 + self.punctures

    @property
    def euler_characteristic(self):
        return 2 - 2 * self.genus - self.punctures

    @property
    def is_non_exceptional(self):
        return self.complexity >= 2

    def max_generic_branches(self):
        """Branch count of a maximal generic track on this surface."""
        return 18 * self.genus - 18 + 6 * self.punctures

    def max_generic_switches(self):
        """Switch count of a maximal generic track on this surface."""
        return 12 * self.genus - 12 + 4 * self.punctures

    def max_generic_trigons(self):
        """Trigon count of a maximal generic track: ``4g - 4 + m``."""
        return 4 * self.genus - 4 + self.punctures

    def __str__(self):
        return f"S_{{{self.genus},{self.punctures}}}"
