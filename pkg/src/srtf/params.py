"""Working parameters shared by tree and forest training."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import InvalidArgumentError
from .exploration import KERNELS


@dataclass(frozen=True)
class WorkingParams:
    """Controls for SRT/SRF training.

    ``omega1`` caps the diagonal condition estimate of R, ``omega2`` is the
    minimum RMS improvement per added center, ``omega3`` fixes the shape
    parameter (kernel value at the farthest subset point) and ``omega4``
    multiplies the average center count to give the smallest splittable child.
    When ``omega2`` is ``None`` it becomes
    ``omega2_factor * epsilon * max|f_X|`` at training time.
    """

    epsilon: float = 0.01
    omega1: float = 1e8
    omega2: float | None = None
    omega2_factor: float = 1e-2
    omega3: float = 0.05
    omega4: float = 2.0
    kernel: str = "gaussian"
    beta: float = 1.0
    n_i_root: int | None = None
    n_i_factor: float = 100.0
    min_centers: int | None = None
    n_trees: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive")
        if not self.omega1 > 1:
            raise InvalidArgumentError("omega1 must exceed 1")
        if self.omega2 is not None and self.omega2 < 0:
            raise InvalidArgumentError("omega2 must be non-negative")
        if self.omega2_factor < 0:
            raise InvalidArgumentError("omega2_factor must be non-negative")
        if not 0 < self.omega3 < 1:
            raise InvalidArgumentError("omega3 must lie in (0, 1)")
        if not self.omega4 > 0:
            raise InvalidArgumentError("omega4 must be positive")
        if self.kernel not in KERNELS:
            raise InvalidArgumentError(f"unknown kernel {self.kernel!r}")
        if self.n_i_root is not None and self.n_i_root < 1:
            raise InvalidArgumentError("n_i_root must be positive")
        if not self.n_i_factor > 0:
            raise InvalidArgumentError("n_i_factor must be positive")
        if self.n_trees < 1:
            raise InvalidArgumentError("n_trees must be at least 1")

    def root_subset_size(self, n: int, dim: int) -> int:
        return min(n, self.n_i_root if self.n_i_root is not None else 500 * dim)

    def min_centers_for(self, dim: int) -> int:
        if self.min_centers is None:
            return dim + 3
        if self.min_centers < dim + 2:
            raise InvalidArgumentError(f"min_centers must be at least d+2 = {dim + 2}")
        return self.min_centers

    def omega2_for(self, target_scale: float) -> float:
        if self.omega2 is not None:
            return self.omega2
        return self.omega2_factor * self.epsilon * target_scale

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "WorkingParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**data)
