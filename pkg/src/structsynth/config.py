"""Parameter containers shared by the solver stages."""

from __future__ import annotations

from dataclasses import asdict, dataclass


class ParameterError(ValueError):
    """Raised for parameter values outside their documented domain."""


@dataclass(frozen=True)
class SolverParams:
    """Robot and building-block constants.

    Lengths are in cm. Defaults describe an 8 cm modular robot and its blocks.
    """

    L_B: float = 8.0
    dz_cliff: float = 4.0
    k_steep: float = 1.0
    d: float = 8.0
    alpha: float = 0.4
    normal_reject_rate: float = 0.10
    min_region_side: float = 8.0
    max_structure_cells: int = 256
    timeout: float = 600.0

    def __post_init__(self):
        for name in ("L_B", "dz_cliff", "k_steep", "d", "alpha",
                     "min_region_side", "max_structure_cells", "timeout"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be strictly positive")
        if self.dz_cliff > self.L_B:
            raise ParameterError("dz_cliff must not exceed L_B")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        if not 0 <= self.normal_reject_rate <= 1:
            raise ParameterError("normal_reject_rate must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CheckerboardSpec:
    """Random checkerboard benchmark layout.

    ``square_side`` is in grid cells and ``height_max``/``increment`` in cm.
    ``None`` means "derive from the block size" (6 L_B wide, 3 L_B high).
    """

    n: int = 3
    square_side: int | None = None
    height_max: float | None = None
    increment: float = 1.0
    seed: int = 0
    cell_size: float = 1.0
    L_B: float = 8.0

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("checkerboard needs n >= 2")
        if not self.increment > 0:
            raise ParameterError("increment must be positive")

    @property
    def side(self) -> int:
        if self.square_side is not None:
            return int(self.square_side)
        return int(round(6 * self.L_B / self.cell_size))

    @property
    def top(self) -> float:
        return float(self.height_max) if self.height_max is not None else 3 * self.L_B
