"""Scenario parameters, antenna-array and user geometry.

Coordinates are right-handed in meters: x runs along the array axis,
y is the horizontal broadside direction and z is vertical.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
DEFAULT_CARRIER_HZ = 3.5e9


def wavelength_from_frequency(frequency_hz: float) -> float:
    if frequency_hz <= 0:
        raise ValueError(f"carrier frequency must be positive, got {frequency_hz}")
    return SPEED_OF_LIGHT / frequency_hz


@dataclass(frozen=True)
class ScenarioParams:
    """Physical constants of the propagation scenario (UMi street canyon by default).

    Shadowing spreads ``sigma_los``/``sigma_nlos`` and the K-factor spread are
    natural-log standard deviations of the *linear power* quantities, not dB.

    ``p_los_override`` pins the LoS probability of every link (used by the
    model presets); ``unit_distance`` replaces every link distance by 1 m.
    """

    alpha: float = 0.020
    rho: float = 1.765
    beta: float = 0.007
    q: float = 1.050
    mu_kappa: float = 2.07
    sigma_kappa: float = 1.15
    sigma_los: float = 0.92
    sigma_nlos: float = 1.80
    d1_bar: float = 18.0
    d2_bar: float = 36.0
    d_cor: float = 5000.0
    wavelength: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
    antenna_height: float = 10.0
    user_height: float = 1.5
    p_los_override: Optional[float] = None
    unit_distance: bool = False

    def __post_init__(self):
        for name in ("d1_bar", "d2_bar", "d_cor", "wavelength", "rho", "q"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value}")
        for name in ("alpha", "beta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("sigma_kappa", "sigma_los", "sigma_nlos"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.antenna_height < 0 or self.user_height < 0:
            raise ValueError("heights must be non-negative")
        if self.p_los_override is not None and not 0.0 <= self.p_los_override <= 1.0:
            raise ValueError("p_los_override must lie in [0, 1]")

    def replace(self, **changes) -> "ScenarioParams":
        return dataclasses.replace(self, **changes)


class ArrayLayout(str, Enum):
    ULA = "ula"
    URA = "ura"


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Service-antenna positions.

    For a URA the element order is row-major with row 0 the lowest row, so
    element ``(r, c)`` sits at index ``r * cols + c``.
    """

    layout: ArrayLayout
    rows: int
    cols: int
    spacing: float
    positions: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.rows * self.cols

    @property
    def length(self) -> float:
        """Horizontal aperture along the array axis."""
        return (self.cols - 1) * self.spacing

    @property
    def center(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def row(self, r: int) -> np.ndarray:
        return self.positions[r * self.cols:(r + 1) * self.cols]


def _horizontal_origin(origin: Sequence[float]) -> tuple[float, float]:
    origin = tuple(float(v) for v in origin)
    if len(origin) not in (2, 3):
        raise ValueError("origin must have 2 or 3 coordinates")
    return origin[0], origin[1]


def build_ula(M: int, spacing: Optional[float] = None, origin: Sequence[float] = (0.0, 0.0),
              height: float = 10.0, wavelength: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ
              ) -> ArrayGeometry:
    """Uniform linear array along +x at the given height.

    ``spacing`` defaults to half a wavelength. Only the horizontal part of
    ``origin`` is used; the height is set by ``height``.
    """
    if spacing is None:
        spacing = wavelength / 2
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    x0, y0 = _horizontal_origin(origin)
    pos = np.zeros((int(M), 3))
    pos[:, 0] = x0 + np.arange(M) * spacing
    pos[:, 1] = y0
    pos[:, 2] = height
    return ArrayGeometry(ArrayLayout.ULA, 1, int(M), float(spacing), pos)


def build_ura(rows: int, cols: int, spacing: Optional[float] = None,
              origin: Sequence[float] = (0.0, 0.0), height: float = 10.0,
              wavelength: float = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ) -> ArrayGeometry:
    """Uniform rectangular array in the x-z plane, lowest row at ``height``."""
    if spacing is None:
        spacing = wavelength / 2
    for name, v in (("rows", rows), ("cols", cols)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v}")
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    x0, y0 = _horizontal_origin(origin)
    r, c = np.divmod(np.arange(rows * cols), cols)
    pos = np.column_stack([x0 + c * spacing, np.full(rows * cols, y0), height + r * spacing])
    return ArrayGeometry(ArrayLayout.URA, int(rows), int(cols), float(spacing), pos.astype(float))


def distance_3d(a, b) -> np.ndarray:
    """Euclidean distance, broadcasting over leading dimensions."""
    return np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), axis=-1)


def distance_2d(user, antenna) -> np.ndarray:
    """Distance between horizontal projections (heights ignored)."""
    diff = np.asarray(user, dtype=float)[..., :2] - np.asarray(antenna, dtype=float)[..., :2]
    return np.linalg.norm(diff, axis=-1)


class Density(str, Enum):
    HIGH = "high"
    LOW = "low"

    @property
    def line_range(self) -> float:
        return 1.0 if self is Density.HIGH else 20.0


@dataclass(frozen=True, eq=False)
class UserLayout:
    """K users with ``n_per_user`` co-located antennas on a line parallel to the array.

    The segment of length ``line_range`` is centred at ``center_x`` and lies
    ``distance`` meters in front of the array (along +y).
    """

    K: int
    n_per_user: int = 4
    density: Density = Density.HIGH
    distance: float = 40.0
    center_x: float = 0.0
    height: float = 1.5
    line_range: Optional[float] = None
    positions: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "density", Density(self.density))
        if self.line_range is None:
            object.__setattr__(self, "line_range", self.density.line_range)
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.n_per_user < 1:
            raise ValueError(f"n_per_user must be >= 1, got {self.n_per_user}")
        if not self.line_range > 0:
            raise ValueError("line_range must be positive")
        if self.positions is not None and np.shape(self.positions) != (self.K, 3):
            raise ValueError(f"positions must have shape ({self.K}, 3)")

    @property
    def n_total(self) -> int:
        return self.K * self.n_per_user

    def with_positions(self, positions: np.ndarray) -> "UserLayout":
        return dataclasses.replace(self, positions=np.asarray(positions, dtype=float))

    def column_positions(self) -> np.ndarray:
        """Position of every transmit antenna, in column order (user-major)."""
        if self.positions is None:
            raise ValueError("user positions have not been placed")
        return np.repeat(self.positions, self.n_per_user, axis=0)


def place_users(layout: UserLayout, rng: np.random.Generator) -> np.ndarray:
    """Draw K positions i.i.d. uniform on the layout's segment."""
    if layout.K < 1:
        raise ValueError("need at least one user")
    half = layout.line_range / 2
    x = rng.uniform(layout.center_x - half, layout.center_x + half, size=layout.K)
    pos = np.empty((layout.K, 3))
    pos[:, 0] = x
    pos[:, 1] = layout.distance
    pos[:, 2] = layout.height
    return pos


def half_wavelength_spacing(geometry: ArrayGeometry, wavelength: float) -> bool:
    return math.isclose(geometry.spacing, wavelength / 2, rel_tol=1e-9)
