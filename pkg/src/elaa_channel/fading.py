"""Per-link complex channel coefficients and channel-matrix synthesis.

Small-scale terms are circularly-symmetric complex Gaussians with unit
mean-square. Shadowing is a linear power multiplier, so it enters the
amplitude under a square root.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .scenario import ArrayGeometry, ScenarioParams, UserLayout, distance_3d

if TYPE_CHECKING:
    from .los_state import LinkStateVector


@dataclass(frozen=True)
class LinkCoefficient:
    """Complex link amplitude with an optional breakdown of its factors."""

    value: np.ndarray | complex
    path_gain: Optional[np.ndarray | float] = None
    los_phase: Optional[np.ndarray | complex] = None
    small_scale: Optional[np.ndarray | complex] = None


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """An M x (K*N) channel matrix; columns are ordered user-major."""

    H: np.ndarray
    states: tuple
    expected_frobenius_sq: Optional[float] = None

    @property
    def shape(self):
        return self.H.shape


def complex_gaussian(rng: np.random.Generator, size=None) -> np.ndarray | complex:
    """CN(0, 1) samples: real part drawn first, then imaginary part."""
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return (re + 1j * im) / np.sqrt(2.0)


def _check_distance(d_m) -> np.ndarray:
    d_m = np.asarray(d_m, dtype=float)
    if np.any(~(d_m > 0)):
        raise ValueError("link distance must be strictly positive")
    return d_m


def los_phase(d_m, wavelength: float) -> np.ndarray:
    """Unit-modulus phase exp(-j 2 pi d / lambda) of the direct path."""
    return np.exp(-2j * np.pi * np.asarray(d_m, dtype=float) / wavelength)


def nlos_coefficient(d_m, alpha: float, rho: float, rng: np.random.Generator,
                     size=None) -> LinkCoefficient:
    """Rayleigh link ``(alpha / d**rho) * omega``."""
    d_m = _check_distance(d_m)
    gain = alpha / d_m ** rho
    if size is None:
        size = d_m.shape or None
    omega = complex_gaussian(rng, size)
    return LinkCoefficient(gain * omega, path_gain=gain, small_scale=omega)


def los_coefficient(d_m, beta: float, q: float, kappa, wavelength: float,
                    rng: np.random.Generator, size=None) -> LinkCoefficient:
    """Rician link with K-factor ``kappa``; its mean power is ``beta**2 / d**(2q)``."""
    d_m = _check_distance(d_m)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(~(kappa > 0)):
        raise ValueError("Rician K-factor must be strictly positive")
    gain = beta / d_m ** q
    phi = los_phase(d_m, wavelength)
    if size is None:
        size = np.broadcast_shapes(d_m.shape, kappa.shape) or None
    omega = complex_gaussian(rng, size)
    value = gain * (np.sqrt(kappa / (kappa + 1)) * phi + np.sqrt(1 / (kappa + 1)) * omega)
    return LinkCoefficient(value, path_gain=gain, los_phase=phi, small_scale=omega)


def mixed_coefficient(b, shadow_los, shadow_nlos, los_part: LinkCoefficient,
                      nlos_part: LinkCoefficient) -> LinkCoefficient:
    """Select the LoS or NLoS branch by ``b`` and scale it by the root of its shadowing."""
    b = np.asarray(b)
    if not np.all((b == 0) | (b == 1)):
        raise ValueError("link state must be 0 (NLoS) or 1 (LoS)")
    shadow_los = np.asarray(shadow_los, dtype=float)
    shadow_nlos = np.asarray(shadow_nlos, dtype=float)
    if np.any(~(shadow_los > 0)) or np.any(~(shadow_nlos > 0)):
        raise ValueError("shadowing multipliers must be strictly positive")
    value = np.where(b == 1, np.sqrt(shadow_los) * los_part.value,
                     np.sqrt(shadow_nlos) * nlos_part.value)
    if value.ndim == 0:
        value = value[()]
    return LinkCoefficient(value)


def sample_shadowing(sigma: float, rng: np.random.Generator, size=None):
    """Log-normal power multiplier exp(sigma * z), z ~ N(0, 1)."""
    if sigma < 0:
        raise ValueError(f"shadowing spread must be non-negative, got {sigma}")
    return np.exp(sigma * rng.standard_normal(size))


def sample_kappa(mu_kappa: float, sigma_kappa: float, rng: np.random.Generator, size=None):
    """Rician K-factor ~ LogNormal(mu_kappa, sigma_kappa)."""
    if sigma_kappa < 0:
        raise ValueError("sigma_kappa must be non-negative")
    return np.exp(mu_kappa + sigma_kappa * rng.standard_normal(size))


def link_distances(geometry: ArrayGeometry, users: UserLayout, params: ScenarioParams) -> np.ndarray:
    """M x (K*N) matrix of 3-D link distances (all ones under ``unit_distance``)."""
    cols = users.column_positions()
    if params.unit_distance:
        return np.ones((geometry.M, cols.shape[0]))
    return distance_3d(geometry.positions[:, None, :], cols[None, :, :])


def channel_matrix(geometry: ArrayGeometry, users: UserLayout,
                   states: Sequence["LinkStateVector"], params: ScenarioParams,
                   rng: np.random.Generator) -> ChannelRealization:
    """Build H column by column from each user's link-state vector.

    All antennas of user k use ``states[k]``; the small-scale draws are
    independent across every (antenna, column) pair and are taken in one
    M x (K*N) block.
    """
    K, N, M = users.K, users.n_per_user, geometry.M
    if len(states) != K:
        raise ValueError(f"expected {K} state vectors, got {len(states)}")
    for s in states:
        if s.M != M:
            raise ValueError(f"state vector has {s.M} antennas, array has {M}")

    d = link_distances(geometry, users, params)
    b = np.repeat(np.stack([s.states for s in states], axis=1), N, axis=1)
    eps = np.repeat(np.stack([s.antenna_shadowing() for s in states], axis=1), N, axis=1)
    kappa = np.repeat(np.stack([s.antenna_kappa() for s in states], axis=1), N, axis=1)
    visibility = np.repeat(np.array([s.visibility for s in states]), N)

    omega = complex_gaussian(rng, (M, K * N))
    nlos = params.alpha / d ** params.rho * omega
    kappa = np.where(np.isnan(kappa), 1.0, kappa)
    phi = los_phase(d, params.wavelength)
    los = params.beta / d ** params.q * (np.sqrt(kappa / (kappa + 1)) * phi
                                         + np.sqrt(1 / (kappa + 1)) * omega)
    H = np.where(b == 1, los, nlos) * np.sqrt(eps)
    # visibility-region vectors: visible links are Rayleigh, the rest carry nothing
    if visibility.any():
        H[:, visibility] = np.where(b[:, visibility] == 1, nlos[:, visibility], 0.0)
    return ChannelRealization(H, tuple(states))
