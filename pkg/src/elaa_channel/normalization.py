"""Analytic mean channel power and Frobenius normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fading import ChannelRealization, link_distances
from .los_state import los_probability
from .scenario import ArrayGeometry, ScenarioParams, UserLayout, distance_2d


@dataclass(frozen=True, eq=False)
class NormalizationConstant:
    expected_frobenius_sq: float
    per_link_power: np.ndarray

    @classmethod
    def from_link_power(cls, per_link_power: np.ndarray) -> "NormalizationConstant":
        per_link_power = np.asarray(per_link_power, dtype=float)
        return cls(float(per_link_power.sum()), per_link_power)


def expected_link_power(p_m, d_m, params: ScenarioParams):
    """Mean power E|h_m|^2 of a link that is LoS with probability ``p_m``.

    NLoS pairs (alpha, rho) and LoS pairs (beta, q); each branch carries its
    log-normal shadowing mean exp(sigma^2 / 2).
    """
    p_m = np.asarray(p_m, dtype=float)
    d_m = np.asarray(d_m, dtype=float)
    if np.any((p_m < 0) | (p_m > 1)) or np.any(np.isnan(p_m)):
        raise ValueError("p_m must lie in [0, 1]")
    if np.any(~(d_m > 0)):
        raise ValueError("d_m must be strictly positive")
    los = math.exp(params.sigma_los ** 2 / 2) * params.beta ** 2 / d_m ** (2 * params.q)
    nlos = math.exp(params.sigma_nlos ** 2 / 2) * params.alpha ** 2 / d_m ** (2 * params.rho)
    out = p_m * los + (1 - p_m) * nlos
    return out[()] if out.ndim == 0 else out


def link_los_probabilities(geometry: ArrayGeometry, users: UserLayout,
                           params: ScenarioParams) -> np.ndarray:
    """M x (K*N) LoS probabilities from each link's 2-D distance."""
    cols = users.column_positions()
    shape = (geometry.M, cols.shape[0])
    if params.p_los_override is not None:
        return np.full(shape, float(params.p_los_override))
    d2d = distance_2d(cols[None, :, :], geometry.positions[:, None, :])
    return los_probability(d2d, params.d1_bar, params.d2_bar)


def expected_frobenius_sq(geometry: ArrayGeometry, users: UserLayout, params: ScenarioParams,
                          visibility: Optional[np.ndarray] = None) -> NormalizationConstant:
    """Sum of per-link mean powers for one placed user layout.

    With ``visibility`` (per-antenna probability of lying inside a
    visibility region) the links are Rayleigh without shadowing and are
    weighted by that probability instead of the LoS mix.
    """
    d = link_distances(geometry, users, params)
    if visibility is not None:
        visibility = np.asarray(visibility, dtype=float)
        if visibility.shape != (geometry.M,):
            raise ValueError("visibility must have one entry per antenna")
        power = visibility[:, None] * params.alpha ** 2 / d ** (2 * params.rho)
    else:
        power = expected_link_power(link_los_probabilities(geometry, users, params), d, params)
    return NormalizationConstant.from_link_power(power)


def normalize(H, c) -> np.ndarray:
    """Divide H by the root of its expected squared Frobenius norm.

    ``c`` may be a NormalizationConstant or a plain scalar power.
    """
    if isinstance(H, ChannelRealization):
        H = H.H
    power = c.expected_frobenius_sq if isinstance(c, NormalizationConstant) else float(c)
    if not power > 0:
        raise ValueError(f"expected Frobenius power must be positive, got {power}")
    return np.asarray(H) / math.sqrt(power)
