"""Correlated NLoS/LoS link states along the service array.

The generator walks the array from antenna 0. The current window's anchor
draws its state from the UMi LoS probability at its own 2-D distance; each
following antenna joins the window with probability
``exp(-Delta(anchor, m) / d_cor)``. The first antenna that fails to join
becomes a new anchor and redraws its state independently.

Random numbers are consumed in a fixed order per call: one uniform per site
for anchor states, one uniform per site for the join tests, one standard
normal per window for shadowing, then one standard normal per LoS window for
the K-factor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .scenario import ArrayGeometry, ArrayLayout, ScenarioParams, distance_2d


@dataclass(frozen=True, eq=False)
class LinkStateVector:
    """Binary state per antenna plus the window partition that produced it.

    Windows record generator segmentation: two adjacent windows may share a
    state. ``kappa`` is NaN for NLoS windows. When ``visibility`` is set the
    state marks whether the antenna lies in a visibility region rather than
    LoS/NLoS.
    """

    states: np.ndarray
    window_starts: np.ndarray
    window_lengths: np.ndarray
    window_states: np.ndarray
    shadowing: np.ndarray
    kappa: np.ndarray
    visibility: bool = False

    @property
    def M(self) -> int:
        return self.states.size

    @property
    def n_windows(self) -> int:
        return self.window_starts.size

    @property
    def windows(self) -> list[tuple[int, int, int]]:
        return [(int(s), int(n), int(b)) for s, n, b in
                zip(self.window_starts, self.window_lengths, self.window_states)]

    def window_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_windows), self.window_lengths)

    def antenna_shadowing(self) -> np.ndarray:
        return self.shadowing[self.window_ids()]

    def antenna_kappa(self) -> np.ndarray:
        return self.kappa[self.window_ids()]

    def write_csv(self, fh: TextIO) -> None:
        """One row per antenna: index, state, window_id, shadowing, kappa."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "state", "window_id", "shadowing", "kappa"])
        ids = self.window_ids()
        for m in range(self.M):
            k = self.kappa[ids[m]]
            w.writerow([m, int(self.states[m]), int(ids[m]), repr(float(self.shadowing[ids[m]])),
                        "" if np.isnan(k) else repr(float(k))])


def _from_runs(states: np.ndarray, window_id: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Window starts/lengths/states from a nondecreasing per-antenna window label."""
    starts = np.flatnonzero(np.r_[True, window_id[1:] != window_id[:-1]])
    lengths = np.diff(np.r_[starts, window_id.size])
    return starts, lengths, states[starts]


# --------------------------------------------------------------------------
# closed-form laws
# --------------------------------------------------------------------------

def los_probability(d2d, d1_bar: float = 18.0, d2_bar: float = 36.0):
    """3GPP UMi LoS probability as a function of the 2-D distance.

    ``min(d1/d, 1) * (1 - exp(-d/d2)) + exp(-d/d2)``; equals 1 for
    ``d <= d1_bar``.
    """
    d = np.asarray(d2d, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise ValueError("2-D distance must be non-negative")
    if not (d1_bar > 0 and d2_bar > 0):
        raise ValueError("reference distances must be positive")
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(d > d1_bar, d1_bar / np.where(d > 0, d, 1.0), 1.0)
    e = np.exp(-d / d2_bar)
    p = ratio * (1 - e) + e
    p = np.where(d <= d1_bar, 1.0, p)
    return p[()] if p.ndim == 0 else p


def pair_same_state_probability(delta, d_cor: float):
    """Probability that two antennas ``delta`` meters apart share a state."""
    if not d_cor > 0:
        raise ValueError(f"d_cor must be positive, got {d_cor}")
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise ValueError("antenna separation must be non-negative")
    out = np.exp(-delta / d_cor)
    return out[()] if out.ndim == 0 else out


def conditional_los_probability(p, delta, d_cor: float):
    """LoS probability of an antenna ``delta`` away from an anchor that is LoS w.p. ``p``."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p must lie in [0, 1]")
    same = pair_same_state_probability(delta, d_cor)
    # equals (2p - 1) * same + 1 - p; the sum of two non-negative terms avoids
    # cancellation when p is near 1 and same is near 0 (or vice versa)
    differ = -np.expm1(-np.asarray(delta, dtype=float) / d_cor)
    out = p * same + (1 - p) * differ
    return out[()] if np.ndim(out) == 0 else out


def window_length_pmf(L, wavelength: float, d_cor: float):
    """PMF of the window length (in antennas) on a half-wavelength ULA.

    ``P(L >= l) = exp(-lambda * l * (l - 1) / (4 d_cor))``, so the masses
    telescope to one.
    """
    L = np.asarray(L)
    if np.any(L < 1) or np.any(L != np.floor(L)):
        raise ValueError("window length must be an integer >= 1")
    if not (d_cor > 0 and wavelength > 0):
        raise ValueError("wavelength and d_cor must be positive")
    L = L.astype(float)
    rate = wavelength / (4 * d_cor)
    # exp(-a) - exp(-b) = exp(-a) * (1 - exp(-(b - a))) keeps precision in the tail
    out = np.exp(-rate * (L * L - L)) * -np.expm1(-rate * 2 * L)
    return out[()] if out.ndim == 0 else out


def window_length_survival(L, wavelength: float, d_cor: float):
    """``P(window length > L)``."""
    L = np.asarray(L, dtype=float)
    out = np.exp(-wavelength * L * (L + 1) / (4 * d_cor))
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def _site_los_probability(sites: np.ndarray, user, params: ScenarioParams) -> np.ndarray:
    if params.p_los_override is not None:
        return np.full(len(sites), float(params.p_los_override))
    return np.atleast_1d(los_probability(distance_2d(user, sites), params.d1_bar, params.d2_bar))


def _anchor_process(p_site: np.ndarray, join_rate: float, rng: np.random.Generator
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run the anchor/join process over equally spaced sites.

    ``join_rate`` is the exponent per site offset: antenna ``anchor + j``
    joins with probability ``exp(-join_rate * j)``. Returns window starts,
    lengths and states.
    """
    n = p_site.size
    u_anchor = rng.random(n)
    u_join = rng.random(n)
    with np.errstate(invalid="ignore", over="ignore"):
        thresh = np.exp(-join_rate * np.arange(1, n))  # thresh[j-1]: offset j
    starts, lengths, states = [], [], []
    anchor = 0
    while anchor < n:
        b = 1 if u_anchor[anchor] < p_site[anchor] else 0
        rest = n - anchor - 1
        length = rest + 1
        lo, chunk = 0, 32
        while lo < rest:
            hi = min(rest, lo + chunk)
            miss = np.flatnonzero(u_join[anchor + 1 + lo:anchor + 1 + hi] >= thresh[lo:hi])
            if miss.size:
                length = lo + int(miss[0]) + 1
                break
            lo, chunk = hi, chunk * 2
        starts.append(anchor)
        lengths.append(length)
        states.append(b)
        anchor += length
    return (np.asarray(starts, dtype=np.int64), np.asarray(lengths, dtype=np.int64),
            np.asarray(states, dtype=np.int8))


def _window_draws(window_states: np.ndarray, params: ScenarioParams,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    z = rng.standard_normal(window_states.size)
    sigma = np.where(window_states == 1, params.sigma_los, params.sigma_nlos)
    shadowing = np.exp(sigma * z)
    kappa = np.full(window_states.size, np.nan)
    los = window_states == 1
    kappa[los] = np.exp(params.mu_kappa + params.sigma_kappa * rng.standard_normal(int(los.sum())))
    return shadowing, kappa


def _axis_coordinate(positions: np.ndarray) -> np.ndarray:
    """Distance of each (collinear) element from element 0."""
    return np.linalg.norm(positions - positions[0], axis=1)


def _run_ula(positions: np.ndarray, user, params: ScenarioParams, rng: np.random.Generator
             ) -> tuple[np.ndarray, np.ndarray]:
    """States and window labels for collinear antennas.

    The process runs on a virtual half-wavelength grid spanning the array;
    each antenna takes the state and window of its nearest grid site, which
    for half-wavelength spacing is the identity mapping.
    """
    half = params.wavelength / 2
    s = _axis_coordinate(positions)
    n_sites = int(math.floor(s[-1] / half + 1e-9)) + 1
    site_idx = np.minimum(np.floor(s / half + 0.5 + 1e-9).astype(np.int64), n_sites - 1)
    if positions.shape[0] > 1:
        axis = (positions[-1] - positions[0]) / s[-1]
    else:
        axis = np.array([1.0, 0.0, 0.0])
    sites = positions[0] + np.outer(np.arange(n_sites) * half, axis)

    p_site = _site_los_probability(sites, user, params)
    starts, lengths, states = _anchor_process(p_site, half / params.d_cor, rng)
    site_window = np.repeat(np.arange(starts.size), lengths)
    window_of_antenna = site_window[site_idx]
    return states[window_of_antenna], window_of_antenna


def generate_states(geometry: ArrayGeometry, user, params: ScenarioParams,
                    rng: np.random.Generator) -> LinkStateVector:
    """Correlated NLoS/LoS states of one user's links to a ULA.

    ``user`` is the user's 3-D position. Shadowing and the Rician K-factor
    are drawn once per window.
    """
    if geometry.layout is not ArrayLayout.ULA and geometry.rows != 1:
        raise ValueError("generate_states expects a ULA; use generate_states_ura")
    states, label = _run_ula(geometry.positions, user, params, rng)
    starts, lengths, wstates = _from_runs(states, label)
    shadowing, kappa = _window_draws(wstates, params, rng)
    return LinkStateVector(states.astype(np.int8), starts, lengths, wstates, shadowing, kappa)


def generate_states_ura(geometry: ArrayGeometry, user, params: ScenarioParams,
                        rng: np.random.Generator) -> LinkStateVector:
    """States for a rectangular array, grown column-wise from the lowest row.

    The lowest row runs the ULA process. Above a LoS element everything is
    LoS; above an NLoS element the next element draws LoS with its own LoS
    probability, and visibility is monotone upward from there.

    Windows of the upper rows are runs of consecutive columns that share
    both the lowest-row window and the state. Runs that keep the lowest-row
    state inherit its shadowing and K-factor; runs that switched to LoS get
    fresh draws (shadowing first, then K-factor, after all state draws).
    """
    if geometry.layout is not ArrayLayout.URA:
        raise ValueError("generate_states_ura expects a URA geometry")
    rows, cols = geometry.rows, geometry.cols
    base_states, base_label = _run_ula(geometry.row(0), user, params, rng)
    bstarts, blengths, bstates = _from_runs(base_states, base_label)
    base_shadow, base_kappa = _window_draws(bstates, params, rng)
    base_window = np.repeat(np.arange(bstarts.size), blengths)

    grid = np.empty((rows, cols), dtype=np.int8)
    grid[0] = base_states
    u_up = rng.random((rows - 1, cols))
    for r in range(1, rows):
        p_row = _site_los_probability(geometry.row(r), user, params)
        grid[r] = np.where(grid[r - 1] == 1, 1, (u_up[r - 1] < p_row).astype(np.int8))

    # label windows row by row
    starts, lengths, wstates, parent, fresh = [], [], [], [], []
    for r in range(rows):
        key = base_window * 2 + grid[r]
        rs, rl, _ = _from_runs(grid[r], key)
        for s, n in zip(rs, rl):
            starts.append(r * cols + s)
            lengths.append(n)
            wstates.append(grid[r, s])
            parent.append(base_window[s])
            fresh.append(grid[r, s] != base_states[s])
    wstates = np.asarray(wstates, dtype=np.int8)
    parent = np.asarray(parent)
    fresh = np.asarray(fresh, dtype=bool)

    shadowing = base_shadow[parent].copy()
    kappa = base_kappa[parent].copy()
    n_fresh = int(fresh.sum())
    if n_fresh:
        # switched windows are always NLoS -> LoS
        shadowing[fresh] = np.exp(params.sigma_los * rng.standard_normal(n_fresh))
        kappa[fresh] = np.exp(params.mu_kappa + params.sigma_kappa * rng.standard_normal(n_fresh))
    return LinkStateVector(grid.reshape(-1).copy(), np.asarray(starts, dtype=np.int64),
                           np.asarray(lengths, dtype=np.int64), wstates, shadowing, kappa)


def generate_link_states(geometry: ArrayGeometry, user, params: ScenarioParams,
                         rng: np.random.Generator) -> LinkStateVector:
    if geometry.layout is ArrayLayout.URA:
        return generate_states_ura(geometry, user, params, rng)
    return generate_states(geometry, user, params, rng)


# --------------------------------------------------------------------------
# single visibility region (Model V)
# --------------------------------------------------------------------------

def _region_length(raw: float, M: int) -> int:
    return int(min(max(math.floor(raw + 0.5), 1), M))


def generate_states_model5(M: int, mu_L: float, sigma_L: float,
                           rng: np.random.Generator) -> LinkStateVector:
    """One visibility region of log-normal length placed uniformly on the array.

    The length is rounded to the nearest integer and clamped to ``[1, M]``;
    the start index is uniform over the positions that keep the region on
    the array. Draw order: length, then start.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if sigma_L < 0:
        raise ValueError("sigma_L must be non-negative")
    L = _region_length(rng.lognormal(mu_L, sigma_L), M)
    start = int(rng.integers(0, M - L + 1))
    states = np.zeros(M, dtype=np.int8)
    states[start:start + L] = 1
    label = np.zeros(M, dtype=np.int64)
    label[start:] = 1
    label[start + L:] = 2
    starts, lengths, wstates = _from_runs(states, label)
    n = starts.size
    return LinkStateVector(states, starts, lengths, wstates, np.ones(n),
                           np.full(n, np.nan), visibility=True)


def model5_length_pmf(M: int, mu_L: float, sigma_L: float) -> np.ndarray:
    """PMF over region lengths 1..M after rounding and clamping (index 0 is L=1)."""
    from statistics import NormalDist

    if sigma_L == 0:
        pmf = np.zeros(M)
        pmf[_region_length(math.exp(mu_L), M) - 1] = 1.0
        return pmf
    nd = NormalDist(mu_L, sigma_L)
    edges = [nd.cdf(math.log(l + 0.5)) for l in range(1, M)]
    cdf = np.r_[edges, 1.0]
    return np.diff(np.r_[0.0, cdf])


def model5_visibility_probability(M: int, mu_L: float, sigma_L: float) -> np.ndarray:
    """Exact probability that each antenna lies inside the visibility region."""
    pmf = model5_length_pmf(M, mu_L, sigma_L)
    m = np.arange(M)[:, None]
    L = np.arange(1, M + 1)[None, :]
    covering = np.minimum(m, M - L) - np.maximum(0, m - L + 1) + 1
    frac = np.clip(covering, 0, None) / (M - L + 1)
    return frac @ pmf
