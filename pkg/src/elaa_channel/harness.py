"""Monte-Carlo driver for the five channel-model presets.

Every trial owns a random stream derived from ``(seed, trial_index)`` via
``numpy.random.SeedSequence`` spawn keys, so results do not depend on how
trials are spread across worker processes.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .fading import channel_matrix
from .los_state import generate_link_states, generate_states_model5, model5_visibility_probability
from .metrics import (CdfSummary, TrialStatistics, capacity, empirical_cdf, frobenius_norm,
                      rss_per_link, to_db)
from .normalization import NormalizationConstant, expected_frobenius_sq, normalize
from .scenario import (ArrayGeometry, Density, ScenarioParams, UserLayout, build_ula, build_ura,
                       place_users)

log = logging.getLogger(__name__)

SNR_DEFINITION = ("snr_db is total transmit power over noise power; capacity = "
                  "log2 det(I + 10^(snr_db/10) / n_tx * Hbar^H Hbar) with the "
                  "normalized channel Hbar and equal power per transmit antenna")

_TRIAL_STREAM = 0
_LAYOUT_STREAM = 1


@dataclass(frozen=True)
class ModelPreset:
    id: str
    overrides: tuple = ()
    visibility_region: bool = False
    region_mu: float = math.log(4.0)
    region_sigma: float = abs(math.log(0.2))
    description: str = ""

    def apply(self, params: ScenarioParams) -> ScenarioParams:
        return params.replace(**dict(self.overrides)) if self.overrides else params


_PRESETS = {
    "I": ModelPreset("I", description="proposed model: correlated NLoS/LoS states with shadowing"),
    "II": ModelPreset("II", (("p_los_override", 0.0), ("unit_distance", True), ("alpha", 1.0),
                             ("sigma_nlos", 0.0)),
                      description="i.i.d. Rayleigh"),
    "III": ModelPreset("III", (("p_los_override", 0.0), ("sigma_nlos", 0.0)),
                       description="non-stationary Rayleigh (spherical wavefront path loss)"),
    "IV": ModelPreset("IV", (("p_los_override", 1.0), ("sigma_los", 0.0)),
                      description="non-stationary Rician (spherical wavefront path loss)"),
    "V": ModelPreset("V", (("sigma_nlos", 0.0), ("sigma_los", 0.0)), visibility_region=True,
                     description="single log-normal visibility region, no shadowing"),
}


def model_preset(preset_id: str) -> ModelPreset:
    key = str(preset_id).strip().upper()
    if key not in _PRESETS:
        raise ValueError(f"unknown model preset {preset_id!r}; choose from {', '.join(_PRESETS)}")
    return _PRESETS[key]


@dataclass(frozen=True)
class SimulationConfig:
    preset: str = "I"
    trials: int = 1000
    seed: int = 0
    M: int = 2000
    K: int = 5
    n_per_user: int = 4
    density: Density = Density.HIGH
    snr_db: float = 10.0
    shadowing: bool = True
    output_dir: Optional[str] = None
    user_distance: float = 40.0
    array_rows: int = 1
    spacing: Optional[float] = None
    fixed_layout: bool = False
    rss_trials: int = 1
    scenario: ScenarioParams = field(default_factory=ScenarioParams)

    def __post_init__(self):
        object.__setattr__(self, "density", Density(self.density))
        object.__setattr__(self, "preset", model_preset(self.preset).id)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.M < 1 or self.K < 1 or self.n_per_user < 1:
            raise ValueError("M, K and n_per_user must be >= 1")
        if self.array_rows < 1 or self.M % self.array_rows:
            raise ValueError("array_rows must divide M")
        if self.array_rows > 1 and self.preset == "V":
            raise ValueError("the visibility-region preset supports linear arrays only")
        if not self.user_distance >= 0:
            raise ValueError("user_distance must be non-negative")
        if self.rss_trials < 0:
            raise ValueError("rss_trials must be >= 0")

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    @property
    def n_tx(self) -> int:
        return self.K * self.n_per_user

    def effective_params(self) -> ScenarioParams:
        params = model_preset(self.preset).apply(self.scenario)
        if not self.shadowing:
            params = params.replace(sigma_los=0.0, sigma_nlos=0.0)
        return params

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["density"] = self.density.value
        return d


def trial_rng(seed: int, trial_index: int, stream: int = _TRIAL_STREAM) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, int(trial_index)))
    return np.random.default_rng(ss)


@lru_cache(maxsize=32)
def build_geometry(config: SimulationConfig) -> ArrayGeometry:
    p = config.scenario
    if config.array_rows > 1:
        return build_ura(config.array_rows, config.M // config.array_rows, config.spacing,
                         height=p.antenna_height, wavelength=p.wavelength)
    return build_ula(config.M, config.spacing, height=p.antenna_height, wavelength=p.wavelength)


def user_layout(config: SimulationConfig) -> UserLayout:
    geometry = build_geometry(config)
    return UserLayout(K=config.K, n_per_user=config.n_per_user, density=config.density,
                      distance=config.user_distance, center_x=float(geometry.center[0]),
                      height=config.scenario.user_height)


@lru_cache(maxsize=32)
def _fixed_users(config: SimulationConfig) -> UserLayout:
    layout = user_layout(config)
    return layout.with_positions(place_users(layout, trial_rng(config.seed, 0, _LAYOUT_STREAM)))


@lru_cache(maxsize=32)
def _visibility(M: int, mu: float, sigma: float) -> np.ndarray:
    return model5_visibility_probability(M, mu, sigma)


def _normalization(config: SimulationConfig, users: UserLayout) -> NormalizationConstant:
    preset = model_preset(config.preset)
    vis = None
    if preset.visibility_region:
        vis = _visibility(config.M, preset.region_mu, preset.region_sigma)
    return expected_frobenius_sq(build_geometry(config), users, config.effective_params(), vis)


@lru_cache(maxsize=32)
def _fixed_normalization(config: SimulationConfig) -> NormalizationConstant:
    return _normalization(config, _fixed_users(config))


def draw_trial_channel(config: SimulationConfig, trial_index: int):
    """Users, per-user states and the raw channel of one trial.

    Draw order: user positions, state vectors (one shared vector in the
    high-density case, one per user otherwise), then small-scale fading.
    """
    preset = model_preset(config.preset)
    params = config.effective_params()
    geometry = build_geometry(config)
    rng = trial_rng(config.seed, trial_index)
    if config.fixed_layout:
        users = _fixed_users(config)
    else:
        layout = user_layout(config)
        users = layout.with_positions(place_users(layout, rng))

    n_vectors = 1 if config.density is Density.HIGH else config.K
    refs = [users.positions.mean(axis=0)] if n_vectors == 1 else list(users.positions)
    vectors = []
    for ref in refs:
        if preset.visibility_region:
            vectors.append(generate_states_model5(geometry.M, preset.region_mu,
                                                  preset.region_sigma, rng))
        else:
            vectors.append(generate_link_states(geometry, ref, params, rng))
    if n_vectors == 1:
        vectors = vectors * config.K
    realization = channel_matrix(geometry, users, vectors, params, rng)
    return users, realization


def run_trial(config: SimulationConfig, trial_index: int) -> TrialStatistics:
    users, realization = draw_trial_channel(config, trial_index)
    if config.fixed_layout:
        norm = _fixed_normalization(config)
    else:
        norm = _normalization(config, users)
    H_bar = normalize(realization.H, norm)
    rss = states = None
    if trial_index < config.rss_trials:
        N = config.n_per_user
        rss = np.stack([rss_per_link(realization.H[:, k * N:(k + 1) * N])
                        for k in range(config.K)])
        states = realization.states
    return TrialStatistics(trial_index, frobenius_norm(H_bar),
                           capacity(H_bar, config.snr_db, config.n_tx), rss, states)


def _run_chunk(args) -> list[TrialStatistics]:
    config, indices = args
    return [run_trial(config, i) for i in indices]


@dataclass(frozen=True, eq=False)
class MonteCarloResult:
    config: SimulationConfig
    trials: list
    norm_cdf: CdfSummary
    norm_sq_cdf: CdfSummary
    capacity_cdf: CdfSummary

    @property
    def frobenius_sq(self) -> np.ndarray:
        return np.array([t.frobenius_sq for t in self.trials])

    @property
    def capacities(self) -> np.ndarray:
        return np.array([t.capacity_bits for t in self.trials])

    def rss_grids(self) -> dict[int, np.ndarray]:
        """Trial index -> K x M RSS grid in dB."""
        return {t.trial_index: to_db(t.rss_per_link) for t in self.trials
                if t.rss_per_link is not None}


def run_monte_carlo(config: SimulationConfig, workers: int = 1,
                    output_dir: Optional[str | os.PathLike] = None) -> MonteCarloResult:
    """Run every trial, aggregate CDFs and optionally write the result tables."""
    indices = list(range(config.trials))
    if workers <= 1:
        trials = [run_trial(config, i) for i in indices]
    else:
        n_chunks = min(len(indices), workers * 4)
        chunks = [indices[j::n_chunks] for j in range(n_chunks)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = [t for part in pool.map(_run_chunk, [(config, c) for c in chunks]) for t in part]
        trials.sort(key=lambda t: t.trial_index)

    result = MonteCarloResult(
        config, trials,
        empirical_cdf([t.frobenius_norm for t in trials]),
        empirical_cdf([t.frobenius_sq for t in trials]),
        empirical_cdf([t.capacity_bits for t in trials]),
    )
    out = output_dir if output_dir is not None else config.output_dir
    if out is not None:
        write_outputs(result, out)
    return result


def _open(path: Path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_outputs(result: MonteCarloResult, output_dir) -> Path:
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc

    with _open(out / "trials.csv") as fh:
        fh.write("trial_index,frobenius_norm,frobenius_sq,capacity_bits\n")
        for t in result.trials:
            fh.write(f"{t.trial_index},{t.frobenius_norm!r},{t.frobenius_sq!r},{t.capacity_bits!r}\n")
    with _open(out / "norm_cdf.csv") as fh:
        result.norm_cdf.write_csv(fh)
    with _open(out / "capacity_cdf.csv") as fh:
        result.capacity_cdf.write_csv(fh)

    for t in result.trials:
        if t.rss_per_link is None:
            continue
        grid = to_db(t.rss_per_link)
        with _open(out / f"rss_trial{t.trial_index}.csv") as fh:
            fh.write("user_index," + ",".join(f"antenna_{m}" for m in range(grid.shape[1])) + "\n")
            for k, row in enumerate(grid):
                fh.write(f"{k}," + ",".join(repr(float(v)) for v in row) + "\n")
        for k, s in enumerate(t.states):
            with _open(out / f"states_trial{t.trial_index}_user{k}.csv") as fh:
                s.write_csv(fh)

    meta = {
        "software": "elaa_channel",
        "version": __version__,
        "seed": result.config.seed,
        "config": result.config.as_dict(),
        "effective_params": dataclasses.asdict(result.config.effective_params()),
        "preset": model_preset(result.config.preset).description,
        "snr_definition": SNR_DEFINITION,
        "normalization": "per placed user layout, analytic expectation",
    }
    with _open(out / "metadata.json") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %d trials to %s", len(result.trials), out)
    return out
