"""Spatially non-stationary ELAA-mMIMO channel simulator."""

__version__ = "0.1.0"

from .scenario import (ArrayGeometry, Density, ScenarioParams, UserLayout, build_ula, build_ura,
                       distance_2d, distance_3d, place_users)
from .los_state import (LinkStateVector, conditional_los_probability, generate_states,
                        generate_states_model5, generate_states_ura, los_probability,
                        pair_same_state_probability, window_length_pmf)
from .fading import (ChannelRealization, LinkCoefficient, channel_matrix, los_coefficient,
                     mixed_coefficient, nlos_coefficient, sample_kappa, sample_shadowing)
from .normalization import (NormalizationConstant, expected_frobenius_sq, expected_link_power,
                            normalize)
from .metrics import CdfSummary, TrialStatistics, capacity, empirical_cdf, frobenius_norm, rss_per_link
from .harness import ModelPreset, SimulationConfig, model_preset, run_monte_carlo, run_trial
