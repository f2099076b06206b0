"""Rate-energy tradeoff frontiers for joint wireless information and power
transfer in a K-user MIMO interference channel."""

from .beams import (BeamPlan, BeamStatistics, beam_statistics,
                    directions_for_scheme, meb_direction, mlb_direction,
                    sler_direction, whitened_mlb_direction,
                    UndefinedDirectionError)
from .channel import (ChannelSet, EffectiveChannels, InvalidPartitionError,
                      achievable_rate, assemble_effective, generate_channels,
                      harvested_energy, interference_covariance,
                      load_channels, save_channels)
from .config import ConfigError, SystemConfig, config_from_dict, load_config
from .linalg import (EigPair, IllConditionedError, SvdResult,
                     generalized_eigmax, inv_sqrt_psd, svd)
from .optimizer import (DualState, InfeasibleTargetError, InnerResult, REPoint,
                        Strategy, TimeSharingCurve, boundary_point, e_max,
                        inner_solve, max_energy_strategy, max_step,
                        power_gradient, scheme_energy_capacity,
                        time_sharing_curve, waterfill_budget)
from .selection import SelectionResult, select_eh_set
from .sweep import RECurve, TrialResult, aggregate, emit_csv, run_sweep, sweep_trials

__version__ = "0.1.0"
