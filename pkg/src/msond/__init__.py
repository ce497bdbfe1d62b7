"""Monte Carlo simulator and analysis toolkit for opportunistic relay
selection with interference alignment in two-hop multi-antenna relay
networks (K pairs, N half-duplex relay candidates)."""

__version__ = "0.1.0"

from .channel import (
    ChannelRealization,
    NetworkConfig,
    MODE_ALTERNATE,
    MODE_FULL_DUPLEX,
    MODE_NON_ALTERNATE,
    check_mode_feasible,
    draw_block,
)
from .errors import (
    ConfigurationError,
    InfeasibleSelectionError,
    InvalidArgumentError,
    InvalidDimensionError,
    MsondError,
    SingularMatrixError,
)
from .linalg import invert_small, project_signal, random_unitary, split_spaces
from .selection import (
    BeamConfig,
    RelayAssignment,
    make_beam_configs,
    metric_stage1,
    metric_stage2,
    select_both_sets,
    select_set,
    signaling_overhead_bits,
    stage1_metric_table,
    stage2_metric_table,
)
from .transmission import (
    RateReport,
    simulate_slot,
    sinr_hop1,
    sinr_hop2,
    sum_rate,
    zf_equalizer,
)
from .analysis import (
    CdfPowerBound,
    DecayFit,
    RelayRequirement,
    ShapeParams,
    cdf_metric,
    cdf_metric_chi2,
    cdf_power_lower_bound,
    estimate_dof,
    fit_decay,
    inverse_cdf,
    prob_exactly_sk,
    required_relays,
    shape_params,
    til_decay_lower_bound,
    til_order_statistic,
)

__all__ = [
    "__version__",
    "BeamConfig",
    "CdfPowerBound",
    "ChannelRealization",
    "ConfigurationError",
    "DecayFit",
    "InfeasibleSelectionError",
    "InvalidArgumentError",
    "InvalidDimensionError",
    "MODE_ALTERNATE",
    "MODE_FULL_DUPLEX",
    "MODE_NON_ALTERNATE",
    "MsondError",
    "NetworkConfig",
    "RateReport",
    "RelayAssignment",
    "RelayRequirement",
    "ShapeParams",
    "SingularMatrixError",
    "cdf_metric",
    "cdf_metric_chi2",
    "cdf_power_lower_bound",
    "check_mode_feasible",
    "draw_block",
    "estimate_dof",
    "fit_decay",
    "inverse_cdf",
    "invert_small",
    "make_beam_configs",
    "metric_stage1",
    "metric_stage2",
    "prob_exactly_sk",
    "project_signal",
    "random_unitary",
    "required_relays",
    "select_both_sets",
    "select_set",
    "shape_params",
    "signaling_overhead_bits",
    "simulate_slot",
    "sinr_hop1",
    "sinr_hop2",
    "split_spaces",
    "stage1_metric_table",
    "stage2_metric_table",
    "sum_rate",
    "til_decay_lower_bound",
    "til_order_statistic",
    "zf_equalizer",
]
