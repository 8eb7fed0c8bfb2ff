from .flow import FlowField, estimate_flow, luminance, window_mean
from .region_eval import (METRICS_COLUMNS, REGIONS, RegionStats, angular_speed, depth_range, mask_fraction,
                          region_stats, write_region_csv)
from .reports import FidelityReport, decoupling_report, fidelity_report, texture_hash
from .eval_results import RegionRollup, eval_results
from .tensorboard_logger import tensorboard_logger
