"""CFAR radar target detection: classical adaptive detectors and one-class
(kernel SVDD / deep hypersphere) detectors, benchmarked by Monte Carlo on
synthetic Gaussian and compound-Gaussian clutter.
"""

from .sim import Scenario, Sample, make_splits, steering_vector
from .detectors import CovarianceEstimate, mf_statistic, nmf_statistic, scm, tyler
from .svdd import SvddModel, svdd_score
from .dsvdd import DsvddModel, TrainConfig, dsvdd_score
from .cfar import (
    DetectorHandle,
    ReportRow,
    calibrate_threshold,
    estimate_pd,
    make_handles,
    run_experiment,
    verify_pfa,
    write_report,
)

__all__ = [
    "Scenario",
    "Sample",
    "make_splits",
    "steering_vector",
    "CovarianceEstimate",
    "mf_statistic",
    "nmf_statistic",
    "scm",
    "tyler",
    "SvddModel",
    "svdd_score",
    "DsvddModel",
    "TrainConfig",
    "dsvdd_score",
    "DetectorHandle",
    "ReportRow",
    "calibrate_threshold",
    "estimate_pd",
    "make_handles",
    "run_experiment",
    "verify_pfa",
    "write_report",
]

__version__ = "0.1.0"
