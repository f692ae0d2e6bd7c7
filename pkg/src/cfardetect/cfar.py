"""CFAR threshold calibration and Monte Carlo detection-probability estimation.

Every detector is calibrated the same way: score a target-free calibration
set, take the empirical (1 - Pfa)-quantile as the threshold, then declare a
detection when a score strictly exceeds it. One threshold per detector per
scenario; the H0 score distribution of every implemented statistic is
Doppler-independent, so classical detectors are calibrated at bin 0.

Reports are CSV files ``report_<family>.csv`` with columns
detector, clutter_family, doppler_bin, snr_db, pd, ci_low, ci_high,
n_trials, threshold, empirical_pfa.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import dsvdd as dsvdd_mod
from . import svdd as svdd_mod
from .detectors import mf_statistic, nmf_statistic, scm, tyler
from .sim import make_splits, steering_vector

__all__ = [
    "DetectorHandle",
    "ReportRow",
    "calibrate_threshold",
    "wilson_interval",
    "estimate_pd",
    "verify_pfa",
    "run_experiment",
    "make_handles",
    "classical_handle",
    "svdd_handle",
    "dsvdd_handle",
    "write_report",
    "read_report",
    "REPORT_COLUMNS",
]

CLASSICAL_TAGS = ("mf_true", "nmf_true", "amf_scm", "anmf_tyler")
LEARNED_TAGS = ("svdd", "dsvdd")
DEFAULT_TAGS = ("mf_true", "amf_scm", "anmf_tyler", "svdd", "dsvdd")


@dataclass
class DetectorHandle:
    """A named scoring rule over samples.

    ``score_block`` maps a list of samples to an array of scores; classical
    tags consume each sample's secondary block, learned tags only the cell.
    """

    tag: str
    score_block: callable

    def score(self, sample):
        return float(self.score_block([sample])[0])


def classical_handle(tag, scn):
    sigma_true = scn.total_covariance()
    m = scn.m
    p_default = steering_vector(0, m)

    def block(samples):
        out = np.empty(len(samples))
        for i, s in enumerate(samples):
            p = (p_default if s.target_doppler is None
                 else steering_vector(s.target_doppler, m))
            if tag == "mf_true":
                out[i] = mf_statistic(s.cell, sigma_true, p)
            elif tag == "nmf_true":
                out[i] = nmf_statistic(s.cell, sigma_true, p)
            elif tag == "amf_scm":
                out[i] = mf_statistic(s.cell, scm(s.secondary), p)
            elif tag == "anmf_tyler":
                out[i] = nmf_statistic(s.cell, tyler(s.secondary), p)
            else:
                raise ValueError(f"unknown classical detector tag {tag!r}")
        return out

    return DetectorHandle(tag=tag, score_block=block)


def svdd_handle(model):
    def block(samples):
        cells = np.array([s.cell for s in samples])
        return svdd_mod.score_many(cells, model)

    return DetectorHandle(tag="svdd", score_block=block)


def dsvdd_handle(model):
    def block(samples):
        cells = np.array([s.cell for s in samples])
        return dsvdd_mod.score_many(cells, model)

    return DetectorHandle(tag="dsvdd", score_block=block)


def make_handles(scn, tags=DEFAULT_TAGS, svdd_model=None, dsvdd_model=None):
    handles = []
    for tag in tags:
        if tag in CLASSICAL_TAGS:
            handles.append(classical_handle(tag, scn))
        elif tag == "svdd":
            if svdd_model is None:
                raise ValueError("svdd requested but no fitted model supplied")
            handles.append(svdd_handle(svdd_model))
        elif tag == "dsvdd":
            if dsvdd_model is None:
                raise ValueError("dsvdd requested but no fitted model supplied")
            handles.append(dsvdd_handle(dsvdd_model))
        else:
            raise ValueError(f"unknown detector tag {tag!r}")
    return handles


def calibrate_threshold(scores, pfa):
    """Empirical (1 - pfa)-quantile: the ceil((1 - pfa) N)-th order statistic.

    Guarantees that at most a ``pfa`` fraction of the calibration scores
    strictly exceed the threshold.
    """
    s = np.asarray(scores, dtype=float)
    if not 0.0 < pfa < 1.0:
        raise ValueError("pfa must lie in (0, 1)")
    if not np.all(np.isfinite(s)):
        raise ValueError("calibration scores contain non-finite values")
    n = len(s)
    if n < 1.0 / pfa:
        raise ValueError(f"need at least {math.ceil(1 / pfa)} scores for pfa={pfa}, got {n}")
    idx = math.ceil((1.0 - pfa) * n)  # 1-based
    return float(np.sort(s)[idx - 1])


def wilson_interval(successes, trials, z=1.959963984540054):
    """Wilson 95% score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_pd(detector, threshold, test_samples):
    """Empirical detection probability with a Wilson 95% interval."""
    if not test_samples:
        raise ValueError("empty test set")
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    scores = detector.score_block(test_samples)
    hits = int(np.sum(scores > threshold))
    pd = hits / len(scores)
    lo, hi = wilson_interval(hits, len(scores))
    return pd, lo, hi


def verify_pfa(detector, threshold, h0_samples):
    """Empirical false-alarm fraction on fresh target-free samples."""
    scores = detector.score_block(h0_samples)
    return float(np.mean(scores > threshold))


@dataclass
class ReportRow:
    detector: str
    clutter_family: str
    doppler_bin: int
    snr_db: float
    pd: float
    ci_low: float
    ci_high: float
    n_trials: int
    threshold: float
    empirical_pfa: float
    failed: bool = False


def run_experiment(scn, detectors, splits=None, fresh_h0=None, n_test=None,
                   snr_grid_db=None, doppler_bins=None):
    """Calibrate, verify and sweep every detector over the (Doppler, SNR) grid.

    Test cells are generated per grid point and scored by every detector, so
    all detectors see identical cells. A detector whose scoring fails is
    flagged in its rows; the remaining detectors still run.
    """
    if splits is None:
        splits = make_splits(scn)
    if fresh_h0 is None:
        fresh_h0 = splits.fresh_h0()
    snrs = scn.snr_grid_db if snr_grid_db is None else tuple(snr_grid_db)
    bins = scn.doppler_bins if doppler_bins is None else tuple(doppler_bins)

    calibrated = []
    for det in detectors:
        try:
            lam = calibrate_threshold(det.score_block(splits.cal_h0), scn.pfa)
            emp = verify_pfa(det, lam, fresh_h0)
            calibrated.append((det, lam, emp, None))
        except Exception as exc:  # noqa: BLE001 - flagged per detector in the report
            calibrated.append((det, math.nan, math.nan, exc))

    rows = []
    for d in bins:
        for snr in snrs:
            block = splits.test(snr, d, count=n_test)
            for det, lam, emp, err in calibrated:
                if err is None:
                    try:
                        pd, lo, hi = estimate_pd(det, lam, block)
                        rows.append(ReportRow(det.tag, scn.clutter_family, d,
                                              float(snr), pd, lo, hi,
                                              len(block), lam, emp))
                        continue
                    except Exception:  # noqa: BLE001
                        pass
                rows.append(ReportRow(det.tag, scn.clutter_family, d, float(snr),
                                      math.nan, math.nan, math.nan, 0,
                                      lam, emp, failed=True))
    rows.sort(key=lambda r: (r.detector, r.doppler_bin, r.snr_db))
    return rows


REPORT_COLUMNS = ("detector", "clutter_family", "doppler_bin", "snr_db", "pd",
                  "ci_low", "ci_high", "n_trials", "threshold", "empirical_pfa")


def write_report(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join([
                r.detector, r.clutter_family, str(r.doppler_bin), repr(r.snr_db),
                repr(r.pd), repr(r.ci_low), repr(r.ci_high), str(r.n_trials),
                repr(r.threshold), repr(r.empirical_pfa),
            ]) + "\n")


def read_report(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != REPORT_COLUMNS:
            raise ValueError(f"{path}: unexpected report header")
        for line in fh:
            tok = line.strip().split(",")
            rows.append(ReportRow(
                detector=tok[0], clutter_family=tok[1], doppler_bin=int(tok[2]),
                snr_db=float(tok[3]), pd=float(tok[4]), ci_low=float(tok[5]),
                ci_high=float(tok[6]), n_trials=int(tok[7]),
                threshold=float(tok[8]), empirical_pfa=float(tok[9]),
            ))
    return rows
