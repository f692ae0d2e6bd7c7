"""Seeded synthesis of radar-like datasets: clutter, texture, targets, splits.

The signal model for one cell is

    z = alpha * p + sqrt(tau) * c + n

with steering vector p, complex amplitude alpha of random phase, Gaussian
speckle c ~ CN(0, T(rho)), Gamma texture tau (identically 1 in the Gaussian
family) and white thermal noise n ~ CN(0, sigma_n^2 I). Secondary reference
vectors are drawn the same way without the target term.

Randomness is counter-based: every sample owns a Philox substream keyed by
(master_seed, split tag, sample index), so splits are independent of each
other's sizes and generation parallelizes with bitwise reproducibility.

Dataset interchange format (binary, little-endian), used by the CLI:

    magic   4 bytes  b"RDS1"
    m       uint32   cell dimension
    k       uint32   secondary vectors per sample (0 if none)
    family  uint8    0 = gaussian, 1 = compound_gaussian
    seed    uint64   master seed
    count   uint32   number of samples
    then per sample:
      label    uint8    0 = h0, 1 = h1
      snr_db   float64  NaN when no target
      doppler  int64    -1 when no target
      cell     2*m float64, interleaved re/im in index order
      secondary 2*m*k float64, column by column, interleaved re/im
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky, toeplitz

__all__ = [
    "Scenario",
    "Sample",
    "Splits",
    "steering_vector",
    "substream",
    "draw_complex_gaussian",
    "draw_texture",
    "synthesize_sample",
    "make_splits",
    "train_split",
    "cal_split",
    "test_block",
    "fresh_h0_split",
    "write_dataset",
    "read_dataset",
]

GAUSSIAN = "gaussian"
COMPOUND = "compound_gaussian"

# Split tags feeding the per-sample substream keys.
_TAG_TRAIN = 1
_TAG_CAL = 2
_TAG_PFA = 3
_TAG_TEST = 4


@dataclass(frozen=True)
class Scenario:
    """Full configuration of one simulation campaign."""

    clutter_family: str = GAUSSIAN
    m: int = 16
    k_secondary: int = 32
    rho: float = 0.5
    texture_shape: float = 1.0
    noise_power: float = 1.0
    pfa: float = 0.01
    snr_grid_db: tuple = tuple(range(0, 21))
    doppler_bins: tuple | None = None  # None means all m bins
    n_train: int = 5000
    n_cal: int = 5000
    n_test: int = 5000
    master_seed: int = 20250826
    shared_texture: bool = True  # one tau per sample vs one per vector

    def __post_init__(self):
        if self.doppler_bins is None:
            object.__setattr__(self, "doppler_bins", tuple(range(self.m)))
        if self.clutter_family not in (GAUSSIAN, COMPOUND):
            raise ValueError(f"unknown clutter family {self.clutter_family!r}")
        if self.m < 2:
            raise ValueError("cell dimension m must be >= 2")
        if self.k_secondary < 1:
            raise ValueError("k_secondary must be >= 1")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("|rho| must be < 1")
        if self.texture_shape <= 0:
            raise ValueError("texture shape must be > 0")
        if self.noise_power < 0:
            raise ValueError("noise power must be >= 0")
        if not 0.0 < self.pfa < 1.0:
            raise ValueError("pfa must lie in (0, 1)")
        if min(self.n_train, self.n_cal, self.n_test) < 1:
            raise ValueError("dataset sizes must be >= 1")
        if any(not 0 <= d < self.m for d in self.doppler_bins):
            raise ValueError("doppler bins must lie in [0, m)")
        if len(self.snr_grid_db) == 0 or len(self.doppler_bins) == 0:
            raise ValueError("SNR grid and doppler bin list must be non-empty")

    def clutter_covariance(self):
        """Speckle covariance T(rho), unit diagonal, trace m."""
        return toeplitz(self.rho, self.m)

    def total_covariance(self):
        """Mean total H0 covariance T(rho) + sigma_n^2 I (texture has mean 1)."""
        return self.clutter_covariance() + self.noise_power * np.eye(self.m)


@dataclass
class Sample:
    """One test cell, optionally paired with target-free secondary data."""

    cell: np.ndarray
    secondary: np.ndarray | None = None  # shape (m, K)
    label: str = "h0"
    target_snr_db: float | None = None
    target_doppler: int | None = None


def steering_vector(d, m):
    """Unit-modulus complex sinusoid for Doppler bin d: entry k = e^{j 2 pi d k / m}."""
    if not 0 <= d < m:
        raise ValueError(f"doppler bin {d} outside [0, {m})")
    k = np.arange(m)
    return np.exp(2j * np.pi * d * k / m)


def substream(master_seed, tag, index, extra=()):
    """Independent Philox stream for one (split, sample) pair."""
    key = [int(master_seed), int(tag), *[int(e) for e in extra], int(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def draw_complex_gaussian(sigma, count, rng, chol=None):
    """Draw ``count`` vectors from CN(0, sigma); rows of the returned array.

    Each vector is L w with L the Cholesky factor of sigma and w having
    i.i.d. entries of independent N(0, 1/2) real and imaginary parts, so
    E[w w^H] = I.
    """
    if chol is None:
        chol = cholesky(sigma)
    m = chol.shape[0]
    w = rng.standard_normal((2, m, count))
    w = (w[0] + 1j * w[1]) * np.sqrt(0.5)
    return (chol @ w).T


def draw_texture(mu, rng, count=None):
    """Gamma(shape mu, scale 1/mu) texture draws: mean 1, variance 1/mu."""
    if mu <= 0:
        raise ValueError("texture shape must be > 0")
    return rng.gamma(shape=mu, scale=1.0 / mu, size=count)


def synthesize_sample(scn, with_target, snr_db=None, d=None, rng=None,
                      n_secondary=None, chol=None, force_texture=None):
    """Generate one Sample under the scenario's signal model.

    ``n_secondary`` overrides scn.k_secondary (0 gives a bare cell).
    ``chol`` may carry a precomputed Cholesky factor of T(rho).
    ``force_texture`` substitutes a fixed texture value (diagnostics only).
    """
    if with_target and (snr_db is None or d is None):
        raise ValueError("target samples need snr_db and doppler bin")
    if rng is None:
        raise ValueError("a random stream is required")
    ns = scn.k_secondary if n_secondary is None else int(n_secondary)
    if chol is None:
        chol = cholesky(scn.clutter_covariance())
    nvec = ns + 1

    if scn.clutter_family == COMPOUND:
        if scn.shared_texture:
            tau = np.full(nvec, draw_texture(scn.texture_shape, rng))
        else:
            tau = draw_texture(scn.texture_shape, rng, count=nvec)
    else:
        tau = np.ones(nvec)
    if force_texture is not None:
        tau = np.full(nvec, float(force_texture))

    speckle = draw_complex_gaussian(None, nvec, rng, chol=chol).T  # (m, nvec)
    noise = rng.standard_normal((2, scn.m, nvec))
    noise = (noise[0] + 1j * noise[1]) * np.sqrt(scn.noise_power / 2.0)
    vecs = np.sqrt(tau)[None, :] * speckle + noise

    cell = vecs[:, 0]
    if with_target:
        phi = rng.uniform(0.0, 2.0 * np.pi)
        alpha = np.sqrt(10.0 ** (snr_db / 10.0) / scn.m) * np.exp(1j * phi)
        cell = cell + alpha * steering_vector(d, scn.m)
    secondary = vecs[:, 1:] if ns > 0 else None
    return Sample(
        cell=cell,
        secondary=secondary,
        label="h1" if with_target else "h0",
        target_snr_db=float(snr_db) if with_target else None,
        target_doppler=int(d) if with_target else None,
    )


def _h0_split(scn, tag, count, n_secondary):
    chol = cholesky(scn.clutter_covariance())
    return [
        synthesize_sample(
            scn, False, rng=substream(scn.master_seed, tag, i),
            n_secondary=n_secondary, chol=chol,
        )
        for i in range(count)
    ]


def train_split(scn):
    """Target-free training cells (K = 1: bare cells, no secondary block)."""
    return _h0_split(scn, _TAG_TRAIN, scn.n_train, 0)


def cal_split(scn):
    """Target-free calibration samples: one cell plus a K-column secondary block.

    Learned detectors score the cell; classical detectors additionally use
    the secondary block for covariance estimation.
    """
    return _h0_split(scn, _TAG_CAL, scn.n_cal, None)


def fresh_h0_split(scn, count=None):
    """Target-free samples disjoint from calibration, for Pfa verification."""
    return _h0_split(scn, _TAG_PFA, scn.n_cal if count is None else count, None)


def test_block(scn, snr_db, d, count=None):
    """Target-present cells (with secondary blocks) for one (SNR, Doppler) point.

    The block depends only on (master_seed, snr_db, d, index), never on the
    rest of the grid, so subsets of the grid reuse identical cells.
    """
    chol = cholesky(scn.clutter_covariance())
    extra = (int(d), int(round(float(snr_db) * 1000)))
    n = scn.n_test if count is None else count
    return [
        synthesize_sample(
            scn, True, snr_db=snr_db, d=d,
            rng=substream(scn.master_seed, _TAG_TEST, i, extra=extra),
            chol=chol,
        )
        for i in range(n)
    ]


@dataclass
class Splits:
    """Dataset splits of one scenario; test blocks are generated on demand."""

    scenario: Scenario
    train_h0: list = field(repr=False)
    cal_h0: list = field(repr=False)

    def test(self, snr_db, d, count=None):
        return test_block(self.scenario, snr_db, d, count=count)

    def fresh_h0(self, count=None):
        return fresh_h0_split(self.scenario, count=count)


def make_splits(scn):
    return Splits(scenario=scn, train_h0=train_split(scn), cal_h0=cal_split(scn))


# ---------------------------------------------------------------------------
# dataset interchange files


_MAGIC = b"RDS1"
_FAMILY_CODE = {GAUSSIAN: 0, COMPOUND: 1}
_FAMILY_NAME = {v: k for k, v in _FAMILY_CODE.items()}


def write_dataset(path, scn, samples):
    """Write samples in the interchange format documented in this module."""
    samples = list(samples)
    k = 0 if samples[0].secondary is None else samples[0].secondary.shape[1]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(
            "<IIBQI", scn.m, k, _FAMILY_CODE[scn.clutter_family],
            scn.master_seed & 0xFFFFFFFFFFFFFFFF, len(samples),
        ))
        for s in samples:
            snr = float("nan") if s.target_snr_db is None else s.target_snr_db
            dop = -1 if s.target_doppler is None else s.target_doppler
            fh.write(struct.pack("<Bdq", 1 if s.label == "h1" else 0, snr, dop))
            _write_complex(fh, s.cell)
            if k:
                for col in range(k):
                    _write_complex(fh, s.secondary[:, col])


def _write_complex(fh, vec):
    buf = np.empty(2 * len(vec))
    buf[0::2] = vec.real
    buf[1::2] = vec.imag
    fh.write(buf.astype("<f8").tobytes())


def read_dataset(path):
    """Read an interchange file; returns (header dict, list of Sample)."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a dataset interchange file")
        m, k, fam, seed, count = struct.unpack("<IIBQI", fh.read(21))
        header = {"m": m, "k": k, "family": _FAMILY_NAME[fam], "seed": seed,
                  "count": count}
        samples = []
        for _ in range(count):
            label, snr, dop = struct.unpack("<Bdq", fh.read(17))
            cell = _read_complex(fh, m)
            secondary = None
            if k:
                secondary = np.column_stack([_read_complex(fh, m) for _ in range(k)])
            samples.append(Sample(
                cell=cell, secondary=secondary,
                label="h1" if label else "h0",
                target_snr_db=None if np.isnan(snr) else snr,
                target_doppler=None if dop < 0 else int(dop),
            ))
    return header, samples


def _read_complex(fh, m):
    buf = np.frombuffer(fh.read(16 * m), dtype="<f8")
    return buf[0::2] + 1j * buf[1::2]
