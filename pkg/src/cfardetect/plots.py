"""Figure-style report plots: Pd-vs-SNR curves and per-bin Pd heat maps.

Output is standalone SVG with no display dependency.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_pd_curves", "plot_pd_maps"]


def _group(rows):
    by_det = {}
    for r in rows:
        by_det.setdefault(r.detector, []).append(r)
    return by_det


def plot_pd_curves(rows, path):
    """Mean-over-bins Pd as a function of SNR, one curve per detector."""
    by_det = _group(rows)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for det in sorted(by_det):
        snrs = sorted({r.snr_db for r in by_det[det]})
        means = [np.mean([r.pd for r in by_det[det] if r.snr_db == s]) for s in snrs]
        ax.plot(snrs, means, marker="o", markersize=3, label=det)
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("Pd (mean over Doppler bins)")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    family = rows[0].clutter_family if rows else ""
    ax.set_title(f"Detection probability, {family} clutter")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_pd_maps(rows, out_dir, family):
    """One SNR x Doppler Pd heat map per detector; returns written paths."""
    by_det = _group(rows)
    paths = []
    for det in sorted(by_det):
        sub = by_det[det]
        bins = sorted({r.doppler_bin for r in sub})
        snrs = sorted({r.snr_db for r in sub})
        grid = np.full((len(snrs), len(bins)), np.nan)
        for r in sub:
            grid[snrs.index(r.snr_db), bins.index(r.doppler_bin)] = r.pd
        fig, ax = plt.subplots(figsize=(6, 4.5))
        im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0, vmax=1,
                       extent=(bins[0] - 0.5, bins[-1] + 0.5, snrs[0], snrs[-1]))
        ax.set_xlabel("Doppler bin")
        ax.set_ylabel("SNR (dB)")
        ax.set_title(f"Pd map: {det}, {family}")
        fig.colorbar(im, ax=ax, label="Pd")
        fig.tight_layout()
        path = f"{out_dir}/pd_map_{det}_{family}.svg"
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths
