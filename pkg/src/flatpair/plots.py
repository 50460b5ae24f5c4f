"""Figures for the ``report`` command.  Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402

# fixed metadata keeps repeated renders comparable
_SAVE = {"dpi": 120, "bbox_inches": "tight", "metadata": {"Software": None}}


def _polygon_offsets(S, gap: float = 0.25) -> list[complex]:
    """Lay the polygons out on a roughly square grid."""
    n = len(S.polygons)
    cols = int(np.ceil(np.sqrt(n)))
    boxes = [np.asarray(poly) for poly in S.polygons]
    w = max(float(z.real.max() - z.real.min()) for z in boxes) + gap
    h = max(float(z.imag.max() - z.imag.min()) for z in boxes) + gap
    return [complex(w * (i % cols) - z.real.min(), -h * (i // cols) - z.imag.min()) for i, z in enumerate(boxes)]


def plot_mesh(M, values, path, title: str = "", cmap: str = "viridis"):
    """Faces coloured by ``values`` with the points of Sigma marked."""
    S = M.surface
    off = np.asarray(_polygon_offsets(S))
    P = M.face_pos + off[M.face_poly][:, None]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    pc = PolyCollection(np.stack([P.real, P.imag], axis=-1), array=np.asarray(values, dtype=float),
                        cmap=cmap, edgecolors="k", linewidths=0.1)
    ax.add_collection(pc)
    fig.colorbar(pc, ax=ax, shrink=0.8)
    for cp in M.cone_points:
        for p, i in cp.corners:
            z = S.polygons[p][i] + off[p]
            ax.plot(z.real, z.imag, "o", ms=4, color="tab:red" if cp.order else "tab:orange")
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_decay(radii, discarded, path, slope: float | None = None):
    """Log-log plot of the discarded contour piece against the contour radius."""
    r = np.asarray(radii, dtype=float)
    d = np.asarray(discarded, dtype=float)
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.loglog(r, d, "o-", label="discarded piece")
    if len(r) and d[0] > 0:
        ax.loglog(r, d[0] * (r / r[0]) ** 2, "k--", lw=0.8, label="slope 2")
    ax.set_xlabel("contour radius")
    ax.set_ylabel("|discarded|")
    if slope is not None:
        ax.set_title(f"fitted slope {slope:.3f}")
    ax.legend(frameon=False)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_stokes(factors, values, path):
    """Real and imaginary parts of the pairing as the contour radius varies."""
    v = np.asarray(values, dtype=complex)
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.plot(factors, v.real, "o-", label="Re")
    ax.plot(factors, v.imag, "s-", label="Im")
    ax.set_xlabel("radius factor")
    ax.set_ylabel("pairing")
    ax.legend(frameon=False)
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_sandwich(hodge, teich, upper, path):
    """Teichmuller estimates against Hodge norms with the two bounds."""
    h = np.asarray(hodge, dtype=float)
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    order = np.argsort(h)
    ax.plot(h[order], h[order], "k-", lw=0.8, label="lower bound")
    ax.plot(h[order], np.asarray(upper, dtype=float)[order], "k--", lw=0.8, label="upper bound")
    ax.plot(h, teich, "o", label="estimate")
    ax.set_xlabel("Hodge norm")
    ax.set_ylabel("Teichmuller estimate")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
