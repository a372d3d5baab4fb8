"""Figure rendering for the report path; every figure goes to a file."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "savefig.bbox": "tight",
    "svg.hashsalt": "aquid",
}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    # no timestamps or version strings, so reruns are byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_levels(table: dict, path, x: str = "Omega", title: str | None = None) -> Path:
    """Energy levels against flux, x axis in units of 2 pi."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = np.asarray(table[x]) / (2 * np.pi) if x == "Omega" else np.asarray(table[x])
        for name in sorted((k for k in table if k[0] == "E" and k[1:].isdigit()),
                           key=lambda k: int(k[1:])):
            ax.plot(xs, table[name], label=name)
        ax.set_xlabel(r"$\Omega / 2\pi$" if x == "Omega" else x)
        ax.set_ylabel("E / t")
        if title:
            ax.set_title(title)
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_currents(table: dict, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = np.asarray(table["Omega"]) / (2 * np.pi)
        ax.plot(xs, table["I0_norm"], "-", label="ground")
        ax.plot(xs, table["I1_norm"], "--", label="first excited")
        ax.axhline(0.0, color="0.5", lw=0.6)
        ax.set_xlabel(r"$\Omega / 2\pi$")
        ax.set_ylabel("I / max|I|")
        ax.legend()
        return _save(fig, path)


def plot_gaps(table: dict, axis: str, path, group: str | None = None) -> Path:
    """Gap (left) and quality (right) against ``axis``, one curve per ``group``."""
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.5, 3.4))
        xs = np.asarray(table[axis], dtype=float)
        groups = [None] if group is None else sorted(set(np.asarray(table[group]).tolist()))
        for g in groups:
            sel = np.ones(xs.size, bool) if g is None else np.asarray(table[group]) == g
            label = None if g is None else f"{group}={g:g}"
            ax1.plot(xs[sel], np.asarray(table["gap"])[sel], "o-", ms=3, label=label)
            ax2.plot(xs[sel], np.asarray(table["quality"])[sel], "o-", ms=3, label=label)
        ax1.set_ylabel(r"$\Delta E_1 / t$")
        ax2.set_ylabel(r"$\Delta E_1 / \Delta E_2$")
        ax2.axhline(0.5, color="0.5", lw=0.6, ls=":")
        if axis == "U":
            ax1.set_xscale("log")
            ax1.set_yscale("log")
            ax2.set_xscale("log")
        for ax in (ax1, ax2):
            ax.set_xlabel(axis)
        if group is not None:
            ax2.legend()
        fig.tight_layout()
        return _save(fig, path)


def plot_density(table: dict, path, label_key: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        sites = sorted((k for k in table if k.startswith("n") and k[1:].isdigit()),
                       key=lambda k: int(k[1:]))
        js = np.arange(1, len(sites) + 1)
        for row in range(len(table[sites[0]])):
            prof = [table[s][row] for s in sites]
            label = None if label_key is None else f"{label_key}={table[label_key][row]:g}"
            ax.plot(js, prof, "o-", ms=4, label=label)
        ax.set_xlabel("site j")
        ax.set_ylabel(r"$\langle n_j \rangle$")
        if label_key is not None:
            ax.legend()
        return _save(fig, path)


def plot_c_scaling(table: dict, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for a in range(3):
            ax.plot(table["M"], table[f"c{a}"], "o-", ms=4, label=rf"$c_{a}$")
        ax.set_xlabel("M")
        ax.set_ylabel(r"$c_\alpha$")
        ax.legend()
        return _save(fig, path)


def plot_wkb(table: dict, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for r in sorted(set(np.asarray(table["EJ_over_U"]).tolist())):
            sel = np.asarray(table["EJ_over_U"]) == r
            d = np.asarray(table["delta"])[sel]
            line, = ax.semilogy(d, np.asarray(table["grid_gap"])[sel], "o-", ms=3,
                                label=f"grid, E_J/U={r:g}")
            ax.semilogy(d, np.asarray(table["wkb_gap"])[sel], "--", color=line.get_color(),
                        label=f"WKB, E_J/U={r:g}")
        ax.set_xlabel(r"$\delta = E_J / E_L$")
        ax.set_ylabel(r"$\Delta / U$")
        ax.legend(ncol=2)
        return _save(fig, path)


def plot_profiles(table: dict, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        deg = np.degrees(np.asarray(table["angle"]))
        ax.plot(deg, table["target"], "k-", lw=2, label="target")
        styles = {"iter1": ("r-", "iteration 1"), "iter5": ("b-", "iteration 5"),
                  "best": ("g--", "best")}
        for key, (fmt, label) in styles.items():
            if key in table:
                ax.plot(deg, table[key], fmt, lw=1, label=label)
        ax.set_xlabel("azimuth (deg)")
        ax.set_ylabel("normalized intensity")
        ax.legend()
        return _save(fig, path)


def plot_history(table: dict, path, threshold: float | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(table["iteration"], table["discrepancy_percent"], "o-", ms=3)
        if threshold is not None:
            ax.axhline(threshold, color="0.5", ls=":")
        ax.set_xlabel("feedback iteration")
        ax.set_ylabel("discrepancy (%)")
        return _save(fig, path)


def plot_image(image: np.ndarray, path, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.imshow(image, cmap="inferno", origin="lower")
        ax.set_axis_off()
        if title:
            ax.set_title(title)
        return _save(fig, path)
