"""Shared matplotlib defaults and small figure writers for the CLI.

Importing this module selects the Agg backend (file output only, no
display server needed) and installs the house style. Every writer
closes its figure, so batch runs do not accumulate state.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams.update({
    "figure.figsize": (6.4, 4.2),
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.35,
    "grid.linestyle": ":",
    "lines.linewidth": 1.6,
    "font.size": 10,
    "legend.framealpha": 0.9,
})


def line_figure(path, x, curves, xlabel: str, ylabel: str,
                title: str | None = None, logy: bool = False) -> str:
    """Plot one or more curves over a shared abscissa and save to path.

    ``curves`` maps legend labels to ordinate arrays; a single unlabeled
    curve can be passed as {None: y}.
    """
    fig, ax = plt.subplots()
    labeled = False
    for label, y in curves.items():
        ax.plot(x, y, label=label)
        labeled = labeled or label is not None
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if labeled:
        ax.legend()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def scatter_figure(path, x, y, xlabel: str, ylabel: str,
                   title: str | None = None) -> str:
    """Scatter plot, used for point clouds such as spectra in the
    complex plane."""
    fig, ax = plt.subplots()
    ax.scatter(x, y, s=18, alpha=0.85)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.savefig(path)
    plt.close(fig)
    return str(path)
