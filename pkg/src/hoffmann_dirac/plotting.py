"""Optional PNG figures written next to the CSV/JSON outputs."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_profile(profile, path):
    r = profile.grid
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].semilogx(r, profile.f_tab ** 2)
    axes[0].set_xlabel(r"$\hat r$")
    axes[0].set_ylabel(r"$f^2$")
    axes[1].loglog(r, np.abs(profile.v_tab), label=r"$|v|$")
    if profile.params.g != 0:
        axes[1].loglog(r, np.abs(profile.params.g) / r, "--", lw=0.8, label=r"$|g|/\hat r$")
    axes[1].set_xlabel(r"$\hat r$")
    axes[1].legend(frameon=False)
    _save(fig, path)


def plot_spectrum(scans, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for scan in scans:
        if not scan.records:
            continue
        n = scan.principal_numbers
        ax.loglog(n, scan.gap_edge_distances, "o", ms=4, label=rf"$\kappa={scan.kappa}$")
    ax.set_xlabel("principal number n")
    ax.set_ylabel(r"$1 - E_n$")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(frameon=False)
    _save(fig, path)


def plot_gamma(x, series, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for label, y in series.items():
        ax.semilogx(x, y, label=label)
    ax.axhline(-0.25, color="k", lw=0.6, ls=":")
    ax.set_xlabel(r"$\hat x$")
    ax.set_ylabel(r"$\hat x^2\,\Gamma$")
    ax.set_yscale("symlog")
    ax.legend(frameon=False)
    _save(fig, path)
