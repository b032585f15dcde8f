"""Figure rendering for the numeric report paths (headless backend)."""

from __future__ import annotations


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_trajectory_plot(traj, path, title=None):
    """u, u', u'' against x for one integrated trajectory."""
    plt = _pyplot()
    xs = [s[0] for s in traj.samples]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for idx, label in ((1, "u"), (2, "u'"), (3, "u''")):
        ax.plot(xs, [s[idx] for s in traj.samples], label=label, linewidth=1.4)
    ax.set_xlabel("x")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_transform_check_plot(xbars, u_mapped, u_canonical, path, title=None):
    """Mapped solution against the canonical one, with the pointwise gap."""
    plt = _pyplot()
    fig, (ax0, ax1) = plt.subplots(
        2, 1, figsize=(7.0, 5.6), sharex=True, height_ratios=[3, 1]
    )
    ax0.plot(xbars, u_mapped, label="mapped u", linewidth=1.6)
    ax0.plot(xbars, u_canonical, "--", label="canonical u", linewidth=1.2)
    ax0.set_ylabel("u")
    ax0.legend(loc="best")
    ax0.grid(True, alpha=0.3)
    if title:
        ax0.set_title(title)
    gaps = [abs(a - b) for a, b in zip(u_mapped, u_canonical)]
    ax1.semilogy(xbars, [max(g, 1e-18) for g in gaps], color="firebrick", linewidth=1.2)
    ax1.set_xlabel("x")
    ax1.set_ylabel("|gap|")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
