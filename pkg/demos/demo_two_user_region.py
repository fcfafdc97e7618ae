"""Trace the two-user secrecy/multicast rate region for every scheme.

Walks the benchmark layout (surface halfway between the access point and the
far user), runs the fractional-program sweep, the covariance-blend heuristic,
and the three baselines on the same fading block, and prints the boundary
points side by side. With matplotlib installed, also saves region_two_user.png.
"""
import numpy as np

from irssec import SweepParams, generate_channels, sweep_region, two_user_scenario

SEED = 7
GRID = 9

config = two_user_scenario(d1=20.0, n_y=5, n_z=2, seed=SEED)
ch = generate_channels(config)
p = config.total_power_w
print(f"surface elements: {config.n_elements}, users: {ch.k}, power: {p} W")
print(f"direct-path SNRs (dB): "
      f"{np.round(10 * np.log10(np.abs(ch.h) ** 2 / ch.sigma2), 1)}")

params = SweepParams(t_alpha=40, t_lambda=40, t_g=500)
curves = {}
for scheme in ("cct", "wscm", "random-irs", "no-irs", "tdma", "upper-bound"):
    region = sweep_region(ch, p, scheme, GRID, params, seed=SEED)
    curves[scheme] = region
    print(f"\n{scheme}")
    for pt in region.points:
        flag = "" if pt.feasible else "  (floor unsupportable)"
        print(f"  floor {pt.r_m_target:6.3f} -> secrecy {pt.r_c_achieved:6.3f} bits, "
              f"alpha {pt.alpha:7.4f} W{flag}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for scheme, region in curves.items():
        xs = [pt.r_m_target for pt in region.points]
        ys = [pt.r_c_achieved for pt in region.points]
        style = "--" if scheme in ("upper-bound", "tdma") else "-"
        ax.plot(xs, ys, style, marker="o", ms=3, label=scheme)
    ax.set_xlabel("multicast rate floor (bits/s/Hz)")
    ax.set_ylabel("secrecy rate (bits/s/Hz)")
    ax.set_title("Two-user rate region by scheme")
    ax.legend()
    fig.tight_layout()
    fig.savefig("region_two_user.png", dpi=150)
    print("\nsaved region_two_user.png")
except ImportError:
    print("\nmatplotlib not installed; skipped the plot")
