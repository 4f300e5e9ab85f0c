"""Upper (Bethe) and lower bounds on the mutual information per variable as
functions of the noise level, for a sparse and a moderately dense prior.

Writes bound_curves.png next to the working directory when matplotlib is
installed (``pip install -e .[demos]``); otherwise prints the curves.

Run: python demos/02_bound_curves.py
"""

import numpy as np

from rankone.phase import figure_curve, threshold_set


def main():
    panels = {0.05: np.geomspace(0.001, 0.05, 40), 0.6: np.geomspace(0.05, 1.5, 40)}
    curves = {}
    for rho, grid in panels.items():
        curves[rho] = figure_curve(rho, grid)
        ts = threshold_set(rho, tol=min(1e-3, 1e-3 * rho**2))
        print(
            f"rho={rho}: delta_algo={ts.delta_algo:.5f} delta_detect={ts.delta_detect:.5f}"
            f" delta_match={ts.delta_match:.5f}"
        )
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        for rho, c in curves.items():
            print(f"\nrho={rho}\ndelta     i_B       i_L")
            for d, ub, lb in zip(c["delta"], c["i_b_min"], c["i_l_min"]):
                print(f"{d:.5f}  {ub:.5f}  {lb:.5f}")
        return
    fig, axes = plt.subplots(2, 1, figsize=(5, 7))
    for ax, (rho, c) in zip(axes, curves.items()):
        ax.plot(c["delta"], c["i_b_min"], label="upper (Bethe)")
        ax.plot(c["delta"], c["i_l_min"], "--", label="lower")
        ax.set_xscale("log")
        ax.set_xlabel("delta")
        ax.set_ylabel("I/n")
        ax.set_title(f"rho = {rho}")
        ax.legend()
    fig.tight_layout()
    fig.savefig("bound_curves.png", dpi=120)
    print("wrote bound_curves.png")


if __name__ == "__main__":
    main()
