"""AMP on one spiked Wigner instance next to its state-evolution prediction.

Run: python demos/05_amp_vs_state_evolution.py
"""

from rankone.amp import amp_run, state_evolution_run
from rankone.bounds import ModelPoint
from rankone.channel import GaussianChannel
from rankone.oracle import generate_instance
from rankone.prior import make_sparse_rademacher


def main():
    prior = make_sparse_rademacher(1.0)
    delta, n = 0.5, 3000
    inst = generate_instance(prior, GaussianChannel(delta), n, seed=0)
    state = amp_run(prior, inst, max_iter=25, seed=1)
    se = state_evolution_run(ModelPoint(prior, delta), state.overlap_history[0], max_iter=25, tol=0.0, damping=0.0)
    print("t   AMP overlap  SE overlap")
    for t, (a, s) in enumerate(zip(state.overlap_history, se.m_values)):
        print(f"{t:2d}  {a:.4f}       {s:.4f}")


if __name__ == "__main__":
    main()
