"""Scalar building blocks: the free entropy J, the denoiser and the
effective noise of a binary output channel.

Run: python demos/01_scalar_and_channels.py
"""

import numpy as np

from rankone.channel import BernoulliLinearChannel
from rankone.prior import make_sparse_rademacher
from rankone.scalar import denoiser, j_func, posterior_variance


def main():
    prior = make_sparse_rademacher(0.3)
    b = np.linspace(-4, 4, 9)
    print("B       J(1, B)    eta(1, B)  var(1, B)")
    for bi, j, eta, var in zip(b, j_func(prior, 1.0, b), denoiser(prior, 1.0, b), posterior_variance(prior, 1.0, b)):
        print(f"{bi:+.1f}  {j:+.5f}  {eta:+.5f}  {var:.5f}")

    # a binary channel P(Y=1 | w) = base + slope * w behaves like Gaussian noise
    # whose variance is the inverse Fisher information at w = 0
    for base, slope in [(0.5, 1.0), (0.3, 0.5), (0.5, 0.25)]:
        channel = BernoulliLinearChannel(base, slope)
        print(f"bernoulli_linear(base={base}, slope={slope}): effective delta = {channel.effective_delta():.4f}")


if __name__ == "__main__":
    main()
