"""Small reference designs shared by the tests."""
import numpy as np

# 4 x 3 design whose Gram has eigenvalues {4, 4, 1}
X_SMALL = np.array(
    [[0.0, 0.0, 1.5], [-4 / 3, -2 / 3, 1 / 6], [2 / 3, 4 / 3, 1 / 6], [-2 / 3, 2 / 3, -7 / 6]]
)
DELTA_SMALL = np.array([-2.0, 2.0, 1.0]) / np.sqrt(3.0)

# 4 x 6 two-level design: columns 1-6, 2-5 and 3-4 are negated copies
X_FF = np.array(
    [
        [-1, -1, -1, 1, 1, 1],
        [-1, 1, 1, -1, -1, 1],
        [1, -1, 1, -1, 1, -1],
        [1, 1, -1, 1, -1, -1],
    ],
    dtype=float,
)
Y_FF = np.array([2.0, 1.0, -4.0, 1.5])
DELTA_FF = np.array(
    [[0, -2, 0, 0, -2, 0], [0, 0, -2, -2, 0, 0], [-2, 0, 0, 0, 0, -2]], dtype=float
)
LASSO_FF = np.array([-0.5625, 0.4375, -0.6875, 0.6875, -0.4375, 0.5625])
OLS_FF = np.array([-0.6875, 0.5625, -0.8125, 0.8125, -0.5625, 0.6875])
INCOHERENT_FF = 2 * np.array([-0.5625, 0.4375, -0.6875, 0.0, 0.0, 0.0])


def random_problem(rng, n, p, rank=None, corr=0.3):
    """Gaussian design (optionally of given rank) with a sparse signal."""
    if rank is None:
        x = np.sqrt(1 - corr) * rng.standard_normal((n, p)) + np.sqrt(corr) * rng.standard_normal((n, 1))
    else:
        x = rng.standard_normal((n, rank)) @ rng.standard_normal((rank, p))
    beta = np.zeros(p)
    k = max(1, p // 3)
    beta[:k] = rng.uniform(0.5, 2.0, k) * rng.choice([-1, 1], k)
    y = x @ beta + rng.standard_normal(n)
    return x, y
