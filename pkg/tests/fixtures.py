import numpy as np

from rosepen.polymat import eye, zeros
from rosepen.system import RosenbrockSystem, is_minimal


def desk1():
    """P = lambda^2, A = E = B = C = 1."""
    return RosenbrockSystem.build([[[0]], [[0]], [[1]]], [[1]], [[1]], [[1]], [[1]])


def eigenpole_system():
    """G = [[1, 1/(lambda - 2)], [0, 1]]."""
    return RosenbrockSystem.build([[[1, 0], [0, 1]]], [[2]], [[1]], [[0, 1]], [[1], [0]])


def diag_example():
    """G = diag(1/(lambda (lambda - 2)^2), (lambda - 2)/lambda)."""
    A = [[0, 1, 0, 0], [0, 0, 1, 0], [0, -4, 4, 0], [0, 0, 0, 0]]
    B = [[0, 0], [0, 0], [1, 0], [0, 1]]
    C = [[1, 0, 0, 0], [0, 0, 0, -2]]
    return RosenbrockSystem.build([[[0, 0], [0, 1]]], A, np.eye(4, dtype=int).tolist(), B, C)


def random_system(rng, n, r, m, positive=False):
    """Exact system with small integer data, nonsingular A_m and E = I.

    ``positive`` keeps every coefficient nonzero so block patterns are generic.
    """
    low = 1 if positive else -3

    def ints(shape):
        return rng.integers(low, 4, size=shape)

    stack = [ints((n, n)) for _ in range(m)]
    stack.append(ints((n, n)) + 10 * np.eye(n, dtype=int))
    return RosenbrockSystem.build(np.stack(stack).tolist(), ints((r, r)).tolist(),
                                  np.eye(r, dtype=int).tolist(), ints((r, n)).tolist(),
                                  ints((n, r)).tolist())


def layout(sys, blocks):
    """Constant (nm+r)-square matrix from {(I, J): block}; block index m is the state block."""
    sizes = [sys.n] * sys.m + [sys.r]
    offsets = np.cumsum([0] + sizes)
    out = zeros((offsets[-1], offsets[-1]), True)
    for (I, J), block in blocks.items():
        out[offsets[I]:offsets[I + 1], offsets[J]:offsets[J + 1]] = block
    return out


def identity(sys):
    return eye(sys.n, True)


def minimal_systems(rng, count, max_n=3, max_r=3, max_m=3):
    """``count`` random systems with no decoupling zeros; other draws are skipped."""
    found = []
    while len(found) < count:
        sys = random_system(rng, int(rng.integers(1, max_n + 1)),
                            int(rng.integers(1, max_r + 1)), int(rng.integers(1, max_m + 1)))
        if is_minimal(sys).minimal:
            found.append(sys)
    return found
