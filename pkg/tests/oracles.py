"""Independent reference computations shared by the unit and acceptance suites."""
import math

import numpy as np
from numpy.polynomial import polynomial as P


def reference_potential(d, theta):
    """Direct transcription of the definition with explicit loops."""
    H = [[1 + 0j] * d for _ in range(d)]
    for r in range(1, d):
        for c in range(1, d):
            H[r][c] = complex(math.cos(theta[(r - 1) * (d - 1) + c - 1]),
                              math.sin(theta[(r - 1) * (d - 1) + c - 1]))
    total = 0.0
    for i in range(d):
        for j in range(d):
            if i != j:
                g = sum(H[i][k] * H[j][k].conjugate() for k in range(d))
                total += abs(g) ** 2
    return total


def fd_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def f4_jacobian_display(a):
    s = math.sin(a)
    return 4 * np.array([
        [-3, 1, 1, 1, -s, -1, 1, -1, 1],
        [1, -3, 1, -s, 1, s, -1, 1, -1],
        [1, 1, -3, -1, s, 1, 1, -1, 1],
        [1, -s, -1, -3, 1, 1, 1, s, -1],
        [-s, 1, s, 1, -3, 1, s, 1, -s],
        [-1, s, 1, 1, 1, -3, -1, -s, 1],
        [1, -1, 1, 1, s, -1, -3, 1, 1],
        [-1, 1, -1, s, 1, -s, 1, -3, 1],
        [1, -1, 1, -1, -s, 1, 1, 1, -3],
    ])


def f4_char_roots(a):
    """Roots of -lambda (lambda + 8) q1 q2 c, each factor solved on its own."""
    s = math.sin(a)
    q1 = [128 * (1 - s), 32 - 8 * s, 1]
    q2 = [128 * (1 + s), 32 + 8 * s, 1]
    cubic = [512 * (1 - s * s), 352 - 64 * s * s, 36, 1]
    roots = [0.0, -8.0, *P.polyroots(q1), *P.polyroots(q2), *P.polyroots(cubic)]
    return np.sort(np.real(roots))


def d6_char_roots(c):
    """Roots of lambda^4 (lambda + 24) f1^2 f2 f3, f1 roots listed twice."""
    c2, c4 = math.cos(2 * c), math.cos(4 * c)
    f1 = [3686400, 1241600 + 32768 * c2 + 512 * c4, 131840 + 2048 * c2, 6096 + 32 * c2, 128, 1]
    f2 = [92160, 29312 + 256 * c2, 2608, 88, 1]
    f3 = np.array([5308416, 5140480, 1386496, 142272, 6448, 132, 1.0])
    f3[:5] += 64 * c2 * np.array([-36864, -2176, 1408, 76, 1])
    r1 = P.polyroots(f1)
    roots = [0, 0, 0, 0, -24, *r1, *r1, *P.polyroots(f2), *P.polyroots(f3)]
    return np.sort(np.real(roots))
