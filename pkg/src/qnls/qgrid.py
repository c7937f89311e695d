"""Geometric q-grid and the q-difference operators the scheme is built from.

Index convention: ``n`` grows as the position shrinks, ``x_0 = 1 > x_1 > ... > x_N > 0``.
Every vector in this package is stored in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np


@dataclass(frozen=True)
class QParam:
    """The quantum parameter, strictly inside ``(0, 1)``."""

    q: float

    def __post_init__(self) -> None:
        q = float(self.q)
        if not (0.0 < q < 1.0) or not math.isfinite(q):
            raise ValueError(f"q must lie strictly between 0 and 1, got {self.q!r}")
        object.__setattr__(self, "q", q)

    def __float__(self) -> float:
        return self.q


QLike = Union[QParam, float]


def as_q(q: QLike) -> float:
    """Validate ``q`` and return it as a plain float."""
    if isinstance(q, QParam):
        return q.q
    return QParam(q).q


def q_number(m: int, q: QLike) -> float:
    """The q-integer ``[m]_q = 1 + q + ... + q^(m-1)``."""
    qv = as_q(q)
    return math.fsum(qv**j for j in range(m))


@dataclass(frozen=True)
class QGrid:
    """Truncated positive q-grid ``x_n = q^n``, ``n = 0..N``, with steps ``h_n = q^n (1 - q)``."""

    q: float
    N: int
    points: np.ndarray
    steps: np.ndarray

    @property
    def size(self) -> int:
        return self.N + 1


def build_grid(q: QLike, N: int) -> QGrid:
    qv = as_q(q)
    if int(N) != N or N < 1:
        raise ValueError(f"truncation order N must be an integer >= 1, got {N!r}")
    N = int(N)
    points = np.array([qv**n for n in range(N + 1)], dtype=float)
    steps = points * (1.0 - qv)
    points.flags.writeable = False
    steps.flags.writeable = False
    return QGrid(q=qv, N=N, points=points, steps=steps)


def locate(q: QLike, x: float) -> int:
    """Unique ``n`` with ``q^(n+1) < |x| <= q^n``."""
    qv = as_q(q)
    ax = abs(float(x))
    if ax == 0.0:
        raise ValueError("x = 0 does not belong to any q-interval")
    if not math.isfinite(ax):
        raise ValueError(f"x must be finite, got {x!r}")
    n = math.floor(math.log(ax) / math.log(qv))
    # the logarithm can land one off at exact powers of q
    while qv**n < ax:
        n -= 1
    while qv ** (n + 1) >= ax:
        n += 1
    return n


def q_derivative(f: Callable[[float], float], x: float, q: QLike) -> float:
    """Jackson q-derivative ``(f(x) - f(qx)) / ((1 - q) x)``.

    The ``x = 0`` branch (``f'(0)``) is deliberately not supported.
    """
    qv = as_q(q)
    if x == 0:
        raise ValueError("q-derivative at x = 0 is not supported")
    return (f(x) - f(qv * x)) / ((1.0 - qv) * x)


def q_laplacian(f: Callable[[float], float], x: float, q: QLike) -> float:
    """``(q f(x/q) - (1 + q) f(x) + f(qx)) / x^2``."""
    qv = as_q(q)
    if x == 0:
        raise ValueError("q-Laplacian at x = 0 is not supported")
    # grouped as differences so constants and linears cancel exactly
    fx = f(x)
    return (qv * (f(x / qv) - fx) + (f(qv * x) - fx)) / (x * x)


def scaled_discrete_laplacian(U: np.ndarray, n: int, grid: QGrid) -> complex:
    """Scaled three-point stencil at interior index ``n``.

    ``(2q/(1+q)) (q U_{n-1} - (1+q) U_n + U_{n+1}) / h_n^2``, which reduces to ``u''``
    on quadratics for every ``q``.
    """
    U = np.asarray(U)
    if U.shape != (grid.size,):
        raise ValueError(f"expected a vector of length {grid.size}, got shape {U.shape}")
    if not 1 <= n <= grid.N - 1:
        raise ValueError(f"index {n} is not interior (1..{grid.N - 1})")
    q = grid.q
    h = grid.steps[n]
    stencil = q * (U[n - 1] - U[n]) + (U[n + 1] - U[n])
    return 2.0 * q / (1.0 + q) * stencil / (h * h)
