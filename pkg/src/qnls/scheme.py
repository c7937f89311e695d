"""Explicit q-scheme for ``i u_t + u_xx + f(u) = 0`` on the truncated grid ``x_n = q^n``.

One step reads

    U_n^{k+1} = q s_n U_{n-1} + (1 - (1+q) s_n) U_n + s_n U_{n+1} + i l_k f(U_n),

with ``s_n = i delta_n^k``, ``delta_n^k = (2q/(1+q)) l_k / h_n^2`` and time step
``l_k = (1-q) q^k``. Row 0 folds a Neumann ghost ``U_{-1} = U_0`` into the diagonal,
row ``N`` drops the ``U_{N+1}`` neighbour (ghost value 0).

Time levels are ``t_k = t0 + 1 - q^k``; a run may start at any index ``k0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import cubic_nonlinearity
from .qgrid import QLike, as_q, build_grid

Nonlinearity = Callable[[np.ndarray], np.ndarray]


class DivergenceError(RuntimeError):
    """Raised when an evolution produces a non-finite value."""

    def __init__(self, n: int, k: int, trajectory: list):
        super().__init__(f"non-finite value at grid index n={n}, time index k={k}")
        self.n = n
        self.k = k
        self.trajectory = trajectory


def time_step(q: QLike, k: int) -> float:
    qv = as_q(q)
    return (1.0 - qv) * qv**k


def time_level(q: QLike, k: int, t0: float = 0.0) -> float:
    qv = as_q(q)
    return t0 + (1.0 - qv**k)


def _delta(q: float, n, k):
    scale = 2.0 * q / ((1.0 + q) * (1.0 - q))
    return scale * np.power(q, np.asarray(k, dtype=float) - 2.0 * np.asarray(n, dtype=float))


@dataclass(frozen=True)
class SchemeCoeffs:
    delta: np.ndarray
    sigma: np.ndarray
    beta: np.ndarray


def coeff(q: QLike, n, k) -> SchemeCoeffs:
    """``delta_n^k``, ``sigma = i delta`` and ``beta = 1 - (1+q) sigma``; broadcasts over ``n, k``."""
    qv = as_q(q)
    if np.any(np.asarray(n) < 0) or np.any(np.asarray(k) < 0):
        raise ValueError("indices n and k must be nonnegative")
    delta = _delta(qv, n, k)
    sigma = 1j * delta
    beta = 1.0 - (1.0 + qv) * sigma
    if np.ndim(delta) == 0:
        return SchemeCoeffs(float(delta), complex(sigma), complex(beta))
    return SchemeCoeffs(delta, sigma, beta)


@dataclass(frozen=True)
class StepMatrix:
    """Tridiagonal truncated update matrix of order ``N + 1``.

    ``lower[j] = A[j+1, j]``, ``diag[j] = A[j, j]``, ``upper[j] = A[j, j+1]``.
    ``sigma`` holds ``sigma_n^k`` for every row, including the coefficient of the
    neighbour dropped from row ``N``.
    """

    q: float
    k: int
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    sigma: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    @property
    def N(self) -> int:
        return len(self.diag) - 1

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def row_sums(self) -> np.ndarray:
        lo = np.concatenate(([0j], self.lower))
        up = np.concatenate((self.upper, [0j]))
        return (lo + self.diag) + up

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Plain banded product ``A v``."""
        out = self.diag * v
        out[1:] += self.lower * v[:-1]
        out[:-1] += self.upper * v[1:]
        return out


def assemble_matrix(q: QLike, N: int, k: int) -> StepMatrix:
    qv = as_q(q)
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if k < 0:
        raise ValueError(f"time index must be nonnegative, got {k}")
    delta = _delta(qv, np.arange(N + 1), k)
    # s = (1+q) delta rounded once; lower is re-derived from it so that
    # lower + upper == s holds exactly (Sterbenz), making interior row sums exactly 1
    s = qv * delta + delta
    lower_im = s - delta
    sigma = 1j * delta
    diag = 1.0 - 1j * s
    diag[0] = 1.0 - sigma[0]
    return StepMatrix(
        q=qv,
        k=int(k),
        lower=1j * lower_im[1:],
        diag=diag,
        upper=sigma[:-1].copy(),
        sigma=sigma,
    )


@dataclass(frozen=True)
class FieldState:
    """``U^k`` in grid order (``n`` increasing as ``x`` decreases)."""

    values: np.ndarray
    k: int
    t: float


@dataclass(frozen=True)
class EvolutionConfig:
    q: float
    N: int
    K: int
    t0: float = 0.0
    k0: int = 0
    nonlinearity: Nonlinearity = field(default=cubic_nonlinearity, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "q", as_q(self.q))
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.K < 0:
            raise ValueError(f"K must be >= 0, got {self.K}")
        if self.k0 < 0:
            raise ValueError(f"k0 must be >= 0, got {self.k0}")

    def grid(self):
        return build_grid(self.q, self.N)


def step(
    state: FieldState,
    matrix: StepMatrix,
    l_k: float,
    nonlinearity: Nonlinearity = cubic_nonlinearity,
) -> FieldState:
    """Advance one time level: ``U^{k+1} = A_k U^k + i l_k f(U^k)``.

    The product is evaluated in difference form,
    ``(A U)_n = U_n sum_j A_nj + sum_{j != n} A_nj (U_j - U_n)``,
    which keeps constant fields bit-exact away from the truncation row.
    """
    U = np.asarray(state.values, dtype=complex)
    if U.shape != (matrix.size,):
        raise ValueError(f"state has shape {U.shape}, matrix has order {matrix.size}")
    if state.k != matrix.k:
        raise ValueError(f"state is at time index {state.k}, matrix at {matrix.k}")
    with np.errstate(all="ignore"):
        change = np.zeros_like(U)
        change[1:] += matrix.lower * (U[:-1] - U[1:])
        change[:-1] += matrix.upper * (U[1:] - U[:-1])
        change += (matrix.row_sums() - 1.0) * U
        forcing = 1j * l_k * nonlinearity(U)
        new = U + change + forcing
    return FieldState(values=new, k=state.k + 1, t=state.t + l_k)


def evolve(config: EvolutionConfig, initial) -> list[FieldState]:
    """Trajectory ``U^{k0}, ..., U^{k0+K}``, assembling ``A_k`` fresh at each level.

    Raises :class:`DivergenceError` at the first non-finite entry; the partial
    trajectory (all finite levels) is attached to the exception.
    """
    U0 = np.array(initial, dtype=complex)
    if U0.shape != (config.N + 1,):
        raise ValueError(f"initial field has shape {U0.shape}, expected ({config.N + 1},)")
    state = FieldState(U0, config.k0, time_level(config.q, config.k0, config.t0))
    trajectory = [state]
    for k in range(config.k0, config.k0 + config.K):
        matrix = assemble_matrix(config.q, config.N, k)
        state = step(state, matrix, time_step(config.q, k), config.nonlinearity)
        bad = ~np.isfinite(state.values)
        if bad.any():
            raise DivergenceError(int(np.argmax(bad)), state.k, trajectory)
        trajectory.append(state)
    return trajectory


@dataclass(frozen=True)
class DominanceReport:
    passed: bool
    margin: float
    margins: np.ndarray


def _squared_gap(d: np.ndarray, off: np.ndarray) -> np.ndarray:
    # |d|^2 - off^2 without forming the (possibly ~1e70) squares separately
    return d.real * d.real + (np.abs(d.imag) - off) * (np.abs(d.imag) + off)


def dominance_check(matrix: StepMatrix) -> DominanceReport:
    """Row-wise ``|diag|^2 - (off-diagonal weight)^2``.

    Row 0 is weighed against ``|sigma_0|``, rows ``n >= 1`` against
    ``|q sigma_n| + |sigma_n| = (1+q)|sigma_n|`` (the infinite-matrix row, so row ``N``
    counts its dropped neighbour). For assembled matrices every margin is 1.
    """
    off = np.empty(matrix.size)
    off[0] = np.abs(matrix.upper[0])
    upper_full = np.concatenate((matrix.upper, [matrix.sigma[-1]]))
    off[1:] = np.abs(matrix.lower) + np.abs(upper_full[1:])
    margins = _squared_gap(np.asarray(matrix.diag), off)
    margin = float(np.min(margins))
    return DominanceReport(passed=bool(margin > 0), margin=margin, margins=margins)


@dataclass(frozen=True)
class CFLReport:
    """Per time level: largest index with ``k >= 2n+1`` (-1 if none), ``max_n |sigma_n^k|``."""

    q: float
    N: int
    ks: np.ndarray
    trusted_n: np.ndarray
    max_sigma: np.ndarray
    full_grid_ok: np.ndarray

    @property
    def satisfied_anywhere(self) -> bool:
        return bool(self.full_grid_ok.any())

    @property
    def first_full_k(self) -> Optional[int]:
        hits = np.flatnonzero(self.full_grid_ok)
        return int(self.ks[hits[0]]) if len(hits) else None

    def first_violation(self, k: int) -> Optional[int]:
        """Smallest grid index breaking ``k >= 2n+1`` at level ``k``, or ``None``."""
        n = (k - 1) // 2 + 1
        return n if n <= self.N else None

    @property
    def worst(self) -> tuple[int, int, float]:
        """``(n, k, |sigma|)`` of the largest coefficient over the run."""
        i = int(np.argmax(self.max_sigma))
        return self.N, int(self.ks[i]), float(self.max_sigma[i])


def cfl_diagnostic(q: QLike, N: int, K: int, k0: int = 0) -> CFLReport:
    qv = as_q(q)
    ks = np.arange(k0, k0 + K + 1)
    trusted = np.minimum((ks - 1) // 2, N)
    # q < 1, so the largest |sigma| at each level sits at n = N
    max_sigma = _delta(qv, N, ks)
    return CFLReport(
        q=qv,
        N=N,
        ks=ks,
        trusted_n=trusted,
        max_sigma=np.asarray(max_sigma, dtype=float),
        full_grid_ok=ks >= 2 * N + 1,
    )
