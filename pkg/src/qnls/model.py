"""Continuous problem: cubic nonlinearity, sech solitons, initial data, residual oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .qgrid import QGrid

SECH_CUTOFF = 350.0


@dataclass(frozen=True)
class SolitonParams:
    """Parameters of ``sqrt(2a/qs) exp(i(cx/2 - theta t + varphi)) sech(sqrt(a)(x - ct) + phi)``."""

    a: float
    qs: float
    c: float
    varphi: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"soliton parameter a must be positive, got {self.a!r}")
        if not self.qs > 0:
            raise ValueError(f"soliton parameter qs must be positive, got {self.qs!r}")

    @property
    def theta(self) -> float:
        return self.c * self.c / 4.0 - self.a

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0 * self.a / self.qs)


# Standard experiment settings.
SINGLE_SOLITON = SolitonParams(a=0.01, qs=1.0, c=0.1, varphi=0.0, phi=0.0)
TWO_SOLITONS = (
    SolitonParams(a=1.0, qs=2.0, c=4.0, varphi=0.0, phi=15.0),
    SolitonParams(a=2.25, qs=2.0, c=-4.0, varphi=0.0, phi=-7.5),
)


def sech(z):
    """Overflow-safe ``1/cosh``; exactly 0 beyond ``|z| > 350``."""
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) <= SECH_CUTOFF
    out = np.where(inside, 1.0 / np.cosh(np.where(inside, z, 0.0)), 0.0)
    return out if out.ndim else float(out)


def soliton_eval(p: SolitonParams, x, t):
    """Exact soliton value(s); broadcasts over ``x`` and ``t``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * (0.5 * p.c * x - p.theta * t + p.varphi))
    val = p.amplitude * phase * sech(math.sqrt(p.a) * (x - p.c * t) + p.phi)
    return val if np.ndim(val) else complex(val)


def cubic_nonlinearity(u):
    """``f(u) = |u|^2 u``."""
    return (u.real * u.real + u.imag * u.imag) * u


def zero_nonlinearity(u):
    """``f = 0``: free (linear) evolution."""
    return np.zeros_like(u) if isinstance(u, np.ndarray) else 0j


@dataclass(frozen=True)
class SingleSoliton:
    params: SolitonParams = SINGLE_SOLITON

    tag = "single-soliton"

    def exact(self, x, t):
        return soliton_eval(self.params, x, t)


@dataclass(frozen=True)
class TwoSolitons:
    """Pointwise superposition of two solitons.

    The sum is not an exact solution of the nonlinear equation; it is the
    reference the two-soliton error tables are measured against.
    """

    first: SolitonParams = TWO_SOLITONS[0]
    second: SolitonParams = TWO_SOLITONS[1]

    tag = "two-solitons"

    def exact(self, x, t):
        return soliton_eval(self.first, x, t) + soliton_eval(self.second, x, t)


@dataclass(frozen=True)
class CustomField:
    values: tuple

    tag = "custom"

    def __init__(self, values: Iterable[complex]):
        object.__setattr__(self, "values", tuple(complex(v) for v in values))


InitialData = Union[SingleSoliton, TwoSolitons, CustomField]


def initial_field(data: InitialData, grid: QGrid, t0: float = 0.0) -> np.ndarray:
    if isinstance(data, CustomField):
        if len(data.values) != grid.size:
            raise ValueError(
                f"custom field has {len(data.values)} entries, grid needs {grid.size}"
            )
        return np.array(data.values, dtype=complex)
    return np.asarray(data.exact(grid.points, t0), dtype=complex)


def _as_function(u) -> Callable:
    if isinstance(u, SolitonParams):
        return lambda x, t: soliton_eval(u, x, t)
    if hasattr(u, "exact"):
        return u.exact
    return u


def continuous_residual(u, sample: Iterable[tuple[float, float]], h_fd: float) -> float:
    """Max over ``sample`` of ``|i u_t + u_xx + |u|^2 u|``.

    ``u_t`` and ``u_xx`` come from fourth-order central differences of width
    ``h_fd``; ``u`` is a :class:`SolitonParams` or any callable ``u(x, t)``.
    """
    if not h_fd > 0:
        raise ValueError(f"finite-difference width must be positive, got {h_fd!r}")
    fn = _as_function(u)
    pts = np.asarray(list(sample), dtype=float).reshape(-1, 2)
    x, t = pts[:, 0], pts[:, 1]
    h = float(h_fd)

    def ev(dx, dt):
        return np.asarray(fn(x + dx, t + dt), dtype=complex) * np.ones_like(x)

    u0 = ev(0.0, 0.0)
    u_t = (-ev(0, 2 * h) + 8 * ev(0, h) - 8 * ev(0, -h) + ev(0, -2 * h)) / (12 * h)
    u_xx = (-ev(2 * h, 0) + 16 * ev(h, 0) - 30 * u0 + 16 * ev(-h, 0) - ev(-2 * h, 0)) / (
        12 * h * h
    )
    res = 1j * u_t + u_xx + cubic_nonlinearity(u0)
    return float(np.max(np.abs(res))) if len(res) else 0.0
