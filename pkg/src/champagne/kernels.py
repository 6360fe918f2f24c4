"""Dimension-dependent kernel and capacity functions, gauges with increasing
majorants, and exact annulus/potential formulas used as analytic oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# Default log-spaced grid used to evaluate increasing majorants of
# non-monotone gauges.  The sup over a continuum is not computable for an
# arbitrary h; all downstream uses evaluate the majorant at finitely many
# radii, so a fixed dense grid suffices and keeps the majorant monotone
# across grid points.
MAJORANT_GRID_LO = 1e-12
MAJORANT_GRID_HI = 1.0 - 1e-9
MAJORANT_GRID_SIZE = 4096


def kernel_N(t: float, d: int) -> float:
    """Radial kernel of the global Green function: log(1/t) in the plane,
    t^(2-d) in dimension d >= 3.

    For d = 2 the value is negative for t > 1; evaluation is still allowed.
    """
    _check_dim(d)
    if t <= 0:
        raise ValueError(f"kernel_N requires t > 0, got t={t}")
    if d == 2:
        return -math.log(t)
    return t ** (2 - d)


def capacity_phi(t: float, d: int) -> float:
    """Capacity function phi(t) = 1/N(t); equals t^(d-2) for d >= 3.

    For d = 2, phi is only defined on (0, 1) where N is positive.
    """
    _check_dim(d)
    if t <= 0:
        raise ValueError(f"capacity_phi requires t > 0, got t={t}")
    if d == 2:
        if t >= 1:
            raise ValueError(f"capacity_phi requires t < 1 when d=2, got t={t}")
        return 1.0 / (-math.log(t))
    return t ** (d - 2)


def annulus_hit_exact(s: float, z_norm: float, d: int) -> float:
    """Probability that Brownian motion from |z| = z_norm hits the closed
    ball of radius s at the origin before exiting the unit ball.

    Closed form (N(z_norm) - N(1)) / (N(s) - N(1)); in particular
    log(1/z)/log(1/s) in the plane.
    """
    _check_dim(d)
    if not (0 < s < 1):
        raise ValueError(f"annulus_hit_exact requires 0 < s < 1, got s={s}")
    if not (s <= z_norm <= 1):
        raise ValueError(
            f"annulus_hit_exact requires s <= z_norm <= 1, got z_norm={z_norm}"
        )
    n1 = kernel_N(1.0, d)
    return (kernel_N(z_norm, d) - n1) / (kernel_N(s, d) - n1)


def equilibrium_potential_sigma(y_norm: float, R: float, rho: float, d: int) -> float:
    """Green potential, in B(0, R+2*rho), of the normalized surface measure
    on the sphere of radius R, evaluated at |y| = y_norm.

    Equals min{N(y_norm) - N(R+2*rho), N(R) - N(R+2*rho)}, with the constant
    branch taken for y_norm <= R (the kernel pole at 0 never wins the min).
    Vanishes on the outer boundary.
    """
    _check_dim(d)
    if R <= 0 or rho <= 0:
        raise ValueError("equilibrium_potential_sigma requires R > 0 and rho > 0")
    outer = R + 2.0 * rho
    if y_norm < 0 or y_norm > outer:
        raise ValueError(
            f"equilibrium_potential_sigma requires 0 <= y_norm <= R + 2*rho, "
            f"got y_norm={y_norm}, R+2*rho={outer}"
        )
    n_outer = kernel_N(outer, d)
    cap = kernel_N(R, d) - n_outer
    if y_norm <= R:
        return cap
    return min(kernel_N(y_norm, d) - n_outer, cap)


@dataclass(frozen=True)
class GaugeSpec:
    """Serializable description of a gauge h: a named preset or a table.

    kind "phi-eps" is h = phi^eps, kind "loglog" is h(t) = 1/log(N(t))
    (clipped into (0,1)), kind "tabulated" interpolates h linearly in log t.
    """

    kind: str
    eps: Optional[float] = None
    t: Optional[tuple] = None
    h: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "phi-eps":
            if self.eps is None or self.eps <= 0:
                raise ValueError("phi-eps gauge requires eps > 0")
        elif self.kind == "loglog":
            pass
        elif self.kind == "tabulated":
            if not self.t or not self.h or len(self.t) != len(self.h):
                raise ValueError("tabulated gauge requires matching t/h arrays")
        else:
            raise ValueError(f"unknown gauge kind {self.kind!r}")

    def make(self, d: int) -> "GaugeSet":
        if self.kind == "phi-eps":
            eps = float(self.eps)

            def h(t, _eps=eps, _d=d):
                return capacity_phi(t, _d) ** _eps

            return GaugeSet(d=d, h=h, monotone=True, spec=self)
        if self.kind == "loglog":

            def h(t, _d=d):
                # 1/log(N(t)), clipped so that h maps into (0,1).
                n = kernel_N(t, _d)
                return 1.0 / max(math.log(n), 1.02) if n > 1.0 else 0.9803921568627451

            return GaugeSet(d=d, h=h, monotone=True, spec=self)
        log_t = np.log(np.asarray(self.t, dtype=float))
        vals = np.asarray(self.h, dtype=float)
        order = np.argsort(log_t)
        log_t, vals = log_t[order], vals[order]

        def h(t, _lt=log_t, _v=vals):
            return float(np.interp(math.log(t), _lt, _v))

        return GaugeSet(d=d, h=h, monotone=False, spec=self)


@dataclass(frozen=True)
class GaugeSet:
    """A gauge h on (0,1) with h(t) -> 0 as t -> 0, together with the
    machinery to evaluate its smallest increasing majorant.

    If ``monotone`` is declared the majorant is h itself; otherwise it is the
    sup of h over a fixed log-spaced grid restricted to (0, t], plus t itself,
    which is nondecreasing at grid points by construction.
    """

    d: int
    h: Callable[[float], float]
    monotone: bool = False
    spec: Optional[GaugeSpec] = None
    h_majorant_grid: np.ndarray = field(default=None, repr=False)
    _grid_running_max: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        _check_dim(self.d)
        if self.h_majorant_grid is None:
            grid = np.geomspace(MAJORANT_GRID_LO, MAJORANT_GRID_HI, MAJORANT_GRID_SIZE)
            object.__setattr__(self, "h_majorant_grid", grid)
        if self._grid_running_max is None and not self.monotone:
            vals = np.array([self.h(float(t)) for t in self.h_majorant_grid])
            object.__setattr__(self, "_grid_running_max", np.maximum.accumulate(vals))

    def majorant(self, t: float) -> float:
        """Smallest increasing majorant of h, evaluated on the grid: the sup
        of h over grid points in (0, t] together with h(t) itself."""
        if not (0 < t < 1):
            raise ValueError(f"majorant requires t in (0,1), got t={t}")
        ht = self.h(t)
        if self.monotone:
            return ht
        k = int(np.searchsorted(self.h_majorant_grid, t, side="right"))
        if k == 0:
            return ht
        return max(ht, float(self._grid_running_max[k - 1]))


def majorant_h(gauges: GaugeSet, t: float) -> float:
    """Functional form of :meth:`GaugeSet.majorant`."""
    return gauges.majorant(t)


def phi_eps_gauge(d: int, eps: float) -> GaugeSet:
    return GaugeSpec(kind="phi-eps", eps=eps).make(d)


def loglog_gauge(d: int) -> GaugeSet:
    return GaugeSpec(kind="loglog").make(d)


def tabulated_gauge(d: int, t: Sequence[float], h: Sequence[float]) -> GaugeSet:
    return GaugeSpec(kind="tabulated", t=tuple(t), h=tuple(h)).make(d)


def _check_dim(d: int) -> None:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")
