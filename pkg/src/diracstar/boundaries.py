"""Boundary conditions: vertex couplings and transparent-end convolutions.

Vertex modes
  KIRCHHOFF     continuity of phi across the vertex and zero weighted-flux
                defect with unit weights (plain Kirchhoff rule).
  WEIGHTED      alpha-weighted continuity  a1 phi1(0) = ... = aN phiN(0) and
                weighted flux balance  chi1(0)/a1 = sum_{j>=2} chij(0)/aj.
  TRANSPARENT   the vertex is replaced by its Dirichlet-to-Neumann relation;
                only bond 1 is simulated and the vertex end carries the
                convolution condition with the weight-dependent factor A.

End modes (far ends of the truncated bonds)
  DIRICHLET     phi = 0 at the end node.
  TRANSPARENT   time-convolution condition, so outgoing packets exit without
                reflection.

The continuous transparent relation at a right end is
    chi(L, t) = d/dt int_0^t I0(m (t-s)) phi(L, s) ds
              + i m int_0^t I0(m (t-s)) phi(L, s) ds.
The derivative is applied analytically (I0' = I1), giving
    chi(L, t) = phi(L, t) + int_0^t [m I1 + i m I0](m (t-s)) phi(L, s) ds,
which collapses bit-exactly to the local relation chi = phi at m = 0.  A
left end carries the same relation with an overall minus sign, the vertex
relation the factor A.  The running integral is evaluated by trapezoidal
quadrature over the stored boundary history; the newest history entry
appears inside its own convolution through the trapezoid endpoint, which
keeps the boundary one-step implicit.
"""
from __future__ import annotations

import enum
from typing import Sequence

import numpy as np

from .bessel import BesselKernel
from .graph import StarGraph

__all__ = [
    "VertexMode",
    "EndMode",
    "Side",
    "BoundaryPolicy",
    "MissingHistoryError",
    "vertex_tbc_factor",
    "apply_end_tbc",
    "apply_vertex",
    "apply_vertex_tbc",
]


class VertexMode(enum.Enum):
    KIRCHHOFF = "kirchhoff"
    WEIGHTED = "weighted"
    TRANSPARENT = "transparent"


class EndMode(enum.Enum):
    DIRICHLET = "dirichlet"
    TRANSPARENT = "transparent"


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class MissingHistoryError(ValueError):
    """Raised when a convolution is requested beyond the recorded history."""


def vertex_tbc_factor(alphas: Sequence[float]) -> float:
    """Factor A = a1^2 sum_{j>=2} aj^-2 of the transparent vertex relation.

    A = 1 exactly when the weights satisfy the transparency sum rule.
    """
    a = [float(v) for v in alphas]
    if len(a) < 2:
        raise ValueError("vertex factor needs at least 2 bond weights")
    return a[0] ** 2 * sum(1.0 / v ** 2 for v in a[1:])


def _history_convolution(
    past: Sequence[complex], kernel: BesselKernel, level: int
) -> complex:
    """Trapezoid convolution over the strictly-past history entries.

    ``past`` holds the boundary values at levels 0..level-1.  Returns
    dt * (g_level h_0 / 2 + sum_{k=1}^{level-1} g_{level-k} h_k) where g are
    the kernel convolution weights; zero at level 0 (empty time interval).
    """
    if level == 0:
        return 0.0 + 0.0j
    if level > len(kernel.conv_weights) - 1:
        raise MissingHistoryError(
            f"kernel covers {len(kernel.conv_weights) - 1} steps, "
            f"level {level} requested"
        )
    h = np.asarray(past[:level], dtype=complex)
    g = kernel.conv_weights[level:0:-1].copy()
    g[0] *= 0.5
    return complex(kernel.dt * np.dot(g, h))


def _endpoint_coefficient(kernel: BesselKernel, level: int) -> complex:
    """Multiplier of the newest boundary value in the discrete relation."""
    if level == 0:
        return 1.0 + 0.0j
    return 1.0 + 0.5 * kernel.dt * kernel.conv_weights[0]


def _boundary_value(
    history: Sequence[complex],
    kernel: BesselKernel,
    level: int,
    sign: float,
    factor: float,
) -> complex:
    if len(history) < level + 1:
        raise MissingHistoryError(
            f"history covers levels 0..{len(history) - 1}, level {level} requested"
        )
    tail = _history_convolution(history, kernel, level)
    value = _endpoint_coefficient(kernel, level) * history[level] + tail
    return sign * (factor * value)


def apply_end_tbc(
    side: Side,
    history: Sequence[complex],
    kernel: BesselKernel,
    t: int,
) -> complex:
    """Transparent-end value of chi at time level ``t``.

    ``history`` must hold the boundary phi values at integer levels 0..t.
    A right end returns the convolution value, a left end its negative.
    At m = 0 the kernel weights vanish and the result is exactly +/- phi(t).
    """
    sign = 1.0 if side is Side.RIGHT else -1.0
    return _boundary_value(history, kernel, t, sign, 1.0)


def apply_vertex_tbc(
    history: Sequence[complex],
    kernel: BesselKernel,
    factor: float,
) -> complex:
    """Transparent-vertex value of chi1(0) for an interior (bond-1) run.

    ``factor`` is the weight combination from :func:`vertex_tbc_factor`.
    With factor 1 the result is bit-identical to
    ``apply_end_tbc(Side.RIGHT, ...)`` on the same history.
    """
    if factor <= 0:
        raise ValueError(f"vertex factor must be positive, got {factor}")
    return _boundary_value(history, kernel, len(history) - 1, 1.0, factor)


def apply_vertex(
    mode: VertexMode,
    phi_values: Sequence[complex],
    chi_values: Sequence[complex],
    alphas: Sequence[float],
) -> tuple[np.ndarray, np.ndarray]:
    """Project per-bond vertex values onto the vertex conditions.

    ``phi_values`` and ``chi_values`` are the field components at the vertex,
    incoming bond first.  Returns corrected values satisfying the weighted
    continuity chain and the weighted flux balance exactly: phi is replaced
    by its least-squares projection onto the continuity chain, the incoming
    chi is kept and the outgoing chi are set from it with the weighted-flux
    terms distributed proportionally to a1/aj^2.

    Raises ValueError for TRANSPARENT mode (that vertex condition lives on a
    single-bond interior domain, see :func:`apply_vertex_tbc`).
    """
    if mode is VertexMode.TRANSPARENT:
        raise ValueError(
            "transparent vertex mode has no multi-bond vertex values to "
            "correct; it applies to a bond-1-only domain"
        )
    n = len(phi_values)
    if n < 2 or len(chi_values) != n or len(alphas) != n:
        raise ValueError("need matching phi, chi and alpha values for N >= 2 bonds")
    a = np.ones(n) if mode is VertexMode.KIRCHHOFF else np.asarray(alphas, float)

    w_all = np.sum(1.0 / a ** 2)
    shared = np.sum(np.asarray(phi_values, complex) / a) / w_all
    phi_fixed = shared / a

    w_out = np.sum(1.0 / a[1:] ** 2)
    flux_in = chi_values[0] / a[0]
    chi_fixed = np.empty(n, dtype=complex)
    chi_fixed[0] = chi_values[0]
    chi_fixed[1:] = flux_in / (w_out * a[1:])
    return phi_fixed, chi_fixed


class BoundaryPolicy:
    """Vertex/end condition selection plus the convolution state of one run.

    The history buffers record the boundary phi values at integer time
    levels; each buffer's length equals the owning field's time level.  A
    policy instance is owned by exactly one simulation and must not be
    shared or reused across runs.
    """

    def __init__(
        self,
        vertex_mode: VertexMode,
        end_modes: Sequence[EndMode],
        kernel: BesselKernel | None = None,
        vertex_factor: float = 1.0,
    ) -> None:
        self.vertex_mode = vertex_mode
        self.end_modes = tuple(end_modes)
        self.kernel = kernel
        self.vertex_factor = float(vertex_factor)
        self.histories: dict[str, list[complex]] = {}
        if self.requires_kernel and kernel is None:
            raise ValueError("transparent boundary conditions need a BesselKernel")

    @property
    def requires_kernel(self) -> bool:
        return self.vertex_mode is VertexMode.TRANSPARENT or any(
            m is EndMode.TRANSPARENT for m in self.end_modes
        )

    def validate_for(self, graph: StarGraph) -> None:
        if len(self.end_modes) != graph.n_bonds:
            raise ValueError(
                f"policy has {len(self.end_modes)} end modes for "
                f"{graph.n_bonds} bonds"
            )

    def history(self, key: str) -> list[complex]:
        return self.histories.setdefault(key, [])

    def check_level(self, time_level: int) -> None:
        for key, h in self.histories.items():
            if len(h) != time_level:
                raise ValueError(
                    f"history '{key}' has {len(h)} entries, expected "
                    f"{time_level}; policies cannot be shared between runs"
                )
