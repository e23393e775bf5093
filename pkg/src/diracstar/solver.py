"""Staggered leap-frog stepper for the two-component Dirac system on bonds.

The spinor components live on a staggered space-time grid: phi at integer
nodes x_j and half-integer time levels, chi at half-offset nodes x_{j-1/2}
and integer time levels.  With lam = dt/dx and the mass term time-averaged,
one step advances

    (1 + i m dt/2) phi_j^{n+1/2} = (1 - i m dt/2) phi_j^{n-1/2}
                                   - lam (chi_{j+1/2}^n - chi_{j-1/2}^n)
    (1 - i m dt/2) chi_{j-1/2}^{n+1} = (1 + i m dt/2) chi_{j-1/2}^n
                                   - lam (phi_j^{n+1/2} - phi_{j-1}^{n+1/2})

at interior points; boundary and vertex nodes are then set by the boundary
policy.  The scheme is second order and exactly conserves the discrete
energy functional (see diagnostics.energy) for Dirichlet ends with any
Kirchhoff-type vertex coupling.

Vertex update (Kirchhoff / weighted modes): the weighted continuity chain
reduces the vertex to one shared value P = aj phij(0).  Integrating the phi
equation over the half-cells adjoining the vertex and eliminating the vertex
fluxes with the weighted flux balance gives

    dP/dt = (2 / (W dx)) [chi1(-dx/2)/a1 - sum_{j>=2} chij(+dx/2)/aj] - i m P

with W = sum_j aj^-2, discretized like the interior update.  For two unit
weights this is exactly the interior stencil across the joined line, so the
vertex is invisible there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .bessel import BesselKernel
from .boundaries import (
    BoundaryPolicy,
    EndMode,
    VertexMode,
    _endpoint_coefficient,
    _history_convolution,
)
from .graph import Bond, Orientation, StarGraph

if TYPE_CHECKING:  # pragma: no cover
    from .config import ExperimentConfig
    from .diagnostics import DiagnosticsRecord

__all__ = [
    "InstabilityError",
    "SimParams",
    "SpinorField",
    "Snapshot",
    "RunResult",
    "gaussian_spinor",
    "build_initial_field",
    "step",
    "run",
]


class InstabilityError(RuntimeError):
    """Field values exceeded the overflow guard or became non-finite."""


@dataclass(frozen=True)
class SimParams:
    """Time-stepping parameters; ``validate`` enforces the CFL bound."""

    mass: float
    dt: float
    dx: float
    n_steps: int
    overflow_factor: float = 1e6

    @property
    def courant(self) -> float:
        return self.dt / self.dx

    def validate(self) -> None:
        if self.mass < 0:
            raise ValueError(f"mass must be non-negative, got {self.mass}")
        if self.dt <= 0 or self.dx <= 0:
            raise ValueError("dt and dx must be positive")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be non-negative, got {self.n_steps}")
        if self.courant > 1.0 + 1e-12:
            raise ValueError(
                f"CFL violated: dt/dx = {self.courant} exceeds 1"
            )
        if self.overflow_factor <= 1:
            raise ValueError("overflow_factor must exceed 1")


class SpinorField:
    """Per-bond (phi, chi) arrays at one staggered time level.

    After n accepted steps the stored phi sits at t = (n - 1/2) dt and chi
    at t = n dt.  ``bonds`` is the simulated domain: all graph bonds, or
    just bond 1 for a transparent-vertex interior run.
    """

    def __init__(
        self,
        bonds: tuple[Bond, ...],
        phi: list[np.ndarray],
        chi: list[np.ndarray],
        time_level: int = 0,
        initial_max: float | None = None,
    ) -> None:
        if len(phi) != len(bonds) or len(chi) != len(bonds):
            raise ValueError("one phi and chi array required per bond")
        for b, p, c in zip(bonds, phi, chi):
            if p.shape != (b.cells + 1,) or c.shape != (b.cells,):
                raise ValueError(
                    f"bond {b.index}: need {b.cells + 1} phi and {b.cells} "
                    f"chi values, got {p.shape} and {c.shape}"
                )
        self.bonds = bonds
        self.phi = phi
        self.chi = chi
        self.time_level = time_level
        if initial_max is None:
            initial_max = self.max_abs()
        self.initial_max = initial_max

    @classmethod
    def zeros(cls, bonds: tuple[Bond, ...]) -> "SpinorField":
        phi = [np.zeros(b.cells + 1, dtype=complex) for b in bonds]
        chi = [np.zeros(b.cells, dtype=complex) for b in bonds]
        return cls(bonds, phi, chi)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def max_abs(self) -> float:
        peak = 0.0
        for p, c in zip(self.phi, self.chi):
            if p.size:
                peak = max(peak, float(np.max(np.abs(p))))
            if c.size:
                peak = max(peak, float(np.max(np.abs(c))))
        return peak

    def copy(self) -> "SpinorField":
        return SpinorField(
            self.bonds,
            [p.copy() for p in self.phi],
            [c.copy() for c in self.chi],
            self.time_level,
            self.initial_max,
        )


def gaussian_spinor(x0: float, sigma: float, bond: Bond) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian spinor fragment sampled on one bond's staggered nodes.

    Both components are G(x) = (2 pi sigma^2)^(-1/4) exp(-(x-x0)^2/(4 sigma^2))
    sampled at the phi nodes and chi cell centres respectively, i.e. the
    spinor direction is (1, 1)^T, a right-moving packet in the massless
    limit.  x0 must lie inside the bond.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not bond.contains(x0):
        raise ValueError(
            f"x0 = {x0} lies outside bond {bond.index}"
        )

    def profile(x: np.ndarray) -> np.ndarray:
        norm = (2.0 * np.pi * sigma ** 2) ** (-0.25)
        return norm * np.exp(-((x - x0) ** 2) / (4.0 * sigma ** 2))

    phi = profile(bond.node_coordinates()).astype(complex)
    chi = profile(bond.cell_coordinates()).astype(complex)
    return phi, chi


def _effective_alphas(graph: StarGraph, mode: VertexMode) -> np.ndarray:
    if mode is VertexMode.KIRCHHOFF:
        return np.ones(graph.n_bonds)
    return np.asarray(graph.alphas, float)


def _vertex_shared_value(field: SpinorField, alphas: np.ndarray) -> complex:
    # least-squares projection of the stored vertex values on the chain
    total = field.phi[0][-1] / alphas[0]
    for j in range(1, field.n_bonds):
        total += field.phi[j][0] / alphas[j]
    return total / np.sum(1.0 / alphas ** 2)


def build_initial_field(
    graph: StarGraph,
    params: SimParams,
    policy: BoundaryPolicy,
    x0: float,
    sigma: float,
    bond_index: int = 1,
    amplitude: float = 1.0,
    normalize: bool = True,
) -> SpinorField:
    """Gaussian initial state on one bond, staggered in time for the stepper.

    chi keeps its t = 0 samples; phi is pulled back to t = -dt/2 with a
    Taylor half step (using the staggered derivative of chi), which keeps
    the scheme second order in time.  End and vertex nodes are then made
    consistent with the boundary policy, and the state is optionally
    rescaled to unit total norm.
    """
    interior_only = policy.vertex_mode is VertexMode.TRANSPARENT
    bonds = (graph.bonds[0],) if interior_only else graph.bonds
    if interior_only and bond_index != 1:
        raise ValueError("interior runs simulate bond 1 only")
    if not 1 <= bond_index <= len(bonds):
        raise ValueError(f"bond_index {bond_index} outside simulated domain")

    field = SpinorField.zeros(bonds)
    target = bonds[bond_index - 1]
    phi0, chi0 = gaussian_spinor(x0, sigma, target)
    b = bond_index - 1
    field.phi[b] = amplitude * phi0
    field.chi[b] = amplitude * chi0

    # phi(-dt/2) = phi0 + (dt/2)(d_x chi0 + i m phi0) at interior nodes
    for p, c in zip(field.phi, field.chi):
        dchi = (c[1:] - c[:-1]) / params.dx
        p[1:-1] += 0.5 * params.dt * (dchi + 1j * params.mass * p[1:-1])

    if interior_only:
        if policy.end_modes[0] is EndMode.DIRICHLET:
            field.phi[0][0] = 0.0
    else:
        alphas = _effective_alphas(graph, policy.vertex_mode)
        shared = _vertex_shared_value(field, alphas)
        field.phi[0][-1] = shared / alphas[0]
        for j in range(1, field.n_bonds):
            field.phi[j][0] = shared / alphas[j]
        if policy.end_modes[0] is EndMode.DIRICHLET:
            field.phi[0][0] = 0.0
        for j in range(1, field.n_bonds):
            if policy.end_modes[j] is EndMode.DIRICHLET:
                field.phi[j][-1] = 0.0

    if normalize:
        from .diagnostics import partial_norm

        total = sum(partial_norm(field, j + 1, params) for j in range(field.n_bonds))
        if total > 0:
            scale = 1.0 / np.sqrt(total)
            for p, c in zip(field.phi, field.chi):
                p *= scale
                c *= scale

    field.initial_max = field.max_abs()
    return field


def _solve_tbc_node(
    q: complex,
    chi_adj: complex,
    history: list[complex],
    kernel: BesselKernel,
    level: int,
    params: SimParams,
    right_end: bool,
    factor: float = 1.0,
) -> complex:
    """Advance a transparent boundary node and record its history entry.

    Combines the convolution relation for chi at the boundary with the
    half-cell update of the boundary phi node; the newest boundary value
    enters its own convolution through the trapezoid endpoint, so the two
    relations reduce to one linear equation for the new phi value.
    """
    lam = params.courant
    beta = 0.5j * params.mass * params.dt
    f = _endpoint_coefficient(kernel, level)
    tail = _history_convolution(history, kernel, level)
    denom = 1.0 + lam * factor * f + beta
    numer = (1.0 - lam * factor * f - beta) * q
    if right_end:
        numer += 2.0 * lam * (chi_adj - factor * tail)
    else:
        numer -= 2.0 * lam * (chi_adj + factor * tail)
    p = numer / denom
    history.append(0.5 * (p + q))
    return p


def step(
    field: SpinorField,
    graph: StarGraph,
    params: SimParams,
    policy: BoundaryPolicy,
) -> SpinorField:
    """Advance the field one time step; returns a new field.

    All phi nodes are updated first (interior stencil, then vertex and end
    conditions), then every chi cell from the new phi.  Transparent
    boundaries append to the policy's history buffers, so a policy instance
    must track exactly one field.  Raises InstabilityError when any value
    exceeds the overflow guard or becomes non-finite.
    """
    policy.check_level(field.time_level)
    lam = params.courant
    cp = 1.0 + 0.5j * params.mass * params.dt
    cm = 1.0 - 0.5j * params.mass * params.dt
    level = field.time_level
    interior_only = policy.vertex_mode is VertexMode.TRANSPARENT
    if interior_only and field.n_bonds != 1:
        raise ValueError(
            "transparent vertex mode applies to a bond-1-only field; "
            f"got {field.n_bonds} bonds"
        )
    if not interior_only and field.n_bonds != graph.n_bonds:
        raise ValueError("field does not cover the full graph")

    new_phi = [p.copy() for p in field.phi]
    for p, old, c in zip(new_phi, field.phi, field.chi):
        p[1:-1] = (cm * old[1:-1] - lam * (c[1:] - c[:-1])) / cp

    # vertex end
    if interior_only:
        kernel = policy.kernel
        assert kernel is not None
        new_phi[0][-1] = _solve_tbc_node(
            field.phi[0][-1],
            field.chi[0][-1],
            policy.history("vertex"),
            kernel,
            level,
            params,
            right_end=True,
            factor=policy.vertex_factor,
        )
    else:
        alphas = _effective_alphas(graph, policy.vertex_mode)
        w_all = np.sum(1.0 / alphas ** 2)
        shared_old = _vertex_shared_value(field, alphas)
        flux = field.chi[0][-1] / alphas[0]
        for j in range(1, field.n_bonds):
            flux -= field.chi[j][0] / alphas[j]
        shared_new = (cm * shared_old + 2.0 * lam * flux / w_all) / cp
        new_phi[0][-1] = shared_new / alphas[0]
        for j in range(1, field.n_bonds):
            new_phi[j][0] = shared_new / alphas[j]

    # far ends: bond 1 ends at its left node, outgoing bonds at their right
    for j in range(field.n_bonds):
        mode = policy.end_modes[j]
        right_end = field.bonds[j].orientation is Orientation.OUTGOING
        node = -1 if right_end else 0
        if mode is EndMode.DIRICHLET:
            new_phi[j][node] = 0.0
            continue
        kernel = policy.kernel
        assert kernel is not None
        chi_adj = field.chi[j][-1] if right_end else field.chi[j][0]
        new_phi[j][node] = _solve_tbc_node(
            field.phi[j][node],
            chi_adj,
            policy.history(f"end{field.bonds[j].index}"),
            kernel,
            level,
            params,
            right_end=right_end,
        )

    new_chi = [
        (cp * c - lam * (p[1:] - p[:-1])) / cm
        for p, c in zip(new_phi, field.chi)
    ]

    out = SpinorField(
        field.bonds, new_phi, new_chi, field.time_level + 1, field.initial_max
    )
    _check_stability(out, params)
    return out


def _check_stability(field: SpinorField, params: SimParams) -> None:
    peak = field.max_abs()
    if not np.isfinite(peak):
        raise InstabilityError(
            f"non-finite field values at step {field.time_level}"
        )
    if field.initial_max > 0 and peak > params.overflow_factor * field.initial_max:
        raise InstabilityError(
            f"field grew to {peak:.3e} at step {field.time_level} "
            f"({peak / field.initial_max:.1e} x initial); "
            "check the CFL condition dt/dx <= 1"
        )


@dataclass(frozen=True)
class Snapshot:
    """Node-sampled field and density of one bond at one output time."""

    bond_index: int
    time: float
    x: np.ndarray
    phi: np.ndarray
    chi: np.ndarray
    density: np.ndarray


@dataclass
class RunResult:
    records: list["DiagnosticsRecord"]
    snapshots: list[Snapshot]
    graph: StarGraph
    field: SpinorField


def run(config: "ExperimentConfig") -> RunResult:
    """Execute one configured simulation and collect diagnostics.

    Samples a diagnostics record at t = 0, every ``sample_every`` steps and
    at the final step; node-resolved snapshots are taken at the configured
    times (rounded to the nearest step).  Step instability propagates.
    """
    from .diagnostics import compute_record, node_profile

    config.validate()
    graph = config.build_graph()
    params = config.sim_params()
    policy = config.build_policy()
    field = build_initial_field(
        graph,
        params,
        policy,
        x0=config.x0,
        sigma=config.sigma,
        bond_index=config.source_bond,
        amplitude=config.amplitude,
        normalize=config.normalize_initial,
    )

    snap_steps: dict[int, float] = {}
    for t in config.snapshot_times:
        snap_steps[int(round(t / params.dt))] = t

    records = []
    snapshots: list[Snapshot] = []

    def observe(n: int) -> None:
        if n % config.sample_every == 0 or n == params.n_steps:
            records.append(compute_record(field, params, n * params.dt))
        if n in snap_steps:
            for j, bond in enumerate(field.bonds):
                x, phi, chi, dens = node_profile(field, j + 1, params)
                snapshots.append(
                    Snapshot(bond.index, snap_steps[n], x, phi, chi, dens)
                )

    observe(0)
    for n in range(1, params.n_steps + 1):
        field = step(field, graph, params, policy)
        observe(n)

    return RunResult(records, snapshots, graph, field)
