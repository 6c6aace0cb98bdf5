"""Finite-difference discretization and energy-monotone gradient flow.

The energy on a box grid with Dirichlet faces is a rectangle-rule sum of the
bulk density over nodes plus the elastic Dirichlet form summed over lattice
edges, every term weighted with the full cell volume. With that quadrature
the Euler-Lagrange residual (twice the elastic constant times the 7-point
Laplacian minus the bulk gradient) is the exact negative energy gradient per
unit node volume at every interior node, so the explicit flow

    Q <- Q + dt * (2 L lap_h Q - dF_bulk/dQ)

descends the discrete energy whenever dt is small enough; the step control
halves dt any time a step would raise the energy beyond roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bulk import BulkFunctional, Quartic, stationary_scalars
from .errors import DivergenceError, FieldFormatError
from .qtensor import uniaxial_coeffs

__all__ = [
    "Grid3",
    "QField",
    "SolverConfig",
    "SolveReport",
    "discrete_energy",
    "el_residual",
    "minimize",
    "minimize_uniaxial_fixed_director",
    "harmonic_interior",
    "write_field",
    "read_field",
]

# Accepted steps may raise the energy by at most this many ulps of its scale;
# near a minimum the true decrease per step drops below float resolution.
_ROUNDOFF_ULPS = 64.0


@dataclass(frozen=True)
class Grid3:
    """Uniform box grid; nodes include the six Dirichlet faces."""

    nx: int
    ny: int
    nz: int
    hx: float
    hy: float
    hz: float

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            if getattr(self, name) < 3:
                raise ValueError(f"Grid3.{name} must be >= 3 (one interior node per axis)")
        for name in ("hx", "hy", "hz"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"Grid3.{name} must be positive")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def node_volume(self) -> float:
        return self.hx * self.hy * self.hz

    @property
    def min_spacing(self) -> float:
        return min(self.hx, self.hy, self.hz)


def _face_mask(shape: tuple[int, int, int]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[0, :, :] = mask[-1, :, :] = True
    mask[:, 0, :] = mask[:, -1, :] = True
    mask[:, :, 0] = mask[:, :, -1] = True
    mask.setflags(write=False)
    return mask


class QField:
    """Per-node coefficient vectors on a Grid3 with a frozen Dirichlet layer.

    ``values`` has shape (nx, ny, nz, 5); the solver never modifies nodes
    where ``boundary_mask`` is set. Treat instances as immutable and derive
    updated fields through ``with_values``.
    """

    def __init__(self, grid: Grid3, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape + (5,):
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values
        self.boundary_mask = _face_mask(grid.shape)

    @classmethod
    def constant(cls, grid: Grid3, coeffs) -> "QField":
        values = np.broadcast_to(np.asarray(coeffs, dtype=float), grid.shape + (5,)).copy()
        return cls(grid, values)

    @classmethod
    def from_boundary(cls, grid: Grid3, boundary_values: np.ndarray, interior_coeffs=None) -> "QField":
        """Take face nodes from ``boundary_values`` and fill the interior."""
        field = cls(grid, np.asarray(boundary_values, dtype=float).copy())
        fill = np.zeros(5) if interior_coeffs is None else np.asarray(interior_coeffs, dtype=float)
        field.values[~field.boundary_mask] = fill
        return field

    def with_values(self, values: np.ndarray) -> "QField":
        return QField(self.grid, values)

    def norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("...c,...c->...", self.values, self.values))


@dataclass(frozen=True)
class SolverConfig:
    """Gradient-flow parameters; ``dt_init`` of None selects the stable default."""

    functional: BulkFunctional
    elastic_l: float
    dt_init: Optional[float] = None
    tol_residual: float = 1e-8
    max_iters: int = 200_000
    audit_slack: float = 1e-3

    def __post_init__(self):
        if not self.elastic_l > 0.0:
            raise ValueError("elastic_l must be positive")
        if self.dt_init is not None and not self.dt_init > 0.0:
            raise ValueError("dt_init must be positive")
        if not self.tol_residual > 0.0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_energy: float
    final_residual_maxnorm: float
    converged: bool
    energy_history_monotone: bool
    dt_final: float
    seed: Optional[int] = None
    hypothesis_met: Optional[bool] = None


def _laplacian(values: np.ndarray, grid: Grid3) -> np.ndarray:
    """7-point Laplacian; entries are only meaningful at interior nodes."""
    lap = np.zeros_like(values)
    lap[1:-1, :, :] += (values[2:, :, :] - 2.0 * values[1:-1, :, :] + values[:-2, :, :]) / grid.hx**2
    lap[:, 1:-1, :] += (values[:, 2:, :] - 2.0 * values[:, 1:-1, :] + values[:, :-2, :]) / grid.hy**2
    lap[:, :, 1:-1] += (values[:, :, 2:] - 2.0 * values[:, :, 1:-1] + values[:, :, :-2]) / grid.hz**2
    return lap


def _edge_dirichlet_sum(values: np.ndarray, grid: Grid3) -> float:
    """Sum over lattice edges of the squared difference quotient."""
    total = np.sum(((values[1:, :, :] - values[:-1, :, :]) / grid.hx) ** 2)
    total += np.sum(((values[:, 1:, :] - values[:, :-1, :]) / grid.hy) ** 2)
    total += np.sum(((values[:, :, 1:] - values[:, :, :-1]) / grid.hz) ** 2)
    return float(total)


def discrete_energy(field: QField, cfg: SolverConfig) -> float:
    """Rectangle-rule energy: node volume times (bulk density sum + L * edge Dirichlet sum)."""
    bulk = float(np.sum(cfg.functional.density(field.values)))
    elastic = cfg.elastic_l * _edge_dirichlet_sum(field.values, field.grid)
    return field.grid.node_volume * (bulk + elastic)


def _residual_arrays(values: np.ndarray, grid: Grid3, fun: BulkFunctional, elastic_l: float,
                     interior: np.ndarray) -> np.ndarray:
    res = 2.0 * elastic_l * _laplacian(values, grid) - fun.gradient(values)
    res[~interior] = 0.0
    return res


def el_residual(field: QField, cfg: SolverConfig) -> np.ndarray:
    """Euler-Lagrange residual 2 L lap_h Q - dF_bulk/dQ, zero on the boundary.

    Equals minus the gradient of ``discrete_energy`` with respect to the node
    coefficients divided by the node volume, exactly, at every interior node.
    """
    return _residual_arrays(field.values, field.grid, cfg.functional, cfg.elastic_l,
                            ~field.boundary_mask)


def _max_node_norm(arr: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("...c,...c->...", arr, arr).max()))


def _sampled_hessian_bound(fun: BulkFunctional, values: np.ndarray) -> float:
    """Directional finite-difference bound on the bulk Hessian over sampled nodes."""
    flat = values.reshape(-1, values.shape[-1])
    idx = np.unique(np.linspace(0, flat.shape[0] - 1, 64).astype(int))
    sample = flat[idx]
    scale = 1e-4 * (1.0 + np.sqrt(np.einsum("nc,nc->n", sample, sample)))
    bound = 0.0
    for c in range(sample.shape[1]):
        step = np.zeros_like(sample)
        step[:, c] = scale
        diff = fun.gradient(sample + step) - fun.gradient(sample - step)
        est = np.sqrt(np.einsum("nc,nc->n", diff, diff)) / (2.0 * scale)
        bound = max(bound, float(est.max()))
    return 1.5 * bound


def _auto_dt(fun: BulkFunctional, values: np.ndarray, grid: Grid3, elastic_l: float,
             diffusion: float) -> float:
    h2 = grid.min_spacing**2
    lam = _sampled_hessian_bound(fun, values)
    return 0.9 * h2 / (diffusion * elastic_l + h2 * lam)


def _descend(values, energy_of, residual_of, dt0, tol, max_iters):
    """Shared explicit-flow loop; returns (values, iterations, energy, rmax, converged, dt)."""
    energy = energy_of(values)
    if not math.isfinite(energy):
        raise DivergenceError("initial field has non-finite energy")
    dt = dt0
    iterations = 0
    while True:
        res = residual_of(values)
        rmax = _max_node_norm(res)
        if rmax <= tol:
            return values, iterations, energy, rmax, True, dt
        if iterations >= max_iters:
            return values, iterations, energy, rmax, False, dt
        halvings = 0
        while True:
            trial = values + dt * res
            trial_energy = energy_of(trial)
            allowance = _ROUNDOFF_ULPS * np.finfo(float).eps * max(1.0, abs(energy))
            if math.isfinite(trial_energy) and trial_energy <= energy + allowance:
                break
            dt *= 0.5
            halvings += 1
            if halvings > 60:
                if not math.isfinite(trial_energy):
                    raise DivergenceError("gradient flow produced a non-finite energy")
                return values, iterations, energy, rmax, False, dt
        values = trial
        energy = trial_energy
        iterations += 1


def minimize(initial: QField, cfg: SolverConfig) -> tuple[QField, SolveReport]:
    """Relax a field by explicit energy-monotone gradient flow on interior nodes.

    The boundary layer of ``initial`` is the Dirichlet datum and is never
    touched. Convergence means the residual max node norm fell below
    ``cfg.tol_residual``; hitting ``max_iters`` returns the best (latest)
    iterate with ``converged`` False.
    """
    grid = initial.grid
    interior = ~initial.boundary_mask
    fun = cfg.functional

    def energy_of(values):
        bulk = float(np.sum(fun.density(values)))
        return grid.node_volume * (bulk + cfg.elastic_l * _edge_dirichlet_sum(values, grid))

    def residual_of(values):
        return _residual_arrays(values, grid, fun, cfg.elastic_l, interior)

    if not math.isfinite(energy_of(initial.values)):
        raise DivergenceError("initial field has non-finite energy")
    dt0 = cfg.dt_init
    if dt0 is None:
        dt0 = _auto_dt(fun, initial.values, grid, cfg.elastic_l, diffusion=12.0)

    values, iterations, energy, rmax, converged, dt = _descend(
        initial.values.copy(), energy_of, residual_of, dt0,
        cfg.tol_residual, cfg.max_iters)
    report = SolveReport(
        iterations=iterations,
        final_energy=energy,
        final_residual_maxnorm=rmax,
        converged=converged,
        energy_history_monotone=True,
        dt_final=dt,
    )
    return initial.with_values(values), report


def minimize_uniaxial_fixed_director(
    grid: Grid3,
    s_boundary,
    director,
    cfg: SolverConfig,
) -> tuple[np.ndarray, SolveReport]:
    """Minimize over uniaxial fields s(x) (n x n - I/3) with a fixed director n.

    ``s_boundary`` is a constant or an (nx, ny, nz) array whose face entries
    supply the Dirichlet datum. The elastic density reduces to (2/3) L |grad s|^2,
    so the scalar flow uses (4/3) L times the scalar Laplacian. The report's
    ``hypothesis_met`` records whether 0 < s_boundary < min(s_plus, 1) held
    pointwise (only checkable for the quartic functional); the run proceeds
    either way.
    """
    mask = _face_mask(grid.shape)
    s = np.zeros(grid.shape)
    s_boundary = np.broadcast_to(np.asarray(s_boundary, dtype=float), grid.shape)
    s[mask] = s_boundary[mask]
    s[~mask] = float(s_boundary[mask].mean())

    fun = cfg.functional
    base = uniaxial_coeffs(1.0, director)

    hypothesis: Optional[bool] = None
    if isinstance(fun, Quartic):
        rep = stationary_scalars(fun.material, fun.temperature)
        if rep.s_plus is None:
            hypothesis = False
        else:
            cap = min(rep.s_plus, 1.0)
            bvals = s_boundary[mask]
            hypothesis = bool((bvals > 0.0).all() and (bvals < cap).all())

    # _descend works on arrays with a trailing component axis; the scalar
    # order parameter rides along as a single component.
    def energy_of(svals):
        dens = float(np.sum(fun.density(svals * base)))
        elastic = (2.0 / 3.0) * cfg.elastic_l * _edge_dirichlet_sum(svals, grid)
        return grid.node_volume * (dens + elastic)

    def residual_of(svals):
        grad = np.einsum("...c,c->...", fun.gradient(svals * base), base)
        res = (4.0 / 3.0) * cfg.elastic_l * _laplacian(svals, grid)[..., 0] - grad
        res[mask] = 0.0
        return res[..., None]

    dt0 = cfg.dt_init
    if dt0 is None:
        dt0 = _auto_dt(fun, s[..., None] * base, grid, cfg.elastic_l, diffusion=8.0)

    values, iterations, energy, rmax, converged, dt = _descend(
        s[..., None], energy_of, residual_of, dt0, cfg.tol_residual, cfg.max_iters)
    report = SolveReport(
        iterations=iterations,
        final_energy=energy,
        final_residual_maxnorm=rmax,
        converged=converged,
        energy_history_monotone=True,
        dt_final=dt,
        hypothesis_met=hypothesis,
    )
    return values[..., 0].copy(), report


def harmonic_interior(field: QField, max_sweeps: int = 2000, tol: float = 1e-12) -> QField:
    """Fill the interior with a discrete-harmonic extension of the boundary data.

    Jacobi sweeps of the componentwise Laplace equation; deterministic and
    cheap, intended for solver initialization.
    """
    grid = field.grid
    values = field.values.copy()
    interior = ~field.boundary_mask
    wx, wy, wz = 1.0 / grid.hx**2, 1.0 / grid.hy**2, 1.0 / grid.hz**2
    denom = 2.0 * (wx + wy + wz)
    scale = max(1.0, float(np.abs(values).max()))
    for _ in range(max_sweeps):
        avg = np.zeros_like(values)
        avg[1:-1, :, :] += wx * (values[2:, :, :] + values[:-2, :, :])
        avg[:, 1:-1, :] += wy * (values[:, 2:, :] + values[:, :-2, :])
        avg[:, :, 1:-1] += wz * (values[:, :, 2:] + values[:, :, :-2])
        avg /= denom
        delta = float(np.abs(np.where(interior[..., None], avg - values, 0.0)).max())
        values[interior] = avg[interior]
        if delta <= tol * scale:
            break
    return field.with_values(values)


def write_field(path, field: QField) -> None:
    """Write a field in the LDGQ1 text format with round-trip float precision."""
    grid = field.grid
    lines = [
        f"LDGQ1 {grid.nx} {grid.ny} {grid.nz} "
        f"{float(grid.hx)!r} {float(grid.hy)!r} {float(grid.hz)!r}"
    ]
    vals = field.values
    for i in range(grid.nx):
        for j in range(grid.ny):
            for k in range(grid.nz):
                q = vals[i, j, k]
                lines.append(
                    f"{i} {j} {k} "
                    f"{float(q[0])!r} {float(q[1])!r} {float(q[2])!r} "
                    f"{float(q[3])!r} {float(q[4])!r}"
                )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> QField:
    """Read an LDGQ1 field file, rejecting format violations with diagnostics."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FieldFormatError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 7 or header[0] != "LDGQ1":
        raise FieldFormatError(f"{path}: line 1: expected header 'LDGQ1 nx ny nz hx hy hz'")
    try:
        nx, ny, nz = (int(tok) for tok in header[1:4])
        hx, hy, hz = (float(tok) for tok in header[4:7])
    except ValueError as exc:
        raise FieldFormatError(f"{path}: line 1: malformed header ({exc})") from None
    try:
        grid = Grid3(nx, ny, nz, hx, hy, hz)
    except ValueError as exc:
        raise FieldFormatError(f"{path}: line 1: {exc}") from None
    body = [ln for ln in lines[1:] if ln.strip()]
    expected = nx * ny * nz
    if len(body) != expected:
        raise FieldFormatError(
            f"{path}: expected {expected} node lines, found {len(body)}"
        )
    values = np.empty(grid.shape + (5,))
    pos = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                lineno = pos + 2
                toks = body[pos].split()
                if len(toks) != 8:
                    raise FieldFormatError(f"{path}: line {lineno}: expected 8 fields")
                try:
                    ii, jj, kk = int(toks[0]), int(toks[1]), int(toks[2])
                    q = [float(tok) for tok in toks[3:]]
                except ValueError as exc:
                    raise FieldFormatError(f"{path}: line {lineno}: {exc}") from None
                if (ii, jj, kk) != (i, j, k):
                    raise FieldFormatError(
                        f"{path}: line {lineno}: node index ({ii} {jj} {kk}) out of order, "
                        f"expected ({i} {j} {k})"
                    )
                if not all(math.isfinite(v) for v in q):
                    raise FieldFormatError(f"{path}: line {lineno}: non-finite value")
                values[i, j, k] = q
                pos += 1
    return QField(grid, values)
