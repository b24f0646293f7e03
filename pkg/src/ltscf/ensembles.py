"""Finite-rank density matrices and the variational functionals.

An :class:`Ensemble` is ``gamma = sum_j o_j |u_j><u_j|`` with orthogonal
orbitals of L^2 norm at most one and occupations ``o_j`` in ``[0, 1]`` (the
fermionic constraint ``0 <= gamma <= 1``).  The module evaluates

* the kinetic trace ``T(gamma) = sum_j o_j <A u_j, u_j>`` for either kinetic
  form ``A`` (fractional Laplacian, or its Hardy modification),
* the interpolation quotient ``T(gamma)^theta / ||rho_gamma||_q`` together
  with its inverse-power companion ``W(gamma) = ||rho||_q^q / T^(q theta)``,
* the unitary dilation action and the scaling gauge ``T = theta ||rho||_q^q``
  that normalises iterates of the self-consistent solver,
* the linearised energy ``T(gamma) - int V rho_gamma``.

Ensembles are treated as immutable values: every transformation builds a new
instance, and the density / kinetic caches live on the instance they were
computed for.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grids import (
    FourierGrid,
    GridError,
    GridFunction,
    RadialGrid,
    density_of,
    dilate,
    hardy_energy,
    integral,
    kinetic_energy,
    l2_inner,
    l2_norm,
    lp_norm,
)
from .params import ProblemParams

__all__ = [
    "Ensemble",
    "EnsembleError",
    "orthonormalize",
    "kinetic_norm",
    "rescale",
    "weinstein_quotient",
    "weinstein_functional",
    "virial_normalize",
    "linearized_energy",
    "save_ensemble",
    "load_ensemble",
]

ORTHOGONALITY_TOL = 1e-8
NORM_CAP_TOL = 1e-10


class EnsembleError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class Ensemble:
    """Finite-rank density matrix on one grid."""

    def __init__(self, grid, orbitals, occupations, validate: bool = True):
        self.grid = grid
        self.orbitals = list(orbitals)
        self.occupations = [float(o) for o in occupations]
        if len(self.orbitals) != len(self.occupations):
            raise EnsembleError("shape", "one occupation per orbital required")
        for u in self.orbitals:
            if u.role != "wave":
                raise EnsembleError("shape", "ensemble orbitals must be waves")
            if u.grid is not grid and u.grid.descriptor() != grid.descriptor():
                raise GridError("grid-mismatch", "orbital grid differs from ensemble grid")
        self._density: GridFunction | None = None
        self._kinetic: dict[tuple[float, bool], float] = {}
        if validate:
            self._validate()

    def _validate(self):
        for o in self.occupations:
            if not (-1e-12 <= o <= 1.0 + 1e-12):
                raise EnsembleError("occupation", f"occupation {o} outside [0, 1]")
        norms = [l2_norm(u) for u in self.orbitals]
        for nv in norms:
            if nv > 1.0 + NORM_CAP_TOL:
                raise EnsembleError("norm-cap", f"orbital norm {nv} exceeds 1")
        for i in range(len(self.orbitals)):
            for j in range(i + 1, len(self.orbitals)):
                if abs(l2_inner(self.orbitals[i], self.orbitals[j])) > ORTHOGONALITY_TOL:
                    raise EnsembleError("orthogonality", f"orbitals {i}, {j} not orthogonal")

    # -- structure ---------------------------------------------------------

    @property
    def rank(self) -> int:
        return sum(1 for o in self.occupations if o > 0.0)

    @property
    def trace(self) -> float:
        return float(sum(o * l2_inner(u, u) for o, u in zip(self.occupations, self.orbitals)))

    def density(self) -> GridFunction:
        if self._density is None:
            self._density = density_of(self)
        return self._density

    def with_occupations(self, occupations) -> "Ensemble":
        return Ensemble(self.grid, [u.copy() for u in self.orbitals], occupations, validate=False)

    def __len__(self) -> int:
        return len(self.orbitals)


def orthonormalize(grid, raw_orbitals) -> list[GridFunction]:
    """Gram-Schmidt (via QR in quadrature coordinates) on a list of waves."""
    if not raw_orbitals:
        return []
    if isinstance(grid, FourierGrid):
        weight = math.sqrt(grid.cell_volume)
        mat = np.stack([u.values.ravel() for u in raw_orbitals], axis=1) * weight
        q, _ = np.linalg.qr(mat)
        return [
            GridFunction(grid, (q[:, j] / weight).reshape(grid.shape), "wave")
            for j in range(q.shape[1])
        ]
    sqrtw = np.sqrt(grid.radial_weights)
    mat = np.stack([(u.values * sqrtw).ravel() for u in raw_orbitals], axis=1)
    q, _ = np.linalg.qr(mat)
    out = []
    for j in range(q.shape[1]):
        vals = q[:, j].reshape(grid.shape) / sqrtw
        out.append(GridFunction(grid, vals, "wave"))
    return out


# ---------------------------------------------------------------------------
# Functionals
# ---------------------------------------------------------------------------


def kinetic_norm(g: Ensemble, s: float, hardy: bool = False) -> float:
    """Kinetic trace ``sum_j o_j E(u_j)`` with the regime-appropriate energy."""
    key = (float(s), bool(hardy))
    if key not in g._kinetic:
        energy = hardy_energy if hardy else kinetic_energy
        g._kinetic[key] = float(
            sum(o * energy(u, s) for o, u in zip(g.occupations, g.orbitals) if o != 0.0)
        )
    return g._kinetic[key]


def rescale(g: Ensemble, lam: float, check_tolerance: float = 1e-7) -> Ensemble:
    """Unitary dilation ``U_lam gamma U_lam^*`` (orbitals resampled, occupations kept).

    ``check_tolerance`` is the relative L^2 mass loss above which the dilation
    is rejected as pushing support outside the truncated domain; solver
    internals relax it for rough early iterates.
    """
    if lam <= 0:
        raise EnsembleError("scale", "dilation factor must be positive")
    return Ensemble(
        g.grid,
        [dilate(u, lam, check_tolerance=check_tolerance) for u in g.orbitals],
        list(g.occupations),
        validate=False,
    )


def weinstein_quotient(g: Ensemble, params: ProblemParams) -> float:
    """Interpolation quotient ``T(gamma)^theta / ||rho_gamma||_q``.

    Scale-invariant by the choice of ``theta``; raises a degenerate-ensemble
    error when either the kinetic trace or the density norm vanishes.
    """
    kin = kinetic_norm(g, params.s, params.hardy)
    rho_norm = lp_norm(g.density(), params.q)
    if kin <= 0.0 or rho_norm <= 0.0:
        raise EnsembleError("degenerate", "quotient undefined for vanishing norms")
    return kin ** params.theta / rho_norm


def weinstein_functional(g: Ensemble, params: ProblemParams) -> float:
    """``W(gamma) = ||rho||_q^q / T^(q theta)``; maximised where the quotient is minimised."""
    return weinstein_quotient(g, params) ** (-params.q)


def virial_gauge_ratio(g: Ensemble, params: ProblemParams) -> float:
    """``T / (theta ||rho||_q^q)``; equal to one in the scaling gauge."""
    kin = kinetic_norm(g, params.s, params.hardy)
    power = lp_norm(g.density(), params.q) ** params.q
    if kin <= 0.0 or power <= 0.0:
        raise EnsembleError("degenerate", "gauge undefined for vanishing norms")
    return kin / (params.theta * power)


def virial_normalize(g: Ensemble, params: ProblemParams,
                     rtol: float = 1e-9, max_rounds: int = 5,
                     resample_tolerance: float = 1e-7) -> Ensemble:
    """Dilate ``gamma`` into the scaling gauge ``T = theta ||rho||_q^q``.

    The continuum dilation laws ``T -> lam^(2s) T`` and
    ``||rho||_q^q -> lam^(d(q-1)) ||rho||_q^q`` make the gauge factor a closed
    form; a short fixed-point loop absorbs the residual resampling error of
    the discrete dilation.  On Fourier boxes only dyadic factors exist, so the
    dilation snaps to the nearest power of two and the gauge is attained up to
    that granularity (exactly when the needed factor is dyadic).
    """
    exponent = params.d * (params.q - 1.0) - 2.0 * params.s
    if exponent <= 0:
        raise EnsembleError("scale", "gauge fixing requires the mass-supercritical regime")
    out = g
    for _ in range(max_rounds):
        ratio = virial_gauge_ratio(out, params)
        if abs(ratio - 1.0) <= rtol:
            return out
        lam = ratio ** (1.0 / exponent)
        if isinstance(g.grid, FourierGrid):
            lam = 2.0 ** round(math.log2(lam))
            if lam == 1.0:
                return out
        out = rescale(out, lam, check_tolerance=resample_tolerance)
    if isinstance(g.grid, FourierGrid):
        return out
    ratio = virial_gauge_ratio(out, params)
    if abs(ratio - 1.0) > 1e-8:
        raise EnsembleError("scale", f"gauge fixing stalled at ratio {ratio}")
    return out


def linearized_energy(g: Ensemble, potential: GridFunction, s: float, hardy: bool = False) -> float:
    """``T(gamma) - int V rho_gamma`` (the energy whose minimisers fill bound states)."""
    if len(g) == 0:
        return 0.0
    rho = g.density()
    if potential.grid is not rho.grid and potential.grid.descriptor() != rho.grid.descriptor():
        raise GridError("grid-mismatch", "potential lives on a different grid")
    if isinstance(g.grid, FourierGrid):
        coupling = float(np.sum(np.real(potential.values) * rho.values) * g.grid.cell_volume)
    else:
        coupling = float(np.dot(g.grid.volume_weights, potential.values * rho.values))
    return kinetic_norm(g, s, hardy) - coupling


# ---------------------------------------------------------------------------
# Serialisation: metadata JSON + orbital matrix CSV
# ---------------------------------------------------------------------------


def save_ensemble(g: Ensemble, json_path, csv_path) -> None:
    json_path, csv_path = Path(json_path), Path(csv_path)
    complex_orbitals = isinstance(g.grid, FourierGrid)
    meta = {
        "grid": g.grid.descriptor(),
        "occupations": list(g.occupations),
        "orbital_count": len(g),
        "complex": complex_orbitals,
        "orbital_csv": csv_path.name,
    }
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    cols = []
    for u in g.orbitals:
        flat = u.values.ravel()
        if complex_orbitals:
            cols.extend([flat.real, flat.imag])
        else:
            cols.append(flat)
    data = np.column_stack(cols) if cols else np.zeros((0, 0))
    np.savetxt(csv_path, data, delimiter=",")


def load_ensemble(json_path) -> Ensemble:
    from .grids import grid_from_descriptor

    json_path = Path(json_path)
    meta = json.loads(json_path.read_text())
    grid = grid_from_descriptor(meta["grid"])
    csv_path = json_path.parent / meta["orbital_csv"]
    count = int(meta["orbital_count"])
    orbitals: list[GridFunction] = []
    if count:
        data = np.loadtxt(csv_path, delimiter=",", ndmin=2)
        shape = grid.shape
        for j in range(count):
            if meta["complex"]:
                vals = data[:, 2 * j] + 1j * data[:, 2 * j + 1]
            else:
                vals = data[:, j]
            orbitals.append(GridFunction(grid, vals.reshape(shape), "wave"))
    return Ensemble(grid, orbitals, meta["occupations"], validate=False)
