"""P1 Galerkin pieces: mass/stiffness assembly, projections, and error norms.

Dirichlet conditions are imposed by eliminating boundary rows and columns, so
the interior mass and stiffness matrices stay symmetric positive definite.
Load vectors for the supported initial data are integrated exactly (closed
forms for sine and step data, point evaluation for Dirac data), which keeps
quadrature error out of the convergence studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .linalg import SparseSymMatrix, solve_spd
from .mesh import Mesh

if TYPE_CHECKING:
    from .oracle import ModalSolution

__all__ = [
    "InitialDatum",
    "FemSpace",
    "ErrorNorms",
    "AssemblyError",
    "UnsupportedDatumError",
    "assemble",
    "l2_project",
    "ritz_project",
    "error_norms",
]


class AssemblyError(RuntimeError):
    pass


class UnsupportedDatumError(ValueError):
    pass


@dataclass(frozen=True)
class InitialDatum:
    """Initial condition of one of the study families.

    smooth_sine: sin(frequency * pi * x); step: indicator of (0, location];
    dirac: point mass at location; step2d: indicator of (0, location] x (0,1);
    custom_coefficients: nodal values of a mesh function (boundary included).
    """

    kind: str
    frequency: int = 2
    location: float = 0.5
    values: np.ndarray | None = None

    def __post_init__(self):
        kinds = ("smooth_sine", "step", "dirac", "step2d", "custom_coefficients")
        if self.kind not in kinds:
            raise ValueError(f"unknown datum kind {self.kind!r}")
        if self.kind in ("step", "dirac", "step2d") and not 0.0 < self.location < 1.0:
            raise ValueError(f"location must lie inside the domain, got {self.location}")
        if self.kind == "custom_coefficients":
            if self.values is None:
                raise ValueError("custom datum needs nodal values")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("custom nodal values must be finite")


@dataclass(frozen=True)
class FemSpace:
    """Assembled P1 space: interior matrices plus the full (pre-elimination) pair."""

    mesh: Mesh
    interior_map: np.ndarray      # node index -> interior unknown index, -1 on boundary
    M: SparseSymMatrix
    S: SparseSymMatrix
    M_full: SparseSymMatrix
    S_full: SparseSymMatrix

    @property
    def n_dof(self) -> int:
        return self.M.n

    @property
    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.interior_map >= 0)

    def expand(self, interior: np.ndarray) -> np.ndarray:
        """Scatter interior coefficients to the full node vector (zeros on the boundary)."""
        full = np.zeros(self.mesh.n_nodes)
        full[self.interior_nodes] = interior
        return full


def _assemble_1d(mesh: Mesh):
    h = np.diff(mesh.nodes)
    if np.any(h <= 0):
        raise AssemblyError("degenerate interval element")
    e0 = mesh.elements[:, 0]
    e1 = mesh.elements[:, 1]
    rows = np.concatenate([e0, e0, e1, e1])
    cols = np.concatenate([e0, e1, e0, e1])
    mvals = np.concatenate([h / 3.0, h / 6.0, h / 6.0, h / 3.0])
    svals = np.concatenate([1.0 / h, -1.0 / h, -1.0 / h, 1.0 / h])
    return rows, cols, mvals, svals


def _assemble_2d(mesh: Mesh):
    p = mesh.nodes[mesh.elements]          # (ne, 3, 2)
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(area <= 0):
        raise AssemblyError("degenerate or inverted triangle")
    # gradients of barycentric functions: grad l_i = rot(edge opposite i) / (2 area)
    grads = np.empty((len(area), 3, 2))
    for i in range(3):
        e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        grads[:, i, 0] = -e[:, 1]
        grads[:, i, 1] = e[:, 0]
    grads /= (2.0 * area)[:, None, None]
    s_local = np.einsum("eid,ejd->eij", grads, grads) * area[:, None, None]
    m_local = (np.ones((3, 3)) + np.eye(3))[None, :, :] * (area / 12.0)[:, None, None]
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    return rows, cols, m_local.ravel(), s_local.ravel()


def assemble(mesh: Mesh) -> FemSpace:
    """Exact element integration of the P1 mass and stiffness matrices."""
    if mesh.dim == 1:
        rows, cols, mvals, svals = _assemble_1d(mesh)
    else:
        rows, cols, mvals, svals = _assemble_2d(mesh)
    n = mesh.n_nodes
    M_full = SparseSymMatrix.from_coo(n, rows, cols, mvals)
    S_full = SparseSymMatrix.from_coo(n, rows, cols, svals)

    interior = mesh.interior_nodes
    interior_map = np.full(n, -1, dtype=int)
    interior_map[interior] = np.arange(len(interior))
    Mi = SparseSymMatrix(M_full.tocsr()[interior][:, interior])
    Si = SparseSymMatrix(S_full.tocsr()[interior][:, interior])
    return FemSpace(mesh=mesh, interior_map=interior_map, M=Mi, S=Si, M_full=M_full, S_full=S_full)


# ---------------------------------------------------------------------------
# load vectors (exact integration per datum kind)

def _sine_load_1d(space: FemSpace, m: int) -> np.ndarray:
    mesh = space.mesh
    h = mesh.h
    x = mesh.nodes[space.interior_nodes]
    w = 2.0 * (1.0 - math.cos(m * math.pi * h)) / (h * (m * math.pi) ** 2)
    return np.sin(m * math.pi * x) * w


def _step_load_1d(space: FemSpace, a: float) -> np.ndarray:
    # b_i = int_0^a hat_i; the tent on [x_i-h, x_i+h] split at the cut point a
    mesh = space.mesh
    h = mesh.h
    x = mesh.nodes[space.interior_nodes]
    left = np.clip((a - (x - h)) / h, 0.0, 1.0)
    right = np.clip((a - x) / h, 0.0, 1.0)
    return h * (left**2 / 2.0 + right - right**2 / 2.0)


def _dirac_load_1d(space: FemSpace, x0: float) -> np.ndarray:
    mesh = space.mesh
    if np.any(np.isclose(mesh.nodes[mesh.boundary_mask], x0)):
        raise ValueError("Dirac located on a Dirichlet boundary node")
    x = mesh.nodes[space.interior_nodes]
    return np.maximum(0.0, 1.0 - np.abs(x0 - x) / mesh.h)


def _step2d_load(space: FemSpace, a: float) -> np.ndarray:
    mesh = space.mesh
    K = int(round(math.sqrt(mesh.n_elements / 2)))
    if not np.isclose(a * K, round(a * K)):
        raise UnsupportedDatumError("2D step cut must align with a mesh line")
    xmax = mesh.nodes[mesh.elements, 0].max(axis=1)
    inside = xmax <= a + 1e-12
    areas = mesh.element_measures()
    b_full = np.zeros(mesh.n_nodes)
    np.add.at(b_full, mesh.elements[inside].ravel(), np.repeat(areas[inside] / 3.0, 3))
    return b_full[space.interior_nodes]


def _load_vector(space: FemSpace, v: InitialDatum) -> np.ndarray:
    if v.kind == "smooth_sine":
        if space.mesh.dim != 1:
            raise UnsupportedDatumError("sine datum is one-dimensional")
        return _sine_load_1d(space, v.frequency)
    if v.kind == "step":
        if space.mesh.dim != 1:
            raise UnsupportedDatumError("step datum is one-dimensional")
        return _step_load_1d(space, v.location)
    if v.kind == "dirac":
        if space.mesh.dim != 1:
            raise UnsupportedDatumError("dirac datum is one-dimensional")
        return _dirac_load_1d(space, v.location)
    if v.kind == "step2d":
        if space.mesh.dim != 2:
            raise UnsupportedDatumError("step2d datum lives on the square")
        return _step2d_load(space, v.location)
    if v.kind == "custom_coefficients":
        b_full = space.M_full @ np.asarray(v.values, dtype=float)
        return b_full[space.interior_nodes]
    raise UnsupportedDatumError(f"no load rule for kind {v.kind!r}")


def l2_project(space: FemSpace, v: InitialDatum, tol: float = 1e-13) -> np.ndarray:
    """Interior coefficients of the L2 projection P_h v (duality pairing for Dirac)."""
    return solve_spd(space.M, _load_vector(space, v), tol=tol)


def ritz_project(space: FemSpace, v: InitialDatum, tol: float = 1e-13) -> np.ndarray:
    """Interior coefficients of the Ritz projection R_h v (gradient data required)."""
    if v.kind == "smooth_sine":
        if space.mesh.dim != 1:
            raise UnsupportedDatumError("sine datum is one-dimensional")
        nodes = space.mesh.nodes
        vv = np.sin(v.frequency * math.pi * nodes)
        idx = space.interior_nodes
        c = (2.0 * vv[idx] - vv[idx - 1] - vv[idx + 1]) / space.mesh.h
    elif v.kind == "custom_coefficients":
        c = (space.S_full @ np.asarray(v.values, dtype=float))[space.interior_nodes]
    else:
        raise UnsupportedDatumError(f"datum kind {v.kind!r} has no gradient representation")
    return solve_spd(space.S, c, tol=tol)


# ---------------------------------------------------------------------------
# error norms against the spectral solution

@dataclass(frozen=True)
class ErrorNorms:
    l2: float
    h1: float
    l2_normalized: float
    h1_normalized: float
    datum_norm: float | None


def _gauss01(p: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(p)
    return 0.5 * (x + 1.0), 0.5 * w


def _points_per_element(max_freq: int, h: float, min_points: int) -> int:
    # resolve the fastest retained mode: Gauss-p handles a phase of about 2p
    return max(min_points, int(math.ceil(1.2 * max_freq * h)) + 6)


def _error_1d(space: FemSpace, numeric: np.ndarray, exact: "ModalSolution", t: float, min_points: int):
    mesh = space.mesh
    full = space.expand(numeric)
    p = _points_per_element(exact.max_frequency[0], mesh.h, min_points)
    g, gw = _gauss01(p)

    pieces = []
    breaks = [b for b in exact.singular_breaks() if 0.0 < b < 1.0]
    for e in range(mesh.n_elements):
        xl, xr = mesh.nodes[mesh.elements[e]]
        cuts = [b for b in breaks if xl < b < xr]
        for lo, hi in zip([xl] + cuts, cuts + [xr]):
            pieces.append((e, lo, hi))

    l2_sq = 0.0
    h1_sq = 0.0
    for e, lo, hi in pieces:
        i0, i1 = mesh.elements[e]
        xl, xr = mesh.nodes[i0], mesh.nodes[i1]
        xq = lo + (hi - lo) * g
        wq = (hi - lo) * gw
        uh = full[i0] + (full[i1] - full[i0]) * (xq - xl) / (xr - xl)
        duh = (full[i1] - full[i0]) / (xr - xl)
        uv, ug = exact.eval_points(xq, t)
        l2_sq += float(wq @ (uh - uv) ** 2)
        h1_sq += float(wq @ (duh - ug) ** 2)
    return l2_sq, h1_sq


def _error_2d(space: FemSpace, numeric: np.ndarray, exact: "ModalSolution", t: float, min_points: int):
    mesh = space.mesh
    K = int(round(math.sqrt(mesh.n_elements / 2)))
    h = 1.0 / K
    grid = np.arange(K) * h
    V = space.expand(numeric).reshape(K + 1, K + 1)   # [iy, ix]
    Va, Vb = V[:-1, :-1], V[:-1, 1:]
    Vc, Vd = V[1:, 1:], V[1:, :-1]

    fmax = max(exact.max_frequency)
    p = max(4, min(int(math.ceil(1.2 * fmax * h)) + 4, 60), min_points)
    g, gw = _gauss01(p)

    l2_sq = 0.0
    h1_sq = 0.0
    # lower triangles (a,b,c): eta <= xi; iterate outer Gauss index in x
    dx_l, dy_l = (Vb - Va) / h, (Vc - Vb) / h
    for i in range(p):
        xi = h * g[i]
        xs = grid + xi
        ys = (xi * g[:, None] + grid[None, :]).ravel()     # index j*K + n
        uv, ugx, ugy = exact.eval_grid(xs, ys, t)
        uv = uv.reshape(p, K, K)
        ugx = ugx.reshape(p, K, K)
        ugy = ugy.reshape(p, K, K)
        uh = Va[None] + dx_l[None] * xi + dy_l[None] * (xi * g)[:, None, None]
        w = (h * gw[i]) * (xi * gw)[:, None, None]
        l2_sq += float(np.sum(w * (uh - uv) ** 2))
        h1_sq += float(np.sum(w * ((dx_l[None] - ugx) ** 2 + (dy_l[None] - ugy) ** 2)))
    # upper triangles (a,c,d): xi <= eta; outer Gauss index in y
    dx_u, dy_u = (Vc - Vd) / h, (Vd - Va) / h
    for jq in range(p):
        eta = h * g[jq]
        ys = grid + eta
        xs = (eta * g[:, None] + grid[None, :]).ravel()    # index i*K + m
        uv, ugx, ugy = exact.eval_grid(xs, ys, t)
        uv = uv.reshape(K, p, K)
        ugx = ugx.reshape(K, p, K)
        ugy = ugy.reshape(K, p, K)
        uh = Va[:, None, :] + dx_u[:, None, :] * (eta * g)[None, :, None] + dy_u[:, None, :] * eta
        w = (h * gw[jq]) * (eta * gw)[None, :, None]
        l2_sq += float(np.sum(w * (uh - uv) ** 2))
        h1_sq += float(np.sum(w * ((dx_u[:, None, :] - ugx) ** 2 + (dy_u[:, None, :] - ugy) ** 2)))
    return l2_sq, h1_sq


def error_norms(
    space: FemSpace,
    numeric: np.ndarray,
    exact: "ModalSolution",
    t: float,
    min_points: int = 4,
) -> ErrorNorms:
    """L2 and H1-seminorm distance between a mesh function and the exact solution.

    Composite Gauss quadrature with at least `min_points` points per element;
    the point count grows with the highest retained oracle mode so that the
    oscillatory part of the integrand stays resolved.
    """
    if t <= 0.0:
        raise ValueError(f"time must be positive, got t={t}")
    numeric = np.asarray(numeric, dtype=float)
    if numeric.shape != (space.n_dof,):
        raise ValueError(f"expected {space.n_dof} interior coefficients, got {numeric.shape}")
    if space.mesh.dim == 1:
        l2_sq, h1_sq = _error_1d(space, numeric, exact, t, min_points)
    else:
        l2_sq, h1_sq = _error_2d(space, numeric, exact, t, min_points)
    l2 = math.sqrt(max(l2_sq, 0.0))
    h1 = math.sqrt(max(h1_sq, 0.0))
    norm_v = exact.datum_l2()
    scale = norm_v if norm_v else 1.0
    return ErrorNorms(l2=l2, h1=h1, l2_normalized=l2 / scale, h1_normalized=h1 / scale, datum_norm=norm_v)
