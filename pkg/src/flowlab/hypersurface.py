"""Spacelike graph hypersurfaces over the flat torus and their geometry.

A hypersurface is the graph M = {(u(x), x)} of a scalar field u on a
periodic grid.  With the ambient metric e^{2ψ}(σ(dx⁰)² + σ_ij dx^i dx^j)
the chart tangents are x_i = (u_i, δ_i) and

    g_ij = e^{2ψ}(σ u_i u_j + σ_ij),         |Du|² = σ^{ij} u_i u_j,
    v    = (1 + σ|Du|²)^{1/2},               ṽ = 1/v,
    ν^α  = σ e^{−ψ} v^{−1} (1, −σ u^k),      u^k = σ^{kj} u_j,

which enforces ⟨ν,ν⟩ = σ, ⟨ν,x_i⟩ = 0 exactly, with the past-directed
normal in the Lorentzian case (ν⁰ < 0) and ν⁰ > 0 in the Riemannian one.
The second fundamental form (taken with respect to −σν) follows from the
0-component of the Gauss formula:

    e^{−ψ} v^{−1} h_ij = −u_ij − Γ̄⁰₀₀ u_i u_j − Γ̄⁰₀ᵢ u_j − Γ̄⁰₀ⱼ u_i − Γ̄⁰ᵢⱼ,

where u_ij is the Hessian with respect to the induced metric.  Spatial
derivatives are 4th-order periodic central differences throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stencils
from .ambient import AmbientModel, riemann_at
from .errors import GeometryError

__all__ = [
    "SpatialGrid",
    "GraphState",
    "HypersurfaceGeometry",
    "compute_geometry",
    "volume",
    "check_gauss_codazzi",
    "admissibility",
    "v_tilde_bound_estimate",
    "SPACELIKE_MARGIN",
]

# Lorentzian states with σ^{ij}u_iu_j above 1 − margin are rejected
SPACELIKE_MARGIN = 1e-4


@dataclass(frozen=True)
class SpatialGrid:
    """Periodic uniform grid on the torus (period L, N points per axis)."""

    n: int
    points_per_axis: int
    period: float = 1.0
    stencil_order: int = 4

    def __post_init__(self):
        N = self.points_per_axis
        if N < 32 or (N & (N - 1)) != 0:
            raise ValueError("points_per_axis must be a power of two >= 32")
        if not 1 <= self.n <= 3:
            raise ValueError("spatial dimension must be 1, 2 or 3")
        if self.stencil_order != 4:
            raise ValueError("only 4th-order stencils are supported")

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.n

    @property
    def npoints(self) -> int:
        return self.points_per_axis**self.n

    def coordinates(self) -> np.ndarray:
        """Chart coordinates of the grid points, shape (*shape, n)."""
        axis = np.arange(self.points_per_axis) * self.spacing
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack(mesh, axis=-1)


@dataclass
class GraphState:
    """The scalar unknown u on the grid at one flow time."""

    grid: SpatialGrid
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != self.grid.shape:
            raise ValueError(f"u has shape {self.u.shape}, expected {self.grid.shape}")

    def copy(self) -> "GraphState":
        return GraphState(self.grid, self.u.copy(), self.t)


def _batched_eigh(a: np.ndarray):
    """Eigen-decomposition of symmetric (..., n, n), ascending; closed form for n <= 2."""
    n = a.shape[-1]
    if n == 1:
        w = a[..., 0, 0][..., None]
        q = np.ones(a.shape)
        return w, q
    if n == 2:
        a00, a01, a11 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 1]
        half_tr = 0.5 * (a00 + a11)
        disc = np.sqrt(np.maximum(0.25 * (a00 - a11) ** 2 + a01**2, 0.0))
        w = np.stack([half_tr - disc, half_tr + disc], axis=-1)
        # eigenvector of the larger eigenvalue, guarded against degeneracy
        v1x = np.where(np.abs(a01) > 1e-300, a01, 0.0)
        v1y = w[..., 1] - a00
        swap = np.abs(w[..., 1] - a11) > np.abs(v1y)
        v1x = np.where(swap, w[..., 1] - a11, v1x)
        v1y = np.where(swap, a01, v1y)
        degenerate = (np.abs(v1x) + np.abs(v1y)) < 1e-300
        v1x = np.where(degenerate, 0.0, v1x)
        v1y = np.where(degenerate, 1.0, v1y)
        norm = np.sqrt(v1x**2 + v1y**2)
        v1x, v1y = v1x / norm, v1y / norm
        q = np.empty(a.shape)
        q[..., 0, 1] = v1x
        q[..., 1, 1] = v1y
        q[..., 0, 0] = -v1y
        q[..., 1, 0] = v1x
        return w, q
    return np.linalg.eigh(a)


def _batched_det(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    if n == 1:
        return a[..., 0, 0]
    if n == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return np.linalg.det(a)


def _batched_inv(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    if n == 1:
        return 1.0 / a
    if n == 2:
        det = _batched_det(a)
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 1, 1] = a[..., 0, 0]
        out[..., 0, 1] = -a[..., 0, 1]
        out[..., 1, 0] = -a[..., 1, 0]
        return out / det[..., None, None]
    return np.linalg.inv(a)


class HypersurfaceGeometry:
    """All pointwise geometry derived from one GraphState (immutable snapshot)."""

    __slots__ = (
        "model", "grid", "state", "coords", "Du", "du_sq", "g", "g_inv",
        "v", "v_tilde", "nu", "h", "h_mixed", "kappa", "sqrt_g", "H",
        "psi", "conf", "gamma_bar0", "gamma_induced", "u_hess_chart",
        "u_hess_cov", "sigma", "sigma_inv", "frame_sqrt", "frame_sqrt_inv",
        "frame_vecs", "_gamma_bar",
    )

    @property
    def gamma_bar(self) -> np.ndarray:
        """Full ambient Christoffel field at the surface points (computed lazily)."""
        if self._gamma_bar is None:
            self._gamma_bar = _ambient_christoffel(self.model, self.state.u, self.coords)
        return self._gamma_bar

    def covariant_hessian(self, phi: np.ndarray) -> np.ndarray:
        """Hessian of a scalar field on M with respect to the induced metric."""
        dx = self.grid.spacing
        n = self.grid.n
        hess = stencils.hessian(phi, dx, n)
        grad = stencils.gradient(phi, dx, n)
        return hess - np.einsum("...kij,...k->...ij", self.gamma_induced, grad)

    def tangents(self) -> np.ndarray:
        """Chart components x_i^α of the coordinate tangents, shape (*grid, n, n+1)."""
        n = self.grid.n
        T = np.zeros(self.grid.shape + (n, n + 1))
        T[..., :, 0] = self.Du
        T[..., :, 1:] = np.eye(n)
        return T


def compute_geometry(model: AmbientModel, state: GraphState,
                     margin: float = SPACELIKE_MARGIN) -> HypersurfaceGeometry:
    """Populate the full geometry of graph(u); raises GeometryError if not spacelike."""
    grid = state.grid
    if grid.n != model.n:
        raise ValueError("grid and model dimension differ")
    n, dx = grid.n, grid.spacing
    u = state.u
    model.check_domain(u)
    coords = grid.coordinates()

    Du = stencils.gradient(u, dx, n)
    sigma = model.sigma_ij(u, coords)
    sigma_inv = _batched_inv(sigma)
    u_up = (sigma_inv * Du[..., None, :]).sum(-1)
    du_sq = (u_up * Du).sum(-1)
    sig = model.sigma
    if sig < 0:
        worst = float(du_sq.max())
        if worst > 1.0 - margin:
            idx = np.unravel_index(int(np.argmax(du_sq)), du_sq.shape)
            raise GeometryError(
                f"spacelikeness violated: sigma^ij u_i u_j = {worst:.6g} at grid index {idx}",
                point=idx, value=worst,
            )

    v = np.sqrt(1.0 + sig * du_sq)
    psi = model.psi(u, coords)
    conf = np.exp(psi)

    outer_du = Du[..., :, None] * Du[..., None, :]
    g = conf[..., None, None] ** 2 * (sig * outer_du + sigma)
    g_inv = _batched_inv(g)

    nu = np.empty(grid.shape + (n + 1,))
    nu[..., 0] = sig / (conf * v)
    nu[..., 1:] = -(1.0 / (conf * v))[..., None] * u_up

    dpsi = model.dpsi(u, coords)
    gb0 = _christoffel_row0(model, u, coords, sigma, dpsi)

    dg = np.stack([stencils.d1(g, dx, ax) for ax in range(n)], axis=n)  # (...,m,i,j)
    d_i = np.swapaxes(dg, -3, -2)
    d_j = np.swapaxes(d_i, -2, -1)
    sum_d = (d_i + d_j - dg).reshape(grid.shape + (n, n * n))
    gamma_ind = 0.5 * (g_inv @ sum_d).reshape(grid.shape + (n, n, n))

    u_hess_chart = stencils.hessian(u, dx, n)
    u_hess_cov = u_hess_chart - (gamma_ind * Du[..., :, None, None]).sum(-3)

    gb0_mixed = gb0[..., 0, 1:][..., :, None] * Du[..., None, :]
    corr = (
        gb0[..., 0, 0][..., None, None] * outer_du
        + gb0_mixed
        + np.swapaxes(gb0_mixed, -1, -2)
        + gb0[..., 1:, 1:]
    )
    h = -(conf * v)[..., None, None] * (u_hess_cov + corr)
    h_mixed = g_inv @ h

    # principal curvatures from the symmetric eigenproblem in a g-orthonormal frame
    wg, qg = _batched_eigh(g)
    qg_t = np.swapaxes(qg, -1, -2)
    frame_sqrt_inv = (qg / np.sqrt(wg)[..., None, :]) @ qg_t
    frame_sqrt = (qg * np.sqrt(wg)[..., None, :]) @ qg_t
    a_frame = frame_sqrt_inv @ h @ frame_sqrt_inv
    kappa, frame_vecs = _batched_eigh(a_frame)

    sqrt_g = np.sqrt(np.abs(_batched_det(g)))

    geom = HypersurfaceGeometry()
    geom.model = model
    geom.grid = grid
    geom.state = state
    geom.coords = coords
    geom.Du = Du
    geom.du_sq = du_sq
    geom.g = g
    geom.g_inv = g_inv
    geom.v = v
    geom.v_tilde = 1.0 / v
    geom.nu = nu
    geom.h = h
    geom.h_mixed = h_mixed
    geom.kappa = kappa
    geom.sqrt_g = sqrt_g
    geom.H = np.einsum("...ii->...", h_mixed)
    geom.psi = psi
    geom.conf = conf
    geom.gamma_bar0 = gb0
    geom._gamma_bar = None
    geom.gamma_induced = gamma_ind
    geom.u_hess_chart = u_hess_chart
    geom.u_hess_cov = u_hess_cov
    geom.sigma = sigma
    geom.sigma_inv = sigma_inv
    geom.frame_sqrt = frame_sqrt
    geom.frame_sqrt_inv = frame_sqrt_inv
    geom.frame_vecs = frame_vecs
    return geom


def _ambient_christoffel(model, u, coords):
    from .ambient import christoffel_at

    return christoffel_at(model, u, coords)


def _christoffel_row0(model, u, coords, sigma, dpsi):
    from .ambient import christoffel_row0

    return christoffel_row0(model, u, coords, sij=sigma, dpsi=dpsi)


def volume(geom: HypersurfaceGeometry) -> float:
    """|M| by the periodic rectangle rule (spectrally accurate for smooth u)."""
    return float(geom.sqrt_g.mean() * geom.grid.period**geom.grid.n)


def check_gauss_codazzi(model: AmbientModel, state: GraphState) -> dict:
    """Max-norm residuals of the Gauss, Codazzi and Weingarten identities."""
    geom = compute_geometry(model, state)
    grid = geom.grid
    n, dx = grid.n, grid.spacing
    sig = model.sigma
    T = geom.tangents()

    amb = riemann_at(model, state.u, geom.coords)
    rbar = amb.riemann

    # Gauss: R_ijkl = σ(h_ik h_jl − h_il h_jk) + R̄(x_i, x_j, x_k, x_l)
    if n >= 2:
        dgam = np.stack(
            [stencils.d1(geom.gamma_induced, dx, ax) for ax in range(n)], axis=n
        )  # (..., m, k, i, j) = ∂_m Γ^k_ij
        gi = geom.gamma_induced
        riem_ud = (
            np.einsum("...cadb->...abcd", dgam)
            - np.einsum("...dacb->...abcd", dgam)
            + np.einsum("...ace,...edb->...abcd", gi, gi)
            - np.einsum("...ade,...ecb->...abcd", gi, gi)
        )
        riem = np.einsum("...ae,...ebcd->...abcd", geom.g, riem_ud)
        h = geom.h
        gauss_rhs = sig * (
            np.einsum("...ik,...jl->...ijkl", h, h)
            - np.einsum("...il,...jk->...ijkl", h, h)
        ) + np.einsum(
            "...abcd,...ia,...jb,...kc,...ld->...ijkl", rbar, T, T, T, T
        )
        gauss = float(np.abs(riem - gauss_rhs).max())
    else:
        gauss = 0.0  # one-dimensional hypersurfaces are intrinsically flat

    # Weingarten: ν^α_i = h_i^k x_k^α with h_i^k = h_im g^{mk}
    dnu = np.stack([stencils.d1(geom.nu, dx, ax) for ax in range(n)], axis=n)
    nu_cov = dnu + np.einsum("...abc,...ib,...c->...ia", geom.gamma_bar, T, geom.nu)
    wein = float(np.abs(nu_cov - np.einsum("...ki,...ka->...ia", geom.h_mixed, T)).max())

    # Codazzi: h_ij;k − h_ik;j = R̄(ν, x_i, x_j, x_k)
    dh = np.stack([stencils.d1(geom.h, dx, ax) for ax in range(n)], axis=n)
    gi = geom.gamma_induced
    h_cov = (
        dh
        - np.einsum("...mki,...mj->...kij", gi, geom.h)
        - np.einsum("...mkj,...im->...kij", gi, geom.h)
    )  # (..., k, i, j) = h_ij;k
    lhs = np.einsum("...kij->...ijk", h_cov) - np.einsum("...jik->...ijk", h_cov)
    rhs = np.einsum("...abcd,...a,...ib,...jc,...kd->...ijk", rbar, geom.nu, T, T, T)
    codazzi = float(np.abs(lhs - rhs).max())

    return {"gauss": gauss, "codazzi": codazzi, "weingarten": wein}


def admissibility(geom: HypersurfaceGeometry, cone) -> tuple[np.ndarray, bool]:
    """Pointwise membership of the principal curvatures in the open cone."""
    from .curvature import cone_contains

    per_point = cone_contains(geom.kappa, cone)
    return per_point, bool(per_point.all())


def v_tilde_bound_estimate(model: AmbientModel, state: GraphState, kappa0: float) -> dict:
    """Monitor for the gradient bound under one-sided curvature bounds.

    Reports the current max of ṽ (Lorentzian) resp. v (Riemannian), the
    ambient-Christoffel sup entering the bound's exponent choice, and
    whether the hypothesis κ_i ≥ κ₀ actually holds.  Near-null gradients
    are flagged rather than rejected.
    """
    grid = state.grid
    dx = grid.spacing
    coords = grid.coordinates()
    Du = stencils.gradient(state.u, dx, grid.n)
    sigma = model.sigma_ij(state.u, coords)
    du_sq = np.einsum("...ij,...i,...j->...", _batched_inv(sigma), Du, Du)
    sig = model.sigma
    flagged = bool(sig < 0 and du_sq.max() > 1.0 - SPACELIKE_MARGIN)
    with np.errstate(divide="ignore", invalid="ignore"):
        quantity = 1.0 / np.sqrt(np.maximum(1.0 + sig * du_sq, 1e-300)) if sig < 0 \
            else np.sqrt(1.0 + du_sq)

    applicable = True
    min_kappa = None
    try:
        geom = compute_geometry(model, state)
        min_kappa = float(geom.kappa.min())
        applicable = min_kappa >= kappa0
        gamma_sup = float(np.abs(geom.gamma_bar0).max())
    except GeometryError:
        applicable = False
        gamma_sup = float(
            np.abs(_ambient_christoffel(model, state.u, coords)[..., 0, :, :]).max()
        )

    return {
        "max_v_tilde": float(quantity.max()),
        "christoffel_sup": gamma_sup,
        "kappa0": kappa0,
        "min_kappa": min_kappa,
        "applicable": applicable,
        "near_null_flag": flagged,
    }
