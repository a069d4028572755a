"""Linearized operator of F − f at a stationary hypersurface, and its spectrum.

The linearization in the normal gauge of a solution M of F = f is

    L u = −F^{ij} u_{ij} − σ { F^{ij} h_i^k h_kj + F^{ij} R̄(ν, x_i, ν, x_j)
                               + f_α ν^α } u,

self-adjoint with respect to the √g inner product whenever F^{ij} is
divergence free (class (D)); in that case we assemble the equivalent
divergence form −(√g F^{ij} u_j)_i / √g − c·u, which is exactly symmetric
under the discrete summation-by-parts of the central stencils.

M is a stable solution iff the first eigenvalue λ₁ is non-negative; the
eigenspace is simple and spanned by a strictly positive eigenfunction.
λ₁ is computed by shifted inverse power iteration: dense linear algebra
for one spatial dimension, matrix-free conjugate-gradient inner solves
otherwise.

The local foliation around a stable solution continues G = F − f to
nearby leaves: strictly stable solutions admit Newton continuation of
G(u_ε) = ε; marginally stable ones need the bordered system
(G(u) − τ, ∫η(u − u*)√g − ε) = 0 with η the ground eigenfunction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import stencils
from .ambient import AmbientModel, riemann_at
from .curvature import CurvatureSpec, eval_F, eval_F_ij, _sym_poly_gradient
from .errors import AssemblyError, FoliateError, NumericalError
from .flow import FlowRun, RhsField, check_velocity_sign
from .hypersurface import GraphState, HypersurfaceGeometry, compute_geometry

__all__ = [
    "LinearizedOperator",
    "StabilityReport",
    "assemble",
    "first_eigenpair",
    "verify_limit_stability",
    "foliate",
    "curvature_minus_f",
    "linearization_fd_check",
]

RAYLEIGH_TOL = 1e-12
MAX_SWEEPS = 10_000


@dataclass
class LinearizedOperator:
    """Discrete second-order operator with √g-weighted inner product."""

    grid: object
    a_ij: np.ndarray              # F^{ij}, contravariant coefficients
    potential: np.ndarray         # c with L u = (second order) − c·u
    sqrt_g: np.ndarray
    divergence_form: bool
    geom: HypersurfaceGeometry
    potential_scale: float = 1.0

    def apply(self, u: np.ndarray) -> np.ndarray:
        grid = self.grid
        n, dx = grid.n, grid.spacing
        u = u.reshape(grid.shape)
        if self.divergence_form:
            grads = [stencils.d1(u, dx, ax) for ax in range(n)]
            out = np.zeros(grid.shape)
            for i in range(n):
                flux = self.sqrt_g * sum(
                    self.a_ij[..., i, j] * grads[j] for j in range(n)
                )
                out += stencils.d1(flux, dx, i)
            lu = -out / self.sqrt_g - self.potential * u
        else:
            hess = self.geom.covariant_hessian(u)
            lu = -(self.a_ij * hess).sum(axis=(-1, -2)) - self.potential * u
        return lu

    def quadratic_form(self, u: np.ndarray) -> float:
        """∫ F^{ij} u_i u_j √g − ∫ c u² √g (chart measure included)."""
        grid = self.grid
        n, dx = grid.n, grid.spacing
        u = u.reshape(grid.shape)
        grads = np.stack([stencils.d1(u, dx, ax) for ax in range(n)], axis=-1)
        dens = np.einsum("...ij,...i,...j->...", self.a_ij, grads, grads)
        measure = grid.period**n / grid.npoints
        return float(((dens - self.potential * u * u) * self.sqrt_g).sum() * measure)

    def inner(self, u: np.ndarray, w: np.ndarray) -> float:
        measure = self.grid.period**self.grid.n / self.grid.npoints
        return float((self.sqrt_g * u * w).sum() * measure)

    def as_dense(self) -> np.ndarray:
        P = self.grid.npoints
        A = np.empty((P, P))
        basis = np.zeros(P)
        for j in range(P):
            basis[j] = 1.0
            A[:, j] = self.apply(basis).ravel()
            basis[j] = 0.0
        return A


@dataclass
class StabilityReport:
    lambda1: float
    eta: np.ndarray
    positive_eta: bool
    verdict: str                 # Stable | Unstable | Marginal | NotApplicable
    marginal_tol: float
    heuristic: bool = False
    detail: str = ""

    @property
    def is_stable(self) -> bool:
        return self.lambda1 >= -self.marginal_tol


def assemble(model: AmbientModel, geom: HypersurfaceGeometry, spec: CurvatureSpec,
             rhs_f: Optional[RhsField] = None,
             divergence_form: bool = True) -> LinearizedOperator:
    """Build the linearized operator at the given geometry.

    Raises AssemblyError if the coefficient tensor F^{ij} loses positivity
    (ellipticity) anywhere on the grid.
    """
    n = geom.grid.n
    kappa = geom.kappa
    if spec.epsilon > 0:
        kappa = kappa + spec.epsilon * kappa.sum(-1, keepdims=True)
    k = 1 if spec.kind == "mean" else (spec.k if spec.kind == "sympoly" else n)
    grad = _sym_poly_gradient(kappa, k) if spec.kind != "mean" else np.ones_like(kappa)
    if grad.min() <= 0.0:
        idx = np.unravel_index(int(np.argmin(grad.min(axis=-1))), geom.grid.shape)
        raise AssemblyError(f"ellipticity lost at grid index {idx}")

    a_ij = eval_F_ij(spec, geom)
    amb = riemann_at(model, geom.state.u, geom.coords)
    T = geom.tangents()
    r_nu_nu = np.einsum(
        "...abcd,...a,...ib,...c,...jd->...ij", amb.riemann, geom.nu, T, geom.nu, T
    )
    h_sq = np.einsum("...ik,...kl,...lj->...ij", geom.h, geom.g_inv, geom.h)
    pot = (a_ij * (h_sq + r_nu_nu)).sum(axis=(-1, -2))
    if rhs_f is not None:
        f_grad = rhs_f.grad(geom.state.u, geom.coords)
        pot = pot + np.einsum("...a,...a->...", f_grad, geom.nu)
    pot = model.sigma * pot
    return LinearizedOperator(
        grid=geom.grid,
        a_ij=a_ij,
        potential=pot,
        sqrt_g=geom.sqrt_g,
        divergence_form=divergence_form,
        geom=geom,
        potential_scale=max(1.0, float(np.abs(pot).max())),
    )


def _sym_apply_factory(op: LinearizedOperator):
    """Return the similarity-transformed action B = D^{1/2} A D^{-1/2}."""
    d_half = np.sqrt(op.sqrt_g).ravel()

    def B(z):
        return (op.apply((z / d_half).reshape(op.grid.shape)).ravel()) * d_half

    return B, d_half


def _nyquist_filter(grid):
    """Project out the per-axis Nyquist (sawtooth) bins of a grid field.

    Composed central first-derivative stencils annihilate the sawtooth
    mode, so the divergence-form operator carries a spurious near-null
    direction there; the physical ground state is smooth and unaffected.
    """
    N = grid.points_per_axis
    half = N // 2

    def apply(z):
        field = z.reshape(grid.shape)
        spec = np.fft.fftn(field)
        for ax in range(grid.n):
            sl = [slice(None)] * grid.n
            sl[ax] = half
            spec[tuple(sl)] = 0.0
        return np.real(np.fft.ifftn(spec)).ravel()

    return apply


def _norm_estimate(Bop, P, sweeps=30, seed=7):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(P)
    z /= np.linalg.norm(z)
    est = 0.0
    for _ in range(sweeps):
        w = Bop(z)
        est = np.linalg.norm(w)
        if est == 0.0:
            return 0.0
        z = w / est
    return est


def _cg(Bop, shift, b, tol=1e-13, max_iter=None):
    """Conjugate gradients for (B − shift·I) z = b with B symmetric, shifted SPD."""
    P = b.size
    if max_iter is None:
        max_iter = 20 * P
    z = np.zeros(P)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    b_norm = np.sqrt(float(b @ b)) + 1e-300
    for _ in range(max_iter):
        Ap = Bop(p) - shift * p
        alpha = rs / float(p @ Ap)
        z += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) < tol * b_norm:
            return z
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NumericalError("conjugate gradients failed to converge")


def first_eigenpair(op: LinearizedOperator, marginal_tol: Optional[float] = None,
                    heuristic: bool = False) -> StabilityReport:
    """Smallest eigenvalue and ground eigenfunction by shifted inverse iteration.

    Convergence is declared when successive Rayleigh quotients differ by
    less than 1e−12; a stall after 10⁴ sweeps raises NumericalError.
    """
    grid = op.grid
    P = grid.npoints
    Bop, d_half = _sym_apply_factory(op)
    if marginal_tol is None:
        marginal_tol = 1e-6 * op.potential_scale

    dense = heuristic or grid.n == 1
    Bmat = None
    if dense:
        A = op.as_dense()
        Bmat = (A * (1.0 / d_half)[None, :]) * d_half[:, None]
        if heuristic:
            # non-self-adjoint fallback: spectrum of the symmetric part only
            Bmat = 0.5 * (Bmat + Bmat.T)
        row_min = Bmat.diagonal() - (np.abs(Bmat).sum(axis=1) - np.abs(Bmat.diagonal()))
        shift = float(row_min.min()) - 1.0
        M = np.linalg.inv(Bmat - shift * np.eye(P))

        def solve(q):
            return M @ q
    else:
        norm_b = _norm_estimate(Bop, P)
        shift = -(norm_b + 1.0)

        def solve(q):
            return _cg(Bop, shift, q)

    rng = np.random.default_rng(11)
    smooth = _nyquist_filter(grid)
    z = smooth(np.ones(P) + 1e-3 * rng.standard_normal(P))
    z /= np.linalg.norm(z)
    lam_prev = np.inf
    lam = np.inf
    for sweep in range(MAX_SWEEPS):
        z_new = smooth(solve(z))
        z_new /= np.linalg.norm(z_new)
        Bz = Bmat @ z_new if dense else Bop(z_new)
        lam = float(z_new @ Bz)
        z = z_new
        if abs(lam - lam_prev) < RAYLEIGH_TOL * max(1.0, abs(lam)):
            break
        lam_prev = lam
    else:
        raise NumericalError(f"inverse iteration stalled after {MAX_SWEEPS} sweeps")

    eta = (z / d_half).reshape(grid.shape)
    measure = grid.period**grid.n / P
    norm = np.sqrt(float((op.sqrt_g * eta * eta).sum() * measure))
    eta = eta / norm
    if float((op.sqrt_g * eta).sum() * measure) < 0:
        eta = -eta
    positive = bool(eta.min() > 0.0)

    if lam > marginal_tol:
        verdict = "Stable"
    elif lam >= -marginal_tol:
        verdict = "Marginal"
    else:
        verdict = "Unstable"
    return StabilityReport(
        lambda1=lam,
        eta=eta,
        positive_eta=positive,
        verdict=verdict,
        marginal_tol=marginal_tol,
        heuristic=heuristic,
        detail=f"sweeps={sweep + 1}",
    )


def _class_d_qualifies(model: AmbientModel, spec: CurvatureSpec) -> bool:
    if spec.kind == "mean" or (spec.kind == "sympoly" and spec.k == 1):
        return True
    return model.constant_curvature is not None


def verify_limit_stability(flow_run: FlowRun, spec: CurvatureSpec,
                           rhs_f: Optional[RhsField] = None) -> StabilityReport:
    """Assemble at the terminal state of a converged run and eigensolve.

    Applicable only when the run converged, the velocity kept a weak sign,
    and the derivative tensor is divergence free on this model; otherwise a
    NotApplicable report is returned (degenerate flows that start at a
    stationary solution are also rejected).
    """
    model = flow_run.config.model
    not_applicable = None
    if flow_run.verdict != "Converged":
        not_applicable = f"run verdict is {flow_run.verdict}"
    else:
        sign = check_velocity_sign(flow_run)
        if not sign["preserved"]:
            not_applicable = "flow velocity did not keep a weak sign"
        elif flow_run.series["sup_velocity"][0] <= flow_run.config.convergence_tol:
            not_applicable = "initial hypersurface was already a stationary solution"
    if not _class_d_qualifies(model, spec) and not_applicable is None:
        not_applicable = "derivative tensor not divergence free on this model"
    if not_applicable is not None:
        return StabilityReport(
            lambda1=float("nan"),
            eta=np.array([]),
            positive_eta=False,
            verdict="NotApplicable",
            marginal_tol=0.0,
            detail=not_applicable,
        )
    _, terminal = flow_run.snapshots[-1]
    geom = compute_geometry(model, terminal)
    op = assemble(model, geom, spec, rhs_f)
    return first_eigenpair(op)


def curvature_minus_f(model: AmbientModel, state: GraphState, spec: CurvatureSpec,
                      rhs_f: Optional[RhsField] = None) -> np.ndarray:
    """The stationarity defect G(u) = F − f as a grid field."""
    geom = compute_geometry(model, state)
    F, _ = eval_F(spec, geom)
    if rhs_f is None:
        return F
    return F - rhs_f(state.u, geom.coords)


def linearization_fd_check(model: AmbientModel, state: GraphState,
                           spec: CurvatureSpec, rhs_f: Optional[RhsField],
                           directions, delta: float = 1e-5) -> list[float]:
    """Directional finite differences of G = F − f against the assembled operator.

    The graph is varied along the unit-normal gauge, u ± δ e^{−ψ} v φ, which
    reduces to a plain vertical variation exactly on normal Gaussian charts.
    The comparison uses the literal (non-divergence) operator expression,
    which agrees with the divergence form up to the class-(D) defect.
    Returns the relative max-norm error per direction.
    """
    geom = compute_geometry(model, state)
    op = assemble(model, geom, spec, rhs_f, divergence_form=False)
    lapse = np.exp(-geom.psi) * geom.v
    errors = []
    for phi in directions:
        up = GraphState(state.grid, state.u + delta * lapse * phi, state.t)
        dn = GraphState(state.grid, state.u - delta * lapse * phi, state.t)
        fd = (curvature_minus_f(model, up, spec, rhs_f)
              - curvature_minus_f(model, dn, spec, rhs_f)) / (2.0 * delta)
        lphi = op.apply(phi)
        scale = float(np.abs(lphi).max()) + 1e-300
        errors.append(float(np.abs(fd - lphi).max()) / scale)
    return errors


def foliate(model: AmbientModel, stationary: GraphState, spec: CurvatureSpec,
            rhs_f: Optional[RhsField], eps_values,
            stationarity_tol: float = 1e-6, newton_tol: float = 1e-10,
            max_newton: int = 30) -> dict:
    """Continue F − f = τ(ε) leaves off a stable stationary hypersurface.

    Strictly stable: Newton solves G(u_ε) = ε, so τ(ε) = ε.  Marginal:
    the bordered system (G(u) − τ, ∫η(u−u*)√g − ε) = 0 is solved for
    (u, τ).  Each leaf's Jacobian is built by central finite differences in
    the vertical variable; dense solves, intended for one spatial dimension
    or small grids.
    """
    grid = stationary.grid
    P = grid.npoints
    G0 = curvature_minus_f(model, stationary, spec, rhs_f)
    if float(np.abs(G0).max()) > stationarity_tol:
        raise FoliateError(
            f"base state is not stationary: max|F - f| = {np.abs(G0).max():.3e}"
        )
    geom0 = compute_geometry(model, stationary)
    op0 = assemble(model, geom0, spec, rhs_f)
    report = first_eigenpair(op0)
    if report.lambda1 < -report.marginal_tol:
        raise FoliateError(f"base state unstable (lambda1 = {report.lambda1:.3e})")
    marginal = report.verdict == "Marginal"
    eta = report.eta
    measure = grid.period**grid.n / P
    weights = (geom0.sqrt_g * eta).ravel() * measure

    def G_of(u_flat):
        st = GraphState(grid, u_flat.reshape(grid.shape), stationary.t)
        return curvature_minus_f(model, st, spec, rhs_f).ravel()

    def jacobian(u_flat, delta=1e-6):
        J = np.empty((P, P))
        for j in range(P):
            e = np.zeros(P)
            e[j] = delta
            J[:, j] = (G_of(u_flat + e) - G_of(u_flat - e)) / (2 * delta)
        return J

    from .errors import FlowlabError

    leaves = []
    last_good = 0.0
    u_base = stationary.u.ravel()
    for eps in eps_values:
        u = u_base.copy()
        tau = float(eps) if not marginal else 0.0
        converged = False
        for _ in range(max_newton):
            try:
                if marginal:
                    res_g = G_of(u) - tau
                    res_c = float(weights @ (u - u_base)) - eps
                    if max(np.abs(res_g).max(), abs(res_c)) < newton_tol:
                        converged = True
                        break
                    J = jacobian(u)
                    J_aug = np.zeros((P + 1, P + 1))
                    J_aug[:P, :P] = J
                    J_aug[:P, P] = -1.0
                    J_aug[P, :P] = weights
                    upd = np.linalg.solve(J_aug, np.concatenate([res_g, [res_c]]))
                    u = u - upd[:P]
                    tau = tau - upd[P]
                else:
                    res = G_of(u) - eps
                    if np.abs(res).max() < newton_tol:
                        converged = True
                        break
                    J = jacobian(u)
                    u = u - np.linalg.solve(J, res)
            except (FlowlabError, np.linalg.LinAlgError):
                break        # iterate left the chart or the solve failed
            if not np.isfinite(u).all():
                break
        if not converged:
            raise FoliateError(
                f"Newton continuation diverged at eps = {eps}", last_good_eps=last_good
            )
        tau_val = float(eps) if not marginal else tau
        leaves.append({
            "eps": float(eps),
            "u": u.reshape(grid.shape),
            "tau": tau_val,
        })
        last_good = float(eps)
    return {
        "leaves": leaves,
        "marginal": marginal,
        "lambda1": report.lambda1,
        "eta": eta,
    }
