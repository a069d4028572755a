"""Curvature functions F(κ), their reparametrizations and derivative tensors.

Supported functions of the principal curvatures κ = (κ_1..κ_n):

    mean      H   = κ_1 + ... + κ_n          cone: all of Rⁿ
    sympoly k H_k = σ_k(κ)                   cone: Γ_k = {σ_1>0, ..., σ_k>0}
    gauss     K   = κ_1 ··· κ_n              cone: Γ_+ = Γ_n

H_k is the raw elementary symmetric polynomial (no binomial normalization);
its degree of homogeneity is k.  The derivative tensor F^{ij} = ∂F/∂h_ij is
assembled in a g-orthonormal frame from the eigenvalue derivatives
∂σ_k/∂κ_a = σ_{k−1}(κ with κ_a removed) and mapped back, which keeps it
symmetric and, on the admissible cone, positive definite.

The ε-regularization replaces F(h) by F(h + εHg); its derivative tensor is
F^{ij}(shifted) + ε (F^{kl} g_kl) g^{ij}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import stencils
from .errors import AdmissibilityError, DomainError
from .hypersurface import HypersurfaceGeometry

__all__ = [
    "ConeSpec",
    "CurvatureSpec",
    "cone_contains",
    "elementary_symmetric",
    "phi_value",
    "eval_F",
    "eval_F_ij",
    "epsilon_regularize",
    "check_class_D",
]


@dataclass(frozen=True)
class ConeSpec:
    """Garding cone Γ_k; k = 0 is the full space, k = n the positive cone."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("cone level must be >= 0")


def elementary_symmetric(kappa: np.ndarray, k: int) -> np.ndarray:
    """σ_k of the rows of kappa (last axis lists the curvatures), n <= 3."""
    n = kappa.shape[-1]
    if k == 0:
        return np.ones(kappa.shape[:-1])
    if k > n:
        return np.zeros(kappa.shape[:-1])
    if k == 1:
        return kappa.sum(axis=-1)
    if k == 2:
        s1 = kappa.sum(axis=-1)
        return 0.5 * (s1 * s1 - (kappa * kappa).sum(axis=-1))
    if k == 3:
        return kappa[..., 0] * kappa[..., 1] * kappa[..., 2]
    raise ValueError("only n <= 3 supported")


def _sym_poly_gradient(kappa: np.ndarray, k: int) -> np.ndarray:
    """∂σ_k/∂κ_a = σ_{k−1}(κ with the a-th entry removed), shape like kappa."""
    n = kappa.shape[-1]
    out = np.empty_like(kappa)
    for a in range(n):
        rest = np.delete(kappa, a, axis=-1)
        out[..., a] = elementary_symmetric(rest, k - 1)
    return out


def cone_contains(kappa: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Pointwise strict membership κ ∈ Γ_k (open cone)."""
    ok = np.ones(kappa.shape[:-1], dtype=bool)
    for j in range(1, cone.k + 1):
        ok &= elementary_symmetric(kappa, j) > 0.0
    return ok


_PHI_NAMES = ("identity", "log", "power", "neg_inv_power", "neg_inverse")


@dataclass(frozen=True)
class CurvatureSpec:
    """Choice of F, its reparametrization Φ, and the regularization level."""

    kind: str = "mean"          # mean | sympoly | gauss
    k: int = 1                  # order of the symmetric polynomial
    phi: str = "identity"       # identity | log | power | neg_inv_power | neg_inverse
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("mean", "sympoly", "gauss"):
            raise ValueError(f"unknown curvature kind '{self.kind}'")
        if self.phi not in _PHI_NAMES:
            raise ValueError(f"unknown reparametrization '{self.phi}'")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.kind == "sympoly" and self.k < 1:
            raise ValueError("sympoly order must be >= 1")

    def degree(self, n: int) -> int:
        if self.kind == "mean":
            return 1
        if self.kind == "sympoly":
            return self.k
        return n

    def cone(self, n: int) -> ConeSpec:
        if self.kind == "mean":
            return ConeSpec(0)
        if self.kind == "sympoly":
            return ConeSpec(self.k)
        return ConeSpec(n)

    def needs_positive_F(self) -> bool:
        return self.phi != "identity"


def phi_value(r: np.ndarray, phi: str, degree: int):
    """Φ(r), Φ̇(r), Φ̈(r) for the supported reparametrizations."""
    r = np.asarray(r, dtype=float)
    if phi == "identity":
        return r, np.ones_like(r), np.zeros_like(r)
    if phi == "log":
        return np.log(r), 1.0 / r, -1.0 / r**2
    p = 1.0 / degree
    if phi == "power":
        val = r**p
        return val, p * r ** (p - 1.0), p * (p - 1.0) * r ** (p - 2.0)
    if phi == "neg_inv_power":
        return -(r ** (-p)), p * r ** (-p - 1.0), -p * (p + 1.0) * r ** (-p - 2.0)
    if phi == "neg_inverse":
        return -1.0 / r, 1.0 / r**2, -2.0 / r**3
    raise ValueError(phi)


def _kappa_eff(spec: CurvatureSpec, geom: HypersurfaceGeometry):
    kappa = geom.kappa
    if spec.epsilon > 0.0:
        kappa = kappa + spec.epsilon * kappa.sum(axis=-1, keepdims=True)
    return kappa


def _sigma_value(kind: str, k: int, kappa: np.ndarray, n: int) -> np.ndarray:
    if kind == "mean":
        return kappa.sum(axis=-1)
    if kind == "sympoly":
        return elementary_symmetric(kappa, k)
    return elementary_symmetric(kappa, n)


def _check_cone(spec: CurvatureSpec, kappa: np.ndarray, n: int):
    cone = spec.cone(n)
    if cone.k == 0:
        return
    ok = cone_contains(kappa, cone)
    if not ok.all():
        idx = np.unravel_index(int(np.argmin(ok)), ok.shape)
        raise AdmissibilityError(
            f"principal curvatures left the cone Gamma_{cone.k} at grid index {idx}",
            point=idx,
        )


def eval_F(spec: CurvatureSpec, geom: HypersurfaceGeometry):
    """Pointwise F(κ) and Φ(F); raises on cone exit or invalid Φ domain."""
    n = geom.grid.n
    kappa = _kappa_eff(spec, geom)
    _check_cone(spec, kappa, n)
    F = _sigma_value(spec.kind, spec.k, kappa, n)
    if spec.needs_positive_F() and F.min() <= 0.0:
        idx = np.unravel_index(int(np.argmin(F)), F.shape)
        raise DomainError(
            f"F = {F.min():.6g} <= 0 at grid index {idx}; '{spec.phi}' needs F > 0"
        )
    phi_F, _, _ = phi_value(F, spec.phi, spec.degree(n))
    return F, phi_F


def eval_F_ij(spec: CurvatureSpec, geom: HypersurfaceGeometry) -> np.ndarray:
    """Derivative tensor F^{ij} = ∂F/∂h_ij (contravariant), shape (*grid, n, n).

    mean:      F^{ij} = g^{ij}
    sympoly 2: F^{ij} = H g^{ij} − h^{ij}
    general:   eigenframe assembly of ∂σ_k/∂κ_a
    """
    n = geom.grid.n
    kappa = _kappa_eff(spec, geom)
    _check_cone(spec, kappa, n)

    if spec.kind == "mean" and spec.epsilon == 0.0:
        return geom.g_inv.copy()

    if spec.kind == "sympoly":
        grad = _sym_poly_gradient(kappa, spec.k)
    elif spec.kind == "mean":
        grad = np.ones_like(kappa)
    else:
        grad = _sym_poly_gradient(kappa, n)

    w = np.einsum("...ij,...ja->...ia", geom.frame_sqrt_inv, geom.frame_vecs)
    F_ij = np.einsum("...a,...ia,...ja->...ij", grad, w, w)
    if spec.epsilon > 0.0:
        trace_part = grad.sum(axis=-1)
        F_ij = F_ij + spec.epsilon * trace_part[..., None, None] * geom.g_inv
    return F_ij


def F_hessian_quadratic(spec: CurvatureSpec, geom: HypersurfaceGeometry,
                        direction: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Diagnostic second derivative d²/ds² F(h + s·direction)|₀ by central differences."""
    n = geom.grid.n

    def F_of_shift(s):
        h_s = geom.h + s * direction
        a = np.einsum("...ik,...kl,...lj->...ij", geom.frame_sqrt_inv, h_s,
                      geom.frame_sqrt_inv)
        kap = np.linalg.eigvalsh(a)
        if spec.epsilon > 0.0:
            kap = kap + spec.epsilon * kap.sum(axis=-1, keepdims=True)
        return _sigma_value(spec.kind, spec.k, kap, n)

    s = step
    return (F_of_shift(s) - 2.0 * F_of_shift(0.0) + F_of_shift(-s)) / (s * s)


def epsilon_regularize(spec: CurvatureSpec, geom: HypersurfaceGeometry, eps: float):
    """Shifted evaluation F(h + εHg) together with its derivative tensor.

    Returns a dict with the shifted principal curvatures, F̃, Φ(F̃), F̃^{ij},
    and the max mismatch between the closed-form F̃^{ij} and a central
    finite difference of the shifted evaluation on a point subsample.
    """
    if eps < 0:
        raise ValueError("epsilon must be >= 0")
    shifted = CurvatureSpec(kind=spec.kind, k=spec.k, phi=spec.phi, epsilon=eps)
    n = geom.grid.n
    kappa_t = _kappa_eff(shifted, geom)
    _check_cone(shifted, kappa_t, n)
    F, phi_F = eval_F(shifted, geom)
    F_ij = eval_F_ij(shifted, geom)

    # finite-difference verification of ∂F̃/∂h_ij on a light subsample
    flat_idx = np.unravel_index(
        np.linspace(0, geom.kappa[..., 0].size - 1, 8).astype(int), geom.grid.shape
    )
    resid = 0.0
    delta = 1e-6 * (1.0 + float(np.abs(geom.h).max()))
    for p in zip(*flat_idx):
        h_p = geom.h[p]
        S = geom.frame_sqrt_inv[p]
        fd = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                pert = np.zeros((n, n))
                pert[i, j] += 0.5 * delta
                pert[j, i] += 0.5 * delta

                def val(hm):
                    kap = np.linalg.eigvalsh(S @ hm @ S)
                    kap = kap + eps * kap.sum()
                    return float(_sigma_value(spec.kind, spec.k, kap[None, :], n)[0])

                fd[i, j] = (val(h_p + pert) - val(h_p - pert)) / (2.0 * delta)
        # symmetric perturbations: the FD picks up each off-diagonal once
        resid = max(resid, float(np.abs(fd - F_ij[p]).max()))
    return {
        "kappa_tilde": kappa_t,
        "F": F,
        "phi_F": phi_F,
        "F_ij": F_ij,
        "derivative_identity_residual": resid,
    }


def check_class_D(spec: CurvatureSpec, model, geom: HypersurfaceGeometry) -> dict:
    """Covariant divergence ‖∇_j F^{ij}‖_max with respect to the induced metric.

    On space forms the symmetric polynomials have divergence-free derivative
    tensors (Einstein ambient suffices for k = 2); other models just get the
    raw residual with no pass/fail claim.
    """
    grid = geom.grid
    n, dx = grid.n, grid.spacing
    F_ij = eval_F_ij(spec, geom)
    dF = np.stack([stencils.d1(F_ij, dx, ax) for ax in range(n)], axis=n)
    gi = geom.gamma_induced
    div = (
        np.einsum("...jij->...i", dF)
        + np.einsum("...ijm,...jm->...i", gi, F_ij)
        + np.einsum("...jjm,...mi->...i", gi, F_ij)
    )
    qualifies = model.constant_curvature is not None or (
        spec.kind == "mean" or (spec.kind == "sympoly" and spec.k == 1)
    )
    return {
        "residual": float(np.abs(div).max()),
        "divergence": div,
        "qualifies": qualifies,
    }
