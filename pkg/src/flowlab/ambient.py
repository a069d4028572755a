"""Warped-product ambient spacetimes in a global Gaussian chart.

Every model describes a semi-Riemannian metric

    ds² = e^{2ψ(x⁰,x)} { σ (dx⁰)² + σ_ij(x⁰,x) dx^i dx^j },    σ = ±1,

on a slab I × Tⁿ over the flat spatial torus.  ψ, σ_ij and the derivatives
needed by the Levi-Civita connection are supplied in closed form per model,
so that curvature-identity residuals downstream isolate the hypersurface
discretization, never the ambient one.

Christoffel symbols follow from the conformal split ḡ = e^{2ψ} G with
G = diag(σ, σ_ij):

    Γ̄⁰₀₀ = ψ₀              Γ̄⁰₀ᵢ = ψᵢ
    Γ̄⁰ᵢⱼ = −σ(½ ∂₀σ_ij + ψ₀ σ_ij)
    Γ̄ᵏ₀₀ = −σ σ^{km} ψ_m    Γ̄ᵏ₀ⱼ = ½ σ^{km} ∂₀σ_mj + ψ₀ δᵏⱼ
    Γ̄ᵏᵢⱼ = Γ[σ]ᵏᵢⱼ + δᵏᵢ ψⱼ + δᵏⱼ ψᵢ − σ^{km} ψ_m σ_ij

The Riemann tensor is obtained from one 4th-order finite-difference layer
over the closed-form Christoffels (or from the space-form expression when
the model declares constant curvature).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import AmbientDomainError

__all__ = [
    "Signature",
    "ARWProfile",
    "AmbientModel",
    "CurvatureTensors",
    "metric_at",
    "christoffel_at",
    "riemann_at",
    "ricci_at",
    "convex_chi",
    "minkowski",
    "de_sitter_conformal",
    "robertson_walker",
    "arw_power",
    "warped_riemannian",
    "cosh_de_sitter_like",
    "non_einstein_wiggle",
    "convexity_demo",
]


@dataclass(frozen=True)
class Signature:
    """Sign σ = ⟨ν,ν⟩ of the hypersurface normal: −1 Lorentzian, +1 Riemannian."""

    sigma: int

    def __post_init__(self):
        if self.sigma * self.sigma != 1:
            raise ValueError("signature must be +1 or -1")


@dataclass(frozen=True)
class ARWProfile:
    """Warp-function bookkeeping for big-crunch models.

    The profile records ω with n+ω−2 > 0, the derived exponents
    γ̃ = (n+ω−2)/2 and γ = γ̃/n, and the limit mass m of |f′|² e^{2γ̃ f}
    as the singularity τ → 0⁻ is approached.
    """

    omega: float
    gamma_tilde: float
    gamma: float
    mass: float
    f: Callable[[np.ndarray], np.ndarray]
    fp: Callable[[np.ndarray], np.ndarray]
    fpp: Callable[[np.ndarray], np.ndarray]

    def mass_indicator(self, tau):
        """|f′(τ)|² e^{2γ̃ f(τ)}; tends to the mass as τ → 0⁻."""
        tau = np.asarray(tau, dtype=float)
        return self.fp(tau) ** 2 * np.exp(2.0 * self.gamma_tilde * self.f(tau))


@dataclass
class AmbientModel:
    """Closed-form warped-product metric with its first derivatives.

    Field callables are vectorized: they accept ``t0`` of shape S and ``x``
    of shape S+(n,) and return S (psi), S+(n+1,) (dpsi), S+(n,n) (sigma_ij)
    and S+(n+1,n,n) (dsigma, chart derivatives ordered ∂₀, ∂₁, ..., ∂_n).
    """

    label: str
    signature: Signature
    n: int
    time_range: tuple[float, float]
    psi: Callable
    dpsi: Callable
    sigma_ij: Callable
    dsigma: Callable
    constant_curvature: Optional[float] = None
    arw: Optional[ARWProfile] = None
    # split ψ = f(x⁰) + ψ̂(x⁰,x) for big-crunch models; psi_hat returns
    # (value, chart gradient) and defaults to the zero field
    psi_hat: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    @property
    def sigma(self) -> int:
        return self.signature.sigma

    def check_domain(self, t0):
        t0 = np.asarray(t0)
        a, b = self.time_range
        if np.any(t0 <= a) or np.any(t0 >= b):
            raise AmbientDomainError(
                f"x0 outside chart range ({a}, {b}) of model '{self.label}': "
                f"min={t0.min():.6g}, max={t0.max():.6g}"
            )


@dataclass
class CurvatureTensors:
    """Pointwise connection and curvature data, indices 0..n."""

    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray


def _inv_small(a: np.ndarray) -> np.ndarray:
    """Batched inverse of symmetric (..., n, n) with closed forms for n <= 2."""
    n = a.shape[-1]
    if n == 1:
        return 1.0 / a
    if n == 2:
        det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
        out = np.empty_like(a)
        out[..., 0, 0] = a[..., 1, 1]
        out[..., 1, 1] = a[..., 0, 0]
        out[..., 0, 1] = -a[..., 0, 1]
        out[..., 1, 0] = -a[..., 1, 0]
        return out / det[..., None, None]
    return np.linalg.inv(a)


def metric_at(model: AmbientModel, t0, x):
    """Metric components ḡ_αβ and inverse ḡ^αβ at chart points."""
    model.check_domain(t0)
    t0 = np.asarray(t0, dtype=float)
    x = np.asarray(x, dtype=float)
    n = model.n
    sig = model.sigma
    conf = np.exp(2.0 * model.psi(t0, x))
    sij = model.sigma_ij(t0, x)
    g = np.zeros(t0.shape + (n + 1, n + 1))
    g[..., 0, 0] = sig * conf
    g[..., 1:, 1:] = conf[..., None, None] * sij
    g_inv = np.zeros_like(g)
    g_inv[..., 0, 0] = sig / conf
    g_inv[..., 1:, 1:] = _inv_small(sij) / conf[..., None, None]
    return g, g_inv


def christoffel_row0(model: AmbientModel, t0, x, sij=None, dpsi=None) -> np.ndarray:
    """Only the Γ̄⁰_αβ block, shape S+(n+1, n+1); the flow hot path needs no more."""
    model.check_domain(t0)
    t0 = np.asarray(t0, dtype=float)
    x = np.asarray(x, dtype=float)
    n = model.n
    sig = model.sigma
    if dpsi is None:
        dpsi = model.dpsi(t0, x)
    if sij is None:
        sij = model.sigma_ij(t0, x)
    dt_sig = model.dsigma(t0, x)[..., 0, :, :]
    out = np.empty(t0.shape + (n + 1, n + 1))
    out[..., 0, 0] = dpsi[..., 0]
    out[..., 0, 1:] = dpsi[..., 1:]
    out[..., 1:, 0] = dpsi[..., 1:]
    out[..., 1:, 1:] = -sig * (0.5 * dt_sig + dpsi[..., 0][..., None, None] * sij)
    return out


def christoffel_at(model: AmbientModel, t0, x) -> np.ndarray:
    """Closed-form Γ̄^α_{βγ}, shape S+(n+1,n+1,n+1)."""
    model.check_domain(t0)
    t0 = np.asarray(t0, dtype=float)
    x = np.asarray(x, dtype=float)
    n = model.n
    sig = model.sigma
    dpsi = model.dpsi(t0, x)                       # (..., n+1)
    sij = model.sigma_ij(t0, x)                    # (..., n, n)
    dsig = model.dsigma(t0, x)                     # (..., n+1, n, n)
    sij_inv = _inv_small(sij)
    psi0 = dpsi[..., 0]
    psix = dpsi[..., 1:]
    dt_sig = dsig[..., 0, :, :]
    dx_sig = dsig[..., 1:, :, :]                   # (..., k, i, j) = ∂_k σ_ij

    gam = np.zeros(t0.shape + (n + 1, n + 1, n + 1))
    gam[..., 0, 0, 0] = psi0
    gam[..., 0, 0, 1:] = psix
    gam[..., 0, 1:, 0] = psix
    gam[..., 0, 1:, 1:] = -sig * (0.5 * dt_sig + psi0[..., None, None] * sij)
    psi_up = np.einsum("...km,...m->...k", sij_inv, psix)
    gam[..., 1:, 0, 0] = -sig * psi_up
    mixed = 0.5 * np.einsum("...km,...mj->...kj", sij_inv, dt_sig)
    mixed = mixed + psi0[..., None, None] * np.eye(n)
    gam[..., 1:, 0, 1:] = mixed
    gam[..., 1:, 1:, 0] = mixed
    # Γ[σ]^k_ij = ½ σ^{km} (∂_i σ_mj + ∂_j σ_mi − ∂_m σ_ij), then conformal terms
    d_i_mj = np.swapaxes(dx_sig, -3, -2)            # (..., m, i, j) = ∂_i σ_mj
    d_j_mi = np.swapaxes(d_i_mj, -2, -1)            # (..., m, i, j) = ∂_j σ_mi
    spatial = 0.5 * np.einsum("...km,...mij->...kij", sij_inv, d_i_mj + d_j_mi - dx_sig)
    eye = np.eye(n)
    spatial = (
        spatial
        + np.einsum("ki,...j->...kij", eye, psix)
        + np.einsum("kj,...i->...kij", eye, psix)
        - np.einsum("...k,...ij->...kij", psi_up, sij)
    )
    gam[..., 1:, 1:, 1:] = spatial
    return gam


def _christoffel_fd_step(model: AmbientModel) -> float:
    return model.params.get("riemann_fd_step", 1e-3)


def riemann_at(model: AmbientModel, t0, x, force_fd: bool = False) -> CurvatureTensors:
    """Connection plus curvature tensors R̄_αβγδ and R̄_αβ at chart points.

    Space-form models use R̄_αβγδ = K (ḡ_αγ ḡ_βδ − ḡ_αδ ḡ_βγ) unless
    ``force_fd`` demands the finite-difference route.
    """
    model.check_domain(t0)
    t0 = np.asarray(t0, dtype=float)
    x = np.asarray(x, dtype=float)
    n = model.n
    gam = christoffel_at(model, t0, x)
    g, g_inv = metric_at(model, t0, x)

    if model.constant_curvature is not None and not force_fd:
        K = model.constant_curvature
        riem = K * (
            np.einsum("...ac,...bd->...abcd", g, g)
            - np.einsum("...ad,...bc->...abcd", g, g)
        )
    else:
        h = _christoffel_fd_step(model)
        dgam = np.zeros(t0.shape + (n + 1, n + 1, n + 1, n + 1))

        def gam_shift(mu, step):
            if mu == 0:
                return christoffel_at(model, t0 + step, x)
            shift = np.zeros(n)
            shift[mu - 1] = step
            return christoffel_at(model, t0, x + shift)

        for mu in range(n + 1):
            dgam[..., mu, :, :, :] = (
                -gam_shift(mu, 2 * h)
                + 8.0 * gam_shift(mu, h)
                - 8.0 * gam_shift(mu, -h)
                + gam_shift(mu, -2 * h)
            ) / (12.0 * h)
        # R^α_{βγδ} = ∂_γ Γ^α_{δβ} − ∂_δ Γ^α_{γβ} + Γ^α_{γε}Γ^ε_{δβ} − Γ^α_{δε}Γ^ε_{γβ}
        riem_ud = (
            np.einsum("...cadb->...abcd", dgam)
            - np.einsum("...dacb->...abcd", dgam)
            + np.einsum("...ace,...edb->...abcd", gam, gam)
            - np.einsum("...ade,...ecb->...abcd", gam, gam)
        )
        riem = np.einsum("...ae,...ebcd->...abcd", g, riem_ud)

    ricci = np.einsum("...ac,...abcd->...bd", g_inv, riem)
    return CurvatureTensors(christoffel=gam, riemann=riem, ricci=ricci)


def ricci_at(model: AmbientModel, t0, x) -> np.ndarray:
    return riemann_at(model, t0, x).ricci


def convex_chi(model: AmbientModel, t0_samples, x_samples, lam: float):
    """Best constant c with Hess(e^{λ x⁰}) ⪰ c ḡ over a sampled compact region.

    Uses χ = e^{λ x⁰} and its covariant Hessian
    χ_αβ = e^{λx⁰}(λ² t_α t_β + λ t_αβ) with t_αβ = −Γ̄⁰_αβ.  The constant
    is the largest c for which χ_αβ − c ḡ_αβ stays positive semidefinite at
    every sample (a concave generalized-eigenvalue feasibility problem);
    the region admits a strictly convex function iff c > 0.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    t0 = np.asarray(t0_samples, dtype=float).ravel()
    xs = np.asarray(x_samples, dtype=float).reshape(t0.size, model.n)
    gam = christoffel_at(model, t0, xs)
    g, _ = metric_at(model, t0, xs)
    n1 = model.n + 1

    t_a = np.zeros((t0.size, n1))
    t_a[:, 0] = 1.0
    t_ab = -gam[:, 0, :, :]
    conf = np.exp(lam * t0)[:, None, None]
    chi = conf * (lam * lam * np.einsum("pa,pb->pab", t_a, t_a) + lam * t_ab)

    # frame that normalizes the metric: E^T ḡ E = J = diag(±1)
    w, V = np.linalg.eigh(g)
    E = V / np.sqrt(np.abs(w))[:, None, :]
    J = np.sign(w)                                   # (P, n+1) diagonal entries
    A = np.einsum("pia,pij,pjb->pab", E, chi, E)

    def margin(c):
        shifted = A - c * J[:, :, None] * np.eye(n1)
        return np.linalg.eigvalsh(shifted)[:, 0].min()

    if model.sigma > 0:
        best = float(np.linalg.eigvalsh(A)[:, 0].min())
        return best > 0.0, best

    scale = float(np.abs(A).max()) + 1.0
    lo, hi = -10.0 * scale, 10.0 * scale
    # locate the concave peak of c ↦ min eig margin by golden section
    phi_g = (np.sqrt(5.0) - 1.0) / 2.0
    a_c, b_c = lo, hi
    c1 = b_c - phi_g * (b_c - a_c)
    c2 = a_c + phi_g * (b_c - a_c)
    f1, f2 = margin(c1), margin(c2)
    for _ in range(80):
        if f1 < f2:
            a_c, c1, f1 = c1, c2, f2
            c2 = a_c + phi_g * (b_c - a_c)
            f2 = margin(c2)
        else:
            b_c, c2, f2 = c2, c1, f1
            c1 = b_c - phi_g * (b_c - a_c)
            f1 = margin(c1)
    c_peak = 0.5 * (a_c + b_c)
    f_peak = margin(c_peak)
    if f_peak < 0.0:
        return False, f_peak
    # largest feasible c: bisect the right-hand root of the concave margin
    lo_r, hi_r = c_peak, 10.0 * scale
    for _ in range(100):
        mid = 0.5 * (lo_r + hi_r)
        if margin(mid) >= 0.0:
            lo_r = mid
        else:
            hi_r = mid
    best = lo_r
    return best > 0.0, float(best)


# ---------------------------------------------------------------------------
# model bank


def _zero_psi(t0, x):
    return np.zeros(np.shape(t0))


def _zero_dpsi_factory(n):
    def dpsi(t0, x):
        return np.zeros(np.shape(t0) + (n + 1,))

    return dpsi


def _flat_sigma_factory(n):
    eye = np.eye(n)

    def sigma_ij(t0, x):
        return np.broadcast_to(eye, np.shape(t0) + (n, n)).copy()

    def dsigma(t0, x):
        return np.zeros(np.shape(t0) + (n + 1, n, n))

    return sigma_ij, dsigma


def minkowski(n: int = 2) -> AmbientModel:
    """Flat Lorentzian slab over the torus."""
    sigma_ij, dsigma = _flat_sigma_factory(n)
    return AmbientModel(
        label="minkowski",
        signature=Signature(-1),
        n=n,
        time_range=(-1e6, 1e6),
        psi=_zero_psi,
        dpsi=_zero_dpsi_factory(n),
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        constant_curvature=0.0,
    )


def de_sitter_conformal(n: int = 2, time_range=(0.2, 5.0)) -> AmbientModel:
    """Constant-curvature K=+1 slab in a conformally flat chart.

    The chart e^ψ = 1/x⁰ on x⁰ > 0 is the contracting patch: coordinate
    slices have principal curvatures +1 with respect to the past-directed
    normal, hence they are strictly convex and admissible for every Γ_k.
    """
    if time_range[0] <= 0:
        raise ValueError("chart requires x0 > 0")
    sigma_ij, dsigma = _flat_sigma_factory(n)

    def psi(t0, x):
        return -np.log(np.asarray(t0, dtype=float))

    def dpsi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1,))
        out[..., 0] = -1.0 / t0
        return out

    return AmbientModel(
        label="de_sitter_conformal",
        signature=Signature(-1),
        n=n,
        time_range=time_range,
        psi=psi,
        dpsi=dpsi,
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        constant_curvature=1.0,
    )


def _power_warp(c0: float, gamma_tilde: float, b: float = 0.0, p: float = 3.0):
    """Warp family e^{γ̃ f(τ)} = c₀^γ̃ (−τ)(1 + b(−τ)^p) on τ < 0.

    b = 0 is the pure power law e^f = c₀(−τ)^{1/γ̃}.  A small b ≠ 0 adds a
    subleading correction that keeps all big-crunch asymptotics intact
    while making the crunch-to-bang transition exactly C³ when p = 3.
    """

    gt = gamma_tilde

    def f(tau):
        tau = np.asarray(tau, dtype=float)
        m = -tau
        return np.log(c0) + (np.log(m) + np.log1p(b * m**p)) / gt

    def fp(tau):
        tau = np.asarray(tau, dtype=float)
        m = -tau
        return (1.0 / tau - b * p * m ** (p - 1.0) / (1.0 + b * m**p)) / gt

    def fpp(tau):
        tau = np.asarray(tau, dtype=float)
        m = -tau
        B = 1.0 + b * m**p
        corr = b * p * ((p - 1.0) * m ** (p - 2.0) * B - b * p * m ** (2.0 * p - 2.0)) / (B * B)
        return (-1.0 / tau**2 + corr) / gt

    return f, fp, fpp


def robertson_walker(n: int = 2, c0: float = 1.0, power: float = 1.0,
                     time_range=(-10.0, -1e-4)) -> AmbientModel:
    """Homogeneous big-crunch model e^ψ = c₀(−x⁰)^power over the flat torus."""
    sigma_ij, dsigma = _flat_sigma_factory(n)
    gt = 1.0 / power
    f, fp, _ = _power_warp(c0, gt)

    def psi(t0, x):
        return f(np.asarray(t0, dtype=float))

    def dpsi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1,))
        out[..., 0] = fp(t0)
        return out

    return AmbientModel(
        label="robertson_walker",
        signature=Signature(-1),
        n=n,
        time_range=time_range,
        psi=psi,
        dpsi=dpsi,
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        params={"c0": c0, "power": power},
    )


def arw_power(n: int = 2, omega: float = 2.0, c0: float = 1.0,
              mass: Optional[float] = None,
              perturbation_eps: float = 0.0,
              perturbation_wavevector=None,
              period: float = 1.0,
              warp_correction: float = 0.0,
              warp_correction_power: float = 3.0,
              time_range=(-2.0, -1e-6)) -> AmbientModel:
    """Big-crunch power-law model with the asymptotic split ψ = f(x⁰) + ψ̂.

    e^{γ̃ f} = c₀^γ̃ (−x⁰)(1 + b(−x⁰)^p) with γ̃ = (n+ω−2)/2 > 0; the limit
    mass is m = c₀^{2γ̃}/γ̃².  The optional perturbation ψ̂ = ε(−x⁰) q(x)
    with q a torus harmonic decays at the singularity.
    """
    gt = 0.5 * (n + omega - 2.0)
    if gt <= 0:
        raise ValueError("need n + omega - 2 > 0")
    if mass is not None:
        c0 = float((mass * gt * gt) ** (1.0 / (2.0 * gt)))
    m_val = c0 ** (2.0 * gt) / gt**2
    b = warp_correction
    p = warp_correction_power
    f, fp, fpp = _power_warp(c0, gt, b, p)

    eps = perturbation_eps
    kvec = np.zeros(n)
    if perturbation_wavevector is not None:
        kvec = np.asarray(perturbation_wavevector, dtype=float)
    elif eps != 0.0:
        kvec = np.zeros(n)
        kvec[0] = 1.0
    two_pi_over_L = 2.0 * np.pi / period

    def q_of(x):
        phase = two_pi_over_L * np.einsum("...k,k->...", x, kvec)
        return np.cos(phase)

    def dq_of(x):
        phase = two_pi_over_L * np.einsum("...k,k->...", x, kvec)
        return -np.sin(phase)[..., None] * (two_pi_over_L * kvec)

    def psi_hat(t0, x):
        t0 = np.asarray(t0, dtype=float)
        if eps == 0.0:
            z = np.zeros(t0.shape)
            return z, np.zeros(t0.shape + (n + 1,))
        val = eps * (-t0) * q_of(x)
        grad = np.zeros(t0.shape + (n + 1,))
        grad[..., 0] = -eps * q_of(x)
        grad[..., 1:] = eps * (-t0)[..., None] * dq_of(x)
        return val, grad

    def psi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        return f(t0) + psi_hat(t0, x)[0]

    def dpsi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = psi_hat(t0, x)[1].copy()
        out[..., 0] += fp(t0)
        return out

    sigma_ij, dsigma = _flat_sigma_factory(n)
    profile = ARWProfile(
        omega=omega, gamma_tilde=gt, gamma=gt / n, mass=m_val, f=f, fp=fp, fpp=fpp
    )
    return AmbientModel(
        label="arw_power",
        signature=Signature(-1),
        n=n,
        time_range=time_range,
        psi=psi,
        dpsi=dpsi,
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        arw=profile,
        psi_hat=psi_hat,
        params={
            "c0": c0,
            "omega": omega,
            "perturbation_eps": eps,
            "period": period,
            "warp_correction": b,
            "warp_correction_power": p,
        },
    )


def warped_riemannian(n: int = 2, rate: float = 0.3) -> AmbientModel:
    """Riemannian warped product e^{2ψ}((dx⁰)² + δ_ij dx^i dx^j), ψ = rate·x⁰."""
    sigma_ij, dsigma = _flat_sigma_factory(n)

    def psi(t0, x):
        return rate * np.asarray(t0, dtype=float)

    def dpsi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1,))
        out[..., 0] = rate
        return out

    return AmbientModel(
        label="warped_riemannian",
        signature=Signature(+1),
        n=n,
        time_range=(-1e6, 1e6),
        psi=psi,
        dpsi=dpsi,
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        params={"rate": rate},
    )


def cosh_de_sitter_like(n: int = 2, time_range=(-1.5, 1.5)) -> AmbientModel:
    """ds² = −(dx⁰)² + cosh²(x⁰) δ_ij dx^i dx^j over the torus.

    The x⁰ = 0 slice is totally geodesic and R̄_αβ ν^α ν^β = −n there, the
    two ingredients of the de Sitter maximal-slice instability; torus
    topology rules out realizing that slice inside a true space form.
    """

    def psi(t0, x):
        return np.zeros(np.shape(t0))

    def sigma_ij(t0, x):
        t0 = np.asarray(t0, dtype=float)
        return np.cosh(t0)[..., None, None] ** 2 * np.eye(n)

    def dsigma(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1, n, n))
        out[..., 0, :, :] = (2.0 * np.cosh(t0) * np.sinh(t0))[..., None, None] * np.eye(n)
        return out

    return AmbientModel(
        label="custom",
        signature=Signature(-1),
        n=n,
        time_range=time_range,
        psi=psi,
        dpsi=_zero_dpsi_factory(n),
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        params={"variant": "cosh_de_sitter_like"},
    )


def non_einstein_wiggle(n: int = 2, period: float = 1.0, eps: float = 0.3,
                        time_range=(-3.0, 3.0)) -> AmbientModel:
    """Contracting model with a space-dependent contraction rate; not Einstein.

    σ_ij = e^{−2x⁰(1+ε sin(2πx¹/L))} δ_ij mixes time and space derivatives,
    so R̄_αβ ν^α x_i^β ≠ 0 while the coordinate slices remain umbilic with
    κ̄_i = 1 + ε sin(2πx¹/L) > 0, hence Γ_k-admissible.  Divergence-free
    checks for the symmetric polynomials must stall on this model.
    """
    if not (0 <= eps < 1):
        raise ValueError("eps must stay below 1 for a contracting model")
    k = 2.0 * np.pi / period

    def rate(x):
        return 1.0 + eps * np.sin(k * np.asarray(x, dtype=float)[..., 0])

    def drate(x):
        return eps * k * np.cos(k * np.asarray(x, dtype=float)[..., 0])

    def sigma_ij(t0, x):
        t0 = np.asarray(t0, dtype=float)
        return np.exp(-2.0 * t0 * rate(x))[..., None, None] * np.eye(n)

    def dsigma(t0, x):
        t0 = np.asarray(t0, dtype=float)
        conf = np.exp(-2.0 * t0 * rate(x))
        out = np.zeros(t0.shape + (n + 1, n, n))
        out[..., 0, :, :] = (-2.0 * rate(x) * conf)[..., None, None] * np.eye(n)
        out[..., 1, :, :] = (-2.0 * t0 * drate(x) * conf)[..., None, None] * np.eye(n)
        return out

    return AmbientModel(
        label="custom",
        signature=Signature(-1),
        n=n,
        time_range=time_range,
        psi=_zero_psi,
        dpsi=_zero_dpsi_factory(n),
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        params={"variant": "non_einstein_wiggle", "period": period, "eps": eps},
    )


def convexity_demo(n: int = 2, a: float = 1.0, b: float = 1.5) -> AmbientModel:
    """Expanding conformal factor over contracting slices: ψ = a·x⁰, σ_ij = e^{−2b x⁰}δ.

    For b > a the coordinate slices are strictly convex, yet e^{λx⁰} is
    convex only once λ exceeds roughly 2a − b: the λ² term must beat the
    negative time-time Hessian component.
    """

    def psi(t0, x):
        return a * np.asarray(t0, dtype=float)

    def dpsi(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1,))
        out[..., 0] = a
        return out

    def sigma_ij(t0, x):
        t0 = np.asarray(t0, dtype=float)
        return np.exp(-2.0 * b * t0)[..., None, None] * np.eye(n)

    def dsigma(t0, x):
        t0 = np.asarray(t0, dtype=float)
        out = np.zeros(t0.shape + (n + 1, n, n))
        out[..., 0, :, :] = -2.0 * b * np.exp(-2.0 * b * t0)[..., None, None] * np.eye(n)
        return out

    return AmbientModel(
        label="custom",
        signature=Signature(-1),
        n=n,
        time_range=(-3.0, 3.0),
        psi=psi,
        dpsi=dpsi,
        sigma_ij=sigma_ij,
        dsigma=dsigma,
        params={"variant": "convexity_demo", "a": a, "b": b},
    )
