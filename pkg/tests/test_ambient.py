import numpy as np
import pytest

from flowlab import ambient
from flowlab.errors import AmbientDomainError

RNG = np.random.default_rng(42)


def sample_points(model, n_pts=20, t_window=None):
    lo, hi = model.time_range
    if t_window is not None:
        lo, hi = t_window
    lo, hi = max(lo, -5.0), min(hi, 5.0)
    span = hi - lo
    t0 = RNG.uniform(lo + 0.05 * span, hi - 0.05 * span, n_pts)
    x = RNG.uniform(0.0, 1.0, (n_pts, model.n))
    return t0, x


def fd_christoffel(model, t0, x, h=1e-4):
    """Levi-Civita symbols from a 4th-order stencil on metric_at (oracle)."""
    n = model.n
    P = t0.size
    dg = np.zeros((P, n + 1, n + 1, n + 1))

    def g_at(mu, s):
        if mu == 0:
            return ambient.metric_at(model, t0 + s, x)[0]
        sh = np.zeros(n)
        sh[mu - 1] = s
        return ambient.metric_at(model, t0, x + sh)[0]

    for mu in range(n + 1):
        dg[:, mu] = (-g_at(mu, 2 * h) + 8 * g_at(mu, h)
                     - 8 * g_at(mu, -h) + g_at(mu, -2 * h)) / (12 * h)
    _, ginv = ambient.metric_at(model, t0, x)
    gam = np.zeros((P, n + 1, n + 1, n + 1))
    for a in range(n + 1):
        for b in range(n + 1):
            for c in range(n + 1):
                acc = 0.0
                for d in range(n + 1):
                    acc = acc + ginv[:, a, d] * (
                        dg[:, b, d, c] + dg[:, c, d, b] - dg[:, d, b, c]
                    )
                gam[:, a, b, c] = 0.5 * acc
    return gam


ALL_MODELS = [
    ("minkowski", lambda: ambient.minkowski(2), None),
    ("de_sitter", lambda: ambient.de_sitter_conformal(2), (0.5, 3.0)),
    ("rw", lambda: ambient.robertson_walker(2, c0=1.3, power=0.8), (-1.8, -0.3)),
    ("arw", lambda: ambient.arw_power(2, omega=2.5, c0=1.1,
                                      perturbation_eps=0.05, period=3.0),
     (-1.5, -0.3)),
    ("riem", lambda: ambient.warped_riemannian(2), None),
    ("cosh", lambda: ambient.cosh_de_sitter_like(2), None),
    ("wiggle", lambda: ambient.non_einstein_wiggle(2, period=3.0), (-1.5, 1.5)),
]


@pytest.mark.parametrize("name,factory,window", ALL_MODELS)
def test_christoffel_matches_finite_differences(name, factory, window):
    model = factory()
    t0, x = sample_points(model, t_window=window)
    gam = ambient.christoffel_at(model, t0, x)
    oracle = fd_christoffel(model, t0, x)
    assert np.abs(gam - oracle).max() < 1e-8
    assert np.abs(gam - gam.swapaxes(-1, -2)).max() == 0.0


@pytest.mark.parametrize("name,factory,window", ALL_MODELS)
def test_metric_inverse(name, factory, window):
    model = factory()
    t0, x = sample_points(model, t_window=window)
    g, g_inv = ambient.metric_at(model, t0, x)
    eye = np.einsum("...ab,...bc->...ac", g_inv, g)
    assert np.abs(eye - np.eye(model.n + 1)).max() < 1e-12


def test_minkowski_metric_and_flat_connection():
    model = ambient.minkowski(2)
    t0 = np.array([0.3])
    x = np.array([[0.1, 0.7]])
    g, _ = ambient.metric_at(model, t0, x)
    assert np.allclose(g[0], np.diag([-1.0, 1.0, 1.0]))
    assert np.abs(ambient.christoffel_at(model, t0, x)).max() == 0.0
    ct = ambient.riemann_at(model, t0, x)
    assert np.abs(ct.riemann).max() == 0.0


def test_warped_riemannian_metric_form():
    model = ambient.warped_riemannian(2, rate=0.3)
    t0 = np.array([0.5])
    x = np.array([[0.2, 0.4]])
    g, _ = ambient.metric_at(model, t0, x)
    conf = np.exp(2 * 0.3 * 0.5)
    assert np.allclose(g[0], conf * np.eye(3))


def test_rw_christoffel_closed_form():
    # ψ = f(τ), σ_ij = δ: Γ̄⁰₀₀ = f', Γ̄⁰_ij = f' δ_ij in the Lorentzian chart
    model = ambient.robertson_walker(2, c0=1.0, power=1.0)
    tau = np.array([-0.8])
    x = np.zeros((1, 2))
    fp = 1.0 / tau[0]
    gam = ambient.christoffel_at(model, tau, x)
    assert abs(gam[0, 0, 0, 0] - fp) < 1e-14
    assert np.allclose(gam[0, 0, 1:, 1:], fp * np.eye(2), atol=1e-14)


def test_domain_error():
    model = ambient.de_sitter_conformal(2, time_range=(0.2, 5.0))
    with pytest.raises(AmbientDomainError):
        ambient.metric_at(model, np.array([-1.0]), np.zeros((1, 2)))


def test_riemann_symmetries_and_bianchi():
    model = ambient.non_einstein_wiggle(2, period=3.0)
    t0, x = sample_points(model, n_pts=6, t_window=(-1.0, 1.0))
    ct = ambient.riemann_at(model, t0, x)
    r = ct.riemann
    assert np.abs(r + r.swapaxes(1, 2)).max() < 1e-7
    assert np.abs(r + r.swapaxes(3, 4)).max() < 1e-7
    assert np.abs(r - np.einsum("pabcd->pcdab", r)).max() < 1e-7
    bianchi = r + np.einsum("pacdb->pabcd", r) + np.einsum("padbc->pabcd", r)
    assert np.abs(bianchi).max() < 1e-7


def test_de_sitter_constant_curvature_100_points():
    model = ambient.de_sitter_conformal(2)
    t0 = RNG.uniform(0.4, 3.0, 100)
    x = RNG.uniform(0, 1, (100, 2))
    g, _ = ambient.metric_at(model, t0, x)
    spaceform = np.einsum("...ac,...bd->...abcd", g, g) - np.einsum(
        "...ad,...bc->...abcd", g, g
    )
    ct = ambient.riemann_at(model, t0, x, force_fd=True)
    scale = np.abs(spaceform).max()
    assert np.abs(ct.riemann - spaceform).max() / scale < 1e-6


def test_ricci_is_riemann_contraction():
    model = ambient.cosh_de_sitter_like(2)
    t0, x = sample_points(model, n_pts=10)
    ct = ambient.riemann_at(model, t0, x)
    _, g_inv = ambient.metric_at(model, t0, x)
    ric = np.einsum("...ac,...abcd->...bd", g_inv, ct.riemann)
    assert np.abs(ric - ct.ricci).max() < 1e-12


def test_metric_derivative_convergence_order():
    # finite differences of metric_at converge to the closed-form Christoffel
    # construction at 4th order under step halving
    model = ambient.arw_power(2, omega=2.5, c0=1.1, perturbation_eps=0.05, period=3.0)
    t0 = RNG.uniform(-1.5, -0.5, 10)
    x = RNG.uniform(0, 1, (10, 2))
    exact = ambient.christoffel_at(model, t0, x)
    err = {h: np.abs(fd_christoffel(model, t0, x, h=h) - exact).max()
           for h in (2e-3, 1e-3)}
    order = np.log2(err[2e-3] / err[1e-3])
    assert order >= 3.5


def test_christoffel_metric_compatibility():
    # ∇̄ ḡ = 0: check via finite differences of the metric plus Γ̄ terms
    for factory, window in [
        (lambda: ambient.robertson_walker(2, c0=1.3, power=0.8), (-1.8, -0.3)),
        (lambda: ambient.non_einstein_wiggle(2, period=3.0), (-1.0, 1.0)),
    ]:
        model = factory()
        t0, x = sample_points(model, n_pts=8, t_window=window)
        n = model.n
        h = 1e-4
        dg = np.zeros(t0.shape + (n + 1, n + 1, n + 1))

        def g_at(mu, s):
            if mu == 0:
                return ambient.metric_at(model, t0 + s, x)[0]
            sh = np.zeros(n)
            sh[mu - 1] = s
            return ambient.metric_at(model, t0, x + sh)[0]

        for mu in range(n + 1):
            dg[..., mu, :, :] = (-g_at(mu, 2 * h) + 8 * g_at(mu, h)
                                 - 8 * g_at(mu, -h) + g_at(mu, -2 * h)) / (12 * h)
        g, _ = ambient.metric_at(model, t0, x)
        gam = ambient.christoffel_at(model, t0, x)
        nabla_g = (
            dg
            - np.einsum("...eca,...eb->...cab", gam, g)
            - np.einsum("...ecb,...ae->...cab", gam, g)
        )
        assert np.abs(nabla_g).max() < 1e-8


def test_arw_profile_invariants():
    model = ambient.arw_power(2, omega=2.0, c0=1.4)
    prof = model.arw
    taus = -np.logspace(-1, -6, 40)
    assert (-prof.fp(taus) > 0).all()
    indicator = prof.mass_indicator(taus)
    # drift below 1% over the last decade of the sequence
    last_decade = indicator[taus > -1e-5]
    assert np.abs(last_decade / prof.mass - 1.0).max() < 1e-2
    # f diverges to -inf toward the crunch
    assert prof.f(np.array([-1e-8]))[0] < prof.f(np.array([-0.1]))[0] - 10.0
    # mass bookkeeping m = c0^{2γ̃}/γ̃²
    gt = prof.gamma_tilde
    assert abs(prof.mass - 1.4 ** (2 * gt) / gt**2) < 1e-14


def test_arw_mass_parameter_roundtrip():
    model = ambient.arw_power(2, omega=3.0, mass=2.5)
    assert abs(model.arw.mass - 2.5) < 1e-12


def test_convex_chi_de_sitter_large_lambda():
    model = ambient.de_sitter_conformal(2)
    t0 = np.repeat(np.linspace(0.5, 2.0, 4), 16)
    x = np.tile(RNG.uniform(0, 1, (16, 2)), (4, 1))
    ok, c = ambient.convex_chi(model, t0, x, lam=5.0)
    assert ok and c > 0


def test_convex_chi_minkowski_never_convex():
    model = ambient.minkowski(2)
    t0 = np.repeat(np.linspace(-1, 1, 4), 16)
    x = np.tile(RNG.uniform(0, 1, (16, 2)), (4, 1))
    for lam in (0.5, 2.0, 10.0):
        ok, c = ambient.convex_chi(model, t0, x, lam=lam)
        assert not ok
        assert c <= 1e-12


def test_convex_chi_lambda_sweep():
    # the λ² term is essential: small λ fails, large λ succeeds
    model = ambient.convexity_demo(2, a=1.0, b=1.5)
    t0 = np.repeat(np.linspace(-0.5, 0.5, 4), 16)
    x = np.tile(RNG.uniform(0, 1, (16, 2)), (4, 1))
    ok_small, _ = ambient.convex_chi(model, t0, x, lam=0.1)
    ok_large, c_large = ambient.convex_chi(model, t0, x, lam=3.0)
    assert not ok_small
    assert ok_large and c_large > 0
