"""Exponential-affine survival expectations and longevity-bond quantities.

For an affine hazard model the conditional survival expectation is

    E_t[exp(-int_t^s lambda_members du)] = exp(K0(t,s) - K1(t,s)*lambda1(t)
                                               [- K2(t,s)*lambda2(t)])

with coefficients solving Riccati-type ODEs in t, terminal value zero at
t = s. Single-population models use (A0, A1); two-population models use
(C0, C1, C2). The rolling zero-coupon longevity bond keeps a constant time to
maturity and its volatility loading is -A1(t, t+T)*sigma1 (times
sqrt(lambda1) under CIR dynamics).

The module exposes scalar functions that follow the defining integrals and ODE
systems directly (adaptive Simpson, backward RK4), plus vectorised
coefficient tables on an s-lattice used by the annuity evaluator. The
measure-changed hazard means E~ needed by the annuity value come from a
hazard-proportional drift adjustment and stay affine in the current hazard:

    E~_t[lambda(s)] = J(t,s) * lambda(t) + psi(t,s).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .mortality import (CIR, OU, Model, SinglePopModel, TwoPopModel, drift_a)
from .numerics import DEFAULT_TOLERANCE, Tolerance, integrate, solve_ode


@dataclass(frozen=True)
class MarketParams:
    """Financial market constants.

    ``r``: risk-free rate; ``theta_s``: stock market price of risk;
    ``sigma_s``: stock volatility; ``theta_1``: market price of longevity
    risk; ``maturity``: constant time to maturity of the rolling bond (years).
    """

    r: float
    theta_s: float
    sigma_s: float
    theta_1: float
    maturity: float

    def __post_init__(self):
        if self.sigma_s <= 0:
            raise ValueError(f"sigma_s must be > 0, got {self.sigma_s}")
        if self.maturity <= 0:
            raise ValueError(f"maturity must be > 0, got {self.maturity}")

    @property
    def stock_premium(self) -> float:
        return self.theta_s * self.sigma_s


@dataclass(frozen=True)
class AffineCoeffs1:
    """Single-population affine coefficients evaluated at one (t, s)."""

    a0: float
    a1: float


@dataclass(frozen=True)
class AffineCoeffs2:
    """Two-population affine coefficients evaluated at one (t, s)."""

    c0: float
    c1: float
    c2: float


# ---------------------------------------------------------------------------
# closed forms in tau = s - t
# ---------------------------------------------------------------------------

def a1_ou(b: float, tau):
    """(1 - exp(-b*tau)) / b."""
    return (1.0 - np.exp(-b * np.asarray(tau, dtype=float))) / b


def a1_cir(b: float, sigma: float, tau):
    """Riccati solution 2(e^{eta*tau}-1) / ((b+eta)(e^{eta*tau}-1) + 2*eta)."""
    eta = np.sqrt(b * b + 2.0 * sigma * sigma)
    e = np.expm1(eta * np.asarray(tau, dtype=float))
    return 2.0 * e / ((b + eta) * e + 2.0 * eta)


def c2_ou(b22: float, tau):
    return a1_ou(b22, tau)


def _c1_ou_parts(model: TwoPopModel):
    b1, b21, b22 = model.b1, model.b21, model.b22
    g0 = -b21 / (b1 * b22)
    g1 = -b21 / (b1 * (b1 - b22))
    g2 = b21 / (b22 * (b1 - b22))
    return g0, g1, g2


def c1_ou(model: TwoPopModel, tau):
    """Cross coefficient solving -dC1/dt + b1*C1 + b21*C2 = 0, C1(s,s) = 0."""
    g0, g1, g2 = _c1_ou_parts(model)
    tau = np.asarray(tau, dtype=float)
    return g0 + g1 * np.exp(-model.b1 * tau) + g2 * np.exp(-model.b22 * tau)


def _cir2_tau_rhs(model: TwoPopModel):
    s1, s21, s22 = model.sigma1, model.sigma21, model.sigma22
    b1, b21, b22 = model.b1, model.b21, model.b22

    def rhs(_tau, y):
        c1, c2 = y
        dc1 = -(b1 * c1 + b21 * c2 + 0.5 * s1 * s1 * c1 * c1
                + 0.5 * s21 * s21 * c2 * c2 + s1 * s21 * c1 * c2)
        dc2 = 1.0 - b22 * c2 - 0.5 * s22 * s22 * c2 * c2
        return np.array([dc1, dc2])
    return rhs


@lru_cache(maxsize=64)
def _cir2_path_cached(model: TwoPopModel, tau_max: float, step: float):
    taus, ys = solve_ode(_cir2_tau_rhs(model), 0.0, tau_max, np.zeros(2), step=step)
    arrays = (taus, ys[:, 0], ys[:, 1])
    for a in arrays:
        a.setflags(write=False)
    return arrays


def cir2_coefficient_path(model: TwoPopModel, tau_max: float, step: float):
    """(tau nodes, C1, C2) for the two-population CIR Riccati system.

    The system is autonomous in tau = s - u, so one integration serves every
    (u, s) pair with s - u <= tau_max; results are cached per model.
    """
    if tau_max == 0.0:
        return np.array([0.0]), np.zeros(1), np.zeros(1)
    return _cir2_path_cached(model, float(tau_max), float(step))


# ---------------------------------------------------------------------------
# scalar coefficient evaluation
# ---------------------------------------------------------------------------

def coeffs_single(model: SinglePopModel, t: float, s: float,
                  tol: Tolerance = DEFAULT_TOLERANCE) -> AffineCoeffs1:
    """A0, A1 at (t, s); A0 by adaptive Simpson of the defining integrand."""
    if t > s:
        raise ValueError(f"need t <= s, got t={t}, s={s}")
    if t == s:
        return AffineCoeffs1(0.0, 0.0)
    b, sig, gm = model.b, model.sigma, model.gm
    if model.kind == OU:
        a1 = float(a1_ou(b, s - t))

        def integrand(u):
            a1u = a1_ou(b, s - u)
            return drift_a(u, gm, b) * a1u - 0.5 * sig * sig * a1u * a1u
    else:
        a1 = float(a1_cir(b, sig, s - t))

        def integrand(u):
            return drift_a(u, gm, b) * a1_cir(b, sig, s - u)

    a0 = -integrate(integrand, t, s, tol)
    return AffineCoeffs1(a0, a1)


def coeffs_two_pop(model: TwoPopModel, t: float, s: float,
                   tol: Tolerance = DEFAULT_TOLERANCE,
                   ode_step: float = 0.01) -> AffineCoeffs2:
    """C0, C1, C2 at (t, s).

    OU uses the closed forms for C1 and C2 with C0 by adaptive Simpson; CIR
    integrates the full Riccati system backward from the terminal condition
    with classical RK4.
    """
    if t > s:
        raise ValueError(f"need t <= s, got t={t}, s={s}")
    if t == s:
        return AffineCoeffs2(0.0, 0.0, 0.0)
    if model.kind == OU:
        s1, s21, s22 = model.sigma1, model.sigma21, model.sigma22

        def integrand(u):
            c1u = c1_ou(model, s - u)
            c2u = c2_ou(model.b22, s - u)
            return (drift_a(u, model.gm1, model.b1) * c1u
                    + drift_a(u, model.gm2, model.b22) * c2u
                    - 0.5 * s1 * s1 * c1u * c1u
                    - 0.5 * (s21 * s21 + s22 * s22) * c2u * c2u
                    - s1 * s21 * c1u * c2u)

        c0 = -integrate(integrand, t, s, tol)
        return AffineCoeffs2(c0, float(c1_ou(model, s - t)),
                             float(c2_ou(model.b22, s - t)))

    rhs_tau = _cir2_tau_rhs(model)

    def rhs(u, y):
        # y = (C0, C1, C2) along fixed s; d/du flips the tau derivative
        dc = -rhs_tau(s - u, y[1:])
        dc0 = drift_a(u, model.gm1, model.b1) * y[1] \
            + drift_a(u, model.gm2, model.b22) * y[2]
        return np.array([dc0, dc[0], dc[1]])

    _, ys = solve_ode(rhs, s, t, np.zeros(3), step=ode_step)
    return AffineCoeffs2(*ys[-1])


def survival_expectation(coeffs: Union[AffineCoeffs1, AffineCoeffs2],
                         lam) -> float:
    """exp(A0 - A1*lam) or exp(C0 - C1*lam1 - C2*lam2); strictly positive."""
    if isinstance(coeffs, AffineCoeffs1):
        lam = np.asarray(lam, dtype=float).reshape(-1)
        return float(np.exp(coeffs.a0 - coeffs.a1 * lam[0]))
    lam = np.asarray(lam, dtype=float).reshape(-1)
    return float(np.exp(coeffs.c0 - coeffs.c1 * lam[0] - coeffs.c2 * lam[1]))


# ---------------------------------------------------------------------------
# rolling bond
# ---------------------------------------------------------------------------

def _pop1(model: Model):
    if isinstance(model, SinglePopModel):
        return model.b, model.sigma
    return model.b1, model.sigma1


def _a1_pop1(model: Model, tau):
    b, sig = _pop1(model)
    if model.kind == OU:
        return a1_ou(b, tau)
    return a1_cir(b, sig, tau)


def rolling_bond_volatility(model: Model, market: MarketParams, t: float,
                            lambda1: Optional[float] = None) -> float:
    """Volatility loading of the rolling bond: -A1(t, t+T)*sigma1, with an
    extra sqrt(lambda1) under CIR dynamics. Negative whenever sigma1 > 0."""
    a1 = float(_a1_pop1(model, market.maturity))
    _, sig1 = _pop1(model)
    if model.kind == CIR:
        if lambda1 is None:
            raise ValueError("CIR bond volatility needs the current lambda1")
        if lambda1 < 0:
            raise ValueError(f"CIR requires lambda1 >= 0, got {lambda1}")
        return -a1 * sig1 * float(np.sqrt(lambda1))
    return -a1 * sig1


def replication_weights(model: Model, market: MarketParams, t: float,
                        s: float) -> tuple[float, float]:
    """(cash, rolling-bond) weights replicating the dated bond of maturity s.

    The rolling-bond weight is the ratio of the dated bond's volatility
    loading to the rolling bond's; any hazard-level factors cancel, so the
    weights depend only on s - t and the constant maturity.
    """
    if t > s:
        raise ValueError(f"need t <= s, got t={t}, s={s}")
    _, sig1 = _pop1(model)
    if sig1 == 0.0:
        raise ValueError("rolling bond volatility is zero (sigma1 = 0); "
                         "replication weights are undefined")
    w_roll = float(_a1_pop1(model, s - t) / _a1_pop1(model, market.maturity))
    return 1.0 - w_roll, w_roll


# ---------------------------------------------------------------------------
# measure-changed hazard means
# ---------------------------------------------------------------------------

def tilde_mean(model: Model, t: float, s: float, lam,
               tol: Tolerance = DEFAULT_TOLERANCE,
               ode_step: float = 0.01) -> np.ndarray:
    """Expected hazards at s under the survival-weighted measure change.

    Returns one value per population. OU models evaluate the closed-form
    solutions of the shifted-drift mean ODEs; CIR models integrate those
    (still linear) ODEs forward with RK4, the drift being reduced by the
    hazard-proportional loadings sigma^2 * K(u, s).
    """
    if t > s:
        raise ValueError(f"need t <= s, got t={t}, s={s}")
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if t == s:
        return lam.copy()

    if isinstance(model, SinglePopModel):
        b, sig, gm = model.b, model.sigma, model.gm
        if model.kind == OU:
            decay = np.exp(-b * (s - t))
            part = integrate(
                lambda u: (drift_a(u, gm, b) - sig * sig * a1_ou(b, s - u))
                * np.exp(-b * (s - u)), t, s, tol)
            return np.array([lam[0] * decay + part])

        def rhs(u, y):
            c = b + sig * sig * a1_cir(b, sig, s - u)
            return np.array([drift_a(u, gm, b) - c * y[0]])

        _, ys = solve_ode(rhs, t, s, np.array([lam[0]]), step=ode_step)
        return np.array([ys[-1, 0]])

    b1, b21, b22 = model.b1, model.b21, model.b22
    s1, s21, s22 = model.sigma1, model.sigma21, model.sigma22
    if model.kind == OU:
        kap = b21 / (b1 - b22)
        d1 = np.exp(-b1 * (s - t))
        d22 = np.exp(-b22 * (s - t))

        def adj1(u):
            return (drift_a(u, model.gm1, b1) - s1 * s1 * c1_ou(model, s - u)
                    - s1 * s21 * c2_ou(b22, s - u))

        gam2 = integrate(lambda u: np.exp(-b1 * (s - u)) * adj1(u), t, s, tol)
        chi = s21 * s21 + s22 * s22 - kap * s1 * s21
        gam1 = integrate(
            lambda u: np.exp(-b22 * (s - u)) * (
                kap * drift_a(u, model.gm1, b1) - drift_a(u, model.gm2, b22)
                + s1 * s21 * c1_ou(model, s - u) + chi * c2_ou(b22, s - u)),
            t, s, tol)
        e1 = lam[0] * d1 + gam2
        e2 = kap * lam[0] * (d1 - d22) + lam[1] * d22 + kap * gam2 - gam1
        return np.array([e1, e2])

    # two-population CIR: coefficients from the tau-autonomous Riccati path
    n = max(1, round((s - t) / ode_step))
    h = (s - t) / n
    _, c1f, c2f = cir2_coefficient_path(model, s - t, step=0.5 * h)

    e = lam.astype(float).copy()
    for k in range(n):
        u = t + k * h
        idx0, idxm, idx1 = 2 * (n - k), 2 * (n - k) - 1, 2 * (n - k) - 2

        def deriv(uu, y, i):
            m11 = b1 + s1 * s1 * c1f[i] + s1 * s21 * c2f[i]
            m21 = b21 + s1 * s21 * c1f[i] + s21 * s21 * c2f[i]
            m22 = b22 + s22 * s22 * c2f[i]
            return np.array([
                drift_a(uu, model.gm1, b1) - m11 * y[0],
                drift_a(uu, model.gm2, b22) - m21 * y[0] - m22 * y[1]])

        k1 = deriv(u, e, idx0)
        k2 = deriv(u + 0.5 * h, e + 0.5 * h * k1, idxm)
        k3 = deriv(u + 0.5 * h, e + 0.5 * h * k2, idxm)
        k4 = deriv(u + h, e + h * k3, idx1)
        e = e + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return e


# ---------------------------------------------------------------------------
# vectorised coefficient tables on an s-lattice (annuity evaluator backend)
# ---------------------------------------------------------------------------

@dataclass
class CoefficientTable:
    """Affine and measure-changed-mean curves on a lattice anchored at t.

    ``k0 - k1*lam1 [- k2*lam2]`` is the log survival expectation to each
    lattice node; the members' shifted mean is ``j1*lam1 [+ j2*lam2] + psi``.
    Singles leave ``k2``/``j2`` as None.
    """

    t: float
    s: np.ndarray
    tau: np.ndarray
    k0: np.ndarray
    k1: np.ndarray
    k2: Optional[np.ndarray]
    j1: np.ndarray
    j2: Optional[np.ndarray]
    psi: np.ndarray


def _cum_simpson(f_fine: np.ndarray, h: float) -> np.ndarray:
    """Cumulative Simpson integral at coarse nodes from values on the
    half-step lattice (2n+1 values -> n+1 cumulatives)."""
    seg = (h / 6.0) * (f_fine[0:-2:2] + 4.0 * f_fine[1::2] + f_fine[2::2])
    out = np.empty(seg.size + 1)
    out[0] = 0.0
    np.cumsum(seg, out=out[1:])
    return out


def _simpson_conv(a_fine: np.ndarray, g_fine: np.ndarray, h: float,
                  n: int) -> np.ndarray:
    """out[j] = Simpson_{u in [t, s_j]} a(u) * g(s_j - u) on the shared
    lattice; used where g has no exponential-sum form (CIR kernels).

    The Simpson node weights depend only on index parity, so the whole
    family of integrals is two discrete convolutions.
    """
    a_even = a_fine.copy()
    a_even[1::2] = 0.0
    a_odd = a_fine - a_even
    conv_even = np.convolve(a_even, g_fine)[0:2 * n + 1:2]
    conv_odd = np.convolve(a_odd, g_fine)[0:2 * n + 1:2]
    out = (h / 6.0) * (4.0 * conv_odd + 2.0 * conv_even
                       - a_fine[0] * g_fine[0:2 * n + 1:2]
                       - a_fine[0:2 * n + 1:2] * g_fine[0])
    out[0] = 0.0
    return out


def _moment_sweep(coeff_rows, inh_rows, h: float, n: int, two_pop: bool):
    """March the shifted-mean transition J and offset psi over all columns.

    Column j accumulates the linear mean ODE from t to s_j; coefficients are
    read off the fine tau-lattice slices supplied by ``coeff_rows`` and the
    inhomogeneous terms by ``inh_rows`` (stage-indexed)."""
    if two_pop:
        j11 = np.ones(n + 1)
        j21 = np.zeros(n + 1)
        j22 = np.ones(n + 1)
        p1 = np.zeros(n + 1)
        p2 = np.zeros(n + 1)
        for k in range(n):
            live = slice(k + 1, n + 1)
            m = n - k
            stages = coeff_rows(k, m)
            inh = inh_rows(k)
            y = (j11[live], j21[live], j22[live], p1[live], p2[live])

            def f(y_, st, a1v, a2v):
                m11, m21, m22 = st
                return (-m11 * y_[0],
                        -m21 * y_[0] - m22 * y_[1],
                        -m22 * y_[2],
                        a1v - m11 * y_[3],
                        a2v - m21 * y_[3] - m22 * y_[4])

            k1 = f(y, stages[0], inh[0][0], inh[0][1])
            y2 = tuple(y[i] + 0.5 * h * k1[i] for i in range(5))
            k2 = f(y2, stages[1], inh[1][0], inh[1][1])
            y3 = tuple(y[i] + 0.5 * h * k2[i] for i in range(5))
            k3 = f(y3, stages[1], inh[1][0], inh[1][1])
            y4 = tuple(y[i] + h * k3[i] for i in range(5))
            k4 = f(y4, stages[2], inh[2][0], inh[2][1])
            for i, arr in enumerate((j11, j21, j22, p1, p2)):
                arr[live] += (h / 6.0) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
        return j21, j22, p2
    j = np.ones(n + 1)
    p = np.zeros(n + 1)
    for k in range(n):
        live = slice(k + 1, n + 1)
        m = n - k
        c0, cm, c1 = coeff_rows(k, m)
        a0, am, a1v = inh_rows(k)
        y_j, y_p = j[live], p[live]
        k1j, k1p = -c0 * y_j, a0 - c0 * y_p
        k2j = -cm * (y_j + 0.5 * h * k1j)
        k2p = am - cm * (y_p + 0.5 * h * k1p)
        k3j = -cm * (y_j + 0.5 * h * k2j)
        k3p = am - cm * (y_p + 0.5 * h * k2p)
        k4j = -c1 * (y_j + h * k3j)
        k4p = a1v - c1 * (y_p + h * k3p)
        j[live] += (h / 6.0) * (k1j + 2 * k2j + 2 * k3j + k4j)
        p[live] += (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
    return j, None, p


def build_coefficient_table(model: Model, t: float, t_max: float,
                            step: float = 0.05) -> CoefficientTable:
    """Coefficient curves for every lattice node s in [t, t_max].

    The lattice has an even number of intervals so composite Simpson weights
    apply directly to the outer integral. Integrals of the drift level are
    cumulative Simpson sums on a half-step refinement; pure functions of
    s - u use closed forms or one shared tau-integration.
    """
    if t_max <= t:
        raise ValueError(f"need t < t_max, got t={t}, t_max={t_max}")
    n = int(np.ceil((t_max - t) / step - 1e-12))
    if n % 2:
        n += 1
    n = max(n, 2)
    h = (t_max - t) / n
    hf = 0.5 * h
    s = t + h * np.arange(n + 1)
    tau = s - t
    u_fine = t + hf * np.arange(2 * n + 1)
    tau_fine = hf * np.arange(2 * n + 1)

    if isinstance(model, SinglePopModel):
        b, sig, gm = model.b, model.sigma, model.gm
        a_fine = drift_a(u_fine, gm, b)
        if model.kind == OU:
            k1 = a1_ou(b, tau)
            decay = np.exp(-b * tau)
            f0 = _cum_simpson(a_fine, h)
            eb = decay * _cum_simpson(a_fine * np.exp(b * (u_fine - t)), h)
            em2 = -np.expm1(-2.0 * b * tau) / (2.0 * b)
            ia1sq = (tau - 2.0 * k1 + em2) / (b * b)
            k0 = -((f0 - eb) / b - 0.5 * sig * sig * ia1sq)
            psi = eb - sig * sig * (k1 - em2) / b
            return CoefficientTable(t, s, tau, k0, k1, None, decay, None, psi)

        a1f = a1_cir(b, sig, tau_fine)
        k1 = a1f[::2]
        k0 = -_simpson_conv(a_fine, a1f, h, n)
        cf = b + sig * sig * a1f

        def coeff_rows(k, m):
            return (cf[2::2][:m], cf[1::2][:m], cf[0::2][:m])

        def inh_rows(k):
            u = t + k * h
            return (drift_a(u, gm, b), drift_a(u + hf, gm, b),
                    drift_a(u + h, gm, b))

        j1, _, psi = _moment_sweep(coeff_rows, inh_rows, h, n, two_pop=False)
        return CoefficientTable(t, s, tau, k0, k1, None, j1, None, psi)

    b1, b21, b22 = model.b1, model.b21, model.b22
    s1, s21, s22 = model.sigma1, model.sigma21, model.sigma22
    a1_fine = drift_a(u_fine, model.gm1, b1)
    a2_fine = drift_a(u_fine, model.gm2, b22)

    if model.kind == OU:
        kap = b21 / (b1 - b22)
        d1 = np.exp(-b1 * tau)
        d22 = np.exp(-b22 * tau)
        k1 = c1_ou(model, tau)
        k2 = c2_ou(b22, tau)

        f1_0 = _cum_simpson(a1_fine, h)
        f1_b1 = _cum_simpson(a1_fine * np.exp(b1 * (u_fine - t)), h)
        f1_b22 = _cum_simpson(a1_fine * np.exp(b22 * (u_fine - t)), h)
        f2_0 = _cum_simpson(a2_fine, h)
        f2_b22 = _cum_simpson(a2_fine * np.exp(b22 * (u_fine - t)), h)

        g0, g1, g2 = _c1_ou_parts(model)
        t_a1c1 = g0 * f1_0 + g1 * d1 * f1_b1 + g2 * d22 * f1_b22
        t_a2c2 = (f2_0 - d22 * f2_b22) / b22

        c1f = c1_ou(model, tau_fine)
        c2f = c2_ou(b22, tau_fine)
        q11 = _cum_simpson(c1f * c1f, h)
        q22 = _cum_simpson(c2f * c2f, h)
        q12 = _cum_simpson(c1f * c2f, h)
        k0 = -(t_a1c1 + t_a2c2 - 0.5 * s1 * s1 * q11
               - 0.5 * (s21 * s21 + s22 * s22) * q22 - s1 * s21 * q12)

        r11 = _cum_simpson(np.exp(-b1 * tau_fine) * c1f, h)
        r12 = _cum_simpson(np.exp(-b1 * tau_fine) * c2f, h)
        r21 = _cum_simpson(np.exp(-b22 * tau_fine) * c1f, h)
        r22 = _cum_simpson(np.exp(-b22 * tau_fine) * c2f, h)
        gam2 = d1 * f1_b1 - s1 * s1 * r11 - s1 * s21 * r12
        chi = s21 * s21 + s22 * s22 - kap * s1 * s21
        gam1 = d22 * (kap * f1_b22 - f2_b22) + s1 * s21 * r21 + chi * r22

        j1 = kap * (d1 - d22)
        j2 = d22
        psi = kap * gam2 - gam1
        return CoefficientTable(t, s, tau, k0, k1, k2, j1, j2, psi)

    _, c1f, c2f = cir2_coefficient_path(model, tau[-1], step=hf)
    k1 = c1f[::2]
    k2 = c2f[::2]
    k0 = -(_simpson_conv(a1_fine, c1f, h, n) + _simpson_conv(a2_fine, c2f, h, n))

    m11f = b1 + s1 * s1 * c1f + s1 * s21 * c2f
    m21f = b21 + s1 * s21 * c1f + s21 * s21 * c2f
    m22f = b22 + s22 * s22 * c2f

    def coeff_rows(k, m):
        return ((m11f[2::2][:m], m21f[2::2][:m], m22f[2::2][:m]),
                (m11f[1::2][:m], m21f[1::2][:m], m22f[1::2][:m]),
                (m11f[0::2][:m], m21f[0::2][:m], m22f[0::2][:m]))

    def inh_rows(k):
        u = t + k * h
        return ((drift_a(u, model.gm1, b1), drift_a(u, model.gm2, b22)),
                (drift_a(u + hf, model.gm1, b1), drift_a(u + hf, model.gm2, b22)),
                (drift_a(u + h, model.gm1, b1), drift_a(u + h, model.gm2, b22)))

    j1, j2, psi = _moment_sweep(coeff_rows, inh_rows, h, n, two_pop=True)
    return CoefficientTable(t, s, tau, k0, k1, k2, j1, j2, psi)
