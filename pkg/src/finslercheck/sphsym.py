"""Spherically symmetric metrics F = u * phi(r, s).

Here u = |y|, r = |x|, s = <x,y>/|y| with Euclidean-lowered coordinates.
The geodesic spray of such a metric has the form

    G^i = u P y^i + u^2 Q x^i,

with P and Q rational in phi and its (r, s)-derivatives; this module
extracts P, Q from a profile, assembles spray and nonlinear connection
from a (P, Q) pair, evaluates the two metrizability PDEs a profile must
satisfy to be generated by given (P, Q), and implements the parallel-form
characterisation: a parallel 1-form of a spherically symmetric metric has
b_i = f(r) x_i, with Q determined by f and P while P stays free.

All (r, s)-level derivatives (phi_r, phi_s, phi_ss, P_s, Q_s, ...) come
from the Taylor engine applied to the profile, never from grid
differencing.
"""

from dataclasses import dataclass

import numpy as np

from . import forms, geometry, scalars
from .calculus import TangentSample, jet_of
from .errors import SingularDenominator
from .forms import OneForm
from .geometry import Domain, MetricModel, TensorValue, UP

__all__ = [
    "SphSymProfile", "PQPair", "RadialFactor", "pq_from_profile",
    "spray_from_pq", "spray_model_from_pq", "connection_from_pq",
    "metrizability_residuals", "parallel_q", "parallel_pq", "sss_residuals",
    "parallel_form_check", "classify_profile", "profile_metric",
]

DENOMINATOR_TOL = 1e-12


@dataclass(eq=False)
class SphSymProfile:
    """phi(r, s) with derivative access through the Taylor engine."""

    phi: object
    r0: float = 1.0
    name: str = ""

    def jet(self, r, s, kr=1, ks=3):
        return jet_of(lambda rg, sg: self.phi(rg[0], sg[0]),
                      ((r,), (s,)), (kr, ks))

    def value(self, r, s):
        return self.phi(r, s)


@dataclass(eq=False)
class PQPair:
    """Scalar maps P(r, s), Q(r, s); evaluate on floats or Taylor scalars."""

    P: object
    Q: object
    source: str = ""

    def p_jet(self, r, s, ks=1):
        return jet_of(lambda rg, sg: self.P(rg[0], sg[0]), ((r,), (s,)), (0, ks))

    def q_jet(self, r, s, ks=1):
        return jet_of(lambda rg, sg: self.Q(rg[0], sg[0]), ((r,), (s,)), (0, ks))


@dataclass(eq=False)
class RadialFactor:
    """f(r) with its derivative; represents the covector b_i = f(r) x_i."""

    f: object
    df: object = None
    name: str = ""

    def d(self, r):
        if self.df is not None:
            return self.df(r)
        return jet_of(lambda rg: self.f(rg[0]), ((r,),), (1,)).pvars((0,))

    def one_form(self, n):
        def b(x):
            r = scalars.sqrt(scalars.norm_sq(x))
            fr = self.f(r)
            return tuple(fr * xi for xi in x)
        return OneForm(n, b, name=self.name or "f(r) x_i")


def pq_from_profile(profile):
    """The (P, Q) maps generated by a profile.

    Q is evaluated first; SingularDenominator is raised when its
    denominator phi - s phi_s + (r^2 - s^2) phi_ss vanishes (loss of
    regularity of the metric).
    """

    def Q(r, s):
        jet = profile.jet(r, s, kr=1, ks=2)
        phi = jet.partial((0,), (0,))
        phi_r = jet.partial((1,), (0,))
        phi_s = jet.partial((0,), (1,))
        phi_rs = jet.partial((1,), (1,))
        phi_ss = jet.partial((0,), (2,))
        den = phi - s * phi_s + (r * r - s * s) * phi_ss
        dval = scalars.value(den)
        if abs(dval) <= DENOMINATOR_TOL * (1.0 + abs(scalars.value(phi))):
            raise SingularDenominator(
                f"Q-denominator vanishes at (r, s) = ({scalars.value(r):g}, "
                f"{scalars.value(s):g})")
        return (-phi_r + s * phi_rs + r * phi_ss) / (2.0 * r * den)

    def P(r, s):
        jet = profile.jet(r, s, kr=1, ks=1)
        phi = jet.partial((0,), (0,))
        phi_r = jet.partial((1,), (0,))
        phi_s = jet.partial((0,), (1,))
        q = Q(r, s)
        return (-(q / phi) * (s * phi + (r * r - s * s) * phi_s)
                + (s * phi_r + r * phi_s) / (2.0 * r * phi))

    return PQPair(P, Q, source=f"profile:{profile.name}")


def _rsu(x, y):
    u = scalars.sqrt(scalars.norm_sq(y))
    r = scalars.sqrt(scalars.norm_sq(x))
    s = scalars.dot(x, y) / u
    return r, s, u


def spray_from_pq(pq, at):
    """G^i = u P y^i + u^2 Q x^i at a tangent sample (r > 0)."""
    r, s, u = _rsu(at.x, at.y)
    P = pq.P(r, s)
    Q = pq.Q(r, s)
    G = np.array([scalars.value(u * P * yi + u * u * Q * xi)
                  for xi, yi in zip(at.x, at.y)])
    return TensorValue(G, (UP,))


def spray_model_from_pq(pq, n, domain=None, name=""):
    """Spray-only metric model whose coefficients come from (P, Q); feeds
    the geometry pipeline (connection, curvature, delta derivatives)."""
    def G(x, y):
        r, s, u = _rsu(x, y)
        P = pq.P(r, s)
        Q = pq.Q(r, s)
        return tuple(u * P * yi + u * u * Q * xi for xi, yi in zip(x, y))
    return MetricModel(n, None, domain or Domain(1.0), spray_override=G,
                       name=name or f"pq_spray[{pq.source}]")


def profile_metric(profile, n, name=""):
    """Full metric model F = u * phi(r, s) built from a profile."""
    def F(x, y):
        r, s, u = _rsu(x, y)
        return u * profile.phi(r, s)
    return MetricModel(n, F, Domain(profile.r0), name=name or profile.name)


def connection_from_pq(pq, at):
    """Nonlinear connection of the (P, Q) spray via its five-term closed
    form (cross-checked against fiber derivatives of the spray by tests)."""
    r, s, u = _rsu(at.x, at.y)
    pjet = pq.p_jet(r, s, ks=1)
    qjet = pq.q_jet(r, s, ks=1)
    P, P_s = pjet.partial((0,), (0,)), pjet.partial((0,), (1,))
    Q, Q_s = qjet.partial((0,), (0,)), qjet.partial((0,), (1,))
    x = np.asarray(at.x, dtype=float)
    y = np.asarray(at.y, dtype=float)
    d = np.eye(len(x))
    N = (u * P * d + P_s * np.outer(y, x) + (P - s * P_s) / u * np.outer(y, y)
         + u * Q_s * np.outer(x, x) + (2.0 * Q - s * Q_s) * np.outer(x, y))
    return TensorValue(N, (UP, geometry.DOWN_BASE))


def metrizability_residuals(profile, pq, rs):
    """Residuals of the two PDEs a profile must satisfy to be generated by
    the given (P, Q); r = 0 is excluded (the second PDE divides by r)."""
    r, s = rs
    if r == 0.0:
        raise SingularDenominator("metrizability residuals need r > 0")
    jet = profile.jet(r, s, kr=1, ks=1)
    phi = jet.partial((0,), (0,))
    phi_r = jet.partial((1,), (0,))
    phi_s = jet.partial((0,), (1,))
    pjet = pq.p_jet(r, s, ks=1)
    qjet = pq.q_jet(r, s, ks=1)
    P, P_s = pjet.partial((0,), (0,)), pjet.partial((0,), (1,))
    Q, Q_s = qjet.partial((0,), (0,)), qjet.partial((0,), (1,))
    w = r * r - s * s
    res1 = abs((1.0 + s * P - w * (2.0 * Q - s * Q_s)) * phi_s
               + (s * P_s - 2.0 * P - s * (2.0 * Q - s * Q_s)) * phi)
    res2 = abs(phi_r / r - (P + Q_s * w) * phi_s - (P_s + s * Q_s) * phi)
    return float(res1), float(res2)


def parallel_q(factor, P, rs):
    """The Q characterised by a parallel form b_i = f(r) x_i and a free P:
    Q = s^2 f'/(2 r^3 f) - s P / r^2 + 1/(2 r^2)."""
    r, s = rs
    rv, fv = scalars.value(r), scalars.value(factor.f(r))
    if rv == 0.0 or fv == 0.0:
        raise SingularDenominator(
            f"parallel_q needs r > 0 and f(r) != 0 (r={rv:g}, f={fv:g})")
    Pv = P(r, s) if callable(P) else P
    return (s * s * factor.d(r) / (2.0 * r ** 3 * factor.f(r))
            - s * Pv / (r * r) + 1.0 / (2.0 * r * r))


def parallel_pq(factor, P):
    """PQPair with the characterised Q (P arbitrary)."""
    return PQPair(P if callable(P) else (lambda r, s, v=P: v),
                  lambda r, s: parallel_q(factor, P, (r, s)),
                  source="parallel_q")


def sss_residuals(factor, P, Q, rs):
    """The three scalar conditions equivalent to delta_i beta = 0 for
    beta = f(r) <x, y>: the x-coefficient, the y-coefficient, and their
    s-weighted combination."""
    r, s = rs
    fv = factor.f(r)
    dfv = factor.d(r)
    pj = jet_of(lambda rg, sg: (P(rg[0], sg[0]) if callable(P) else P),
                ((r,), (s,)), (0, 1))
    qj = jet_of(lambda rg, sg: (Q(rg[0], sg[0]) if callable(Q) else Q),
                ((r,), (s,)), (0, 1))
    Pv, P_s = pj.partial((0,), (0,)), pj.partial((0,), (1,))
    Qv, Q_s = qj.partial((0,), (0,)), qj.partial((0,), (1,))
    r2 = r * r
    res1 = s * dfv / r - s * fv * P_s - fv * Pv - fv * r2 * Q_s
    res2 = (fv - fv * s * Pv + fv * s * s * P_s - 2.0 * fv * r2 * Qv
            + fv * s * r2 * Q_s)
    res3 = s * s * dfv / r + fv - 2.0 * fv * s * Pv - 2.0 * fv * r2 * Qv
    return float(res1), float(res2), float(res3)


def _delta_beta_expansion(factor, pq, at):
    """delta_i beta written out in its x_i / y_i coefficient form."""
    r, s, u = _rsu(at.x, at.y)
    fv = factor.f(r)
    dfv = factor.d(r)
    pjet = pq.p_jet(r, s, ks=1)
    qjet = pq.q_jet(r, s, ks=1)
    P, P_s = pjet.partial((0,), (0,)), pjet.partial((0,), (1,))
    Q, Q_s = qjet.partial((0,), (0,)), qjet.partial((0,), (1,))
    r2 = r * r
    coef_x = u * (s * dfv / r - s * fv * P_s - fv * P - fv * r2 * Q_s)
    coef_y = (fv - fv * s * P + fv * s * s * P_s - 2.0 * fv * r2 * Q
              + fv * s * r2 * Q_s)
    return np.array([coef_x * xi + coef_y * yi
                     for xi, yi in zip(at.x, at.y)])


def parallel_form_check(pq, factor, samples, n=3, tol=None,
                        expansion_tol=1e-9):
    """Full parallelness report for beta = f(r) <x, y> against the (P, Q)
    spray; delta_i beta is evaluated both through the pipeline and through
    its closed x_i/y_i-coefficient expansion, which must agree."""
    model = spray_model_from_pq(pq, n)
    omega = factor.one_form(n)
    beta = omega.beta()
    worst_gap = 0.0
    for at in samples:
        direct = geometry.delta_derivative(model, beta, at).components
        expanded = _delta_beta_expansion(factor, pq, at)
        gap = float(np.max(np.abs(direct - expanded)))
        scale = 1.0 + float(np.max(np.abs(direct)))
        if gap > expansion_tol * scale:
            raise SingularDenominator(
                f"delta beta expansion disagrees with the pipeline "
                f"(gap {gap:g} at x={at.x})")
        worst_gap = max(worst_gap, gap)
    report = forms.is_parallel(model, omega, samples, tol=tol)
    report.notes = {"expansion_gap": worst_gap}
    return report


RIEMANNIAN_TOL = 1e-10


def classify_profile(profile, grid, tol=RIEMANNIAN_TOL):
    """Detect the two special branches of the parallel-form analysis:
    phi independent of s (Riemannian, F = psi(r) u) and phi = c(r) s
    (fiberwise-linear F, degenerate metric tensor)."""
    max_phi_s = 0.0
    max_lin = 0.0
    for (r, s) in grid:
        jet = profile.jet(r, s, kr=0, ks=1)
        phi = jet.partial((0,), (0,))
        phi_s = jet.partial((0,), (1,))
        max_phi_s = max(max_phi_s, abs(phi_s) / (1.0 + abs(phi)))
        max_lin = max(max_lin, abs(s * phi_s / phi - 1.0))
    if max_phi_s <= tol:
        return "riemannian"
    if max_lin <= tol:
        return "degenerate_linear"
    return "generic"
