"""1-forms beta = b_i(x) y^i and their parallelness machinery.

A form is horizontally parallel when its Berwald covariant derivative
b_{i|j} = d_j b_i - G^k_{ji} b_k vanishes; equivalently the scalar beta is
holonomy invariant (all horizontal derivatives delta_j beta vanish), subject
to the curvature compatibility R^h_{jk} b_h = 0.  Homogeneity d_C beta =
beta holds structurally because b depends on x alone.  This module
implements those operators plus the Randers lift F + beta and the
functional-independence rank test used by the metrizability-freedom
argument.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import geometry, sampling, scalars
from .calculus import JetOrder, eval_jet, jet_of_many
from .errors import FinslerCheckError, InsufficientSamples, NotPositive
from .geometry import DOWN_BASE, DOWN_FIBER, MetricModel, TensorValue

__all__ = [
    "OneForm", "ParallelReport", "Verdict", "covariant_derivative",
    "d_R_beta", "m_covector", "is_parallel", "randers_lift",
    "functional_independence", "annihilation_check",
]


@dataclass(eq=False)
class OneForm:
    """Coefficient field b_i(x); beta(x, y) = b_i(x) y^i.

    ``b`` must accept Taylor scalars (write it against
    :mod:`finslercheck.scalars`); ``db`` is an optional closed-form oracle
    for the Jacobian d_j b_i, computed by AD when absent.
    """

    n: int
    b: object
    db: object = None
    name: str = ""

    @staticmethod
    def constant(values, name=""):
        vals = tuple(float(v) for v in values)
        return OneForm(len(vals), lambda x: vals,
                       db=lambda x: np.zeros((len(vals), len(vals))),
                       name=name or "constant")

    def beta(self):
        """The scalar field beta on the slit tangent bundle."""
        return lambda x, y: scalars.dot(self.b(x), y)

    def values(self, x):
        return np.array([scalars.value(v) for v in self.b(x)])

    def jacobian(self, x):
        """d_j b_i as an (i, j) matrix."""
        if self.db is not None:
            return np.asarray(self.db(x), dtype=float)
        jets = jet_of_many(lambda xs: self.b(xs), (x,), (1,))
        return np.array([[jets[i].pvars((j,)) for j in range(self.n)]
                         for i in range(self.n)])


class Verdict(Enum):
    PARALLEL_WITHIN_TOL = "ParallelWithinTol"
    NOT_PARALLEL = "NotParallel"


@dataclass
class ParallelReport:
    """Aggregated parallelness residuals over a sample batch."""

    max_covariant: float
    max_delta: float
    max_curvature: float
    tolerance: float
    sample_count: int
    scheme: str
    worst: dict
    verdict: Verdict
    notes: dict = None

    @property
    def passed(self):
        return self.verdict is Verdict.PARALLEL_WITHIN_TOL


PARALLEL_TOL = {"ad": 1e-7, "fd": 1e-4}


def covariant_derivative(m, omega, at, scheme="ad"):
    """Berwald horizontal covariant derivative b_{i|j}; the contraction
    y^i b_{i|j} = delta_j beta is checked on every call."""
    n = at.n
    conn = geometry.berwald_connection(m, at, scheme).components
    db = omega.jacobian(at.x)
    b = omega.values(at.x)
    cov = db - np.einsum("kji,k->ij", conn, b)
    y = np.asarray(at.y, dtype=float)
    delta = delta_beta(m, omega, at, scheme).components
    resid = float(np.max(np.abs(y @ cov - delta)))
    tol = (1e-10 if scheme == "ad" else 1e-3) * (1.0 + float(np.max(np.abs(delta))))
    if resid > tol:
        raise FinslerCheckError(
            f"y^i b_i|j disagrees with delta_j beta (residual {resid:g})")
    return TensorValue(cov, (DOWN_FIBER, DOWN_BASE))


def delta_beta(m, omega, at, scheme="ad"):
    """delta_j beta (horizontal derivatives of the scalar beta)."""
    return geometry.delta_derivative(m, omega.beta(), at, scheme)


def d_R_beta(m, omega, at, scheme="ad"):
    """R^h_{jk} b_h (2-form) and its y-contraction R^h_j b_h."""
    R = geometry.curvature_R(m, at, scheme)
    b = omega.values(at.x)
    two_form = np.einsum("hjk,h->jk", R.components, b)
    contracted = two_form @ np.asarray(at.y, dtype=float)
    return (TensorValue(two_form, (DOWN_BASE, DOWN_BASE),
                        (("antisym", (0, 1)),), notes=dict(R.notes)),
            TensorValue(contracted, (DOWN_BASE,), notes=dict(R.notes)))


def m_covector(m, omega, at, scheme="ad"):
    """m_j = b_j - (beta/F) l_j; may vanish at isolated y but not
    identically in y (checked by the y-sweep tests)."""
    m.require_F()
    ell = geometry.hilbert_form(m, at, scheme).components
    b = omega.values(at.x)
    fval = scalars.value(m.F(at.x, at.y))
    beta = float(b @ np.asarray(at.y, dtype=float))
    mj = b - (beta / fval) * ell
    return TensorValue(mj, (DOWN_FIBER,),
                       notes={"norm": float(np.linalg.norm(mj))})


def homogeneity_residual(omega, at):
    """|d_C beta - beta|, which vanishes structurally for x-only b."""
    jet = eval_jet(omega.beta(), at, JetOrder(0, 1))
    dC = sum(at.y[i] * jet.pvars((), (i,)) for i in range(at.n))
    return abs(dC - jet.value)


def is_parallel(m, omega, samples, tol=None, scheme="ad", threads=1):
    """Aggregate the three parallelness residuals over >= 10 samples;
    per-sample work may run on a thread pool (results are identical to the
    sequential order)."""
    if len(samples) < 10:
        raise InsufficientSamples("is_parallel needs at least 10 samples")
    if tol is None:
        tol = PARALLEL_TOL[scheme]

    def residuals(at):
        hres = homogeneity_residual(omega, at)
        if hres > 1e-14 * (1.0 + abs(scalars.value(omega.beta()(at.x, at.y)))):
            raise FinslerCheckError(
                f"d_C beta != beta (residual {hres:g}); the form is not "
                "a fiberwise-linear function of y")
        return {
            "covariant": covariant_derivative(m, omega, at, scheme).max_abs(),
            "delta": delta_beta(m, omega, at, scheme).max_abs(),
            "curvature": d_R_beta(m, omega, at, scheme)[0].max_abs(),
        }

    maxima = {"covariant": 0.0, "delta": 0.0, "curvature": 0.0}
    worst = {k: None for k in maxima}
    for at, vals in zip(samples, sampling.map_samples(residuals, samples,
                                                      threads)):
        for k, v in vals.items():
            if v > maxima[k]:
                maxima[k] = v
                worst[k] = {"x": at.x, "y": at.y, "value": v}
    verdict = (Verdict.PARALLEL_WITHIN_TOL
               if all(v <= tol for v in maxima.values())
               else Verdict.NOT_PARALLEL)
    return ParallelReport(maxima["covariant"], maxima["delta"],
                          maxima["curvature"], tol, len(samples), scheme,
                          worst, verdict)


def randers_lift(m, omega, check_samples=200, seed=0):
    """The Randers change F + beta as a new metric model.

    Positivity of F + beta is checked on a seeded sample batch; forms with
    coefficients too large for the metric raise NotPositive.
    """
    m.require_F()

    def lifted(x, y):
        return m.F(x, y) + scalars.dot(omega.b(x), y)

    radius = m.domain.default_sample_radius()
    for at in sampling.tangent_samples(m.n, check_samples, seed, radius):
        val = scalars.value(lifted(at.x, at.y))
        if not (val > 0.0) or not math.isfinite(val):
            raise NotPositive(
                f"F + beta = {val:g} at x={at.x}, y={at.y}; the lift is "
                "not a positive Finsler function on the sampled domain")
    return MetricModel(n=m.n, F=lifted, domain=m.domain,
                       name=(m.name + "+beta") if m.name else "randers_lift")


PHI_CHOICES = {
    "randers": lambda s: 1.0 + s,
    "exp": scalars.exp,
}

RANK_THRESHOLD = 1e-8


def functional_independence(m, omega, phi_choice="randers", samples=()):
    """Maximum numerical rank over samples of the 2 x 2n Jacobian of
    (F, F*phi(beta/F)) in (x, y); 2 means locally functionally
    independent (rank may drop on the measure-zero set y || b)."""
    m.require_F()
    phi = PHI_CHOICES[phi_choice] if isinstance(phi_choice, str) else phi_choice

    def fbar(x, y):
        f = m.F(x, y)
        return f * phi(scalars.dot(omega.b(x), y) / f)

    best = 0
    for at in samples:
        rows = []
        for fn in (m.F, fbar):
            jet = eval_jet(fn, at, JetOrder(1, 1))
            rows.append([jet.pvars((i,), ()) for i in range(at.n)]
                        + [jet.pvars((), (i,)) for i in range(at.n)])
        sv = np.linalg.svd(np.asarray(rows), compute_uv=False)
        rank = int(np.sum(sv > RANK_THRESHOLD * sv[0])) if sv[0] > 0 else 0
        best = max(best, rank)
    return best


def annihilation_check(m, omega, at, scheme="ad"):
    """(max |l_h G^h_ijk|, max |b_h G^h_ijk|) contraction residuals."""
    B = geometry.berwald_curvature(m, at, scheme).components
    ell = geometry.hilbert_form(m, at, scheme).components
    b = omega.values(at.x)
    r_ell = float(np.max(np.abs(np.einsum("hijk,h->ijk", B, ell))))
    r_b = float(np.max(np.abs(np.einsum("hijk,h->ijk", B, b))))
    return r_ell, r_b
