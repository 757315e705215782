"""Theorem-level verifiers.

* scalar-curvature fit: least-structure fit of the Jacobi endomorphism to
  K (F^2 I - y ycol) with metric-lowered y; constancy and residual feed the
  no-parallel-form argument for K != 0.
* mean Berwald rank: numerical rank of E_jk per sample (Landsberg metrics
  carrying a parallel form must stay at rank <= n-2).
* parallel obstruction scan: for each base point, stack the linear
  constraints a parallel form's coefficients must satisfy (Berwald-curvature
  contractions and curvature rows) and measure the kernel.  Kernel dimension
  0 at a single x already rules out a parallel form globally; when some x
  keeps a positive kernel, the intersection of kernels over all scanned x is
  the fallback witness.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import geometry
from .errors import InsufficientSamples
from .sampling import base_points, fiber_samples, map_samples
from .calculus import TangentSample

__all__ = [
    "ScalarCurvatureVerdict", "ScalarCurvatureFit", "scalar_curvature_fit",
    "mean_berwald_rank", "KernelScanReport", "parallel_obstruction_scan",
    "landsberg_residual", "kernel_residual",
]


class ScalarCurvatureVerdict(Enum):
    SCALAR_CURVATURE = "ScalarCurvature"
    NOT_SCALAR = "NotScalar"


@dataclass
class ScalarCurvatureFit:
    k_values: list
    max_residual: float
    scale: float
    tolerance: float
    verdict: ScalarCurvatureVerdict
    k_min: float = 0.0
    k_max: float = 0.0

    @property
    def k_spread(self):
        return self.k_max - self.k_min

    @property
    def passed(self):
        return self.verdict is ScalarCurvatureVerdict.SCALAR_CURVATURE


def scalar_curvature_fit(m, samples, tol=1e-6, scheme="ad"):
    """Fit K per sample from trace(Phi) = K (n-1) F^2 and measure the
    residual of Phi - K (F^2 d^h_i - y_i y^h) with metric-lowered y_i."""
    n = m.n
    ks, worst, scale = [], 0.0, 1.0
    for at in samples:
        phi = geometry.jacobi_endomorphism(m, at, scheme).components
        f2 = 2.0 * geometry.energy(m, at)
        y_up = np.asarray(at.y, dtype=float)
        y_low = geometry.lower_fiber_index(m, at, y_up, scheme)
        k = float(np.trace(phi)) / ((n - 1) * f2)
        model = k * (f2 * np.eye(n) - np.outer(y_up, y_low))
        worst = max(worst, float(np.max(np.abs(phi - model))))
        scale = max(scale, f2 * (1.0 + abs(k)))
        ks.append(k)
    verdict = (ScalarCurvatureVerdict.SCALAR_CURVATURE
               if worst <= tol * scale else ScalarCurvatureVerdict.NOT_SCALAR)
    return ScalarCurvatureFit(ks, worst, scale, tol, verdict,
                              k_min=min(ks), k_max=max(ks))


RANK_THRESHOLD = 1e-7

# singular values below this absolute size are numerical zeros (AD noise is
# ~1e-14 on O(1) tensors); a relative threshold alone would hallucinate rank
# out of an all-noise matrix
ZERO_FLOOR = 1e-10


def mean_berwald_rank(m, samples, threshold=RANK_THRESHOLD, scheme="ad"):
    """Maximum numerical rank of the mean Berwald curvature over samples."""
    best = 0
    per_sample = []
    for at in samples:
        E = geometry.mean_berwald(m, at, scheme).components
        rank, _ = _rank_of(E, threshold)
        per_sample.append(rank)
        best = max(best, rank)
    return best, per_sample


@dataclass
class KernelScanReport:
    """Per-base-point kernel data of the stacked parallel-form constraints."""

    threshold: float
    rows_mode: str
    per_x: list = field(default_factory=list)
    matrices: list = field(default_factory=list)
    intersection_kernel_dim: int = 0

    @property
    def max_kernel_dim(self):
        return max(r["kernel_dim"] for r in self.per_x)

    @property
    def branch(self):
        """Which witness fired: every x separately, or only their
        intersection, or neither."""
        if all(r["kernel_dim"] == 0 for r in self.per_x):
            return "pointwise"
        if self.intersection_kernel_dim == 0:
            return "intersection"
        return "inconclusive"

    @property
    def obstructed(self):
        return self.branch in ("pointwise", "intersection")


def _rank_of(mat, threshold):
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] <= ZERO_FLOOR:
        return 0, sv
    return int(np.sum(sv > max(threshold * sv[0], ZERO_FLOOR))), sv


def parallel_obstruction_scan(m, x_points=5, y_per_point=20,
                              threshold=RANK_THRESHOLD, rows="both",
                              seed=0, scheme="ad", threads=1):
    """Stack b |-> G^h_ijk b_h and b |-> R^h_jk b_h rows over fiber samples
    at each base point and measure the kernel dimension (columns = n).

    ``x_points`` may be an integer (seeded base points) or an explicit list
    of base points.  ``rows`` selects which constraints enter: "berwald",
    "curvature", or "both".  Base points are processed independently and
    may be spread over a thread pool.
    """
    n = m.n
    if y_per_point < n + 2:
        raise InsufficientSamples(
            f"scan needs at least n+2 = {n + 2} fiber samples per point")
    if rows not in ("both", "berwald", "curvature"):
        raise ValueError(f"unknown row selection {rows!r}")
    if isinstance(x_points, int):
        radius = m.domain.default_sample_radius()
        xs = base_points(n, x_points, seed, radius)
    else:
        xs = [tuple(x) for x in x_points]
    ys = fiber_samples(n, y_per_point, seed + 104729)
    triples = [(i, j, k) for i in range(n) for j in range(i, n)
               for k in range(j, n)]

    def rows_for(x):
        rows_x = []
        for y in ys:
            at = TangentSample(x, y)
            if rows in ("both", "berwald"):
                B = geometry.berwald_curvature(m, at, scheme).components
                for (i, j, k) in triples:
                    rows_x.append(B[:, i, j, k])
            if rows in ("both", "curvature"):
                R = geometry.curvature_R(m, at, scheme).components
                for j in range(n):
                    for k in range(j + 1, n):
                        rows_x.append(R[:, j, k])
        return np.array(rows_x)

    report = KernelScanReport(threshold=threshold, rows_mode=rows)
    mats = map_samples(rows_for, xs, threads)
    for x, mat in zip(xs, mats):
        rank, sv = _rank_of(mat, threshold)
        report.per_x.append({
            "x": tuple(x), "rows": mat.shape[0],
            "singular_values": [float(v) for v in sv],
            "rank": rank, "kernel_dim": n - rank,
        })
        report.matrices.append(mat)
    total_rank, _ = _rank_of(np.vstack(mats), threshold)
    report.intersection_kernel_dim = n - total_rank
    return report


def kernel_residual(report, x_index, b):
    """|M b|_inf / max-row-scale for a candidate kernel vector at one x;
    small values certify that b satisfies all stacked constraints.  An
    all-noise matrix (scale below the zero floor) constrains nothing."""
    mat = report.matrices[x_index]
    b = np.asarray(b, dtype=float)
    row_scale = float(np.max(np.abs(mat)))
    if row_scale <= ZERO_FLOOR:
        return 0.0
    return float(np.max(np.abs(mat @ b))) / row_scale


def landsberg_residual(m, samples, scheme="ad"):
    """max |L_ijk| over the samples (classification datum)."""
    worst = 0.0
    for at in samples:
        worst = max(worst, geometry.landsberg_tensor(m, at, scheme).max_abs())
    return worst
