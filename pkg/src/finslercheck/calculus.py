"""Point-wise high-order differentiation of scalar fields on the slit
tangent bundle.

The default scheme evaluates the field on truncated Taylor scalars
(forward mode, exact to rounding).  A central finite-difference scheme with
Richardson extrapolation is available as an independent cross-check; its
step is order-adaptive, ``eps**(1/(k+4))`` scaled by coordinate size for a
partial of total order k, because a fixed first-derivative step loses all
accuracy beyond second order.

Fields are ordinary callables ``f(x, y)`` taking sequences of scalars and
written against :mod:`finslercheck.scalars`, so the same code runs on plain
floats and on Taylor scalars.  Coordinates of a :class:`TangentSample` may
themselves be Taylor scalars; jets then nest transparently (the engine
flattens the algebras), which is how the geometry pipeline differentiates
through spray coefficients.
"""

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import NonFiniteValue
from .taylor import TNum, algebra, _monomials
from . import scalars

EPS = float(np.finfo(float).eps)

MAX_KX = 2
MAX_KY = 4


@dataclass(frozen=True)
class JetOrder:
    """Maximum x- and y-derivative orders of a requested jet."""
    kx: int
    ky: int

    def __post_init__(self):
        if not (0 <= self.kx <= MAX_KX and 0 <= self.ky <= MAX_KY):
            raise ValueError(
                f"jet order ({self.kx}, {self.ky}) outside the supported "
                f"box (0..{MAX_KX}, 0..{MAX_KY})")


class TangentSample:
    """A base point x with a nonzero fiber vector y.

    Coordinates are floats for ordinary evaluation, or Taylor scalars when
    a jet is being taken through a derived field.
    """

    __slots__ = ("x", "y")

    def __init__(self, x, y):
        self.x = tuple(x)
        self.y = tuple(y)
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same dimension")
        ynorm = math.sqrt(sum(scalars.value(v) ** 2 for v in self.y))
        if not ynorm > 0.0:
            raise ValueError("fiber vector y must be nonzero")

    @property
    def n(self):
        return len(self.x)

    def is_symbolic(self):
        return any(isinstance(v, TNum) for v in self.x + self.y)

    def key(self):
        """Hashable identity for caching; float samples only."""
        return (self.x, self.y)

    def __repr__(self):
        return f"TangentSample(x={self.x}, y={self.y})"


# ---------------------------------------------------------------------------
# jet tables


class Jet:
    """Dense table of mixed partials of one scalar, per variable-group.

    ``partial(m1, m2, ...)`` takes one exponent tuple per group;
    ``pvars(v1, v2, ...)`` takes tuples of variable indices instead
    (e.g. ``pvars((0,), (1, 1))`` for d/dx0 d2/dy1dy1).  Entries are floats,
    or Taylor scalars when the jet was taken at a symbolic sample.
    """

    def __init__(self, nvars, caps, table):
        self.nvars = tuple(nvars)
        self.caps = tuple(caps)
        self.monos = tuple(_monomials(n, c) for n, c in zip(nvars, caps))
        self.index = tuple({m: i for i, m in enumerate(ms)}
                           for ms in self.monos)
        self.table = table  # ndarray indexed by per-group monomial position

    @property
    def value(self):
        return self.table[(0,) * len(self.nvars)]

    def partial(self, *exps):
        try:
            pos = tuple(idx[tuple(e)] for idx, e in zip(self.index, exps))
        except KeyError:
            raise KeyError(f"partial {exps} outside jet order {self.caps}")
        return self.table[pos]

    def pvars(self, *varlists):
        exps = []
        for n, vs in zip(self.nvars, varlists):
            e = [0] * n
            for v in vs:
                e[v] += 1
            exps.append(tuple(e))
        return self.partial(*exps)

    def check_finite(self, context=""):
        if self.table.dtype == object:
            ok = all(t.is_finite() for t in self.table.ravel())
        else:
            ok = bool(np.isfinite(self.table).all())
        if not ok:
            raise NonFiniteValue(
                f"non-finite derivative encountered{': ' + context if context else ''}")
        return self


def _seed_groups(groups, caps):
    """Create Taylor variables for each group, extending any algebra the
    input scalars already live in (nested differentiation)."""
    outer = None
    for g in groups:
        for v in g:
            if isinstance(v, TNum):
                if outer is None:
                    outer = v.alg
                elif v.alg is not outer:
                    raise ValueError("inputs from different Taylor algebras")
    new_blocks = tuple((len(g), c) for g, c in zip(groups, caps))
    if outer is None:
        ext = algebra(new_blocks)
        base = 0
    else:
        ext = outer.extended(new_blocks)
        base = len(outer.blocks)
    seeded = []
    for bi, g in enumerate(groups):
        vs = []
        for vi, v in enumerate(g):
            if isinstance(v, TNum):
                vs.append(ext.lift(v) + ext.variable(base + bi, vi, 0.0))
            else:
                vs.append(ext.variable(base + bi, vi, float(v)))
        seeded.append(tuple(vs))
    return outer, ext, seeded


def _extract(outer, ext, result, nvars, caps):
    """Turn the evaluated Taylor scalar into a partials table."""
    if not isinstance(result, TNum):
        result = ext.constant(scalars.value(result))
    if result.alg is not ext:
        result = ext.lift(result)
    monos = [_monomials(n, c) for n, c in zip(nvars, caps)]
    sizes = [len(ms) for ms in monos]
    weights = [np.array([math.prod(math.factorial(e) for e in m)
                         for m in ms]) for ms in monos]
    outer_size = 1 if outer is None else outer.size
    arr = result.c.reshape((outer_size,) + tuple(sizes))
    if outer is None:
        table = arr[0].copy()
        w = weights[0]
        for wk in weights[1:]:
            w = np.multiply.outer(w, wk)
        return Jet(nvars, caps, table * w)
    table = np.empty(tuple(sizes), dtype=object)
    for pos in product(*(range(s) for s in sizes)):
        w = math.prod(float(weights[k][p]) for k, p in enumerate(pos))
        table[pos] = TNum(outer, arr[(slice(None),) + pos].copy() * w)
    return Jet(nvars, caps, table)


def jet_of(fn, groups, caps, scheme="ad"):
    """Jet of ``fn(*groups)`` with one total-degree cap per group.

    The generic entry point behind :func:`eval_jet`; also used directly for
    (r, s)-profile derivatives and 1-form coefficient derivatives.
    """
    groups = tuple(tuple(g) for g in groups)
    nvars = tuple(len(g) for g in groups)
    if scheme == "ad":
        outer, ext, seeded = _seed_groups(groups, caps)
        result = fn(*seeded)
        return _extract(outer, ext, result, nvars, caps).check_finite()
    if scheme == "fd":
        return _fd_jet(fn, groups, caps).check_finite()
    raise ValueError(f"unknown differentiation scheme {scheme!r}")


def jet_of_many(fn, groups, caps, scheme="ad"):
    """Jets of a vector-valued ``fn`` (returns a sequence of scalars).

    The AD path seeds the inputs once and evaluates the whole vector in a
    single pass; FD differentiates each component separately.
    """
    groups = tuple(tuple(g) for g in groups)
    nvars = tuple(len(g) for g in groups)
    if scheme == "ad":
        outer, ext, seeded = _seed_groups(groups, caps)
        results = fn(*seeded)
        return [_extract(outer, ext, r, nvars, caps).check_finite()
                for r in results]
    if scheme == "fd":
        m = len(fn(*groups))
        return [_fd_jet(lambda *gs, i=i: fn(*gs)[i], groups, caps)
                .check_finite() for i in range(m)]
    raise ValueError(f"unknown differentiation scheme {scheme!r}")


def eval_jet(f, at, order, scheme="ad"):
    """All mixed partials of the scalar field ``f`` at ``at`` up to
    ``order`` (a :class:`JetOrder`).  Raises NonFiniteValue when the field
    or any partial is NaN/inf at the sample."""
    if not isinstance(order, JetOrder):
        order = JetOrder(*order)
    return jet_of(lambda x, y: f(x, y), (at.x, at.y),
                  (order.kx, order.ky), scheme=scheme)


# ---------------------------------------------------------------------------
# finite differences (independent oracle)


def fd_step(total_order):
    """Base step for a partial of the given total order."""
    return EPS ** (1.0 / (total_order + 4))


def fd_partial(fn, groups, varlists, order_hint=None):
    """One mixed partial by nested Richardson-extrapolated central
    differences.  ``varlists`` gives, per group, the variable indices to
    differentiate against, applied left to right (order is immaterial for
    smooth fields up to FD noise, which is what the symmetry cross-checks
    probe)."""
    flat = [float(v) for g in groups for v in g]
    sizes = [len(g) for g in groups]
    offs = np.cumsum([0] + sizes[:-1])
    fvars = [offs[gi] + v for gi, vs in enumerate(varlists) for v in vs]
    k = order_hint if order_hint is not None else len(fvars)
    h0 = fd_step(max(k, 1))

    def split(z):
        out, p = [], 0
        for s in sizes:
            out.append(tuple(z[p:p + s]))
            p += s
        return out

    def rec(z, vs):
        if not vs:
            return scalars.value(fn(*split(z)))
        v, rest = vs[-1], vs[:-1]
        h = h0 * (1.0 + abs(z[v]))

        def at(dz):
            zz = list(z)
            zz[v] += dz
            return rec(zz, rest)

        d_h = (at(h) - at(-h)) / (2.0 * h)
        d_h2 = (at(h / 2.0) - at(-h / 2.0)) / h
        return (4.0 * d_h2 - d_h) / 3.0

    return rec(flat, fvars)


def _fd_jet(fn, groups, caps):
    nvars = tuple(len(g) for g in groups)
    monos = [_monomials(n, c) for n, c in zip(nvars, caps)]
    table = np.zeros(tuple(len(ms) for ms in monos))
    total = sum(caps)
    for pos in product(*(range(len(ms)) for ms in monos)):
        exps = [monos[k][p] for k, p in enumerate(pos)]
        varlists = [tuple(v for v, e in enumerate(m) for _ in range(e))
                    for m in exps]
        table[pos] = fd_partial(fn, groups, varlists, order_hint=total)
    return Jet(nvars, caps, table)


# ---------------------------------------------------------------------------


HOMOGENEITY_SCALES = (0.5, 2.0, 3.7)


def homogeneity_check(f, at, degree):
    """Normalised residual of positive ``degree``-homogeneity of f in y."""
    f0 = scalars.value(f(at.x, at.y))
    worst = 0.0
    for lam in HOMOGENEITY_SCALES:
        fl = scalars.value(f(at.x, tuple(lam * v for v in at.y)))
        worst = max(worst, abs(fl - lam ** degree * f0))
    return worst / (1.0 + abs(f0))
