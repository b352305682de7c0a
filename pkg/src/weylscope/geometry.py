"""Chart-level metric fields and curvature in jet arithmetic.

A :class:`MetricField` answers one question: the jets of its components at
a batch of chart points, to a requested order.  Everything downstream
(Christoffel symbols, Riemann curvature, covariant derivatives, conformal
rescalings) is a pure function of those jets, so derived metrics - Kahler
potentials, Derdzinski rescalings, spectral conformal factors - are just
providers that consume spare derivative orders of their sources.

Sign conventions, fixed so the round 4-sphere has scalar curvature +12:

    R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
                + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}
    R_{abcd} = g_{ae} R^e_{bcd},   Ric_{bd} = g^{ac} R_{abcd},
    s = g^{bd} Ric_{bd}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (InputError, OrderExhaustedError, PositivityError)
from .jets import algebra as ja
from .jets import expr as jx

# Derivative orders consumed along the standard chain.  christoffel eats one
# metric order, riemann two, every covariant derivative one more; providers
# derived from curvature data (Derdzinski, spectral factors) eat two.
CHRISTOFFEL_COST = 1
RIEMANN_COST = 2

# Standard integrable complex structure of the chart, z1 = x0 + i x1,
# z2 = x2 + i x3, as the mixed tensor J_a^b (J maps d/dx0 -> d/dx1, ...).
J0 = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])


@dataclass(frozen=True)
class Box:
    """Closed coordinate box, the declared chart domain."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != 4 or len(self.hi) != 4:
            raise InputError("domain box needs 4 coordinate intervals")
        if any(not (l < h) for l, h in zip(self.lo, self.hi)):
            raise InputError("domain box intervals must be non-degenerate")

    @classmethod
    def cube(cls, half_width):
        return cls((-half_width,) * 4, (half_width,) * 4)

    @classmethod
    def from_json(cls, data):
        if len(data) != 4:
            raise InputError("domain must list 4 intervals")
        return cls(tuple(float(i[0]) for i in data),
                   tuple(float(i[1]) for i in data))

    def to_json(self):
        return [[lo, hi] for lo, hi in zip(self.lo, self.hi)]

    @property
    def center(self):
        return np.array([(l + h) / 2 for l, h in zip(self.lo, self.hi)])

    def contains(self, points, margin=0.0):
        """Membership test; margin is a fraction of each interval width."""
        pts = np.atleast_2d(points)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        pad = margin * (hi - lo)
        return np.all((pts >= lo + pad) & (pts <= hi - pad), axis=-1)

    def grid(self, n, margin=1e-3):
        """Row-major n^4 grid strictly inside the box."""
        if n <= 0:
            return np.empty((0, 4))
        axes = []
        for lo, hi in zip(self.lo, self.hi):
            pad = margin * (hi - lo)
            axes.append(np.linspace(lo + pad, hi - pad, n))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def sample(self, n, rng, margin=1e-3):
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        pad = margin * (hi - lo)
        return rng.uniform(lo + pad, hi - pad, size=(n, 4))

    @property
    def volume(self):
        return float(np.prod(np.array(self.hi) - np.array(self.lo)))


def _leading_minors_positive(g0):
    """Vectorized positive-definiteness check on value parts (B,4,4)."""
    ok = g0[..., 0, 0] > 0
    for d in (2, 3, 4):
        ok &= np.linalg.det(g0[..., :d, :d]) > 0
    return ok


class MetricField:
    """Symmetric rank-2 tensor field on a chart, queryable for component jets.

    Instances are immutable after construction and cache the highest-order
    jets computed per batch of points, so repeated queries along a pipeline
    are free.
    """

    def __init__(self, provider, domain, provenance, name="metric",
                 available_order=ja.MAX_ORDER, metadata=None):
        self._provider = provider
        self.domain = domain
        self.provenance = provenance
        self.name = name
        self.available_order = available_order
        self.metadata = metadata or {}
        self._cache = {}

    def __repr__(self):
        return f"MetricField({self.name!r}, provenance={self.provenance!r})"

    def component_jets(self, points, order):
        """Jets of g_ab at ``points`` (B,4), shape (B,4,4,ncoef(order)).

        Raises :class:`OrderExhaustedError` beyond the available order and
        :class:`PositivityError` when the metric fails to be positive
        definite at any queried point.
        """
        if order > self.available_order:
            raise OrderExhaustedError(
                f"metric '{self.name}' provides jets to order "
                f"{self.available_order}, requested {order}")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        key = points.tobytes()
        hit = self._cache.get(key)
        if hit is not None and hit[0] >= order:
            return ja.trunc(hit[1], order)
        g = self._provider(points, order)
        ok = _leading_minors_positive(g[..., 0])
        if not np.all(ok):
            bad = points[~ok][0]
            raise PositivityError(
                f"metric '{self.name}' is not positive definite at "
                f"{tuple(np.round(bad, 6))} (leading principal minor <= 0)")
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[key] = (order, g)
        return g

    def at(self, point):
        """Value-part matrix at a single point."""
        return self.component_jets(np.asarray(point)[None, :], 0)[0, :, :, 0]


@dataclass
class TensorJet:
    """Tensor of jets at one chart point.

    ``indices`` is a string over {'u','d'} declaring the variance of each
    slot, e.g. Christoffel symbols are 'udd'.
    """

    components: np.ndarray   # (*tensor_shape, ncoef)
    indices: str
    point: np.ndarray
    order: int

    @property
    def value(self):
        return self.components[..., 0]


def _as_expression(e):
    return jx.parse_expression(e) if isinstance(e, str) else e


def metric_from_components(exprs, domain, name="components"):
    """Metric from 10 expressions for g_ab, a <= b, row-major upper triangle."""
    exprs = [_as_expression(e) for e in exprs]
    if len(exprs) != 10:
        raise InputError(f"expected 10 component expressions, got {len(exprs)}")
    pairs = [(a, b) for a in range(4) for b in range(a, 4)]

    def provider(points, order):
        n = ja.ncoef(order)
        g = np.zeros(points.shape[:-1] + (4, 4, n))
        for (a, b), e in zip(pairs, exprs):
            comp = jx.eval_jets(e, points, order)
            g[..., a, b, :] = comp
            if a != b:
                g[..., b, a, :] = comp
        return g

    m = MetricField(provider, domain, "explicit-components", name=name,
                    metadata={"exprs": [jx.to_source(e) for e in exprs]})
    m.at(domain.center)   # positive definite at the center, or refuse
    return m


def metric_from_kahler_potential(phi, domain, name="potential"):
    """Riemannian metric of the Kahler form i ddbar(phi) for the chart's
    standard complex structure z1 = x0 + i x1, z2 = x2 + i x3.

    Component jets of order k consume jets of phi to order k + 2; that is
    how order-4 metric jets force order-6 potential jets internally.
    """
    phi = _as_expression(phi)

    def provider(points, order):
        tab_hi = ja.tables(order + 2)
        tab = ja.tables(order)
        pj = jx.eval_jets(phi, points, order + 2)
        d2 = [[ja.diff(ja.diff(pj, i, tab_hi), j, ja.tables(order + 1))
               for j in range(4)] for i in range(4)]
        n = ja.ncoef(order)
        g = np.zeros(points.shape[:-1] + (4, 4, n))
        for i in range(2):
            for j in range(2):
                u_i, v_i, u_j, v_j = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
                re2 = 0.5 * (d2[u_i][u_j] + d2[v_i][v_j])   # 2 Re h_{i jbar}
                im2 = 0.5 * (d2[u_i][v_j] - d2[v_i][u_j])   # 2 Im h_{i jbar}
                g[..., u_i, u_j, :] = re2
                g[..., v_i, v_j, :] = re2
                g[..., u_i, v_j, :] = im2
                g[..., v_i, u_j, :] = -im2
        return g

    m = MetricField(provider, domain, "kähler-potential", name=name,
                    available_order=ja.MAX_ORDER - 2,
                    metadata={"exprs": [jx.to_source(phi)], "J0": J0})
    m.at(domain.center)
    return m


def kahler_form_jets(metric, points, order):
    """omega_ab = J0_a^c g_cb for a potential-built (or J0-compatible) metric."""
    g = metric.component_jets(points, order)
    return np.einsum("ac,...cbZ->...abZ", J0, g)


def conformal_rescale(h, f, name=None):
    """The metric g = f^{-2} h.

    ``f`` may be an expression (or source text), a callable
    ``(points, order) -> (B, ncoef)`` of jets, or an object with such a
    ``jets`` method.  Positivity of f is enforced at evaluation time.
    """
    if isinstance(f, (str, jx.Expression)):
        e = _as_expression(f)
        factor = lambda points, order: jx.eval_jets(e, points, order)
        f_avail = ja.MAX_ORDER
        f_desc = jx.to_source(e)
    elif hasattr(f, "jets"):
        factor = f.jets
        f_avail = getattr(f, "available_order", ja.MAX_ORDER)
        f_desc = getattr(f, "description", repr(f))
    else:
        factor = f
        f_avail = getattr(f, "available_order", ja.MAX_ORDER)
        f_desc = getattr(f, "description", "callable")

    def provider(points, order):
        tab = ja.tables(order)
        fj = factor(points, order)
        if np.any(fj[..., 0] <= 0):
            raise PositivityError("conformal factor f must be positive")
        w = ja.jet_pow(fj, -2.0, tab)
        hj = h.component_jets(points, order)
        return ja.mul(w[..., None, None, :], hj, tab)

    m = MetricField(provider, h.domain, "conformal-rescale",
                    name=name or f"{h.name}/f^2",
                    available_order=min(h.available_order, f_avail),
                    metadata={"source": h, "factor": factor,
                              "factor_desc": f_desc})
    return m


# --------------------------------------------------------------------------
# batched curvature core

def christoffel_core(g, ginv, order):
    """Gamma^a_bc jets at ``order`` from metric jets at ``order + 1``."""
    tab_hi = ja.tables(order + 1)
    tab = ja.tables(order)
    dg = np.stack([ja.diff(g, b, tab_hi) for b in range(4)], axis=-4)
    # dg[b, d, c] = d_b g_dc ; assemble d_b g_dc + d_c g_db - d_d g_bc
    t = (dg + np.einsum("...cdbZ->...bdcZ", dg)
         - np.einsum("...dbcZ->...bdcZ", dg))
    return 0.5 * ja.jet_einsum("ad,bdc->abc", ja.trunc(ginv, order), t, tab)


def riemann_core(gamma, g, order):
    """Fully covariant R_abcd jets at ``order`` from Gamma at ``order + 1``."""
    tab_hi = ja.tables(order + 1)
    tab = ja.tables(order)
    dgamma = np.stack([ja.diff(gamma, c, tab_hi) for c in range(4)], axis=-5)
    # dgamma[c, a, d, b] = d_c Gamma^a_{db}
    gam = ja.trunc(gamma, order)
    rup = (np.einsum("...cadbZ->...abcdZ", dgamma)
           - np.einsum("...dacbZ->...abcdZ", dgamma)
           + ja.jet_einsum("ace,edb->abcd", gam, gam, tab)
           - ja.jet_einsum("ade,ecb->abcd", gam, gam, tab))
    return ja.jet_einsum("ae,ebcd->abcd", ja.trunc(g, order), rup, tab)


@dataclass
class CurvaturePack:
    """Everything the Weyl machinery needs at a batch of points, as jets."""

    order: int
    points: np.ndarray
    g: np.ndarray        # order
    ginv: np.ndarray     # order
    gamma: np.ndarray    # order (computed from metric jets at order+1)
    riemann: np.ndarray  # order
    ricci: np.ndarray    # order
    s: np.ndarray        # order
    ricci0: np.ndarray   # order
    g_hi: np.ndarray = field(default=None, repr=False)      # order + 2
    ginv_hi: np.ndarray = field(default=None, repr=False)   # order + 2
    gamma_hi: np.ndarray = field(default=None, repr=False)  # order + 1


def curvature_pack(metric, points, order):
    """Metric, connection and curvature jets at ``order`` (metric queried at
    ``order + 2``; fails loudly if that exhausts the available order)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k2 = order + RIEMANN_COST
    g_hi = metric.component_jets(points, k2)
    tab_hi = ja.tables(k2)
    tab = ja.tables(order)
    ginv_hi = ja.mat_inv(g_hi, tab_hi)
    gamma_hi = christoffel_core(g_hi, ginv_hi, order + 1)
    riem = riemann_core(gamma_hi, ja.trunc(g_hi, order + 1), order)
    g = ja.trunc(g_hi, order)
    ginv = ja.trunc(ginv_hi, order)
    ric = ja.jet_einsum("ac,abcd->bd", ginv, riem, tab)
    s = ja.jet_einsum("bd,bd->", ginv, ric, tab)
    ric0 = ric - 0.25 * ja.mul(s[..., None, None, :], g, tab)
    return CurvaturePack(order, points, g, ginv, ja.trunc(gamma_hi, order),
                         riem, ric, s, ric0,
                         g_hi=g_hi, ginv_hi=ginv_hi, gamma_hi=gamma_hi)


_LETTERS = "abcdfghij"


def covariant_derivative_core(t, indices, gamma, order):
    """nabla_e T, jets at ``order`` from T at ``order + 1`` and Gamma at
    ``order``.  The new covariant slot comes first."""
    tab_hi = ja.tables(order + 1)
    tab = ja.tables(order)
    rank = len(indices)
    batch = t.shape[:-(rank + 1)]
    out = np.stack([ja.diff(t, e, tab_hi) for e in range(4)],
                   axis=len(batch))
    tl = ja.trunc(t, order)
    letters = _LETTERS[:rank]
    for i, variance in enumerate(indices):
        slot = letters[i]
        tsub = letters.replace(slot, "x")
        if variance == "d":
            out = out - ja.jet_einsum(f"xe{slot},{tsub}->e{letters}",
                                      gamma, tl, tab)
        elif variance == "u":
            out = out + ja.jet_einsum(f"{slot}ex,{tsub}->e{letters}",
                                      gamma, tl, tab)
        else:
            raise InputError(f"index variance must be 'u' or 'd', got {variance!r}")
    return out


# --------------------------------------------------------------------------
# public single-point operations

def christoffel(g: MetricField, point, order) -> TensorJet:
    """Gamma^a_bc as a TensorJet at one chart point."""
    points = np.asarray(point, dtype=float)[None, :]
    gj = g.component_jets(points, order + CHRISTOFFEL_COST)
    ginv = ja.mat_inv(gj, ja.tables(order + CHRISTOFFEL_COST))
    gam = christoffel_core(gj, ginv, order)
    return TensorJet(gam[0], "udd", points[0], order)


def riemann(g: MetricField, point, order) -> TensorJet:
    """Fully covariant curvature R_abcd as a TensorJet at one point."""
    pack = curvature_pack(g, np.asarray(point, dtype=float)[None, :], order)
    return TensorJet(pack.riemann[0], "dddd", pack.points[0], order)


def covariant_derivative(g: MetricField, tensor_field, point, order,
                         indices=None) -> TensorJet:
    """nabla T for a tensor field provider.

    ``tensor_field`` is either a callable ``(points, order) -> jets`` paired
    with an ``indices`` string, or an object exposing ``jets`` and
    ``indices`` attributes.
    """
    if indices is None:
        indices = tensor_field.indices
        fn = tensor_field.jets
    else:
        fn = tensor_field
    points = np.asarray(point, dtype=float)[None, :]
    t = fn(points, order + 1)
    gj = g.component_jets(points, order + 1)
    ginv = ja.mat_inv(gj, ja.tables(order + 1))
    gam = christoffel_core(gj, ginv, order)
    out = covariant_derivative_core(t, indices, gam, order)
    return TensorJet(out[0], "d" + indices, points[0], order)


# --------------------------------------------------------------------------
# metric files

def metric_to_json(m: MetricField) -> dict:
    kind = {"explicit-components": "components",
            "kähler-potential": "potential"}.get(m.provenance)
    if kind is None:
        raise InputError(
            f"only component and potential metrics serialize; "
            f"got provenance {m.provenance!r}")
    return {"kind": kind, "exprs": list(m.metadata["exprs"]),
            "domain": m.domain.to_json(), "name": m.name}


def metric_from_json(data) -> MetricField:
    try:
        kind = data["kind"]
        exprs = data["exprs"]
        domain = Box.from_json(data["domain"])
        name = data.get("name", kind)
    except (KeyError, TypeError) as err:
        raise InputError(f"malformed metric file: {err}") from err
    if kind == "components":
        return metric_from_components(exprs, domain, name=name)
    if kind == "potential":
        if len(exprs) != 1:
            raise InputError("potential metric files carry exactly one expression")
        return metric_from_kahler_potential(exprs[0], domain, name=name)
    raise InputError(f"unknown metric kind {kind!r}")


def load_metric(path) -> MetricField:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise InputError(f"cannot read metric file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InputError(f"metric file {path} is not valid JSON: {err}") from err
    return metric_from_json(data)
