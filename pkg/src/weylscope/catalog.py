"""Built-in metrics with exact jets and documented ground truth.

Spheres are realized by stereographic charts and products assembled
blockwise, so each chart covers its manifold up to a measure-zero set;
the per-entry coverage note records what the quadrature anchors rely on.
Kahler entries are built from potentials where the Derdzinski ansatz needs
them, and all catalog charts are compatible with the standard complex
structure J0, which is what makes the stored Kahler forms exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CatalogError, PositivityError
from .geometry import (Box, MetricField, curvature_pack, kahler_form_jets,
                       metric_from_components, metric_from_kahler_potential)

_FS_POTENTIAL = "log(1 + x0^2 + x1^2 + x2^2 + x3^2)"
_ZERO = "0"

# fs_perturbed keeps s > 0 for eps up to this bound (grid-scanned anyway)
MAX_PERTURBATION = 0.05


@dataclass
class CatalogEntry:
    name: str
    metric: MetricField
    coverage: str
    ground_truth: dict
    parameters: dict = field(default_factory=dict)

    @property
    def kahler(self):
        return self.ground_truth.get("kahler", False)

    def kahler_form_jets(self, points, order):
        if not self.kahler:
            raise CatalogError(f"catalog entry '{self.name}' is not Kahler")
        return kahler_form_jets(self.metric, points, order)

    def summary(self):
        out = {"name": self.name, "coverage": self.coverage}
        out.update(self.ground_truth)
        if self.parameters:
            out["parameters"] = self.parameters
        return out


def _flat():
    exprs = ["1", _ZERO, _ZERO, _ZERO, "1", _ZERO, _ZERO, "1", _ZERO, "1"]
    m = metric_from_components(exprs, Box.cube(5.0), name="flat")
    return CatalogEntry(
        "flat", m, "global chart of R^4",
        {"s": 0.0, "wplus_eigenvalues": (0.0, 0.0, 0.0), "einstein": True,
         "einstein_constant": 0.0, "kahler": True, "det_sign": "zero"})


def _round_s4():
    w = "4/(1 + x0^2 + x1^2 + x2^2 + x3^2)^2"
    exprs = [w, _ZERO, _ZERO, _ZERO, w, _ZERO, _ZERO, w, _ZERO, w]
    m = metric_from_components(exprs, Box.cube(10.0), name="round_s4")
    return CatalogEntry(
        "round_s4", m,
        "stereographic chart covers S^4 minus a point; the [-10,10]^4 box "
        "truncates a relative volume tail of about 1e-3",
        {"s": 12.0, "wplus_eigenvalues": (0.0, 0.0, 0.0), "einstein": True,
         "einstein_constant": 3.0, "kahler": False, "det_sign": "zero"})


def _s2xs2():
    w1 = "4/(1 + x0^2 + x1^2)^2"
    w2 = "4/(1 + x2^2 + x3^2)^2"
    exprs = [w1, _ZERO, _ZERO, _ZERO, w1, _ZERO, _ZERO, w2, _ZERO, w2]
    m = metric_from_components(exprs, Box.cube(10.0), name="s2xs2")
    return CatalogEntry(
        "s2xs2", m,
        "product of stereographic charts covers S^2 x S^2 minus a "
        "measure-zero set",
        {"s": 4.0, "wplus_eigenvalues": (2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0),
         "einstein": True, "einstein_constant": 1.0, "kahler": True,
         "det_sign": "positive", "det": 2.0 / 27.0})


def _s2xs2_unequal(a=1.0, b=2.0):
    a, b = float(a), float(b)
    if a <= 0 or b <= 0:
        raise CatalogError(f"s2xs2_unequal radii must be positive, got ({a}, {b})")
    # i ddbar of c log(1+|z|^2) is the round 2-sphere of radius sqrt(c/2)
    phi = (f"{2 * a * a:.17g}*log(1 + x0^2 + x1^2)"
           f" + {2 * b * b:.17g}*log(1 + x2^2 + x3^2)")
    m = metric_from_kahler_potential(phi, Box.cube(10.0),
                                     name=f"s2xs2_unequal:{a:g}:{b:g}")
    s = 2.0 / a ** 2 + 2.0 / b ** 2
    return CatalogEntry(
        m.name, m,
        "product of stereographic charts, radii a and b; covers the "
        "product of spheres minus a measure-zero set",
        {"s": s, "wplus_eigenvalues": (s / 6.0, -s / 12.0, -s / 12.0),
         "einstein": a == b, "einstein_constant": 1.0 / a ** 2 if a == b else None,
         "kahler": True, "det_sign": "positive", "det": s ** 3 / 864.0},
        parameters={"a": a, "b": b})


def _fubini_study():
    m = metric_from_kahler_potential(_FS_POTENTIAL, Box.cube(12.0),
                                     name="fubini_study")
    return CatalogEntry(
        "fubini_study", m,
        "affine chart covers CP^2 minus a projective line (measure zero); "
        "the [-12,12]^4 box truncates a relative tail below 2e-2",
        {"s": 12.0, "wplus_eigenvalues": (2.0, -1.0, -1.0), "einstein": True,
         "einstein_constant": 3.0, "kahler": True, "det_sign": "positive",
         "det": 2.0})


def _bump_expression(seed):
    """Seeded quadratic-times-Gaussian bump, reproducible as source text."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, size=15).round(6)
    terms = [f"{c[0]:.6f}"]
    k = 1
    for i in range(4):
        terms.append(f"{c[k]:.6f}*x{i}")
        k += 1
    for i in range(4):
        for j in range(i, 4):
            terms.append(f"{c[k]:.6f}*x{i}*x{j}")
            k += 1
    poly = " + ".join(terms).replace("+ -", "- ")
    return f"({poly})*exp(-(x0^2 + x1^2 + x2^2 + x3^2))"


_scan_cache = {}


def _positive_s_scan(metric, grid_n=10, chunk=2048):
    """Minimum scalar curvature over a grid_n^4 grid of the domain."""
    pts = metric.domain.grid(grid_n)
    smin = np.inf
    for i in range(0, len(pts), chunk):
        pack = curvature_pack(metric, pts[i:i + chunk], 0)
        smin = min(smin, float(pack.s[..., 0].min()))
    return smin


def _fs_perturbed(eps=0.03, seed=2):
    eps, seed = float(eps), int(seed)
    if eps < 0:
        raise CatalogError(f"perturbation amplitude must be >= 0, got {eps}")
    name = f"fs_perturbed:{eps:g}:{seed}"
    phi = f"{_FS_POTENTIAL} + {eps:.17g}*{_bump_expression(seed)}"
    m = metric_from_kahler_potential(phi, Box.cube(1.0), name=name)
    key = (eps, seed)
    if key not in _scan_cache:
        _scan_cache[key] = _positive_s_scan(m)
    if _scan_cache[key] <= 0:
        raise CatalogError(
            f"perturbation eps={eps:g} drives the scalar curvature to "
            f"{_scan_cache[key]:.4g} <= 0 on the domain grid; reduce eps "
            f"(<= {MAX_PERTURBATION} is safe)")
    return CatalogEntry(
        name, m,
        "perturbed Fubini-Study affine chart on [-1,1]^4 (local patch, not "
        "a closed-manifold cover; no quadrature anchors)",
        {"s": None, "s_positive": True, "wplus_eigenvalues": None,
         "einstein": False, "einstein_constant": None, "kahler": True,
         "det_sign": "positive"},
        parameters={"eps": eps, "seed": seed})


_BUILDERS = {
    "flat": (_flat, 0),
    "round_s4": (_round_s4, 0),
    "s2xs2": (_s2xs2, 0),
    "s2xs2_unequal": (_s2xs2_unequal, 2),
    "fubini_study": (_fubini_study, 0),
    "fs_perturbed": (_fs_perturbed, 2),
}


def catalog_get(name) -> CatalogEntry:
    """Look up a catalog entry.

    Parametrized families use colon syntax: ``s2xs2_unequal:1:2``,
    ``fs_perturbed:0.05:7``.  Bare family names build the default instance.
    """
    parts = str(name).split(":")
    base, args = parts[0], parts[1:]
    if base not in _BUILDERS:
        raise CatalogError(f"unknown catalog metric '{base}' "
                           f"(known: {', '.join(sorted(_BUILDERS))})")
    builder, arity = _BUILDERS[base]
    if args and len(args) != arity:
        raise CatalogError(
            f"catalog family '{base}' takes {arity} parameters, got {len(args)}")
    try:
        params = [float(a) for a in args]
    except ValueError as err:
        raise CatalogError(f"bad parameter in '{name}': {err}") from err
    return builder(*params)


def list_catalog():
    """Default catalog instances, in stable name order."""
    return [catalog_get(n) for n in sorted(_BUILDERS)]


def validate_entry(entry: CatalogEntry, n_points=100, seed=0, tol=1e-8):
    """Reproduce the ground-truth record from the engine at seeded points.

    Returns a dict of worst-case deviations; raises nothing (callers
    assert).  Used by the regression suite and the CLI catalog command.
    """
    from .weyl import decompose_jets, sym3_eigenvalues
    from .geometry import covariant_derivative_core
    from .jets import algebra as ja

    rng = np.random.default_rng(seed)
    pts = entry.metric.domain.sample(n_points, rng, margin=0.05)
    gt = entry.ground_truth
    out = {}

    pack = curvature_pack(entry.metric, pts, 0)
    dec = decompose_jets(pack)
    s = pack.s[..., 0]
    if gt.get("s") is not None:
        out["s_dev"] = float(np.abs(s - gt["s"]).max())
    if gt.get("s_positive"):
        out["s_min"] = float(s.min())
    lam = sym3_eigenvalues(dec.wplus[..., 0])
    if gt.get("wplus_eigenvalues") is not None:
        out["eig_dev"] = float(
            np.abs(lam - np.array(gt["wplus_eigenvalues"])).max())
    det = lam[..., 0] * lam[..., 1] * lam[..., 2]
    if gt.get("det") is not None:
        out["det_dev"] = float(np.abs(det - gt["det"]).max())
    if gt["det_sign"] == "positive":
        out["det_min"] = float(det.min())
    elif gt["det_sign"] == "zero":
        out["det_absmax"] = float(np.abs(det).max())

    if gt["einstein"]:
        lam_ric = gt.get("einstein_constant")
        ric = pack.ricci[..., 0]
        g0 = pack.g[..., 0]
        if lam_ric is not None:
            out["einstein_dev"] = float(np.abs(ric - lam_ric * g0).max())
        else:
            out["einstein_dev"] = float(np.abs(pack.ricci0[..., 0]).max())

    if gt.get("kahler"):
        pack1 = curvature_pack(entry.metric, pts, 1)
        om = entry.kahler_form_jets(pts, 2)
        nab = covariant_derivative_core(ja.trunc(om, 1), "dd",
                                        ja.trunc(pack1.gamma, 0), 0)
        out["kahler_parallel_dev"] = float(np.abs(nab[..., 0]).max())
    return out
