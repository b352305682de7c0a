"""Pointwise Lambda^2 machinery: Hodge star, Lambda+/- splitting, curvature
operator blocks, W+ spectral analysis, thresholds, eigenforms.

Conventions pinned here and embedded in every CLI report:

* inner product on 2-forms: <phi, psi> = (1/2) phi_ab psi^ab, so the
  Kahler normal form e1^e2 + e3^e4 has squared norm 2;
* |W+|^2 means the operator Frobenius norm alpha^2 + beta^2 + gamma^2 of
  the 3x3 block; the fully covariant contraction W_abcd W^abcd is 4 times
  that and appears only in the signature quadrature, where the conversion
  is explicit;
* orientation is the chart coordinate order x0..x3 (orientation=-1 swaps
  the roles of Lambda+ and Lambda-).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConsistencyError, EvaluationDomainError, InputError,
                     SpectralGapError)
from .geometry import CurvaturePack, curvature_pack
from .jets import algebra as ja

# Threshold constant of the eigenvalue-gap lemma: the value of
# -(x + x^2) / (2^{3/2} (1 + x + x^2)^{3/2}) at x = 1/4.
DET_THRESHOLD = -(5.0 / 21.0) * math.sqrt(2.0 / 21.0)

GAP_TOL = 1e-7          # relative spectral-gap floor for eigenform work
SIGN_ANCHOR_TOL = 1e-6  # first basis coefficient above this sets the sign


# --------------------------------------------------------------------------
# orthonormal frames and Lambda+/- bases (jet-valued, batched)

def frame_coframe(g, order):
    """Gram-Schmidt frame E_a and coframe e^a from metric jets.

    Returns (frame, coframe) of shape (B, 4, 4, ncoef): frame[a, c] are the
    chart components of E_a, coframe[a, c] those of e^a.  The frame keeps
    the chart orientation (the change of basis has positive diagonal).
    """
    tab = ja.tables(order)
    b = g.shape[:-3]
    n = ja.ncoef(order)
    frame = np.zeros(b + (4, 4, n))
    for a in range(4):
        v = ja.const(0.0, order, shape=b + (4,))
        v[..., a, 0] = 1.0
        for c in range(a):
            prev = frame[..., c, :, :]
            ip = ja.jet_einsum("a,a->", ja.jet_einsum("cd,c->d", g, v, tab),
                               prev, tab)
            v = v - ja.mul(ip[..., None, :], prev, tab)
        n2 = ja.jet_einsum("a,a->", ja.jet_einsum("cd,c->d", g, v, tab), v, tab)
        frame[..., a, :, :] = ja.mul(
            ja.jet_pow(n2, -0.5, tab)[..., None, :], v, tab)
    # e^a(E_b) = delta requires coframe . frame^T = identity
    coframe = ja.mat_inv(np.swapaxes(frame, -3, -2), tab)
    return frame, coframe


_PLUS_PAIRS = ((0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2))


def lambda_bases_jets(g, order, orientation=1):
    """Orthonormal bases of Lambda+ and Lambda- as jet 2-forms.

    Shape (B, 3, 4, 4, ncoef) each; basis forms are
    (e^i ^ e^j + e^k ^ e^l) / sqrt(2) over the cyclic index pattern
    (01|23), (02|31), (03|12), self-dual for the chart orientation.
    """
    tab = ja.tables(order)
    _, cof = frame_coframe(g, order)

    def wedge(i, j):
        return (ja.jet_einsum("a,b->ab", cof[..., i, :, :], cof[..., j, :, :], tab)
                - ja.jet_einsum("a,b->ab", cof[..., j, :, :], cof[..., i, :, :], tab))

    plus, minus = [], []
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i, j, k, l in _PLUS_PAIRS:
        w1, w2 = wedge(i, j), wedge(k, l)
        plus.append((w1 + w2) * inv_sqrt2)
        minus.append((w1 - w2) * inv_sqrt2)
    plus = np.stack(plus, axis=-4)
    minus = np.stack(minus, axis=-4)
    if orientation < 0:
        plus, minus = minus, plus
    return plus, minus


def hodge_star_2form_jets(omega, ginv, sqrt_det_g, order, orientation=1):
    """(star omega)_ab = (1/2) sqrt(g) [abcd] g^{ce} g^{df} omega_ef."""
    tab = ja.tables(order)
    eps = ja.levi_civita_symbol() * float(orientation)
    up = ja.jet_einsum("ce,ef->cf", ginv,
                       ja.jet_einsum("ef,fd->ed", omega, ginv, tab), tab)
    contracted = np.einsum("abcd,...cdZ->...abZ", eps, up)
    return 0.5 * ja.mul(sqrt_det_g[..., None, None, :], contracted, tab)


# --------------------------------------------------------------------------
# curvature operator blocks

@dataclass
class DecompositionJets:
    """Batched, jet-valued irreducible decomposition at chart points."""

    order: int
    g: np.ndarray
    ginv: np.ndarray
    basis_plus: np.ndarray    # (B,3,4,4,N)
    basis_minus: np.ndarray
    wplus: np.ndarray         # (B,3,3,N) trace-free
    wminus: np.ndarray
    s: np.ndarray             # (B,N)
    ricci0: np.ndarray        # (B,4,4,N)
    operator6: np.ndarray     # (B,6,6,N) full curvature operator on Lambda^2


def decompose_jets(pack: CurvaturePack, orientation=1,
                   consistency_tol=1e-9) -> DecompositionJets:
    """Split the curvature operator on Lambda^2 into its irreducible blocks.

    The scalar curvature from the operator trace is cross-checked against
    the direct contraction; disagreement means corrupted input.
    """
    order = pack.order
    tab = ja.tables(order)
    plus, minus = lambda_bases_jets(pack.g, order, orientation)
    basis6 = np.concatenate([plus, minus], axis=-4)
    up1 = ja.jet_einsum("ca,Icd->Iad", pack.ginv, basis6, tab)
    psi6 = ja.jet_einsum("Iad,db->Iab", up1, pack.ginv, tab)
    half = ja.jet_einsum("Iab,abef->Ief", psi6, pack.riemann, tab)
    m6 = 0.25 * ja.jet_einsum("Ief,Jef->IJ", half, psi6, tab)

    tr_pp = np.einsum("...iiZ->...Z", m6[..., :3, :3, :])
    s_from_trace = 4.0 * tr_pp[..., 0]
    s_direct = pack.s[..., 0]
    scale = np.maximum(1.0, np.abs(s_direct))
    drift = np.abs(s_from_trace - s_direct) / scale
    if np.any(drift > consistency_tol):
        raise ConsistencyError(
            f"trace of the Lambda+ block disagrees with the scalar curvature "
            f"contraction (relative drift {float(drift.max()):.3e})")

    eye = np.zeros_like(m6[..., :3, :3, :])
    eye[..., 0] = np.eye(3)
    wplus = m6[..., :3, :3, :] - ja.mul(tr_pp[..., None, None, :] / 3.0, eye, tab)
    tr_mm = np.einsum("...iiZ->...Z", m6[..., 3:, 3:, :])
    wminus = m6[..., 3:, 3:, :] - ja.mul(tr_mm[..., None, None, :] / 3.0, eye, tab)
    return DecompositionJets(order, pack.g, pack.ginv, plus, minus,
                             wplus, wminus, pack.s, pack.ricci0, m6)


def wplus_tensor_jets(dec: DecompositionJets):
    """Reassemble W+ as a fully covariant 4-tensor field (jets)."""
    tab = ja.tables(dec.order)
    t = ja.jet_einsum("IJ,Iab->Jab", dec.wplus, dec.basis_plus, tab)
    return ja.jet_einsum("Jab,Jcd->abcd", t, dec.basis_plus, tab)


def plus_coordinates_jets(dec: DecompositionJets, form, tab):
    """Coefficients <phi_I, omega> of a 2-form (jets) in the Lambda+ basis."""
    up1 = ja.jet_einsum("ca,Icd->Iad", dec.ginv, dec.basis_plus, tab)
    psi = ja.jet_einsum("Iad,db->Iab", up1, dec.ginv, tab)
    return 0.5 * ja.jet_einsum("Iab,ab->I", psi, form, tab)


# --------------------------------------------------------------------------
# symmetric 3x3 spectra: closed-form trigonometric solver + Newton polish

def _sym3_char_roots(w):
    """Trigonometric roots of the characteristic polynomial, with one
    guarded Newton polish per root.  Accurate to eps for separated roots
    and to sqrt(eps) at clusters, which the Rayleigh step below repairs."""
    q = np.trace(w, axis1=-2, axis2=-1) / 3.0
    d = w - q[..., None, None] * np.eye(3)
    p2 = np.einsum("...ij,...ij->...", d, d)
    p = np.sqrt(np.maximum(p2, 0.0) / 6.0)
    safe_p = np.where(p > 0, p, 1.0)
    b = d / safe_p[..., None, None]
    r = np.clip(np.linalg.det(b) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam1 = q + 2.0 * p * np.cos(phi)
    lam3 = q + 2.0 * p * np.cos(phi + 2.0 * math.pi / 3.0)
    lam2 = 3.0 * q - lam1 - lam3
    lam = np.stack([lam1, lam2, lam3], axis=-1)

    c2 = 3.0 * q
    ww = np.einsum("...ij,...ij->...", w, w)
    c1 = 0.5 * (c2 ** 2 - ww)
    c0 = np.linalg.det(w)
    pv = ((lam - c2[..., None]) * lam + c1[..., None]) * lam - c0[..., None]
    dpv = (3.0 * lam - 2.0 * c2[..., None]) * lam + c1[..., None]
    scale = np.maximum(p * p, 1e-300)
    ok = np.abs(dpv) > 1e-6 * scale[..., None]
    lam = np.where(ok, lam - pv / np.where(ok, dpv, 1.0), lam)
    return -np.sort(-lam, axis=-1)


def sym3_eigh(w):
    """Descending eigenpairs of symmetric (…,3,3) matrices.

    The top eigenvector comes from the largest cross product of rows of
    (W - alpha I); the remaining pair diagonalizes the deflated 2x2 block,
    so the triple is orthonormal by construction.  Eigenvalues are the
    Rayleigh quotients of those vectors: unlike any route through the
    characteristic polynomial, quotients stay accurate to working precision
    at clustered eigenvalues (the Kahler case beta = gamma).
    """
    w = np.asarray(w, dtype=float)
    lam = _sym3_char_roots(w)
    batch = w.shape[:-2]
    scale = np.maximum(np.linalg.norm(w, axis=(-2, -1)), 1e-300)

    m = w - lam[..., 0, None, None] * np.eye(3)
    crosses = np.stack([np.cross(m[..., 0, :], m[..., 1, :]),
                        np.cross(m[..., 0, :], m[..., 2, :]),
                        np.cross(m[..., 1, :], m[..., 2, :])], axis=-2)
    norms = np.linalg.norm(crosses, axis=-1)
    best = np.argmax(norms, axis=-1)
    v1 = np.take_along_axis(crosses, best[..., None, None], axis=-2)[..., 0, :]
    nrm = np.linalg.norm(v1, axis=-1)
    degenerate = nrm < 1e-12 * scale ** 2
    v1 = np.where(degenerate[..., None], np.broadcast_to([1.0, 0.0, 0.0],
                                                         batch + (3,)), v1)
    v1 = v1 / np.linalg.norm(v1, axis=-1)[..., None]

    axis = np.argmin(np.abs(v1), axis=-1)
    u = np.zeros(batch + (3,))
    np.put_along_axis(u, axis[..., None], 1.0, axis=-1)
    u = u - np.einsum("...i,...i->...", u, v1)[..., None] * v1
    u = u / np.linalg.norm(u, axis=-1)[..., None]
    t = np.cross(v1, u)

    buu = np.einsum("...i,...ij,...j->...", u, w, u)
    but = np.einsum("...i,...ij,...j->...", u, w, t)
    btt = np.einsum("...i,...ij,...j->...", t, w, t)
    theta = 0.5 * np.arctan2(2.0 * but, buu - btt)
    ca, sa = np.cos(theta), np.sin(theta)
    va = ca[..., None] * u + sa[..., None] * t
    vb = -sa[..., None] * u + ca[..., None] * t
    mu_1 = np.einsum("...i,...ij,...j->...", v1, w, v1)
    mu_a = np.einsum("...i,...ij,...j->...", va, w, va)
    mu_b = np.einsum("...i,...ij,...j->...", vb, w, vb)
    vals = np.stack([mu_1, mu_a, mu_b], axis=-1)
    vecs = np.stack([v1, va, vb], axis=-1)
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    return vals, vecs


def sym3_eigenvalues(w):
    """Descending eigenvalues of symmetric (…,3,3) matrices."""
    return sym3_eigh(w)[0]


def top_eigen_jets(wj, order, gap_tol=GAP_TOL):
    """Jets of the top eigenvalue and unit eigenvector of symmetric 3x3
    jet matrices (B,3,3,N).

    A bordered quasi-Newton iteration on ((W - alpha) v, (|v|^2 - 1)/2)
    with the exact order-0 Jacobian gains one Taylor order per sweep; its
    first sweep reproduces the classical perturbation formulas
    d(alpha) = <dW v, v> and dv = (alpha - W)^+ dW v.
    """
    w0 = wj[..., 0]
    lam, vec = sym3_eigh(w0)
    fro = np.linalg.norm(w0, axis=(-2, -1))
    gap = lam[..., 0] - lam[..., 1]
    floor = gap_tol * np.maximum(fro, 1e-300)
    if np.any(gap <= floor):
        i = int(np.argmin(gap - floor))
        if fro.flat[i] == 0.0:
            raise SpectralGapError(float(gap.flat[i]), float(floor.flat[i]),
                                   "top eigenvalue not simple: W+ = 0")
        raise SpectralGapError(float(gap.flat[i]), float(floor.flat[i]))

    alpha0 = lam[..., 0]
    v0 = vec[..., :, 0]
    batch = w0.shape[:-2]
    jac = np.zeros(batch + (4, 4))
    jac[..., :3, :3] = w0 - alpha0[..., None, None] * np.eye(3)
    jac[..., :3, 3] = -v0
    jac[..., 3, :3] = v0
    jinv = np.linalg.inv(jac)

    tab = ja.tables(order)
    n = ja.ncoef(order)
    v = np.zeros(batch + (3, n))
    v[..., 0] = v0
    alpha = np.zeros(batch + (n,))
    alpha[..., 0] = alpha0
    for _ in range(order):
        r1 = (ja.jet_einsum("ab,b->a", wj, v, tab)
              - ja.mul(alpha[..., None, :], v, tab))
        r2 = 0.5 * (ja.jet_einsum("a,a->", v, v, tab))
        r2[..., 0] -= 0.5
        res = np.concatenate([r1, r2[..., None, :]], axis=-2)
        delta = -np.einsum("...ij,...jZ->...iZ", jinv, res)
        v = v + delta[..., :3, :]
        alpha = alpha + delta[..., 3, :]
    return alpha, v


# --------------------------------------------------------------------------
# public spectral types and operations

@dataclass
class WeylSpectrum:
    """Ordered spectrum alpha >= beta >= gamma of W+ with eigenvectors
    (columns, in the Lambda+ basis), determinant, squared Frobenius norm
    and spectral gap alpha - beta."""

    alpha: float
    beta: float
    gamma: float
    eigenvectors: np.ndarray
    det: float
    norm2: float
    gap: float

    @property
    def norm(self):
        return math.sqrt(self.norm2)


@dataclass
class CurvatureDecomposition:
    """Pointwise irreducible curvature package on Lambda^2."""

    wplus: np.ndarray          # (3,3) trace-free
    wminus: np.ndarray         # (3,3) trace-free
    ricci0: np.ndarray         # (4,4) trace-free Ricci
    s: float
    lambda_plus_basis: np.ndarray   # (3,4,4)
    lambda_minus_basis: np.ndarray
    metric: np.ndarray         # (4,4) metric value at the point
    operator6: np.ndarray      # (6,6) full curvature operator


@dataclass
class TwoForm:
    """Antisymmetric 2-form components at a point; |omega|^2 = (1/2)
    omega_ab omega^ab with indices raised by the metric."""

    components: np.ndarray

    def norm2(self, g):
        ginv = np.linalg.inv(g)
        up = ginv @ self.components @ ginv.T
        return 0.5 * float(np.einsum("ab,ab->", self.components, up))


def lambda_bases(g, orientation=1):
    """Orthonormal (Lambda+, Lambda-) bases for a metric value at a point."""
    g = np.asarray(g, dtype=float)
    plus, minus = lambda_bases_jets(g[None, :, :, None], 0, orientation)
    return plus[0, ..., 0], minus[0, ..., 0]


def decompose_curvature(g, riemann, orientation=1,
                        symmetry_tol=1e-8) -> CurvatureDecomposition:
    """Irreducible decomposition of a curvature tensor at one point.

    ``riemann`` must carry the pair symmetries and the first Bianchi
    identity to within ``symmetry_tol`` (relative), else the input is
    rejected.
    """
    g = np.asarray(g, dtype=float)
    r = np.asarray(riemann, dtype=float)
    scale = max(float(np.abs(r).max()), 1e-300)
    asym = max(float(np.abs(r + r.transpose(1, 0, 2, 3)).max()),
               float(np.abs(r - r.transpose(2, 3, 0, 1)).max()),
               float(np.abs(r + r.transpose(0, 1, 3, 2)).max()))
    bianchi = float(np.abs(r + r.transpose(1, 2, 0, 3)
                           + r.transpose(2, 0, 1, 3)).max())
    if max(asym, bianchi) > symmetry_tol * scale:
        raise ConsistencyError(
            f"input tensor violates curvature symmetries "
            f"(relative violation {max(asym, bianchi) / scale:.3e})")

    ginv = np.linalg.inv(g)
    ric = np.einsum("ac,abcd->bd", ginv, r)
    s = float(np.einsum("bd,bd->", ginv, ric))
    pack = CurvaturePack(
        order=0, points=np.zeros((1, 4)),
        g=g[None, :, :, None], ginv=ginv[None, :, :, None],
        gamma=np.zeros((1, 4, 4, 4, 1)), riemann=r[None, ..., None],
        ricci=ric[None, ..., None], s=np.array([[s]]),
        ricci0=(ric - 0.25 * s * g)[None, ..., None])
    dec = decompose_jets(pack, orientation)
    return CurvatureDecomposition(
        wplus=dec.wplus[0, ..., 0], wminus=dec.wminus[0, ..., 0],
        ricci0=dec.ricci0[0, ..., 0], s=s,
        lambda_plus_basis=dec.basis_plus[0, ..., 0],
        lambda_minus_basis=dec.basis_minus[0, ..., 0],
        metric=g, operator6=dec.operator6[0, ..., 0])


def decompose_at(metric, point, orientation=1) -> CurvatureDecomposition:
    """Curvature decomposition of a metric field at one chart point."""
    pack = curvature_pack(metric, np.asarray(point, dtype=float)[None, :], 0)
    dec = decompose_jets(pack, orientation)
    return CurvatureDecomposition(
        wplus=dec.wplus[0, ..., 0], wminus=dec.wminus[0, ..., 0],
        ricci0=dec.ricci0[0, ..., 0], s=float(dec.s[0, 0]),
        lambda_plus_basis=dec.basis_plus[0, ..., 0],
        lambda_minus_basis=dec.basis_minus[0, ..., 0],
        metric=pack.g[0, :, :, 0], operator6=dec.operator6[0, ..., 0])


def weyl_spectrum(w, symmetry_tol=1e-10) -> WeylSpectrum:
    """Ordered spectral data of a symmetric trace-free 3x3 matrix."""
    w = np.asarray(w, dtype=float)
    scale = max(float(np.abs(w).max()), 1.0)
    if float(np.abs(w - w.T).max()) > symmetry_tol * scale:
        raise ConsistencyError("weyl_spectrum requires a symmetric matrix")
    lam, vec = sym3_eigh(w)
    alpha, beta, gamma = (float(v) for v in lam)
    return WeylSpectrum(alpha=alpha, beta=beta, gamma=gamma,
                        eigenvectors=vec,
                        det=alpha * beta * gamma,
                        norm2=alpha ** 2 + beta ** 2 + gamma ** 2,
                        gap=alpha - beta)


@dataclass
class DeterminantClass:
    kind: str            # 'positive' | 'zero-band' | 'negative'
    det: float
    beta: float
    band: float
    sign_consistent: bool


def classify_determinant(sp: WeylSpectrum, band_tol=1e-9) -> DeterminantClass:
    """Sign classification of det W+ via the middle eigenvalue.

    det(W+) always has the sign of -beta, so the classification reads the
    middle eigenvalue against a band of width band_tol * |W+|.
    """
    band = band_tol * sp.norm
    if sp.beta < -band:
        kind = "positive"
    elif sp.beta > band:
        kind = "negative"
    else:
        kind = "zero-band"
    consistent = (sp.det == 0.0 or sp.beta == 0.0
                  or (sp.det > 0) == (sp.beta < 0))
    return DeterminantClass(kind, sp.det, sp.beta, band, consistent)


@dataclass
class ThresholdCheck:
    eigen_side: bool      # beta <= alpha / 4
    det_side: bool        # det >= DET_THRESHOLD * |W+|^3
    agree: bool
    boundary: bool        # within band_tol of the threshold surface
    det_ratio: float      # det / |W+|^3
    threshold: float


def threshold_check(sp: WeylSpectrum, band_tol=1e-9) -> ThresholdCheck:
    """Both sides of the equivalence beta <= alpha/4 <=> det >= c |W+|^3."""
    if sp.norm2 <= 0.0:
        raise EvaluationDomainError("threshold check requires W+ != 0")
    norm3 = sp.norm2 ** 1.5
    ratio = sp.det / norm3
    eigen_side = sp.beta <= sp.alpha / 4.0
    det_side = sp.det >= DET_THRESHOLD * norm3
    boundary = (abs(ratio - DET_THRESHOLD) <= band_tol
                or abs(sp.beta - sp.alpha / 4.0) <= band_tol * sp.norm)
    return ThresholdCheck(eigen_side, det_side, eigen_side == det_side,
                          boundary, ratio, DET_THRESHOLD)


def ratio_function(x):
    """det(W+)/|W+|^3 as a function of x = beta/alpha on [-1/2, 1].

    Decreasing on its domain; the value at x = 1/4 is the threshold
    constant DET_THRESHOLD.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < -0.5 - 1e-15) or np.any(x > 1.0 + 1e-15):
        raise EvaluationDomainError("ratio_function domain is [-1/2, 1]")
    y = 1.0 + x + x * x
    out = -(x + x * x) / (2.0 ** 1.5 * y ** 1.5)
    return float(out) if out.ndim == 0 else out


def top_eigenform(dec: CurvatureDecomposition, sp: WeylSpectrum,
                  gap_tol=GAP_TOL) -> TwoForm:
    """The self-dual 2-form omega with W+(omega) = alpha omega, |omega|^2 = 2.

    The overall sign is anchored by requiring the first Lambda+ coefficient
    of magnitude above 1e-6 to be positive; scan assemblers override this
    with sign continuity along the scan order.
    """
    if sp.gap <= gap_tol * max(sp.norm, 1e-300):
        if sp.norm2 == 0.0:
            raise SpectralGapError(sp.gap, gap_tol * sp.norm,
                                   "top eigenvalue not simple: W+ = 0")
        raise SpectralGapError(sp.gap, gap_tol * sp.norm)
    v = sp.eigenvectors[:, 0].copy()
    for comp in v:
        if abs(comp) > SIGN_ANCHOR_TOL:
            if comp < 0:
                v = -v
            break
    comp = math.sqrt(2.0) * np.einsum("i,iab->ab", v, dec.lambda_plus_basis)
    return TwoForm(comp)


def almost_complex(omega: TwoForm, g, tol=1e-6):
    """J_a^b = omega_ac g^{cb}; valid for self-dual omega with |omega|^2 = 2.

    Returns the mixed tensor J (4,4) with J o J = -identity and
    g(J., J.) = g to numerical accuracy.
    """
    g = np.asarray(g, dtype=float)
    n2 = omega.norm2(g)
    if abs(n2 - 2.0) > tol:
        raise InputError(f"almost_complex requires |omega|^2 = 2, got {n2:.6g}")
    ginv = np.linalg.inv(g)
    det = np.linalg.det(g)
    eps = ja.levi_civita_symbol()
    star = 0.5 * math.sqrt(det) * np.einsum(
        "abcd,ce,df,ef->ab", eps, ginv, ginv, omega.components)
    if np.abs(star - omega.components).max() > tol * max(1.0, np.abs(
            omega.components).max()):
        raise InputError("almost_complex requires a self-dual 2-form")
    j = np.einsum("ac,cb->ab", omega.components, ginv)
    jj = j @ j
    if np.abs(jj + np.eye(4)).max() > 1e-9 * max(1.0, np.abs(j).max() ** 2):
        raise ConsistencyError("J o J deviates from -identity beyond tolerance")
    return j
