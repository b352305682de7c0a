"""Dense truncated Taylor-jet arithmetic in four chart variables.

A jet of order ``k`` is stored as a flat vector of monomial (Taylor)
coefficients, one per multi-index ``m`` with ``|m| <= k``, in graded
lexicographic order.  All functions here operate on plain ndarrays whose
*last* axis is the coefficient axis, so tensors of jets and whole batches
of chart points are just leading axes; everything is vectorized.

The graded ordering makes truncation a view: the first ``ncoef(k')``
entries of an order-``k`` vector are exactly the order-``k'`` jet.

Multiplication is exact truncated polynomial convolution driven by a
precomputed pair table sorted by output index, reduced with
``np.add.reduceat``.  Elementary functions go through univariate Taylor
composition (Horner in the nilpotent part), so the chain rule is exact to
the stored order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

from ..errors import EvaluationDomainError, OrderExhaustedError

NVARS = 4

# Highest order the engine builds tables for.  The public Jet API stops at
# 4; derived metric fields (Derdzinski / spectral rescalings) consume spare
# orders internally and bottom out at closed-form expressions, which is why
# the internal ceiling sits well above the public one.
MAX_ORDER = 10


def ncoef(order: int) -> int:
    """Number of multi-indices in 4 variables with total degree <= order."""
    return math.comb(order + NVARS, NVARS)


def _graded_multis(order):
    out = []
    for deg in range(order + 1):
        level = [m for m in _compositions(deg)]
        level.sort(reverse=True)
        out.extend(level)
    return out


def _compositions(deg):
    for a in range(deg + 1):
        for b in range(deg - a + 1):
            for c in range(deg - a - b + 1):
                yield (a, b, c, deg - a - b - c)


@dataclass(frozen=True)
class JetTables:
    order: int
    multis: np.ndarray          # (ncoef, 4) exponent table
    index: dict                 # multi-index tuple -> flat position
    pair_left: np.ndarray       # product table, sorted by output index
    pair_right: np.ndarray
    pair_starts: np.ndarray     # reduceat boundaries, one per output index
    diff_src: tuple             # per variable: source index for d/dx_v
    diff_fac: tuple             # per variable: multiplicity factor
    factorial: np.ndarray       # m! per multi-index (derivative <-> coeff)

    @property
    def n(self):
        return len(self.multis)


@lru_cache(maxsize=None)
def tables(order: int) -> JetTables:
    if not 0 <= order <= MAX_ORDER:
        raise OrderExhaustedError(
            f"jet order {order} outside supported range [0, {MAX_ORDER}]")
    multis = _graded_multis(order)
    arr = np.array(multis, dtype=np.int64)
    index = {m: i for i, m in enumerate(multis)}
    degrees = arr.sum(axis=1)

    pairs = []
    for i, mi in enumerate(multis):
        di = degrees[i]
        for j, mj in enumerate(multis):
            if di + degrees[j] > order:
                continue
            k = index[(mi[0] + mj[0], mi[1] + mj[1], mi[2] + mj[2], mi[3] + mj[3])]
            pairs.append((k, i, j))
    pairs.sort()
    pk = np.array([p[0] for p in pairs], dtype=np.intp)
    pl = np.array([p[1] for p in pairs], dtype=np.intp)
    pr = np.array([p[2] for p in pairs], dtype=np.intp)
    starts = np.searchsorted(pk, np.arange(len(multis)))

    diff_src, diff_fac = [], []
    n_lower = ncoef(order - 1) if order > 0 else 0
    for v in range(NVARS):
        src = np.empty(n_lower, dtype=np.intp)
        fac = np.empty(n_lower, dtype=float)
        for o in range(n_lower):
            m = list(multis[o])
            m[v] += 1
            src[o] = index[tuple(m)]
            fac[o] = m[v]
        diff_src.append(src)
        diff_fac.append(fac)

    factorial = np.array([math.prod(math.factorial(e) for e in m) for m in multis],
                         dtype=float)
    return JetTables(order, arr, index, pl, pr, starts,
                     tuple(diff_src), tuple(diff_fac), factorial)


# --------------------------------------------------------------------------
# core coefficient operations (last axis = coefficients)

def const(value, order, shape=()):
    """Lift numbers (scalar or array of given leading shape) to jets."""
    out = np.zeros(tuple(shape) + (ncoef(order),))
    out[..., 0] = value
    return out


def variable(point, i, order):
    """Jet of the coordinate function x_i at ``point`` (… , 4)."""
    point = np.asarray(point, dtype=float)
    out = np.zeros(point.shape[:-1] + (ncoef(order),))
    out[..., 0] = point[..., i]
    if order >= 1:
        out[..., 1 + i] = 1.0
    return out


def trunc(a, order_to):
    """View of the leading coefficients: truncation to a lower order."""
    return a[..., :ncoef(order_to)]


def value(a):
    return a[..., 0]


def mul(a, b, tab: JetTables):
    """Truncated product of two coefficient arrays of order tab.order."""
    prod = a[..., tab.pair_left] * b[..., tab.pair_right]
    return np.add.reduceat(prod, tab.pair_starts, axis=-1)


def jet_einsum(subs: str, a, b, tab: JetTables):
    """Tensor contraction of two jet-valued tensors.

    ``subs`` addresses only the tensor axes (e.g. ``'ad,dbc->abc'``); any
    leading batch axes broadcast, and the trailing coefficient axes are
    convolved as truncated products.
    """
    lhs, out = subs.split("->")
    sa, sb = lhs.split(",")
    spec = f"...{sa}Z,...{sb}Z->...{out}Z"
    prod = np.einsum(spec, a[..., tab.pair_left], b[..., tab.pair_right])
    return np.add.reduceat(prod, tab.pair_starts, axis=-1)


def diff(a, v, tab: JetTables):
    """d/dx_v as a jet of order (tab.order - 1)."""
    if tab.order == 0:
        raise OrderExhaustedError("cannot differentiate an order-0 jet")
    return a[..., tab.diff_src[v]] * tab.diff_fac[v]


def grad(a, tab: JetTables):
    """All four partials, stacked on a new second-to-last axis."""
    return np.stack([diff(a, v, tab) for v in range(NVARS)], axis=-2)


def compose(series, a, tab: JetTables):
    """Univariate composition f(a) given Taylor coefficients of f at value(a).

    ``series`` has shape (..., order+1): series[..., j] = f^(j)(a0)/j!.
    """
    k = tab.order
    u = a.copy()
    u[..., 0] = 0.0
    out = const(series[..., k], k, shape=a.shape[:-1])
    for j in range(k - 1, -1, -1):
        out = mul(out, u, tab)
        out[..., 0] += series[..., j]
    return out


def _check_positive(a0, what):
    if np.any(~(a0 > 0)):
        bad = np.asarray(a0).reshape(-1)
        worst = float(np.min(bad))
        raise EvaluationDomainError(f"{what} requires a positive argument "
                                    f"(minimum encountered: {worst:.6g})")


def jet_exp(a, tab):
    series = np.exp(a[..., 0])[..., None] / _factorials(tab.order)
    return compose(series, a, tab)


def jet_log(a, tab):
    a0 = a[..., 0]
    _check_positive(a0, "log")
    k = tab.order
    series = np.empty(a0.shape + (k + 1,))
    series[..., 0] = np.log(a0)
    for j in range(1, k + 1):
        series[..., j] = ((-1.0) ** (j + 1)) / (j * a0 ** j)
    return compose(series, a, tab)


def jet_sin(a, tab):
    return _trig(a, tab, phase=0)


def jet_cos(a, tab):
    return _trig(a, tab, phase=1)


def _trig(a, tab, phase):
    a0 = a[..., 0]
    k = tab.order
    cyc = np.stack([np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)], axis=-1)
    fact = _factorials(k)
    series = np.stack([cyc[..., (phase + j) % 4] / fact[j] for j in range(k + 1)],
                      axis=-1)
    return compose(series, a, tab)


def jet_atan(a, tab):
    # Taylor coefficients of atan at a0 via 1/(1+x^2) = Im 1/(x - i):
    # the m-th coefficient of the derivative is Im[(-1)^m (a0 - i)^-(m+1)].
    a0 = a[..., 0]
    k = tab.order
    series = np.empty(a0.shape + (k + 1,))
    series[..., 0] = np.arctan(a0)
    z = a0.astype(complex) - 1j
    zpow = 1.0 / z
    for m in range(k):
        series[..., m + 1] = ((-1.0) ** m) * zpow.imag / (m + 1)
        zpow = zpow / z
    return compose(series, a, tab)


def jet_pow(a, r, tab):
    """a**r.  Integer exponents work for any invertible base (repeated
    multiplication); fractional exponents require a positive base."""
    if float(r).is_integer():
        return _int_pow(a, int(round(float(r))), tab)
    a0 = a[..., 0]
    _check_positive(a0, f"power with exponent {r}")
    k = tab.order
    series = np.empty(a0.shape + (k + 1,))
    coeff = 1.0
    for j in range(k + 1):
        series[..., j] = coeff * a0 ** (r - j)
        coeff *= (r - j) / (j + 1)
    return compose(series, a, tab)


def jet_sqrt(a, tab):
    return jet_pow(a, 0.5, tab)


def jet_inv(a, tab):
    a0 = a[..., 0]
    if np.any(a0 == 0):
        raise EvaluationDomainError("division by a jet with zero value part")
    k = tab.order
    series = np.empty(a0.shape + (k + 1,))
    for j in range(k + 1):
        series[..., j] = ((-1.0) ** j) / a0 ** (j + 1)
    return compose(series, a, tab)


def _int_pow(a, n, tab):
    if n == 0:
        return const(1.0, tab.order, shape=a.shape[:-1])
    if n < 0:
        return _int_pow(jet_inv(a, tab), -n, tab)
    out = None
    base = a
    while n:
        if n & 1:
            out = base if out is None else mul(out, base, tab)
        n >>= 1
        if n:
            base = mul(base, base, tab)
    return out


def div(a, b, tab):
    return mul(a, jet_inv(b, tab), tab)


@lru_cache(maxsize=None)
def _factorials(k):
    return np.array([math.factorial(j) for j in range(k + 1)], dtype=float)


# --------------------------------------------------------------------------
# small dense linear algebra on jet matrices

def mat_inv(m, tab: JetTables):
    """Inverse of a (…, d, d, ncoef) jet matrix via a Neumann series around
    the numeric inverse of the value part.  Exact at the stored order."""
    m0 = m[..., 0]
    m0inv = np.linalg.inv(m0)
    nil = m.copy()
    nil[..., 0] = 0.0
    eye = np.zeros_like(m)
    eye[..., 0] = np.eye(m.shape[-2])
    x = np.zeros_like(m)
    x[..., 0] = m0inv
    for _ in range(tab.order):
        ex = jet_einsum("ab,bc->ac", nil, x, tab)
        x = np.einsum("...ab,...bcZ->...acZ", m0inv, eye - ex)
    return x


def mat_det(m, tab: JetTables):
    """Determinant of a (…, d, d, ncoef) jet matrix, d in {1, 2, 3, 4}."""
    d = m.shape[-2]
    if d == 1:
        return m[..., 0, 0, :]
    if d == 2:
        return (mul(m[..., 0, 0, :], m[..., 1, 1, :], tab)
                - mul(m[..., 0, 1, :], m[..., 1, 0, :], tab))
    if d == 3:
        out = 0
        for j, sign in ((0, 1.0), (1, -1.0), (2, 1.0)):
            cols = [c for c in range(3) if c != j]
            minor = (mul(m[..., 1, cols[0], :], m[..., 2, cols[1], :], tab)
                     - mul(m[..., 1, cols[1], :], m[..., 2, cols[0], :], tab))
            out = out + sign * mul(m[..., 0, j, :], minor, tab)
        return out
    if d == 4:
        # Laplace expansion along complementary 2x2 minors of rows (0,1).
        out = 0
        cols = (0, 1, 2, 3)
        for i in range(4):
            for j in range(i + 1, 4):
                rest = [c for c in cols if c not in (i, j)]
                sign = (-1.0) ** (i + j + 1)
                top = (mul(m[..., 0, i, :], m[..., 1, j, :], tab)
                       - mul(m[..., 0, j, :], m[..., 1, i, :], tab))
                bot = (mul(m[..., 2, rest[0], :], m[..., 3, rest[1], :], tab)
                       - mul(m[..., 2, rest[1], :], m[..., 3, rest[0], :], tab))
                out = out + sign * mul(top, bot, tab)
        return out
    raise ValueError(f"mat_det supports d <= 4, got {d}")


@lru_cache(maxsize=None)
def levi_civita_symbol():
    """Alternating symbol [abcd] with [0123] = +1."""
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        sign = 1
        p = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if p[i] > p[j]:
                    sign = -sign
        eps[perm] = sign
    return eps
