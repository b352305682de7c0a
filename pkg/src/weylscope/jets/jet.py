"""User-facing Jet values and the two evaluation routes (exact and FD)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EvaluationDomainError, OrderExhaustedError
from . import algebra
from .expr import Expression, eval_jets

PUBLIC_MAX_ORDER = 4


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion of a scalar at a chart point.

    ``coeffs`` stores monomial coefficients in graded lexicographic order;
    the partial derivative for multi-index ``m`` is ``coeffs[m] * m!`` (see
    :meth:`partial`).  Jets are immutable; arithmetic requires matching base
    point and order.
    """

    point: tuple
    order: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, multi) -> float:
        """Partial derivative d^m f / dx^m for a 4-tuple multi-index."""
        multi = tuple(int(v) for v in multi)
        tab = algebra.tables(self.order)
        if sum(multi) > self.order:
            raise OrderExhaustedError(
                f"multi-index {multi} exceeds jet order {self.order}")
        i = tab.index[multi]
        return float(self.coeffs[i] * tab.factorial[i])

    def gradient(self) -> np.ndarray:
        return np.array([self.partial(tuple(np.eye(4, dtype=int)[i]))
                         for i in range(4)])

    def hessian(self) -> np.ndarray:
        h = np.empty((4, 4))
        for i in range(4):
            for j in range(4):
                m = [0, 0, 0, 0]
                m[i] += 1
                m[j] += 1
                h[i, j] = self.partial(m)
        return h

    def _binop(self, other, fn):
        tab = algebra.tables(self.order)
        if isinstance(other, Jet):
            if other.point != self.point or other.order != self.order:
                raise ValueError("jet arithmetic requires equal base point and order")
            return Jet(self.point, self.order, fn(self.coeffs, other.coeffs, tab))
        other = algebra.const(float(other), self.order)
        return Jet(self.point, self.order, fn(self.coeffs, other, tab))

    def __add__(self, other):
        return self._binop(other, lambda a, b, t: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b, t: a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(self.point, self.order, -self.coeffs)

    def __mul__(self, other):
        return self._binop(other, algebra.mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, algebra.div)

    def __rtruediv__(self, other):
        inv = Jet(self.point, self.order,
                  algebra.jet_inv(self.coeffs, algebra.tables(self.order)))
        return inv * other

    def __pow__(self, r):
        return Jet(self.point, self.order,
                   algebra.jet_pow(self.coeffs, r, algebra.tables(self.order)))


def _apply(fn, j: Jet) -> Jet:
    return Jet(j.point, j.order, fn(j.coeffs, algebra.tables(j.order)))


def exp(j):
    return _apply(algebra.jet_exp, j)


def log(j):
    return _apply(algebra.jet_log, j)


def sin(j):
    return _apply(algebra.jet_sin, j)


def cos(j):
    return _apply(algebra.jet_cos, j)


def sqrt(j):
    return _apply(algebra.jet_sqrt, j)


def atan(j):
    return _apply(algebra.jet_atan, j)


def jet_eval(e: Expression, point, order: int) -> Jet:
    """Exact truncated Taylor coefficients of ``e`` at ``point``.

    ``order`` must lie in [0, 4]; internal consumers that need spare
    derivative orders call the batched evaluator directly.
    """
    if not 0 <= order <= PUBLIC_MAX_ORDER:
        raise OrderExhaustedError(
            f"jet order must be in [0, {PUBLIC_MAX_ORDER}], got {order}")
    point = tuple(float(v) for v in point)
    coeffs = eval_jets(e, np.array([point]), order)[0]
    return Jet(point, order, coeffs)


# --------------------------------------------------------------------------
# finite-difference oracle

# Central-difference weights for the n-th derivative; offsets in units of h.
# First-derivative estimates carry O(h^2) error, O(h^4) after the single
# Richardson extrapolation step applied below.
_CENTRAL = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


def _fd_partial(f, point, multi, h):
    """Tensor-product central-difference stencil for one multi-index."""
    grids = []
    for v, n in enumerate(multi):
        offs, wts = _CENTRAL[n]
        grids.append([(o * h, w / h ** n) for o, w in zip(offs, wts)])
    total = 0.0
    stack = [((), 1.0)]
    for v in range(4):
        stack = [(pt + (dv,), w * wv) for pt, w in stack for dv, wv in grids[v]]
    for offsets, w in stack:
        q = tuple(point[v] + offsets[v] for v in range(4))
        total += w * f(q)
    return total


def fd_jet(e: Expression, point, order: int, h: float = 1e-3) -> Jet:
    """Finite-difference estimate of the jet, with one Richardson step.

    Orders up to 2 are well conditioned; higher orders are supported but
    noisy, which is why the exact evaluator exists.  Raises
    :class:`EvaluationDomainError` if any stencil node leaves the domain of
    the expression.
    """
    if not 0 <= order <= PUBLIC_MAX_ORDER:
        raise OrderExhaustedError(
            f"jet order must be in [0, {PUBLIC_MAX_ORDER}], got {order}")
    point = tuple(float(v) for v in point)
    tab = algebra.tables(order)

    def f(q):
        try:
            return float(eval_jets(e, np.array([q]), 0)[0, 0])
        except EvaluationDomainError as err:
            raise EvaluationDomainError(
                f"finite-difference stencil left the expression domain: {err}"
            ) from err

    coeffs = np.empty(tab.n)
    for i, multi in enumerate(map(tuple, tab.multis)):
        n = sum(multi)
        if n == 0:
            est = f(point)
        else:
            coarse = _fd_partial(f, point, multi, h)
            fine = _fd_partial(f, point, multi, h / 2)
            est = (4.0 * fine - coarse) / 3.0
        coeffs[i] = est / tab.factorial[i]
    return Jet(point, order, coeffs)
