"""Lightweight rational functions of one variable.

The explicit porous-medium front satisfies a first-order closure
u' = g(u) with g rational, so every x-derivative of the profile is a
rational function of u obtained by chain-rule recursion.  This module
supplies just enough rational-function arithmetic (product, sum,
derivative, evaluation) to carry out that recursion in coefficient
space, where the cancellations that would otherwise destroy floating
point accuracy near the endpoints happen exactly.
"""

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = ["RationalFn"]


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return P.polytrim(c, tol=0.0)


class RationalFn:
    """A ratio of polynomials num(u)/den(u) with float coefficients."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,)):
        self.num = _trim(num)
        self.den = _trim(den)
        if self.den.size == 1 and self.den[0] == 0.0:
            raise ZeroDivisionError("zero denominator polynomial")

    @classmethod
    def const(cls, value):
        return cls([float(value)])

    @classmethod
    def identity(cls):
        return cls([0.0, 1.0])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return P.polyval(u, self.num) / P.polyval(u, self.den)

    def __mul__(self, other):
        if isinstance(other, RationalFn):
            return RationalFn(P.polymul(self.num, other.num),
                              P.polymul(self.den, other.den))
        return RationalFn(self.num * float(other), self.den)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        num = P.polyadd(P.polymul(self.num, other.den),
                        P.polymul(other.num, self.den))
        return RationalFn(num, P.polymul(self.den, other.den))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        num = P.polysub(P.polymul(self.num, other.den),
                        P.polymul(other.num, self.den))
        return RationalFn(num, P.polymul(self.den, other.den))

    def __rsub__(self, other):
        return RationalFn.const(other) - self

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def deriv(self):
        """d/du of num/den via the quotient rule (no simplification)."""
        dn = P.polyder(self.num) if self.num.size > 1 else np.zeros(1)
        dd = P.polyder(self.den) if self.den.size > 1 else np.zeros(1)
        num = P.polysub(P.polymul(dn, self.den), P.polymul(self.num, dd))
        return RationalFn(num, P.polymul(self.den, self.den))

    def __repr__(self):
        return f"RationalFn(num={self.num.tolist()}, den={self.den.tolist()})"
