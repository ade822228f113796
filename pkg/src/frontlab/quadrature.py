"""Quadrature helpers.

Closed-form inner products in this package are cross-checked against
integrals over the unit interval whose integrands carry algebraic endpoint
singularities like u**(-2*d1).  Double-exponential (tanh-sinh) quadrature
absorbs those, so it is the default oracle rule; plain adaptive quadrature
is used for smooth integrands with a variable endpoint.
"""

import numpy as np
from scipy import integrate

from .errors import QuadratureError

__all__ = ["tanh_sinh", "adaptive"]


def tanh_sinh(f, a=0.0, b=1.0, *, atol=1e-12, rtol=1e-12):
    """Integrate ``f`` over (a, b) with double-exponential quadrature.

    ``f`` must accept numpy arrays.  Endpoints are never evaluated, so
    integrable endpoint singularities are fine.

    Raises
    ------
    QuadratureError
        If the rule reports non-convergence at the requested tolerances.
    """
    res = integrate.tanhsinh(f, a, b, atol=atol, rtol=rtol)
    if not np.all(res.success):
        raise QuadratureError(
            f"tanh-sinh quadrature on ({a}, {b}) did not converge: "
            f"status={res.status}, error estimate={res.error}"
        )
    return float(res.integral)


def adaptive(f, a, b, *, tol=1e-13, limit=200):
    """Adaptive (QUADPACK) quadrature for smooth scalar integrands."""
    val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=limit)
    if not np.isfinite(val) or err > max(tol * 100, 1e-9 * abs(val) + 1e-12):
        raise QuadratureError(
            f"adaptive quadrature on ({a}, {b}) error estimate {err:.3e} too large"
        )
    return val
