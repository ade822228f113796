"""Model parameters, dispersion relation, and essential-spectrum curves.

The model is the rescaled logistic Keller-Segel system with chemorepulsion
and quasi-static chemical,

    u_t = d1 u_xx + (u v_x)_x + u (1 - u),
    0   = delta^2 v_xx + u - v,

posed in a frame moving with speed ``c``.  Linearizing about the unstable
state (0, 0) in that frame and inserting exponentials exp(nu x + lambda t)
gives the product-form dispersion relation

    d_c(lambda, nu) = (d1 nu^2 + c nu + 1 - lambda) * (delta^2 nu^2 - 1),

whose pinched double root selects the linear spreading speed 2 sqrt(d1).
"""

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .errors import DomainError, NewtonDiverged

__all__ = [
    "ModelParams",
    "DispersionRoot",
    "SpectrumCurve",
    "dispersion",
    "dispersion_first_factor",
    "linear_spreading_speed",
    "essential_spectrum",
]

#: Default cap on d1 + 1/d1 (the analysis assumes this stays bounded).
DEFAULT_D1_CAP = 1e3

#: Absolute tolerance on |d_c| for accepting dispersion roots.
TOL_ROOT = 1e-12

_NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class ModelParams:
    """Model constants (d1, delta) plus the frame speed c.

    d1 = 1/chi is the rescaled diffusivity and delta^2 = sigma/chi the
    singular parameter; both are derived from the chemotactic sensitivity
    chi and chemical diffusivity sigma of the unscaled model.
    """

    d1: float
    delta: float
    c: float
    d1_cap: float = field(default=DEFAULT_D1_CAP, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.d1) and self.d1 > 0):
            raise DomainError(f"d1 must be positive and finite, got {self.d1}")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise DomainError(f"delta must be nonnegative and finite, got {self.delta}")
        if not np.isfinite(self.c):
            raise DomainError(f"c must be finite, got {self.c}")
        if self.d1 + 1.0 / self.d1 > self.d1_cap:
            raise DomainError(
                f"d1 + 1/d1 = {self.d1 + 1/self.d1:.3g} exceeds the cap {self.d1_cap:.3g}"
            )

    @property
    def delta2(self):
        return self.delta**2

    @property
    def chi(self):
        return 1.0 / self.d1

    @property
    def sigma(self):
        return self.delta2 / self.d1

    @property
    def eta_lin(self):
        """Decay rate of the leading-edge double-root mode, 1/sqrt(d1)."""
        return 1.0 / sqrt(self.d1)

    @classmethod
    def at_linear_speed(cls, d1, delta, **kw):
        """Parameters in the frame moving with c_lin = 2 sqrt(d1)."""
        return cls(d1, delta, 2.0 * sqrt(d1), **kw)


@dataclass(frozen=True)
class DispersionRoot:
    """A root (lambda, nu) of the dispersion relation."""

    lam: complex
    nu: complex
    is_double: bool
    is_pinched: bool
    residual: float = 0.0

    def validate(self, p: ModelParams, tol=TOL_ROOT):
        r = abs(dispersion(self.lam, self.nu, p))
        if r > tol:
            raise DomainError(f"stored root residual {r:.3e} exceeds {tol:.1e}")
        if self.is_double:
            dnu = _d_dnu(self.lam, self.nu, p)
            if abs(dnu) > tol:
                raise DomainError(f"double-root derivative {abs(dnu):.3e} exceeds {tol:.1e}")
        return True


@dataclass(frozen=True)
class SpectrumCurve:
    """Sampled essential-spectrum curve lambda(k) for one exponential weight."""

    eta: float
    k: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        if not np.all(np.diff(self.k) > 0):
            raise DomainError("wavenumber samples must be strictly increasing")

    @property
    def samples(self):
        return list(zip(self.k.tolist(), self.lam.tolist()))

    @property
    def max_real_part(self):
        return float(np.max(self.lam.real))


def dispersion(lam, nu, p: ModelParams):
    """Evaluate d_c(lambda, nu) in product form.  Total and analytic."""
    lam = complex(lam)
    nu = complex(nu)
    return (p.d1 * nu**2 + p.c * nu + 1.0 - lam) * (p.delta2 * nu**2 - 1.0)


def dispersion_first_factor(lam, nu, p: ModelParams):
    """The growth-bearing factor d1 nu^2 + c nu + 1 - lambda."""
    return p.d1 * complex(nu) ** 2 + p.c * complex(nu) + 1.0 - complex(lam)


def _d_dnu(lam, nu, p: ModelParams):
    f1 = p.d1 * nu**2 + p.c * nu + 1.0 - lam
    f2 = p.delta2 * nu**2 - 1.0
    return (2.0 * p.d1 * nu + p.c) * f2 + f1 * (2.0 * p.delta2 * nu)


def _pinched(d1, delta, c, nu_root, lam_max=1e8, n=80):
    """Track the two nu-roots of the first factor for real lambda -> +infinity
    and confirm they separate into opposite real-part half planes."""
    lams = np.geomspace(1.0, lam_max, n)
    disc = c**2 - 4.0 * d1 * (1.0 - lams)
    sq = np.sqrt(disc.astype(complex))
    nu_plus = (-c + sq) / (2.0 * d1)
    nu_minus = (-c - sq) / (2.0 * d1)
    separation = nu_plus.real - nu_minus.real
    if np.any(np.diff(separation) <= 0):
        return False
    return bool(nu_plus.real[-1] > 10.0 * abs(nu_root) and nu_minus.real[-1] < -10.0 * abs(nu_root))


def linear_spreading_speed(d1, delta):
    """Linear spreading speed and its pinched double root.

    Solves d_c(0, nu) = 0, (d/dnu) d_c(0, nu) = 0 for (nu, c) by Newton
    iteration started near the closed forms nu = -1/sqrt(d1), c = 2 sqrt(d1);
    agreement with the closed form doubles as a solver self-test.

    Returns
    -------
    (c_lin, root, coeffs)
        ``coeffs`` is a dict with the local expansion coefficients
        d10 = 1 - delta^2 nu^2 and d02 = d1 (1 - delta^2 nu^2) of
        d_c(lambda, nu_root + nu) ~ d10 lambda - d02 nu^2.
    """
    if d1 <= 0:
        raise DomainError("d1 must be positive")
    nu_exact = -1.0 / sqrt(d1)
    c_exact = 2.0 * sqrt(d1)
    if delta > 0 and abs((delta * nu_exact) ** 2 - 1.0) < 1e-10:
        raise DomainError(
            "second dispersion factor degenerates at the double root (delta^2 = d1 resonance)"
        )

    # Start slightly off the closed form so the iteration genuinely runs.
    nu, c = nu_exact * (1.0 + 1e-3), c_exact * (1.0 - 1e-3)
    p = None
    for _ in range(_NEWTON_MAX_ITER):
        p = ModelParams(d1, delta, c)
        f = np.array([dispersion(0.0, nu, p).real, _d_dnu(0.0, nu, p).real])
        if np.max(np.abs(f)) <= TOL_ROOT:
            break
        f2 = delta**2 * nu**2 - 1.0
        df2 = 2.0 * delta**2 * nu
        f1 = d1 * nu**2 + c * nu + 1.0
        df1 = 2.0 * d1 * nu + c
        # Jacobian of (d_c, d_nu d_c) with respect to (nu, c).
        J = np.array(
            [
                [df1 * f2 + f1 * df2, nu * f2],
                [2.0 * d1 * f2 + 2.0 * df1 * df2 + f1 * 2.0 * delta**2, f2 + nu * df2],
            ]
        )
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged("singular Jacobian in double-root solve") from exc
        nu, c = nu + step[0], c + step[1]
    else:
        raise NewtonDiverged(
            "double-root Newton did not converge", residual_norm=float(np.max(np.abs(f)))
        )

    p = ModelParams(d1, delta, c)
    root = DispersionRoot(
        lam=0.0 + 0.0j,
        nu=complex(nu),
        is_double=abs(_d_dnu(0.0, nu, p)) <= TOL_ROOT,
        is_pinched=_pinched(d1, delta, c, nu),
        residual=abs(dispersion(0.0, nu, p)),
    )
    w = 1.0 - delta**2 * nu**2
    coeffs = {"d10": w, "d02": d1 * w}
    return c, root, coeffs


def essential_spectrum(p: ModelParams, state, eta, k_range=(-10.0, 10.0), n_samples=201):
    """Essential-spectrum curve of the linearization at a spatial equilibrium.

    Parameters
    ----------
    p : ModelParams
    state : {"leading_edge", "wake"}
        Equilibrium at which to linearize: (0, 0) ahead of the front or
        (1, 1) behind it.
    eta : float
        Exponential weight rate; the curve samples lambda with
        nu = i k - eta.
    k_range, n_samples
        Wavenumber window and resolution (n_samples >= 2).

    Notes
    -----
    At (0, 0) the chemotactic coupling vanishes with u, so the symbol
    determinant factorizes and lambda(k) is the root of the first factor.
    At (1, 1) the linearized flux contributes a v_xx term to the u row,
    so lambda(k) solves the full 2x2 symbol determinant; its k = 0 value
    is -1 either way.
    """
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")
    if p.delta > 0 and min(abs(eta - 1.0 / p.delta), abs(eta + 1.0 / p.delta)) < 1e-6:
        raise DomainError(
            "weight rate eta within 1e-6 of +-1/delta: second dispersion factor singular"
        )
    k = np.linspace(k_range[0], k_range[1], n_samples)
    nu = 1j * k - eta
    if state == "leading_edge":
        lam = p.d1 * nu**2 + p.c * nu + 1.0
    elif state == "wake":
        lam = p.d1 * nu**2 + p.c * nu - 1.0
        # Coupling of the u row to v_xx at (1, 1): subtract nu^2 / (delta^2 nu^2 - 1).
        lam = lam - nu**2 / (p.delta2 * nu**2 - 1.0)
    else:
        raise DomainError(f"unknown state {state!r}")
    return [SpectrumCurve(eta=float(eta), k=k, lam=lam)]
