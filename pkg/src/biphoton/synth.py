"""Model two-photon states: correlated Gaussian joint spectral amplitude with
optional quadratic spectral phase, plus the analytic diagnostics (Schmidt
purity, Gaussian time-bandwidth product) that go with it."""

from dataclasses import dataclass

import numpy as np

from .grids import FREQUENCY, IDLER, SIGNAL, Axis, ComplexGrid2D


class ParameterError(ValueError):
    """State parameters outside their valid range."""


@dataclass(frozen=True)
class GaussianStateParams:
    """Correlated Gaussian state: marginal amplitude bandwidths (rad/fs),
    spectral correlation, optical centers (rad/fs), chirps (fs^2)."""

    sigma_s: float = 0.01
    sigma_i: float = 0.01
    rho: float = -0.95
    center_s: float = 2.289
    center_i: float = 2.574
    chirp_s: float = 0.0
    chirp_i: float = 0.0

    def __post_init__(self):
        if not (self.sigma_s > 0 and self.sigma_i > 0):
            raise ParameterError("sigma_s and sigma_i must be positive")
        if not abs(self.rho) < 1:
            raise ParameterError("|rho| must be < 1")


def gaussian_jsa(p: GaussianStateParams, n: int = 64, span_sigmas: float = 8.0) -> ComplexGrid2D:
    """Correlated Gaussian JSA on an n x n frequency grid.

    The grid spans +/- span_sigmas * sigma per axis around the centers.  The
    returned amplitude is real and positive (no chirp applied) and normalized
    so that the squared magnitude integrates to one.
    """
    if n < 16 or (n & (n - 1)) != 0:
        raise ParameterError("n must be a power of two >= 16")
    if span_sigmas < 6:
        raise ParameterError("span_sigmas must be >= 6")

    axis_s = Axis(FREQUENCY, SIGNAL, p.center_s, 2 * span_sigmas * p.sigma_s / n, n)
    axis_i = Axis(FREQUENCY, IDLER, p.center_i, 2 * span_sigmas * p.sigma_i / n, n)
    ds = axis_s.offsets()[:, None] / p.sigma_s
    di = axis_i.offsets()[None, :] / p.sigma_i
    one_m_r2 = 1.0 - p.rho**2
    prefactor = 1.0 / (np.sqrt(2 * np.pi * p.sigma_s * p.sigma_i) * one_m_r2**0.25)
    exponent = -(ds**2 / 2 + di**2 / 2 - p.rho * ds * di) / (2 * one_m_r2)
    return ComplexGrid2D(axis_s, axis_i, prefactor * np.exp(exponent))


def apply_chirp(g: ComplexGrid2D, chirp_s: float, chirp_i: float) -> ComplexGrid2D:
    """Multiply by the quadratic spectral phase
    exp(i*A_s*(w_s - w_s0)^2 + i*A_i*(w_i - w_i0)^2).  Magnitude unchanged."""
    from .grids import DomainMismatchError

    if g.axis_s.domain != FREQUENCY or g.axis_i.domain != FREQUENCY:
        raise DomainMismatchError("apply_chirp needs both axes in the frequency domain")
    phase = chirp_s * g.axis_s.offsets()[:, None] ** 2 + chirp_i * g.axis_i.offsets()[None, :] ** 2
    return g.with_values(g.values * np.exp(1j * phase))


def schmidt_purity(rho: float) -> float:
    """Purity of one photon's reduced state, sqrt(1 - rho^2)."""
    if not abs(rho) < 1:
        raise ParameterError("|rho| must be < 1")
    return float(np.sqrt(1.0 - rho**2))


def tbp_gaussian(rho: float) -> float:
    """Time-bandwidth product of the equal-bandwidth Gaussian state,
    sqrt((1 + rho) / (1 - rho))."""
    if not abs(rho) < 1:
        raise ParameterError("|rho| must be < 1")
    return float(np.sqrt((1.0 + rho) / (1.0 - rho)))


def synthesize_state(p: GaussianStateParams, n: int = 64, span_sigmas: float = 8.0) -> ComplexGrid2D:
    """Gaussian JSA with the params' chirps applied."""
    return apply_chirp(gaussian_jsa(p, n, span_sigmas), p.chirp_s, p.chirp_i)
