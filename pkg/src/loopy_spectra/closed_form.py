"""Exact spectrum of the random regular edge-triangle network.

Every node sits in one single edge and one triangle. In the large-n limit
all edge messages share one value and all triangle messages another, the
message equations collapse to a quadratic, and the density has a closed
form: two mirror-image bands about x = 1/2 plus delta peaks at x = -2 and
x = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergentExtrapolation

PEAK_LOCATIONS = (-2.0, 0.0)


def _discriminant(z):
    return z**4 - 2 * z**3 - 5 * z**2 + 6 * z + 1


def _branches(z):
    z = np.asarray(z, dtype=np.complex128)
    root = np.sqrt(_discriminant(z))
    a = z * z - z - 1
    return (a + root) / (2 * z), (a - root) / (2 * z), root


def _pick(z):
    """Physical branch: the root whose density has the larger imaginary part
    (the other branch has Im rho < 0 off the real axis)."""
    plus, minus, root = _branches(z)
    rho_p = (1 / np.pi) / (plus - 1 / plus)
    rho_m = (1 / np.pi) / (minus - 1 / minus)
    use_plus = rho_p.imag > rho_m.imag
    return np.where(use_plus, plus, minus), np.where(use_plus, root, -root)


def mu_regular(z):
    """Edge message mu(z) on the physical branch; accepts arrays. Im z > 0."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag <= 0):
        raise ValueError("mu_regular needs Im z > 0")
    mu, _ = _pick(z)
    return mu[()] if mu.ndim == 0 else mu


def regular_messages(z):
    """All four homogeneous messages ``(mu, nu, g, h)`` at ``z``."""
    mu = mu_regular(z)
    h = 1 / (z - mu)
    nu = 2 * h / (1 - h)
    g = 1 / (z - nu)
    return mu, nu, g, h


def rho_regular_complex(z):
    """Complex density rho(z) from the rational closed form."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag <= 0):
        raise ValueError("rho_regular_complex needs Im z > 0")
    _, root = _pick(z)
    num = z * z - z - 1 + (2 * z - 1) * root
    den = 2 * np.pi * (z**4 - 2 * z**3 - 5 * z**2 + 6 * z)
    out = num / den
    return out[()] if out.ndim == 0 else out


def rho_regular_from_mu(z):
    """Complex density via (1/pi) / (mu - 1/mu); cross-check for the closed form."""
    mu = mu_regular(z)
    return (1 / np.pi) / (mu - 1 / mu)


def rho_regular_real(x):
    """Continuous part of the density on the real axis (peaks excluded)."""
    x = np.asarray(x, dtype=float)
    q = (x - 0.5) ** 2 - 13.0 / 4.0
    rad = 8.0 - q * q
    inside = rad > 0
    out = np.zeros_like(x)
    qi = q[inside]
    out[inside] = np.abs(x[inside] - 0.5) * np.sqrt(rad[inside]) / (9.0 - qi * qi) / np.pi
    return out[()] if out.ndim == 0 else out


def band_edges():
    """The four band edges, ascending."""
    r = np.sqrt(2.0)
    outer = np.sqrt(13 + 8 * r)
    inner = np.sqrt(13 - 8 * r)
    return (0.5 * (1 - outer), 0.5 * (1 - inner), 0.5 * (1 + inner), 0.5 * (1 + outer))


@dataclass(frozen=True)
class PeakWeights:
    locations: tuple
    weights: tuple
    weight_uncertainty: tuple

    def to_dict(self):
        return {
            "locations": list(self.locations),
            "weights": list(self.weights),
            "weight_uncertainty": list(self.weight_uncertainty),
        }


def peak_weights(eta_sequence=(1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4)) -> PeakWeights:
    """Delta-peak masses at x = -2 and x = 0, extrapolated to eta -> 0.

    For each eta the estimate is ``pi * eta * Im rho(x0 + i eta)``, which
    equals the peak mass plus O(eta) from the rest of the spectrum. A
    quadratic in eta is fitted and its intercept taken; the uncertainty is
    the distance between the quadratic and linear intercepts plus the fit
    residual.
    """
    etas = np.asarray(eta_sequence, dtype=float)
    if etas.ndim != 1 or len(etas) < 3:
        raise ValueError("need at least three eta values")
    if np.any(etas <= 0) or np.any(np.diff(etas) >= 0):
        raise ValueError("eta values must be positive and strictly descending")
    weights, errs = [], []
    for x0 in PEAK_LOCATIONS:
        w = np.pi * etas * rho_regular_complex(x0 + 1j * etas).imag
        if not np.all(np.isfinite(w)):
            raise NonConvergentExtrapolation(f"non-finite estimates at x={x0}")
        quad = np.polyfit(etas, w, 2)
        lin = np.polyfit(etas, w, 1)
        resid = np.max(np.abs(np.polyval(quad, etas) - w))
        w0 = quad[-1]
        err = abs(quad[-1] - lin[-1]) + resid
        if err > 0.01 * max(abs(w0), 1e-12):
            raise NonConvergentExtrapolation(
                f"peak weight at x={x0} unstable: {w0:.6g} +/- {err:.3g}")
        weights.append(float(w0))
        errs.append(float(err))
    return PeakWeights(PEAK_LOCATIONS, tuple(weights), tuple(errs))
