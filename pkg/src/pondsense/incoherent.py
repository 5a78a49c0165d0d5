"""Incoherent averaging of outcome probabilities: carrier-envelope phase,
focal volume, and shot-to-shot intensity fluctuations.

Every layer maps a vector of outcome probabilities (and its intensity
derivative) to the averaged pair.  The microscopic sampler is a callable
``micro(intensity, cep) -> (p, dp_dI)`` supplied by the pipeline; the layers
never finite-difference it.  The intensity-fluctuation layer obtains the
derivative by differentiating its Gaussian weight instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class CepSpec:
    n_phi: int = 8

    def __post_init__(self):
        if self.n_phi < 4:
            raise EnsembleError(f"cep.n_phi must be >= 4, got {self.n_phi}")


@dataclass(frozen=True)
class FocalSpec:
    """Gaussian-beam focal averaging with constant number density.

    The normalized shell weights depend only on the intensity ratio and the
    axial cut, so ``w0_um``/``z0_um`` set the geometry but drop out of the
    weights; they are kept for interface completeness.
    """

    w0_um: float = 30.0
    z0_um: float = 1000.0
    zrange_z0: float = 2.0
    n_nodes: int = 17
    imin_frac: float = 0.4
    literal_waist: bool = False   # use the (1 + (z/z0)^(1/2)) variant verbatim

    def __post_init__(self):
        if not (0.0 < self.imin_frac < 1.0):
            raise EnsembleError("focal.imin_frac must be in (0, 1)")
        if self.zrange_z0 <= 0 or not np.isfinite(self.zrange_z0):
            raise EnsembleError("focal averaging needs a finite z range")
        if self.n_nodes < 3:
            raise EnsembleError("focal.n_nodes must be >= 3")


@dataclass(frozen=True)
class FluctSpec:
    sigma_pct: float = 1.0
    delta_sigmas: float = 4.0
    n_nodes: int = 17

    def __post_init__(self):
        if self.sigma_pct <= 0:
            raise EnsembleError("fluct.sigma_pct must be positive")
        if self.delta_sigmas < 4.0:
            raise EnsembleError("fluct.delta_sigmas must be >= 4 so the "
                                "boundary terms of the weight derivative are negligible")
        if self.n_nodes < 5:
            raise EnsembleError("fluct.n_nodes must be >= 5")


@dataclass(frozen=True)
class EnsembleSpec:
    cep: CepSpec | None = None
    focal: FocalSpec | None = None
    fluct: FluctSpec | None = None

    @property
    def any_enabled(self) -> bool:
        return any(x is not None for x in (self.cep, self.focal, self.fluct))


# -- layers ------------------------------------------------------------------

def cep_average(micro, intensity: float, n_phi: int):
    """Uniform CEP average over [0, 2 pi): spectrally accurate trapezoid."""
    phis = np.arange(n_phi) * 2.0 * np.pi / n_phi
    acc_p = acc_d = None
    for phi in phis:
        p, d = micro(intensity, phi)
        acc_p = p if acc_p is None else acc_p + p
        acc_d = d if acc_d is None else acc_d + d
    return acc_p / n_phi, acc_d / n_phi


def focal_shell_weights(spec: FocalSpec):
    """Quadrature nodes (intensity ratios) and normalized volume weights.

    The iso-intensity volume of the beam profile I = I0 (w0/w(z)) exp(-2
    rho^2/w(z)^2) with |z| <= zrange z0 has the closed-form derivative
    dV/d(ln(I0/I)) ~ U + U^3/3, where U is the axial extent of the shell.
    """
    x, wq = np.polynomial.legendre.leggauss(spec.n_nodes)
    lo = spec.imin_frac
    s = lo + 0.5 * (x + 1.0) * (1.0 - lo)
    glw = 0.5 * (1.0 - lo) * wq
    c = -np.log(s)
    if spec.literal_waist:
        # waist w0 (1 + (z/z0)^(1/2)): dV/dc ~ int (w/w0)^2 du up to the
        # axial shell edge where 1 + sqrt(u) = e^c
        u_ax = np.minimum((np.expm1(c)) ** 2, spec.zrange_z0)
        j = u_ax + (4.0 / 3.0) * u_ax**1.5 + 0.5 * u_ax**2
    else:
        u_ax = np.minimum(np.sqrt(np.expm1(2.0 * c)), spec.zrange_z0)
        j = u_ax + u_ax**3 / 3.0
    w = glw * j / s
    return s, w / w.sum()


def focal_average(micro_i, spec: FocalSpec, intensity0: float):
    """Average over the focal volume; derivative by the chain rule I = s I0."""
    s, w = focal_shell_weights(spec)
    acc_p = acc_d = None
    for sj, wj in zip(s, w):
        p, d = micro_i(sj * intensity0)
        tp = wj * p
        td = wj * sj * d
        acc_p = tp if acc_p is None else acc_p + tp
        acc_d = td if acc_d is None else acc_d + td
    return acc_p, acc_d


def fluct_average(micro_i, sigma: float, delta: float, intensity0: float,
                  n_nodes: int = 17):
    """Gaussian intensity-fluctuation average and its I0 derivative.

    The derivative differentiates the (normalized, truncated) Gaussian
    weight analytically; the microscopic derivative is never used here.
    """
    if sigma <= 0:
        raise EnsembleError("sigma must be positive")
    if delta < 4.0 * sigma:
        raise EnsembleError("delta must be >= 4 sigma")
    x, wq = np.polynomial.legendre.leggauss(n_nodes)
    ii = intensity0 + x * delta
    glw = wq * delta
    f = np.exp(-0.5 * ((ii - intensity0) / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))
    norm = float(np.sum(glw * f))
    acc_p = acc_d = None
    for ij, gw, fj in zip(ii, glw, f):
        p, _ = micro_i(ij)
        wp = gw * fj / norm
        wd = gw * fj * (ij - intensity0) / sigma**2 / norm
        tp = wp * p
        td = wd * p
        acc_p = tp if acc_p is None else acc_p + tp
        acc_d = td if acc_d is None else acc_d + td
    return acc_p, acc_d


def averaged_probabilities(micro, ensemble: EnsembleSpec, intensity0: float,
                           cep_fixed: float):
    """Compose the enabled layers: fluct(focal(cep(micro))).

    ``micro(intensity, cep) -> (p, dp_dI)`` returns outcome probabilities and
    their intensity derivative; the returned pair is the fully averaged
    distribution and its I0 derivative.
    """
    if not ensemble.any_enabled:
        raise EnsembleError("no averaging layer enabled")

    if ensemble.cep is not None:
        micro_i = lambda i: cep_average(micro, i, ensemble.cep.n_phi)
    else:
        micro_i = lambda i: micro(i, cep_fixed)

    if ensemble.focal is not None:
        inner = micro_i
        micro_i = lambda i, _f=ensemble.focal, _m=inner: focal_average(_m, _f, i)

    if ensemble.fluct is not None:
        sigma = ensemble.fluct.sigma_pct / 100.0 * intensity0
        delta = ensemble.fluct.delta_sigmas * sigma
        return fluct_average(micro_i, sigma, delta, intensity0,
                             ensemble.fluct.n_nodes)
    return micro_i(intensity0)


def ensemble_cfi(p: np.ndarray, dp_di0: np.ndarray,
                 floor_rel: float = 1e-15) -> float:
    """Classical Fisher information of the averaged outcome distribution.

    Returned in intensity units (1/I0^2 scale); multiply by (I0/U_p)^2 for
    ponderomotive-energy units.
    """
    keep = p >= floor_rel * p.max()
    return float(np.sum(dp_di0[keep] ** 2 / p[keep]))
