"""Driving laser field: vector potential, envelope and closed-form integrals.

Everything is expressed in atomic units (hbar = e = m_e = 1).  The field is
linearly polarized; only the scalar component along the polarization axis is
ever needed.  All time-dependent quantities accept complex time arguments,
since the stationary ionization times live off the real axis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf, wofz

# atomic-unit constants
C_AU = 137.035999084          # speed of light
EPS0_AU = 1.0 / (4.0 * np.pi)  # vacuum permittivity
BOHR_M = 5.29177210903e-11    # Bohr radius [m]
INTENSITY_AU_WCM2 = 6.4364e15  # 1 a.u. of intensity in W/cm^2
LN2 = np.log(2.0)


class FieldError(ValueError):
    """Invalid field parameters."""


def omega_from_wavelength(wavelength_nm: float) -> float:
    """Angular frequency (a.u.) of light with the given vacuum wavelength."""
    if wavelength_nm <= 0:
        raise FieldError(f"wavelength must be positive, got {wavelength_nm}")
    lam_au = wavelength_nm * 1e-9 / BOHR_M
    return 2.0 * np.pi * C_AU / lam_au


def up_from_intensity(intensity_wcm2: float, wavelength_nm: float) -> float:
    """Ponderomotive energy U_p = I / (2 c eps0 w^2), converted to a.u.

    Linear in intensity; (2e14 W/cm^2, 800 nm) gives 0.439 a.u.
    """
    if intensity_wcm2 < 0:
        raise FieldError(f"intensity must be non-negative, got {intensity_wcm2}")
    omega = omega_from_wavelength(wavelength_nm)
    i_au = intensity_wcm2 / INTENSITY_AU_WCM2
    return i_au / (2.0 * C_AU * EPS0_AU * omega**2)


def intensity_from_up(up: float, omega: float) -> float:
    """Inverse of :func:`up_from_intensity` at fixed angular frequency (W/cm^2)."""
    return up * 2.0 * C_AU * EPS0_AU * omega**2 * INTENSITY_AU_WCM2


def _erf_scaled(z, k: float):
    """exp(-k) * erf(z), evaluated without overflow.

    Needed because erf(x + iy) grows like exp(y^2) while the closed-form
    integrals always pair it with a damping factor exp(-k), k ~ y^2.
    """
    z = np.asarray(z, dtype=complex)
    if k < 400.0:
        return np.exp(-k) * erf(z)
    s = np.where(z.real >= 0.0, 1.0, -1.0)
    return s * np.exp(-k) - s * np.exp(-k - z * z) * wofz(1j * s * z)


@dataclass(frozen=True)
class LaserField:
    """Linearly polarized laser field A(t) = 2 sqrt(U_p) F(t) cos(w t + phi).

    ``envelope`` is ``"mono"`` (F = 1) or ``"gaussian"`` with
    F(t) = exp(-2 ln2 t^2 / tau^2); tau is then the FWHM of the intensity
    envelope F^2 (F(tau/2)^2 = 1/2), centered at t = 0.
    """

    up: float
    omega: float
    cep: float = 0.0
    envelope: str = "mono"
    tau: float | None = None

    def __post_init__(self):
        if self.up <= 0:
            raise FieldError(f"up must be positive, got {self.up}")
        if self.omega <= 0:
            raise FieldError(f"omega must be positive, got {self.omega}")
        if self.envelope not in ("mono", "gaussian"):
            raise FieldError(f"unknown envelope {self.envelope!r}")
        if self.envelope == "gaussian":
            if self.tau is None or self.tau <= 0:
                raise FieldError("gaussian envelope requires tau > 0")

    # -- basic parameters ------------------------------------------------

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    @property
    def a0(self) -> float:
        """Peak vector-potential amplitude 2 sqrt(U_p)."""
        return 2.0 * np.sqrt(self.up)

    @property
    def is_mono(self) -> bool:
        return self.envelope == "mono"

    @property
    def pulse_end(self) -> float:
        """Time at which the pulse is over (field negligible)."""
        if self.is_mono:
            raise FieldError("a monochromatic field has no end; pass t explicitly")
        return 3.0 * self.tau

    def with_up(self, up: float) -> "LaserField":
        return replace(self, up=up)

    # -- time-domain quantities (complex-capable) ------------------------

    def _b(self) -> float:
        # Gaussian exponent: F(t) = exp(-b t^2)
        return 2.0 * LN2 / self.tau**2

    def envelope_f(self, t):
        if self.is_mono:
            return np.ones_like(np.asarray(t))
        return np.exp(-self._b() * np.asarray(t) ** 2)

    def vector_potential(self, t):
        t = np.asarray(t)
        return self.a0 * self.envelope_f(t) * np.cos(self.omega * t + self.cep)

    def a_prime(self, t):
        """dA/dt (so the electric field is E = -dA/dt)."""
        t = np.asarray(t)
        ph = self.omega * t + self.cep
        if self.is_mono:
            return -self.a0 * self.omega * np.sin(ph)
        b = self._b()
        f = np.exp(-b * t**2)
        return self.a0 * f * (-2.0 * b * t * np.cos(ph) - self.omega * np.sin(ph))

    def electric_field(self, t):
        return -self.a_prime(t)

    def nearest_a_zero(self, t: float, direction: int = 0) -> float:
        """Zero of A closest to ``t`` (carrier crossing cos(w t + phi) = 0).

        ``direction`` > 0 picks the nearest zero at or after ``t``, < 0 the
        nearest at or before, 0 the closest either way.
        """
        k = (t * self.omega + self.cep - np.pi / 2.0) / np.pi
        if direction > 0:
            k = np.ceil(k - 1e-12)
        elif direction < 0:
            k = np.floor(k + 1e-12)
        else:
            k = np.round(k)
        return (np.pi / 2.0 - self.cep + k * np.pi) / self.omega

    # -- closed-form running integrals ------------------------------------

    def int_a(self, t0, t1):
        """Integral of A(s) ds from t0 to t1 (complex endpoints allowed)."""
        t0 = np.asarray(t0, dtype=complex)
        t1 = np.asarray(t1, dtype=complex)
        w, phi = self.omega, self.cep
        if self.is_mono:
            return (self.a0 / w) * (np.sin(w * t1 + phi) - np.sin(w * t0 + phi))
        b = self._b()
        sb = np.sqrt(b)
        k = w**2 / (4.0 * b)
        pref = np.sqrt(self.up) * 0.5 * np.sqrt(np.pi / b)
        out = 0.0
        for s in (1.0, -1.0):
            shift = s * 1j * w / (2.0 * sb)
            term = _erf_scaled(sb * t1 - shift, k) - _erf_scaled(sb * t0 - shift, k)
            out = out + np.exp(s * 1j * phi) * term
        return pref * out

    def int_a2(self, t0, t1):
        """Integral of A(s)^2 ds from t0 to t1 (complex endpoints allowed)."""
        t0 = np.asarray(t0, dtype=complex)
        t1 = np.asarray(t1, dtype=complex)
        w, phi, up = self.omega, self.cep, self.up
        if self.is_mono:
            lin = 2.0 * up * (t1 - t0)
            osc = (up / w) * (np.sin(2.0 * (w * t1 + phi)) - np.sin(2.0 * (w * t0 + phi)))
            return lin + osc
        b = self._b()
        s2b = np.sqrt(2.0 * b)
        pref = 0.5 * np.sqrt(np.pi / (2.0 * b))
        dc = 2.0 * up * pref * (erf(s2b * t1) - erf(s2b * t0))
        k = w**2 / (2.0 * b)
        osc = 0.0
        for s in (1.0, -1.0):
            shift = s * 1j * w / s2b
            term = _erf_scaled(s2b * t1 - shift, k) - _erf_scaled(s2b * t0 - shift, k)
            osc = osc + np.exp(2j * s * phi) * term
        return dc + up * pref * osc


def standard_field(intensity_wcm2: float = 2e14, wavelength_nm: float = 800.0,
                   cep: float = np.pi / 2, envelope: str = "mono",
                   cycles_fwhm: float | None = None) -> LaserField:
    """Convenience constructor from laboratory units."""
    up = up_from_intensity(intensity_wcm2, wavelength_nm)
    omega = omega_from_wavelength(wavelength_nm)
    tau = None
    if envelope == "gaussian":
        if cycles_fwhm is None:
            raise FieldError("gaussian envelope requires cycles_fwhm")
        tau = cycles_fwhm * 2.0 * np.pi / omega
    return LaserField(up=up, omega=omega, cep=cep, envelope=envelope, tau=tau)
