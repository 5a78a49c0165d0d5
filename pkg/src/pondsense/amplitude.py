"""Saddle-point transition amplitude, its parameter derivative, and the
analytic intercycle interference factor.

The grid-level entry point is :func:`compute_amplitude_grid`, which drives
the selected kernel backend and returns an :class:`AmplitudeGrid`.  The
scalar helpers mirror the same sums one momentum at a time and are used by
the oracle tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .field import LaserField
from .saddle import Channels, SaddleSet, action_bundle, default_t_ref, select_channels

TWO_PI = 2.0 * np.pi


class AmplitudeError(RuntimeError):
    pass


def bound_matrix_element(ip: float) -> float:
    """Plane-wave matrix element <q|V|0> of the regularized contact potential.

    Independent of q: V acting on the bound state collapses to
    I_p^{1/4} delta^3(r), so the element is (2 pi)^{-3/2} I_p^{1/4}.
    """
    if ip <= 0:
        raise ValueError(f"ip must be positive, got {ip}")
    return TWO_PI ** (-1.5) * ip**0.25


@dataclass(frozen=True)
class InterferenceOptions:
    n_channels: int | None = 1
    intra_pairs: bool = True
    coherent: bool = True

    def __post_init__(self):
        if self.n_channels is not None and self.n_channels < 1:
            raise ValueError("n_channels must be >= 1")


@dataclass
class AmplitudeGrid:
    """M(p) and the derivative kernel G(p) on a (p_par x p_perp) grid.

    G collects the saddle terms weighted by dS/dU_p at the saddle, so the
    derivative amplitude at any evaluation time t with A(t) = 0 is
    M_g(p, t) = i [G(p) - dS/dU_p(p, t) M(p)] without re-summing saddles.
    """

    p_par: np.ndarray
    p_perp: np.ndarray
    m: np.ndarray
    g: np.ndarray
    rho_inc: np.ndarray
    d_inc: np.ndarray
    field: LaserField
    ip: float
    t_ref: float
    channels: Channels
    max_residual: float
    n_failed: int

    def ds_dup_final(self, t_eval: float) -> np.ndarray:
        ia = complex(self.field.int_a(self.t_ref, t_eval))
        ia2 = complex(self.field.int_a2(self.t_ref, t_eval))
        c = (self.p_par[:, None] * ia + ia2) / (2.0 * self.field.up)
        return np.broadcast_to(c.real, self.m.shape) if np.isrealobj(c) else c

    def m_g(self, t_eval: float) -> np.ndarray:
        """Derivative amplitude M_g(p, t_eval)."""
        c = (self.p_par[:, None] * complex(self.field.int_a(self.t_ref, t_eval))
             + complex(self.field.int_a2(self.t_ref, t_eval))) / (2.0 * self.field.up)
        return 1j * (self.g - c * self.m)

    def prob(self) -> np.ndarray:
        return np.abs(self.m) ** 2

    def prob_derivative(self) -> np.ndarray:
        """d|M|^2/dU_p; independent of the evaluation time."""
        return -2.0 * np.imag(np.conj(self.m) * self.g)


def compute_amplitude_grid(p_par, p_perp, field: LaserField, ip: float,
                           channels: Channels | None = None,
                           opts: InterferenceOptions | None = None,
                           t_ref: float | None = None,
                           backend: str = "auto",
                           n_threads: int = 0,
                           want_times: bool = False,
                           want_terms: bool = False):
    """Evaluate the saddle-point amplitude sums over a momentum grid."""
    if channels is None:
        opts = opts or InterferenceOptions()
        channels = select_channels(field, opts.n_channels, opts.intra_pairs)
    if t_ref is None:
        t_ref = default_t_ref(field, channels)
    kern = _kernels.get_backend(backend)
    out = kern.amplitude_grid(
        np.asarray(p_par, dtype=float), np.asarray(p_perp, dtype=float),
        _kernels.field_params(field), ip,
        channels.e, channels.n, channels.t_seed, t_ref,
        want_times=want_times, want_terms=want_terms, n_threads=n_threads)
    amps = AmplitudeGrid(
        p_par=np.asarray(p_par, dtype=float), p_perp=np.asarray(p_perp, dtype=float),
        m=out["m"], g=out["g"], rho_inc=out["rho_inc"], d_inc=out["d_inc"],
        field=field, ip=ip, t_ref=t_ref, channels=channels,
        max_residual=out["max_residual"], n_failed=out["n_failed"])
    extras = {k: out[k] for k in ("times", "terms", "terms_g") if k in out}
    return (amps, extras) if (want_times or want_terms) else amps


# -- scalar building blocks (oracle-facing) ---------------------------------

def saddle_terms(p, saddles: SaddleSet, field: LaserField, ip: float,
                 t_ref: float):
    """Per-saddle amplitude terms and dS/dU_p values at one momentum.

    The square-root branch is the principal one; at a single momentum there
    is no continuation path, which matches the kernel's seed at the grid
    origin.
    """
    d = bound_matrix_element(ip)
    terms, ds = [], []
    for s in saddles.entries:
        b = action_bundle(p, s.t_ion, field, ip, t_ref)
        if abs(b.s_dd) < 1e-14:
            raise AmplitudeError(
                f"singular saddle prefactor at p={p}, t'={s.t_ion}")
        terms.append(np.sqrt(TWO_PI * 1j / b.s_dd) * d * np.exp(1j * b.s))
        ds.append(b.ds_dup)
    return np.array(terms), np.array(ds)


def transition_amplitude(p, saddles: SaddleSet, field: LaserField, ip: float,
                         t_ref: float | None = None, coherent: bool = True):
    """M(p) from a converged saddle set (or per-saddle terms if incoherent)."""
    if t_ref is None:
        t_ref = default_t_ref(field)
    terms, _ = saddle_terms(p, saddles, field, ip, t_ref)
    return terms.sum() if coherent else terms


def derivative_amplitude(p, t_final: float, saddles: SaddleSet,
                         field: LaserField, ip: float,
                         t_ref: float | None = None) -> complex:
    """M_g(p, t_final): same saddle sum with the derivative prefactor.

    For the contact potential the bound matrix element carries no U_p
    dependence, so the prefactor is i d (dS/dU_p(t') - dS/dU_p(t_final)).
    """
    if t_ref is None:
        t_ref = default_t_ref(field)
    terms, ds = saddle_terms(p, saddles, field, ip, t_ref)
    c = action_bundle(p, t_final, field, ip, t_ref).ds_dup
    return (1j * (ds - c) * terms).sum()


# -- monochromatic intercycle factor ----------------------------------------

def _sin_ratio_sq(u, n: int):
    """(sin(n u) / sin(u))^2 with the removable singularities filled in."""
    u = np.asarray(u, dtype=float)
    v = u - np.pi * np.round(u / np.pi)
    small = np.abs(v) < 1e-6
    vs = np.where(small, 1.0, v)
    ratio = np.where(small,
                     n * (1.0 - (n**2 - 1.0) * v**2 / 6.0),
                     np.sin(n * vs) / np.sin(vs))
    return ratio**2


def intercycle_factor(p, n_cycles: int, field: LaserField, ip: float):
    """Intercycle interference factor Omega_N(p) for a monochromatic field.

    Equals N^2 on the ATI rings (x = k omega) and 1 for a single cycle.
    """
    p_par, p_perp = p
    x = ip + field.up + 0.5 * (np.asarray(p_par) ** 2 + np.asarray(p_perp) ** 2)
    return _sin_ratio_sq(np.pi * x / field.omega, n_cycles)


def chi(p, n_cycles: int, field: LaserField, ip: float):
    """Logarithmic U_p derivative of Omega_N: d(Omega_N)/dU_p = chi_N Omega_N.

    chi_N = (2 pi / omega) [N cot(N pi x / omega) - cot(pi x / omega)],
    with x = I_p + U_p + p^2/2; diverges on the ATI rings, where the product
    chi_N Omega_N stays finite.
    """
    p_par, p_perp = p
    x = ip + field.up + 0.5 * (np.asarray(p_par) ** 2 + np.asarray(p_perp) ** 2)
    u = np.pi * x / field.omega
    return (TWO_PI / field.omega) * (n_cycles / np.tan(n_cycles * u) - 1.0 / np.tan(u))
