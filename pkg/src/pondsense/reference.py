"""Independent brute-force oracles: direct time quadrature of the ionization
integral, finite-difference parameter derivatives, and blind root scans.

These deliberately avoid the saddle-point machinery they are used to audit.
They ship with the library so the CLI can run ``verify`` audits on user
configurations.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .field import LaserField
from ._kernels.pybackend import _newton_refine


class OracleError(RuntimeError):
    pass


def _action(p, t, field: LaserField, ip: float, t_ref: float):
    p_par, p_perp = p
    ia = field.int_a(t_ref, t)
    ia2 = field.int_a2(t_ref, t)
    p2 = p_par**2 + p_perp**2
    return ip * t + 0.5 * (p2 * (t - t_ref) + 2.0 * p_par * ia + ia2)


def amplitude_by_quadrature(p, field: LaserField, ip: float,
                            window: tuple[float, float] | None = None,
                            t_ref: float | None = None,
                            pts_per_cycle: int = 40,
                            tol: float = 1e-6, max_doublings: int = 12) -> complex:
    """M(p) by direct quadrature of int dt' d e^{i S(p, t')} over real t'.

    Composite Simpson with at least ``pts_per_cycle`` points per optical
    cycle, doubled until two refinements agree to ``tol`` (absolute).  The
    integrand does not decay at the window edges (pure phase), so the
    truncated tails are closed with the first stationary-phase boundary
    term d e^{iS} / (i dS/dt); with the window chosen where the envelope is
    negligible the phase is linear there and the closure is essentially
    exact.
    """
    if field.is_mono:
        raise OracleError("time-quadrature oracle expects a pulse")
    if window is None:
        window = (-3.0 * field.tau, 3.0 * field.tau)
    if t_ref is None:
        t_ref = -3.0 * field.tau
    t0, t1 = window
    if t1 <= t0:
        return 0.0 + 0.0j
    p_par, p_perp = p
    d = (2.0 * np.pi) ** (-1.5) * ip**0.25

    def integrand(t):
        return d * np.exp(1j * _action(p, t + 0j, field, ip, t_ref))

    def boundary_term(t):
        s_prime = ip + 0.5 * ((p_par + field.vector_potential(t)) ** 2 + p_perp**2)
        return d * np.exp(1j * _action(p, t + 0j, field, ip, t_ref)) / (1j * s_prime)

    n_cycles = (t1 - t0) / field.period
    n = int(np.ceil(n_cycles * pts_per_cycle / 2.0)) * 2
    n = max(n, 64)
    prev = None
    for _ in range(max_doublings + 1):
        t = np.linspace(t0, t1, n + 1)
        y = integrand(t)
        val = complex(np.sum((y[0:-1:2] + 4.0 * y[1::2] + y[2::2])) * (t[1] - t[0]) / 3.0)
        val += complex(boundary_term(t0) - boundary_term(t1))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise OracleError(f"time quadrature did not converge to {tol} at p={p}")


def fd_derivative(f, x: float, h: float, richardson: bool = True):
    """Central finite difference with optional one-step Richardson extrapolation."""
    def central(step):
        hi, lo = f(x + step), f(x - step)
        return (hi - lo) / (2.0 * step)

    d1 = central(h)
    if not np.all(np.isfinite(np.atleast_1d(d1))):
        raise OracleError(f"non-finite samples in finite difference at {x}")
    if not richardson:
        return d1
    d2 = central(0.5 * h)
    if not np.all(np.isfinite(np.atleast_1d(d2))):
        raise OracleError(f"non-finite samples in finite difference at {x}")
    return (4.0 * d2 - d1) / 3.0


def blind_root_scan(p, field: LaserField, ip: float,
                    region: tuple[float, float, float, float],
                    n_seeds: int = 64, accept_tol: float = 1e-10,
                    dedupe_tol: float = 1e-6) -> np.ndarray:
    """Newton from quasi-random seeds over a complex-time rectangle.

    ``region`` is (re_min, re_max, im_min, im_max).  Returns the deduplicated
    converged roots with Im > 0 that lie inside the rectangle, sorted by real
    part.  Deterministic: the seed sequence is a fixed Halton set.
    """
    re_min, re_max, im_min, im_max = region
    if re_max <= re_min or im_max <= im_min:
        return np.array([], dtype=complex)
    p_par, p_perp = p
    sampler = qmc.Halton(d=2, scramble=False, seed=0)
    pts = sampler.random(n_seeds)
    seeds = (re_min + pts[:, 0] * (re_max - re_min)
             + 1j * (im_min + pts[:, 1] * (im_max - im_min)))
    c2 = np.full(n_seeds, p_perp**2 + 2.0 * ip)
    roots, res = _newton_refine(seeds.astype(complex), p_par,
                                field.vector_potential, field.a_prime,
                                c2, 1e-13, 80)
    good = (res < accept_tol) & (roots.imag > 0.0) \
        & (roots.real >= re_min - dedupe_tol) & (roots.real <= re_max + dedupe_tol) \
        & (roots.imag <= im_max + dedupe_tol)
    roots = roots[good]
    kept: list[complex] = []
    for r in sorted(roots, key=lambda z: (z.real, z.imag)):
        if all(abs(r - k) > dedupe_tol for k in kept):
            kept.append(complex(r))
    return np.array(kept, dtype=complex)
