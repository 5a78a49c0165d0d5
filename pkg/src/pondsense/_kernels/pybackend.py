"""Pure-numpy amplitude kernel.

Reference implementation of the hot loop; the compiled backend in
``_core.pyx`` mirrors it operation for operation.  The sweep runs column by
column along p_par so that the Newton iteration for pulse saddles is warm
started from the neighbouring grid point and the square-root branch of the
saddle prefactor is tracked continuously (seeded with the principal branch
at the grid origin, chained down the first column).
"""

from __future__ import annotations

import numpy as np

from ..field import LaserField

TWO_PI = 2.0 * np.pi

MONO, GAUSSIAN = 0, 1


def field_params(field: LaserField) -> tuple:
    """Pack a LaserField plus ionization potential into the plain-tuple kernel API."""
    kind = MONO if field.is_mono else GAUSSIAN
    tau = 0.0 if field.is_mono else field.tau
    return (kind, field.up, field.omega, field.cep, tau)


def _unpack(params, ip):
    kind, up, omega, cep, tau = params
    env = "mono" if kind == MONO else "gaussian"
    fld = LaserField(up=up, omega=omega, cep=cep, envelope=env,
                     tau=None if kind == MONO else tau)
    return fld, float(ip)


def mono_saddle_time(p_par, p_perp, up, omega, cep, ip, e, n):
    """Closed-form stationary ionization time for a monochromatic field.

    Branch with Im(t) > 0 comes out of the principal arccos for both
    intracycle labels e = 0, 1.
    """
    sgn = 1.0 - 2.0 * np.asarray(e)          # (-1)^e
    y = np.sqrt(2.0 * ip + np.asarray(p_perp) ** 2)
    zeta = (-np.asarray(p_par) + sgn * 1j * y) / (2.0 * np.sqrt(up))
    base = (TWO_PI * (np.asarray(n) - np.asarray(e)) - cep) / omega
    return base - (sgn / omega) * np.arccos(zeta + 0j)


def _newton_refine(t, pp, a_of, ap_of, c2, tol, max_iter):
    """Damped complex Newton on g(t) = (pp + A(t))^2 + c2."""
    with np.errstate(over="ignore", invalid="ignore"):
        a = a_of(t)
        g = (pp + a) ** 2 + c2
        for _ in range(max_iter):
            absg = np.abs(g)
            active = absg > tol
            if not active.any():
                break
            denom = 2.0 * (pp + a) * ap_of(t)
            denom = np.where(denom == 0, 1e-300, denom)
            step = np.where(active, g / denom, 0.0)
            tn = t - step
            an = a_of(tn)
            gn = (pp + an) ** 2 + c2
            for _h in range(8):
                # non-finite trials count as worse so damping rejects them
                worse = active & ~(np.abs(gn) <= absg)
                if not worse.any():
                    break
                step = np.where(worse, 0.5 * step, step)
                tn = t - step
                an = a_of(tn)
                gn = (pp + an) ** 2 + c2
            t, a, g = tn, an, gn
    res = np.abs(g)
    return t, np.where(np.isfinite(res), res, np.inf)


def amplitude_grid(p_par, p_perp, params, ip, e, n, t_seed, t_ref,
                   newton_tol=1e-12, accept_tol=1e-10, max_iter=50,
                   want_times=False, want_terms=False, n_threads=0):
    """Transition amplitude M and derivative kernel G on a momentum grid.

    Returns a dict with per-grid complex arrays ``m`` (sum of saddle terms),
    ``g`` (terms weighted by dS/dU_p at the saddle), the incoherent sums
    ``rho_inc`` = sum |term|^2 and ``d_inc`` = sum of per-term probability
    derivatives, and solver diagnostics.  ``n_threads`` is accepted for API
    parity with the compiled backend.
    """
    fld, ip = _unpack(params, ip)
    kind, up, omega, cep, tau = params
    p_par = np.asarray(p_par, dtype=float)
    p_perp = np.asarray(p_perp, dtype=float)
    e = np.asarray(e, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    t_seed = np.asarray(t_seed, dtype=float)
    npar, nperp, nch = p_par.size, p_perp.size, e.size

    d_const = (TWO_PI) ** (-1.5) * ip**0.25
    c2 = 2.0 * ip + p_perp**2                       # (nperp,)
    c2k = c2[:, None] * np.ones(nch)                # (nperp, nch)

    a_of = fld.vector_potential
    ap_of = fld.a_prime
    int_a = lambda t: fld.int_a(t_ref, t)
    int_a2 = lambda t: fld.int_a2(t_ref, t)

    m = np.zeros((npar, nperp), dtype=complex)
    g = np.zeros((npar, nperp), dtype=complex)
    rho_inc = np.zeros((npar, nperp))
    d_inc = np.zeros((npar, nperp))
    times = np.zeros((nch, npar, nperp), dtype=complex) if want_times else None
    terms = np.zeros((nch, npar, nperp), dtype=complex) if want_terms else None
    terms_g = np.zeros((nch, npar, nperp), dtype=complex) if want_terms else None

    max_residual = 0.0
    n_failed = 0

    if kind == GAUSSIAN:
        # Newton seeds at the first column from the closed-form times of the
        # locally equivalent monochromatic field.
        f2 = np.maximum(fld.envelope_f(t_seed) ** 2, 1e-8)
        up_loc = up * f2
        t_cur = np.empty((nperp, nch), dtype=complex)
        for k in range(nch):
            t_cur[:, k] = mono_saddle_time(p_par[0], p_perp, up_loc[k], omega,
                                           cep, ip, e[k], n[k])

    prev_pref = None
    for i in range(npar):
        pp = p_par[i]
        if kind == MONO:
            t_cur = np.empty((nperp, nch), dtype=complex)
            for k in range(nch):
                t_cur[:, k] = mono_saddle_time(pp, p_perp, up, omega, cep, ip,
                                               e[k], n[k])
            res = np.abs((pp + a_of(t_cur)) ** 2 + c2k)
        else:
            t_cur, res = _newton_refine(t_cur, pp, a_of, ap_of, c2k,
                                        newton_tol, max_iter)
        bad = res > accept_tol
        max_residual = max(max_residual, float(res.max(initial=0.0)))
        n_failed += int(bad.sum())

        ia = int_a(t_cur)
        ia2 = int_a2(t_cur)
        p2 = pp**2 + (p_perp**2)[:, None]
        s = ip * t_cur + 0.5 * (p2 * (t_cur - t_ref) + 2.0 * pp * ia + ia2)
        ds_dup = (pp * ia + ia2) / (2.0 * up)
        sdd = (pp + a_of(t_cur)) * ap_of(t_cur)

        pref = np.sqrt(TWO_PI * 1j / sdd)
        if prev_pref is None:
            # chain the branch down the first column, principal at the origin
            for j in range(1, nperp):
                flip = (np.abs(pref[j] - pref[j - 1]) >
                        np.abs(pref[j] + pref[j - 1]))
                pref[j] = np.where(flip, -pref[j], pref[j])
        else:
            flip = np.abs(pref - prev_pref) > np.abs(pref + prev_pref)
            pref = np.where(flip, -pref, pref)
        prev_pref = pref

        term = pref * d_const * np.exp(1j * s)
        term[bad] = 0.0
        m[i] = term.sum(axis=1)
        g[i] = (ds_dup * term).sum(axis=1)
        w2 = np.abs(term) ** 2
        rho_inc[i] = w2.sum(axis=1)
        d_inc[i] = (-2.0 * np.imag(ds_dup) * w2).sum(axis=1)
        if want_times:
            times[:, i, :] = t_cur.T
        if want_terms:
            terms[:, i, :] = term.T
            terms_g[:, i, :] = (ds_dup * term).T

    out = {"m": m, "g": g, "rho_inc": rho_inc, "d_inc": d_inc,
           "max_residual": max_residual, "n_failed": n_failed}
    if want_times:
        out["times"] = times
    if want_terms:
        out["terms"] = terms
        out["terms_g"] = terms_g
    return out
