# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled amplitude kernel (OpenMP).

Mirrors ``pybackend.amplitude_grid`` operation for operation: warm-started
damped Newton along p_par, square-root branch tracking chained from the
first column, identical stabilized erf evaluation.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport exp as rexp, sqrt as rsqrt, sin as rsin, M_PI

cdef extern from "math.h" nogil:
    void sincos(double, double *, double *)
from scipy.special.cython_special cimport erf as sp_erf, wofz as sp_wofz

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex cacos(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)

cdef double complex CI = 1j
cdef double TWO_PI = 2.0 * M_PI


cdef inline double complex zexp(double complex z) nogil:
    cdef double r = rexp(creal(z)), s, c
    sincos(cimag(z), &s, &c)
    return r * c + CI * (r * s)


cdef inline double complex zcos(double complex z) nogil:
    cdef double s, c, ey, ch, sh
    sincos(creal(z), &s, &c)
    ey = rexp(cimag(z))
    ch = 0.5 * (ey + 1.0 / ey)
    sh = 0.5 * (ey - 1.0 / ey)
    return c * ch - CI * (s * sh)


cdef inline double complex zsin(double complex z) nogil:
    cdef double s, c, ey, ch, sh
    sincos(creal(z), &s, &c)
    ey = rexp(cimag(z))
    ch = 0.5 * (ey + 1.0 / ey)
    sh = 0.5 * (ey - 1.0 / ey)
    return s * ch + CI * (c * sh)


cdef inline void a_and_ap(FieldC *f, double complex t,
                          double complex *a, double complex *ap) nogil:
    # fused A and dA/dt sharing the carrier sincos and envelope
    cdef double s, c, ey, ch, sh
    cdef double complex ph = f.omega * t + f.cep
    cdef double complex co, si, env
    sincos(creal(ph), &s, &c)
    ey = rexp(cimag(ph))
    ch = 0.5 * (ey + 1.0 / ey)
    sh = 0.5 * (ey - 1.0 / ey)
    co = c * ch - CI * (s * sh)
    si = s * ch + CI * (c * sh)
    if f.kind == 0:
        a[0] = f.a0 * co
        ap[0] = -f.a0 * f.omega * si
    else:
        env = f.a0 * zexp(-f.b * t * t)
        a[0] = env * co
        ap[0] = env * (-2.0 * f.b * t * co - f.omega * si)

MONO, GAUSSIAN = 0, 1


cdef struct FieldC:
    int kind
    double up, omega, cep, tau, a0, ip, tref
    double b, sb, s2b, k1, k2, pref_a, pref_2
    double complex ea_ref_p, ea_ref_m
    double complex dc_ref
    double complex e2_ref_p, e2_ref_m
    double complex eip, eim, e2ip, e2im


cdef inline double complex a_of(FieldC *f, double complex t) nogil:
    cdef double complex co = zcos(f.omega * t + f.cep)
    if f.kind == 0:
        return f.a0 * co
    return f.a0 * zexp(-f.b * t * t) * co


cdef inline double complex ap_of(FieldC *f, double complex t) nogil:
    cdef double complex ph = f.omega * t + f.cep
    if f.kind == 0:
        return -f.a0 * f.omega * zsin(ph)
    return f.a0 * zexp(-f.b * t * t) * (-2.0 * f.b * t * zcos(ph)
                                        - f.omega * zsin(ph))


cdef inline double complex erf_scaled(double complex z, double k) nogil:
    cdef double s
    if k < 400.0:
        return rexp(-k) * sp_erf(z)
    s = 1.0 if creal(z) >= 0.0 else -1.0
    return s * rexp(-k) - s * zexp(-k - z * z) * sp_wofz(CI * s * z)


cdef inline double complex int_a(FieldC *f, double complex t) nogil:
    cdef double complex out
    if f.kind == 0:
        return (f.a0 / f.omega) * (zsin(f.omega * t + f.cep)
                                   - rsin(f.omega * f.tref + f.cep))
    out = f.eip * (erf_scaled(f.sb * t - CI * f.omega / (2.0 * f.sb), f.k1) - f.ea_ref_p)
    out = out + f.eim * (erf_scaled(f.sb * t + CI * f.omega / (2.0 * f.sb), f.k1) - f.ea_ref_m)
    return f.pref_a * out


cdef inline double complex int_a2(FieldC *f, double complex t) nogil:
    cdef double complex out, dc
    if f.kind == 0:
        return 2.0 * f.up * (t - f.tref) + (f.up / f.omega) * (
            zsin(2.0 * (f.omega * t + f.cep)) - rsin(2.0 * (f.omega * f.tref + f.cep)))
    dc = 2.0 * f.up * f.pref_2 * (sp_erf(f.s2b * t) - f.dc_ref)
    out = f.e2ip * (erf_scaled(f.s2b * t - CI * f.omega / f.s2b, f.k2) - f.e2_ref_p)
    out = out + f.e2im * (erf_scaled(f.s2b * t + CI * f.omega / f.s2b, f.k2) - f.e2_ref_m)
    return dc + f.up * f.pref_2 * out


cdef inline double complex mono_time(double up, double omega, double cep,
                                     double pp, double y, long e, long n) nogil:
    cdef double sgn = 1.0 - 2.0 * e
    cdef double complex zeta = (-pp + sgn * CI * y) / (2.0 * rsqrt(up))
    return (TWO_PI * (n - e) - cep) / omega - (sgn / omega) * cacos(zeta)


cdef inline double newton_point(FieldC *f, double complex *t, double pp,
                                double c2, double tol, int max_iter) nogil:
    cdef double complex a, ap, g, denom, step, tn, an, gn
    cdef int it, h
    a_and_ap(f, t[0], &a, &ap)
    g = (pp + a) * (pp + a) + c2
    for it in range(max_iter):
        if cabs(g) <= tol:
            break
        denom = 2.0 * (pp + a) * ap
        if denom == 0:
            denom = 1e-300
        step = g / denom
        tn = t[0] - step
        a_and_ap(f, tn, &an, &ap)
        gn = (pp + an) * (pp + an) + c2
        h = 0
        # non-finite trials compare false against <=, so they count as worse
        while (not (cabs(gn) <= cabs(g))) and h < 8:
            step = 0.5 * step
            tn = t[0] - step
            a_and_ap(f, tn, &an, &ap)
            gn = (pp + an) * (pp + an) + c2
            h += 1
        t[0] = tn
        a = an
        g = gn
    if cabs(g) != cabs(g):   # NaN residual: report as hard failure
        return 1e300
    return cabs(g)


cdef inline void eval_term(FieldC *f, double complex t, double pp, double pt,
                           double complex *phase, double complex *dsdup,
                           double complex *pref_raw) nogil:
    cdef double complex ia = int_a(f, t)
    cdef double complex ia2 = int_a2(f, t)
    cdef double complex av, apv
    cdef double p2 = pp * pp + pt * pt
    cdef double complex s = f.ip * t + 0.5 * (p2 * (t - f.tref) + 2.0 * pp * ia + ia2)
    a_and_ap(f, t, &av, &apv)
    dsdup[0] = (pp * ia + ia2) / (2.0 * f.up)
    pref_raw[0] = csqrt(TWO_PI * CI / (pp + av) / apv)
    phase[0] = zexp(CI * s)


cdef void _row_sweep(FieldC *f, double[:] pp_v, double[:] pt_v, int j,
                     long[:] e_v, long[:] n_v,
                     double complex[:, :] t_state,
                     double complex[:, :] pref_state,
                     double complex[:, :] m, double complex[:, :] g,
                     double[:, :] rho, double[:, :] dinc,
                     double complex[:, :, :] times_v,
                     double complex[:, :, :] terms_v,
                     double complex[:, :, :] termsg_v,
                     bint w_times, bint w_terms,
                     double d_const, double ntol, double atol, int miter,
                     double *maxres, long *nfail) nogil:
    cdef int npar = pp_v.shape[0], nch = e_v.shape[0]
    cdef int i, k
    cdef double complex tk, phase, term, dsd, pref_raw, prev
    cdef double pt = pt_v[j]
    cdef double y = rsqrt(2.0 * f.ip + pt * pt)
    cdef double c2 = 2.0 * f.ip + pt * pt
    cdef double res, w2
    cdef double complex acc_m, acc_g
    cdef double acc_r, acc_d
    cdef bint bad

    for i in range(npar):
        acc_m = 0
        acc_g = 0
        acc_r = 0
        acc_d = 0
        for k in range(nch):
            if i == 0:
                tk = t_state[j, k]
                res = cabs((pp_v[0] + a_of(f, tk)) * (pp_v[0] + a_of(f, tk)) + c2)
                eval_term(f, tk, pp_v[0], pt, &phase, &dsd, &pref_raw)
                prev = pref_state[j, k]
                if cabs(pref_raw - prev) > cabs(pref_raw + prev):
                    pref_raw = -pref_raw
                pref_state[j, k] = pref_raw
            else:
                if f.kind == 0:
                    tk = mono_time(f.up, f.omega, f.cep, pp_v[i], y, e_v[k], n_v[k])
                    res = cabs((pp_v[i] + a_of(f, tk)) * (pp_v[i] + a_of(f, tk)) + c2)
                else:
                    tk = t_state[j, k]
                    res = newton_point(f, &tk, pp_v[i], c2, ntol, miter)
                    t_state[j, k] = tk
                eval_term(f, tk, pp_v[i], pt, &phase, &dsd, &pref_raw)
                prev = pref_state[j, k]
                if cabs(pref_raw - prev) > cabs(pref_raw + prev):
                    pref_raw = -pref_raw
                pref_state[j, k] = pref_raw
            if res > maxres[0]:
                maxres[0] = res
            bad = not (res <= atol)
            term = pref_raw * d_const * phase
            if bad:
                term = 0
                nfail[0] += 1
            if w_times:
                times_v[k, j, i] = tk
            if w_terms:
                terms_v[k, j, i] = term
                termsg_v[k, j, i] = dsd * term
            acc_m = acc_m + term
            acc_g = acc_g + dsd * term
            w2 = creal(term) * creal(term) + cimag(term) * cimag(term)
            acc_r = acc_r + w2
            acc_d = acc_d + (-2.0 * cimag(dsd)) * w2
        m[j, i] = acc_m
        g[j, i] = acc_g
        rho[j, i] = acc_r
        dinc[j, i] = acc_d


def amplitude_grid(p_par, p_perp, params, ip, e, n, t_seed, t_ref,
                   newton_tol=1e-12, accept_tol=1e-10, max_iter=50,
                   want_times=False, want_terms=False, n_threads=0):
    """Compiled counterpart of pybackend.amplitude_grid (same contract)."""
    pp_a = np.ascontiguousarray(p_par, dtype=np.float64)
    pt_a = np.ascontiguousarray(p_perp, dtype=np.float64)
    e_a = np.ascontiguousarray(e, dtype=np.int64)
    n_a = np.ascontiguousarray(n, dtype=np.int64)
    seed_a = np.ascontiguousarray(t_seed, dtype=np.float64)
    cdef double[:] pp_v = pp_a
    cdef double[:] pt_v = pt_a
    cdef long[:] e_v = e_a
    cdef long[:] n_v = n_a
    cdef int npar = pp_v.shape[0], nperp = pt_v.shape[0], nch = e_v.shape[0]
    cdef int kind = int(params[0])
    cdef double up = float(params[1]), omega = float(params[2])
    cdef double cep = float(params[3]), tau = float(params[4])
    cdef double ipv = float(ip), trefv = float(t_ref)
    cdef double ntol = float(newton_tol), atol = float(accept_tol)
    cdef int miter = int(max_iter)
    cdef bint w_times = bool(want_times), w_terms = bool(want_terms)
    cdef int nt = int(n_threads) if int(n_threads) > 0 else 1

    cdef FieldC f
    f.kind = kind
    f.up = up
    f.omega = omega
    f.cep = cep
    f.tau = tau
    f.a0 = 2.0 * rsqrt(up)
    f.ip = ipv
    f.tref = trefv
    f.eip = zexp(CI * cep)
    f.eim = zexp(-CI * cep)
    f.e2ip = zexp(2.0 * CI * cep)
    f.e2im = zexp(-2.0 * CI * cep)
    if kind == GAUSSIAN:
        f.b = 2.0 * np.log(2.0) / (tau * tau)
        f.sb = rsqrt(f.b)
        f.s2b = rsqrt(2.0 * f.b)
        f.k1 = omega * omega / (4.0 * f.b)
        f.k2 = omega * omega / (2.0 * f.b)
        f.pref_a = rsqrt(up) * 0.5 * rsqrt(M_PI / f.b)
        f.pref_2 = 0.5 * rsqrt(M_PI / (2.0 * f.b))
        f.ea_ref_p = erf_scaled(f.sb * trefv - CI * omega / (2.0 * f.sb), f.k1)
        f.ea_ref_m = erf_scaled(f.sb * trefv + CI * omega / (2.0 * f.sb), f.k1)
        f.dc_ref = sp_erf(f.s2b * trefv + 0j)
        f.e2_ref_p = erf_scaled(f.s2b * trefv - CI * omega / f.s2b, f.k2)
        f.e2_ref_m = erf_scaled(f.s2b * trefv + CI * omega / f.s2b, f.k2)
    else:
        f.b = f.sb = f.s2b = f.k1 = f.k2 = f.pref_a = f.pref_2 = 0.0
        f.ea_ref_p = f.ea_ref_m = f.dc_ref = 0.0
        f.e2_ref_p = f.e2_ref_m = 0.0

    cdef double d_const = TWO_PI ** (-1.5) * ipv ** 0.25

    m_arr = np.zeros((nperp, npar), dtype=complex)
    g_arr = np.zeros((nperp, npar), dtype=complex)
    rho_arr = np.zeros((nperp, npar))
    dinc_arr = np.zeros((nperp, npar))
    cdef double complex[:, :] m = m_arr
    cdef double complex[:, :] g = g_arr
    cdef double[:, :] rho = rho_arr
    cdef double[:, :] dinc = dinc_arr

    dummy = np.zeros((1, 1, 1), dtype=complex)
    times_arr = np.zeros((nch, nperp, npar), dtype=complex) if w_times else dummy
    terms_arr = np.zeros((nch, nperp, npar), dtype=complex) if w_terms else dummy
    termsg_arr = np.zeros((nch, nperp, npar), dtype=complex) if w_terms else dummy
    cdef double complex[:, :, :] times_v = times_arr
    cdef double complex[:, :, :] terms_v = terms_arr
    cdef double complex[:, :, :] termsg_v = termsg_arr

    cdef double complex[:, :] t_state = np.zeros((nperp, nch), dtype=complex)
    cdef double complex[:, :] pref_state = np.zeros((nperp, nch), dtype=complex)
    cdef double[:] row_maxres = np.zeros(nperp)
    cdef long[:] row_nfail = np.zeros(nperp, dtype=np.int64)

    up_loc_a = np.full(nch, up)
    if kind == GAUSSIAN:
        b = 2.0 * np.log(2.0) / (tau * tau)
        up_loc_a = up * np.maximum(np.exp(-2.0 * b * seed_a**2), 1e-8)
    cdef double[:] up_loc = up_loc_a

    cdef int j, k
    cdef double complex tk, phase, dsd, pref_raw
    cdef double y, c2, res

    with nogil:
        # column 0: solve and record raw prefactors
        for j in range(nperp):
            y = rsqrt(2.0 * ipv + pt_v[j] * pt_v[j])
            c2 = 2.0 * ipv + pt_v[j] * pt_v[j]
            for k in range(nch):
                if kind == 0:
                    tk = mono_time(up, omega, cep, pp_v[0], y, e_v[k], n_v[k])
                else:
                    tk = mono_time(up_loc[k], omega, cep, pp_v[0], y, e_v[k], n_v[k])
                    newton_point(&f, &tk, pp_v[0], c2, ntol, miter)
                t_state[j, k] = tk
                eval_term(&f, tk, pp_v[0], pt_v[j], &phase, &dsd, &pref_raw)
                pref_state[j, k] = pref_raw

        # chain the branch sign down the first column (principal at origin)
        for j in range(1, nperp):
            for k in range(nch):
                if cabs(pref_state[j, k] - pref_state[j - 1, k]) > \
                   cabs(pref_state[j, k] + pref_state[j - 1, k]):
                    pref_state[j, k] = -pref_state[j, k]

        for j in prange(nperp, schedule='static', num_threads=nt):
            _row_sweep(&f, pp_v, pt_v, j, e_v, n_v,
                       t_state, pref_state, m, g, rho, dinc,
                       times_v, terms_v, termsg_v, w_times, w_terms,
                       d_const, ntol, atol, miter,
                       &row_maxres[j], &row_nfail[j])

    out = {"m": np.ascontiguousarray(m_arr.T),
           "g": np.ascontiguousarray(g_arr.T),
           "rho_inc": np.ascontiguousarray(rho_arr.T),
           "d_inc": np.ascontiguousarray(dinc_arr.T),
           "max_residual": float(np.max(row_maxres)),
           "n_failed": int(np.sum(row_nfail))}
    if w_times:
        out["times"] = np.ascontiguousarray(times_arr.transpose(0, 2, 1))
    if w_terms:
        out["terms"] = np.ascontiguousarray(terms_arr.transpose(0, 2, 1))
        out["terms_g"] = np.ascontiguousarray(termsg_arr.transpose(0, 2, 1))
    return out
