# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled placement kernels; mirrors ``swan._kernels_py`` operation for operation."""

from libc.math cimport sqrt, fmod, fabs, NAN, isnan

import numpy as np

DEF ALIGNED = 0
DEF CLAMPED = 1
DEF UNALIGNED = 2
DEF NO_ROOM = 3
DEF NEWTON_STEPS = 4


cdef inline double _path_length(double x, double feed, double ux, double cy, double n_eff) nogil:
    cdef double dx = x - ux
    return sqrt(dx * dx + cy) + n_eff * (x - feed)


cdef inline double _fmod_pos(double a, double m) nogil:
    cdef double r = fmod(a, m)
    if r < 0.0:
        r += m
    return r


cdef inline double _wrapped_target(double d_here, double d_ref, double wavelength, int direction) nogil:
    if direction > 0:
        return d_here + _fmod_pos(d_ref - d_here, wavelength)
    return d_here - _fmod_pos(d_here - d_ref, wavelength)


cdef double _solve_position(double target, double feed, double ux, double cy, double n_eff) nogil:
    cdef double b = target + n_eff * (feed - ux)
    cdef double X, disc, r, f, step
    cdef int i
    if n_eff == 1.0:
        if b <= 0.0:
            return NAN
        X = (b * b - cy) / (2.0 * b)
    else:
        disc = b * b + cy * (n_eff * n_eff - 1.0)
        if disc < 0.0:
            return NAN
        X = (b * b - cy) / (n_eff * b + sqrt(disc))
    for i in range(NEWTON_STEPS):
        r = sqrt(X * X + cy)
        f = r + n_eff * X - b
        step = f / (X / r + n_eff)
        X -= step
        if fabs(step) <= 1e-16 * (1.0 + fabs(X)):
            break
    return ux + X


cdef int _place_one(double psi_hat, double lo, double hi, double feed, int direction,
                    double ux, double cy, double n_eff, double wavelength, double d_ref,
                    bint align, bint clamp, double* x_out, double* nu_out) nogil:
    cdef double d_here, target, x
    if not align:
        x_out[0] = psi_hat
        nu_out[0] = 0.0
        return UNALIGNED
    d_here = _path_length(psi_hat, feed, ux, cy, n_eff)
    target = _wrapped_target(d_here, d_ref, wavelength, direction)
    x = _solve_position(target, feed, ux, cy, n_eff)
    if isnan(x):
        return NO_ROOM
    if direction > 0:
        if x < psi_hat:
            x = psi_hat
        if x > hi:
            if not clamp:
                return NO_ROOM
            x_out[0] = hi
            nu_out[0] = hi - psi_hat
            return CLAMPED
        x_out[0] = x
        nu_out[0] = x - psi_hat
        return ALIGNED
    if x > psi_hat:
        x = psi_hat
    if x < lo:
        if not clamp:
            return NO_ROOM
        x_out[0] = lo
        nu_out[0] = psi_hat - lo
        return CLAMPED
    x_out[0] = x
    nu_out[0] = psi_hat - x
    return ALIGNED


def path_length(double x, double feed, double ux, double cy, double n_eff):
    return _path_length(x, feed, ux, cy, n_eff)


def wrapped_target(double d_here, double d_ref, double wavelength, int direction):
    return _wrapped_target(d_here, d_ref, wavelength, direction)


def solve_position(double target, double feed, double ux, double cy, double n_eff):
    return _solve_position(target, feed, ux, cy, n_eff)


def fill_chain(double prev, double lo, double hi, double feed, int direction, long count,
               double ux, double cy, double n_eff, double wavelength, double d_ref,
               double delta, bint align, bint clamp):
    cdef long cap
    cdef long placed = 0
    cdef double psi_hat, x = 0.0, nu = 0.0
    cdef int flag
    if count < 0:
        cap = <long>((hi - lo) / delta) + 2
    else:
        cap = count
    positions = np.empty(cap, dtype=np.float64)
    shifts = np.empty(cap, dtype=np.float64)
    flags = np.empty(cap, dtype=np.int8)
    cdef double[::1] pv = positions
    cdef double[::1] sv = shifts
    cdef signed char[::1] fv = flags
    with nogil:
        while placed < cap:
            if direction > 0:
                psi_hat = lo if lo > prev + delta else prev + delta
                if psi_hat > hi:
                    break
            else:
                psi_hat = hi if hi < prev - delta else prev - delta
                if psi_hat < lo:
                    break
            flag = _place_one(psi_hat, lo, hi, feed, direction, ux, cy, n_eff,
                              wavelength, d_ref, align, clamp, &x, &nu)
            if flag == NO_ROOM:
                break
            pv[placed] = x
            sv[placed] = nu
            fv[placed] = flag
            prev = x
            placed += 1
    return positions[:placed].copy(), shifts[:placed].copy(), flags[:placed].copy()


def segment_sweep(feeds, double seg_len, double prev, int direction, double ux, double cy,
                  double n_eff, double wavelength, double d_ref, double delta, bint align):
    cdef const double[::1] fd = np.ascontiguousarray(feeds, dtype=np.float64)
    cdef Py_ssize_t n = fd.shape[0]
    cdef Py_ssize_t i
    cdef double lo, hi, psi_hat, x = 0.0, nu = 0.0
    cdef int flag
    positions = np.full(n, np.nan)
    shifts = np.full(n, np.nan)
    flags = np.full(n, NO_ROOM, dtype=np.int8)
    cdef double[::1] pv = positions
    cdef double[::1] sv = shifts
    cdef signed char[::1] fv = flags
    with nogil:
        for i in range(n):
            lo = fd[i]
            hi = lo + seg_len
            if direction > 0:
                psi_hat = lo if lo > prev + delta else prev + delta
                if psi_hat > hi:
                    break
            else:
                psi_hat = hi if hi < prev - delta else prev - delta
                if psi_hat < lo:
                    break
            flag = _place_one(psi_hat, lo, hi, lo, direction, ux, cy, n_eff,
                              wavelength, d_ref, align, 1, &x, &nu)
            if flag == NO_ROOM:
                break
            pv[i] = x
            sv[i] = nu
            fv[i] = flag
            prev = x
    return positions, shifts, flags
