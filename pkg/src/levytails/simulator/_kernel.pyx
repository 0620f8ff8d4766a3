# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernel.

Must agree with _pykernel draw-for-draw and bit-for-bit: same Philox streams
(counter [0,0,0,stream], buffer flushed per path), same primitive calls
(random_standard_uniform / random_standard_normal are what Generator.random()
and Generator.standard_normal() call for scalars), same expression shapes.
The build deliberately avoids FMA contraction for that reason.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, NAN
from libc.math cimport exp as c_exp
from libc.math cimport log1p as c_log1p
from libc.math cimport sqrt as c_sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (random_standard_normal,
                                           random_standard_uniform)

cnp.import_array()

cdef double _ANTI_CAP = 1.0 - 1.0 / 9007199254740992.0  # 1 - 2^-53


ctypedef struct PlanC:
    int n
    double *varpi_cum
    double *exit_rate
    double *kill_rate
    double *trans_cum   # n x n row-major
    double *mu
    double *sigma
    double *jrate
    cnp.int32_t *jkind
    double *jfix
    cnp.int32_t *jump_off
    cnp.int32_t *jump_len
    double *atom_val
    double *atom_cum
    cnp.int32_t *tab_off
    cnp.int32_t *tab_len
    double *tab_x
    double *tab_cdf
    cnp.int32_t *tj_kind   # n x n
    double *tj_a
    double *tj_b
    cnp.int32_t *tj_off
    cnp.int32_t *tj_len


cdef inline double draw_u(bitgen_t *rng, bint anti) noexcept nogil:
    cdef double u = random_standard_uniform(rng)
    cdef double v
    if anti:
        v = 1.0 - u
        return v if v < _ANTI_CAP else _ANTI_CAP
    return u


cdef inline double draw_z(bitgen_t *rng, bint anti) noexcept nogil:
    cdef double z = random_standard_normal(rng)
    return -z if anti else z


cdef inline int scan_cum(double *cum, int ln, double u) noexcept nogil:
    cdef int k
    for k in range(ln):
        if u < cum[k]:
            return k
    return ln - 1


cdef inline long draw_poisson(bitgen_t *rng, bint anti, double lam) noexcept nogil:
    cdef long nchunk = 1 + <long>(lam / 512.0)
    cdef double lamc = lam / nchunk
    cdef long kcap = <long>(lamc + 40.0 * c_sqrt(lamc) + 50.0)
    cdef long total = 0
    cdef long c, k
    cdef double u, p, cumv
    for c in range(nchunk):
        u = draw_u(rng, anti)
        p = c_exp(-lamc)
        cumv = p
        k = 0
        while u > cumv and k < kcap:
            k += 1
            p *= lamc / k
            cumv += p
        total += k
    return total


cdef inline double atom_draw(PlanC *pc, bitgen_t *rng, int off, int ln,
                             bint anti) noexcept nogil:
    cdef double u = draw_u(rng, anti)
    cdef int k = scan_cum(pc.atom_cum + off, ln, u)
    return pc.atom_val[off + k]


cdef inline double table_draw(PlanC *pc, bitgen_t *rng, int off, int ln,
                              bint anti) noexcept nogil:
    cdef double u = draw_u(rng, anti)
    cdef int lo = off
    cdef int hi = off + ln - 1
    cdef int mid
    cdef double c0, c1, x0
    while lo < hi:
        mid = (lo + hi) >> 1
        if pc.tab_cdf[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    if lo == off:
        return pc.tab_x[off]
    c0 = pc.tab_cdf[lo - 1]
    c1 = pc.tab_cdf[lo]
    if c1 > c0:
        x0 = pc.tab_x[lo - 1]
        return x0 + (pc.tab_x[lo] - x0) * (u - c0) / (c1 - c0)
    return pc.tab_x[lo]


cdef inline double increment(PlanC *pc, bitgen_t *rng, int j, double dt,
                             bint anti) noexcept nogil:
    # draw order is frozen: normal, Poisson count, per-jump values
    cdef double dw = pc.mu[j] * dt
    cdef double s = pc.sigma[j]
    cdef double lam
    cdef long m, i
    cdef int kind, off, ln
    if s > 0.0:
        dw += s * c_sqrt(dt) * draw_z(rng, anti)
    lam = pc.jrate[j] * dt
    if lam > 0.0:
        m = draw_poisson(rng, anti, lam)
        kind = pc.jkind[j]
        if kind == 1:
            dw += m * pc.jfix[j]
        elif kind == 2:
            off = pc.jump_off[j]
            ln = pc.jump_len[j]
            for i in range(m):
                dw += atom_draw(pc, rng, off, ln, anti)
        else:
            off = pc.tab_off[j]
            ln = pc.tab_len[j]
            for i in range(m):
                dw += table_draw(pc, rng, off, ln, anti)
    return dw


cdef void run_one(PlanC *pc, bitgen_t *rng, bint anti, bint record,
                  double horizon, double *out_val, cnp.uint8_t *out_cen,
                  cnp.int64_t *out_st) noexcept nogil:
    cdef int n = pc.n
    cdef int j = scan_cum(pc.varpi_cum, n, draw_u(rng, anti))
    cdef double w = 0.0
    cdef double h_rem = horizon
    cdef bint censored = False
    cdef double er, kr, t_move, t_kill
    cdef int k, tk
    while True:
        er = pc.exit_rate[j]
        kr = pc.kill_rate[j]
        # hold-time exponential first, then the killing clock
        t_move = -c_log1p(-draw_u(rng, anti)) / er if er > 0.0 else INFINITY
        t_kill = -c_log1p(-draw_u(rng, anti)) / kr if kr > 0.0 else INFINITY
        if h_rem <= t_move and h_rem <= t_kill:
            if record:
                w += increment(pc, rng, j, h_rem, anti)
            else:
                censored = True
            break
        if t_kill <= t_move:
            if record:
                censored = True  # clock rang before the recording time
            else:
                w += increment(pc, rng, j, t_kill, anti)
            break
        w += increment(pc, rng, j, t_move, anti)
        h_rem -= t_move
        k = scan_cum(pc.trans_cum + j * n, n, draw_u(rng, anti))
        tk = pc.tj_kind[j * n + k]
        if tk == 1:
            w += pc.tj_a[j * n + k]
        elif tk == 2:
            w += atom_draw(pc, rng, pc.tj_off[j * n + k],
                           pc.tj_len[j * n + k], anti)
        elif tk == 3:
            w += pc.tj_a[j * n + k] + pc.tj_b[j * n + k] * draw_z(rng, anti)
        j = k
    out_val[0] = NAN if censored else w
    out_cen[0] = 1 if censored else 0
    out_st[0] = j


def run_paths(plan, seed, long start, long count, bint antithetic,
              bint record_at_horizon, double horizon,
              double[::1] out_values, cnp.uint8_t[::1] out_censored,
              cnp.int64_t[::1] out_states):
    """Simulate paths [start, start+count) and write results at absolute
    indices in the out arrays.  Same contract as the pure-Python kernel."""
    cdef double[::1] varpi_cum = plan.varpi_cum
    cdef double[::1] exit_rate = plan.exit_rate
    cdef double[::1] kill_rate = plan.kill_rate
    cdef double[:, ::1] trans_cum = plan.trans_cum
    cdef double[::1] mu = plan.mu
    cdef double[::1] sigma = plan.sigma
    cdef double[::1] jrate = plan.jrate
    cdef cnp.int32_t[::1] jkind = plan.jkind
    cdef double[::1] jfix = plan.jfix
    cdef cnp.int32_t[::1] jump_off = plan.jump_off
    cdef cnp.int32_t[::1] jump_len = plan.jump_len
    cdef double[::1] atom_val = plan.atom_val
    cdef double[::1] atom_cum = plan.atom_cum
    cdef cnp.int32_t[::1] tab_off = plan.tab_off
    cdef cnp.int32_t[::1] tab_len = plan.tab_len
    cdef double[::1] tab_x = plan.tab_x
    cdef double[::1] tab_cdf = plan.tab_cdf
    cdef cnp.int32_t[:, ::1] tj_kind = plan.tj_kind
    cdef double[:, ::1] tj_a = plan.tj_a
    cdef double[:, ::1] tj_b = plan.tj_b
    cdef cnp.int32_t[:, ::1] tj_off = plan.tj_off
    cdef cnp.int32_t[:, ::1] tj_len = plan.tj_len

    cdef PlanC pc
    pc.n = <int> plan.n
    pc.varpi_cum = &varpi_cum[0]
    pc.exit_rate = &exit_rate[0]
    pc.kill_rate = &kill_rate[0]
    pc.trans_cum = &trans_cum[0, 0]
    pc.mu = &mu[0]
    pc.sigma = &sigma[0]
    pc.jrate = &jrate[0]
    pc.jkind = &jkind[0]
    pc.jfix = &jfix[0]
    pc.jump_off = &jump_off[0]
    pc.jump_len = &jump_len[0]
    if atom_val.shape[0] > 0:
        pc.atom_val = &atom_val[0]
        pc.atom_cum = &atom_cum[0]
    else:
        pc.atom_val = NULL
        pc.atom_cum = NULL
    pc.tab_off = &tab_off[0]
    pc.tab_len = &tab_len[0]
    if tab_x.shape[0] > 0:
        pc.tab_x = &tab_x[0]
        pc.tab_cdf = &tab_cdf[0]
    else:
        pc.tab_x = NULL
        pc.tab_cdf = NULL
    pc.tj_kind = &tj_kind[0, 0]
    pc.tj_a = &tj_a[0, 0]
    pc.tj_b = &tj_b[0, 0]
    pc.tj_off = &tj_off[0, 0]
    pc.tj_len = &tj_len[0, 0]

    bitgen_obj = np.random.Philox(key=seed)
    template = bitgen_obj.state
    counter = template["state"]["counter"]
    capsule = bitgen_obj.capsule
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule,
                                                           "BitGenerator")
    cdef long idx, stream
    cdef bint anti
    for idx in range(start, start + count):
        if antithetic:
            stream = idx >> 1
            anti = idx & 1
        else:
            stream = idx
            anti = False
        counter[0] = 0
        counter[1] = 0
        counter[2] = 0
        counter[3] = stream
        template["buffer_pos"] = 4
        template["has_uint32"] = 0
        template["uinteger"] = 0
        bitgen_obj.state = template
        with nogil:
            run_one(&pc, rng, anti, record_at_horizon, horizon,
                    &out_values[idx], &out_censored[idx], &out_states[idx])
