"""Pure-Python path kernel.

This is the reference implementation of the path protocol; when the compiled
kernel is present the two must agree draw-for-draw, so every random primitive
here (uniform, normal) and the order they are consumed in is frozen.  Scalar
arithmetic goes through the math module, i.e. libm, exactly as in C.

Stream layout: path ``idx`` uses Philox counter ``[0, 0, 0, stream]`` with
``stream = idx`` (plain) or ``idx >> 1`` (antithetic pairs).  The odd member
of an antithetic pair maps every uniform ``u -> 1 - u`` (capped below 1) and
every normal ``z -> -z`` at the primitive level.
"""

from __future__ import annotations

from math import exp, log1p, sqrt

import numpy as np

_ANTI_CAP = 1.0 - 2.0 ** -53
_INF = float("inf")


def run_paths(plan, seed, start, count, antithetic, record_at_horizon,
              horizon, out_values, out_censored, out_states):
    """Simulate paths [start, start+count) and write results at absolute
    indices in the out arrays.

    record_at_horizon=False: stopped mode; a path that outlives the horizon
    is censored (value NaN, flag 1) and draws no further variates.
    record_at_horizon=True: fixed-time mode; the increment over the remaining
    stub of time is drawn and the value recorded with flag 0, except that a
    path whose kill clock rings before the horizon dies (value NaN, flag 1).
    """
    n = plan.n
    varpi_cum = plan.varpi_cum.tolist()
    exit_rate = plan.exit_rate.tolist()
    kill_rate = plan.kill_rate.tolist()
    trans_cum = plan.trans_cum.tolist()
    mu = plan.mu.tolist()
    sigma = plan.sigma.tolist()
    jrate = plan.jrate.tolist()
    jkind = plan.jkind.tolist()
    jfix = plan.jfix.tolist()
    jump_off = plan.jump_off.tolist()
    jump_len = plan.jump_len.tolist()
    atom_val = plan.atom_val.tolist()
    atom_cum = plan.atom_cum.tolist()
    tab_off = plan.tab_off.tolist()
    tab_len = plan.tab_len.tolist()
    tab_x = plan.tab_x.tolist()
    tab_cdf = plan.tab_cdf.tolist()
    tj_kind = plan.tj_kind.tolist()
    tj_a = plan.tj_a.tolist()
    tj_b = plan.tj_b.tolist()
    tj_off = plan.tj_off.tolist()
    tj_len = plan.tj_len.tolist()

    bitgen = np.random.Philox(key=seed)
    gen = np.random.Generator(bitgen)
    template = bitgen.state
    counter = template["state"]["counter"]
    raw_u = gen.random
    raw_z = gen.standard_normal

    def draw_u(anti):
        u = raw_u()
        if anti:
            v = 1.0 - u
            return v if v < _ANTI_CAP else _ANTI_CAP
        return u

    def draw_z(anti):
        z = raw_z()
        return -z if anti else z

    def scan(cum, off, ln, u):
        for k in range(ln):
            if u < cum[off + k]:
                return k
        return ln - 1

    def draw_poisson(lam, anti):
        # chunked CDF inversion; lam per chunk kept <= 512
        nchunk = 1 + int(lam // 512.0)
        lamc = lam / nchunk
        kcap = int(lamc + 40.0 * sqrt(lamc) + 50.0)
        total = 0
        for _ in range(nchunk):
            u = draw_u(anti)
            p = exp(-lamc)
            cum = p
            k = 0
            while u > cum and k < kcap:
                k += 1
                p *= lamc / k
                cum += p
            total += k
        return total

    def atom_draw(off, ln, anti):
        u = draw_u(anti)
        k = scan(atom_cum, off, ln, u)
        return atom_val[off + k]

    def table_draw(off, ln, anti):
        u = draw_u(anti)
        lo = off
        hi = off + ln - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if tab_cdf[mid] < u:
                lo = mid + 1
            else:
                hi = mid
        if lo == off:
            return tab_x[off]
        c0 = tab_cdf[lo - 1]
        c1 = tab_cdf[lo]
        if c1 > c0:
            x0 = tab_x[lo - 1]
            return x0 + (tab_x[lo] - x0) * (u - c0) / (c1 - c0)
        return tab_x[lo]

    def increment(j, dt, anti):
        # draw order is frozen: normal, Poisson count, per-jump values
        dw = mu[j] * dt
        s = sigma[j]
        if s > 0.0:
            dw += s * sqrt(dt) * draw_z(anti)
        lam = jrate[j] * dt
        if lam > 0.0:
            m = draw_poisson(lam, anti)
            kind = jkind[j]
            if kind == 1:
                dw += m * jfix[j]
            elif kind == 2:
                off = jump_off[j]
                ln = jump_len[j]
                for _ in range(m):
                    dw += atom_draw(off, ln, anti)
            else:
                off = tab_off[j]
                ln = tab_len[j]
                for _ in range(m):
                    dw += table_draw(off, ln, anti)
        return dw

    for idx in range(start, start + count):
        if antithetic:
            stream = idx >> 1
            anti = bool(idx & 1)
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
        bitgen.state = template

        j = scan(varpi_cum, 0, n, draw_u(anti))
        w = 0.0
        h_rem = horizon
        censored = False
        while True:
            er = exit_rate[j]
            kr = kill_rate[j]
            # hold-time exponential first, then the killing clock
            t_move = -log1p(-draw_u(anti)) / er if er > 0.0 else _INF
            t_kill = -log1p(-draw_u(anti)) / kr if kr > 0.0 else _INF
            if h_rem <= t_move and h_rem <= t_kill:
                if record_at_horizon:
                    w += increment(j, h_rem, anti)
                else:
                    censored = True
                break
            if t_kill <= t_move:
                if record_at_horizon:
                    censored = True  # clock rang before the recording time
                else:
                    w += increment(j, t_kill, anti)
                break
            w += increment(j, t_move, anti)
            h_rem -= t_move
            row = trans_cum[j]
            k = scan(row, 0, n, draw_u(anti))
            tk = tj_kind[j][k]
            if tk == 1:
                w += tj_a[j][k]
            elif tk == 2:
                w += atom_draw(tj_off[j][k], tj_len[j][k], anti)
            elif tk == 3:
                w += tj_a[j][k] + tj_b[j][k] * draw_z(anti)
            j = k

        out_values[idx] = float("nan") if censored else w
        out_censored[idx] = 1 if censored else 0
        out_states[idx] = j
