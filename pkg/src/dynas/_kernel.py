"""Compiled inner loops shared by the static and the switching GA.

Everything here works on plain arrays so numba can compile it. Run state is
kept in two small arrays that the caller allocates:

    st[0]  evaluations used         st[3]  mutation calls
    st[1]  improvement records      st[4]  index of the active stage
    st[2]  crossover calls          st[5]  1 once the run has stopped

    best[0]  best-so-far fitness
"""

import numba as nb
import numpy as np

from .problems import _fitness

TOL = 1e-9  # fitness values compared against targets/thresholds with this slack

XO_NONE, XO_ONE_POINT, XO_TWO_POINT, XO_UNIFORM = 0, 1, 2, 3
MUT_STANDARD, MUT_FAST = 0, 1

EVALS, NREC, NXO, NMUT, STAGE, STOPPED = range(6)


@nb.njit(cache=True, nogil=True)
def sbm_count(n, p, rng):
    """Flip count from Bin(n, p) conditioned on being positive (resampling)."""
    ell = 0
    while ell == 0:
        ell = rng.binomial(n, p)
    return ell


@nb.njit(cache=True, nogil=True)
def power_law_count(cdf, rng):
    """Flip count on {1..len(cdf)} with cumulative distribution ``cdf``."""
    u = rng.random()
    i = np.searchsorted(cdf, u, side="right")
    if i >= cdf.size:
        i = cdf.size - 1
    return i + 1


@nb.njit(cache=True, nogil=True)
def flip_distinct(z, ell, idx, rng):
    """Flip ``ell`` distinct uniformly chosen bits of ``z`` in place.

    ``idx`` is any permutation of range(n); it is reshuffled as a side effect
    (partial Fisher-Yates), which keeps the chosen set uniform.
    """
    n = z.size
    for j in range(ell):
        k = j + randint(n - j, rng)
        t = idx[j]
        idx[j] = idx[k]
        idx[k] = t
        z[idx[j]] ^= 1


@nb.njit(cache=True, nogil=True)
def crossover_into(kind, x, y, out, rng):
    n = x.size
    if kind == XO_ONE_POINT:
        c = 1 + randint(n - 1, rng)
        out[:c] = x[:c]
        out[c:] = y[c:]
    elif kind == XO_TWO_POINT:
        c1 = 1 + randint(n - 1, rng)
        c2 = 1 + randint(n - 2, rng)
        if c2 >= c1:
            c2 += 1
        else:
            c1, c2 = c2, c1
        out[:] = x
        out[c1:c2] = y[c1:c2]
    else:
        for i in range(n):
            out[i] = x[i] if rng.random() < 0.5 else y[i]


@nb.njit(cache=True, nogil=True)
def randint(m, rng):
    """Uniform integer in [0, m); floor(U * m) is far cheaper than
    Generator.integers under numba and biased only at the 2**-53 level."""
    return int(rng.random() * m)


@nb.njit(cache=True, nogil=True)
def select_best(fit, mu, rng):
    """Indices of the ``mu`` fittest entries of ``fit``; ties broken u.a.r.

    Everything strictly above the cut value is kept; the remaining slots are
    filled by a uniform sample (partial Fisher-Yates) of the entries tied at
    the cut.
    """
    m = fit.size
    cut = np.sort(fit)[m - mu]
    keep = np.empty(mu, dtype=np.int64)
    ties = np.empty(m, dtype=np.int64)
    k = 0
    t = 0
    for i in range(m):
        if fit[i] > cut:
            keep[k] = i
            k += 1
        elif fit[i] == cut:
            ties[t] = i
            t += 1
    for j in range(mu - k):
        r = j + randint(t - j, rng)
        tmp = ties[j]
        ties[j] = ties[r]
        ties[r] = tmp
        keep[k + j] = ties[j]
    return keep


@nb.njit(cache=True, nogil=True)
def _same(a, b):
    for i in range(a.size):
        if a[i] != b[i]:
            return False
    return True


@nb.njit(cache=True, nogil=True)
def _evaluate(func_id, active, z, st, best, rec_e, rec_f, budget, target):
    f = _fitness(func_id, z, active)
    st[EVALS] += 1
    if f > best[0]:
        best[0] = f
        rec_e[st[NREC]] = st[EVALS]
        rec_f[st[NREC]] = f
        st[NREC] += 1
    if best[0] >= target - TOL or st[EVALS] >= budget:
        st[STOPPED] = 1
    return f


@nb.njit(cache=True, nogil=True)
def handoff(pop, fit, mu1, mu2, spare, spare_fit, rng, func_id, active,
            st, best, rec_e, rec_f, budget, target, report):
    """Resize the parent population from ``mu1`` to ``mu2`` rows in place.

    ``report`` receives (carried, best copies, fresh). Fresh individuals are
    evaluated and counted like any other evaluation.
    """
    n = pop.shape[1]
    if mu1 == mu2:
        report[0] = mu1
        report[1] = 0
        report[2] = 0
        return
    if mu1 > mu2:
        keep = select_best(fit[:mu1], mu2, rng)
        for i in range(mu2):
            spare[i] = pop[keep[i]]
            spare_fit[i] = fit[keep[i]]
        pop[:mu2] = spare[:mu2]
        fit[:mu2] = spare_fit[:mu2]
        report[0] = mu2
        report[1] = 0
        report[2] = 0
        return
    copies = max(mu2 // 2 - mu1, 0)
    fresh = mu2 - mu1 - copies
    top = fit[:mu1].max()
    n_top = 0
    for i in range(mu1):
        if fit[i] == top:
            n_top += 1
    pick = randint(n_top, rng)
    b = 0
    for i in range(mu1):
        if fit[i] == top:
            if pick == 0:
                b = i
                break
            pick -= 1
    for j in range(mu1, mu1 + copies):
        pop[j] = pop[b]
        fit[j] = fit[b]
    report[0] = mu1
    report[1] = copies
    report[2] = 0
    for j in range(mu1 + copies, mu2):
        for i in range(n):
            pop[j, i] = rng.random() < 0.5
        fit[j] = _evaluate(func_id, active, pop[j], st, best, rec_e, rec_f, budget, target)
        report[2] += 1
        if st[STOPPED]:
            return


@nb.njit(cache=True, nogil=True)
def evolve(func_id, active, thr, mus, lams, xos, pcs, muts, ps, cdfs,
           init_pop, init_fit, budget, target, rng, rec_e, rec_f, switches, st, best):
    """Run a (possibly switching) (mu+lambda) GA until target or budget.

    Stage ``k`` (config arrays at index k) becomes active after the first
    generation in which the best-so-far fitness reaches ``thr[k]``; ``thr[0]``
    is ignored. ``switches[k]`` receives (evaluations at switch, carried,
    copies, fresh) for every stage that was entered.
    """
    n = init_pop.shape[1]
    cap = mus.max() + lams.max()
    pop = np.empty((cap, n), dtype=np.uint8)
    fit = np.empty(cap)
    spare = np.empty((cap, n), dtype=np.uint8)
    spare_fit = np.empty(cap)
    idx = np.arange(n)
    report = np.zeros(3, dtype=np.int64)
    nstages = thr.size

    stage = 0
    mu = mus[0]
    if init_pop.shape[0] == 0:
        for j in range(mu):
            for i in range(n):
                pop[j, i] = rng.random() < 0.5
            fit[j] = _evaluate(func_id, active, pop[j], st, best, rec_e, rec_f, budget, target)
            if st[STOPPED]:
                return
    else:
        pop[:mu] = init_pop
        fit[:mu] = init_fit
        best[0] = init_fit.max()
        if best[0] >= target - TOL:
            st[STOPPED] = 1
            return

    while True:
        # activate every stage whose threshold has been reached
        while stage + 1 < nstages and best[0] >= thr[stage + 1] - TOL:
            stage += 1
            handoff(pop, fit, mu, mus[stage], spare, spare_fit, rng, func_id, active,
                    st, best, rec_e, rec_f, budget, target, report)
            switches[stage, 0] = st[EVALS]
            switches[stage, 1:] = report
            st[STAGE] = stage
            mu = mus[stage]
            if st[STOPPED]:
                return
        lam = lams[stage]
        xo = xos[stage]
        pc = pcs[stage]
        mut = muts[stage]
        p = ps[stage]
        cdf = cdfs[stage]

        for k in range(mu, mu + lam):
            z = pop[k]
            if pc > 0.0 and rng.random() <= pc:
                a = randint(mu, rng)
                b = randint(mu, rng)
                crossover_into(xo, pop[a], pop[b], z, rng)
                st[NXO] += 1
                if _same(z, pop[a]):
                    fit[k] = fit[a]
                    continue
                if _same(z, pop[b]):
                    fit[k] = fit[b]
                    continue
            else:
                a = randint(mu, rng)
                z[:] = pop[a]
                if mut == MUT_STANDARD:
                    ell = sbm_count(n, p, rng)
                else:
                    ell = power_law_count(cdf, rng)
                flip_distinct(z, ell, idx, rng)
                st[NMUT] += 1
                if _same(z, pop[a]):
                    fit[k] = fit[a]
                    continue
            fit[k] = _evaluate(func_id, active, z, st, best, rec_e, rec_f, budget, target)
            if st[STOPPED]:
                return

        keep = select_best(fit[:mu + lam], mu, rng)
        for j in range(mu):
            spare[j] = pop[keep[j]]
            spare_fit[j] = fit[keep[j]]
        pop, spare = spare, pop
        fit, spare_fit = spare_fit, fit
