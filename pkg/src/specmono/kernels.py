"""Hot inner loops, each in a numba flavour and a numpy flavour.

Every public kernel name is bound to one of the two implementations at import
time (see :mod:`specmono._accel`). Both flavours are also reachable through
the :data:`NUMBA` and :data:`NUMPY` namespaces so tests and benchmarks can
compare them directly. Results agree to rounding; enumeration order is
identical (mixed-radix over the successor vector, vertex 0 most significant).
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, jitable, njit

# ---------------------------------------------------------------------------
# power iteration on a nonnegative matrix
# ---------------------------------------------------------------------------


def _power_loops(S, x0, max_iter, tol):
    n = S.shape[0]
    x = x0.copy()
    y = np.empty(n)
    lam = 0.0
    resid = np.inf
    it = 0
    while it < max_iter:
        it += 1
        lam = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += S[i, j] * x[j]
            y[i] = acc
            lam += acc
        resid = 0.0
        for i in range(n):
            r = abs(y[i] - lam * x[i])
            if r > resid:
                resid = r
        for i in range(n):
            x[i] = y[i] / lam
        if resid <= tol:
            break
    return x, lam, it, resid


def _power_numpy(S, x0, max_iter, tol):
    x = x0.copy()
    lam = 0.0
    resid = np.inf
    it = 0
    while it < max_iter:
        it += 1
        y = S @ x
        lam = y.sum()
        resid = np.max(np.abs(y - lam * x))
        x = y / lam
        if resid <= tol:
            break
    return x, lam, it, resid


# ---------------------------------------------------------------------------
# exhaustive enumeration of functional subgraphs
#
# choice[v, :ncho[v]] lists the admissible targets of the single arc leaving
# v, ascending. Weights are products of A[target, source].
# ---------------------------------------------------------------------------


@jitable
def _reaches_root(succ, root, n):
    for v in range(n):
        x = v
        steps = 0
        while x != root and steps < n:
            x = succ[x]
            steps += 1
        if x != root:
            return False
    return True


@jitable
def _single_cycle(succ, n):
    label = -1
    for v in range(n):
        x = v
        for _ in range(n):
            x = succ[x]
        # x now lies on the cycle that v drains into; label it by its minimum
        lo = x
        y = succ[x]
        while y != x:
            if y < lo:
                lo = y
            y = succ[y]
        if label == -1:
            label = lo
        elif lo != label:
            return False
    return True


@jitable
def _advance(digits, ncho, n, skip):
    v = n - 1
    while v >= 0:
        if v == skip:
            v -= 1
            continue
        digits[v] += 1
        if digits[v] < ncho[v]:
            return
        digits[v] = 0
        v -= 1


def _functional_loops(A, choice, ncho, root, want_list):
    # root < 0 selects unicyclic mode (every vertex chooses an arc)
    n = A.shape[0]
    total = 1
    for v in range(n):
        if v != root:
            total *= ncho[v]
    digits = np.zeros(n, dtype=np.int64)
    succ = np.empty(n, dtype=np.int64)
    count = 0
    wsum = 0.0
    for _ in range(total):
        for v in range(n):
            succ[v] = -1 if v == root else choice[v, digits[v]]
        ok = _reaches_root(succ, root, n) if root >= 0 else _single_cycle(succ, n)
        if ok:
            w = 1.0
            for v in range(n):
                if v != root:
                    w *= A[succ[v], v]
            wsum += w
            count += 1
        _advance(digits, ncho, n, root)
    if not want_list:
        return np.empty((0, n), dtype=np.int64), np.empty(0), count, wsum
    out = np.empty((count, n), dtype=np.int64)
    wts = np.empty(count)
    digits[:] = 0
    k = 0
    for _ in range(total):
        for v in range(n):
            succ[v] = -1 if v == root else choice[v, digits[v]]
        ok = _reaches_root(succ, root, n) if root >= 0 else _single_cycle(succ, n)
        if ok:
            w = 1.0
            for v in range(n):
                out[k, v] = succ[v]
                if v != root:
                    w *= A[succ[v], v]
            wts[k] = w
            k += 1
        _advance(digits, ncho, n, root)
    return out, wts, count, wsum


_CHUNK = 1 << 15


def _functional_numpy(A, choice, ncho, root, want_list):
    n = A.shape[0]
    radix = np.where(np.arange(n) == root, 1, ncho).astype(np.int64)
    total = int(np.prod(radix))
    cols = np.arange(n)
    kept, weights = [], []
    count = 0
    wsum = 0.0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        succ = np.empty((idx.size, n), dtype=np.int64)
        rem = idx.copy()
        for v in range(n - 1, -1, -1):
            digit = rem % radix[v]
            rem //= radix[v]
            succ[:, v] = root if v == root else choice[v, digit]
        pos = np.broadcast_to(cols, succ.shape).copy()
        for _ in range(n):
            pos = np.take_along_axis(succ, pos, axis=1)
        if root >= 0:
            ok = np.all(pos == root, axis=1)
        else:
            lab = pos.copy()
            cur = pos
            for _ in range(n - 1):
                cur = np.take_along_axis(succ, cur, axis=1)
                np.minimum(lab, cur, out=lab)
            ok = np.all(lab == lab[:, :1], axis=1)
        good = succ[ok]
        src = np.broadcast_to(cols, good.shape)
        w = A[good, src]
        if root >= 0:
            w[:, root] = 1.0
            good[:, root] = -1
        w = np.prod(w, axis=1)
        count += good.shape[0]
        wsum += float(w.sum())
        if want_list:
            kept.append(good)
            weights.append(w)
    if not want_list:
        return np.empty((0, n), dtype=np.int64), np.empty(0), count, wsum
    if kept:
        return np.concatenate(kept), np.concatenate(weights), count, wsum
    return np.empty((0, n), dtype=np.int64), np.empty(0), count, wsum


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4), coefficients from Dormand & Prince (1980), Table 2
# ---------------------------------------------------------------------------

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

STATUS_REACHED = 0
STATUS_CONVERGED = 1
STATUS_FAILED = 2


@jitable
def _maxabs(v):
    m = 0.0
    for x in v:
        if abs(x) > m:
            m = abs(x)
    return m


@jitable
def _initial_step(rhs, args, t, y, f0, rtol, atol, direction):
    sc = atol + rtol * np.abs(y)
    d0 = _maxabs(y / sc)
    d1 = _maxabs(f0 / sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y + direction * h0 * f0
    f1 = rhs(t + direction * h0, y1, args)
    d2 = _maxabs((f1 - f0) / sc) / h0
    big = max(d1, d2)
    if big <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / big) ** 0.2
    return min(100.0 * h0, h1)



@jitable
def _dopri(rhs, args, t0, y0, t1, rtol, atol, h0, max_steps, nonneg, stop_tol, record):
    n = y0.size
    direction = 1.0 if t1 >= t0 else -1.0
    t = t0
    y = y0.copy()
    k1 = rhs(t, y, args)
    cap = 256 if record else 2
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t
    ys[0] = y
    m = 1
    nsteps = 0
    nrej = 0
    clamps = 0
    status = STATUS_REACHED
    conv_t = np.nan
    if stop_tol > 0.0 and _maxabs(k1) < stop_tol:
        return ts[:1].copy(), ys[:1].copy(), STATUS_CONVERGED, 0, 0, 0, t
    if t1 == t0:
        return ts[:1].copy(), ys[:1].copy(), STATUS_REACHED, 0, 0, 0, conv_t
    h = h0 if h0 > 0.0 else _initial_step(rhs, args, t, y, k1, rtol, atol, direction)
    err_prev = 1e-4
    rejected = False
    while True:
        remaining = direction * (t1 - t)
        if remaining <= 0.0:
            break
        if nsteps + nrej >= max_steps:
            status = STATUS_FAILED
            break
        hmin = 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0)
        if h < hmin:
            status = STATUS_FAILED
            break
        last = False
        if h >= remaining:
            h = remaining
            last = True
        hs = direction * h
        k2 = rhs(t + C2 * hs, y + hs * (A21 * k1), args)
        k3 = rhs(t + C3 * hs, y + hs * (A31 * k1 + A32 * k2), args)
        k4 = rhs(t + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3), args)
        k5 = rhs(t + C5 * hs, y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), args)
        k6 = rhs(t + hs, y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), args)
        ynew = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        tnew = t1 if last else t + hs
        k7 = rhs(tnew, ynew, args)
        err = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        errnorm = 0.0
        for i in range(n):
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            e = abs(err[i]) / sc
            if not (e <= errnorm):
                errnorm = e
        if errnorm <= 1.0:
            if nonneg:
                lo = ynew.min()
                if lo < -atol:
                    h *= 0.5
                    nrej += 1
                    rejected = True
                    continue
                if lo < 0.0:
                    for i in range(n):
                        if ynew[i] < 0.0:
                            ynew[i] = 0.0
                    clamps += 1
                    k7 = rhs(tnew, ynew, args)
            t = tnew
            y = ynew
            k1 = k7
            nsteps += 1
            if record:
                if m == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty((cap, n))
                    ts2[:m] = ts[:m]
                    ys2[:m] = ys[:m]
                    ts = ts2
                    ys = ys2
                ts[m] = t
                ys[m] = y
                m += 1
            else:
                ts[1] = t
                ys[1] = y
                m = 2
            if errnorm == 0.0:
                fac = 10.0
            else:
                fac = 0.9 * errnorm ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
                fac = min(10.0, max(0.2, fac))
            if rejected:
                fac = min(fac, 1.0)
            rejected = False
            h *= fac
            err_prev = max(errnorm, 1e-4)
            if stop_tol > 0.0 and _maxabs(k1) < stop_tol:
                status = STATUS_CONVERGED
                conv_t = t
                break
        else:
            nrej += 1
            if errnorm != errnorm or errnorm == np.inf:
                fac = 0.2
            else:
                fac = max(0.2, 0.9 * errnorm ** (-0.2))
            h *= fac
            rejected = True
    return ts[:m].copy(), ys[:m].copy(), status, nsteps, nrej, clamps, conv_t


# ---------------------------------------------------------------------------
# model right-hand sides
#
# Every model shares one packed parameter layout so the compiled integrator
# is built (and cached) once:  args = (code, mats, vecs, scal, ints)
#   single       mats[0]=D            vecs=eps,r,K,p        scal=mu          ints[0]=growth kind
#   predprey     mats[0]=A, mats[1]=B vecs=r,K,half,c,d     scal=mu_u,mu_v   ints[0]=response kind
#   competition  mats[0]=A            vecs=p                scal=mu_u,mu_v
#   sis          mats[0]=A            vecs=beta,gamma       scal=mu_S,mu_I
#   linear       mats[0]=M
# ---------------------------------------------------------------------------

SINGLE, PREDPREY, COMPETITION, SIS, LINEAR = 0, 1, 2, 3, 4
LOGISTIC, LINEAR_GROWTH = 0, 1
LOTKA, MONOD = 0, 1


@jitable
def _single_rhs(y, mats, vecs, scal, ints):
    D = mats[0]
    mu = scal[0]
    eps, r, K, p = vecs[0], vecs[1], vecs[2], vecs[3]
    out = mu * (D @ y) - mu * eps * y
    for i in range(y.size):
        if ints[0, i] == LOGISTIC:
            f = r[i] * (1.0 - y[i] / K[i])
        else:
            f = p[i] - y[i]
        out[i] += y[i] * f
    return out


@jitable
def _predprey_rhs(y, mats, vecs, scal, ints):
    A, B = mats[0], mats[1]
    r, K, half, c, d = vecs[0], vecs[1], vecs[2], vecs[3], vecs[4]
    n = r.size
    u = y[:n]
    v = y[n:]
    out = np.empty(2 * n)
    du = scal[0] * (A @ u)
    dv = scal[1] * (B @ v)
    for i in range(n):
        g = u[i] if ints[0, i] == LOTKA else u[i] / (half[i] + u[i])
        out[i] = r[i] * u[i] * (1.0 - u[i] / K[i]) - g * v[i] + du[i]
        out[n + i] = v[i] * (c[i] * g - d[i]) + dv[i]
    return out


@jitable
def _competition_rhs(y, mats, vecs, scal, ints):
    A = mats[0]
    p = vecs[0]
    n = p.size
    u = y[:n]
    v = y[n:]
    out = np.empty(2 * n)
    du = scal[0] * (A @ u)
    dv = scal[1] * (A @ v)
    for i in range(n):
        free = p[i] - u[i] - v[i]
        out[i] = u[i] * free + du[i]
        out[n + i] = v[i] * free + dv[i]
    return out


@jitable
def _sis_rhs(y, mats, vecs, scal, ints):
    A = mats[0]
    beta, gamma = vecs[0], vecs[1]
    n = beta.size
    S = y[:n]
    I = y[n:]
    out = np.empty(2 * n)
    dS = scal[0] * (A @ S)
    dI = scal[1] * (A @ I)
    for j in range(n):
        tot = S[j] + I[j]
        inc = 0.0 if tot == 0.0 else beta[j] * S[j] * I[j] / tot
        rec = gamma[j] * I[j]
        out[j] = dS[j] - inc + rec
        out[n + j] = dI[j] + inc - rec
    return out


@jitable
def packed_rhs(t, y, args):
    code, mats, vecs, scal, ints = args
    if code == SINGLE:
        return _single_rhs(y, mats, vecs, scal, ints)
    if code == PREDPREY:
        return _predprey_rhs(y, mats, vecs, scal, ints)
    if code == COMPETITION:
        return _competition_rhs(y, mats, vecs, scal, ints)
    if code == SIS:
        return _sis_rhs(y, mats, vecs, scal, ints)
    return mats[0] @ y


def _dopri_packed(args, t0, y0, t1, rtol, atol, h0, max_steps, nonneg, stop_tol, record):
    return _dopri(packed_rhs, args, t0, y0, t1, rtol, atol, h0, max_steps, nonneg,
                  stop_tol, record)


def pack(code, mats=(), vecs=(), scal=(), ints=(), n=1):
    """Build the packed ``args`` tuple with fixed dtypes and contiguous storage."""
    mats_a = np.ascontiguousarray(np.array(mats, dtype=np.float64).reshape(-1, n, n)) \
        if len(mats) else np.zeros((1, n, n))
    vecs_a = np.ascontiguousarray(np.array(vecs, dtype=np.float64).reshape(-1, n)) \
        if len(vecs) else np.zeros((1, n))
    scal_a = np.array(scal, dtype=np.float64).reshape(-1) if len(scal) else np.zeros(1)
    ints_a = np.ascontiguousarray(np.array(ints, dtype=np.int64).reshape(-1, n)) \
        if len(ints) else np.zeros((1, n), dtype=np.int64)
    return (np.int64(code), mats_a, vecs_a, scal_a, ints_a)


NUMPY = SimpleNamespace(
    power_iterate=_power_numpy,
    functional_subgraphs=_functional_numpy,
    dopri=_dopri,
    dopri_packed=_dopri_packed,
)

if HAVE_NUMBA:
    NUMBA = SimpleNamespace(
        power_iterate=njit(_power_loops),
        functional_subgraphs=njit(_functional_loops),
        dopri=None,
        dopri_packed=njit(_dopri_packed),
    )
else:  # pragma: no cover
    NUMBA = NUMPY

ACTIVE = NUMBA if USE_NUMBA else NUMPY

power_iterate = ACTIVE.power_iterate
functional_subgraphs = ACTIVE.functional_subgraphs
dopri_packed = ACTIVE.dopri_packed
dopri_generic = _dopri
