"""Compiled inner loops.

Everything random in the package is drawn from a counter-based generator:
the uniform attached to vertex ``v`` under stream key ``key`` is
``mix64(key + v * GAMMA)``, i.e. the SplitMix64 output function evaluated at
counter ``v``.  Random access by absolute vertex index is what lets lazily
traced ancestral lines and dense windows see the same realised graph.
"""
import math

import numba
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

KMAX = np.int64(9223372036854775807)
# exits further below than this are clamped; only order comparisons follow
FAR_BELOW = np.int64(-(2 ** 62))

LAW_POWER = 0
LAW_LOGPOW = 1
LAW_FINITE = 2


@numba.njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(cache=True, nogil=True)
def uniform_at(key, v):
    """Uniform on the open interval (0, 1) attached to vertex ``v``."""
    z = mix64(key + np.uint64(v) * GAMMA)
    return (np.float64(z >> _S11) + 0.5) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True, nogil=True)
def uniforms_at(key, vertices):
    out = np.empty(vertices.shape[0], dtype=np.float64)
    for i in range(vertices.shape[0]):
        out[i] = uniform_at(key, vertices[i])
    return out


@numba.njit(cache=True, nogil=True)
def derive_key(seed, a, b):
    h = mix64(np.uint64(seed) + GAMMA)
    h = mix64(h ^ (np.uint64(a) * GAMMA + np.uint64(0x632BE59BD9B4E019)))
    h = mix64(h ^ (np.uint64(b) * GAMMA + np.uint64(0x8CB92BA72F3D8DD7)))
    return h


@numba.njit(cache=True, nogil=True)
def tail_at(kind, alpha, beta, ftail, x):
    """Tail mass T(x) for integer-valued x >= 1 (float argument)."""
    if kind == LAW_POWER:
        return x ** (-alpha)
    if kind == LAW_LOGPOW:
        return x ** (-alpha) * math.log(x - 1.0 + math.e) ** beta
    j = np.int64(x) - 1
    if j >= ftail.shape[0]:
        return 0.0
    return ftail[j]


@numba.njit(cache=True, nogil=True)
def draw_k(kind, alpha, beta, ftail, u):
    """K = max{n >= 1 : T(n) > u}, saturating at 2**63 - 1."""
    if kind == LAW_FINITE:
        k = 1
        while k < ftail.shape[0] and ftail[k] > u:
            k += 1
        return np.int64(k)
    lu = -math.log(u)
    x = math.exp(lu / alpha)
    if kind == LAW_LOGPOW:
        for _ in range(8):
            x = math.exp((lu + beta * math.log(math.log(max(x, 1.0) - 1.0 + math.e))) / alpha)
    if not x < 4.0e18:  # also catches nan
        x = 4.0e18
    k0 = max(np.int64(1), np.int64(x))
    # bracket lo < K + 1 <= hi around the guess, then bisect on integers;
    # a bad guess only costs a logarithmic number of extra steps
    step = np.int64(1)
    if tail_at(kind, alpha, beta, ftail, np.float64(k0)) > u:
        lo = k0
        hi = k0 + step
        while tail_at(kind, alpha, beta, ftail, np.float64(hi)) > u:
            lo = hi
            if step > (KMAX - k0) // 4:
                return KMAX
            step *= 2
            hi = k0 + step
    else:
        hi = k0
        lo = np.int64(1)
        while k0 - step > 1:
            if tail_at(kind, alpha, beta, ftail, np.float64(k0 - step)) > u:
                lo = k0 - step
                break
            hi = k0 - step
            step *= 2
    while hi - lo > 1:
        mid = lo + (hi - lo) // 2
        if tail_at(kind, alpha, beta, ftail, np.float64(mid)) > u:
            lo = mid
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def draw_k_array(kind, alpha, beta, ftail, u):
    out = np.empty(u.shape[0], dtype=np.int64)
    for i in range(u.shape[0]):
        out[i] = draw_k(kind, alpha, beta, ftail, u[i])
    return out


@numba.njit(cache=True, nogil=True)
def parent_of(v, k):
    """Saturating v - k."""
    if k >= v - FAR_BELOW:
        return FAR_BELOW
    return v - k


@numba.njit(cache=True, nogil=True)
def window_offsets(kind, alpha, beta, ftail, key, lo, hi):
    out = np.empty(hi - lo + 1, dtype=np.int64)
    for i in range(hi - lo + 1):
        out[i] = draw_k(kind, alpha, beta, ftail, uniform_at(key, lo + i))
    return out


@numba.njit(cache=True, nogil=True)
def window_roots(lo, offsets):
    """Lowest in-window ancestor of every vertex (parents always lie below)."""
    m = offsets.shape[0]
    root = np.empty(m, dtype=np.int64)
    for i in range(m):
        if offsets[i] > i:
            root[i] = i
        else:
            root[i] = root[i - offsets[i]]
    return root


# -- small array heap keyed by position (max first) ----------------------------

@numba.njit(cache=True, nogil=True)
def _heap_push(hp, hid, size, pos, ident):
    i = size
    hp[i] = pos
    hid[i] = ident
    while i > 0:
        par = (i - 1) // 2
        if hp[par] >= hp[i]:
            break
        hp[par], hp[i] = hp[i], hp[par]
        hid[par], hid[i] = hid[i], hid[par]
        i = par
    return size + 1


@numba.njit(cache=True, nogil=True)
def _heap_pop(hp, hid, size):
    pos = hp[0]
    ident = hid[0]
    size -= 1
    hp[0] = hp[size]
    hid[0] = hid[size]
    i = 0
    while True:
        lft = 2 * i + 1
        big = i
        if lft < size and hp[lft] > hp[big]:
            big = lft
        if lft + 1 < size and hp[lft + 1] > hp[big]:
            big = lft + 1
        if big == i:
            break
        hp[big], hp[i] = hp[i], hp[big]
        hid[big], hid[i] = hid[i], hid[big]
        i = big
    return pos, ident, size


@numba.njit(cache=True, nogil=True)
def _find(uf, a):
    r = a
    while uf[r] != r:
        r = uf[r]
    while uf[a] != r:
        nxt = uf[a]
        uf[a] = r
        a = nxt
    return r


@numba.njit(cache=True, nogil=True)
def trace_components(kind, alpha, beta, ftail, key, n, depth):
    """Component structure of {1..n} in the graph restricted to [-depth, n].

    Vertices 1..n are handled densely; below 0 only the ancestral lines of
    1..n are followed, merging whenever two lines land on the same vertex.

    Returns
    -------
    comp : int64[n + 1]
        Component id of vertex z (index 0 unused), ids are 0..m-1.
    min_vertex : int64[m]
        Lowest in-window vertex of each component (its colour key).
    exit_pos : int64[m]
        First ancestor strictly below -depth.
    size : int64[m]
        Number of vertices of {1..n} in each component.
    """
    lo = -depth
    label = np.empty(n + 1, dtype=np.int64)
    nroots = 0
    root_vertex = np.empty(n, dtype=np.int64)
    root_target = np.empty(n, dtype=np.int64)
    for z in range(1, n + 1):
        k = draw_k(kind, alpha, beta, ftail, uniform_at(key, z))
        par = parent_of(z, k)
        if par >= 1:
            label[z] = label[par]
        else:
            label[z] = nroots
            root_vertex[nroots] = z
            root_target[nroots] = par
            nroots += 1

    uf = np.arange(nroots)
    line_min = root_vertex[:nroots].copy()
    line_exit = np.empty(nroots, dtype=np.int64)
    hp = np.empty(nroots, dtype=np.int64)
    hid = np.empty(nroots, dtype=np.int64)
    size = 0
    for r in range(nroots):
        if root_target[r] >= lo:
            size = _heap_push(hp, hid, size, root_target[r], r)
        else:
            line_exit[r] = root_target[r]
    while size > 0:
        v, a, size = _heap_pop(hp, hid, size)
        while size > 0 and hp[0] == v:
            _, b, size = _heap_pop(hp, hid, size)
            ra = _find(uf, a)
            rb = _find(uf, b)
            if ra != rb:
                uf[rb] = ra
        a = _find(uf, a)
        line_min[a] = v
        k = draw_k(kind, alpha, beta, ftail, uniform_at(key, v))
        w = parent_of(v, k)
        if w >= lo:
            size = _heap_push(hp, hid, size, w, a)
        else:
            line_exit[a] = w

    ident = np.full(nroots, -1, dtype=np.int64)
    m = 0
    for r in range(nroots):
        f = _find(uf, r)
        if ident[f] < 0:
            ident[f] = m
            m += 1
    min_vertex = np.empty(m, dtype=np.int64)
    exit_pos = np.empty(m, dtype=np.int64)
    csize = np.zeros(m, dtype=np.int64)
    for r in range(nroots):
        f = _find(uf, r)
        if f == r:
            min_vertex[ident[f]] = line_min[f]
            exit_pos[ident[f]] = line_exit[f]
    comp = np.empty(n + 1, dtype=np.int64)
    comp[0] = -1
    for z in range(1, n + 1):
        c = ident[_find(uf, label[z])]
        comp[z] = c
        csize[c] += 1
    return comp, min_vertex, exit_pos, csize


@numba.njit(cache=True, nogil=True)
def color_increments(comp, min_vertex, color_key, p):
    m = min_vertex.shape[0]
    col = np.empty(m, dtype=np.int8)
    for c in range(m):
        col[c] = 1 if uniform_at(color_key, min_vertex[c]) < p else -1
    n = comp.shape[0] - 1
    x = np.empty(n, dtype=np.int8)
    for z in range(1, n + 1):
        x[z - 1] = col[comp[z]]
    return x


@numba.njit(cache=True, nogil=True)
def meeting_depth(kind, alpha, beta, ftail, key, k, max_depth):
    """Follow the lines of 0 and k in one realised graph.

    Returns the (non-negative) depth -v of the first common vertex v, or -1
    if both lines pass below -max_depth first.
    """
    a = np.int64(0)
    b = np.int64(k)
    lo = -max_depth
    while True:
        if a == b:
            return -a
        if a > b:
            a = parent_of(a, draw_k(kind, alpha, beta, ftail, uniform_at(key, a)))
            if a < lo:
                return -1
        else:
            b = parent_of(b, draw_k(kind, alpha, beta, ftail, uniform_at(key, b)))
            if b < lo:
                return -1


@numba.njit(cache=True, nogil=True)
def adjusted_walk(kind, alpha, beta, ftail, key, coin_key, n):
    x = np.empty(n + 1, dtype=np.int8)
    x[0] = 0
    fresh = 0
    for i in range(1, n + 1):
        k = draw_k(kind, alpha, beta, ftail, uniform_at(key, i))
        if k <= i - 1:
            x[i] = x[i - k]
        else:
            x[i] = 1 if uniform_at(coin_key, i) < 0.5 else -1
            fresh += 1
    return x[1:], fresh


@numba.njit(cache=True, nogil=True)
def pair_risk(exit_pos, csize, rho_head, amp, expo):
    """Union-bound coalescence probability and expected size cross-term.

    rho(d) is read from ``rho_head`` for d < len(rho_head) and from the
    power law ``amp * d**expo`` beyond.
    """
    m = exit_pos.shape[0]
    prob = 0.0
    cross = 0.0
    nh = rho_head.shape[0]
    for a in range(m):
        for b in range(a + 1, m):
            d = exit_pos[a] - exit_pos[b]
            if d < 0:
                d = -d
            if d < nh:
                r = rho_head[d]
            else:
                r = min(1.0, amp * np.float64(d) ** expo)
            prob += r
            cross += 2.0 * r * csize[a] * csize[b]
    return min(prob, 1.0), cross


@numba.njit(cache=True, nogil=True)
def hitting_counts(kind, alpha, beta, ftail, seed, purpose, N, r0, r1, counts):
    """Add, for replicas r0..r1-1, the indicator of each n <= N being a partial sum."""
    for r in range(r0, r1):
        key = derive_key(seed, purpose, np.uint64(r))
        s = np.int64(0)
        j = np.int64(0)
        while True:
            k = draw_k(kind, alpha, beta, ftail, uniform_at(key, j))
            j += 1
            if k > N - s:
                break
            s += k
            counts[s] += 1
