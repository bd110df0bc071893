"""Pure-Python kernels.  ``_ckernels.pyx`` mirrors these line for line.

Schedule-DP states use integer slot counts.  A box holds ``a`` slots; loads
are stored one byte per box with ``OVF`` marking an overfull box.

* merged state key: ``(loads: bytes, max_child_load: bytes, must_contain: bool)``
* vertex state key: ``(loads: bytes, t_v: int)`` with ``t_v = -1`` for no query
"""

OVF = 255


class StateCapExceeded(RuntimeError):
    pass


def merge_level(prev, child, a, cap):
    """Merge every state in ``prev`` with every child state.

    Returns ``{merged_key: (prev_key, child_key)}`` keeping the first
    provenance seen for each distinct key.
    """
    out = {}
    for s in prev:
        sl, sm, must = s
        for ck in child:
            cl, ctv = ck
            loads = bytes(
                [OVF if x == OVF or x + y > a else x + y for x, y in zip(sl, cl)]
            )
            mcl = bytes([x if x >= y else y for x, y in zip(sm, cl)])
            key = (loads, mcl, must or ctv < 0)
            if key not in out:
                out[key] = (s, ck)
                if len(out) > cap:
                    raise StateCapExceeded(len(out))
    return out


def insert_one(loads, mcl, t, w, a, L):
    """Loads after inserting a job ``[t, t+w]`` (slots), or ``None`` if infeasible.

    ``t = -1`` means no query to the vertex.
    """
    out = bytearray(L)
    if t < 0:
        for p in range(L):
            x = loads[p]
            if x == OVF:
                return None
            out[p] = x
        return bytes(out)
    e = t + w
    if e > L * a:
        return None
    for p in range(L):
        lo = p * a
        hi = lo + a
        ap = (e if e < hi else hi) - (t if t > lo else lo)
        if ap < 0:
            ap = 0
        if mcl[p] + ap > a:
            return None
        if e >= hi:
            x = loads[p]
            if x == OVF or x + ap > a:
                return None
            out[p] = x + ap
        else:
            out[p] = ap
    return bytes(out)


def insert_level(merged, w, heavy, a, L, cap):
    """Insert the vertex's own query at every admissible start into every merged state.

    Returns ``{vertex_key: (merged_key, t)}``.
    """
    out = {}
    horizon = L * a
    step = a if heavy else 1
    for m in merged:
        loads, mcl, must = m
        t = 0
        while t < horizon and t + w <= horizon:
            r = insert_one(loads, mcl, t, w, a, L)
            if r is not None:
                key = (r, t)
                if key not in out:
                    out[key] = (m, t)
                    if len(out) > cap:
                        raise StateCapExceeded(len(out))
            t += step
        if not must:
            r = insert_one(loads, mcl, -1, w, a, L)
            if r is not None:
                key = (r, -1)
                if key not in out:
                    out[key] = (m, -1)
                    if len(out) > cap:
                        raise StateCapExceeded(len(out))
    return out


def _components(rest, start_bits, adj):
    comps = []
    nb = start_bits
    while nb:
        comp = nb & -nb
        frontier = comp
        while frontier:
            grow = 0
            f = frontier
            while f:
                low = f & -f
                grow |= adj[low.bit_length() - 1]
                f ^= low
            grow &= rest & ~comp
            comp |= grow
            frontier = grow
        comps.append(comp)
        nb &= ~comp
    return comps


def opt_masks(adj, weights, full):
    """Exact minimax over connected vertex sets encoded as bitmasks.

    ``weights`` are integers (a common denominator has been factored out).
    Returns ``(value, choice)`` dictionaries over every reachable mask;
    ``choice`` holds the smallest-id optimal query.
    """
    value = {}
    choice = {}

    def solve(mask):
        if mask in value:
            return value[mask]
        if mask & (mask - 1) == 0:
            value[mask] = 0
            return 0
        best = None
        arg = -1
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            rest = mask ^ low
            worst = 0
            for comp in _components(rest, adj[v] & rest, adj):
                c = solve(comp)
                if c > worst:
                    worst = c
            cand = weights[v] + worst
            if best is None or cand < best:
                best = cand
                arg = v
        value[mask] = best
        choice[mask] = arg
        return best

    solve(full)
    return value, choice


def path_dp(weights):
    """Interval DP on a path: ``opt[i][j]`` and argmin ``arg[i][j]`` for ``i <= j``."""
    k = len(weights)
    opt = [[0] * k for _ in range(k)]
    arg = [[-1] * k for _ in range(k)]
    for i in range(k):
        arg[i][i] = i
    for span in range(1, k):
        for i in range(k - span):
            j = i + span
            best = None
            bq = -1
            for q in range(i, j + 1):
                left = opt[i][q - 1] if q > i else 0
                right = opt[q + 1][j] if q < j else 0
                cand = weights[q] + (left if left > right else right)
                if best is None or cand < best:
                    best = cand
                    bq = q
            opt[i][j] = best
            arg[i][j] = bq
    return opt, arg
