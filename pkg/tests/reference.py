"""Plain-Python decoders used as oracles: dict-of-edges state, no shared code with nsfaid."""


def _sat(x, lim):
    return max(-lim, min(lim, x))


def _frame(lut, x, Q):
    m = _sat(x, Q)
    if m == 0:
        return lut[0]
    v = lut[abs(m)]
    return v if m > 0 else -v


def _check_to_var(msgs, skip):
    sign = 1
    mag = None
    for k, v in enumerate(msgs):
        if k == skip:
            continue
        if v < 0:
            sign = -sign
        mag = abs(v) if mag is None else min(mag, abs(v))
    return sign * mag


def checks_of(H):
    return [[n for n, h in enumerate(row) if h] for row in H]


def flooding(H, gamma, luts, Q, Qt, iters):
    """``luts`` maps VN index to its LUT; F(0) resolves to +lut[0]. Returns AP-LLRs per iteration."""
    checks = checks_of(H)
    N = len(gamma)
    vars_ = [[] for _ in range(N)]
    for m, c in enumerate(checks):
        for n in c:
            vars_[n].append(m)
    beta = {(m, n): 0 for m, c in enumerate(checks) for n in c}
    history = []
    for _ in range(iters):
        alpha = {}
        for n in range(N):
            tot = gamma[n] + sum(beta[(m, n)] for m in vars_[n])
            for m in vars_[n]:
                alpha[(m, n)] = _frame(luts[n], tot - beta[(m, n)], Q)
        for m, c in enumerate(checks):
            ins = [alpha[(m, n)] for n in c]
            for k, n in enumerate(c):
                beta[(m, n)] = _check_to_var(ins, k)
        ap = [_sat(gamma[n] + sum(beta[(m, n)] for m in vars_[n]), Qt) for n in range(N)]
        history.append(ap)
    return history


def layered(H, gamma, luts, Q, Qt, iters, layers):
    """``layers`` lists check indices per layer; checks inside a layer must not share VNs."""
    checks = checks_of(H)
    beta = {(m, n): 0 for m, c in enumerate(checks) for n in c}
    ap = [_sat(g, Qt) for g in gamma]
    history = []
    for _ in range(iters):
        for layer in layers:
            for m in layer:
                c = checks[m]
                a = [_sat(ap[n] - beta[(m, n)], Qt) for n in c]
                framed = [_frame(luts[n], v, Q) for n, v in zip(c, a)]
                for k, n in enumerate(c):
                    beta[(m, n)] = _check_to_var(framed, k)
                    ap[n] = _sat(a[k] + beta[(m, n)], Qt)
        history.append(list(ap))
    return history
