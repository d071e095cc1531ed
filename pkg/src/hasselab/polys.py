"""Sparse multivariate polynomials as dicts {exponent tuple: coefficient}.

Coefficients are duck-typed: ints, Fractions, AlgebraicNumbers, floats and
complexes all work, as long as they support +, *, unary minus and truthiness
(zero coefficients are falsy and get dropped).
"""


def p_zero():
    return {}


def p_const(nvars, c):
    if not c:
        return {}
    return {(0,) * nvars: c}


def p_add(a, b):
    out = dict(a)
    for exps, c in b.items():
        acc = out.get(exps)
        acc = c if acc is None else acc + c
        if acc:
            out[exps] = acc
        elif exps in out:
            del out[exps]
    return out


def p_neg(a):
    return {exps: -c for exps, c in a.items()}


def p_sub(a, b):
    return p_add(a, p_neg(b))


def p_scale(a, factor):
    if not factor:
        return {}
    out = {}
    for exps, c in a.items():
        v = c * factor
        if v:
            out[exps] = v
    return out


def p_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            exps = tuple(x + y for x, y in zip(ea, eb))
            v = ca * cb
            if not v:
                continue
            acc = out.get(exps)
            acc = v if acc is None else acc + v
            if acc:
                out[exps] = acc
            elif exps in out:
                del out[exps]
    return out


def p_pow(a, e):
    if e < 0:
        raise ValueError("negative exponent")
    result = None
    base = a
    while e:
        if e & 1:
            result = base if result is None else p_mul(result, base)
        e >>= 1
        if e:
            base = p_mul(base, base)
    if result is None:
        raise ValueError("p_pow with e=0 needs an explicit unit; callers avoid it")
    return result


def p_eval(a, point):
    total = None
    for exps, c in a.items():
        term = c
        for var, e in enumerate(exps):
            for _ in range(e):
                term = term * point[var]
        total = term if total is None else total + term
    return total


def p_degree(a):
    if not a:
        return -1
    return max(sum(exps) for exps in a)


def p_map(a, fn):
    out = {}
    for exps, c in a.items():
        v = fn(c)
        if v:
            out[exps] = v
    return out
