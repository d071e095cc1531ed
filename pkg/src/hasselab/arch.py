"""Archimedean density: oscillatory integrals v_1, place factorization, the
truncated beta-integral for chi_infinity, and the Schmidt-weight estimator.

Quadrature is composite Gauss-Legendre with oscillation-aware panel counts;
every floating result carries an error estimate and the spec that produced it.
Additively separable phases (diagonal forms) factor into per-variable
integrals, which is what makes the desk-scale experiments affordable.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
import math

import numpy as np

from .errors import DimensionMismatch
from .field import AlgebraicNumber


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "tensor-panel"  # or "monte-carlo"
    base_panels: int = 6
    nodes: int = 10
    samples: int = 400_000
    seed: int = 0
    target: float = 1e-7
    max_nodes: int = 4_000_000


@dataclass
class ValueWithError:
    value: complex
    error: float
    ok: bool = True
    meta: dict = dc_field(default_factory=dict)


def _normalize_beta(mls, beta):
    n = mls.field.n
    if len(beta) != mls.R or any(len(row) != mls.r for row in beta):
        raise DimensionMismatch("beta must be an R x r matrix")
    out = []
    for row in beta:
        new = []
        for b in row:
            if isinstance(b, AlgebraicNumber):
                coords = tuple(float(c) for c in b.coords)
            elif isinstance(b, (int, float, Fraction)):
                coords = tuple(float(b) * float(c) for c in mls.field._one_coords)
            else:
                coords = tuple(float(x) for x in b)
                if len(coords) != n:
                    raise DimensionMismatch("beta coordinate vectors must have length n")
            new.append(coords)
        out.append(new)
    return out


def _phase_terms_real(mls, beta_hat):
    """Phase Tr F(y; beta) as float terms [(coef, ((var, exp), ...))] over the n*m*s coords."""
    field = mls.field
    n = field.n
    gram = [[float(x) for x in row] for row in field.gram]
    comps = mls.components("coordinate")
    acc = {}
    for rho in range(mls.R):
        for jidx in range(mls.r):
            bh = beta_hat[rho][jidx]
            w = [sum(gram[l][k] * bh[k] for k in range(n)) for l in range(n)]
            for l in range(n):
                if not w[l]:
                    continue
                for exps, c in comps[rho][jidx][l].items():
                    acc[exps] = acc.get(exps, 0.0) + w[l] * float(c)
    return [
        (coef, tuple((i, e) for i, e in enumerate(exps) if e))
        for exps, coef in acc.items()
        if coef
    ]


def _split_separable(terms, nvars, group_of):
    """Group terms by the single variable-group they touch; None if mixed."""
    groups = {}
    for coef, vars_ in terms:
        touched = {group_of(v) for v, _ in vars_}
        if len(touched) > 1:
            return None
        g = touched.pop() if touched else None
        groups.setdefault(g, []).append((coef, vars_))
    return groups


def _eval_terms_np(terms, pts, complex_coeffs=False):
    total = np.zeros(pts.shape[0], dtype=complex if complex_coeffs else float)
    for coef, vars_ in terms:
        t = np.full(pts.shape[0], coef, dtype=complex if complex_coeffs else float)
        for v, e in vars_:
            col = pts[:, v]
            t = t * (col if e == 1 else col**e)
        total += t
    return total


def _gl_axis(panels, order, halfwidth):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-halfwidth, halfwidth, panels + 1)
    nodes = []
    weights = []
    for k in range(panels):
        a, b = edges[k], edges[k + 1]
        nodes.append((b - a) / 2 * x + (a + b) / 2)
        weights.append((b - a) / 2 * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _tensor_integral(terms, dims, halfwidth, panels, order, phase_is_complex=False):
    """Integral of e(phase(y)) over [-h, h]^dims by a tensor GL rule.

    phase_is_complex: terms have complex coefficients and the phase is
    2 * Re(sum) (complex-place convention).
    """
    nodes, weights = _gl_axis(panels, order, halfwidth)
    npts = len(nodes)
    if dims == 0:
        return complex(np.exp(2j * np.pi * 0.0))
    total_pts = npts**dims
    if total_pts <= 2_000_000:
        grids = np.meshgrid(*([nodes] * dims), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        wgrids = np.meshgrid(*([weights] * dims), indexing="ij")
        wts = np.ones(total_pts)
        for g in wgrids:
            wts = wts * g.ravel()
        phase = _eval_terms_np(terms, pts, complex_coeffs=phase_is_complex)
        if phase_is_complex:
            phase = 2.0 * phase.real
        vals = np.exp(2j * np.pi * phase)
        return complex(np.sum(wts * vals))
    # peel the leading axis and recurse on partially evaluated terms
    total = 0j
    for x0, w0 in zip(nodes, weights):
        sub = []
        for coef, vars_ in terms:
            c = coef
            rest = []
            for v, e in vars_:
                if v == 0:
                    c = c * x0**e
                else:
                    rest.append((v - 1, e))
            sub.append((c, tuple(rest)))
        total += w0 * _tensor_integral(
            sub, dims - 1, halfwidth, panels, order, phase_is_complex
        )
    return total


def _oscillation_amp(terms, halfwidth):
    amp = 0.0
    for coef, vars_ in terms:
        deg = sum(e for _, e in vars_)
        amp += abs(coef) * halfwidth**deg
    return amp


def _integrate_factor(terms, dims, halfwidth, spec, phase_is_complex=False):
    """One box factor with two-level refinement for the error estimate."""
    amp = _oscillation_amp(terms, halfwidth)
    panels = spec.base_panels + int(math.ceil(amp))
    while (panels * spec.nodes) ** max(dims, 1) > spec.max_nodes and panels > 2:
        panels -= max(1, panels // 4)
    coarse_panels = max(1, panels // 2)
    fine = _tensor_integral(terms, dims, halfwidth, panels, spec.nodes, phase_is_complex)
    coarse = _tensor_integral(terms, dims, halfwidth, coarse_panels, spec.nodes, phase_is_complex)
    err = abs(fine - coarse)
    ok = err <= max(spec.target, 1e-14) * max(1.0, abs(fine)) or err <= spec.target * 10
    return ValueWithError(
        value=fine,
        error=err,
        ok=ok,
        meta={"panels": panels, "order": spec.nodes, "dims": dims, "amp": amp},
    )


def _product_with_errors(factors, extra_dims_volume=1.0):
    value = complex(extra_dims_volume)
    for f in factors:
        value *= f.value
    err = 0.0
    for i, f in enumerate(factors):
        partial = extra_dims_volume
        for k, g in enumerate(factors):
            if k != i:
                partial *= max(abs(g.value), g.error)
        err += f.error * partial
    return value, err


def v1(mls, beta, spec=QuadratureSpec(), halfwidth=1.0):
    """v_1(beta): integral of e(Tr F(y; beta)) over the coordinate box [-1,1]^(nms).

    Separable phases (diagonal systems) factor per K-variable; otherwise a full
    tensor rule with a node budget is used and flagged if the target is unmet.
    """
    field = mls.field
    n = field.n
    nvars = n * mls.m * mls.s
    beta_hat = _normalize_beta(mls, beta)
    terms = _phase_terms_real(mls, beta_hat)
    if not terms:
        return ValueWithError(value=complex((2.0 * halfwidth) ** nvars), error=0.0,
                              meta={"separable": True, "trivial": True})
    groups = _split_separable(terms, nvars, lambda v: v // n)
    if groups is not None and None not in groups:
        factors = []
        for g, gterms in sorted(groups.items()):
            base = g * n
            local_terms = [
                (coef, tuple((v - base, e) for v, e in vars_)) for coef, vars_ in gterms
            ]
            factors.append(_integrate_factor(local_terms, n, halfwidth, spec))
        free = (mls.m * mls.s) - len(groups)
        volume_free = (2.0 * halfwidth) ** (n * free)
        value, err = _product_with_errors(factors, volume_free)
        return ValueWithError(
            value=value,
            error=err,
            ok=all(f.ok for f in factors),
            meta={"separable": True, "factors": [f.meta for f in factors]},
        )
    out = _integrate_factor(terms, nvars, halfwidth, spec)
    out.meta["separable"] = False
    return out


def v1_place_factors(mls, beta, spec=QuadratureSpec()):
    """Per-place factors of v_1: real places over [-1,1]^(ms), complex places doubled.

    At a complex place the integrand is e(2 Re F^(l)) over real and imaginary
    parts; the product of the factors reproduces v_1.
    """
    field = mls.field
    beta_hat = _normalize_beta(mls, beta)
    W = field.embed_matrix
    n = field.n
    ms = mls.m * mls.s
    comps = mls.components("coordinate")
    factors = []
    for l in range(field.n1 + field.n2):
        is_complex = l >= field.n1
        dims_per_var = 2 if is_complex else 1
        nvars_place = ms * dims_per_var
        # beta at this place
        acc = {}
        for rho in range(mls.R):
            for jidx in range(mls.r):
                b_place = sum(W[l][k] * beta_hat[rho][jidx][k] for k in range(n))
                if not b_place:
                    continue
                block = mls.blocks[rho][jidx]
                for exps, c in block.items():
                    c_place = sum(W[l][k] * float(ck) for k, ck in enumerate(c.coords))
                    coef = b_place * c_place
                    if not coef:
                        continue
                    acc_key = exps
                    acc[acc_key] = acc.get(acc_key, 0j) + coef
        # expand K-variable monomials into place coordinates
        terms = []
        for exps, coef in acc.items():
            if not coef:
                continue
            terms.append((coef, exps))
        place_terms = _expand_place_terms(terms, ms, is_complex)
        if not is_complex:
            # real-place coefficients are real up to fp noise in the embeddings
            place_terms = [(complex(c).real, vars_) for c, vars_ in place_terms]
        if not place_terms:
            factors.append(
                ValueWithError(value=complex(2.0**nvars_place), error=0.0,
                               meta={"place": l, "trivial": True})
            )
            continue
        groups = _split_separable(place_terms, nvars_place, lambda v: v // dims_per_var)
        if groups is not None and None not in groups:
            subfactors = []
            for g, gterms in sorted(groups.items()):
                base = g * dims_per_var
                local_terms = [
                    (coef, tuple((v - base, e) for v, e in vars_)) for coef, vars_ in gterms
                ]
                subfactors.append(
                    _integrate_factor(local_terms, dims_per_var, 1.0, spec, phase_is_complex=is_complex)
                )
            free = ms - len(groups)
            value, err = _product_with_errors(subfactors, 2.0 ** (dims_per_var * free))
            factors.append(
                ValueWithError(value=value, error=err, ok=all(f.ok for f in subfactors),
                               meta={"place": l, "separable": True}))
        else:
            out = _integrate_factor(place_terms, nvars_place, 1.0, spec, phase_is_complex=is_complex)
            out.meta["place"] = l
            factors.append(out)
    value, err = _product_with_errors(factors)
    return factors, ValueWithError(value=value, error=err, ok=all(f.ok for f in factors))


def _expand_place_terms(terms, ms, is_complex):
    """K-variable monomials to real-coordinate monomial lists at one place.

    Real place: variable i is coordinate i.  Complex place: z_i = u_{2i} +
    i u_{2i+1}, expanded binomially; phase convention handles the 2 Re.
    """
    out = []
    for coef, exps in terms:
        if not is_complex:
            vars_ = tuple((i, e) for i, e in enumerate(exps) if e)
            out.append((coef, vars_))
            continue
        expansion = [(coef, ())]
        for i, e in enumerate(exps):
            if not e:
                continue
            new = []
            for c0, vars0 in expansion:
                for k in range(e + 1):
                    c = c0 * math.comb(e, k) * (1j) ** (e - k)
                    u_part = ((2 * i, k),) if k else ()
                    v_part = ((2 * i + 1, e - k),) if e - k else ()
                    new.append((c, vars0 + u_part + v_part))
            expansion = new
        out.extend(expansion)
    merged = {}
    for c, vars_ in out:
        key = tuple(sorted(vars_))
        merged[key] = merged.get(key, 0j) + c
    return [(c, vars_) for vars_, c in merged.items() if c]


@dataclass
class ChiInfBeta:
    value: float
    error: float
    table: list
    tail: float | None
    meta: dict


def chi_inf_beta(mls, truncation, spec=QuadratureSpec(), outer_panels_per_unit=2.0):
    """Truncated singular integral: integral of v_1(beta) over |beta| <= X.

    Returns a convergence table over X/4, X/2, X and a power-law tail estimate
    along the first coordinate ray when the decay exponent allows one.
    """
    field = mls.field
    dims = field.n * mls.R * mls.r
    xs = [truncation / 4.0, truncation / 2.0, truncation]

    def integrate_to(X, panels_scale=1.0):
        panels = max(2, int(math.ceil(outer_panels_per_unit * X * panels_scale)))
        nodes, weights = _gl_axis(panels, spec.nodes, X)
        total = 0j
        inner_err = 0.0

        def rec(prefix, w_acc, depth):
            nonlocal total, inner_err
            if depth == dims:
                beta_flat = list(prefix)
                beta = _unflatten_beta(mls, beta_flat)
                res = v1(mls, beta, spec)
                total += w_acc * res.value
                inner_err += abs(w_acc) * res.error
                return
            for x0, w0 in zip(nodes, weights):
                rec(prefix + (x0,), w_acc * w0, depth + 1)

        rec((), 1.0, 0)
        return total, inner_err

    table = []
    for X in xs:
        val, ierr = integrate_to(X)
        table.append((X, val.real, abs(val.imag), ierr))
    fine, inner_err = table[-1][1], table[-1][3]
    coarse, _ = integrate_to(truncation, panels_scale=0.5)[0].real, None
    refine_err = abs(fine - coarse)

    tail = None
    e1 = [[0.0] * field.n for _ in range(mls.R * mls.r)]
    v_half = abs(v1(mls, _unflatten_beta(mls, _ray_point(mls, truncation / 2)), spec).value)
    v_full = abs(v1(mls, _unflatten_beta(mls, _ray_point(mls, truncation)), spec).value)
    if v_full > 0 and v_half > v_full:
        kappa = math.log(v_half / v_full) / math.log(2)
        if kappa > dims:
            # |v1| ~ C t^-kappa on the ray: crude shell bound beyond X
            c_fit = v_full * truncation**kappa
            tail = (
                c_fit
                * (2.0**dims)
                * truncation ** (dims - kappa)
                / (kappa - dims)
            )
    err = refine_err + inner_err + (tail if tail is not None else 0.0)
    return ChiInfBeta(
        value=fine,
        error=err,
        table=table,
        tail=tail,
        meta={"dims": dims, "truncation": truncation, "spec": spec.__dict__.copy()},
    )


def _ray_point(mls, t):
    flat = [0.0] * (mls.field.n * mls.R * mls.r)
    flat[0] = t
    return flat


def _unflatten_beta(mls, flat):
    n = mls.field.n
    out = []
    idx = 0
    for rho in range(mls.R):
        row = []
        for jidx in range(mls.r):
            row.append(tuple(flat[idx : idx + n]))
            idx += n
        out.append(row)
    return out


@dataclass
class SchmidtEstimate:
    value: float
    error: float
    L: float
    samples: int
    meta: dict


def chi_inf_schmidt(mls, L, samples=1_000_000, seed=0, batch=250_000):
    """Monte-Carlo Schmidt-weight estimator of the archimedean density.

    Applies the triangle kernel per infinite place to every block value
    (product of real and imaginary kernels at complex places) and averages
    over the coordinate box; nonnegative by construction.
    """
    field = mls.field
    n = field.n
    nvars = n * mls.m * mls.s
    comps = mls.components("coordinate")
    compiled = [
        [
            [
                [
                    (float(c), tuple((i, e) for i, e in enumerate(exps) if e))
                    for exps, c in comp.items()
                ]
                for comp in block
            ]
            for block in row
        ]
        for row in comps
    ]
    W = np.array(field.embed_matrix, dtype=complex)  # (places, n)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    L = float(L)
    while done < samples:
        m_batch = min(batch, samples - done)
        pts = rng.uniform(-1.0, 1.0, size=(m_batch, nvars))
        integrand = np.ones(m_batch)
        for rho in range(mls.R):
            for jidx in range(mls.r):
                coords = np.zeros((n, m_batch))
                for l in range(n):
                    terms = compiled[rho][jidx][l]
                    if terms:
                        coords[l] = _eval_terms_np(terms, pts)
                place_vals = W @ coords  # (places, m_batch) complex
                for l in range(field.n1):
                    x = place_vals[l].real
                    integrand *= np.maximum(0.0, L * (1.0 - L * np.abs(x)))
                for l in range(field.n1, field.n1 + field.n2):
                    z = place_vals[l]
                    integrand *= np.maximum(0.0, L * (1.0 - L * np.abs(z.real)))
                    integrand *= np.maximum(0.0, L * (1.0 - L * np.abs(z.imag)))
        total += float(np.sum(integrand))
        total_sq += float(np.sum(integrand**2))
        done += m_batch
    volume = 2.0**nvars
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    stderr = math.sqrt(var / samples) * volume
    return SchmidtEstimate(
        value=mean * volume,
        error=stderr,
        L=L,
        samples=samples,
        meta={"seed": seed, "volume": volume},
    )


def v_scaling_check(mls, P, beta, spec=QuadratureSpec()):
    """Relative deviation between v_P(beta) and P^(nms) v_1(P^d beta)."""
    field = mls.field
    nvars = field.n * mls.m * mls.s
    left = v1(mls, beta, spec, halfwidth=float(P))
    beta_hat = _normalize_beta(mls, beta)
    scaled = [
        [tuple(float(P) ** mls.d * c for c in cell) for cell in row] for row in beta_hat
    ]
    right = v1(mls, scaled, spec)
    rhs = float(P) ** nvars * right.value
    denom = max(abs(rhs), abs(left.value), 1e-12)
    return abs(left.value - rhs) / denom
