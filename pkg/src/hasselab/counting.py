"""Brute-force counting N_m(P), exponential sums T_P, and arc classification.

Counting runs in exact integer/rational arithmetic along two independent
routes (parametric t-identity vs expanded blocks).  Exponential sums with
K-rational frequencies accumulate exact rational phases into a histogram and
evaluate each distinct phase once; floating frequencies get two independent
float paths (per-place embedding arithmetic vs the real-form polynomial).
"""

from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
import cmath
import itertools
import math

from . import linalg, polys
from .errors import BudgetExceeded, DimensionMismatch, SearchBudgetExceeded
from .field import AlgebraicNumber

DEFAULT_POINT_BUDGET = 4_000_000


@dataclass(frozen=True)
class BoxSpec:
    """Symmetric box [-P, P] on each of the integer coordinates."""

    P: int
    coords: int

    @property
    def point_count(self):
        return (2 * self.P + 1) ** self.coords


@dataclass(frozen=True)
class ArcParameters:
    """Arc dissection parameters; bounds are functions of P with exponents fixed."""

    theta: Fraction
    R: int
    d: int
    r: int
    n: int
    c1: float = 1.0
    c2: float = 1.0

    def q_max(self, P):
        return self.c1 * P ** (self.R * (self.d - 1) * float(self.theta))

    def radius(self, P):
        return self.c1 * P ** (-self.d + self.R * (self.d - 1) * float(self.theta))

    def homogeneous_bound(self, P):
        return self.c2 * P ** (self.r * self.R * (self.d - 1) * self.n * float(self.theta))

    @property
    def disjoint(self):
        return 2 * self.R * (self.d - 1) * self.theta < self.d


# -- compiled integer evaluation ------------------------------------------------


def compile_poly(poly):
    """(denominator, terms) with integer coefficients for fast point evaluation."""
    if not poly:
        return 1, ()
    den = linalg.lcm_list([c.denominator for c in poly.values()])
    terms = []
    for exps, c in poly.items():
        vars_ = tuple((i, e) for i, e in enumerate(exps) if e)
        terms.append((int(c * den), vars_))
    return den, tuple(terms)


def eval_terms(terms, pt):
    total = 0
    for coef, vars_ in terms:
        prod = coef
        for i, e in vars_:
            x = pt[i]
            if e == 1:
                prod *= x
            else:
                prod *= x**e
        total += prod
    return total


def _box_points(P, nvars, first_values=None):
    rng = range(-P, P + 1)
    if first_values is None:
        return itertools.product(rng, repeat=nvars)
    return (
        (first,) + rest
        for first in first_values
        for rest in itertools.product(rng, repeat=nvars - 1)
    )


def _check_budget(points, budget, what):
    if budget is not None and points > budget:
        raise BudgetExceeded(
            f"{what}: {points} points exceed budget {budget}", cost=points, budget=budget
        )


# -- N_m(P), parametric route ---------------------------------------------------


def _tp_mul(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(sorted(ka + kb))
            v = ca * cb
            if not v:
                continue
            acc = out.get(key)
            acc = v if acc is None else acc + v
            if acc:
                out[key] = acc
            elif key in out:
                del out[key]
    return out


def _tp_pow(a, e):
    out = None
    base = a
    while e:
        if e & 1:
            out = base if out is None else _tp_mul(out, base)
        e >>= 1
        if e:
            base = _tp_mul(base, base)
    return out


def count_parametric(fs, m, P, budget=DEFAULT_POINT_BUDGET):
    """N_m(P) from the defining identity: every t-coefficient of F(sum t_k x_k) vanishes.

    Expands the t-polynomial per lattice point in exact K arithmetic; this is
    the oracle route, independent of polarization and the index set.
    """
    field = fs.field
    n, s = field.n, fs.s
    nvars = n * m * s
    _check_budget((2 * P + 1) ** nvars, budget, "count_parametric")
    count = 0
    for pt in _box_points(P, nvars):
        xs = [
            [field.element(pt[(k * s + i) * n : (k * s + i) * n + n]) for i in range(s)]
            for k in range(m)
        ]
        # y_i as a linear polynomial in t_1..t_m with K coefficients
        ys = [{(k + 1,): xs[k][i] for k in range(m)} for i in range(s)]
        good = True
        for rho in range(fs.R):
            acc = {}
            for exps, c in fs.coeffs[rho].items():
                term = {(): c}
                for i, e in enumerate(exps):
                    if e:
                        piece = _tp_pow(ys[i], e)
                        term = _tp_mul(term, piece) if piece else {}
                for key, v in term.items():
                    cur = acc.get(key)
                    cur = v if cur is None else cur + v
                    if cur:
                        acc[key] = cur
                    elif key in acc:
                        del acc[key]
            if acc:
                good = False
                break
        if good:
            count += 1
    return count


# -- N_m(P), expanded route -------------------------------------------------------


def count_expanded(mls, P, budget=DEFAULT_POINT_BUDGET, first_values=None):
    """N_m(P) by vanishing of all blocks Phi_j^(rho), over integer coordinates."""
    field = mls.field
    nvars = field.n * mls.m * mls.s
    if first_values is None:
        _check_budget((2 * P + 1) ** nvars, budget, "count_expanded")
    comps = mls.components("coordinate")
    compiled = [
        compile_poly(comp)[1]
        for row in comps
        for block_comps in row
        for comp in block_comps
        if comp
    ]
    count = 0
    for pt in _box_points(P, nvars, first_values):
        for terms in compiled:
            if eval_terms(terms, pt):
                break
        else:
            count += 1
    return count


def _count_partition(args):
    mls, P, chunk = args
    return count_expanded(mls, P, budget=None, first_values=chunk)


def partition_first_coordinate(P, parts):
    """Contiguous chunks of the leading-coordinate range, in fixed order."""
    values = list(range(-P, P + 1))
    size = max(1, (len(values) + parts - 1) // parts)
    return [values[i : i + size] for i in range(0, len(values), size)]


def count_expanded_threaded(mls, P, threads, budget=DEFAULT_POINT_BUDGET):
    """count_expanded over leading-coordinate partitions with an ordered reduction."""
    nvars = mls.field.n * mls.m * mls.s
    _check_budget((2 * P + 1) ** nvars, budget, "count_expanded")
    chunks = partition_first_coordinate(P, max(1, threads))
    if threads <= 1:
        return sum(count_expanded(mls, P, budget=None, first_values=c) for c in chunks)
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(_count_partition, [(mls, P, c) for c in chunks]))
    return sum(partials)


def count_diagonal(mls, P, budget=None):
    """Meet-in-the-middle histogram count for diagonal forms with m=1, R=1.

    Splits the variables in two halves, convolves per-variable value
    histograms (values are coordinate tuples of c_i * x_i^d), and pairs the
    halves so that only O((2P+1)^(n*ceil(s/2))) work is done.
    """
    if not mls.is_diagonal_single():
        raise DimensionMismatch("histogram fast path needs a diagonal m=1, R=1 system")
    field = mls.field
    n = field.n
    block = mls.blocks[0][0]
    per_var = {}
    for exps, c in block.items():
        var = next(i for i, e in enumerate(exps) if e)
        per_var[var] = c
    free_vars = mls.s - len(per_var)
    width = 2 * P + 1

    def var_histogram(coeff):
        hist = Counter()
        for coords in itertools.product(range(-P, P + 1), repeat=n):
            x = field.element(coords)
            hist[(coeff * x**mls.d).coords] += 1
        return hist

    def convolve(a, b):
        if budget is not None and len(a) * len(b) > budget:
            raise BudgetExceeded(
                f"histogram convolution {len(a)}x{len(b)} exceeds budget {budget}",
                cost=len(a) * len(b),
                budget=budget,
            )
        out = Counter()
        for ka, va in a.items():
            for kb, vb in b.items():
                out[tuple(x + y for x, y in zip(ka, kb))] += va * vb
        return out

    hists = [var_histogram(c) for _, c in sorted(per_var.items())]
    if not hists:
        return width ** (n * mls.s)
    half = (len(hists) + 1) // 2
    left, right = hists[:half], hists[half:]

    def fold(group):
        acc = group[0]
        for h in group[1:]:
            acc = convolve(acc, h)
        return acc

    hl = fold(left)
    if right:
        hr = fold(right)
        total = 0
        for key, va in hl.items():
            neg = tuple(-x for x in key)
            vb = hr.get(neg)
            if vb:
                total += va * vb
    else:
        total = hl.get((Fraction(0),) * n, 0)
    return total * width ** (n * free_vars)


# -- exponential sums ---------------------------------------------------------------


@dataclass
class ExpSumResult:
    value: complex
    points: int
    path: str
    histogram: Counter | None = None
    meta: dict = dc_field(default_factory=dict)


def _normalize_alpha(mls, alpha, want="float"):
    if len(alpha) != mls.R or any(len(row) != mls.r for row in alpha):
        raise DimensionMismatch("alpha must be an R x r matrix")
    n = mls.field.n
    out = []
    for row in alpha:
        new = []
        for a in row:
            if isinstance(a, AlgebraicNumber):
                coords = a.coords
            elif isinstance(a, (int, Fraction, float)):
                one = mls.field._one_coords
                coords = tuple(a * c for c in one) if n > 1 or want == "exact" else (a,)
            else:
                coords = tuple(a)
                if len(coords) != n:
                    raise DimensionMismatch("alpha coordinate vectors must have length n")
            if want == "float":
                new.append(tuple(float(c) for c in coords))
            else:
                new.append(tuple(Fraction(c) for c in coords))
        out.append(new)
    return out


def _phase_poly_exact(mls, alpha_coords):
    """Single rational-coefficient polynomial with Tr(F(x; alpha)) = poly(x-hat)."""
    gram = mls.field.gram
    n = mls.field.n
    comps = mls.components("coordinate")
    total = {}
    for rho in range(mls.R):
        for jidx in range(mls.r):
            ah = alpha_coords[rho][jidx]
            w = [sum(gram[l][k] * ah[k] for k in range(n)) for l in range(n)]
            for l in range(n):
                if w[l]:
                    total = polys.p_add(total, polys.p_scale(comps[rho][jidx][l], w[l]))
    return total


def exp_sum_histogram(mls, alpha, P, budget=DEFAULT_POINT_BUDGET, first_values=None):
    """Exact phase histogram of T_P(alpha) for K-rational alpha."""
    alpha_coords = _normalize_alpha(mls, alpha, want="exact")
    nvars = mls.field.n * mls.m * mls.s
    if first_values is None:
        _check_budget((2 * P + 1) ** nvars, budget, "exp_sum")
    den, terms = compile_poly(_phase_poly_exact(mls, alpha_coords))
    hist = Counter()
    for pt in _box_points(P, nvars, first_values):
        num = eval_terms(terms, pt) % den
        hist[Fraction(num, den)] += 1
    return hist


def histogram_value(hist):
    total = 0j
    for phase in sorted(hist):
        total += hist[phase] * cmath.exp(2j * cmath.pi * float(phase))
    return total


def exp_sum(mls, alpha, P, path="exact", budget=DEFAULT_POINT_BUDGET):
    """T_P(alpha) over the box; path selects the evaluation route.

    'exact' needs K-rational alpha and returns the histogram as well;
    'embedding' works per infinite place in complex arithmetic;
    'real' evaluates the real-form polynomial against the coordinate vector
    of alpha.  The two float routes agree to ~1e-9 relative.
    """
    field = mls.field
    n = field.n
    nvars = n * mls.m * mls.s
    points = (2 * P + 1) ** nvars
    _check_budget(points, budget, "exp_sum")

    if path == "exact":
        hist = exp_sum_histogram(mls, alpha, P, budget=budget)
        return ExpSumResult(value=histogram_value(hist), points=points, path=path, histogram=hist)

    alpha_f = _normalize_alpha(mls, alpha, want="float")
    if path == "real":
        comps = mls.components("trace")
        compiled = [
            [[compile_poly(comp) for comp in block_comps] for block_comps in row]
            for row in comps
        ]
        total = 0j
        for pt in _box_points(P, nvars):
            phase = 0.0
            for rho in range(mls.R):
                for jidx in range(mls.r):
                    ah = alpha_f[rho][jidx]
                    comp_row = compiled[rho][jidx]
                    for l in range(n):
                        if ah[l]:
                            den, terms = comp_row[l]
                            if terms:
                                phase += ah[l] * (eval_terms(terms, pt) / den)
            total += cmath.exp(2j * cmath.pi * phase)
        return ExpSumResult(value=total, points=points, path=path)

    if path == "embedding":
        comps = mls.components("coordinate")
        compiled = [
            [[compile_poly(comp) for comp in block_comps] for block_comps in row]
            for row in comps
        ]
        W = field.embed_matrix  # (n1+n2) x n complex
        places = field.n1 + field.n2
        alpha_place = [
            [
                [sum(W[l][k] * alpha_f[rho][jidx][k] for k in range(n)) for l in range(places)]
                for jidx in range(mls.r)
            ]
            for rho in range(mls.R)
        ]
        total = 0j
        for pt in _box_points(P, nvars):
            fvals = [0j] * places
            for rho in range(mls.R):
                for jidx in range(mls.r):
                    crow = compiled[rho][jidx]
                    coords = [0.0] * n
                    nonzero = False
                    for k in range(n):
                        den, terms = crow[k]
                        if terms:
                            v = eval_terms(terms, pt)
                            if v:
                                coords[k] = v / den
                                nonzero = True
                    if not nonzero:
                        continue
                    ap = alpha_place[rho][jidx]
                    for l in range(places):
                        cval = 0j
                        for k in range(n):
                            if coords[k]:
                                cval += W[l][k] * coords[k]
                        fvals[l] += ap[l] * cval
            phase = field.trace_float(fvals)
            total += cmath.exp(2j * cmath.pi * phase)
        return ExpSumResult(value=total, points=points, path=path)

    raise ValueError(f"unknown path {path!r}")


# -- arc classification ----------------------------------------------------------------


@dataclass
class ArcWitness:
    q_coords: tuple
    a_coords: list  # per rho, integer coordinate tuples
    distance: float


@dataclass
class ArcLabel:
    kind: str  # "major" | "minor"
    witnesses: list  # per j in J: ArcWitness or None
    q_max: float
    radius: float


def classify_arc(mls, alpha, P, params, budget=100_000):
    """Exhaustive major-arc test: search q in O_K^+ of height <= q_max per index j.

    Candidates are scanned in (height, lex) order, so under the disjointness
    condition the returned witness is the unique minimal one.
    """
    field = mls.field
    n = field.n
    alpha_f = _normalize_alpha(mls, alpha, want="float")
    q_ceiling = int(math.floor(params.q_max(P) + 1e-9))
    radius = params.radius(P)
    if q_ceiling < 0:
        q_ceiling = 0
    n_candidates = (q_ceiling + 1) ** n
    if n_candidates > budget:
        raise SearchBudgetExceeded(
            f"{n_candidates} denominator candidates exceed budget {budget}",
            cost=n_candidates,
            budget=budget,
        )
    candidates = [
        c for c in itertools.product(range(q_ceiling + 1), repeat=n) if any(c)
    ]
    candidates.sort(key=lambda c: (max(c), c))
    structure = field.mult_table

    def v_mul_int(alpha_coords, q_coords):
        out = [0.0] * n
        for i in range(n):
            ai = alpha_coords[i]
            if ai:
                for j in range(n):
                    qj = q_coords[j]
                    if qj:
                        prod = ai * qj
                        row = structure[i][j]
                        for k in range(n):
                            if row[k]:
                                out[k] += prod * row[k]
        return out

    witnesses = []
    for jidx in range(mls.r):
        found = None
        for q in candidates:
            hq = max(q)
            ok = True
            dist = 0.0
            a_list = []
            for rho in range(mls.R):
                prod = v_mul_int(alpha_f[rho][jidx], q)
                a = tuple(int(math.floor(x + 0.5)) for x in prod)
                if any(c < 0 for c in a) or (a and max(a, default=0) > hq):
                    ok = False
                    break
                d = max(abs(x - c) for x, c in zip(prod, a))
                dist = max(dist, d)
                a_list.append(a)
            if ok and dist <= radius + 1e-12:
                found = ArcWitness(q_coords=q, a_coords=a_list, distance=dist)
                break
        witnesses.append(found)
    kind = "major" if all(w is not None for w in witnesses) else "minor"
    return ArcLabel(kind=kind, witnesses=witnesses, q_max=params.q_max(P), radius=radius)
