"""Non-archimedean local data: complete sums S(gamma), counts modulo prime powers,
local densities chi_p, the truncated singular series and the Euler product.

Everything exact; budgets refuse work rather than approximate it.
"""

from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
import itertools

import numpy as np
import sympy

from . import counting, ideals, linalg
from .errors import BudgetExceeded, DimensionMismatch, IndexDivisor, UnsupportedField
from .field import AlgebraicNumber

DEFAULT_SUM_BUDGET = 2_000_000


@dataclass
class RationalPoint:
    """K-rational frequency matrix gamma in the fundamental domain, with its denominator ideal."""

    field: object
    gamma: list  # R x r of AlgebraicNumber, coordinates reduced to [0, 1)
    denom: object
    q: int

    @classmethod
    def from_matrix(cls, field, gamma):
        reduced = []
        for row in gamma:
            new_row = []
            for a in row:
                if not isinstance(a, AlgebraicNumber):
                    a = field.from_rational(a)
                coords = tuple(c - (c.numerator // c.denominator) for c in a.coords)
                new_row.append(AlgebraicNumber(field, coords))
            reduced.append(new_row)
        flat = [a for row in reduced for a in row]
        denom = field.denominator_ideal(flat)
        return cls(field=field, gamma=reduced, denom=denom, q=denom.norm)

    def coords_key(self):
        return tuple(a.coords for row in self.gamma for a in row)


@dataclass
class GaussSum:
    value: complex
    histogram: Counter
    q: int
    points: int


def gauss_sum(mls, point, budget=DEFAULT_SUM_BUDGET, transversal_shift=None):
    """S(gamma): complete sum over residues of the denominator ideal in each coordinate.

    transversal_shift optionally adds a fixed integral element to every
    representative of each of the ms coordinates; the sum is invariant.
    """
    field = mls.field
    if len(point.gamma) != mls.R or any(len(row) != mls.r for row in point.gamma):
        raise DimensionMismatch("gamma must be an R x r matrix")
    lattice = point.denom
    ms = mls.m * mls.s
    npoints = lattice.norm**ms
    if npoints > budget:
        raise BudgetExceeded(
            f"gauss_sum over {npoints} residue tuples exceeds budget {budget}",
            cost=npoints,
            budget=budget,
        )
    reps = [coords for coords in ideals.residue_coords(lattice)]
    if transversal_shift is not None:
        if len(transversal_shift) != ms:
            raise DimensionMismatch("need one shift per coordinate")
        shifted_reps = []
        for k in range(ms):
            delta = transversal_shift[k].int_coords()
            shifted_reps.append([tuple(x + y for x, y in zip(c, delta)) for c in reps])
    else:
        shifted_reps = [reps] * ms

    den, terms = counting.compile_poly(
        counting._phase_poly_exact(mls, [[a.coords for a in row] for row in point.gamma])
    )
    hist = Counter()
    for combo in itertools.product(*shifted_reps):
        pt = tuple(x for coords in combo for x in coords)
        num = counting.eval_terms(terms, pt) % den
        hist[Fraction(num, den)] += 1
    return GaussSum(
        value=counting.histogram_value(hist), histogram=hist, q=lattice.norm, points=npoints
    )


def gamma_count(mls, prime, j, budget=DEFAULT_SUM_BUDGET):
    """Gamma(p^j): solutions of all blocks lying in p^j, over residues of p^j.

    Diagonal m=1, R=1 systems with integral coefficients get a histogram
    convolution over the quotient ring; everything else enumerates.
    """
    field = mls.field
    lattice = ideals.ideal_pow(prime.lattice, j)
    ms = mls.m * mls.s
    if mls.is_diagonal_single():
        fast = _gamma_count_diagonal(mls, lattice, budget)
        if fast is not None:
            return fast
    npoints = lattice.norm**ms
    if npoints > budget:
        raise BudgetExceeded(
            f"gamma_count over {npoints} residue tuples exceeds budget {budget}",
            cost=npoints,
            budget=budget,
        )
    comps = mls.components("coordinate")
    compiled = [
        [[counting.compile_poly(comp) for comp in block] for block in row] for row in comps
    ]
    hnf = [list(r) for r in lattice.hnf]
    n = field.n
    reps = list(ideals.residue_coords(lattice))
    count = 0
    for combo in itertools.product(reps, repeat=ms):
        pt = tuple(x for coords in combo for x in coords)
        good = True
        for rho in range(mls.R):
            for jidx in range(mls.r):
                coords = [0] * n
                ok = True
                for l in range(n):
                    den, terms = compiled[rho][jidx][l]
                    v = counting.eval_terms(terms, pt)
                    if v % den:
                        ok = False
                        break
                    coords[l] = v // den
                if not ok or linalg.solve_upper_triangular_int(hnf, coords) is None:
                    good = False
                    break
            if not good:
                break
        if good:
            count += 1
    return count


def _gamma_count_diagonal(mls, lattice, budget):
    field = mls.field
    n = field.n
    block = mls.blocks[0][0]
    per_var = {}
    for exps, c in block.items():
        if not c.is_integral():
            return None
        var = next(i for i, e in enumerate(exps) if e)
        per_var[var] = c
    hnf = [list(r) for r in lattice.hnf]
    q = lattice.norm
    if q * q > budget:
        raise BudgetExceeded(
            f"diagonal gamma_count quotient size {q} exceeds budget {budget}",
            cost=q * q,
            budget=budget,
        )
    free_vars = mls.s - len(per_var)
    coeffs = [c for _, c in sorted(per_var.items())]
    if not coeffs:
        return q ** (mls.m * mls.s)
    if n == 1:
        total = _diagonal_count_rational(mls.d, [int(c.coords[0]) for c in coeffs], q)
    else:
        hists = []
        for c in coeffs:
            hist = Counter()
            for coords in ideals.residue_coords(lattice):
                x = field.element(coords)
                val = (c * x**mls.d).int_coords()
                hist[linalg.reduce_mod_lattice(hnf, val)] += 1
            hists.append(hist)
        acc = None
        for h in hists:
            if acc is None:
                acc = h
                continue
            out = Counter()
            for ka, va in acc.items():
                for kb, vb in h.items():
                    key = linalg.reduce_mod_lattice(hnf, [x + y for x, y in zip(ka, kb)])
                    out[key] += va * vb
            acc = out
        total = acc.get((0,) * n, 0) if acc is not None else 1
    return total * q**free_vars


def _diagonal_count_rational(d, coeffs, q):
    """Solutions of sum c_i x_i^d = 0 over Z/q by int64 circular convolution.

    Meet in the middle: the two halves are convolved separately and paired, so
    intermediate counts stay within int64 for every quotient the q^2 budget
    guard admits.
    """
    hists = []
    for c in coeffs:
        h = np.zeros(q, dtype=np.int64)
        for x in range(q):
            h[(c * pow(x, d, q)) % q] += 1
        hists.append(h)

    def fold(group):
        acc = group[0]
        for h in group[1:]:
            full = np.convolve(acc, h)
            out = full[:q].copy()
            out[: len(full) - q] += full[q:]
            acc = out
        return acc

    half = (len(hists) + 1) // 2
    ha = fold(hists[:half])
    if len(hists) > half:
        hb = fold(hists[half:])
        paired = int(ha[0]) * int(hb[0]) + sum(
            int(ha[v]) * int(hb[q - v]) for v in range(1, q)
        )
        return paired
    return int(ha[0])


@dataclass
class LocalDensity:
    prime: object
    a_seq: list  # exact Fractions a_j = Nm(p)^(j(Rr-ms)) Gamma(p^j)
    stabilized: Fraction | None
    diverged: bool
    budget_hit: bool

    @property
    def value(self):
        return self.stabilized


def chi_p(mls, prime, j_max=4, tolerance=Fraction(1, 10**6), budget=DEFAULT_SUM_BUDGET):
    """Local density sequence a_j with stabilization/divergence detection.

    Exact stabilization needs two consecutive equalities (a single repeat can
    be a step of an oscillating decay, e.g. three squares at p=2); the
    tolerance on one increment is the fallback for large norms, where the
    increments shrink like Nm^-3.  A budget stop before stabilization reports
    the partial sequence with stabilized=None.
    """
    nm = prime.norm
    exponent = mls.R * mls.r - mls.m * mls.s
    a_seq = []
    diverged = False
    budget_hit = False
    stabilized = None
    big_jumps = 0
    for j in range(1, j_max + 1):
        try:
            gamma = gamma_count(mls, prime, j, budget=budget)
        except BudgetExceeded:
            budget_hit = True
            break
        a_j = Fraction(gamma) * Fraction(nm) ** (j * exponent)
        a_seq.append(a_j)
        if len(a_seq) >= 3 and a_j == a_seq[-2] == a_seq[-3]:
            stabilized = a_j
            break
        if len(a_seq) >= 2:
            prev = a_seq[-2]
            # exact repeats must run to two in a row; the tolerance judges
            # only genuinely shrinking increments
            if a_j != prev and abs(a_j - prev) < tolerance:
                stabilized = a_j
                break
            # two consecutive norm-sized jumps flag divergence; a single one
            # can be a swing of an oscillating (non-convergent) sequence
            big_jumps = big_jumps + 1 if (prev > 0 and a_j >= prev * nm) else 0
            if big_jumps >= 2:
                diverged = True
                break
    return LocalDensity(
        prime=prime, a_seq=a_seq, stabilized=stabilized, diverged=diverged, budget_hit=budget_hit
    )


@dataclass
class SingularSeries:
    value: complex
    terms: list  # (q_gamma, coords_key, S-value)
    truncation: int


def singular_series_truncated(
    mls, Q, budget=DEFAULT_SUM_BUDGET, height_margin=2, max_points=200_000
):
    """Truncated series over gamma with q_gamma <= Q, via principal generators.

    Requires the class-number-one flag on the field: denominators are
    enumerated as principal ideals (g) and per-ideal residue numerators, with
    deduplication by the reduced value of gamma in the fundamental domain.
    """
    field = mls.field
    if not field.class_number_one:
        raise UnsupportedField(
            "singular series enumeration needs the class_number_one flag on the field"
        )
    n = field.n
    if n == 1:
        gen_coords = [(g,) for g in range(1, Q + 1)]
    else:
        h = int(round(Q ** (1.0 / n))) + height_margin
        gen_coords = [
            c for c in itertools.product(range(-h, h + 1), repeat=n) if any(c)
        ]
    ideals_seen = {}
    for coords in gen_coords:
        g = field.element(coords)
        nrm = abs(field.norm(g))
        if not 1 <= nrm <= Q:
            continue
        lat = ideals.ideal_from_element(field, g)
        if lat.hnf not in ideals_seen:
            ideals_seen[lat.hnf] = g
    total = 0j
    rows = []
    seen = set()
    points_used = 0
    rr = mls.R * mls.r
    ms = mls.m * mls.s
    for hnf, g in sorted(ideals_seen.items(), key=lambda kv: (_hnf_norm(kv[0]), kv[0])):
        lat = ideals.IdealLattice(field, hnf, check=False)
        g_inv_entries = list(ideals.residues(lat))
        inv_g = g.inverse()
        candidates = [h_elt * inv_g for h_elt in g_inv_entries]
        for combo in itertools.product(range(len(candidates)), repeat=rr):
            entries = [candidates[i] for i in combo]
            matrix = [entries[t * mls.r : (t + 1) * mls.r] for t in range(mls.R)]
            point = RationalPoint.from_matrix(field, matrix)
            key = point.coords_key()
            if key in seen:
                continue
            seen.add(key)
            if point.q > Q:
                continue
            points_used += point.q**ms
            if points_used > max_points:
                raise BudgetExceeded(
                    f"singular series enumeration exceeded {max_points} residue evaluations",
                    cost=points_used,
                    budget=max_points,
                )
            s_val = gauss_sum(mls, point, budget=budget)
            term = s_val.value / point.q**ms
            total += term
            rows.append((point.q, key, s_val.value))
    return SingularSeries(value=total, terms=rows, truncation=Q)


def _hnf_norm(hnf):
    norm = 1
    for i in range(len(hnf)):
        norm *= hnf[i][i]
    return norm


def gauss_decay_profile(mls, Q, budget=DEFAULT_SUM_BUDGET, height_margin=2):
    """Per-q maxima of q^(-ms) |S(gamma)|, for the decay-trend report.

    The trend (decreasing in q) reflects the complete-sum decay bound; the
    constants there are ineffective, so this is diagnostic output only and is
    never asserted.
    """
    series = singular_series_truncated(mls, Q, budget=budget, height_margin=height_margin)
    ms = mls.m * mls.s
    profile = {}
    for q, _key, s_value in series.terms:
        if q == 1:
            continue
        scaled = abs(s_value) / q**ms
        profile[q] = max(profile.get(q, 0.0), scaled)
    return sorted(profile.items())


@dataclass
class EulerProduct:
    value: float
    exact: bool
    factors: list
    skipped: list
    diverged: bool


def euler_product(mls, Q, j_max=4, tolerance=Fraction(1, 10**6), budget=DEFAULT_SUM_BUDGET):
    """Product of stabilized chi_p over primes of norm <= Q; index divisors are skipped.

    A factor that fails to stabilize within j_max contributes its last
    computed a_j (best available estimate) and clears the exact flag; a
    diverged factor poisons the whole product flag.
    """
    field = mls.field
    factors = []
    skipped = []
    diverged = False
    product = Fraction(1)
    exact = True
    for p in sympy.primerange(2, Q + 1):
        try:
            split = ideals.factor_prime(p, field)
        except IndexDivisor as exc:
            skipped.append((int(p), str(exc)))
            continue
        for prime, e in split:
            if prime.norm > Q:
                continue
            dens = chi_p(mls, prime, j_max=j_max, tolerance=tolerance, budget=budget)
            factors.append(
                {
                    "p": prime.p,
                    "f": prime.f,
                    "e": e,
                    "a_seq": dens.a_seq,
                    "stabilized": dens.stabilized,
                    "diverged": dens.diverged,
                    "budget_hit": dens.budget_hit,
                }
            )
            if dens.diverged:
                diverged = True
            elif dens.stabilized is not None:
                product *= dens.stabilized
            elif dens.a_seq:
                product *= dens.a_seq[-1]
                exact = False
            else:
                exact = False
    return EulerProduct(
        value=float(product), exact=exact, factors=factors, skipped=skipped, diverged=diverged
    )
