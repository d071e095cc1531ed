"""Degree-d forms over K and their expanded multilinear systems.

A FormSystem holds the input forms; expand_system polarizes each one into a
symmetric d-linear tensor and lays out the blocks indexed by size-d multisets
over the slot indices 1..m, so that membership of a whole linear space on the
variety becomes simultaneous vanishing of the blocks.
"""

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math
import random

from . import polys
from .errors import DimensionMismatch, ValidationError
from .field import AlgebraicNumber


class FormSystem:
    """R forms of common degree d in s variables, exact K coefficients."""

    __slots__ = ("field", "R", "d", "s", "coeffs")

    def __init__(self, field, d, s, coeffs):
        if d < 2:
            raise ValidationError("forms must have degree >= 2")
        if not coeffs:
            raise ValidationError("need at least one form")
        self.field = field
        self.d = int(d)
        self.s = int(s)
        self.R = len(coeffs)
        cleaned = []
        for form in coeffs:
            out = {}
            for exps, c in form.items():
                exps = tuple(int(e) for e in exps)
                if len(exps) != s:
                    raise ValidationError(f"exponent tuple {exps} has wrong length")
                if sum(exps) != d:
                    raise ValidationError(f"monomial {exps} does not have total degree {d}")
                if not isinstance(c, AlgebraicNumber):
                    c = field.from_rational(c)
                if c:
                    out[exps] = c
            cleaned.append(out)
        self.coeffs = cleaned

    def evaluate(self, rho, point):
        """Form rho at a length-s point of K elements (or rationals)."""
        total = self.field.zero
        for exps, c in self.coeffs[rho].items():
            term = c
            for i, e in enumerate(exps):
                for _ in range(e):
                    term = term * point[i]
            total = total + term
        return total

    def is_diagonal(self):
        return all(
            sum(1 for e in exps if e) <= 1 for form in self.coeffs for exps in form
        )


def polarize(field, form, s, d):
    """Symmetric d-linear tensor of a degree-d form, on sorted index tuples.

    Inclusion-exclusion polarization: the entry at (i_1 <= ... <= i_d) is
    (1/d!) sum over nonempty S of (-1)^(d-|S|) F(sum_{k in S} e_{i_k}).
    """
    fact = math.factorial(d)
    tensor = {}
    subsets = [s_mask for s_mask in range(1, 1 << d)]
    for idx in itertools.combinations_with_replacement(range(s), d):
        acc = field.zero
        for mask in subsets:
            vec = [0] * s
            bits = 0
            for k in range(d):
                if mask >> k & 1:
                    vec[idx[k]] += 1
                    bits += 1
            value = _eval_form_at_ints(field, form, vec)
            sign = 1 if (d - bits) % 2 == 0 else -1
            acc = acc + sign * value
        entry = acc * Fraction(1, fact)
        if entry:
            tensor[idx] = entry
    return tensor


def _eval_form_at_ints(field, form, vec):
    total = field.zero
    for exps, c in form.items():
        factor = 1
        for i, e in enumerate(exps):
            if e:
                if vec[i] == 0:
                    factor = 0
                    break
                factor *= vec[i] ** e
        if factor:
            total = total + factor * c
    return total


def tensor_eval(field, tensor, vectors):
    """Phi(y_1, ..., y_d) for concrete K vectors, via distinct permutations."""
    total = field.zero
    for idx, value in tensor.items():
        for perm in set(itertools.permutations(idx)):
            term = value
            for k, i in enumerate(perm):
                term = term * vectors[k][i]
            total = total + term
    return total


def index_set(m, d):
    """Size-d multisets over {1..m} in lex order, with multinomial constants A(j)."""
    if m < 1 or d < 2:
        raise ValidationError("need m >= 1 and d >= 2")
    J = list(itertools.combinations_with_replacement(range(1, m + 1), d))
    A = {}
    for j in J:
        mult = {}
        for v in j:
            mult[v] = mult.get(v, 0) + 1
        denom = 1
        for c in mult.values():
            denom *= math.factorial(c)
        A[j] = math.factorial(d) // denom
    return J, A


@dataclass
class MultilinearSystem:
    """Expanded system: tensors Phi^(rho) and blocks Phi_j^(rho) in the ms variables."""

    field: object
    R: int
    d: int
    s: int
    m: int
    J: list
    A: dict
    r: int
    tensors: list
    blocks: list  # blocks[rho][jidx]: dict over m*s K-variables

    def __post_init__(self):
        self._comp_cache = {}

    def block(self, rho, jidx):
        return self.blocks[rho][jidx]

    def components(self, pairing):
        """Real-coordinate components of every block, cached.

        pairing='coordinate': omega-coordinate extraction (vanishing tests);
        pairing='trace': Tr(omega_l * block) (exponential-sum phases).
        """
        if pairing not in self._comp_cache:
            fn = (
                self.field.real_components
                if pairing == "coordinate"
                else self.field.trace_components
            )
            self._comp_cache[pairing] = [
                [fn(block, self.m * self.s) for block in row] for row in self.blocks
            ]
        return self._comp_cache[pairing]

    def is_diagonal_single(self):
        """True for the histogram fast path: m=1, R=1, single one-variable-per-monomial block."""
        if self.m != 1 or self.R != 1 or self.r != 1:
            return False
        return all(sum(1 for e in exps if e) <= 1 for exps in self.blocks[0][0])


def expand_system(fs, m):
    """Expanded multilinear system of a FormSystem over m slots."""
    field = fs.field
    J, A = index_set(m, fs.d)
    r = len(J)
    tensors = [polarize(field, form, fs.s, fs.d) for form in fs.coeffs]
    blocks = []
    nvars = m * fs.s
    for rho in range(fs.R):
        row = []
        for j in J:
            block = {}
            for idx, value in tensors[rho].items():
                scaled = A[j] * value
                for perm in set(itertools.permutations(idx)):
                    exps = [0] * nvars
                    for k in range(fs.d):
                        exps[(j[k] - 1) * fs.s + perm[k]] += 1
                    key = tuple(exps)
                    acc = block.get(key)
                    acc = scaled if acc is None else acc + scaled
                    if acc:
                        block[key] = acc
                    elif key in block:
                        del block[key]
            row.append(block)
        blocks.append(row)
    if r != math.comb(fs.d - 1 + m, fs.d):
        raise ValidationError("index set size disagrees with binomial(d-1+m, d)")
    if sum(A.values()) != m**fs.d:
        raise ValidationError("sum of A(j) disagrees with m^d")
    return MultilinearSystem(
        field=field, R=fs.R, d=fs.d, s=fs.s, m=m, J=J, A=A, r=r, tensors=tensors, blocks=blocks
    )


def _flatten_xbar(mls, xbar):
    if len(xbar) == mls.m and not isinstance(xbar[0], AlgebraicNumber):
        flat = [x for vec in xbar for x in vec]
    else:
        flat = list(xbar)
    if len(flat) != mls.m * mls.s:
        raise DimensionMismatch(f"expected {mls.m * mls.s} coordinates, got {len(flat)}")
    return flat


def eval_FF(mls, xbar, alpha):
    """F(xbar; alpha) = sum over rho, j of alpha_j^(rho) * Phi_j^(rho)(xbar).

    alpha entries may be AlgebraicNumbers (exact result) or length-n float
    coordinate vectors over the basis (V-element result as a float tuple).
    """
    if len(alpha) != mls.R or any(len(row) != mls.r for row in alpha):
        raise DimensionMismatch("alpha must be an R x r matrix")
    flat = _flatten_xbar(mls, xbar)
    exact = all(isinstance(a, AlgebraicNumber) for row in alpha for a in row)
    if exact:
        total = mls.field.zero
        for rho in range(mls.R):
            for jidx in range(mls.r):
                val = polys.p_eval(mls.blocks[rho][jidx], flat)
                if val is not None and val:
                    total = total + alpha[rho][jidx] * val
        return total
    field = mls.field
    n = field.n
    out = [0.0] * n
    for rho in range(mls.R):
        for jidx in range(mls.r):
            val = polys.p_eval(mls.blocks[rho][jidx], flat)
            if val is None or not val:
                continue
            a = alpha[rho][jidx]
            acoords = a.coords if isinstance(a, AlgebraicNumber) else a
            prod = _v_mul(field, [float(c) for c in acoords], [float(c) for c in val.coords])
            for k in range(n):
                out[k] += prod[k]
    return tuple(out)


def _v_mul(field, a, b):
    n = field.n
    out = [0.0] * n
    for i in range(n):
        if a[i]:
            for j in range(n):
                if b[j]:
                    prod = a[i] * b[j]
                    row = field.mult_table[i][j]
                    for k in range(n):
                        if row[k]:
                            out[k] += prod * row[k]
    return out


def difference(field, poly, m, s, slot, h):
    """Forward difference in slot i with shift h in K^s: F(.., x_i + h, ..) - F(..).

    Drops the total degree in the slot variables by one for every block of
    positive degree there.
    """
    if not 1 <= slot <= m:
        raise DimensionMismatch(f"slot {slot} out of range 1..{m}")
    nvars = m * s
    base = (slot - 1) * s
    one = field.one
    shifted = {}
    for exps, c in poly.items():
        term_exps = list(exps)
        factor = None
        for i in range(s):
            e = exps[base + i]
            if not e:
                continue
            term_exps[base + i] = 0
            unit = [0] * nvars
            unit[base + i] = 1
            lin = {tuple(unit): one}
            hv = h[i]
            if hv:
                lin[(0,) * nvars] = hv
            piece = polys.p_pow(lin, e)
            factor = piece if factor is None else polys.p_mul(factor, piece)
        term = {tuple(term_exps): c}
        if factor is not None:
            term = polys.p_mul(term, factor)
        shifted = polys.p_add(shifted, term)
    return polys.p_sub(shifted, poly)


def multilinear_coeffs(mls, H):
    """Linear coefficients B[i][l][rho] of the (d-1)-fold differenced system.

    For shifts H = (h_1, ..., h_{d-1}) in (K^s)^{d-1} this returns
    d! * Tr(omega_l * Phi^(rho)(e_i, h_1, ..., h_{d-1})) as exact rationals, the
    gradient of the real form of the fully differenced F with respect to the
    coordinates x-hat_{i,l}.
    """
    field = mls.field
    if len(H) != mls.d - 1 or any(len(hv) != mls.s for hv in H):
        raise DimensionMismatch("H must hold d-1 shift vectors in K^s")
    fact = math.factorial(mls.d)
    out = []
    omegas = []
    for l in range(field.n):
        unit = [0] * field.n
        unit[l] = 1
        omegas.append(field.element(unit))
    for i in range(mls.s):
        e_i = [field.zero] * mls.s
        e_i[i] = field.one
        rows = []
        vals = [tensor_eval(field, mls.tensors[rho], [e_i] + list(H)) for rho in range(mls.R)]
        for l in range(field.n):
            rows.append([fact * field.trace(omegas[l] * vals[rho]) for rho in range(mls.R)])
        out.append(rows)
    return out


@dataclass
class SmoothnessReport:
    random_samples: int
    random_min_corank: int
    variety_points: int
    variety_min_corank: int | None
    ranks_seen: dict


def jacobian_probe(fs, samples=200, seed=0, search_bound=1, search_budget=20000):
    """Sample the R x s Jacobian at random rational points and small variety points.

    Reports the minimal observed corank in each regime; only evidence, never an
    exact dimension claim for the singular locus.
    """
    field = fs.field
    rng = random.Random(seed)
    derivs = [
        [_poly_derivative(fs.coeffs[rho], i) for i in range(fs.s)] for rho in range(fs.R)
    ]

    def jacobian_at(point):
        return [
            [_eval_kpoly(field, derivs[rho][i], point) for i in range(fs.s)]
            for rho in range(fs.R)
        ]

    ranks_seen = {}
    random_min_corank = fs.R
    for _ in range(samples):
        point = [
            field.element(
                [Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(field.n)]
            )
            for _ in range(fs.s)
        ]
        rank = _k_rank(field, jacobian_at(point))
        corank = fs.R - rank
        ranks_seen[("random", corank)] = ranks_seen.get(("random", corank), 0) + 1
        random_min_corank = min(random_min_corank, corank)

    variety_points = 0
    variety_min_corank = None
    total = (2 * search_bound + 1) ** (field.n * fs.s)
    if total <= search_budget:
        coords_range = range(-search_bound, search_bound + 1)
        for flat in itertools.product(coords_range, repeat=field.n * fs.s):
            if not any(flat):
                continue
            point = [
                field.element(flat[i * field.n : (i + 1) * field.n]) for i in range(fs.s)
            ]
            if all(not fs.evaluate(rho, point) for rho in range(fs.R)):
                variety_points += 1
                corank = fs.R - _k_rank(field, jacobian_at(point))
                ranks_seen[("variety", corank)] = ranks_seen.get(("variety", corank), 0) + 1
                if variety_min_corank is None or corank < variety_min_corank:
                    variety_min_corank = corank
    return SmoothnessReport(
        random_samples=samples,
        random_min_corank=random_min_corank,
        variety_points=variety_points,
        variety_min_corank=variety_min_corank,
        ranks_seen=ranks_seen,
    )


def _poly_derivative(form, i):
    out = {}
    for exps, c in form.items():
        e = exps[i]
        if e:
            new = list(exps)
            new[i] = e - 1
            out[tuple(new)] = e * c
    return out


def _eval_kpoly(field, poly, point):
    total = field.zero
    for exps, c in poly.items():
        term = c
        for i, e in enumerate(exps):
            for _ in range(e):
                term = term * point[i]
        total = total + term
    return total


def _k_rank(field, matrix):
    if not matrix:
        return 0
    rows = [list(row) for row in matrix]
    nrows, ncols = len(rows), len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(nrows):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank
