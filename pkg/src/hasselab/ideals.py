"""Integral ideals of O_K as Hermite-normal-form sublattices of Z^n.

The canonical form is a column HNF (upper triangular, positive diagonal,
reduced off-diagonal), so ideal equality is matrix equality.  Dedekind
splitting of rational primes is available away from index divisors.
"""

from fractions import Fraction
import itertools

import sympy

from . import linalg
from .errors import IndexDivisor, NonIntegral, RankDeficient, ValidationError


class IdealLattice:
    """Full-rank O_K-stable sublattice of Z^n in canonical column HNF."""

    __slots__ = ("field", "hnf", "norm")

    def __init__(self, field, hnf, check=True):
        self.field = field
        self.hnf = tuple(tuple(int(x) for x in row) for row in hnf)
        norm = 1
        for i in range(field.n):
            norm *= self.hnf[i][i]
        self.norm = norm
        if check:
            self._check()

    def _check(self):
        n = self.field.n
        h = self.hnf
        for i in range(n):
            if h[i][i] <= 0:
                raise ValidationError("HNF diagonal must be positive")
            for j in range(n):
                if j < i and h[i][j] != 0:
                    raise ValidationError("HNF must be upper triangular")
                if j > i and not 0 <= h[i][j] < h[i][i]:
                    raise ValidationError("HNF off-diagonal entries not reduced")
        # O_K-stability: omega_i * (each basis column) stays inside the lattice
        for j in range(n):
            col = [h[r][j] for r in range(n)]
            for i in range(n):
                unit = [Fraction(0)] * n
                unit[i] = Fraction(1)
                prod = self.field.mul_raw(tuple(unit), tuple(Fraction(c) for c in col))
                coords = [int(c) for c in prod]
                if linalg.solve_upper_triangular_int([list(r) for r in h], coords) is None:
                    raise ValidationError(
                        f"lattice not closed under multiplication by omega_{i + 1}"
                    )

    def __eq__(self, other):
        return (
            isinstance(other, IdealLattice)
            and self.field is other.field
            and self.hnf == other.hnf
        )

    def __hash__(self):
        return hash((id(self.field), self.hnf))

    def basis_columns(self):
        n = self.field.n
        return [tuple(self.hnf[r][j] for r in range(n)) for j in range(n)]

    def basis_elements(self):
        return [self.field.element(col) for col in self.basis_columns()]

    def is_unit_ideal(self):
        return self.norm == 1

    def __repr__(self):
        return f"IdealLattice(norm={self.norm}, hnf={self.hnf})"


class PrimeIdeal:
    """Prime above p from Dedekind's criterion: (p, g(theta)) with residue degree f."""

    __slots__ = ("field", "p", "f", "g", "lattice")

    def __init__(self, field, p, f, g, lattice):
        self.field = field
        self.p = int(p)
        self.f = int(f)
        self.g = [int(c) for c in g]  # ascending, monic factor of min_poly mod p
        self.lattice = lattice
        if lattice.norm != p**f:
            raise ValidationError(f"norm {lattice.norm} != {p}^{f}")

    @property
    def norm(self):
        return self.p**self.f

    def __repr__(self):
        return f"PrimeIdeal(p={self.p}, f={self.f}, g={self.g})"


def hnf_reduce(field, generators):
    """Canonical IdealLattice from integer generator columns (n x k matrix)."""
    if not generators or not generators[0]:
        raise RankDeficient("no generators")
    h = linalg.column_hnf([[int(x) for x in row] for row in generators])
    return IdealLattice(field, h)


def ideal_from_element(field, g):
    """Principal ideal (g) for integral g, as the lattice spanned by g * omega_i."""
    if not g.is_integral():
        raise NonIntegral("principal generator must be integral")
    n = field.n
    cols = []
    for i in range(n):
        unit = [0] * n
        unit[i] = 1
        cols.append((g * field.element(unit)).int_coords())
    mat = [[cols[j][i] for j in range(n)] for i in range(n)]
    return IdealLattice(field, linalg.column_hnf(mat), check=False)


def unit_ideal(field):
    return IdealLattice(field, linalg.identity(field.n), check=False)


def ideal_mul(a, b):
    """Product ideal: HNF of all pairwise products of basis elements."""
    field = a.field
    n = field.n
    gens = []
    for x in a.basis_elements():
        for y in b.basis_elements():
            gens.append((x * y).int_coords())
    mat = [[g[i] for g in gens] for i in range(n)]
    return IdealLattice(field, linalg.column_hnf(mat), check=False)


def ideal_pow(a, j):
    if j < 0:
        raise ValidationError("ideal powers need j >= 0")
    out = unit_ideal(a.field)
    for _ in range(j):
        out = ideal_mul(out, a)
    return out


def factor_prime(p, field):
    """Dedekind factorization of (p): list of (PrimeIdeal, ramification index).

    Refuses index divisors: for p | [O_K : Z[theta]] the criterion is not valid.
    """
    p = int(p)
    if not sympy.isprime(p):
        raise ValidationError(f"{p} is not prime")
    if field.index % p == 0:
        raise IndexDivisor(p, field.index)
    x = sympy.Symbol("x")
    fp = sympy.Poly(list(reversed(field.min_poly)), x, modulus=p)
    _, factors = fp.factor_list()
    out = []
    total = 0
    for gpoly, e in sorted(factors, key=lambda t: (t[0].degree(), t[0].all_coeffs())):
        coeffs_desc = [int(c) % p for c in gpoly.all_coeffs()]
        g = list(reversed(coeffs_desc))  # ascending
        f_deg = len(g) - 1
        total += e * f_deg
        g_theta = field.zero
        theta_pow = field.one
        for c in g:
            if c:
                g_theta = g_theta + c * theta_pow
            theta_pow = theta_pow * field.theta
        n = field.n
        gens = []
        for i in range(n):
            unit = [0] * n
            unit[i] = 1
            omega = field.element(unit)
            gens.append((p * omega).int_coords())
            gens.append((g_theta * omega).int_coords())
        mat = [[g_[i] for g_ in gens] for i in range(n)]
        lattice = IdealLattice(field, linalg.column_hnf(mat), check=False)
        out.append((PrimeIdeal(field, p, f_deg, g, lattice), int(e)))
    if total != field.n:
        raise ValidationError(f"sum e_i f_i = {total} != {field.n}")
    lattices = [pi.lattice.hnf for pi, _ in out]
    if len(set(lattices)) != len(lattices):
        raise ValidationError("Dedekind factors are not pairwise distinct")
    return out


def residues(lattice):
    """Coset representatives of O_K modulo the ideal, lazily, in lex coordinate order.

    The transversal is {sum c_i omega_i : 0 <= c_i < hnf[i][i]}; exactly norm(A)
    elements, pairwise incongruent.
    """
    field = lattice.field
    diag = [lattice.hnf[i][i] for i in range(field.n)]
    for coords in itertools.product(*(range(d) for d in diag)):
        yield field.element(coords)


def residue_coords(lattice):
    """Like residues() but yields plain integer coordinate tuples."""
    diag = [lattice.hnf[i][i] for i in range(lattice.field.n)]
    return itertools.product(*(range(d) for d in diag))


def contains(lattice, a):
    """Membership a in A for integral a (triangular solve over Z)."""
    coords = a.int_coords() if hasattr(a, "int_coords") else tuple(int(c) for c in a)
    h = [list(row) for row in lattice.hnf]
    return linalg.solve_upper_triangular_int(h, list(coords)) is not None


def contains_coords(lattice, coords):
    h = [list(row) for row in lattice.hnf]
    return linalg.solve_upper_triangular_int(h, list(coords)) is not None
