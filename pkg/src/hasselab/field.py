"""Exact arithmetic in a number field K given by a minimal polynomial and a ring basis.

Elements are coordinate vectors over the integral basis omega_1..omega_n; all
ring operations go through the integer multiplication table, so results stay
exact rationals.  Floating point only enters through the stored complex
embeddings, whose precision is a construction parameter.
"""

from fractions import Fraction
import cmath

import mpmath
import sympy

from . import linalg, polys
from .errors import (
    DimensionMismatch,
    DivisionByZero,
    NonMonic,
    NonRingBasis,
    NotIrreducible,
    PrecisionFailure,
)

DEFAULT_PRECISION = 64  # decimal digits for embeddings


class AlgebraicNumber:
    """Element of K as exact rational coordinates over the integral basis."""

    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = tuple(c if type(c) is Fraction else Fraction(c) for c in coords)

    def __bool__(self):
        return any(self.coords)

    def __eq__(self, other):
        if isinstance(other, AlgebraicNumber):
            return self.field is other.field and self.coords == other.coords
        if isinstance(other, (int, Fraction)):
            return self == self.field.from_rational(other)
        return NotImplemented

    def __hash__(self):
        return hash((id(self.field), self.coords))

    def _coerce(self, other):
        if isinstance(other, AlgebraicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNumber(self.field, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNumber(self.field, tuple(a - b for a, b in zip(self.coords, o.coords)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.field, tuple(a * other for a in self.coords))
        if isinstance(other, AlgebraicNumber):
            return AlgebraicNumber(self.field, self.field.mul_raw(self.coords, other.coords))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def inverse(self):
        return AlgebraicNumber(self.field, self.field.inv_raw(self.coords))

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coords)

    def int_coords(self):
        if not self.is_integral():
            from .errors import NonIntegral

            raise NonIntegral(f"{self!r} is not integral")
        return tuple(int(c) for c in self.coords)

    def __repr__(self):
        return f"K({', '.join(str(c) for c in self.coords)})"


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _poly_mod(a, f):
    """Reduce modulo the monic polynomial f (ascending coefficients)."""
    a = list(a)
    n = len(f) - 1
    for i in range(len(a) - 1, n - 1, -1):
        c = a[i]
        if c:
            a[i] = Fraction(0)
            for j in range(n):
                a[i - n + j] -= c * f[j]
    out = a[:n]
    out += [Fraction(0)] * (n - len(out))
    return out


class FieldDescriptor:
    """Immutable bundle of everything needed to compute in K and in K (x) R.

    Construct through :func:`build_field`, which verifies the ring-basis
    invariants before handing the descriptor out.
    """

    def __init__(self, min_poly, basis_matrix, precision, class_number_one=False):
        self.min_poly = [int(c) for c in min_poly]
        self.n = len(self.min_poly) - 1
        self.basis_matrix = [[Fraction(x) for x in row] for row in basis_matrix]
        self.precision = int(precision)
        self.class_number_one = bool(class_number_one)
        self._build()

    # -- construction ------------------------------------------------------

    def _build(self):
        n = self.n
        f = self.min_poly
        if n < 1:
            raise NonMonic("minimal polynomial must have positive degree")
        if f[-1] != 1:
            raise NonMonic("minimal polynomial must be monic")
        x = sympy.Symbol("x")
        fpoly = sympy.Poly(list(reversed(f)), x)
        if n > 1 and not fpoly.is_irreducible:
            raise NotIrreducible("minimal polynomial is reducible over Q")

        if len(self.basis_matrix) != n or any(len(r) != n for r in self.basis_matrix):
            raise NonRingBasis("basis matrix must be n x n")
        det_b = linalg.frac_det(self.basis_matrix)
        if det_b == 0:
            raise NonRingBasis("basis matrix is singular")
        # omega coords from power-basis coords: power = B^T . omega
        self._power_to_omega = linalg.frac_inverse(linalg.transpose(self.basis_matrix))

        fq = [Fraction(c) for c in f]
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                red = _poly_mod(_poly_mul(self.basis_matrix[i], self.basis_matrix[j]), fq)
                coords = linalg.mat_vec(self._power_to_omega, red)
                if any(c.denominator != 1 for c in coords):
                    raise NonRingBasis(
                        f"omega_{i + 1} * omega_{j + 1} leaves the Z-span of the basis"
                    )
                row.append(tuple(int(c) for c in coords))
            table.append(tuple(row))
        self.mult_table = tuple(table)

        one_coords = linalg.mat_vec(
            self._power_to_omega, [Fraction(1)] + [Fraction(0)] * (n - 1)
        )
        if any(c.denominator != 1 for c in one_coords):
            raise NonRingBasis("1 is not in the Z-span of the basis")
        self._one_coords = tuple(one_coords)
        if n >= 2:
            theta_power = [Fraction(0), Fraction(1)] + [Fraction(0)] * (n - 2)
        else:
            theta_power = [Fraction(-f[0])]
        self._theta_coords = tuple(linalg.mat_vec(self._power_to_omega, theta_power))

        inv_det = 1 / abs(det_b)
        if inv_det.denominator != 1:
            raise NonRingBasis("basis does not contain Z[theta]: index is not an integer")
        self.index = int(inv_det)
        self.disc_poly = int(fpoly.discriminant()) if n > 1 else 1

        # trace form Tr(omega_i omega_j), straight off the multiplication table
        self.trace_vec = tuple(
            Fraction(sum(self.mult_table[i][j][j] for j in range(n))) for i in range(n)
        )
        self.gram = [
            [
                sum(Fraction(self.mult_table[i][j][k]) * self.trace_vec[k] for k in range(n))
                for j in range(n)
            ]
            for i in range(n)
        ]
        disc_field = linalg.frac_det(self.gram)
        if disc_field.denominator != 1:
            raise NonRingBasis("trace form of the basis is not integral")
        self.disc_field = int(disc_field)
        if n > 1 and self.disc_poly != self.index**2 * self.disc_field:
            raise NonRingBasis(
                f"disc(min_poly)={self.disc_poly} != index^2 * disc_field = "
                f"{self.index**2 * self.disc_field}"
            )
        self.dual_gram = linalg.frac_inverse(self.gram)

        self._compute_embeddings(fpoly)

        # explicit constant with height(x*y) <= C * height(x) * height(y)
        self.height_mul_constant = max(
            sum(abs(self.mult_table[i][j][k]) for i in range(n) for j in range(n))
            for k in range(n)
        )

        self.zero = AlgebraicNumber(self, (Fraction(0),) * n)
        self.one = AlgebraicNumber(self, self._one_coords)
        self.theta = AlgebraicNumber(self, self._theta_coords)

    def _compute_embeddings(self, fpoly):
        n = self.n
        n1 = int(fpoly.count_roots()) if n > 1 else 1  # exact real-root count (Sturm)
        if (n - n1) % 2:
            raise PrecisionFailure("real-root count inconsistent with degree")
        self.n1 = n1
        self.n2 = (n - n1) // 2

        with mpmath.workdps(self.precision + 10):
            coeffs_desc = [mpmath.mpf(c) for c in reversed(self.min_poly)]
            try:
                roots = mpmath.polyroots(coeffs_desc, maxsteps=200, extraprec=120)
            except mpmath.libmp.NoConvergence as exc:  # pragma: no cover
                raise PrecisionFailure(f"root finding failed: {exc}") from exc
            tol = mpmath.mpf(10) ** (-self.precision // 2)
            for i, r in enumerate(roots):
                for r2 in roots[i + 1 :]:
                    if abs(r - r2) < tol:
                        raise PrecisionFailure("roots not separable at this precision")
                residual = mpmath.polyval(coeffs_desc, r)
                scale = max(abs(c) for c in coeffs_desc) * max(mpmath.mpf(1), abs(r)) ** n
                if abs(residual) > tol * scale:
                    raise PrecisionFailure("root residual too large")
            by_imag = sorted(roots, key=lambda r: abs(mpmath.im(r)))
            real_roots = sorted(mpmath.re(r) for r in by_imag[:n1])
            nonreal = sorted(
                (mpmath.mpc(mpmath.re(r), abs(mpmath.im(r))) for r in by_imag[n1:]),
                key=lambda r: (mpmath.re(r), mpmath.im(r)),
            )
            # conjugate pairs collapse to doubled upper-half points
            upper = []
            for k in range(0, len(nonreal), 2):
                a, b = nonreal[k], nonreal[k + 1]
                if abs(a - b) > tol:
                    raise PrecisionFailure("conjugate pairing failed")
                upper.append((a + b) / 2)
            ordered = [mpmath.mpc(r, 0) for r in real_roots]
            ordered += upper
            ordered += [mpmath.conj(r) for r in upper]
            self.embeddings_mp = ordered
            self.embeddings = [complex(r) for r in ordered]
            w_full = []
            for root in ordered:
                powers = [mpmath.mpc(1)]
                for _ in range(n - 1):
                    powers.append(powers[-1] * root)
                w_full.append(
                    [
                        complex(
                            sum(
                                mpmath.mpf(self.basis_matrix[i][j].numerator)
                                / self.basis_matrix[i][j].denominator
                                * powers[j]
                                for j in range(n)
                            )
                        )
                        for i in range(n)
                    ]
                )
        self.embed_matrix_full = w_full  # rows: all n embeddings, conjugates last
        self.embed_matrix = w_full[: self.n1 + self.n2]  # one row per infinite place
        self.place_degrees = [1] * self.n1 + [2] * self.n2

    # -- element constructors ----------------------------------------------

    def element(self, coords):
        if len(coords) != self.n:
            raise DimensionMismatch(f"expected {self.n} coordinates, got {len(coords)}")
        return AlgebraicNumber(self, coords)

    def from_rational(self, q):
        q = Fraction(q)
        return AlgebraicNumber(self, tuple(q * c for c in self._one_coords))

    # -- raw coordinate kernels ----------------------------------------------

    def mul_raw(self, a, b):
        n = self.n
        out = [Fraction(0)] * n
        table = self.mult_table
        for i in range(n):
            ai = a[i]
            if not ai:
                continue
            for j in range(n):
                bj = b[j]
                if not bj:
                    continue
                prod = ai * bj
                row = table[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += prod * row[k]
        return tuple(out)

    def mul_matrix(self, a):
        """Matrix of multiplication by a over the omega basis (column j: a * omega_j)."""
        n = self.n
        cols = []
        unit = [Fraction(0)] * n
        for j in range(n):
            unit[j] = Fraction(1)
            cols.append(self.mul_raw(a, tuple(unit)))
            unit[j] = Fraction(0)
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def inv_raw(self, a):
        if not any(a):
            raise DivisionByZero("inverse of zero")
        m = self.mul_matrix(a)
        return tuple(linalg.frac_solve(m, list(self._one_coords)))

    # -- module operations -----------------------------------------------------

    def trace(self, a):
        return sum(c * t for c, t in zip(a.coords, self.trace_vec))

    def norm(self, a):
        return linalg.frac_det(self.mul_matrix(a.coords))

    def height(self, a):
        return max(abs(c) for c in a.coords)

    def char_e(self, a):
        """Additive character e(x): exact phase Tr(x) mod 1 plus its complex value."""
        t = self.trace(a)
        phase = t - (t.numerator // t.denominator)
        return phase, cmath.exp(2j * cmath.pi * float(phase))

    def embed(self, a, place):
        row = self.embed_matrix[place]
        return sum(float(c) * w for c, w in zip(a.coords, row))

    def embed_all(self, a):
        return [
            sum(float(c) * w for c, w in zip(a.coords, row)) for row in self.embed_matrix_full
        ]

    def trace_float(self, values):
        """Trace on V from per-place values (length n1+n2)."""
        out = 0.0
        for l in range(self.n1):
            out += values[l].real
        for l in range(self.n1, self.n1 + self.n2):
            out += 2.0 * values[l].real
        return out

    def norm_float(self, values):
        out = 1.0
        for l in range(self.n1):
            out *= values[l].real
        for l in range(self.n1, self.n1 + self.n2):
            out *= abs(values[l]) ** 2
        return out

    def denominator_ideal(self, a):
        """HNF lattice of {b in O_K : a*b integral}; accepts one element or a sequence."""
        from . import ideals

        elements = a if isinstance(a, (list, tuple)) else [a]
        lattice = None
        for elt in elements:
            h = self._denominator_lattice(elt)
            lattice = h if lattice is None else linalg.lattice_intersection(lattice, h)
        return ideals.IdealLattice(self, lattice)

    def _denominator_lattice(self, a):
        n = self.n
        if not any(a.coords):
            return linalg.identity(n)
        m = self.mul_matrix(a.coords)
        den = linalg.lcm_list([x.denominator for row in m for x in row])
        if den == 1:
            return linalg.identity(n)
        num = [[int(x * den) for x in row] for row in m]
        # integer y with N y = 0 (mod den): kernel of [N | -den I], first n rows
        stacked = [row + [-den if i == j else 0 for j in range(n)] for i, row in enumerate(num)]
        kern = linalg.int_kernel(stacked)
        gens = [[vec[i] for vec in kern] for i in range(n)]
        return linalg.column_hnf(gens)

    # -- real forms --------------------------------------------------------------

    def expand_poly_coords(self, coeffs, s):
        """Expand a K-polynomial in s variables into the n*s real coordinates.

        Substitutes x_i = sum_l X_{i,l} omega_l (flat variable order i*n + l);
        returns {exponent tuple: AlgebraicNumber}.
        """
        n = self.n
        nvars = n * s
        linears = []
        for i in range(s):
            lin = {}
            for l in range(n):
                exps = [0] * nvars
                exps[i * n + l] = 1
                unit = [Fraction(0)] * n
                unit[l] = Fraction(1)
                lin[tuple(exps)] = AlgebraicNumber(self, unit)
            linears.append(lin)
        out = {}
        for exps, c in coeffs.items():
            term = polys.p_const(nvars, c)
            for i, e in enumerate(exps):
                if e:
                    term = polys.p_mul(term, polys.p_pow(linears[i], e))
            out = polys.p_add(out, term)
        return out

    def real_components(self, coeffs, s):
        """Component polynomials F_l with F(x) = 0 iff all F_l vanish.

        Coefficient isolation via the trace-dual basis amounts to reading off
        the l-th omega-coordinate of each K-coefficient; valid for any ring
        basis, orthonormal or not.
        """
        expanded = self.expand_poly_coords(coeffs, s)
        comps = [{} for _ in range(self.n)]
        for exps, c in expanded.items():
            for l in range(self.n):
                if c.coords[l]:
                    comps[l][exps] = c.coords[l]
        return comps

    def trace_components(self, coeffs, s):
        """Polynomials Tr(omega_l * F(x)) in the n*s real coordinates."""
        expanded = self.expand_poly_coords(coeffs, s)
        comps = [{} for _ in range(self.n)]
        for exps, c in expanded.items():
            for l in range(self.n):
                v = sum(self.gram[l][k] * c.coords[k] for k in range(self.n))
                if v:
                    comps[l][exps] = v
        return comps

    def __repr__(self):
        return (
            f"FieldDescriptor(n={self.n}, min_poly={self.min_poly}, "
            f"n1={self.n1}, n2={self.n2}, disc={self.disc_field})"
        )


def build_field(min_poly, basis_matrix=None, precision=DEFAULT_PRECISION, class_number_one=False):
    """Construct a FieldDescriptor, verifying every ring-basis invariant.

    min_poly: integer coefficients ascending (constant term first), monic.
    basis_matrix: rows express omega_i in the power basis 1, theta, ...;
    defaults to the power basis itself.
    """
    n = len(min_poly) - 1
    if basis_matrix is None:
        basis_matrix = linalg.identity(n)
    return FieldDescriptor(min_poly, basis_matrix, precision, class_number_one)


def arith(op, a, b=None):
    """Basic field arithmetic by name: add, sub, mul, inv, div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")
