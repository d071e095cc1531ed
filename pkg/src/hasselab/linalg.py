"""Exact linear algebra over Q and Z: small dense matrices as lists of lists.

Everything here is allocation-light and intended for the tiny dimensions
(n <= 8 or so) that number-field coordinate work produces.  Matrices are
row-major lists; column operations act on transposed views where stated.
"""

from fractions import Fraction
from math import gcd

from .errors import RankDeficient


def frac_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def identity(n, one=1):
    return [[one if i == j else one * 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def frac_det(a):
    """Determinant by fraction-preserving Gaussian elimination."""
    n = len(a)
    m = [list(map(Fraction, row)) for row in a]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] * inv
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return det


def frac_solve(a, rhs):
    """Solve a x = rhs exactly; rhs may be a vector or a matrix (list of columns as rows of rhs^T is NOT assumed: rhs is a list of rows)."""
    n = len(a)
    vector_input = not isinstance(rhs[0], (list, tuple))
    b = [[Fraction(x)] for x in rhs] if vector_input else [list(map(Fraction, row)) for row in rhs]
    m = [list(map(Fraction, row)) + b[i] for i, row in enumerate(a)]
    w = len(m[0])
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise RankDeficient("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    sol = [row[n:w] for row in m]
    if vector_input:
        return [row[0] for row in sol]
    return sol


def frac_inverse(a):
    n = len(a)
    return frac_solve(a, identity(n, Fraction(1)))


def frac_rank(a):
    if not a:
        return 0
    m = [list(map(Fraction, row)) for row in a]
    rows, cols = len(m), len(m[0])
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


def _xgcd(a, b):
    """Extended gcd: returns (g, u, v) with u*a + v*b = g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def column_hnf(mat, require_full_rank=True):
    """Canonical column Hermite normal form of an n x k integer matrix.

    Columns generate the lattice.  Returns an n x n upper-triangular matrix
    with positive diagonal and 0 <= H[i][j] < H[i][i] for j > i.  Equal
    lattices produce identical matrices.
    """
    n = len(mat)
    cols = [list(col) for col in zip(*mat)]
    pivots = [None] * n
    for row in range(n - 1, -1, -1):
        live = [c for c in cols if any(c[r] != 0 for r in range(row + 1))]
        # combine columns until a single one carries a nonzero entry at `row`
        while True:
            nz = [c for c in live if c[row] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda c: abs(c[row]))
            a, b = nz[0], nz[1]
            g, u, v = _xgcd(a[row], b[row])
            pa, pb = a[row] // g, b[row] // g
            new_a = [u * x + v * y for x, y in zip(a, b)]
            new_b = [-pb * x + pa * y for x, y in zip(a, b)]
            a[:], b[:] = new_a, new_b
        nz = [c for c in live if c[row] != 0]
        if not nz:
            if require_full_rank:
                raise RankDeficient(f"no pivot in row {row}")
            continue
        piv = nz[0]
        if piv[row] < 0:
            piv[:] = [-x for x in piv]
        pivots[row] = piv
        cols = [c for c in cols if c is not piv]
    if require_full_rank and any(p is None for p in pivots):
        raise RankDeficient("generators span a proper sublattice of rank < n")
    h_cols = [pivots[i] if pivots[i] is not None else [0] * n for i in range(n)]
    # reduce off-diagonal entries: row i, columns j > i
    for i in range(n):
        if h_cols[i][i] == 0:
            continue
        d = h_cols[i][i]
        for j in range(i + 1, n):
            q = h_cols[j][i] // d
            if q:
                h_cols[j] = [x - q * y for x, y in zip(h_cols[j], h_cols[i])]
    return [[h_cols[j][i] for j in range(n)] for i in range(n)]


def int_kernel(mat):
    """Z-basis of the integer kernel of an n x m integer matrix.

    Column-reduces [mat; I] jointly; columns whose image part vanishes give
    the kernel.  Returns a list of length-m integer vectors.
    """
    n, m = len(mat), len(mat[0])
    work = [list(col) + [1 if j == t else 0 for t in range(m)] for j, col in
            enumerate([[mat[i][j] for i in range(n)] for j in range(m)])]
    # eliminate row by row (top to bottom) over the image part
    row = 0
    used = []
    live = list(range(m))
    for row in range(n):
        nzidx = [j for j in live if work[j][row] != 0]
        while len(nzidx) > 1:
            nzidx.sort(key=lambda j: abs(work[j][row]))
            a, b = work[nzidx[0]], work[nzidx[1]]
            g, u, v = _xgcd(a[row], b[row])
            pa, pb = a[row] // g, b[row] // g
            new_a = [u * x + v * y for x, y in zip(a, b)]
            new_b = [-pb * x + pa * y for x, y in zip(a, b)]
            a[:], b[:] = new_a, new_b
            nzidx = [j for j in live if work[j][row] != 0]
        if nzidx:
            used.append(nzidx[0])
            live = [j for j in live if j != nzidx[0]]
    kernel = []
    for j in live:
        if all(work[j][r] == 0 for r in range(n)):
            kernel.append(work[j][n:])
    return kernel


def lattice_intersection(a, b):
    """HNF basis of the intersection of two full-rank integer lattices (column bases)."""
    n = len(a)
    stacked = [[a[i][j] for j in range(n)] + [-b[i][j] for j in range(n)] for i in range(n)]
    kern = int_kernel(stacked)
    if len(kern) != n:
        raise RankDeficient("lattice intersection lost rank")
    gens = [[sum(a[i][j] * vec[j] for j in range(n)) for vec in kern] for i in range(n)]
    return column_hnf(gens)


def solve_upper_triangular_int(h, v):
    """Solve h x = v over Z for upper-triangular h; returns None when no integer solution."""
    n = len(h)
    x = [0] * n
    for i in range(n - 1, -1, -1):
        acc = v[i] - sum(h[i][j] * x[j] for j in range(i + 1, n))
        if h[i][i] == 0 or acc % h[i][i]:
            return None
        x[i] = acc // h[i][i]
    return x


def reduce_mod_lattice(h, v):
    """Canonical representative of v modulo the lattice spanned by upper-triangular h."""
    n = len(h)
    w = list(v)
    for i in range(n - 1, -1, -1):
        q = w[i] // h[i][i]
        if q:
            for r in range(i + 1):
                w[r] -= q * h[r][i]
    return tuple(w)


def lcm_list(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
