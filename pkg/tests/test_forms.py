from fractions import Fraction
import math
import random

import pytest

from hasselab import polys
from hasselab.errors import ValidationError
from hasselab.forms import (
    FormSystem,
    difference,
    eval_FF,
    expand_system,
    index_set,
    jacobian_probe,
    multilinear_coeffs,
    polarize,
    tensor_eval,
)

from conftest import make_system, random_element


def test_polarize_examples(QQ):
    t = polarize(QQ, {(1, 1): QQ.one}, 2, 2)
    assert t == {(0, 1): QQ.from_rational(Fraction(1, 2))}
    t = polarize(QQ, {(3,): QQ.one}, 1, 3)
    assert t == {(0, 0, 0): QQ.one}
    t = polarize(QQ, {(2, 1): QQ.one}, 2, 3)
    assert t == {(0, 0, 1): QQ.from_rational(Fraction(1, 3))}


@pytest.mark.parametrize("field_name", ["QQ", "Qi"])
def test_polarize_diagonal_restriction(field_name, request, rng):
    """Phi(x, ..., x) = F(x) exactly, on random forms and points."""
    field = request.getfixturevalue(field_name)
    for _ in range(50):
        d = rng.randint(2, 4)
        s = rng.randint(1, 3)
        fs = make_system(field, rng, d, s)
        tensor = polarize(field, fs.coeffs[0], s, d)
        x = [random_element(field, rng, denom=2, size=3) for _ in range(s)]
        assert tensor_eval(field, tensor, [x] * d) == fs.evaluate(0, x)


def test_index_set_examples():
    J, A = index_set(2, 2)
    assert J == [(1, 1), (1, 2), (2, 2)]
    assert [A[j] for j in J] == [1, 2, 1]
    J1, A1 = index_set(1, 4)
    assert J1 == [(1, 1, 1, 1)] and A1[J1[0]] == 1
    J3, _ = index_set(3, 2)
    assert len(J3) == 6


def test_index_set_invariants():
    for m in range(1, 7):
        for d in range(2, 6):
            J, A = index_set(m, d)
            assert len(J) == math.comb(d - 1 + m, d)
            assert sum(A.values()) == m**d


def test_expand_examples(QQ):
    fs = FormSystem(QQ, 2, 1, [{(2,): 1}])
    mls = expand_system(fs, 2)
    assert mls.blocks[0][0] == {(2, 0): QQ.one}
    assert mls.blocks[0][1] == {(1, 1): QQ.from_rational(2)}
    assert mls.blocks[0][2] == {(0, 2): QQ.one}

    mls1 = expand_system(fs, 1)
    assert mls1.blocks[0][0] == fs.coeffs[0]

    fs2 = FormSystem(QQ, 2, 2, [{(1, 1): 1}])
    mls2 = expand_system(fs2, 2)
    j12 = mls2.J.index((1, 2))
    assert mls2.blocks[0][j12] == {(1, 0, 0, 1): QQ.one, (0, 1, 1, 0): QQ.one}


@pytest.mark.parametrize("field_name", ["QQ", "Qi"])
def test_expansion_identity(field_name, request, rng):
    """F(sum t_k x_k) = sum_j A(j) t^j Phi_j(x), exact, random instances."""
    field = request.getfixturevalue(field_name)
    for _ in range(40):
        d = rng.randint(2, 4)
        s = rng.randint(1, 4)
        m = rng.randint(1, 3)
        fs = make_system(field, rng, d, s)
        mls = expand_system(fs, m)
        xs = [[random_element(field, rng, denom=2, size=2) for _ in range(s)] for _ in range(m)]
        ts = [Fraction(rng.randint(-3, 3)) for _ in range(m)]
        combo = [sum((ts[k] * xs[k][i] for k in range(m)), field.zero) for i in range(s)]
        lhs = fs.evaluate(0, combo)
        rhs = field.zero
        flat = [x for vec in xs for x in vec]
        for jidx, j in enumerate(mls.J):
            tmon = Fraction(1)
            for v in j:
                tmon *= ts[v - 1]
            if tmon:
                val = polys.p_eval(mls.blocks[0][jidx], flat)
                if val is not None:
                    rhs = rhs + tmon * val
        assert lhs == rhs


@pytest.mark.parametrize("field_name", ["QQ", "Qi"])
def test_system_block_equivalence(field_name, request, rng):
    """(sys) holds identically in t iff all blocks vanish, for random xbar."""
    field = request.getfixturevalue(field_name)
    checked = 0
    while checked < 50:
        d = rng.randint(2, 3)
        s = rng.randint(1, 3)
        m = rng.randint(1, 2)
        fs = make_system(field, rng, d, s)
        mls = expand_system(fs, m)
        if rng.random() < 0.3:
            xs = [[field.zero] * s for _ in range(m)]
        else:
            xs = [
                [random_element(field, rng, denom=1, size=2) for _ in range(s)]
                for _ in range(m)
            ]
        flat = [x for vec in xs for x in vec]
        blocks_vanish = all(
            not polys.p_eval(mls.blocks[0][jidx], flat)
            for jidx in range(mls.r)
            if mls.blocks[0][jidx]
        )
        # identity in t via exact coefficient extraction on a spanning t-grid
        ts_grid = [
            [Fraction(v) for v in point]
            for point in _t_grid(m, d)
        ]
        sys_vanishes = True
        for ts in ts_grid:
            combo = [sum((ts[k] * xs[k][i] for k in range(m)), field.zero) for i in range(s)]
            if fs.evaluate(0, combo):
                sys_vanishes = False
                break
        assert sys_vanishes == blocks_vanish
        checked += 1


def _t_grid(m, d):
    import itertools

    values = range(d + 1)
    return list(itertools.product(values, repeat=m))


def test_eval_FF_examples(QQ):
    fs = FormSystem(QQ, 2, 1, [{(2,): 1}])
    mls = expand_system(fs, 1)
    assert eval_FF(mls, [QQ.from_rational(3)], [[QQ.zero]]) == QQ.zero
    assert eval_FF(mls, [QQ.from_rational(3)], [[QQ.one]]) == QQ.from_rational(9)


def test_eval_FF_blockwise(Qi, rng):
    fs = make_system(Qi, rng, 2, 2)
    mls = expand_system(fs, 2)
    xs = [random_element(Qi, rng, denom=2) for _ in range(4)]
    alpha = [[random_element(Qi, rng, denom=2) for _ in range(mls.r)]]
    total = eval_FF(mls, xs, alpha)
    by_hand = Qi.zero
    for jidx in range(mls.r):
        val = polys.p_eval(mls.blocks[0][jidx], xs)
        if val is not None:
            by_hand = by_hand + alpha[0][jidx] * val
    assert total == by_hand


def test_difference_examples(QQ):
    fs = FormSystem(QQ, 2, 1, [{(2,): 1}])
    mls = expand_system(fs, 1)
    h = QQ.from_rational(Fraction(1, 2))
    diff = difference(QQ, mls.blocks[0][0], 1, 1, 1, [h])
    assert diff == {(1,): QQ.one, (0,): QQ.from_rational(Fraction(1, 4))}
    assert difference(QQ, {(0,): QQ.one}, 1, 1, 1, [h]) == {}


@pytest.mark.parametrize("field_name", ["QQ", "Qi"])
def test_difference_degree_drop(field_name, request, rng):
    """d-1 successive differences leave every block linear in xbar."""
    field = request.getfixturevalue(field_name)
    for _ in range(10):
        d = rng.randint(2, 4)
        s = rng.randint(1, 2)
        m = rng.randint(1, 2)
        fs = make_system(field, rng, d, s)
        mls = expand_system(fs, m)
        for jidx in range(mls.r):
            block = mls.blocks[0][jidx]
            if not block:
                continue
            assert polys.p_degree(block) == d
            cur = block
            for step in range(d - 1):
                slot = rng.randint(1, m)
                h = [random_element(field, rng, denom=1, size=2) for _ in range(s)]
                cur = difference(field, cur, m, s, slot, h)
            assert polys.p_degree(cur) <= 1


def test_multilinear_coeffs_quadratic(QQ, Qi):
    fs = FormSystem(QQ, 2, 3, [{(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}])
    mls = expand_system(fs, 1)
    H = [[QQ.from_rational(2), QQ.from_rational(-1), QQ.from_rational(5)]]
    B = multilinear_coeffs(mls, H)
    assert [B[i][0][0] for i in range(3)] == [4, -2, 10]
    # H = 0 kills everything
    B0 = multilinear_coeffs(mls, [[QQ.zero] * 3])
    assert all(B0[i][0][0] == 0 for i in range(3))
    # bilinearity in H for d = 2
    H2 = [[QQ.from_rational(1), QQ.from_rational(3), QQ.from_rational(-2)]]
    Hsum = [[a + b for a, b in zip(H[0], H2[0])]]
    B2 = multilinear_coeffs(mls, H2)
    Bsum = multilinear_coeffs(mls, Hsum)
    for i in range(3):
        assert Bsum[i][0][0] == B[i][0][0] + B2[i][0][0]

    # over Q(i): entries are 2 * dual-basis components of h_i
    fsk = FormSystem(Qi, 2, 2, [{(2, 0): 1, (0, 2): 1}])
    mk = expand_system(fsk, 1)
    h = [Qi.element([1, 2]), Qi.element([0, -1])]
    Bk = multilinear_coeffs(mk, [h])
    for i in range(2):
        for l in range(2):
            unit = [0, 0]
            unit[l] = 1
            want = 2 * Qi.trace(Qi.element(unit) * h[i])
            assert Bk[i][l][0] == want


@pytest.mark.parametrize("field_name", ["QQ", "Qi"])
def test_multilinear_coeffs_match_difference_gradient(field_name, request, rng):
    """B-hat equals the x-hat gradient of the fully differenced form."""
    field = request.getfixturevalue(field_name)
    for _ in range(6):
        d = rng.randint(2, 3)
        s = rng.randint(1, 2)
        fs = make_system(field, rng, d, s)
        mls = expand_system(fs, 1)
        H = [
            [random_element(field, rng, denom=1, size=2) for _ in range(s)]
            for _ in range(d - 1)
        ]
        B = multilinear_coeffs(mls, H)
        cur = mls.blocks[0][0]
        for h in H:
            cur = difference(field, cur, 1, s, 1, h)
        # linear part of the real form Tr(cur): coefficient of x-hat_{i,l}
        expanded = field.expand_poly_coords(cur, s)
        tr_poly = {exps: field.trace(c) for exps, c in expanded.items()}
        for i in range(s):
            for l in range(field.n):
                exps = [0] * (s * field.n)
                exps[i * field.n + l] = 1
                got = tr_poly.get(tuple(exps), Fraction(0))
                assert got == B[i][l][0]


def test_jacobian_probe_examples(QQ):
    fs = FormSystem(QQ, 2, 2, [{(2, 0): 1, (0, 2): 1}])
    rep = jacobian_probe(fs, samples=50, seed=1)
    assert rep.random_min_corank == 0

    fs2 = FormSystem(QQ, 2, 2, [{(2, 0): 1}])
    rep2 = jacobian_probe(fs2, samples=50, seed=1, search_bound=2)
    assert rep2.random_min_corank == 0
    assert rep2.variety_points > 0
    assert rep2.variety_min_corank == 1


def test_jacobian_probe_dense_cubic(Qi, rng):
    fs = make_system(Qi, rng, 3, 3, terms=6)
    rep = jacobian_probe(fs, samples=100, seed=3)
    assert rep.random_samples == 100
    assert 0 <= rep.random_min_corank <= 1


def test_form_system_validation(QQ):
    with pytest.raises(ValidationError):
        FormSystem(QQ, 1, 2, [{(1, 0): 1}])
    with pytest.raises(ValidationError):
        FormSystem(QQ, 2, 2, [{(1, 0): 1}])
    with pytest.raises(ValidationError):
        FormSystem(QQ, 2, 2, [])
