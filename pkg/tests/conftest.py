from fractions import Fraction
import random

import pytest

from hasselab import build_field
from hasselab.forms import FormSystem


@pytest.fixture(scope="session")
def QQ():
    """Degree-1 field Q, the base case for everything."""
    return build_field([1, 1], class_number_one=True)


@pytest.fixture(scope="session")
def Qi():
    """Gaussian rationals with the power basis {1, i}."""
    return build_field([1, 0, 1], class_number_one=True)


@pytest.fixture(scope="session")
def Qs5():
    """Real quadratic field Q(sqrt 5) with the golden-ratio integral basis."""
    return build_field([-5, 0, 1], [[1, 0], [Fraction(1, 2), Fraction(1, 2)]],
                       class_number_one=True)


@pytest.fixture(scope="session")
def Qc():
    """Mixed-signature cubic Q(cbrt 2): one real and one complex place."""
    return build_field([-2, 0, 0, 1], class_number_one=True)


def random_element(field, rng, denom=3, size=9):
    return field.element(
        [Fraction(rng.randint(-size, size), rng.randint(1, denom)) for _ in range(field.n)]
    )


def random_integral(field, rng, size=9):
    return field.element([rng.randint(-size, size) for _ in range(field.n)])


def random_form(field, rng, d, s, terms=4, size=3):
    coeffs = {}
    for _ in range(terms):
        exps = [0] * s
        for _ in range(d):
            exps[rng.randrange(s)] += 1
        coeffs[tuple(exps)] = field.element(
            [rng.randint(-size, size) for _ in range(field.n)]
        )
    if not any(coeffs.values()):
        coeffs[tuple([d] + [0] * (s - 1))] = field.one
    return coeffs


def make_system(field, rng, d, s, R=1, terms=4):
    return FormSystem(field, d, s, [random_form(field, rng, d, s, terms) for _ in range(R)])


@pytest.fixture()
def rng():
    return random.Random(20260810)


def five_squares_signature(field):
    """x1^2 + x2^2 + x3^2 - x4^2 - x5^2, the workhorse Hasse instance."""
    signs = [1, 1, 1, -1, -1]
    return FormSystem(
        field,
        2,
        5,
        [{tuple(2 if i == j else 0 for i in range(5)): signs[j] for j in range(5)}],
    )
