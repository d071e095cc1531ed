"""Exact evaluation of every explicit threshold: the Birch-type variable bound,
the local-solubility maximum, Wooley's gamma bound, and the N/L unirationality
tower, all in arbitrary-precision integers.

The tower explodes like d ^^ d; a log10 pre-estimate refuses computations whose
decimal length would exceed the digit guard instead of exhausting memory.
"""

import math
from functools import lru_cache

from .errors import DegenerateData, ResourceExceeded

DIGIT_GUARD = 2_000_000  # decimal digits


def r_value(m, d):
    """Number of degree-d monomials in m parameters: binom(d-1+m, d)."""
    if m < 1 or d < 2:
        raise DegenerateData("need m >= 1, d >= 2")
    return math.comb(d - 1 + m, d)


def birch_threshold(d, R, m):
    """2^(d-1) (d-1) R r (R+1) with r = binom(d-1+m, d)."""
    r = r_value(m, d)
    return 2 ** (d - 1) * (d - 1) * R * r * (R + 1)


def wooley_gamma_bound(R, m, d):
    """(R^2 d^2 + m R)^(2^(d-2)) * d^(2^(d-1))."""
    return (R**2 * d**2 + m * R) ** (2 ** (d - 2)) * d ** (2 ** (d - 1))


def local_threshold(d, R, m):
    """2^(d-1) (d-1) R max{r (R+1), wooley_gamma_bound}."""
    r = r_value(m, d)
    inner = max(r * (R + 1), wooley_gamma_bound(R, m, d))
    return 2 ** (d - 1) * (d - 1) * R * inner


def _log10_comb(a_log10, b):
    """log10 binom(A, b) for huge A given via log10, small b."""
    return b * a_log10 - math.lgamma(b + 1) / math.log(10)


def _n_log10(d, k_log10):
    """Rough log10 of N(d, k) for overflow estimation (k given in log10)."""
    if d == 2:
        return max(2 * k_log10 - math.log10(2), 0.5)
    prev = _n_log10(d - 1, k_log10)
    return max(_log10_comb(prev, d - 1), _log10_comb(k_log10, d), prev)


def N_HMP(d, k, digit_guard=DIGIT_GUARD):
    """Harris-Mazur-Pandharipande recursion N(d, k), exact."""
    if d < 2 or k < 0:
        raise DegenerateData("need d >= 2, k >= 0")
    k_log10 = math.log10(k) if k > 1 else 0.0
    estimate = _n_log10(d, k_log10)
    if estimate > digit_guard:
        raise ResourceExceeded(
            f"N({d}, k) would have ~10^{estimate:.3g} digits", magnitude_log10=estimate
        )
    return _n_exact(d, k)


def _n_exact(d, k):
    if d == 2:
        return math.comb(k + 1, 2) + 3
    prev = _n_exact(d - 1, k)
    return math.comb(prev + d, d - 1) + prev + math.comb(k + d, d) + 2


@lru_cache(maxsize=None)
def _l_memo(d):
    if d == 2:
        return 0
    return _n_exact(d - 1, _l_memo(d - 1))


def L_HMP(d, digit_guard=DIGIT_GUARD, memoized=True):
    """Linear-space dimension threshold L(d); L(2) = 0, L(d) = N(d-1, L(d-1))."""
    if d < 2:
        raise DegenerateData("need d >= 2")
    log_est = l_log10_estimate(d)
    if log_est > digit_guard:
        raise ResourceExceeded(
            f"L({d}) would have ~10^{log_est:.3g} digits", magnitude_log10=log_est
        )
    if memoized:
        return _l_memo(d)
    # direct unmemoized recursion, for the two-route agreement check
    def rec(dd):
        if dd == 2:
            return 0
        return _n_exact(dd - 1, rec(dd - 1))

    return rec(d)


def l_log10_estimate(d):
    log_l = 0.0
    for dd in range(3, d + 1):
        log_l = _n_log10(dd - 1, log_l)
    return log_l


def unirat_bound(d, digit_guard=DIGIT_GUARD):
    """Strict lower variable threshold of the unirationality criterion:
    2^(d-1) (d-1) (d^2 + L(d) + 1)^(2^(d-2)) d^(2^(d-1))."""
    if d < 3:
        raise DegenerateData("unirationality tower needs d >= 3")
    log_l = l_log10_estimate(d)
    estimate = 2 ** (d - 2) * max(log_l, math.log10(d * d + 1)) + 2 ** (d - 1) * math.log10(d)
    if estimate > digit_guard:
        raise ResourceExceeded(
            f"unirat_bound({d}) would have ~10^{estimate:.3g} digits",
            magnitude_log10=estimate,
        )
    L = L_HMP(d, digit_guard=digit_guard)
    return 2 ** (d - 1) * (d - 1) * (d * d + L + 1) ** (2 ** (d - 2)) * d ** (2 ** (d - 1))


def leading_digits_and_exponent(value, digits=3):
    """(leading digit string, decimal exponent) of a positive integer."""
    s = str(value)
    return s[:digits], len(s) - 1


def threshold_table(d_values, R=1, m=1):
    rows = []
    for d in d_values:
        row = {
            "d": d,
            "r": r_value(m, d),
            "birch": birch_threshold(d, R, m),
            "local": local_threshold(d, R, m),
            "wooley": wooley_gamma_bound(R, m, d),
        }
        try:
            row["L"] = L_HMP(d)
            row["unirat"] = unirat_bound(d) if d >= 3 else None
        except ResourceExceeded as exc:
            row["L"] = f"~1e{exc.magnitude_log10:.3g} digits"
            row["unirat"] = None
        rows.append(row)
    return rows
