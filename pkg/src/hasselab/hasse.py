"""Headline experiment: empirical N_m(P) growth against the product of local densities.

run_hasse stitches the counting, p-adic and archimedean modules into one
report: normalized count ratios, the truncated Euler product, both
chi_infinity estimators with cross-validation, explicit condition thresholds,
and trend diagnostics.  Tolerances are engineering choices and are reported
next to the numbers they judge.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import time

from . import arch, bounds, counting, local, report
from .errors import BudgetExceeded, DegenerateData
from .forms import expand_system


def expected_growth_exponent(mls):
    """Exponent of P in the main term: n (ms - R r d)."""
    return mls.field.n * (mls.m * mls.s - mls.R * mls.r * mls.d)


def growth_exponent_box_side(p_list, n_list):
    """Slope of log N against log(2P+1); the box side absorbs the dominant
    finite-size effect at the tiny P a desk experiment can afford."""
    return growth_exponent([2 * p + 1 for p in p_list], n_list)


def growth_exponent(p_list, n_list):
    """Least-squares slope of log N against log P."""
    if len(p_list) < 3 or len(p_list) != len(n_list):
        raise DegenerateData("need at least 3 (P, N) pairs")
    if any(n <= 0 for n in n_list) or len(set(p_list)) < 2:
        raise DegenerateData("counts must be positive with at least two distinct P")
    xs = [math.log(p) for p in p_list]
    ys = [math.log(n) for n in n_list]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise DegenerateData("all P equal")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


@dataclass
class HasseOutcome:
    report: object
    ratios: list
    density_product: float
    chi_inf: float
    euler: float
    within_tolerance: bool
    monotone_trend: bool


def run_hasse(
    fs,
    m,
    p_list,
    prime_bound,
    quad_spec=None,
    truncation=16.0,
    schmidt_L=(8.0, 16.0),
    schmidt_samples=400_000,
    seed=0,
    ratio_tolerance=0.10,
    sing_star_dim=None,
    count_budget=counting.DEFAULT_POINT_BUDGET,
    local_budget=1_000_000_000,
    local_tolerance=Fraction(1, 5000),
    j_max=12,
    threads=1,
):
    """Full desk-scale Hasse experiment; returns a HasseOutcome with the report."""
    started = time.time()
    quad_spec = quad_spec or arch.QuadratureSpec(seed=seed)
    mls = expand_system(fs, m)
    field = fs.field
    exponent = expected_growth_exponent(mls)

    counts = []
    for P in p_list:
        t0 = time.time()
        if mls.is_diagonal_single():
            n_p = counting.count_diagonal(mls, P)
            method = "histogram-mitm"
        elif threads > 1:
            n_p = counting.count_expanded_threaded(mls, P, threads=threads, budget=count_budget)
            method = f"expanded-x{threads}"
        else:
            n_p = counting.count_expanded(mls, P, budget=count_budget)
            method = "expanded"
        ratio = n_p / P**exponent
        counts.append(
            {
                "P": P,
                "N": n_p,
                "ratio": report.float_entry(ratio, method=method),
                "elapsed_s": round(time.time() - t0, 3),
            }
        )

    euler = local.euler_product(
        mls, prime_bound, j_max=j_max, tolerance=local_tolerance, budget=local_budget
    )
    factor_rows = [
        {
            "p": f["p"],
            "f": f["f"],
            "e": f["e"],
            "a_seq": [Fraction(a) for a in f["a_seq"]],
            "stabilized": str(f["stabilized"]) if f["stabilized"] is not None else None,
            "diverged": f["diverged"],
        }
        for f in euler.factors
    ]

    chi_beta = arch.chi_inf_beta(mls, truncation, quad_spec)
    schmidt_rows = []
    prev = None
    for L in schmidt_L:
        est = arch.chi_inf_schmidt(mls, L, samples=schmidt_samples, seed=seed + int(L))
        schmidt_rows.append(est)
        prev = est
    schmidt_value = prev.value
    schmidt_err = prev.error + (
        abs(schmidt_rows[-1].value - schmidt_rows[-2].value) if len(schmidt_rows) > 1 else 0.0
    )

    chi_inf = chi_beta.value
    density = chi_inf * euler.value
    ratios = [c["ratio"]["value"] for c in counts]
    distances = [abs(r - density) for r in ratios]
    within = bool(density > 0 and distances[-1] <= ratio_tolerance * density)
    monotone = all(
        distances[i + 1] <= distances[i] * 1.05 for i in range(len(distances) - 1)
    )

    d, R = fs.d, fs.R
    r = mls.r
    conditions = {
        "r": r,
        "birch_threshold": bounds.birch_threshold(d, R, m),
        "local_threshold": bounds.local_threshold(d, R, m),
        "wooley_gamma_bound": bounds.wooley_gamma_bound(R, m, d),
        # convergence exponents: k above these makes minor arcs resp. the
        # series/integral tails work; logged as flags, never used to force
        # convergence of the truncated objects
        "k_minor_arc_bound": R * r * (R + 1) * (d - 1),
        "k_convergence_bound": R * (d - 1) * (R * r + 1),
        "sing_star_dim_asserted": sing_star_dim,
    }
    if sing_star_dim is not None:
        margin = fs.s - sing_star_dim
        conditions["birch_condition_holds"] = bool(margin > conditions["birch_threshold"])
        conditions["local_condition_holds"] = bool(margin > conditions["local_threshold"])
    else:
        conditions["birch_condition_holds"] = None
        conditions["local_condition_holds"] = None

    positivity_automatic = (d % 2 == 1) or (field.n1 == 0)
    positivity = {
        "automatic_real_case": bool(positivity_automatic),
        "c_positive_asserted": bool(positivity_automatic and density > 0 and not euler.diverged),
    }

    fit = None
    fit_side = None
    if len(p_list) >= 3:
        try:
            fit = growth_exponent(p_list, [c["N"] for c in counts])
            fit_side = growth_exponent_box_side(p_list, [c["N"] for c in counts])
        except DegenerateData:
            fit = None

    rep = report.ExperimentReport(
        config_echo={
            "m": m,
            "P": list(p_list),
            "prime_bound": prime_bound,
            "ratio_tolerance": ratio_tolerance,
            "truncation": truncation,
            "schmidt_L": list(schmidt_L),
        },
        field_summary=report.field_summary(field),
        results={
            "counts": counts,
            "expected_exponent": exponent,
            "growth_exponent_fit": report.float_entry(fit) if fit is not None else None,
            "growth_exponent_fit_box_side": (
                report.float_entry(fit_side) if fit_side is not None else None
            ),
            "local_factors": factor_rows,
            "local_skipped_primes": euler.skipped,
            "euler_product": report.float_entry(
                euler.value, method="chi_p-product", exact=euler.exact
            ),
            "chi_inf_beta": report.float_entry(
                chi_beta.value, error=chi_beta.error, method="beta-integral",
                table=[[row[0], row[1], row[3]] for row in chi_beta.table],
                tail=chi_beta.tail,
            ),
            "chi_inf_schmidt": report.float_entry(
                schmidt_value, error=schmidt_err, method="schmidt-weight",
                L=[e.L for e in schmidt_rows],
                values=[e.value for e in schmidt_rows],
                stat_errors=[e.error for e in schmidt_rows],
            ),
            "density_product": report.float_entry(density, method="chi_inf*euler"),
            "ratio_distances": distances,
            "within_tolerance": within,
            "monotone_trend": monotone,
            "conditions": conditions,
            "positivity": positivity,
        },
        provenance={
            "seed": seed,
            "precision": field.precision,
            "count_budget": count_budget,
            "local_budget": local_budget,
            "local_tolerance": str(local_tolerance),
            "threads": threads,
        },
    ).finish(started)
    return HasseOutcome(
        report=rep,
        ratios=ratios,
        density_product=density,
        chi_inf=chi_inf,
        euler=euler.value,
        within_tolerance=within,
        monotone_trend=monotone,
    )
