"""hasse-lab command line: field-info, count, expsum, local, arch, hasse, bounds.

Exit codes: 0 success, 1 validation error, 2 budget exceeded (partial report
written if anything completed).
"""

import argparse
import sys
import time
from fractions import Fraction

from . import arch, bounds, counting, hasse, local, report
from .errors import BudgetExceeded, ValidationError
from .forms import expand_system


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hasse-lab",
        description="Desk-scale circle-method experiments over number fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("field-info", "count", "expsum", "local", "arch", "hasse", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        if name == "bounds":
            p.add_argument(
                "--degrees", default="2,3,4,5,6", help="comma-separated degrees for the table"
            )
    return parser


def _load_config(args):
    if not args.config:
        raise ValidationError("this subcommand needs --config", "cli")
    with open(args.config, "r", encoding="utf-8") as fh:
        return report.parse_config(fh.read())


def _emit(args, rep):
    payload = report.emit_report(rep, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)


def _quad_spec(cfg, seed_override):
    block = cfg.data["arch"]
    seed = seed_override if seed_override is not None else int(block["seed"])
    return (
        arch.QuadratureSpec(
            method=block["method"],
            base_panels=int(block["base_panels"]),
            nodes=int(block["nodes"]),
            samples=int(block["samples"]),
            seed=seed,
            max_nodes=int(block["max_nodes"]),
        ),
        seed,
    )


def _require_forms(cfg):
    if cfg.forms is None:
        raise ValidationError("this subcommand needs a [forms] section", "forms")
    return cfg.forms


def cmd_field_info(args):
    cfg = _load_config(args)
    rep = report.ExperimentReport(
        config_echo=cfg.data["field"],
        field_summary=report.field_summary(cfg.field),
    ).finish(time.time())
    _emit(args, rep)
    return 0


def cmd_count(args):
    cfg = _load_config(args)
    fs = _require_forms(cfg)
    block = cfg.data["counting"]
    m = int(block["m"])
    mls = expand_system(fs, m)
    exponent = hasse.expected_growth_exponent(mls)
    rows = []
    code = 0
    try:
        for P in block["P"]:
            t0 = time.time()
            if mls.is_diagonal_single():
                n_p = counting.count_diagonal(mls, P, budget=int(block["point_budget"]))
                method = "histogram-mitm"
            elif args.threads > 1:
                n_p = counting.count_expanded_threaded(
                    mls, P, threads=args.threads, budget=int(block["point_budget"])
                )
                method = f"expanded-x{args.threads}"
            else:
                n_p = counting.count_expanded(mls, P, budget=int(block["point_budget"]))
                method = "expanded"
            rows.append(
                {
                    "P": P,
                    "N": n_p,
                    "ratio": report.float_entry(n_p / P**exponent, method=method),
                    "elapsed_s": round(time.time() - t0, 3),
                }
            )
    except BudgetExceeded as exc:
        code = 2
        sys.stderr.write(f"budget exceeded: {exc}\n")
    rep = report.ExperimentReport(
        config_echo=block,
        field_summary=report.field_summary(cfg.field),
        results={"counts": rows, "expected_exponent": exponent},
    ).finish(time.time())
    _emit(args, rep)
    return code


def cmd_expsum(args):
    cfg = _load_config(args)
    fs = _require_forms(cfg)
    block = cfg.data["expsum"]
    m = int(cfg.data["counting"]["m"])
    mls = expand_system(fs, m)
    alpha_raw = block["alpha"]
    if alpha_raw is None:
        raise ValidationError("expsum needs alpha (R x r x n rationals)", "expsum.alpha")
    field = cfg.field
    alpha = []
    for rho, row in enumerate(alpha_raw):
        new = []
        for jidx, cell in enumerate(row):
            loc = f"expsum.alpha[{rho}][{jidx}]"
            if len(cell) != field.n:
                raise ValidationError(f"need {field.n} coordinates", loc)
            if block["path"] == "exact":
                new.append(field.element([Fraction(str(x)) for x in cell]))
            else:
                new.append(tuple(float(Fraction(str(x))) for x in cell))
        alpha.append(new)
    code = 0
    results = {}
    try:
        res = counting.exp_sum(
            mls, alpha, int(block["P"]), path=block["path"],
            budget=int(cfg.data["counting"]["point_budget"]),
        )
        results = {
            "value": {"re": res.value.real, "im": res.value.imag},
            "points": res.points,
            "path": res.path,
            "distinct_phases": len(res.histogram) if res.histogram is not None else None,
        }
    except BudgetExceeded as exc:
        code = 2
        sys.stderr.write(f"budget exceeded: {exc}\n")
    rep = report.ExperimentReport(
        config_echo=block,
        field_summary=report.field_summary(cfg.field),
        results={"expsum": results},
    ).finish(time.time())
    _emit(args, rep)
    return code


def cmd_local(args):
    cfg = _load_config(args)
    fs = _require_forms(cfg)
    block = cfg.data["local"]
    m = int(cfg.data["counting"]["m"])
    mls = expand_system(fs, m)
    code = 0
    results = {}
    try:
        euler = local.euler_product(
            mls,
            int(block["prime_bound"]),
            j_max=int(block["j_max"]),
            tolerance=Fraction(str(block["tolerance"])),
            budget=int(block["budget"]),
        )
        results["local_factors"] = [
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
        results["skipped"] = euler.skipped
        results["euler_product"] = report.float_entry(
            euler.value, method="chi_p-product", exact=euler.exact, diverged=euler.diverged
        )
        if int(block["series_bound"]) > 0:
            ss = local.singular_series_truncated(
                mls, int(block["series_bound"]), budget=int(block["budget"])
            )
            results["singular_series"] = {
                "value": {"re": ss.value.real, "im": ss.value.imag},
                "truncation": ss.truncation,
                "terms": len(ss.terms),
            }
    except BudgetExceeded as exc:
        code = 2
        sys.stderr.write(f"budget exceeded: {exc}\n")
    rep = report.ExperimentReport(
        config_echo=block,
        field_summary=report.field_summary(cfg.field),
        results=results,
    ).finish(time.time())
    _emit(args, rep)
    return code


def cmd_arch(args):
    cfg = _load_config(args)
    fs = _require_forms(cfg)
    block = cfg.data["arch"]
    m = int(cfg.data["counting"]["m"])
    mls = expand_system(fs, m)
    spec, seed = _quad_spec(cfg, args.seed)
    chi_beta = arch.chi_inf_beta(mls, float(block["truncation"]), spec)
    schmidt = [
        arch.chi_inf_schmidt(mls, L, samples=spec.samples, seed=seed + int(L))
        for L in block["schmidt_L"]
    ]
    rep = report.ExperimentReport(
        config_echo=block,
        field_summary=report.field_summary(cfg.field),
        results={
            "chi_inf_beta": report.float_entry(
                chi_beta.value, error=chi_beta.error, method="beta-integral",
                table=[[row[0], row[1], row[3]] for row in chi_beta.table],
                tail=chi_beta.tail,
            ),
            "chi_inf_schmidt": [
                report.float_entry(e.value, error=e.error, method="schmidt-weight", L=e.L)
                for e in schmidt
            ],
        },
        provenance={"seed": seed},
    ).finish(time.time())
    _emit(args, rep)
    return 0


def cmd_hasse(args):
    cfg = _load_config(args)
    fs = _require_forms(cfg)
    block = cfg.data["hasse"]
    spec, seed = _quad_spec(cfg, args.seed)
    code = 0
    try:
        outcome = hasse.run_hasse(
            fs,
            int(block["m"]),
            [int(p) for p in block["P"]],
            int(block["prime_bound"]),
            quad_spec=spec,
            truncation=float(cfg.data["arch"]["truncation"]),
            schmidt_L=[float(L) for L in cfg.data["arch"]["schmidt_L"]],
            schmidt_samples=spec.samples,
            seed=seed,
            ratio_tolerance=float(block["ratio_tolerance"]),
            sing_star_dim=block["sing_star_dim"],
            count_budget=int(cfg.data["counting"]["point_budget"]),
            local_budget=int(block["local_budget"]),
            local_tolerance=Fraction(str(block["local_tolerance"])),
            j_max=int(cfg.data["local"]["j_max"]),
            threads=args.threads,
        )
        rep = outcome.report
    except BudgetExceeded as exc:
        code = 2
        sys.stderr.write(f"budget exceeded: {exc}\n")
        rep = report.ExperimentReport(
            config_echo=block,
            field_summary=report.field_summary(cfg.field),
            results={"error": str(exc)},
        ).finish(time.time())
    _emit(args, rep)
    return code


def cmd_bounds(args):
    degrees = [int(x) for x in args.degrees.split(",") if x.strip()]
    rows = bounds.threshold_table(degrees)
    lines = []
    header = ["d", "r", "birch", "local", "wooley", "L", "unirat"]
    lines.append("\t".join(header))
    for row in rows:
        lines.append(
            "\t".join(str(row[k]) if row[k] is not None else "-" for k in header)
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "field-info": cmd_field_info,
    "count": cmd_count,
    "expsum": cmd_expsum,
    "local": cmd_local,
    "arch": cmd_arch,
    "hasse": cmd_hasse,
    "bounds": cmd_bounds,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return 1
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
