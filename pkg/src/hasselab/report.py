"""Configuration parsing, experiment records, and deterministic serialization.

Configs are TOML (nested key-value tables).  All exact rationals serialize as
"p/q" decimal strings, never floats; every floating value in a result block is
a dict carrying its error/method metadata.  JSON output is byte-deterministic
for identical inputs and seeds.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
import csv
import io
import json
import sys
import time

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .errors import HasseLabError, ValidationError
from .field import build_field
from .forms import FormSystem


def _as_fraction(value, location):
    if isinstance(value, bool):
        raise ValidationError("expected a rational, got a boolean", location)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad rational {value!r}: {exc}", location)
    if isinstance(value, float):
        raise ValidationError(
            "floats are not accepted where exact rationals are required; use 'p/q' strings",
            location,
        )
    raise ValidationError(f"cannot read {value!r} as a rational", location)


_DEFAULTS = {
    "field": {"precision": 64, "class_number_one": False},
    "counting": {"m": 1, "P": [1, 2], "point_budget": 4_000_000},
    "expsum": {"P": 2, "path": "exact", "alpha": None},
    "arcs": {"theta": "1/10", "c1": 1.0, "c2": 1.0},
    "local": {
        "prime_bound": 10,
        "j_max": 8,
        "tolerance": "1/1000000",
        "budget": 2_000_000,
        "series_bound": 0,
    },
    "arch": {
        "method": "tensor-panel",
        "base_panels": 6,
        "nodes": 10,
        "samples": 400_000,
        "seed": 0,
        "truncation": 16.0,
        "schmidt_L": [8.0, 16.0],
        "max_nodes": 4_000_000,
    },
    "hasse": {
        "m": 1,
        "P": [1, 2, 3],
        "prime_bound": 10,
        "ratio_tolerance": 0.10,
        "sing_star_dim": None,
        "local_budget": 1_000_000_000,
        "local_tolerance": "1/5000",
    },
}


@dataclass
class Config:
    """Validated configuration: raw echo plus constructed field and form system."""

    data: dict
    field: object
    forms: object

    def __eq__(self, other):
        return isinstance(other, Config) and self.data == other.data


def parse_config(text):
    """Parse and validate a TOML configuration; defaults filled and echoed."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"TOML syntax error: {exc}", "config")
    data = {}
    for section, defaults in _DEFAULTS.items():
        block = dict(defaults)
        block.update(raw.get(section, {}))
        data[section] = block
    for key in raw:
        if key not in _DEFAULTS and key != "forms":
            raise ValidationError(f"unknown section [{key}]", key)

    fblock = data["field"]
    if "min_poly" not in fblock:
        raise ValidationError("missing min_poly", "field")
    min_poly = fblock["min_poly"]
    if not isinstance(min_poly, list) or not all(isinstance(c, int) for c in min_poly):
        raise ValidationError("min_poly must be a list of integers", "field.min_poly")
    n = len(min_poly) - 1
    basis = fblock.get("basis")
    basis_matrix = None
    if basis is not None:
        if len(basis) != n or any(len(row) != n for row in basis):
            raise ValidationError(f"basis must be a {n}x{n} matrix", "field.basis")
        basis_matrix = [
            [_as_fraction(x, f"field.basis[{i}][{j}]") for j, x in enumerate(row)]
            for i, row in enumerate(basis)
        ]
    try:
        field = build_field(
            min_poly,
            basis_matrix,
            precision=int(fblock["precision"]),
            class_number_one=bool(fblock["class_number_one"]),
        )
    except HasseLabError as exc:
        raise ValidationError(str(exc), "field")
    fblock["basis"] = [
        [str(x) for x in row] for row in field.basis_matrix
    ]

    forms_block = raw.get("forms")
    formsys = None
    if forms_block is not None:
        if "degree" not in forms_block or "variables" not in forms_block:
            raise ValidationError("forms needs degree and variables", "forms")
        d = int(forms_block["degree"])
        s = int(forms_block["variables"])
        flist = forms_block.get("F")
        if not flist:
            raise ValidationError("need at least one [[forms.F]] block", "forms.F")
        coeff_dicts = []
        echo_forms = []
        for fi, entry in enumerate(flist):
            monomials = entry.get("monomials")
            if not monomials:
                raise ValidationError("form without monomials", f"forms.F[{fi}]")
            out = {}
            echo_monos = []
            for mi, mono in enumerate(monomials):
                loc = f"forms.F[{fi}].monomials[{mi}]"
                exps = mono.get("exps")
                if not isinstance(exps, list) or len(exps) != s:
                    raise ValidationError(f"exps must be a list of {s} integers", loc)
                coeff = mono.get("coeff")
                if not isinstance(coeff, list) or len(coeff) != field.n:
                    raise ValidationError(
                        f"coeff must give {field.n} coordinates over the basis", loc
                    )
                coords = [_as_fraction(x, loc) for x in coeff]
                out[tuple(int(e) for e in exps)] = field.element(coords)
                echo_monos.append(
                    {"exps": [int(e) for e in exps], "coeff": [str(x) for x in coords]}
                )
            coeff_dicts.append(out)
            echo_forms.append({"monomials": echo_monos})
        try:
            formsys = FormSystem(field, d, s, coeff_dicts)
        except HasseLabError as exc:
            raise ValidationError(str(exc), "forms")
        data["forms"] = {"degree": d, "variables": s, "F": echo_forms}

    for name, key in (
        ("counting", "point_budget"),
        ("local", "budget"),
        ("hasse", "local_budget"),
    ):
        if int(data[name][key]) <= 0:
            raise ValidationError("budget must be positive", f"{name}.{key}")
    theta = _as_fraction(data["arcs"]["theta"], "arcs.theta")
    if not 0 < theta <= 1:
        raise ValidationError("theta must lie in (0, 1]", "arcs.theta")
    data["arcs"]["theta"] = str(theta)
    return Config(data=data, field=field, forms=formsys)


def emit_config(config):
    """Restricted TOML writer for validated configs (round-trips through parse)."""
    out = []

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return repr(v)
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        raise ValidationError(f"cannot emit {v!r}")

    for section in sorted(config.data):
        block = config.data[section]
        if section == "forms":
            out.append("[forms]")
            out.append(f"degree = {block['degree']}")
            out.append(f"variables = {block['variables']}")
            for f in block["F"]:
                out.append("[[forms.F]]")
                rows = ", ".join(
                    "{exps = %s, coeff = %s}" % (fmt(m["exps"]), fmt(m["coeff"]))
                    for m in f["monomials"]
                )
                out.append(f"monomials = [{rows}]")
            continue
        out.append(f"[{section}]")
        for key in sorted(block):
            v = block[key]
            if v is None:
                continue
            out.append(f"{key} = {fmt(v)}")
    return "\n".join(out) + "\n"


@dataclass
class ExperimentReport:
    """Structured experiment record; serializes losslessly and deterministically."""

    config_echo: dict
    field_summary: dict
    results: dict = dc_field(default_factory=dict)
    provenance: dict = dc_field(default_factory=dict)

    def finish(self, started, extra=None):
        self.provenance.setdefault("version", __version__)
        self.provenance["wall_time_s"] = round(time.time() - started, 3)
        if extra:
            self.provenance.update(extra)
        return self


def field_summary(field):
    return {
        "degree": field.n,
        "min_poly": list(field.min_poly),
        "n1": field.n1,
        "n2": field.n2,
        "disc_field": field.disc_field,
        "index": field.index,
        "precision": field.precision,
        "class_number_one": field.class_number_one,
        "embeddings": [[z.real, z.imag] for z in field.embeddings],
    }


def float_entry(value, error=None, method=None, **extra):
    """Floating value with mandatory provenance."""
    out = {"value": float(value)}
    if error is not None:
        out["error"] = float(error)
    if method is not None:
        out["method"] = method
    out.update(extra)
    return out


def _encode(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, tuple):
        return list(obj)
    if hasattr(obj, "__dict__"):
        return obj.__dict__
    raise TypeError(f"cannot serialize {type(obj)}")


def report_to_dict(report):
    return {
        "config": report.config_echo,
        "field": report.field_summary,
        "results": report.results,
        "provenance": report.provenance,
    }


def emit_report(report, fmt="json"):
    """Serialize a report; deterministic key order.  CSV keeps the tabular blocks."""
    if fmt == "json":
        text = json.dumps(
            report_to_dict(report), sort_keys=True, default=_encode, indent=1
        )
        return text.encode() + b"\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        counts = report.results.get("counts")
        if counts:
            writer.writerow(["P", "N", "ratio", "elapsed_s"])
            for row in counts:
                writer.writerow([row["P"], row["N"], row["ratio"]["value"], row["elapsed_s"]])
        local_rows = report.results.get("local_factors")
        if local_rows:
            if counts:
                writer.writerow([])
            writer.writerow(["p", "f", "e", "a_seq", "stabilized"])
            for row in local_rows:
                writer.writerow(
                    [
                        row["p"],
                        row["f"],
                        row["e"],
                        ";".join(str(a) for a in row["a_seq"]),
                        row["stabilized"],
                    ]
                )
        return buf.getvalue().encode()
    raise ValidationError(f"unknown format {fmt!r}")
