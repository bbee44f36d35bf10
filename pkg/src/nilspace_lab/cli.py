"""Configuration-driven command line front end.

Configs are JSON documents validated against a published schema; reports are
JSON with a deterministic payload (identical config and seed give a
byte-identical payload; timing lives outside it).  Exit codes: 0 success
(including "no section exists" style answers), 1 config violation, 2
structural failure, 3 resource limit.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import jsonschema
import numpy as np

from . import __version__
from .cubespace import (Cubespace, check_axioms, dk_structure,
                        linear_structure, point_space, product)
from .errors import (InvalidArgumentError, LabError, ResourceLimitError,
                     StructuralFailureError)
from .extensions import (Extension, cyclic_quotient_extension, find_section,
                         lift_translation, trans_group, trivial_extension)
from .bundles import (factor_nilspace, sim_classes, structure_group,
                      verify_degree_bundle)
from .free import (PolyMap, factor_to_finite, lift_morphism,
                   mod_free_nilspace)
from .gowers import (GroupFunction, decompose_phase, gowers_norm,
                     inverse_search, phase_check, phase_poly_from_coeffs,
                     project_phase, tz_residue_check)
from .groups import Character, characters, height_extension, make_group

COMMANDS = [
    "verify-axioms", "factor", "structure-groups", "verify-bundle",
    "verify-extension", "find-section", "trans-group", "lift-translation",
    "factor-to-finite", "lift-morphism", "gowers-norm", "phase-check",
    "project-phase", "decompose-phase", "inverse-search", "tz-check",
]

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": COMMANDS},
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "budgets": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "candidates": {"type": "integer", "minimum": 1},
                "search": {"type": "integer", "minimum": 1},
            },
        },
    },
}


class ConfigError(Exception):
    """Config failed validation; carries a location string."""

    def __init__(self, message, location="$"):
        super().__init__(message)
        self.location = location


def _jsonable(obj):
    if isinstance(obj, dict):
        return {_key(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = list(obj) if not isinstance(obj, (set, frozenset)) \
            else sorted(obj, key=repr)
        return [_jsonable(v) for v in items]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, float, str)):
        return obj
    return repr(obj)


def _key(k):
    if isinstance(k, (tuple, frozenset)):
        return json.dumps(_jsonable(k))
    if isinstance(k, (int, str)):
        return str(k)
    return repr(k)


# ---------------------------------------------------------------------------
# descriptor parsing


def parse_space(desc, location="$.space") -> Cubespace:
    if not isinstance(desc, dict) or len(desc) != 1:
        raise ConfigError("space descriptor must have exactly one key", location)
    kind, body = next(iter(desc.items()))
    if kind == "dk":
        return dk_structure(make_group(body["group"]), int(body["k"]))
    if kind == "linear":
        return linear_structure(make_group(body))
    if kind == "product":
        if len(body) != 2:
            raise ConfigError("product takes two spaces", location)
        return product(parse_space(body[0], location + "[0]"),
                       parse_space(body[1], location + "[1]"))
    if kind == "mod_free":
        return mod_free_nilspace(int(body["modulus"]), body["ranks"])
    if kind == "point":
        return point_space()
    raise ConfigError(f"unknown space kind {kind!r}", location)


def parse_phase(text, location="$") -> Fraction:
    try:
        return Fraction(str(text)) % 1
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad phase literal {text!r}", location)


def parse_function(desc, location="$.function") -> GroupFunction:
    if not isinstance(desc, dict) or "group" not in desc:
        raise ConfigError("function descriptor needs a group", location)
    G = make_group(desc["group"])
    body = {k: v for k, v in desc.items() if k != "group"}
    if len(body) != 1:
        raise ConfigError("function descriptor needs exactly one payload key",
                          location)
    kind, val = next(iter(body.items()))
    if kind == "constant":
        return GroupFunction.constant(G, parse_phase(val, location))
    if kind == "phases":
        return GroupFunction.from_phases(G, [parse_phase(p, location)
                                             for p in val])
    if kind == "values":
        vals = np.array([complex(re, im) for re, im in val])
        return GroupFunction(G, vals)
    if kind == "character":
        chi = Character(G, tuple(Fraction(int(t), n) for t, n in
                                 zip(val, G.cyclic_orders)))
        return GroupFunction.from_character(chi)
    if kind == "binomial_phase":
        from .gowers import binomial_phase_function
        coeffs = {_parse_index(r, len(G.cyclic_orders), location):
                  parse_phase(th, location) for r, th in val.items()}
        return binomial_phase_function(G, coeffs)
    if kind == "random_unimodular":
        return GroupFunction.random_unimodular(G, int(val["seed"]))
    raise ConfigError(f"unknown function kind {kind!r}", location)


def _parse_index(text, arity, location):
    parts = tuple(int(x) for x in str(text).split(","))
    if len(parts) != arity:
        raise ConfigError(f"multi-index {text!r} has wrong arity", location)
    return parts


def parse_polymap(desc, location="$.polymap") -> PolyMap:
    target = make_group(desc["target"])
    arity = int(desc["arity"])
    coeffs = {_parse_index(r, arity, location): tuple(c)
              for r, c in desc["coeffs"].items()}
    return PolyMap.from_dict(arity, target, coeffs)


def parse_cube_extension(desc, location="$.extension") -> Extension:
    if not isinstance(desc, dict) or len(desc) != 1:
        raise ConfigError("extension descriptor must have exactly one key",
                          location)
    kind, body = next(iter(desc.items()))
    if kind == "trivial":
        return trivial_extension(parse_space(body["base"], location),
                                 make_group(body["group"]), int(body["k"]))
    if kind == "quotient":
        return cyclic_quotient_extension(body["total"], body["base"],
                                         int(body["k"]))
    raise ConfigError(f"unknown extension kind {kind!r}", location)


def parse_point(obj) -> tuple:
    return tuple(int(x) for x in obj)


def parse_table(pairs, location="$.table") -> dict:
    try:
        return {parse_point(a): parse_point(b) for a, b in pairs}
    except (TypeError, ValueError):
        raise ConfigError("table must be a list of [point, point] pairs",
                          location)


# ---------------------------------------------------------------------------
# command handlers


def _cmd_verify_axioms(params, ctx):
    space = parse_space(params["space"])
    rep = check_axioms(space, int(params["n_upto"]), ctx["budget"])
    status = "ok" if rep.all_ok else "structural-failure"
    return status, {
        "composition_ok": rep.composition_ok, "ergodic_ok": rep.ergodic_ok,
        "gluing_ok": rep.gluing_ok, "completion_counts": rep.completion_counts,
        "kstep": rep.kstep, "counterexample": rep.counterexample,
        "notes": rep.notes,
    }


def _cmd_factor(params, ctx):
    space = parse_space(params["space"])
    i = int(params["i"])
    F, proj = factor_nilspace(space, i, budget=ctx["budget"])
    return "ok", {
        "classes": [list(c) for c in F.ground],
        "class_count": len(F.ground),
        "projection": [[a, b] for a, b in proj.items()],
    }


def _cmd_structure_groups(params, ctx):
    space = parse_space(params["space"])
    k = int(params["k"])
    levels = [int(params["i"])] if "i" in params else list(range(1, k + 1))
    out = []
    for i in levels:
        sg = structure_group(space, i, k=k, budget=ctx["budget"])
        out.append({"level": i,
                    "invariant_factors": list(sg.group.invariant_factors),
                    "order": sg.group.order})
    return "ok", {"groups": out}


def _cmd_verify_bundle(params, ctx):
    space = parse_space(params["space"])
    bd = verify_degree_bundle(space, k=int(params["k"]), budget=ctx["budget"])
    return "ok", {
        "kstep": bd.kstep,
        "structure_groups": [list(sg.group.invariant_factors)
                             for sg in bd.structure_groups],
        "dims_checked": bd.dims_checked,
    }


def _cmd_verify_extension(params, ctx):
    ext = parse_cube_extension(params["extension"])
    return "ok", {
        "degree": ext.degree, "group": list(ext.group.cyclic_orders),
        "total_size": len(ext.total.ground), "base_size": len(ext.base.ground),
        "certificate": ext.certificate,
    }


def _cmd_find_section(params, ctx):
    ext = parse_cube_extension(params["extension"])
    res = find_section(ext, budget=ctx["budget"])
    return "ok", {
        "found": res.found,
        "section": [[a, b] for a, b in sorted(res.section.items())]
        if res.found else None,
        "candidates_checked": res.candidates_checked,
        "exhausted": res.exhausted, "n_upto": res.n_upto,
    }


def _cmd_trans_group(params, ctx):
    space = parse_space(params["space"])
    tg = trans_group(space, int(params["i"]), budget=ctx["budget"])
    return "ok", {
        "count": len(tg.translations),
        "closure_ok": tg.closure_ok,
        "higher_contained": tg.higher_contained,
        "candidates_checked": tg.candidates_checked,
        "translations": [sorted(t.table.items()) for t in tg.translations],
    }


def _cmd_lift_translation(params, ctx):
    ext = parse_cube_extension(params["extension"])
    alpha = parse_table(params["alpha"])
    res = lift_translation(alpha, ext, int(params["i"]), budget=ctx["budget"])
    return "ok", {
        "found": res.found,
        "lift": sorted(res.lift.table.items()) if res.found else None,
        "candidates_checked": res.candidates_checked,
        "exhausted": res.exhausted, "strategy": res.strategy,
    }


def _cmd_factor_to_finite(params, ctx):
    space = parse_space(params["space"])
    res = factor_to_finite(space, k=int(params["k"]),
                           alpha_cap=int(params.get("alpha_cap", 3)),
                           budget=ctx["budget"])
    return "ok", {
        "ranks": list(res.ranks), "alpha": res.alpha,
        "exponent": res.exponent, "modulus": res.exponent ** res.alpha,
        "map": [[a, b] for a, b in sorted(res.h.items())],
    }


def _cmd_lift_morphism(params, ctx):
    group = make_group(params["group"])
    space = parse_space(params["space"])
    phi = parse_table(params["phi"])
    res = lift_morphism(phi, group, space, ext_cap=int(params.get("ext_cap", 3)),
                        k=int(params["k"]), budget=ctx["budget"])
    return "ok", {
        "height": res.height,
        "total_group": list(res.extension.total.cyclic_orders),
        "fprime_components": list(res.fprime.components),
        "psi": [[a, b] for a, b in sorted(res.psi.items())],
        "beta": [[a, b] for a, b in sorted(res.beta.items())],
    }


def _cmd_gowers_norm(params, ctx):
    f = parse_function(params["function"])
    value = gowers_norm(f, int(params["d"]), ctx["budget"])
    return "ok", {"value": value, "d": int(params["d"])}


def _cmd_phase_check(params, ctx):
    f = parse_function(params["function"])
    chk = phase_check(f, int(params["k"]), ctx["budget"])
    return "ok", {
        "is_phase_polynomial": chk.ok, "degree": chk.degree,
        "tuples_checked": chk.tuples_checked,
        "failing_tuple": chk.failing_tuple,
        "failing_point": chk.failing_point,
    }


def _parse_group_extension(params):
    base = make_group(params["base"])
    return height_extension(base, int(params["height"]))


def _cmd_project_phase(params, ctx):
    ext = _parse_group_extension(params["extension"])
    f = parse_function(params["function"])
    out = project_phase(f, ext)
    return "ok", {"values": [[v.real, v.imag] for v in out.values]}


def _cmd_decompose_phase(params, ctx):
    from .gowers import certify_phase_polynomial
    f = parse_function(params["function"])
    k = int(params["k"])
    phi = certify_phase_polynomial(f, k, ctx["budget"])
    res = decompose_phase(phi, int(params["q"]), ctx["budget"])
    return "ok", {
        "found": res.found, "mode": res.mode,
        "phi1_phases": [str(p) for p in res.phi1.phases] if res.found else None,
        "phi2_phases": [str(p) for p in res.phi2.exact_phases]
        if res.found else None,
        "candidates_checked": res.candidates_checked,
    }


def _cmd_inverse_search(params, ctx):
    f = parse_function(params["function"])
    rep = inverse_search(
        f, k=int(params["k"]), q=int(params["q"]),
        ext_cap=int(params.get("ext_cap", 2)),
        budget=int(params.get("budget", ctx["search_budget"])),
        seed=ctx["seed"],
        norm_floor=float(params.get("norm_floor", 0.0)),
        delta_threshold=float(params.get("delta", 0.0)))
    return "ok", rep.payload()


def _cmd_tz_check(params, ctx):
    p4 = parse_polymap(params["polymap"])
    ok = tz_residue_check(p4, int(params["p"]), int(params["k"]),
                          radius=int(params["radius"])
                          if "radius" in params else None)
    return "ok", {"invariant": ok}


HANDLERS = {
    "verify-axioms": _cmd_verify_axioms,
    "factor": _cmd_factor,
    "structure-groups": _cmd_structure_groups,
    "verify-bundle": _cmd_verify_bundle,
    "verify-extension": _cmd_verify_extension,
    "find-section": _cmd_find_section,
    "trans-group": _cmd_trans_group,
    "lift-translation": _cmd_lift_translation,
    "factor-to-finite": _cmd_factor_to_finite,
    "lift-morphism": _cmd_lift_morphism,
    "gowers-norm": _cmd_gowers_norm,
    "phase-check": _cmd_phase_check,
    "project-phase": _cmd_project_phase,
    "decompose-phase": _cmd_decompose_phase,
    "inverse-search": _cmd_inverse_search,
    "tz-check": _cmd_tz_check,
}


@dataclass
class Report:
    """Machine-parseable run outcome; `payload` excludes timing."""

    command: str
    config: dict
    seed: int
    status: str
    results: dict
    version: str = __version__
    timing: dict = field(default_factory=dict)
    exit_code: int = 0

    def payload(self) -> dict:
        return _jsonable({
            "version": self.version, "command": self.command,
            "seed": self.seed, "config": self.config,
            "status": self.status, "results": self.results,
        })

    def to_json(self) -> str:
        doc = self.payload()
        doc["timing"] = _jsonable(self.timing)
        return json.dumps(doc, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        lines = ["key,value"]
        flat = _flatten(self.payload()["results"])
        for k, v in flat:
            lines.append(f"{k},{json.dumps(v)}")
        return "\n".join(lines) + "\n"


def _flatten(obj, prefix=""):
    out = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            out.extend(_flatten(obj[k], f"{prefix}{k}." if prefix == ""
                                else f"{prefix}{k}."))
    elif isinstance(obj, list):
        out.append((prefix.rstrip("."), json.dumps(obj)))
    else:
        out.append((prefix.rstrip("."), obj))
    return out


def validate_config(config: dict):
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "$" + "".join(f".{p}" if isinstance(p, str) else f"[{p}]"
                             for p in exc.absolute_path)
        raise ConfigError(exc.message, path)


def run(config: dict, seed: int | None = None, budget: int | None = None,
        search_budget: int = 1 << 16, threads: int = 1) -> Report:
    """Validate, dispatch, and report; library-level entry point of the CLI."""
    validate_config(config)
    seed = config.get("seed", 0) if seed is None else seed
    budgets = config.get("budgets", {})
    ctx = {
        "seed": int(seed),
        "budget": budget if budget is not None else budgets.get("candidates"),
        "search_budget": budgets.get("search", search_budget),
        "threads": threads,
    }
    command = config["command"]
    params = config.get("params", {})
    t0 = time.perf_counter()
    try:
        status, results = HANDLERS[command](params, ctx)
        exit_code = 0 if status == "ok" else 2
    except (ConfigError, KeyError) as exc:
        raise ConfigError(str(exc)) if isinstance(exc, KeyError) else exc
    except StructuralFailureError as exc:
        status = "structural-failure"
        results = {"error": str(exc), "witness": _jsonable(exc.witness)}
        exit_code = 2
    except ResourceLimitError as exc:
        status = "resource-limit"
        results = {"error": str(exc), "needed": exc.needed,
                   "budget": exc.budget, "dimension": exc.dimension}
        exit_code = 3
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc))
    elapsed = time.perf_counter() - t0
    return Report(command=command, config=config, seed=int(seed),
                  status=status, results=_jsonable(results),
                  timing={"seconds": elapsed}, exit_code=exit_code)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nilspace-lab",
        description="Cube-structure verification and uniformity-norm experiments")
    parser.add_argument("--config", required=True, help="path to a JSON config")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker pool cap (recorded; execution is serial)")
    parser.add_argument("--budget-maps", type=int, default=None,
                        help="candidate enumeration budget")
    parser.add_argument("--out", default=None, help="report path (default stdout)")
    parser.add_argument("--format", choices=["structured", "csv"],
                        default="structured")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error at $: {exc}", file=sys.stderr)
        return 1
    try:
        report = run(config, seed=args.seed, budget=args.budget_maps,
                     threads=args.threads)
    except ConfigError as exc:
        print(f"config error at {exc.location}: {exc}", file=sys.stderr)
        return 1
    text = report.to_json() if args.format == "structured" else report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + ("\n" if not text.endswith("\n") else ""))
    else:
        print(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
