"""Command-line front end.

Every pipeline stage is a subcommand over a system definition (bundled name
or JSON path).  Reports go to stdout as JSON (or CSV for tabular data).
Exit codes: 0 success; 1 input error; 2 the mathematics rejects the request
(e.g. not a contact form); 3 an internal identity was violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .charts import Chart
from .contactgeo import hamiltonian_field, hamiltonian_of, contact_bracket
from .definitions import (bundled_names, load_definition, resolve_system,
                          serialize_definition)
from .dynamics import integrate, monitor_first_integrals, phase_portrait
from .errors import (InputError, InternalIdentityError, MathRejection,
                     ToolkitError)
from .exprcore import RationalExpr, parse_expr, to_string
from .liealgebra import classify_algebra
from .liesystems import (classify_contact_system, lie_hamiltonian,
                         no_go_check, project_conservative, reduce_level_set,
                         smallest_lie_algebra)
from .superposition import emit_superposition_system, rank_check
from .verification import run_all, sl2_superposition


def _field_dict(X):
    return {v: to_string(c) for v, c in zip(X.chart.variables, X.components)
            if c}


def _form_dict(form):
    return {form.key_string(idx): to_string(c)
            for idx, c in sorted(form.coeffs.items())}


def _emit(args, payload):
    print(json.dumps(payload, indent=2, default=str))
    return 0


def _emit_rows(args, rows, columns):
    if getattr(args, "format", "json") == "csv":
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        sys.stdout.write(out.getvalue())
        return 0
    return _emit(args, rows)


def _need_contact(definition):
    if definition.contact is None:
        raise InputError(
            f"system {definition.name!r} declares no contact form")
    return definition.contact


def cmd_check_contact(args):
    d = resolve_system(args.system)
    S = _need_contact(d)
    return _emit(args, {
        "system": d.name,
        "contact": True,
        "n": S.n,
        "eta": _form_dict(S.eta),
        "reeb": _field_dict(S.reeb),
        "volume": _form_dict(S.volume),
        "degeneracy_locus": to_string(
            RationalExpr.from_poly(S.chart, S.vanishing_locus)),
    })


def cmd_reeb(args):
    d = resolve_system(args.system)
    S = _need_contact(d)
    return _emit(args, {"system": d.name, "reeb": _field_dict(S.reeb)})


def cmd_ham_vf(args):
    d = resolve_system(args.system)
    S = _need_contact(d)
    if args.hamiltonian:
        h = parse_expr(args.hamiltonian, d.chart)
        pair = hamiltonian_field(S, h)
        return _emit(args, {
            "system": d.name,
            "hamiltonian": to_string(h),
            "field": _field_dict(pair.field),
            "reeb_derivative": to_string(pair.reeb_derivative),
            "good": pair.reeb_derivative.is_zero(),
        })
    if args.field:
        X = d.fields.get(args.field)
        if X is None:
            raise InputError(f"unknown field {args.field!r}")
        h = hamiltonian_of(S, X)
        return _emit(args, {"system": d.name, "field": args.field,
                            "hamiltonian": to_string(h)})
    raise InputError("provide --hamiltonian EXPR or --field NAME")


def cmd_bracket(args):
    d = resolve_system(args.system)
    S = _need_contact(d)
    f = parse_expr(args.f, d.chart)
    g = parse_expr(args.g, d.chart)
    return _emit(args, {
        "system": d.name, "f": to_string(f), "g": to_string(g),
        "bracket": to_string(contact_bracket(S, f, g))})


def cmd_classify3d(args):
    poly, report = classify_algebra(args.algebra)
    return _emit(args, report)


def cmd_closure(args):
    d = resolve_system(args.system)
    seeds = d.generator_fields() if d.generator_names else \
        list(d.fields.values())
    sys_closed = smallest_lie_algebra(d.chart, seeds, max_dim=args.max_dim)
    rows = []
    for i in range(sys_closed.dim):
        for j in range(i + 1, sys_closed.dim):
            combo = {
                sys_closed.names[k]: str(
                    sys_closed.structure.fraction_entry(i, j, k))
                for k in range(sys_closed.dim)
                if sys_closed.structure.fraction_entry(i, j, k)}
            rows.append([sys_closed.names[i], sys_closed.names[j], combo])
    return _emit(args, {
        "system": d.name,
        "dimension": sys_closed.dim,
        "generators": {n: _field_dict(X) for n, X in
                       zip(sys_closed.names, sys_closed.generators)},
        "structure_constants": rows,
    })


def cmd_classify_system(args):
    d = resolve_system(args.system)
    _need_contact(d)
    result = classify_contact_system(d.system)
    payload = {"system": d.name, "kind": result.kind}
    if result.kind == "not_hamiltonian":
        payload["offender"] = result.offender
        payload["residual"] = _field_dict(result.residual)
    else:
        payload["hamiltonians"] = [to_string(h) for h in result.hamiltonians]
        payload["reeb_invariant"] = list(result.good_flags)
        if d.system.coefficients is not None:
            chart_t, h_t = lie_hamiltonian(d.system, result.hamiltonians)
            payload["lie_hamiltonian"] = to_string(h_t)
    payload["no_go"] = no_go_check(d.system)["message"]
    return _emit(args, payload)


def cmd_project(args):
    d = resolve_system(args.system)
    _need_contact(d)
    invariant = (args.invariant_vars.split(",") if args.invariant_vars
                 else d.projection_spec.get("invariant_vars"))
    if not invariant:
        raise InputError("no invariant variables given (flag or definition)")
    proj = project_conservative(d.system, invariant)
    return _emit(args, {
        "system": d.name,
        "chart": list(proj.chart.variables),
        "omega": _form_dict(proj.omega),
        "generators": {n: _field_dict(X)
                       for n, X in zip(proj.names, proj.generators)},
        "hamiltonians": [to_string(h) for h in proj.hamiltonians],
    })


def cmd_momentum(args):
    d = resolve_system(args.system)
    _need_contact(d)
    mm = d.build_momentum_map()
    return _emit(args, {
        "system": d.name,
        "frame": list(mm.frame_names),
        "components": [to_string(c) for c in mm.components],
        "note": "abstract algebra is the opposite of the frame closure "
                "(left-action convention); morphism verified exactly",
    })


def cmd_reduce(args):
    d = resolve_system(args.system)
    _need_contact(d)
    mm = d.build_momentum_map()
    spec = d.momentum_spec
    mu = ([Fraction(m) for m in args.mu.split(",")] if args.mu
          else [Fraction(m) for m in spec.get("mu", ())])
    fixed = spec.get("fixed_vars")
    if not fixed:
        raise InputError("definition has no fixed_vars for reduction")
    red = reduce_level_set(mm, mu, fixed, sys=d.system)
    payload = {
        "system": d.name,
        "level": [str(m) for m in mu],
        "fixed_values": {k: str(v) for k, v in red.fixed_values.items()},
        "chart": list(red.structure.chart.variables),
        "eta": _form_dict(red.structure.eta),
        "reeb": _field_dict(red.structure.reeb),
        "dropped_generators": list(red.dropped_generators),
    }
    if red.system is not None:
        payload["generators"] = {
            n: _field_dict(X)
            for n, X in zip(red.system.names, red.system.generators)}
        payload["hamiltonians"] = [to_string(h)
                                   for h in red.system.hamiltonians]
        payload["classification"] = classify_contact_system(red.system).kind
    return _emit(args, payload)


def cmd_prolong(args):
    from .superposition import Prolongation
    d = resolve_system(args.system)
    prol = Prolongation(d.chart, args.copies)
    payload = {
        "system": d.name,
        "copies": args.copies,
        "chart": list(prol.chart.variables),
        "generators": {n: _field_dict(prol.field(X))
                       for n, X in zip(d.generator_names,
                                       d.generator_fields())},
    }
    if d.system is not None and d.system.hamiltonians is not None:
        payload["hamiltonians"] = [
            to_string(prol.function(h)) for h in d.system.hamiltonians]
    return _emit(args, payload)


def cmd_superposition(args):
    d = resolve_system(args.system)
    if not d.superposition_spec:
        raise InputError(
            f"system {d.name!r} declares no superposition block")
    from .superposition import Prolongation, casimir_integral, \
        generate_integrals
    prol = Prolongation(d.chart, args.copies)
    hams = [prol.function(h) for h in d.system.hamiltonians]
    slots = Chart("slots", tuple(f"v{i+1}" for i in range(len(hams))))
    casimir = parse_expr(d.superposition_spec["casimir"], slots).num
    seed_integral = casimir_integral(hams, casimir)
    annihilators = [prol.field(X) for X in d.generator_fields()]
    symmetries = [prol.field(d.fields[n])
                  for n in d.superposition_spec["symmetries"]]
    integral_set = generate_integrals(seed_integral, symmetries, annihilators,
                                      d.chart.dimension)
    record = emit_superposition_system(integral_set, prol.copy_variables(1))
    record["system"] = d.name
    record["complete"] = integral_set.complete
    if integral_set.diagnostic:
        record["diagnostic"] = integral_set.diagnostic
    return _emit(args, record)


def cmd_integrate(args):
    d = resolve_system(args.system)
    if d.system is None or d.system.coefficients is None:
        raise InputError("system has no generators/coefficients to integrate")
    x0 = [float(x) for x in args.x0.split(",")]
    traj = integrate(d.system, x0, args.t0, args.t1, args.step, d.name)
    monitors = []
    if args.monitor:
        exprs = [parse_expr(m, d.chart) for m in args.monitor]
        monitors = monitor_first_integrals(traj, exprs, args.monitor)
    columns = ["t"] + list(d.chart.variables) + [m.quantity for m in monitors]
    rows = []
    for k, t in enumerate(traj.times):
        row = {"t": float(t)}
        row.update({v: float(traj.states[k, i])
                    for i, v in enumerate(d.chart.variables)})
        for m in monitors:
            row[m.quantity] = float(m.values[k])
        rows.append(row)
    if args.format == "json":
        return _emit(args, {
            "system": d.name, "step": traj.step, "method": traj.method,
            "drift": {m.quantity: m.max_rel_drift for m in monitors},
            "rows": rows})
    return _emit_rows(args, rows, columns)


def cmd_portrait(args):
    d = resolve_system(args.system)
    ranges = {}
    for spec in args.range or ():
        try:
            var, window = spec.split("=")
            lo, hi, count = window.split(":")
        except ValueError:
            raise InputError("range format: var=lo:hi:count") from None
        ranges[var] = (float(lo), float(hi), int(count))
    rows = phase_portrait(d.system, ranges, args.t_sample)
    columns = (list(d.chart.variables)
               + [f"d{v}" for v in d.chart.variables] + ["pole"])
    return _emit_rows(args, rows, columns)


def cmd_verify_paper(args):
    results = run_all()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(json.dumps({"passed": sum(r.passed for r in results),
                      "failed": sum(not r.passed for r in results)}))
    return 0 if ok else 3


def cmd_systems(args):
    payload = {}
    for name in bundled_names():
        d = resolve_system(name)
        payload[name] = d.description
    return _emit(args, payload)


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise InputError(message)


def build_parser():
    parser = _Parser(prog="contactlie",
                     description="exact contact-geometry toolkit for "
                                 "Lie systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(func=fn)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    for name, fn, needs_system in (
            ("check-contact", cmd_check_contact, True),
            ("reeb", cmd_reeb, True),
            ("classify-system", cmd_classify_system, True),
            ("momentum", cmd_momentum, True),
            ("systems", cmd_systems, False)):
        p = add(name, fn)
        if needs_system:
            p.add_argument("--system", required=True,
                           help="bundled name or definition path")

    p = add("bracket", cmd_bracket)
    p.add_argument("--system", required=True)
    p.add_argument("--f", required=True, help="first function")
    p.add_argument("--g", required=True, help="second function")

    p = add("ham-vf", cmd_ham_vf)
    p.add_argument("--system", required=True)
    p.add_argument("--hamiltonian", help="expression on the system chart")
    p.add_argument("--field", help="named field: recover its Hamiltonian")

    p = sub.add_parser("classify3d")
    p.set_defaults(func=cmd_classify3d)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--algebra", required=True)

    p = add("closure", cmd_closure)
    p.add_argument("--system", required=True)
    p.add_argument("--max-dim", type=int, default=10)

    p = add("project", cmd_project)
    p.add_argument("--system", required=True)
    p.add_argument("--invariant-vars", help="comma-separated kept variables")

    p = add("reduce", cmd_reduce)
    p.add_argument("--system", required=True)
    p.add_argument("--mu", help="comma-separated level values")

    p = add("prolong", cmd_prolong)
    p.add_argument("--system", required=True)
    p.add_argument("--copies", type=int, default=2)

    p = add("superposition", cmd_superposition)
    p.add_argument("--system", required=True)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)

    p = add("integrate", cmd_integrate)
    p.add_argument("--system", required=True)
    p.add_argument("--x0", required=True, help="comma-separated floats")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--monitor", action="append",
                   help="expression to track along the path (repeatable)")

    p = add("portrait", cmd_portrait)
    p.add_argument("--system", required=True)
    p.add_argument("--range", action="append",
                   help="var=lo:hi:count (one per variable)")
    p.add_argument("--t-sample", type=float, default=0.0)

    p = sub.add_parser("verify-paper")
    p.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InternalIdentityError as err:
        print(json.dumps({"error": "internal identity violation",
                          "detail": str(err)}))
        return 3
    except MathRejection as err:
        print(json.dumps({"error": "mathematical rejection",
                          "detail": str(err)}))
        return 2
    except (ToolkitError, OSError, ValueError) as err:
        print(json.dumps({"error": "input error", "detail": str(err)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
