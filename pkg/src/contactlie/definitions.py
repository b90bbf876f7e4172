"""System definitions: the JSON schema every bundled example ships in.

A definition declares a chart, named vector fields and one-forms, a contact
form reference, generators with time coefficients, optional Hamiltonians,
optional structure constants, coordinate maps with pullback checks, and
optional momentum/projection/superposition blocks.  Loading validates
everything eagerly: expressions must parse on the declared chart, declared
constants must match the brackets, Hamiltonians must reconstruct their
fields, and pullback checks must hold syntactically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .cartan import CoordinateMap, KForm, VectorField, pullback
from .charts import Chart, ExpAtom
from .contactgeo import check_contact
from .errors import InputError, SchemaError, ToolkitError
from .exprcore import parse_expr, to_string
from .liealgebra import StructureConstants
from .liesystems import TIME_CHART, VGSystem, momentum_map
from .superposition import Prolongation


def _ctx(path, fn, *args):
    try:
        return fn(*args)
    except SchemaError:
        raise
    except ToolkitError as err:
        raise SchemaError(str(err), path) from err
    except (KeyError, TypeError, ValueError) as err:
        raise SchemaError(f"{type(err).__name__}: {err}", path) from err


def _require(data, key, path, kind=None):
    if key not in data:
        raise SchemaError(f"missing required key {key!r}", path)
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(
            f"{key!r} must be {kind.__name__}, got {type(value).__name__}",
            f"{path}/{key}")
    return value


@dataclass
class SystemDefinition:
    name: str
    description: str
    chart: Chart
    fields: dict
    forms: dict
    contact_name: str
    contact: object
    generator_names: tuple
    system: object                 # VGSystem or None
    symmetry_names: tuple
    maps: dict
    momentum_spec: dict
    projection_spec: dict
    superposition_spec: dict
    raw: dict

    def generator_fields(self):
        return [self.fields[n] for n in self.generator_names]

    def symmetry_fields(self):
        return [self.fields[n] for n in self.symmetry_names]

    def build_momentum_map(self):
        if not self.momentum_spec:
            raise InputError(f"system {self.name!r} declares no momentum block")
        frame_names = self.momentum_spec["frame"]
        return momentum_map(self.contact,
                            [self.fields[n] for n in frame_names],
                            names=frame_names)


def _parse_chart(data, path):
    variables = tuple(_require(data, "variables", path, list))
    atoms = []
    for i, a in enumerate(data.get("exp_atoms", [])):
        atoms.append(_ctx(f"{path}/exp_atoms/{i}", lambda a=a: ExpAtom(
            a["name"], a["base"], Fraction(a["scale"]))))
    return _ctx(path, Chart, data.get("id", "chart"), variables, tuple(atoms))


def _parse_map(chart, name, data, path):
    target = _parse_chart(_require(data, "target_chart", path, dict),
                          f"{path}/target_chart")
    comp_data = _require(data, "components", path, dict)
    components = []
    for v in target.variables:
        if v not in comp_data:
            raise SchemaError(f"missing component for target variable {v!r}",
                              f"{path}/components")
        entry = comp_data[v]
        if isinstance(entry, dict):
            if set(entry) != {"log"}:
                raise SchemaError("component object must be {'log': expr}",
                                  f"{path}/components/{v}")
            g = _ctx(f"{path}/components/{v}/log", parse_expr, entry["log"],
                     chart)
            components.append(("log", g))
        else:
            components.append(_ctx(f"{path}/components/{v}", parse_expr,
                                   entry, chart))
    cmap = CoordinateMap(chart, target, components)
    checks = []
    for i, chk in enumerate(data.get("pullback_checks", [])):
        cpath = f"{path}/pullback_checks/{i}"
        target_form = _ctx(cpath, KForm.from_strings, target, 1,
                           _require(chk, "target_form", cpath, dict))
        checks.append((target_form, _require(chk, "equals", cpath, str)))
    return cmap, checks


def load_definition(source):
    """Load and validate a definition from a path, dict, or bundled name."""
    if isinstance(source, dict):
        data = source
        origin = data.get("name", "<dict>")
    else:
        text = Path(source).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise SchemaError(f"invalid JSON: {err}", "/") from err
        origin = str(source)
    if not isinstance(data, dict):
        raise SchemaError("definition must be a JSON object", "/")

    name = data.get("name", Path(str(origin)).stem)
    chart = _parse_chart(_require(data, "chart", "/", dict), "/chart")

    fields = {}
    for fname, comps in data.get("vector_fields", {}).items():
        path = f"/vector_fields/{fname}"
        if not isinstance(comps, list) or len(comps) != chart.dimension:
            raise SchemaError(
                f"expected {chart.dimension} component expressions", path)
        parsed = [_ctx(f"{path}/{i}", parse_expr, c, chart)
                  for i, c in enumerate(comps)]
        fields[fname] = VectorField(chart, parsed)

    forms = {}
    for oname, coeffs in data.get("one_forms", {}).items():
        forms[oname] = _ctx(f"/one_forms/{oname}", KForm.from_strings,
                            chart, 1, coeffs)

    contact = None
    contact_name = data.get("contact_form")
    if contact_name is not None:
        if contact_name not in forms:
            raise SchemaError(f"contact_form {contact_name!r} is not a "
                              "declared one-form", "/contact_form")
        contact = _ctx("/contact_form", check_contact, chart,
                       forms[contact_name])

    generator_names = tuple(data.get("generators", ()))
    for gname in generator_names:
        if gname not in fields:
            raise SchemaError(f"generator {gname!r} is not a declared field",
                              "/generators")

    coefficients = None
    if "coefficients" in data:
        coeff_data = _require(data, "coefficients", "/", list)
        if len(coeff_data) != len(generator_names):
            raise SchemaError("one coefficient per generator required",
                              "/coefficients")
        coefficients = tuple(
            _ctx(f"/coefficients/{i}", parse_expr, c, TIME_CHART)
            for i, c in enumerate(coeff_data))

    structure = None
    if "structure_constants" in data:
        table = {}
        rows = _require(data, "structure_constants", "/", list)
        index = {g: i for i, g in enumerate(generator_names)}
        for r, row in enumerate(rows):
            path = f"/structure_constants/{r}"
            if not (isinstance(row, list) and len(row) == 3
                    and isinstance(row[2], dict)):
                raise SchemaError(
                    'expected ["Xi", "Xj", {"Xk": coeff, ...}]', path)
            left, right, combo = row
            if left not in index or right not in index:
                raise SchemaError("bracket names must be generators", path)
            vec = [Fraction(0)] * len(generator_names)
            for gname, coeff in combo.items():
                if gname not in index:
                    raise SchemaError(f"unknown generator {gname!r}", path)
                vec[index[gname]] = _ctx(path, Fraction, coeff)
            table[(index[left], index[right])] = vec
        structure = _ctx("/structure_constants", StructureConstants,
                         len(generator_names), table, generator_names)

    hamiltonians = None
    if "hamiltonians" in data:
        ham_data = _require(data, "hamiltonians", "/", list)
        if len(ham_data) != len(generator_names):
            raise SchemaError("one Hamiltonian per generator required",
                              "/hamiltonians")
        hamiltonians = tuple(
            _ctx(f"/hamiltonians/{i}", parse_expr, h, chart)
            for i, h in enumerate(ham_data))

    system = None
    if generator_names:
        system = _ctx("/generators", VGSystem, chart, generator_names,
                      [fields[g] for g in generator_names], coefficients,
                      structure, hamiltonians, contact)

    maps = {}
    for mname, mdata in data.get("coordinate_maps", {}).items():
        path = f"/coordinate_maps/{mname}"
        cmap, checks = _parse_map(chart, mname, mdata, path)
        for target_form, equals in checks:
            if equals not in forms:
                raise SchemaError(f"pullback check references unknown form "
                                  f"{equals!r}", path)
            pulled = _ctx(path, pullback, cmap, target_form)
            if pulled != forms[equals]:
                raise SchemaError(
                    f"pullback check failed: pulling back the declared "
                    f"target form does not give {equals!r}", path)
        maps[mname] = cmap

    momentum_spec = dict(data.get("momentum", {}))
    if momentum_spec:
        frame = momentum_spec.get("frame", [])
        for fname in frame:
            if fname not in fields:
                raise SchemaError(f"momentum frame field {fname!r} undefined",
                                  "/momentum/frame")
        if contact is None:
            raise SchemaError("momentum block requires a contact form",
                              "/momentum")
        # eager: frame must preserve eta and brace anti-morphically
        _ctx("/momentum", momentum_map, contact,
             [fields[n] for n in frame], tuple(frame))

    projection_spec = dict(data.get("projection", {}))
    if projection_spec:
        for v in projection_spec.get("invariant_vars", []):
            chart.var_index(v)

    superposition_spec = dict(data.get("superposition", {}))
    if superposition_spec:
        for sname in superposition_spec.get("symmetries", []):
            if sname not in fields:
                raise SchemaError(f"superposition symmetry {sname!r} "
                                  "undefined", "/superposition/symmetries")
        casimir = superposition_spec.get("casimir")
        if casimir is not None:
            slots = Chart("slots", tuple(
                f"v{i+1}" for i in range(len(generator_names))))
            expr = _ctx("/superposition/casimir", parse_expr, casimir, slots)
            if not expr.is_polynomial():
                raise SchemaError("Casimir must be polynomial in the slots",
                                  "/superposition/casimir")

    symmetry_names = tuple(data.get("symmetries", ()))
    for sname in symmetry_names:
        if sname not in fields:
            raise SchemaError(f"symmetry {sname!r} is not a declared field",
                              "/symmetries")

    return SystemDefinition(
        name=name, description=data.get("description", ""), chart=chart,
        fields=fields, forms=forms, contact_name=contact_name,
        contact=contact, generator_names=generator_names, system=system,
        symmetry_names=symmetry_names, maps=maps,
        momentum_spec=momentum_spec, projection_spec=projection_spec,
        superposition_spec=superposition_spec, raw=data)


def serialize_definition(definition):
    """Dict form rebuilt from the parsed objects; load(serialize(d)) is
    syntactically identical to d."""
    chart = definition.chart
    out = {
        "name": definition.name,
        "chart": {
            "id": chart.id,
            "variables": list(chart.variables),
        },
    }
    if definition.description:
        out["description"] = definition.description
    if chart.atoms:
        out["chart"]["exp_atoms"] = [
            {"name": a.name, "base": a.base, "scale": str(a.scale)}
            for a in chart.atoms]
    if definition.fields:
        out["vector_fields"] = {
            fname: [to_string(c) for c in f.components]
            for fname, f in definition.fields.items()}
    if definition.forms:
        out["one_forms"] = {
            oname: {f.key_string(idx): to_string(c)
                    for idx, c in sorted(f.coeffs.items())}
            for oname, f in definition.forms.items()}
    if definition.contact_name:
        out["contact_form"] = definition.contact_name
    if definition.generator_names:
        out["generators"] = list(definition.generator_names)
    sys = definition.system
    if sys is not None and sys.coefficients is not None:
        out["coefficients"] = [to_string(b) for b in sys.coefficients]
    if sys is not None and sys.hamiltonians is not None:
        out["hamiltonians"] = [to_string(h) for h in sys.hamiltonians]
    if sys is not None:
        rows = []
        for i in range(sys.dim):
            for j in range(i + 1, sys.dim):
                combo = {}
                for k in range(sys.dim):
                    coeff = sys.structure.fraction_entry(i, j, k)
                    if coeff:
                        combo[sys.names[k]] = str(coeff)
                if combo:
                    rows.append([sys.names[i], sys.names[j], combo])
        if rows:
            out["structure_constants"] = rows
    if definition.symmetry_names:
        out["symmetries"] = list(definition.symmetry_names)
    if definition.maps:
        raw_maps = definition.raw.get("coordinate_maps", {})
        out["coordinate_maps"] = {}
        for mname, cmap in definition.maps.items():
            target = cmap.target
            comps = {}
            for v, comp in zip(target.variables, cmap.components):
                if isinstance(comp, tuple):
                    comps[v] = {"log": to_string(comp[1])}
                else:
                    comps[v] = to_string(comp)
            entry = {
                "target_chart": {
                    "id": target.id,
                    "variables": list(target.variables),
                },
                "components": comps,
            }
            if target.atoms:
                entry["target_chart"]["exp_atoms"] = [
                    {"name": a.name, "base": a.base, "scale": str(a.scale)}
                    for a in target.atoms]
            if mname in raw_maps and "pullback_checks" in raw_maps[mname]:
                entry["pullback_checks"] = raw_maps[mname]["pullback_checks"]
            out["coordinate_maps"][mname] = entry
    for key, spec in (("momentum", definition.momentum_spec),
                      ("projection", definition.projection_spec),
                      ("superposition", definition.superposition_spec)):
        if spec:
            out[key] = spec
    return out


def bundled_names():
    base = resources.files("contactlie") / "systems"
    return sorted(p.name[:-5] for p in base.iterdir()
                  if p.name.endswith(".json"))


def load_bundled(name):
    base = resources.files("contactlie") / "systems"
    path = base / f"{name}.json"
    if not path.is_file():
        raise InputError(
            f"unknown bundled system {name!r}; available: {bundled_names()}")
    return load_definition(json.loads(path.read_text()))


def resolve_system(name_or_path):
    """Bundled name first, then filesystem path."""
    if isinstance(name_or_path, str) and not name_or_path.endswith(".json") \
            and "/" not in name_or_path:
        return load_bundled(name_or_path)
    return load_definition(name_or_path)
