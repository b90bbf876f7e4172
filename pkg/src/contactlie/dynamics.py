"""Fixed-step numerical integration with invariant monitors.

All floating point lives here; every expression is compiled once to a numpy
elementwise function, so ensembles of initial conditions integrate
vectorized.  Classical fourth-order Runge-Kutta only: determinism and clean
convergence-order checks are the point, not adaptivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError, PoleError
from .exprcore import RationalExpr, eval_expr, partial
from .liesystems import TIME_CHART, VGSystem


def compile_scalar(f, arg_names=None):
    """Compile a RationalExpr to a numpy elementwise function of the chart
    variables (in chart order unless arg_names overrides)."""
    chart = f.chart
    names = list(arg_names or chart.variables)
    index = {}
    for i, v in enumerate(names):
        index[v] = f"a{i}"
    lines = []
    for a in chart.atoms:
        if f.num.uses(chart.index(a.name)) or f.den.uses(chart.index(a.name)):
            if a.base not in index:
                raise InputError(f"atom base {a.base!r} not among arguments")
            index[a.name] = f"atom_{a.name}"
            lines.append(f"    atom_{a.name} = np.exp({float(a.scale)!r} * "
                         f"{index[a.base]})")

    def poly_src(p):
        if p.is_zero():
            return "0.0"
        parts = []
        for e, c in sorted(p.terms.items()):
            factors = [repr(c.numerator / c.denominator)]
            for sym, k in zip(chart.symbols, e):
                if k == 0:
                    continue
                if sym not in index:
                    raise InputError(f"expression uses {sym!r}, not an argument")
                factors.append(index[sym] if k == 1 else f"{index[sym]}**{k}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    num = poly_src(f.num)
    if f.den.is_constant() and f.den.constant_value() == 1:
        body = num
    else:
        body = f"({num}) / ({poly_src(f.den)})"
    args = ", ".join(f"a{i}" for i in range(len(names)))
    src = f"def _fn({args}):\n" + "\n".join(lines) + f"\n    return {body}\n"
    namespace = {"np": np}
    exec(src, namespace)
    return namespace["_fn"]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # (steps+1, dim) or (steps+1, m, dim)
    system_name: str
    step: float
    method: str = "rk4"

    @property
    def dim(self):
        return self.states.shape[-1]

    def final(self):
        return self.states[-1]


@dataclass
class MonitorReport:
    quantity: str
    times: np.ndarray
    values: np.ndarray
    law: str                      # "constant" or a description
    max_abs_drift: float
    max_rel_drift: float
    extra: dict = field(default_factory=dict)


class CompiledSystem:
    """Compiled right-hand side sum_a b_a(t) X_a of a VGSystem."""

    def __init__(self, sys, name="system"):
        if sys.coefficients is None:
            raise InputError("system has no time coefficients to integrate")
        self.sys = sys
        self.name = name
        self.dim = sys.chart.dimension
        self.b_fns = [compile_scalar(b, ("t",)) for b in sys.coefficients]
        self.comp_fns = []
        for X in sys.generators:
            self.comp_fns.append([
                None if c.is_zero() else compile_scalar(c)
                for c in X.components])

    def rhs(self, t, states):
        cols = [states[..., i] for i in range(self.dim)]
        out = np.zeros_like(states)
        for b_fn, comps in zip(self.b_fns, self.comp_fns):
            b = b_fn(t)
            if not np.any(b):
                continue
            for i, fn in enumerate(comps):
                if fn is not None:
                    out[..., i] += b * fn(*cols)
        return out


def _rk4_path(rhs, y0, t0, t1, step):
    if t1 <= t0:
        raise InputError("need t1 > t0")
    n = max(1, int(round((t1 - t0) / step)))
    h = (t1 - t0) / n
    times = t0 + h * np.arange(n + 1)
    states = np.empty((n + 1,) + y0.shape, dtype=float)
    states[0] = y0
    y = y0.astype(float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n):
            t = times[k]
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + (h / 2) * k1)
            k3 = rhs(t + h / 2, y + (h / 2) * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)):
                raise PoleError(f"non-finite state at t = {times[k+1]:.6g} "
                                "(pole or blow-up)", where=times[k + 1])
            states[k + 1] = y
    return times, states


def integrate(sys, x0, t0, t1, step, name="system"):
    """Classical RK4 path of the system from x0 (a point or an (m, dim)
    ensemble); deterministic for given inputs."""
    compiled = sys if isinstance(sys, CompiledSystem) else CompiledSystem(
        sys, name)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[-1] != compiled.dim:
        raise InputError("initial state has wrong dimension")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        probe = compiled.rhs(float(t0), x0)
    if not np.all(np.isfinite(probe)):
        raise PoleError("initial state sits on a pole of the system",
                        where=x0)
    times, states = _rk4_path(compiled.rhs, x0, float(t0), float(t1),
                              float(step))
    return Trajectory(times, states, compiled.name, float(step))


def monitor_first_integrals(traj, integrals, names=None, law="constant"):
    """Evaluate claimed first integrals along a single trajectory and report
    their drift relative to the initial values."""
    if traj.states.ndim != 2:
        raise InputError("monitoring expects a single-trajectory path")
    names = list(names or (f"I{i+1}" for i in range(len(integrals))))
    reports = []
    cols = [traj.states[:, i] for i in range(traj.dim)]
    for name, I in zip(names, integrals):
        fn = compile_scalar(I)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.asarray(fn(*cols), dtype=float)
        if values.ndim == 0:
            values = np.full(len(traj.times), float(values))
        if not np.all(np.isfinite(values)):
            raise PoleError(f"integral {name} hits a pole along the path")
        v0 = values[0]
        drift = np.abs(values - v0)
        max_abs = float(drift.max())
        rel = max_abs / max(1.0, abs(v0))
        reports.append(MonitorReport(name, traj.times, values, law,
                                     max_abs, rel))
    return reports


def polygon_area(points):
    """Shoelace area of a closed polygon given as (m, 2) vertices."""
    x, y = points[..., 0], points[..., 1]
    return 0.5 * float(np.abs(np.dot(x, np.roll(y, -1))
                              - np.dot(y, np.roll(x, -1))))


def ball_boundary(center, radius, m):
    angles = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    return np.stack([center[0] + radius * np.cos(angles),
                     center[1] + radius * np.sin(angles)], axis=-1)


def monitor_polygon_area(sys, boundary, t0, t1, step, name="area"):
    """Transport a planar polygon and report its shoelace area over time."""
    if boundary.shape[-1] != 2:
        raise InputError("polygon transport needs a two-dimensional system")
    traj = integrate(sys, boundary, t0, t1, step, name)
    areas = np.array([polygon_area(traj.states[k])
                      for k in range(len(traj.times))])
    a0 = areas[0]
    if a0 == 0.0:
        raise InputError("degenerate polygon")
    drift = np.abs(areas - a0)
    return MonitorReport(name, traj.times, areas, "constant",
                         float(drift.max()), float(drift.max() / abs(a0)),
                         extra={"trajectory": traj})


def _jacobian_fns(sys):
    """Compiled d(X_a^i)/dx_j for every generator."""
    chart = sys.chart
    out = []
    for X in sys.generators:
        rows = []
        for i in range(chart.dimension):
            row = []
            for v in chart.variables:
                d = partial(X.components[i], v)
                row.append(None if d.is_zero() else compile_scalar(d))
            rows.append(row)
        out.append(rows)
    return out


def monitor_volume_transport(sys, x0, t0, t1, step, divergence_expr,
                             name="volume"):
    """Evolve a tangent frame along a trajectory; measure the growth of its
    determinant against the exact symbolic divergence.

    The measured quantity is d/dt log det of the variational flow; the
    declared law is the divergence of the t-dependent field evaluated along
    the trajectory.  Their pointwise gap is the honest discretization error:
    the frame evolves numerically, the divergence symbolically.
    """
    compiled = CompiledSystem(sys, name)
    dim = compiled.dim
    jac_fns = _jacobian_fns(sys)
    b_fns = compiled.b_fns

    def rhs(t, y):
        x = y[:dim]
        M = y[dim:].reshape(dim, dim)
        dx = compiled.rhs(t, x)
        J = np.zeros((dim, dim))
        cols = [x[i] for i in range(dim)]
        for b_fn, rows in zip(b_fns, jac_fns):
            b = b_fn(t)
            if b == 0.0:
                continue
            for i in range(dim):
                for j in range(dim):
                    fn = rows[i][j]
                    if fn is not None:
                        J[i, j] += b * fn(*cols)
        return np.concatenate([dx, (J @ M).ravel()])

    y0 = np.concatenate([np.asarray(x0, dtype=float),
                         np.eye(dim).ravel()])
    times, ys = _rk4_path(rhs, y0, float(t0), float(t1), float(step))
    dets = np.array([np.linalg.det(y[dim:].reshape(dim, dim)) for y in ys])
    if np.any(dets <= 0.0):
        raise PoleError("variational determinant lost positivity")
    logdet = np.log(dets)
    div_fn = compile_scalar(divergence_expr,
                            ("t",) + sys.chart.variables)
    div_values = np.array([div_fn(t, *ys[k][:dim])
                           for k, t in enumerate(times)])
    h = times[1] - times[0]
    measured = np.gradient(logdet, h)
    gap = np.abs(measured[1:-1] - div_values[1:-1])
    predicted = np.concatenate(
        [[0.0], np.cumsum((div_values[1:] + div_values[:-1]) / 2) * h])
    return MonitorReport(
        name, times, logdet,
        "d/dt log(volume) = divergence along the trajectory",
        float(gap.max()) if len(gap) else 0.0,
        float(np.abs(logdet - predicted).max()),
        extra={"divergence": div_values, "measured_rate": measured,
               "predicted_logdet": predicted})


def phase_portrait(sys, ranges, t_sample=0.0):
    """Sample the t-frozen field on a rectangular grid.

    ranges: {variable: (lo, hi, count)} for each chart variable.  Rows with
    poles are flagged and carry no components.  Returns a list of dicts.
    """
    compiled = CompiledSystem(sys)
    chart = sys.chart
    axes = []
    for v in chart.variables:
        if v not in ranges:
            raise InputError(f"no range for variable {v!r}")
        lo, hi, count = ranges[v]
        axes.append(np.linspace(float(lo), float(hi), int(count)))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = compiled.rhs(float(t_sample), points)
    rows = []
    for p, val in zip(points, values):
        row = {v: float(x) for v, x in zip(chart.variables, p)}
        if np.all(np.isfinite(val)):
            row.update({f"d{v}": float(x)
                        for v, x in zip(chart.variables, val)})
            row["pole"] = False
        else:
            row["pole"] = True
        rows.append(row)
    return rows


def combined_field(sys, t_value):
    """The exact field sum b_a(t0) X_a at a rational time t0."""
    values = [eval_expr(b, {"t": Fraction(t_value)})
              for b in sys.coefficients]
    total = None
    for value, X in zip(values, sys.generators):
        term = X * RationalExpr.const(sys.chart, value)
        total = term if total is None else total + term
    return total


def linearization(field, point):
    """Exact Jacobian of a vector field at a rational point."""
    chart = field.chart
    point = {v: Fraction(point[v]) for v in chart.variables}
    matrix = []
    for comp in field.components:
        matrix.append([eval_expr(partial(comp, v), point)
                       for v in chart.variables])
    return matrix


def planar_equilibrium_report(field, point):
    """Exact saddle test for a 2D field: eigenvalues of the linearization
    are real with opposite signs iff the determinant is negative."""
    if field.chart.dimension != 2:
        raise InputError("saddle classification is for planar fields")
    value = [eval_expr(c, {v: Fraction(point[v])
                           for v in field.chart.variables})
             for c in field.components]
    J = linearization(field, point)
    trace = J[0][0] + J[1][1]
    det = J[0][0] * J[1][1] - J[0][1] * J[1][0]
    disc = trace * trace - 4 * det
    return {
        "point": dict(point),
        "is_equilibrium": all(v == 0 for v in value),
        "jacobian": J,
        "trace": trace,
        "determinant": det,
        "discriminant": disc,
        "saddle": det < 0,
        "eigenvalues_real": disc >= 0,
    }


def richardson_order(sys, x0, t0, t1, step):
    """Observed convergence order from three integrations at h, h/2, h/4."""
    finals = []
    for h in (step, step / 2, step / 4):
        finals.append(integrate(sys, x0, t0, t1, h).final())
    e1 = float(np.max(np.abs(finals[0] - finals[1])))
    e2 = float(np.max(np.abs(finals[1] - finals[2])))
    if e2 == 0.0:
        return float("inf"), (e1, e2)
    return float(np.log2(e1 / e2)), (e1, e2)


def drift_order(sys, x0, t0, t1, step, integral):
    """Observed order of first-integral drift under step halving."""
    drifts = []
    for h in (step, step / 2):
        traj = integrate(sys, x0, t0, t1, h)
        report = monitor_first_integrals(traj, [integral])[0]
        drifts.append(report.max_abs_drift)
    if drifts[1] == 0.0:
        return float("inf"), tuple(drifts)
    return float(np.log2(drifts[0] / drifts[1])), tuple(drifts)
