"""Manufactured-solution studies, estimate sweeps and convergence tables.

Manufactured cases are built symbolically (sympy) so the forcing is the
exact strong-form image of the chosen velocity/pressure pair; studies
solve on refinement ladders and report observed orders, and estimate
sweeps measure the two sides of the weighted a-priori bound across the
parameter s.  All reports serialize deterministically.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import corners, fem, geometry, resolvent, spaces

_X, _Y, _S = sympy.symbols("x y s")


@dataclass
class ManufacturedCase:
    """Symbolic velocity/pressure pair with derived forcing.

    u_sym is a pair of sympy expressions in x, y with zero boundary
    trace; the forcing s*u - Lap(u) - grad(div u) + grad(p) and the
    divergence data -div(u) follow symbolically.
    """

    name: str
    domain: object
    u_sym: tuple
    p_sym: object
    divergence_free: bool = field(init=False, default=False)
    _fns: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        u1, u2 = (sympy.sympify(e) for e in self.u_sym)
        p = sympy.sympify(self.p_sym)
        div_u = sympy.simplify(sympy.diff(u1, _X) + sympy.diff(u2, _Y))
        self.divergence_free = div_u == 0
        lap = lambda e: sympy.diff(e, _X, 2) + sympy.diff(e, _Y, 2)
        f1 = _S * u1 - lap(u1) - sympy.diff(div_u, _X) + sympy.diff(p, _X)
        f2 = _S * u2 - lap(u2) - sympy.diff(div_u, _Y) + sympy.diff(p, _Y)
        g = -div_u
        mods = "numpy"
        self._fns = {
            "u": sympy.lambdify((_X, _Y), (u1, u2), mods),
            "gradu": sympy.lambdify(
                (_X, _Y),
                (sympy.diff(u1, _X), sympy.diff(u1, _Y),
                 sympy.diff(u2, _X), sympy.diff(u2, _Y)), mods),
            "p": sympy.lambdify((_X, _Y), p, mods),
            "f": sympy.lambdify((_X, _Y, _S), (f1, f2), mods),
            "g": sympy.lambdify((_X, _Y), g, mods),
        }

    def velocity(self, pts):
        a, b = self._fns["u"](pts[:, 0], pts[:, 1])
        return np.stack([np.broadcast_to(a, len(pts)),
                         np.broadcast_to(b, len(pts))], axis=1).astype(float)

    def velocity_gradient(self, pts):
        parts = self._fns["gradu"](pts[:, 0], pts[:, 1])
        cols = [np.broadcast_to(c, len(pts)) for c in parts]
        return np.stack(cols, axis=1).reshape(len(pts), 2, 2).astype(float)

    def pressure(self, pts):
        return np.broadcast_to(self._fns["p"](pts[:, 0], pts[:, 1]), len(pts)).astype(float)

    def forcing(self, s):
        def call(pts):
            a, b = self._fns["f"](pts[:, 0], pts[:, 1], s)
            return np.stack([np.broadcast_to(a, len(pts)),
                             np.broadcast_to(b, len(pts))], axis=1)
        return call

    def divergence_data(self):
        if self.divergence_free:
            return None

        def call(pts):
            return np.broadcast_to(self._fns["g"](pts[:, 0], pts[:, 1]), len(pts))
        return call

    def check_consistency(self, n_points=100, seed=20240811):
        """Zero trace on the boundary and (if declared) zero divergence
        at random interior points; returns the two maxima."""
        rng = np.random.default_rng(seed)
        v = self.domain.vertices
        n = len(v)
        t = rng.uniform(0.0, 1.0, n_points)
        which = rng.integers(0, n, n_points)
        bpts = v[which] + t[:, None] * (v[(which + 1) % n] - v[which])
        trace = np.abs(self.velocity(bpts)).max()

        divmax = 0.0
        if self.divergence_free:
            pts = self._interior_points(n_points, rng)
            gu = self.velocity_gradient(pts)
            divmax = float(np.abs(gu[:, 0, 0] + gu[:, 1, 1]).max())
        return {"boundary_trace_max": float(trace), "divergence_max": divmax}

    def _interior_points(self, n_points, rng):
        v = self.domain.vertices
        lo, hi = v.min(axis=0), v.max(axis=0)
        pts = []
        while len(pts) < n_points:
            cand = rng.uniform(lo, hi, size=(4 * n_points, 2))
            pts.extend(c for c in cand if self.domain.contains(c))
        return np.asarray(pts[:n_points])

    def strong_residual(self, s, n_points=100, seed=3):
        """Max of |f - (s u - Lap u - grad div u + grad p)| at random
        interior points, with the operator re-derived independently of
        the stored forcing (a cross-check of the derivation path)."""
        u1, u2 = (sympy.sympify(e) for e in self.u_sym)
        p = sympy.sympify(self.p_sym)
        du = sympy.diff(u1, _X) + sympy.diff(u2, _Y)
        op1 = (_S * u1 - sympy.diff(u1, _X, 2) - sympy.diff(u1, _Y, 2)
               - sympy.diff(du, _X) + sympy.diff(p, _X))
        op2 = (_S * u2 - sympy.diff(u2, _X, 2) - sympy.diff(u2, _Y, 2)
               - sympy.diff(du, _Y) + sympy.diff(p, _Y))
        opf = sympy.lambdify((_X, _Y, _S), (op1, op2), "numpy")
        rng = np.random.default_rng(seed)
        pts = self._interior_points(n_points, rng)
        fa, fb = self._fns["f"](pts[:, 0], pts[:, 1], s)
        oa, ob = opf(pts[:, 0], pts[:, 1], s)
        ra = np.abs(np.broadcast_to(fa, n_points) - np.broadcast_to(oa, n_points))
        rb = np.abs(np.broadcast_to(fb, n_points) - np.broadcast_to(ob, n_points))
        return float(max(ra.max(), rb.max()))


def streamfunction_square():
    """Divergence-free case on the unit square: u = curl psi, linear p."""
    psi = (_X * (1 - _X) * _Y * (1 - _Y)) ** 2
    return ManufacturedCase(
        name="streamfunction-square",
        domain=geometry.unit_square(),
        u_sym=(sympy.diff(psi, _Y), -sympy.diff(psi, _X)),
        p_sym=_X - sympy.Rational(1, 2),
    )


def streamfunction_lshape():
    """Divergence-free case on the L-shape (zero trace on all six edges)."""
    psi = (_X * (2 - _X) * _Y * (2 - _Y) * (_X - 1) * (_Y - 1)) ** 2
    return ManufacturedCase(
        name="streamfunction-lshape",
        domain=geometry.l_shape(),
        u_sym=(sympy.diff(psi, _Y), -sympy.diff(psi, _X)),
        p_sym=_X + _Y - 2,
    )


@dataclass
class SweepReport:
    kind: str
    config: dict
    rows: list
    stats: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(
            {"kind": self.kind, "config": self.config, "rows": self.rows,
             "stats": self.stats},
            sort_keys=True, default=_jsonify)

    def to_csv(self):
        if not self.rows:
            return ""
        keys = sorted(self.rows[0])
        lines = [",".join(keys)]
        for row in self.rows:
            lines.append(",".join(_csvcell(row.get(k)) for k in keys))
        return "\n".join(lines) + "\n"


def _jsonify(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def _csvcell(v):
    if v is None:
        return ""
    if isinstance(v, complex):
        return f"{v.real!r}+{v.imag!r}j" if v.imag >= 0 else f"{v.real!r}{v.imag!r}j"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def estimate_sweep(mesh, f, g, beta, s_list, workers=1):
    """Two sides of the weighted resolvent bound across the parameter list.

    R(s) = (||u||_{V_b^2} + |s| ||u||_{V_b^0} + ||grad p||_{V_b^0})
           / (||f||_{V_b^0} + ||g||_{V_b^1} + |s| dual(g)).
    Rows with 0/0 are reported as void and excluded from the statistics.
    """
    bvec = spaces.weight_for(mesh.domain, beta)
    fnorm = resolvent._data_weighted_norm(mesh, f, bvec, order=0, family="vec")
    gnorm = resolvent._data_weighted_norm(mesh, g, bvec, order=1, family="scalar") \
        if g is not None else 0.0

    def one(sv):
        sol = resolvent.solve_weak_resolvent(
            resolvent.ResolventProblem(mesh=mesh, s=sv, f=f, g=g))
        u2 = spaces.weighted_norm(sol.u, spaces.NormSpec("V", 2, bvec))
        u0 = spaces.weighted_norm(sol.u, spaces.NormSpec("V", 0, bvec))
        gp = resolvent.gradient_weighted_norm(sol.p, bvec)
        if g is None:
            sg = 0.0
        elif isinstance(g, fem.DiscreteField):
            sg = abs(sv) * spaces.dual_norm(g, bvec)
        else:
            sg = abs(sv) * spaces.dual_norm_of_callable(mesh, g, bvec)
        num = u2 + abs(sv) * u0 + gp
        den = fnorm + gnorm + sg
        row = {
            "s": complex(sv), "abs_s": abs(sv),
            "u_v2": u2, "s_u_v0": abs(sv) * u0, "grad_p_v0": gp,
            "f_v0": fnorm, "g_v1": gnorm, "s_g_dual": sg,
            "numerator": num, "denominator": den,
        }
        row["ratio"] = "void" if (num == 0 and den == 0) else (
            float("inf") if den == 0 else num / den)
        return row

    rows = _pmap(one, [complex(s) for s in s_list], workers)
    ratios = np.array([r["ratio"] for r in rows if isinstance(r["ratio"], float)
                       and np.isfinite(r["ratio"]) and r["ratio"] > 0])
    stats = {}
    if len(ratios):
        stats["max_over_min"] = float(ratios.max() / ratios.min())
        ss = np.array([r["abs_s"] for r in rows
                       if isinstance(r["ratio"], float) and r["ratio"] > 0])
        if len(set(ss)) > 1:
            stats["loglog_slope"] = float(np.polyfit(np.log(ss), np.log(ratios), 1)[0])
    return SweepReport(
        kind="estimate_sweep",
        config={"beta": list(bvec.as_array()), "s_list": [complex(s) for s in s_list],
                "n_triangles": mesh.n_triangles},
        rows=rows, stats=stats)


def solution_errors(case, mesh, s):
    """L2/W1 velocity and L2 pressure errors of one solve vs the case."""
    sol = resolvent.solve_weak_resolvent(resolvent.ResolventProblem(
        mesh=mesh, s=s, f=case.forcing(s), g=case.divergence_data()))
    bary, qw = fem.tri_rule("d7")
    tv = mesh.tri_vertices()
    pts = np.einsum("qk,wkd->wqd", bary, tv).reshape(-1, 2)
    wA = (qw[None, :] * mesh.areas()[:, None]).ravel()
    elems = np.repeat(np.arange(mesh.n_triangles), len(qw))
    uh, guh, _ = fem.eval_field(sol.u, elems, pts, order=1)
    ph, _, _ = fem.eval_field(sol.p, elems, pts, order=0)
    ue = case.velocity(pts)
    gue = case.velocity_gradient(pts)
    pe = case.pressure(pts)
    pe = pe - np.sum(wA * pe) / fem.domain_area(mesh)
    e_l2 = float(np.sqrt(np.sum(wA * (np.abs(uh - ue) ** 2).sum(axis=1))))
    e_h1 = float(np.sqrt(np.sum(wA * (np.abs(guh - gue) ** 2).sum(axis=(1, 2)))))
    e_p = float(np.sqrt(np.sum(wA * np.abs(ph - pe) ** 2)))
    return {"u_l2": e_l2, "u_h1": np.hypot(e_l2, e_h1), "p_l2": e_p,
            "residual": sol.residuals["relative"],
            "pressure_mean": abs(complex(fem.field_integral(sol.p)))}


def convergence_study(case, h_levels, s, grading=None, workers=1):
    """Refinement ladder: errors per level and observed orders."""
    def one(h):
        mesh = geometry.generate_graded_mesh(case.domain, h=h, grading=grading)
        err = solution_errors(case, mesh, s)
        err.update({"h": h, "n_triangles": mesh.n_triangles})
        return err

    rows = _pmap(one, list(h_levels), workers)
    stats = {}
    for key in ("u_l2", "u_h1", "p_l2"):
        vals = np.array([r[key] for r in rows])
        if np.all(vals > 0):
            orders = np.log2(vals[:-1] / vals[1:])
            stats[f"{key}_orders"] = orders.tolist()
    return SweepReport(kind="convergence_study",
                       config={"case": case.name, "s": complex(s),
                               "h_levels": list(h_levels)},
                       rows=rows, stats=stats)


def corner_window_audit(domain, beta):
    """Per-corner verdict of the weight vector.

    The admissibility verdict uses the regularity window
    (1 - Re lambda*, 1); the stricter aperture-capped window is reported
    alongside (`strict_window`, upper bound min(1, pi/alpha)).
    """
    bvec = spaces.weight_for(domain, beta)
    rows = []
    all_ok = True
    for j, alpha in enumerate(domain.openings):
        exp = corners.solve_corner_exponent(float(alpha))
        reg = corners.regularity_weight_window(float(alpha))
        strict = corners.admissible_weight_window(float(alpha))
        b = bvec[j]
        if b == 0.0:
            verdict = "excluded value 0"
        elif reg.contains(b):
            verdict = "inside"
        else:
            verdict = "outside"
        if verdict != "inside":
            all_ok = False
        rows.append({
            "corner": j, "alpha": float(alpha),
            "lambda_re": exp.lambda_star.real, "lambda_im": exp.lambda_star.imag,
            "beta": b, "verdict": verdict,
            "window": (reg.lower, reg.upper),
            "strict_window": (strict.lower, strict.upper),
            "strict_ok": bool(strict.contains(b)),
        })
    return {"rows": rows, "admissible": all_ok}
