"""Parameter-dependent Stokes solver in mixed Taylor-Hood form.

Solves  s*u - div(2*strain(u)) + grad p = f,  -div u = g  with zero
velocity trace, pressure normalized to mean zero by post-shift.  The
same saddle machinery provides the divergence lifting (a discrete right
inverse of the divergence) and its corner-localized variant built from
blended cut-off profiles.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fem, spaces
from .errors import IncompatibleData, SolverFailure

MEAN_TOL = 1e-10
RESIDUAL_TOL = 1e-10


def assemble_bs(mesh, s):
    """Matrix of b_s(u, v) = int s*u.v + 2*strain(u):strain(v) on vector P2."""
    mats = fem.base_matrices(mesh)
    return (s * mats["mv"] + mats["eps"]).tocsr()


def _data_load(mesh, data, family):
    """Load vector for callable / DiscreteField / None data."""
    if data is None:
        n = {"p1": fem.fem_cache(mesh).n1, "p2v": 2 * fem.fem_cache(mesh).n2}[family]
        return np.zeros(n, dtype=np.complex128)
    if isinstance(data, fem.DiscreteField):
        mats = fem.base_matrices(mesh)
        if family == "p1":
            if data.family != "p1":
                raise ValueError("scalar data must be a p1 field")
            return mats["m1"].dot(data.coeffs)
        if data.family != "p2v":
            raise ValueError("vector data must be a p2v field")
        return mats["mv"].dot(data.coeffs)
    return fem.assemble_load(mesh, data, family)


def check_mean_zero(mesh, gvec, what="g"):
    """Raise IncompatibleData unless the P1-paired data has zero mean."""
    total = complex(gvec.sum())
    scale = max(1.0, float(np.abs(gvec).sum()))
    if abs(total) > MEAN_TOL * scale:
        raise IncompatibleData(f"integral of {what} is {total:.3e}, not zero")
    return total


@dataclass(frozen=True)
class ResolventProblem:
    """Parameter s with force f and divergence data g (callable/field/None)."""

    mesh: object
    s: complex
    f: object = None
    g: object = None
    beta: object = None

    def __post_init__(self):
        s = complex(self.s)
        if s == 0 or s.real < 0:
            raise ValueError("parameter must satisfy Re s >= 0, s != 0")


@dataclass
class FlowSolution:
    u: fem.DiscreteField
    p: fem.DiscreteField
    residuals: dict
    norm_report: dict = field(default_factory=dict)


class SaddleOperator:
    """Factorized mixed system for one velocity block matrix.

    The pressure space is reduced by pinning the last dof; the factored
    operator is immutable and safe for repeated solves.
    """

    def __init__(self, mesh, avv):
        self.mesh = mesh
        fc = fem.fem_cache(mesh)
        mats = fem.base_matrices(mesh)
        bdofs = np.concatenate([fc.boundary_p2, fc.n2 + fc.boundary_p2])
        self.iv = np.setdiff1d(np.arange(2 * fc.n2), bdofs)
        self.pk = np.arange(fc.n1 - 1)
        self.avv_full = avv.tocsr()
        self.div = mats["div"].tocsr()
        a_ii = self.avv_full[self.iv][:, self.iv]
        d_ki = self.div[self.pk][:, self.iv]
        # plain transpose: the system is complex symmetric, not Hermitian
        K = sp.bmat([[a_ii, -d_ki.T], [-d_ki, None]], format="csc")
        self.K = K.astype(np.complex128)
        self.lu = spla.splu(self.K)
        self.area = fem.domain_area(mesh)
        self.m1 = mats["m1"]

    def solve(self, fvec, gvec):
        """Solve for (u, p) given full load vectors; returns fields + residuals."""
        fc = fem.fem_cache(self.mesh)
        b = np.concatenate([fvec[self.iv], gvec[self.pk]])
        x = self.lu.solve(b)
        r = self.K.dot(x) - b
        bnorm = max(np.linalg.norm(b), 1e-300)
        if np.linalg.norm(r) / bnorm > 1e-12:
            x = x - self.lu.solve(r)
        niv = len(self.iv)
        U = np.zeros(2 * fc.n2, dtype=np.complex128)
        U[self.iv] = x[:niv]
        P = np.zeros(fc.n1, dtype=np.complex128)
        P[self.pk] = x[niv:]
        P -= self.m1.dot(P).sum() / self.area

        r_mom = (self.avv_full.dot(U) - self.div.T.dot(P) - fvec)[self.iv]
        r_div = -self.div.dot(U) - gvec
        rel = float(np.sqrt(np.linalg.norm(r_mom) ** 2 + np.linalg.norm(r_div) ** 2) / bnorm)
        if not np.isfinite(rel) or rel > RESIDUAL_TOL:
            raise SolverFailure(f"saddle solve residual {rel:.3e} above {RESIDUAL_TOL}")
        return U, P, rel


def resolvent_operator(mesh, s):
    """Factorized saddle operator of the parameter-s problem (reusable)."""
    return SaddleOperator(mesh, assemble_bs(mesh, s))


def solve_weak_resolvent(problem):
    """Discrete weak solution of the parameter-dependent problem."""
    mesh = problem.mesh
    fvec = _data_load(mesh, problem.f, "p2v")
    gvec = _data_load(mesh, problem.g, "p1")
    check_mean_zero(mesh, gvec)
    op = resolvent_operator(mesh, complex(problem.s))
    U, P, rel = op.solve(fvec, gvec)
    mom = float(np.linalg.norm((op.avv_full.dot(U) - op.div.T.dot(P) - fvec)[op.iv]))
    divres = div_defect_norm(mesh, -op.div.dot(U) - gvec)
    return FlowSolution(
        u=fem.DiscreteField(mesh, "p2v", U),
        p=fem.DiscreteField(mesh, "p1", P),
        residuals={"relative": rel, "momentum": mom, "divergence": divres},
    )


def div_defect_norm(mesh, rvec):
    """L2 norm of the P1 Riesz representative of a pressure-row residual."""
    fc = fem.fem_cache(mesh)
    if "m1_lu" not in fc.matrices:
        fc.matrices["m1_lu"] = spla.splu(fem.base_matrices(mesh)["m1"].tocsc())
    lu = fc.matrices["m1_lu"]
    z = lu.solve(rvec.real.astype(float)) + 1j * lu.solve(rvec.imag.astype(float))
    return float(np.sqrt(max(np.vdot(z, rvec).real, 0.0)))


def lift_divergence(g, mesh=None):
    """Zero-trace vector field w with div w = g in the discrete sense.

    g may be a p1 field or a callable; requires mean-zero data.  Returns
    (w, report) with the discrete divergence defect and the stability
    ratio ||w||_W1 / ||g||_L2.
    """
    if isinstance(g, fem.DiscreteField):
        mesh = g.mesh
    elif mesh is None:
        raise ValueError("pass the mesh when g is a callable")
    gvec = _data_load(mesh, g, "p1")
    check_mean_zero(mesh, gvec)
    fc = fem.fem_cache(mesh)
    op = _lift_operator(mesh)
    # constraint -div u = data with data = -g so that div w = g
    U, _, rel = op.solve(np.zeros(2 * fc.n2, dtype=np.complex128), -gvec)
    w = fem.DiscreteField(mesh, "p2v", U)
    defect = div_defect_norm(mesh, op.div.dot(U) - gvec)
    gnorm = _l2_of_data(mesh, g, gvec)
    report = {
        "div_defect": defect,
        "w1_norm": fem.w1_norm(w),
        "g_l2": gnorm,
        "stability": fem.w1_norm(w) / gnorm if gnorm > 0 else 0.0,
        "solver_residual": rel,
    }
    return w, report


def _l2_of_data(mesh, g, gvec):
    if isinstance(g, fem.DiscreteField):
        return fem.l2_norm(g)
    if g is None:
        return 0.0

    def sq(elems, pts):
        return np.abs(np.asarray(g(pts))) ** 2

    val = fem.integrate_elements(mesh, sq, ncols=1).real.sum()
    return float(np.sqrt(max(val, 0.0)))


def smooth_plateau(r, radius, plateau):
    """C^2 radial cut-off: 1 for r <= plateau*radius, 0 for r >= radius."""
    x = (np.asarray(r) / radius - plateau) / (1.0 - plateau)
    x = np.clip(x, 0.0, 1.0)
    return 1.0 - (10 * x**3 - 15 * x**4 + 6 * x**5)


def localize_divergence(g, corner, mesh=None, radius=None,
                        plateaus=(0.35, 0.6, 0.8)):
    """Zero-trace w with div w + g = 0 on the patch around one corner.

    A radial C^2 cut-off zeta equal to one near the corner is blended
    from two profiles so that int zeta*g = 0 (coefficient b/(b-a) for
    measured integrals a, b); the compatible data -zeta*g is then lifted
    globally.  If every profile returns the same integral the data
    vanishes near the corner and w = 0.
    """
    if isinstance(g, fem.DiscreteField):
        mesh = g.mesh
    elif mesh is None:
        raise ValueError("pass the mesh when g is a callable")
    domain = mesh.domain
    if radius is None:
        radius = float(domain.grading_radius[corner])
    pj = domain.vertices[corner]

    def geval(elems, pts):
        if isinstance(g, fem.DiscreteField):
            gv, _, _ = fem.eval_field(g, elems, pts, order=0)
            return gv
        return np.asarray(g(pts))

    def cutoff_integral(plateau):
        def integrand(elems, pts):
            r = np.linalg.norm(pts - pj, axis=1)
            return smooth_plateau(r, radius, plateau) * geval(elems, pts)

        return complex(fem.integrate_elements(mesh, integrand, ncols=1).sum())

    a = cutoff_integral(plateaus[0])
    b = cutoff_integral(plateaus[1])
    scale = max(1.0, abs(a), abs(b))
    if abs(a) <= 1e-13 * scale:
        blend = (1.0, plateaus[0], plateaus[0])
    elif abs(a - b) > 1e-12 * scale:
        coef = b / (b - a)
        blend = (coef, plateaus[0], plateaus[1])
    else:
        c = cutoff_integral(plateaus[2])
        if abs(a - c) > 1e-12 * max(scale, abs(c)):
            coef = c / (c - a)
            blend = (coef, plateaus[0], plateaus[2])
        else:
            # same integral for every profile: data vanishes near the corner
            w = fem.zero_field(mesh, "p2v")
            return w, {"blend_integral": 0.0, "patch_residual": 0.0,
                       "profile_integrals": (complex(a), complex(b), complex(c)),
                       "degenerate": True}
    coef, t0, t1 = blend

    def blended(r):
        if t0 == t1:
            return smooth_plateau(r, radius, t0)
        return (coef * smooth_plateau(r, radius, t0)
                - (coef - 1.0) * smooth_plateau(r, radius, t1))

    def data_elems(elems, pts):
        r = np.linalg.norm(pts - pj, axis=1)
        return -blended(r) * geval(elems, pts)

    zg = fem.integrate_elements(mesh, data_elems, ncols=1).sum()
    gvec = -_project_p1(mesh, data_elems)  # pairs zeta*g with the P1 basis
    blend_integral = complex(-zg)          # int zeta_blend * g
    op = _lift_operator(mesh)
    fc = fem.fem_cache(mesh)
    U, _, rel = op.solve(np.zeros(2 * fc.n2, dtype=np.complex128), gvec)
    w = fem.DiscreteField(mesh, "p2v", U)

    # residual of div w + g against P1 tests supported where zeta == 1
    rrows = op.div.dot(U) + _project_with_field(mesh, g)
    patch = _patch_vertices(mesh, pj, t0 * radius)
    patch_res = _restricted_defect(mesh, rrows, patch)
    report = {
        "blend_integral": blend_integral,
        "blend_coefficient": complex(coef),
        "profile_integrals": (complex(a), complex(b)),
        "patch_residual": patch_res,
        "patch_radius": t0 * radius,
        "solver_residual": rel,
        "degenerate": False,
    }
    return w, report


def _lift_operator(mesh):
    fc = fem.fem_cache(mesh)
    if "lift_op" not in fc.matrices:
        mats = fem.base_matrices(mesh)
        kv = sp.block_diag([mats["k2"], mats["k2"]], format="csr")
        fc.matrices["lift_op"] = SaddleOperator(mesh, kv)
    return fc.matrices["lift_op"]


def _project_p1(mesh, integrand_elems):
    """(data, phi_i) over the P1 basis via the adaptive engine."""
    def withbasis(elems, pts):
        tv = mesh.nodes[mesh.triangles[elems]]
        lam = fem.barycentric(tv, pts)
        vals = integrand_elems(elems, pts)
        return vals[:, None] * lam

    per_elem = fem.integrate_elements(mesh, withbasis, ncols=3)
    out = np.zeros(mesh.n_nodes, dtype=np.complex128)
    np.add.at(out, mesh.triangles, per_elem)
    return out


def _project_with_field(mesh, g):
    if isinstance(g, fem.DiscreteField):
        return fem.base_matrices(mesh)["m1"].dot(g.coeffs)
    return fem.assemble_load(mesh, g, "p1")


def _patch_vertices(mesh, center, rad):
    """Vertices whose element star lies inside the disk of radius rad."""
    tv = mesh.tri_vertices()
    far = np.linalg.norm(tv - center, axis=2).max(axis=1) > rad
    outside = np.unique(mesh.triangles[far])
    return np.setdiff1d(np.arange(mesh.n_nodes), outside)


def _restricted_defect(mesh, rvec, rows):
    if len(rows) == 0:
        return 0.0
    m1 = fem.base_matrices(mesh)["m1"].tocsc()[rows][:, rows]
    r = rvec[rows]
    lu = spla.splu(m1)
    z = lu.solve(r.real.astype(float)) + 1j * lu.solve(r.imag.astype(float))
    return float(np.sqrt(max(np.vdot(z, r).real, 0.0)))


def gradient_weighted_norm(fld, bvec):
    """|| grad fld ||_{V_beta^0}: weight r^(2*beta) on the squared gradient."""
    mesh = fld.mesh
    exps = 2.0 * bvec.as_array()

    def integrand(elems, pts):
        _, grads, _ = fem.eval_field(fld, elems, pts, order=1)
        g2 = (np.abs(grads) ** 2).sum(axis=tuple(range(1, grads.ndim)))
        return fem.corner_weight(mesh.domain, pts, exps) * g2

    val = fem.integrate_elements(mesh, integrand, ncols=1).real.sum()
    return float(np.sqrt(max(val, 0.0)))


def weighted_regularity_report(solution, problem, beta):
    """Weighted-norm ledger of a solve: solution norms vs data norms."""
    mesh = solution.u.mesh
    bvec = spaces.weight_for(mesh.domain, beta)
    u2 = spaces.weighted_norm(solution.u, spaces.NormSpec("V", 2, bvec))
    gp = gradient_weighted_norm(solution.p, bvec)
    report = {
        "u_v2": u2,
        "grad_p_v0": gp,
        "beta": list(bvec.as_array()),
        "admissible": None,
    }
    if np.all(bvec.as_array() > 0):
        report["p_v1"] = spaces.weighted_norm(solution.p, spaces.NormSpec("V", 1, bvec))
    fnorm = _data_weighted_norm(mesh, problem.f, bvec, order=0, family="vec")
    gnorm = _data_weighted_norm(mesh, problem.g, bvec, order=1, family="scalar")
    report["f_v0"] = fnorm
    report["g_v1"] = gnorm
    denom = fnorm + gnorm
    report["ratio"] = (u2 + gp) / denom if denom > 0 else None
    from . import corners as _corners  # local import to avoid cycles

    ok = True
    for j, alpha in enumerate(mesh.domain.openings):
        win = _corners.admissible_weight_window(float(alpha))
        if not win.contains(bvec[j]):
            ok = False
    report["admissible"] = ok
    solution.norm_report.update(report)
    return report


def _data_weighted_norm(mesh, data, bvec, order, family):
    """V-norm of analytic or discrete data (order 0 or 1)."""
    if data is None:
        return 0.0
    if isinstance(data, fem.DiscreteField):
        return spaces.weighted_norm(data, spaces.NormSpec("V", order, bvec))
    beta = bvec.as_array()
    exps = [2.0 * (beta - order + k) for k in range(order + 1)]

    def integrand(elems, pts):
        vals = np.asarray(data(pts))
        sq = np.abs(vals) ** 2
        if sq.ndim > 1:
            sq = sq.sum(axis=1)
        total = fem.corner_weight(mesh.domain, pts, exps[-1]) * sq
        if order >= 1:
            gv = _numeric_gradient(data, pts)
            g2 = (np.abs(gv) ** 2).sum(axis=-1)
            if g2.ndim > 1:
                g2 = g2.sum(axis=1)
            total = fem.corner_weight(mesh.domain, pts, exps[0]) * sq \
                + fem.corner_weight(mesh.domain, pts, exps[1]) * g2
        return total

    val = fem.integrate_elements(mesh, integrand, ncols=1).real.sum()
    return float(np.sqrt(max(val, 0.0)))


def _numeric_gradient(func, pts, h=1e-6):
    fx1 = np.asarray(func(pts + np.array([h, 0.0])))
    fx0 = np.asarray(func(pts - np.array([h, 0.0])))
    fy1 = np.asarray(func(pts + np.array([0.0, h])))
    fy0 = np.asarray(func(pts - np.array([0.0, h])))
    return np.stack([(fx1 - fx0) / (2 * h), (fy1 - fy0) / (2 * h)], axis=-1)


def korn_ratio(mesh, s_values, n_samples=20, seed=20240811):
    """min over random zero-trace fields of |b_s(u, conj u)| / ||u||_W1^2."""
    fc = fem.fem_cache(mesh)
    mats = fem.base_matrices(mesh)
    bdofs = np.concatenate([fc.boundary_p2, fc.n2 + fc.boundary_p2])
    iv = np.setdiff1d(np.arange(2 * fc.n2), bdofs)
    rng = np.random.default_rng(seed)
    kv = sp.block_diag([mats["k2"], mats["k2"]], format="csr")
    best = np.inf
    for _ in range(n_samples):
        u = np.zeros(2 * fc.n2)
        u[iv] = rng.standard_normal(len(iv))
        m = float(u @ mats["mv"].dot(u))
        e = float(u @ mats["eps"].dot(u))
        w1 = m + float(u @ kv.dot(u))
        for s in s_values:
            val = abs(complex(s) * m + e) / w1
            best = min(best, val)
    return best


def infsup_constant(mesh):
    """Discrete inf-sup constant from the pressure Schur complement."""
    import scipy.linalg as sla

    fc = fem.fem_cache(mesh)
    mats = fem.base_matrices(mesh)
    bdofs = np.concatenate([fc.boundary_p2, fc.n2 + fc.boundary_p2])
    iv = np.setdiff1d(np.arange(2 * fc.n2), bdofs)
    kv = sp.block_diag([mats["k2"], mats["k2"]], format="csr") + mats["mv"]
    a = kv[iv][:, iv].tocsc()
    bmat = mats["div"][:, iv].tocsr()
    lu = spla.splu(a)
    bt = np.asarray(bmat.todense()).T
    x = lu.solve(bt)
    S = bt.T @ x
    Mp = np.asarray(fem.base_matrices(mesh)["m1"].todense())
    vals = sla.eigh(S, Mp, eigvals_only=True)
    vals = np.sort(vals)
    return float(np.sqrt(max(vals[1], 0.0)))  # vals[0] ~ 0 for the constants
