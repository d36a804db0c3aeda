"""Auxiliary Neumann-Poisson solve and the weighted pressure diagnostic.

The Neumann problem -Laplace q = phi, dq/dn = 0, int q = 0 is the tool
behind the weighted pressure estimate: the diagnostic compares
``||p||_{V_{gamma-1}^0}`` of a resolvent solve against the data terms
plus the boundary trace of the velocity gradient.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import fem, resolvent, spaces
from .errors import HypothesisViolated, IncompatibleData, SolverFailure

MEAN_TOL = 1e-10


@dataclass(frozen=True)
class NeumannProblem:
    """Right-hand side phi (p2 field or callable) with weight tuple gamma."""

    mesh: object
    phi: object
    gamma: object = None

    def __post_init__(self):
        if self.gamma is not None:
            g = spaces.weight_for(self.mesh.domain, self.gamma).as_array()
            caps = np.pi / self.mesh.domain.openings
            if np.any(g <= 0) or np.any(g >= caps):
                raise ValueError("gamma must satisfy 0 < gamma_j < pi/alpha_j")


def _phi_load(mesh, phi):
    if isinstance(phi, fem.DiscreteField):
        mats = fem.base_matrices(mesh)
        if phi.family == "p2":
            return mats["m2"].dot(phi.coeffs)
        if phi.family == "p1":
            return mats["m12"].T.dot(phi.coeffs)
        raise ValueError("phi must be scalar")
    return fem.assemble_load(mesh, phi, "p2")


def solve_neumann(problem):
    """Mean-zero P2 solution of -Laplace q = phi with natural conditions.

    The singular stiffness system is reduced by pinning one dof after
    projecting the load onto the compatible (mean-zero) range, and the
    solution is shifted to exact mean zero.
    """
    mesh = problem.mesh
    fc = fem.fem_cache(mesh)
    mats = fem.base_matrices(mesh)
    rhs = _phi_load(mesh, problem.phi)
    total = complex(rhs.sum())
    scale = max(1.0, float(np.abs(rhs).sum()))
    if abs(total) > MEAN_TOL * scale:
        raise IncompatibleData(f"integral of phi is {total:.3e}, not zero")
    # exact compatibilization: remove the constant component of the load
    ones = np.ones(fc.n2)
    m_one = mats["m2"].dot(ones)
    rhs = rhs - (rhs.sum() / m_one.sum()) * m_one

    key = "neumann_lu"
    if key not in fc.matrices:
        keep = np.arange(fc.n2 - 1)
        K = mats["k2"].tocsr()[keep][:, keep].tocsc()
        fc.matrices[key] = (spla.splu(K), keep)
    lu, keep = fc.matrices[key]
    b = rhs[keep]
    qk = lu.solve(b.real) + 1j * lu.solve(b.imag)
    q = np.zeros(fc.n2, dtype=np.complex128)
    q[keep] = qk
    area = fem.domain_area(mesh)
    q -= mats["m2"].dot(q).sum() / area

    res = np.linalg.norm(mats["k2"].dot(q) - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if not np.isfinite(res) or res > 1e-10:
        raise SolverFailure(f"Neumann solve residual {res:.3e}")
    fldq = fem.DiscreteField(mesh, "p2", q)
    report = {"residual": float(res), "mean": complex(mats["m2"].dot(q).sum())}
    if problem.gamma is not None:
        report.update(neumann_estimate_report(fldq, problem))
    return fldq, report


def grad_weighted_v1_norm(q, delta):
    """|| grad q ||_{V_delta^1}: weights r^(2(delta-1)) on |grad q|^2 and
    r^(2*delta) on the squared second derivatives."""
    mesh = q.mesh
    d = spaces.weight_for(mesh.domain, delta).as_array()
    e0 = 2.0 * (d - 1.0)
    e1 = 2.0 * d

    def integrand(elems, pts):
        _, grads, hess = fem.eval_field(q, elems, pts, order=2)
        g2 = (np.abs(grads) ** 2).sum(axis=1)
        h2 = (np.abs(hess[:, 0, 0]) ** 2 + 2 * np.abs(hess[:, 0, 1]) ** 2
              + np.abs(hess[:, 1, 1]) ** 2)
        return (fem.corner_weight(mesh.domain, pts, e0) * g2
                + fem.corner_weight(mesh.domain, pts, e1) * h2)

    val = fem.integrate_elements(mesh, integrand, ncols=1).real.sum()
    return float(np.sqrt(max(val, 0.0)))


def neumann_estimate_report(q, problem):
    """Two sides of the weighted a-priori bound for the Neumann solve."""
    mesh = problem.mesh
    gamma = spaces.weight_for(mesh.domain, problem.gamma).as_array()
    delta = spaces.WeightVector(1.0 - gamma)
    lhs = fem.l2_norm(q) + grad_weighted_v1_norm(q, delta)
    if isinstance(problem.phi, fem.DiscreteField):
        rhs = spaces.weighted_norm(problem.phi, spaces.NormSpec("V", 0, delta))
    else:
        rhs = resolvent._data_weighted_norm(mesh, problem.phi, delta, order=0,
                                            family="scalar")
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else None,
            "gamma": list(gamma)}


def _g_on_corner_patches(mesh, g):
    """L2 mass of the divergence data on the union of corner disks."""
    if g is None:
        return 0.0
    domain = mesh.domain

    def integrand(elems, pts):
        inside = np.zeros(len(pts), dtype=bool)
        for j in range(domain.n_corners):
            inside |= np.linalg.norm(pts - domain.vertices[j], axis=1) \
                < domain.grading_radius[j]
        if isinstance(g, fem.DiscreteField):
            gv, _, _ = fem.eval_field(g, elems, pts, order=0)
        else:
            gv = np.asarray(g(pts))
        return np.where(inside, np.abs(gv) ** 2, 0.0)

    val = fem.integrate_elements(mesh, integrand, ncols=1, rel_tol=1e-6).real.sum()
    return float(np.sqrt(max(val, 0.0)))


def pressure_diagnostic(solution, problem, gamma, facet_gauss=5):
    """Weighted pressure bound: LHS, RHS terms and their ratio.

    Hypotheses: 0 < gamma_j < min(2, pi/alpha_j), the divergence data
    vanishes on every corner patch and the pressure has mean zero.  The
    boundary term is the trace norm of the full velocity gradient.
    """
    mesh = solution.u.mesh
    domain = mesh.domain
    g = spaces.weight_for(domain, gamma)
    garr = g.as_array()
    caps = np.minimum(2.0, np.pi / domain.openings)
    if np.any(garr <= 0) or np.any(garr >= caps):
        raise HypothesisViolated("gamma must satisfy 0 < gamma_j < min(2, pi/alpha_j)")
    gmass = _g_on_corner_patches(mesh, problem.g)
    if gmass > 1e-8:
        raise HypothesisViolated(
            f"divergence data does not vanish on the corner patches (mass {gmass:.2e})")

    lhs = spaces.weighted_norm(solution.p, spaces.NormSpec("V", 0,
                                                           spaces.WeightVector(garr - 1.0)))
    f_term = resolvent._data_weighted_norm(mesh, problem.f, g, order=0, family="vec") \
        if not isinstance(problem.f, fem.DiscreteField) else \
        spaces.weighted_norm(problem.f, spaces.NormSpec("V", 0, g))
    if problem.g is None:
        g_term = 0.0
        sg_term = 0.0
    else:
        if isinstance(problem.g, fem.DiscreteField):
            g_term = spaces.weighted_norm(problem.g, spaces.NormSpec("V", 1, g))
            sg_term = abs(problem.s) * spaces.dual_norm(problem.g, g)
        else:
            g_term = resolvent._data_weighted_norm(mesh, problem.g, g, order=1,
                                                   family="scalar")
            sg_term = abs(problem.s) * spaces.dual_norm_of_callable(mesh, problem.g, g)
    du_term = spaces.boundary_weighted_norm(solution.u, g, use_gradient=True,
                                            n_gauss=facet_gauss)
    rhs = f_term + g_term + sg_term + du_term
    return {
        "gamma": list(garr),
        "s": complex(problem.s),
        "lhs": lhs,
        "rhs_terms": {"f": f_term, "g": g_term, "sg_dual": sg_term,
                      "Du_boundary": du_term},
        "rhs": rhs,
        "ratio": lhs / rhs if rhs > 0 else None,
    }
