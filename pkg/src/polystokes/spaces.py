"""Weighted norms over the polygon: interior, boundary and dual variants.

The interior norm of order ``l`` with weight vector ``beta`` integrates
``prod_j r_j^(2(beta_j - l + k)) * |D^a u|^2`` over all derivative
orders ``k = |a| <= l``; corner-singular weights are resolved by the
adaptive engine in :mod:`polystokes.fem`.  The dual norm realizes
``(V_{-beta}^1)^*`` on the discrete space through its Riesz problem;
corner-vertex dofs are excluded there because the continuous space
consists of functions cut off at the corners.  (A variant with a
boundary-restricted test space is sometimes written for this dual; only
the unconstrained realization is implemented.)
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fem
from .errors import SolverFailure

FACET_GAUSS_DEFAULT = 8


@dataclass(frozen=True)
class WeightVector:
    """Per-corner weight tuple beta = (beta_1, ..., beta_n)."""

    beta: tuple

    def __init__(self, beta):
        object.__setattr__(self, "beta", tuple(float(b) for b in np.atleast_1d(beta)))

    def __len__(self):
        return len(self.beta)

    def __getitem__(self, j):
        return self.beta[j]

    def as_array(self):
        return np.asarray(self.beta)

    def __neg__(self):
        return WeightVector(tuple(-b for b in self.beta))


def weight_for(domain, value):
    """Broadcast a scalar or sequence to a WeightVector for the domain."""
    if isinstance(value, WeightVector):
        if len(value) != domain.n_corners:
            raise ValueError("weight length does not match corner count")
        return value
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(domain.n_corners, arr[0])
    if arr.size != domain.n_corners:
        raise ValueError("weight length does not match corner count")
    return WeightVector(arr)


@dataclass(frozen=True)
class NormSpec:
    """Which norm to evaluate: kind in {'V','W','boundary','dual'}."""

    kind: str
    l: int = 0
    weight: WeightVector = None

    def __post_init__(self):
        if self.kind in ("V", "boundary", "dual") and self.weight is None:
            raise ValueError(f"{self.kind}-norm needs a weight vector")
        if self.kind in ("V", "W") and self.l not in (0, 1, 2):
            raise ValueError("interior norms support l in {0, 1, 2}")
        if self.kind == "boundary" and self.l != 0:
            raise ValueError("boundary norm is order 0")
        if self.kind == "dual" and self.l != 1:
            raise ValueError("dual norm is order 1")


def _squared_derivative_sums(fld, elems, pts, l):
    """List of per-point sums over |a| = k of |D^a u|^2 for k = 0..l."""
    vals, grads, hess = fem.eval_field(fld, elems, pts, order=l)
    out = [np.abs(vals) ** 2 if fld.family != "p2v" else (np.abs(vals) ** 2).sum(axis=1)]
    if l >= 1:
        g2 = np.abs(grads) ** 2
        out.append(g2.sum(axis=tuple(range(1, g2.ndim))))
    if l >= 2:
        if fld.family == "p2v":
            h2 = (np.abs(hess[:, :, 0, 0]) ** 2 + np.abs(hess[:, :, 0, 1]) ** 2
                  + np.abs(hess[:, :, 1, 1]) ** 2).sum(axis=1)
        else:
            h2 = (np.abs(hess[:, 0, 0]) ** 2 + np.abs(hess[:, 0, 1]) ** 2
                  + np.abs(hess[:, 1, 1]) ** 2)
        out.append(h2)
    return out


def weighted_norm(fld, spec, rel_tol=1e-9):
    """V- or W-norm of a discrete field (broken derivatives for l = 2)."""
    mesh = fld.mesh
    if spec.kind == "W":
        if spec.l == 0:
            return fem.l2_norm(fld)
        if spec.l == 1:
            return fem.w1_norm(fld)
        sq = fem.w1_norm(fld) ** 2 + _broken_h2_squared(fld)
        return float(np.sqrt(sq))
    if spec.kind != "V":
        raise ValueError("weighted_norm handles kinds 'V' and 'W'")
    beta = weight_for(mesh.domain, spec.weight).as_array()
    l = spec.l
    exps = [2.0 * (beta - l + k) for k in range(l + 1)]

    def integrand(elems, pts):
        sums = _squared_derivative_sums(fld, elems, pts, l)
        total = np.zeros(len(pts))
        for k, sq in enumerate(sums):
            total += fem.corner_weight(mesh.domain, pts, exps[k]) * sq.real
        return total

    per_elem = fem.integrate_elements(mesh, integrand, ncols=1, rel_tol=rel_tol).real
    total = float(per_elem.sum())
    owners, extra = fem.arc_segment_contributions(mesh, integrand, ncols=1)
    if len(owners):
        total += float(extra.real.sum())
    return float(np.sqrt(max(total, 0.0)))


def _broken_h2_squared(fld):
    """Element-wise sum of |second derivative|^2 (exact, hessians constant)."""
    mesh = fld.mesh
    centers = mesh.tri_vertices().mean(axis=1)
    elems = np.arange(mesh.n_triangles)
    _, _, hess = fem.eval_field(fld, elems, centers, order=2)
    if fld.family == "p2v":
        h2 = (np.abs(hess[:, :, 0, 0]) ** 2 + np.abs(hess[:, :, 0, 1]) ** 2
              + np.abs(hess[:, :, 1, 1]) ** 2).sum(axis=1)
    else:
        h2 = (np.abs(hess[:, 0, 0]) ** 2 + np.abs(hess[:, 0, 1]) ** 2
              + np.abs(hess[:, 1, 1]) ** 2)
    return float((h2 * mesh.areas()).sum())


def boundary_weighted_norm(fld, weight, use_gradient=False, n_gauss=FACET_GAUSS_DEFAULT,
                           rel_tol=1e-9):
    """Boundary trace norm with weight prod_j r_j^(2*gamma_j - 1).

    With use_gradient=True the integrand is the squared Frobenius norm
    of the full gradient matrix of the (vector) field, taken one-sided
    from the facet's owner element.
    """
    mesh = fld.mesh
    fc = fem.fem_cache(mesh)
    gamma = weight_for(mesh.domain, weight).as_array()
    exps = 2.0 * gamma - 1.0

    def integrand(fids, pts):
        elems = fc.facet_tri[fids]
        order = 1 if use_gradient else 0
        vals, grads, _ = fem.eval_field(fld, elems, pts, order=order)
        if use_gradient:
            sq = (np.abs(grads) ** 2).sum(axis=tuple(range(1, grads.ndim)))
        else:
            sq = np.abs(vals) ** 2
            if sq.ndim > 1:
                sq = sq.sum(axis=1)
        return fem.corner_weight(mesh.domain, pts, exps) * sq.real

    per_facet = fem.integrate_boundary(mesh, integrand, ncols=1, rel_tol=rel_tol,
                                       n_gauss=n_gauss).real
    return float(np.sqrt(max(per_facet.sum(), 0.0)))


# ---------------------------------------------------------------------------
# dual norm via the discrete Riesz problem


def riesz_gram(mesh, beta, rel_tol=1e-9):
    """Gram matrix of the V_{-beta}^1 inner product on P2 minus corner dofs.

    Returns (A, keep) where keep indexes the retained scalar P2 dofs.
    """
    fc = fem.fem_cache(mesh)
    key = ("riesz", tuple(np.round(weight_for(mesh.domain, beta).as_array(), 14)))
    if key in fc.matrices:
        return fc.matrices[key]
    b = weight_for(mesh.domain, beta).as_array()
    e_grad = -2.0 * b
    e_mass = -2.0 * b - 2.0
    bary, _ = fem.tri_rule("d5")
    iu = np.triu_indices(6)
    pair_i, pair_j = iu
    corner_mask = fc.corner_vertex_mask

    def integrand(elems, pts):
        tv = mesh.nodes[mesh.triangles[elems]]
        lam = fem.barycentric(tv, pts)
        p2v, dp2 = fem.p2_reference(lam)
        gl = fc.glam[elems]
        gphi = np.einsum("mik,mkd->mid", dp2, gl)
        wg = fem.corner_weight(mesh.domain, pts, e_grad)
        wm = fem.corner_weight(mesh.domain, pts, e_mass)
        mass_pairs = p2v[:, pair_i] * p2v[:, pair_j]
        grad_pairs = np.einsum("mid,mjd->mij", gphi, gphi)[:, pair_i, pair_j]
        # zero pairs touching a corner vertex (those dofs are dropped)
        drop = corner_mask[elems]
        bad = drop[:, pair_i.clip(max=2)] & (pair_i < 3)
        bad |= drop[:, pair_j.clip(max=2)] & (pair_j < 3)
        mass_pairs = np.where(bad, 0.0, mass_pairs)
        grad_pairs = np.where(bad, 0.0, grad_pairs)
        return np.concatenate([wm[:, None] * mass_pairs, wg[:, None] * grad_pairs], axis=1)

    per_elem = fem.integrate_elements(mesh, integrand, ncols=2 * len(pair_i)).real
    local = per_elem[:, :len(pair_i)] + per_elem[:, len(pair_i):]
    dofs = fc.tri2dof
    rows = dofs[:, pair_i].ravel()
    cols = dofs[:, pair_j].ravel()
    vals = local.ravel()
    off = pair_i != pair_j
    offm = np.tile(off, len(dofs))
    A = sp.coo_matrix(
        (np.concatenate([vals, vals[offm]]),
         (np.concatenate([rows, cols[offm]]), np.concatenate([cols, rows[offm]]))),
        shape=(fc.n2, fc.n2),
    ).tocsr()
    keep = np.setdiff1d(np.arange(fc.n2), fc.corner_nodes)
    A = A[keep][:, keep].tocsc()
    fc.matrices[key] = (A, keep)
    return A, keep


def dual_norm(g, beta, rel_tol=1e-9, return_riesz=False):
    """Discrete (V_{-beta}^1)^* norm of scalar data g (field or callable)."""
    if callable(g):
        raise TypeError("pass the mesh-bound field; use dual_norm_of_callable")
    mesh = g.mesh
    rhs = pair_with_p2(g)
    return _dual_from_rhs(mesh, rhs, beta, rel_tol, return_riesz)


def dual_norm_of_callable(mesh, g, beta, rel_tol=1e-9):
    rhs = fem.assemble_load(mesh, g, "p2")
    return _dual_from_rhs(mesh, rhs, beta, rel_tol, False)


def pair_with_p2(g):
    """Vector of (g, phi_i) over the scalar P2 basis."""
    mats = fem.base_matrices(g.mesh)
    if g.family == "p1":
        return mats["m12"].T.dot(g.coeffs)
    if g.family == "p2":
        return mats["m2"].dot(g.coeffs)
    raise ValueError("dual norm applies to scalar data")


def _dual_from_rhs(mesh, rhs, beta, rel_tol, return_riesz):
    A, keep = riesz_gram(mesh, beta, rel_tol=rel_tol)
    b = rhs[keep]
    if not np.any(b):
        z = np.zeros(fem.fem_cache(mesh).n2, dtype=np.complex128)
        fldz = fem.DiscreteField(mesh, "p2", z)
        return (0.0, fldz) if return_riesz else 0.0
    lu = spla.splu(A)
    zk = lu.solve(b.real) + 1j * lu.solve(b.imag)
    res = np.linalg.norm(A.dot(zk) - b) / np.linalg.norm(b)
    if res > 1e-8:
        raise SolverFailure(f"Riesz solve residual {res:.2e}")
    val = float(np.sqrt(max(np.vdot(zk, b).real, 0.0)))
    if not return_riesz:
        return val
    z = np.zeros(fem.fem_cache(mesh).n2, dtype=np.complex128)
    z[keep] = zk
    return val, fem.DiscreteField(mesh, "p2", z)


def v1_weighted_norm_sq(fld, beta):
    """|v|^2 in the V_{-beta}^1 inner product used by the Riesz problem."""
    mesh = fld.mesh
    A, keep = riesz_gram(mesh, beta)
    c = fld.coeffs[keep]
    return float(np.vdot(c, A.dot(c)).real)


def norm_report_record(kind, l, weight, value, quadrature_depth=None):
    """JSON-ready record for a single norm evaluation."""
    return {
        "norm_kind": kind,
        "l": int(l),
        "beta": None if weight is None else list(np.asarray(weight.as_array(), dtype=float)),
        "value": float(value),
        "quadrature_depth": quadrature_depth,
    }
