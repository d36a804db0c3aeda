"""Pure-numpy fallback for the element kernels."""

import numpy as np

BACKEND = "numpy"


def local_stokes_matrices(verts, qw, p1v, p2v, dp2):
    """Batched local matrices on straight triangles.

    verts : (ne, 3, 2) vertex coordinates
    qw    : (nq,) reference weights summing to 1
    p1v   : (nq, 3) P1 values at quadrature points
    p2v   : (nq, 6) P2 values
    dp2   : (nq, 6, 3) P2 derivatives w.r.t. barycentric coordinates

    Returns (m1, m2, k2, eps, div) where eps is the vector-P2 matrix of
    2*int(strain:strain) with dof order [x-components, y-components] and
    div[i, j] = int p1_i * (div of vector basis j).
    """
    verts = np.asarray(verts, dtype=np.float64)
    ne = verts.shape[0]
    e1 = verts[:, 1] - verts[:, 0]
    e2 = verts[:, 2] - verts[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates, glam[e, k, :]
    glam = np.empty((ne, 3, 2))
    glam[:, 1, 0] = e2[:, 1] / det
    glam[:, 1, 1] = -e2[:, 0] / det
    glam[:, 2, 0] = -e1[:, 1] / det
    glam[:, 2, 1] = e1[:, 0] / det
    glam[:, 0] = -glam[:, 1] - glam[:, 2]

    # physical P2 gradients at each quadrature point: (ne, nq, 6, 2)
    g2 = np.einsum("qik,ekd->eqid", dp2, glam)

    wA = qw[None, :] * area[:, None]                      # (ne, nq)
    m1 = np.einsum("eq,qi,qj->eij", wA, p1v, p1v)
    m2 = np.einsum("eq,qi,qj->eij", wA, p2v, p2v)
    k2 = np.einsum("eq,eqid,eqjd->eij", wA, g2, g2)

    gx = g2[..., 0]
    gy = g2[..., 1]
    xx = np.einsum("eq,eqi,eqj->eij", wA, gx, gx)
    yy = np.einsum("eq,eqi,eqj->eij", wA, gy, gy)
    xy = np.einsum("eq,eqi,eqj->eij", wA, gy, gx)

    eps = np.empty((ne, 12, 12))
    eps[:, :6, :6] = 2.0 * xx + yy
    eps[:, :6, 6:] = xy
    eps[:, 6:, :6] = xy.transpose(0, 2, 1)
    eps[:, 6:, 6:] = 2.0 * yy + xx

    div = np.empty((ne, 3, 12))
    div[:, :, :6] = np.einsum("eq,qi,eqj->eij", wA, p1v, gx)
    div[:, :, 6:] = np.einsum("eq,qi,eqj->eij", wA, p1v, gy)
    return m1, m2, k2, eps, div


def eval_p2(local_coeffs, bary, glam, order):
    """Evaluate a P2 scalar field at one point per row.

    local_coeffs : (m, 6) complex, bary : (m, 3), glam : (m, 3, 2).
    Returns (vals, grads, hess); higher entries are None below `order`.
    """
    lam = bary
    phi = np.empty(lam.shape[:1] + (6,))
    phi[:, 0] = lam[:, 0] * (2 * lam[:, 0] - 1)
    phi[:, 1] = lam[:, 1] * (2 * lam[:, 1] - 1)
    phi[:, 2] = lam[:, 2] * (2 * lam[:, 2] - 1)
    phi[:, 3] = 4 * lam[:, 1] * lam[:, 2]
    phi[:, 4] = 4 * lam[:, 0] * lam[:, 2]
    phi[:, 5] = 4 * lam[:, 0] * lam[:, 1]
    vals = np.einsum("mi,mi->m", local_coeffs, phi)
    grads = hess = None
    if order >= 1:
        # dphi/dlam: (m, 6, 3)
        dphi = np.zeros(lam.shape[:1] + (6, 3))
        for v in range(3):
            dphi[:, v, v] = 4 * lam[:, v] - 1
        dphi[:, 3, 1] = 4 * lam[:, 2]
        dphi[:, 3, 2] = 4 * lam[:, 1]
        dphi[:, 4, 0] = 4 * lam[:, 2]
        dphi[:, 4, 2] = 4 * lam[:, 0]
        dphi[:, 5, 0] = 4 * lam[:, 1]
        dphi[:, 5, 1] = 4 * lam[:, 0]
        gphi = np.einsum("mik,mkd->mid", dphi, glam)
        grads = np.einsum("mi,mid->md", local_coeffs, gphi)
    if order >= 2:
        # second derivatives are constant per element
        outer = np.einsum("mkd,mle->mklde", glam, glam)
        h = np.zeros(lam.shape[:1] + (6, 2, 2))
        for v in range(3):
            h[:, v] = 4 * outer[:, v, v]
        h[:, 3] = 4 * (outer[:, 1, 2] + outer[:, 2, 1])
        h[:, 4] = 4 * (outer[:, 0, 2] + outer[:, 2, 0])
        h[:, 5] = 4 * (outer[:, 0, 1] + outer[:, 1, 0])
        hess = np.einsum("mi,mide->mde", local_coeffs, h)
    return vals, grads, hess


def eval_p1(local_coeffs, bary, glam, order):
    """Evaluate a P1 scalar field at one point per row (see eval_p2)."""
    vals = np.einsum("mi,mi->m", local_coeffs, bary)
    grads = None
    if order >= 1:
        grads = np.einsum("mi,mid->md", local_coeffs, glam)
    hess = np.zeros(bary.shape[:1] + (2, 2), dtype=local_coeffs.dtype) if order >= 2 else None
    return vals, grads, hess
