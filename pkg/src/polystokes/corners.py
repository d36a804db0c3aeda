"""Corner exponents and admissible weight windows.

The exponent of a corner with opening ``a`` is the root of

    sin(lambda * a) + lambda * sin(a) = 0

with smallest positive real part.  Roots are located by an
argument-principle scan of a rectangle in the right half plane,
polished by Newton iteration, and certified by a zero winding count
over the strip of smaller real parts.  The per-corner admissible
weight interval combines the exponent with the aperture bound pi/a.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BoundaryRoot, CertificationFailed, NotConverged

IM_BOUND_DEFAULT = 6.1


def eigen_fn(lam, alpha):
    """sin(lam*alpha) + lam*sin(alpha), vectorized in lam."""
    return np.sin(lam * alpha) + lam * np.sin(alpha)


def eigen_fn_prime(lam, alpha):
    return alpha * np.cos(lam * alpha) + np.sin(alpha)


@dataclass(frozen=True)
class CornerExponent:
    """Root of the corner eigenvalue equation with the smallest Re > 0."""

    alpha: float
    lambda_star: complex
    residual: float
    certified: bool
    multiplicity: int = 1


@dataclass(frozen=True)
class WeightWindow:
    """Admissible open interval for a corner weight (0 always excluded)."""

    lower: float
    upper: float
    excluded: float = 0.0

    @property
    def empty(self):
        return self.lower >= self.upper

    def contains(self, beta):
        return (not self.empty) and self.lower < beta < self.upper and beta != self.excluded


def _track_argument(alpha, za, zb, max_ref=60):
    """Total argument change of the eigen function along segment za->zb."""
    n = max(24, int(16 * abs(zb - za) * max(alpha, 1.0)))
    t = np.linspace(0.0, 1.0, n + 1)
    z = za + (zb - za) * t
    v = eigen_fn(z, alpha)
    for _ in range(max_ref):
        if np.any(np.abs(v) == 0.0):
            raise BoundaryRoot("zero of the eigen function on the contour")
        dphi = np.angle(v[1:] / v[:-1])
        bad = np.abs(dphi) > 0.5 * np.pi
        if not bad.any():
            break
        idx = np.nonzero(bad)[0]
        tm = 0.5 * (t[idx] + t[idx + 1])
        zm = za + (zb - za) * tm
        t = np.insert(t, idx + 1, tm)
        z = np.insert(z, idx + 1, zm)
        v = np.insert(v, idx + 1, eigen_fn(zm, alpha))
    else:
        raise BoundaryRoot("argument tracking kept refining; zero too close to contour")
    return float(np.angle(v[1:] / v[:-1]).sum()), float(np.abs(v).min())


def count_roots_in_rectangle(alpha, rect, min_boundary=1e-13):
    """Winding number of the eigen function around rect=(re0,re1,im0,im1).

    Raises BoundaryRoot when the minimum |f| sampled on the contour is
    below min_boundary (the caller should perturb the rectangle).
    """
    re0, re1, im0, im1 = rect
    corners = [complex(re0, im0), complex(re1, im0), complex(re1, im1),
               complex(re0, im1), complex(re0, im0)]
    total = 0.0
    minabs = np.inf
    for k in range(4):
        dphi, mn = _track_argument(alpha, corners[k], corners[k + 1])
        total += dphi
        minabs = min(minabs, mn)
    if minabs < min_boundary:
        raise BoundaryRoot(f"|f| = {minabs:.3e} on the rectangle boundary")
    n = total / (2 * np.pi)
    ni = int(round(n))
    if abs(n - ni) > 0.01:
        raise BoundaryRoot(f"non-integer winding number {n:.6f}")
    return ni


def _newton(alpha, z0, tol=1e-14, itmax=80):
    z = complex(z0)
    for _ in range(itmax):
        fz = complex(eigen_fn(z, alpha))
        dz = complex(eigen_fn_prime(z, alpha))
        if dz == 0:
            raise NotConverged("vanishing derivative in Newton step")
        step = fz / dz
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    raise NotConverged(f"Newton did not converge from {z0}")


def _find_all_roots(alpha, re_min, re_max, im_min, im_max):
    """All roots in the rectangle by winding subdivision + Newton polish."""
    roots = []
    work = [(re_min, re_max, im_min, im_max)]
    budget = 4000
    while work:
        budget -= 1
        if budget < 0:
            raise NotConverged("rectangle subdivision runaway")
        re0, re1, im0, im1 = work.pop()
        try:
            n = count_roots_in_rectangle(alpha, (re0, re1, im0, im1))
        except BoundaryRoot:
            pad = 0.0043 * max(re1 - re0, im1 - im0)
            n = count_roots_in_rectangle(alpha, (re0 - pad, re1 + pad, im0 - pad, im1 + pad))
        if n == 0:
            continue
        w, h = re1 - re0, im1 - im0
        if n == 1 or max(w, h) < 1e-5:
            try:
                z = _newton(alpha, complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)))
            except NotConverged:
                z = None
            if z is not None:
                inside = (re0 - 1e-9 <= z.real <= re1 + 1e-9
                          and im0 - 1e-9 <= z.imag <= im1 + 1e-9)
                if inside and abs(eigen_fn(z, alpha)) < 1e-10:
                    if not any(abs(z - r[0]) < 1e-8 for r in roots):
                        roots.append((z, n))
                    continue
            if max(w, h) < 1e-7:
                raise NotConverged(f"cannot isolate root in tiny cell near {re0}+{im0}j")
        # split the longer side, with a deterministic off-center cut
        if w >= h:
            mid = re0 + 0.5137 * w
            work.append((re0, mid, im0, im1))
            work.append((mid, re1, im0, im1))
        else:
            mid = im0 + 0.5137 * h
            work.append((re0, re1, im0, mid))
            work.append((re0, re1, mid, im1))
    return roots


@lru_cache(maxsize=4096)
def solve_corner_exponent(alpha, im_bound=IM_BOUND_DEFAULT, certify=True):
    """Exponent of a corner with opening alpha in (0, 2*pi].

    The scan rectangle grows like 1/alpha so narrow wedges (whose first
    root scales like 1/alpha) stay inside; the certification step counts
    roots in the strip 0 < Re < Re(lambda*) - 1e-8.
    """
    if not 0 < alpha <= 2 * np.pi:
        raise ValueError("alpha must lie in (0, 2*pi]")
    re_max = max(4.3, 6.5 / alpha)
    im_max = max(im_bound, 3.5 / alpha)
    roots = _find_all_roots(alpha, 0.01, re_max, -0.37, im_max)
    if not roots:
        raise NotConverged(f"no roots located for alpha={alpha}")
    rmin = min(z.real for z, _ in roots)
    cands = [(z, m) for z, m in roots if z.real < rmin + 1e-9]
    lam, mult = max(cands, key=lambda zm: zm[0].imag)
    if lam.imag < 0:
        lam = lam.conjugate()
    if abs(lam.imag) < 1e-12:
        lam = complex(lam.real, 0.0)
    residual = float(abs(eigen_fn(lam, alpha)))

    certified = False
    if certify:
        left = 1e-6
        right = lam.real - 1e-8
        bound = max(im_bound, 2.0 * abs(lam.imag) + 1.0)
        if right <= left:
            certified = True  # empty strip
        else:
            count = count_roots_in_rectangle(alpha, (left, right, -bound, bound))
            if count != 0:
                raise CertificationFailed(
                    f"{count} root(s) with smaller real part for alpha={alpha}"
                )
            certified = True
    return CornerExponent(alpha=float(alpha), lambda_star=lam, residual=residual,
                          certified=certified, multiplicity=mult)


def admissible_weight_window(alpha):
    """Weight interval max(1-Re l*, -pi/a) < beta < min(1, pi/a), beta != 0."""
    exp = solve_corner_exponent(float(alpha))
    lower = max(1.0 - exp.lambda_star.real, -np.pi / alpha)
    upper = min(1.0, np.pi / alpha)
    return WeightWindow(lower=lower, upper=upper)


def regularity_weight_window(alpha):
    """Weaker per-corner interval 1 - Re l* < beta < 1 (beta != 0) under
    which the weighted regularity estimate holds; used by audits."""
    exp = solve_corner_exponent(float(alpha))
    return WeightWindow(lower=1.0 - exp.lambda_star.real, upper=1.0)


def exponent_table(alphas):
    """Rows (alpha, Re l*, Im l*, residual, lower, upper, empty) per angle."""
    rows = []
    for a in alphas:
        exp = solve_corner_exponent(float(a))
        win = admissible_weight_window(float(a))
        rows.append((float(a), exp.lambda_star.real, exp.lambda_star.imag,
                     exp.residual, win.lower, win.upper, win.empty))
    return rows
