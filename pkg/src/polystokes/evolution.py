"""Time-dependent solves: Bromwich-line quadrature and an Euler oracle.

Data enters as sums of separable terms (spatial part times a temporal
profile with a known transform).  The contour path solves the
parameter-dependent problem at nodes on Re s = gamma, exploits the
conjugate symmetry of real data (only the upper half line is solved)
and reconstructs time samples by trapezoidal quadrature; doubling the
node count provides the resolution estimate.  The implicit Euler
scheme reuses one factorized operator at s = 1/dt and serves as the
independent cross-check.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import fem, resolvent, spaces
from .errors import ContourUnderResolved, IncompatibleData, TransformUnderResolved

GAMMA0_DEFAULT = 1.0


# ---------------------------------------------------------------------------
# temporal profiles


class ExpProfile:
    """tau(t) = amplitude * exp(-rate * t); rate 0 gives a constant."""

    def __init__(self, rate, amplitude=1.0):
        self.rate = float(rate)
        self.amplitude = float(amplitude)

    def value(self, t):
        return self.amplitude * np.exp(-self.rate * np.asarray(t, dtype=float))

    def derivative(self, t):
        return -self.rate * self.value(t)

    def transform(self, s):
        return self.amplitude / (s + self.rate)

    def transform_truncated(self, s, T):
        return self.amplitude * (1.0 - np.exp(-(s + self.rate) * T)) / (s + self.rate)


class OneMinusExp:
    """tau(t) = 1 - exp(-rate * t); vanishes at t = 0."""

    def __init__(self, rate=1.0):
        self.rate = float(rate)

    def value(self, t):
        return 1.0 - np.exp(-self.rate * np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.rate * np.exp(-self.rate * np.asarray(t, dtype=float))

    def transform(self, s):
        return 1.0 / s - 1.0 / (s + self.rate)

    def transform_truncated(self, s, T):
        return (1.0 - np.exp(-s * T)) / s \
            - (1.0 - np.exp(-(s + self.rate) * T)) / (s + self.rate)


class PolyProfile:
    """tau(t) = sum_k c_k t^k."""

    def __init__(self, coeffs):
        self.coeffs = tuple(float(c) for c in coeffs)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coeffs):
            out = out + c * t**k
        return out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, c in enumerate(self.coeffs):
            if k:
                out = out + k * c * t ** (k - 1)
        return out

    def transform(self, s):
        return sum(c * math.factorial(k) / s ** (k + 1)
                   for k, c in enumerate(self.coeffs))

    def transform_truncated(self, s, T):
        total = 0.0 + 0.0j
        for k, c in enumerate(self.coeffs):
            partial = sum((s * T) ** j / math.factorial(j) for j in range(k + 1))
            total += c * math.factorial(k) / s ** (k + 1) * (1.0 - np.exp(-s * T) * partial)
        return total


class TentProfile:
    """Piecewise-linear 0 -> 1 -> 0 tent on [t0, t2] with peak at t1."""

    def __init__(self, t0, t1, t2):
        if not t0 < t1 < t2:
            raise ValueError("need t0 < t1 < t2")
        self.t0, self.t1, self.t2 = float(t0), float(t1), float(t2)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        up = (t - self.t0) / (self.t1 - self.t0)
        down = (self.t2 - t) / (self.t2 - self.t1)
        return np.clip(np.minimum(up, down), 0.0, None)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        out[(t > self.t0) & (t < self.t1)] = 1.0 / (self.t1 - self.t0)
        out[(t > self.t1) & (t < self.t2)] = -1.0 / (self.t2 - self.t1)
        return out

    def transform(self, s):
        # integral of the hat: second antiderivative of its curvature spikes
        a, b, c = self.t0, self.t1, self.t2
        ka = 1.0 / (b - a)
        kc = 1.0 / (c - b)
        return (ka * np.exp(-s * a) - (ka + kc) * np.exp(-s * b)
                + kc * np.exp(-s * c)) / s**2


class SampledProfile:
    """Profile given by dense time samples; transform by trapezoid rule.

    The transform error is estimated by comparing against the coarsened
    (every other sample) rule; TransformUnderResolved is raised when the
    estimate exceeds tol.
    """

    def __init__(self, times, values, tol=1e-8):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if len(self.times) < 5 or len(self.times) != len(self.values):
            raise ValueError("need matching sample arrays (>= 5 points)")
        self.tol = float(tol)

    def value(self, t):
        return np.interp(t, self.times, self.values)

    def derivative(self, t):
        dt = np.gradient(self.values, self.times)
        return np.interp(t, self.times, dt)

    def transform(self, s):
        w = self.values * np.exp(-s * self.times)
        fine = np.trapezoid(w, self.times)
        coarse = np.trapezoid(w[::2], self.times[::2])
        err = abs(fine - coarse) / 3.0
        if err > self.tol * max(1.0, abs(fine)):
            raise TransformUnderResolved(
                f"transform quadrature error estimate {err:.2e}")
        return fine


class TruncatedProfile:
    """Extension of a base profile beyond time T: zero or exponential tail."""

    def __init__(self, base, T, tail_rate=None):
        self.base = base
        self.T = float(T)
        self.tail_rate = tail_rate

    def value(self, t):
        t = np.asarray(t, dtype=float)
        inside = self.base.value(np.minimum(t, self.T))
        if self.tail_rate is None:
            return np.where(t <= self.T, inside, 0.0)
        tail = self.base.value(self.T) * np.exp(-self.tail_rate * np.maximum(t - self.T, 0.0))
        return np.where(t <= self.T, inside, tail)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = self.base.derivative(np.minimum(t, self.T))
        if self.tail_rate is None:
            return np.where(t <= self.T, inside, 0.0)
        tail = (-self.tail_rate * self.base.value(self.T)
                * np.exp(-self.tail_rate * np.maximum(t - self.T, 0.0)))
        return np.where(t <= self.T, inside, tail)

    def transform(self, s):
        head = self.base.transform_truncated(s, self.T)
        if self.tail_rate is None:
            return head
        return head + self.base.value(self.T) * np.exp(-s * self.T) / (s + self.tail_rate)


# ---------------------------------------------------------------------------
# separable data


@dataclass(frozen=True)
class SeparableTerm:
    spatial: object      # callable(pts) or DiscreteField
    profile: object


class SeparableData:
    """Sum of separable terms; family 'vec' (force) or 'scalar' (divergence)."""

    def __init__(self, terms, family):
        self.terms = tuple(terms)
        self.family = family

    def value_callable(self, t):
        parts = [(term.spatial, complex(np.asarray(term.profile.value(t)).item()))
                 for term in self.terms]
        return _combine(parts, self.family)

    def transform_callable(self, s):
        parts = [(term.spatial, complex(term.profile.transform(s)))
                 for term in self.terms]
        return _combine(parts, self.family)

    def load_matrix(self, mesh):
        """Stacked spatial load vectors, one column per term."""
        fam = "p2v" if self.family == "vec" else "p1"
        cols = [resolvent._data_load(mesh, term.spatial, fam) for term in self.terms]
        return np.stack(cols, axis=1) if cols else None

    def profile_values(self, t):
        return np.array([complex(np.asarray(term.profile.value(t)).item())
                         for term in self.terms])

    def profile_transforms(self, s):
        return np.array([complex(term.profile.transform(s)) for term in self.terms])


def _combine(parts, family):
    def call(pts):
        out = None
        for spatial, c in parts:
            if isinstance(spatial, fem.DiscreteField):
                raise TypeError("combine discrete spatial parts via load vectors")
            v = c * np.asarray(spatial(pts))
            out = v if out is None else out + v
        if out is None:
            return np.zeros(len(pts))
        return out
    return call


# ---------------------------------------------------------------------------
# evolution problem


@dataclass(frozen=True)
class EvolutionProblem:
    """Time-dependent data on (0, T) with contour configuration."""

    mesh: object
    f: object = None         # SeparableData (family 'vec') or None
    g: object = None         # SeparableData (family 'scalar') or None
    T: float = 1.0
    gamma: float = 2.0
    gamma0: float = GAMMA0_DEFAULT
    beta: object = None

    def __post_init__(self):
        if self.gamma <= self.gamma0:
            raise ValueError("contour abscissa must exceed gamma0")


@dataclass
class Trajectory:
    times: np.ndarray
    velocities: list
    pressures: list
    method: str
    contour: dict = field(default_factory=dict)
    error_estimate: float = 0.0
    reports: dict = field(default_factory=dict)

    def velocity_l2(self, k):
        return fem.l2_norm(self.velocities[k])

    def pressure_mean(self, k):
        return complex(fem.field_integral(self.pressures[k]))


def check_compatibility(problem, t_samples=None):
    """Mean-zero of g over time, g(.,0) = 0, and weight admissibility."""
    mesh = problem.mesh
    report = {"max_mean_g": 0.0, "g0_norm": 0.0, "beta_admissible": None, "ok": True}
    if t_samples is None:
        t_samples = np.linspace(0.0, problem.T, 9)
    if problem.g is not None:
        gl = problem.g.load_matrix(mesh)
        means = []
        for t in t_samples:
            gv = gl.dot(problem.g.profile_values(t)) if gl is not None else 0.0
            means.append(abs(complex(np.sum(gv))))
        report["max_mean_g"] = float(max(means)) if means else 0.0
        g0 = gl.dot(problem.g.profile_values(0.0)) if gl is not None else np.zeros(1)
        # L2 norm of the P1 Riesz representative of the pairing at t=0
        report["g0_norm"] = resolvent.div_defect_norm(mesh, g0) if gl is not None else 0.0
        scale = max(1.0, float(np.abs(gl).sum())) if gl is not None else 1.0
        if report["max_mean_g"] > 1e-10 * scale:
            report["ok"] = False
            report["mean_violation"] = True
        if report["g0_norm"] > 1e-10 * scale:
            report["ok"] = False
            report["initial_violation"] = True
    if problem.beta is not None:
        from . import corners as _corners

        verdicts = []
        bvec = spaces.weight_for(mesh.domain, problem.beta)
        for j, alpha in enumerate(mesh.domain.openings):
            win = _corners.admissible_weight_window(float(alpha))
            verdicts.append(bool(win.contains(bvec[j])))
        report["beta_admissible"] = verdicts
    return report


def _require_compatible(problem):
    rep = check_compatibility(problem)
    if not rep["ok"]:
        raise IncompatibleData(f"evolution data rejected: {rep}")
    return rep


def laplace_transform_data(problem, s):
    """Transforms (f_hat, g_hat) of the data at parameter s as callables."""
    fhat = problem.f.transform_callable(s) if problem.f is not None else None
    ghat = problem.g.transform_callable(s) if problem.g is not None else None
    return fhat, ghat


def _contour_nodes(n_nodes, cutoff, t_max):
    if n_nodes % 2 == 0:
        raise ValueError("node count must be odd (symmetric contour)")
    if cutoff is None:
        domega = np.pi / (2.0 * max(t_max, 1e-3))
        cutoff = 0.5 * (n_nodes - 1) * domega
    m = (n_nodes + 1) // 2
    omegas = np.linspace(0.0, cutoff, m)
    weights = np.full(m, omegas[1] - omegas[0] if m > 1 else 2 * cutoff)
    weights[-1] *= 0.5
    return omegas, weights, float(cutoff)


def _contour_solves(problem, omegas):
    """Resolvent solves at s = gamma + i*omega for omega >= 0."""
    mesh = problem.mesh
    fl = problem.f.load_matrix(mesh) if problem.f is not None else None
    gl = problem.g.load_matrix(mesh) if problem.g is not None else None
    fc = fem.fem_cache(mesh)
    sols = []
    for om in omegas:
        sv = complex(problem.gamma, om)
        fvec = fl.dot(problem.f.profile_transforms(sv)) if fl is not None \
            else np.zeros(2 * fc.n2, dtype=np.complex128)
        gvec = gl.dot(problem.g.profile_transforms(sv)) if gl is not None \
            else np.zeros(fc.n1, dtype=np.complex128)
        op = resolvent.resolvent_operator(mesh, sv)
        U, P, _ = op.solve(fvec, gvec)
        sols.append((U, P))
    return sols


def _reconstruct(problem, t_samples, omegas, weights, sols):
    """Trapezoid Bromwich sum folded over the conjugate-symmetric line."""
    mesh = problem.mesh
    fc = fem.fem_cache(mesh)
    mats = fem.base_matrices(mesh)
    area = fem.domain_area(mesh)
    out_u, out_p = [], []
    for t in t_samples:
        if t == 0.0:
            out_u.append(np.zeros(2 * fc.n2, dtype=np.complex128))
            out_p.append(np.zeros(fc.n1, dtype=np.complex128))
            continue
        scale = np.exp(problem.gamma * t) / (2.0 * np.pi)
        U = weights[0] * sols[0][0] * np.exp(1j * omegas[0] * t)
        P = weights[0] * sols[0][1] * np.exp(1j * omegas[0] * t)
        for w, om, (Um, Pm) in zip(weights[1:], omegas[1:], sols[1:]):
            ph = np.exp(1j * om * t)
            U = U + 2.0 * w * (ph * Um).real
            P = P + 2.0 * w * (ph * Pm).real
        U = scale * U
        P = scale * P
        P = P - mats["m1"].dot(P).sum() / area
        out_u.append(U)
        out_p.append(P)
    return out_u, out_p


def solve_evolution_laplace(problem, t_samples, n_nodes=129, cutoff=None,
                            contour_tol=1e-3, check_doubling=True):
    """Inverse-transform solution at the sample times.

    Solves the parameter problem at (n_nodes+1)/2 contour nodes (the
    lower half line follows by conjugation for real data), reconstructs
    by trapezoid quadrature, and estimates the contour resolution error
    by doubling the node count at fixed cutoff.  The t = 0 sample is the
    initial state, which is identically zero.
    """
    _require_compatible(problem)
    t_samples = np.asarray(t_samples, dtype=float)
    if np.any(t_samples < 0) or np.any(t_samples > problem.T + 1e-12):
        raise ValueError("sample times must lie in [0, T]")
    omegas, weights, cut = _contour_nodes(n_nodes, cutoff, float(t_samples.max(initial=1.0)))
    sols = _contour_solves(problem, omegas)
    u_n, p_n = _reconstruct(problem, t_samples, omegas, weights, sols)

    est = 0.0
    if check_doubling:
        mv = fem.base_matrices(problem.mesh)["mv"]

        def sup_diff(ua, ub):
            return float(max((np.sqrt(max(np.vdot(a - b, mv.dot(a - b)).real, 0.0))
                              for a, b in zip(ua, ub)), default=0.0))

        tmax = float(t_samples.max(initial=1.0))
        # alias estimate: halve the spacing at fixed cutoff
        om2, w2, _ = _contour_nodes(2 * n_nodes - 1, cut, tmax)
        sols2 = [None] * len(om2)
        sols2[::2] = sols
        sols2[1::2] = _contour_solves(problem, om2[1::2])
        u_d, _ = _reconstruct(problem, t_samples, om2, w2, sols2)
        est_alias = sup_diff(u_n, u_d)
        # truncation estimate: double the cutoff at fixed spacing
        om3, w3, _ = _contour_nodes(2 * n_nodes - 1, 2 * cut, tmax)
        sols3 = list(sols) + _contour_solves(problem, om3[len(omegas):])
        u_t, _ = _reconstruct(problem, t_samples, om3, w3, sols3)
        est = est_alias + sup_diff(u_n, u_t)
        peak = max((np.sqrt(max(np.vdot(b, mv.dot(b)).real, 0.0)) for b in u_d),
                   default=0.0)
        if est > contour_tol * max(1.0, peak):
            raise ContourUnderResolved(
                f"refining the contour changes the trajectory by {est:.3e}")

    mesh = problem.mesh
    traj = Trajectory(
        times=t_samples,
        velocities=[fem.DiscreteField(mesh, "p2v", U) for U in u_n],
        pressures=[fem.DiscreteField(mesh, "p1", P) for P in p_n],
        method="laplace",
        contour={"gamma": problem.gamma, "n_nodes": n_nodes, "cutoff": cut},
        error_estimate=est,
    )
    return traj


def solve_evolution_euler(problem, dt, t_samples):
    """Implicit Euler oracle via the resolvent machinery at s = 1/dt."""
    _require_compatible(problem)
    mesh = problem.mesh
    t_samples = np.asarray(t_samples, dtype=float)
    steps = t_samples / dt
    if np.any(np.abs(steps - np.round(steps)) > 1e-9):
        raise ValueError("sample times must be multiples of dt")
    n_steps = int(round(t_samples.max() / dt)) if len(t_samples) else 0
    fc = fem.fem_cache(mesh)
    mats = fem.base_matrices(mesh)
    fl = problem.f.load_matrix(mesh) if problem.f is not None else None
    gl = problem.g.load_matrix(mesh) if problem.g is not None else None
    op = resolvent.resolvent_operator(mesh, 1.0 / dt)

    want = {int(round(t / dt)): k for k, t in enumerate(t_samples)}
    out_u = [None] * len(t_samples)
    out_p = [None] * len(t_samples)
    U = np.zeros(2 * fc.n2, dtype=np.complex128)
    P = np.zeros(fc.n1, dtype=np.complex128)
    if 0 in want:
        out_u[want[0]] = U.copy()
        out_p[want[0]] = P.copy()
    for k in range(1, n_steps + 1):
        t = k * dt
        fvec = fl.dot(problem.f.profile_values(t)) if fl is not None \
            else np.zeros(2 * fc.n2, dtype=np.complex128)
        gvec = gl.dot(problem.g.profile_values(t)) if gl is not None \
            else np.zeros(fc.n1, dtype=np.complex128)
        U, P, _ = op.solve(fvec + mats["mv"].dot(U) / dt, gvec)
        if k in want:
            out_u[want[k]] = U.copy()
            out_p[want[k]] = P.copy()
    traj = Trajectory(
        times=t_samples,
        velocities=[fem.DiscreteField(mesh, "p2v", u) for u in out_u],
        pressures=[fem.DiscreteField(mesh, "p1", p) for p in out_p],
        method="euler",
        contour={"dt": dt},
    )
    return traj


def trajectory_difference(t1, t2, t_window=None):
    """Sup over samples of the L2 velocity difference (optional window)."""
    assert np.allclose(t1.times, t2.times)
    worst = 0.0
    for k, t in enumerate(t1.times):
        if t_window is not None and not (t_window[0] <= t <= t_window[1]):
            continue
        d = t1.velocities[k] - t2.velocities[k]
        worst = max(worst, fem.l2_norm(d))
    return worst


def extension_independence_test(problem, extension_a, extension_b, t_samples,
                                n_nodes=65, window_end=None):
    """Solve with two data extensions agreeing on (0, T); report the
    trajectory difference on the early window against the contour noise.

    extension_a/b map the problem to new EvolutionProblem instances
    whose data agree with the original on (0, T).
    """
    pa = extension_a(problem)
    pb = extension_b(problem)
    ta = solve_evolution_laplace(pa, t_samples, n_nodes=n_nodes)
    tb = solve_evolution_laplace(pb, t_samples, n_nodes=n_nodes)
    if window_end is None:
        window_end = 0.5 * problem.T
    diff = trajectory_difference(ta, tb, t_window=(0.0, window_end))
    noise = max(ta.error_estimate, tb.error_estimate)
    return {
        "difference": diff,
        "noise_estimate": noise,
        "window": (0.0, window_end),
        "within_tolerance": diff <= 10.0 * max(noise, 1e-15),
    }


def spacetime_norm_report(traj, beta):
    """Time-integrated weighted norms of a trajectory.

    ||u||^2 over time of V_beta^2 plus the time derivative in V_beta^0
    (centered differences on the stored samples), by trapezoid rule.
    """
    beta = spaces.weight_for(traj.velocities[0].mesh.domain, beta)
    times = traj.times
    v2 = np.array([spaces.weighted_norm(u, spaces.NormSpec("V", 2, beta))
                   for u in traj.velocities])
    dt_fields = []
    for k in range(len(times)):
        if k == 0:
            du = (traj.velocities[1] - traj.velocities[0]) * (1.0 / (times[1] - times[0]))
        elif k == len(times) - 1:
            du = (traj.velocities[-1] - traj.velocities[-2]) * (1.0 / (times[-1] - times[-2]))
        else:
            du = (traj.velocities[k + 1] - traj.velocities[k - 1]) \
                * (1.0 / (times[k + 1] - times[k - 1]))
        dt_fields.append(du)
    v0t = np.array([spaces.weighted_norm(du, spaces.NormSpec("V", 0, beta))
                    for du in dt_fields])
    total = np.trapezoid(v2**2 + v0t**2, times)
    return {"w21_norm": float(np.sqrt(max(total, 0.0))),
            "v2_samples": v2.tolist(), "dt_v0_samples": v0t.tolist()}


def gamma_stability_probe(mesh, data_force, gammas, beta):
    """Estimate-ratio sweep over the contour abscissa.

    For each gamma the resolvent ratio R at s = gamma*(1+i)/sqrt(2) is
    recorded; the probe reports where successive ratios stabilize to 5%.
    """
    rows = []
    bvec = spaces.weight_for(mesh.domain, beta)
    for gam in gammas:
        sv = complex(gam / np.sqrt(2.0), gam / np.sqrt(2.0))
        sol = resolvent.solve_weak_resolvent(
            resolvent.ResolventProblem(mesh=mesh, s=sv, f=data_force, g=None))
        u2 = spaces.weighted_norm(sol.u, spaces.NormSpec("V", 2, bvec))
        u0 = spaces.weighted_norm(sol.u, spaces.NormSpec("V", 0, bvec))
        gp = resolvent.gradient_weighted_norm(sol.p, bvec)
        fn = resolvent._data_weighted_norm(mesh, data_force, bvec, order=0, family="vec")
        rows.append({"gamma": float(gam), "ratio": (u2 + abs(sv) * u0 + gp) / fn})
    stable_from = None
    for k in range(1, len(rows)):
        if abs(rows[k]["ratio"] - rows[k - 1]["ratio"]) <= 0.05 * rows[k - 1]["ratio"]:
            stable_from = rows[k - 1]["gamma"]
            break
    return {"rows": rows, "stable_from": stable_from}
