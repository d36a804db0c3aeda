"""Polygonal domains with labeled corners and corner-graded triangle meshes.

A :class:`PolygonDomain` is a simple, counter-clockwise polygon with
straight edges; every vertex is a "corner" carrying its interior opening
angle.  :func:`generate_graded_mesh` triangulates the polygon by
deterministic ear clipping followed by uniform red refinement, then
optionally pulls nodes toward selected corners so element diameters
scale like ``h**mu`` there.  :func:`sector_mesh` builds a structured
mesh of a circular sector whose outermost facets remember the true arc,
so quadrature over the exact curved domain stays available.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCorner, MeshFailure, SelfIntersecting

DEFAULT_MIN_ANGLE_DEG = 20.0


# ---------------------------------------------------------------------------
# domain


@dataclass(frozen=True)
class PolygonDomain:
    """Simple CCW polygon: vertices are corners P_j, edges are segments."""

    vertices: np.ndarray          # (n, 2)
    openings: np.ndarray          # (n,) interior angle at each vertex, radians
    grading_radius: np.ndarray    # (n,) radius of the corner-local sector

    @property
    def n_corners(self):
        return len(self.vertices)

    def edge(self, j):
        """Endpoints of edge j = P_j P_{j+1} (cyclic)."""
        n = self.n_corners
        return self.vertices[j], self.vertices[(j + 1) % n]

    def edge_lengths(self):
        return np.linalg.norm(np.roll(self.vertices, -1, axis=0) - self.vertices, axis=1)

    def diameter(self):
        v = self.vertices
        return max(np.linalg.norm(v[i] - v[j]) for i in range(len(v)) for j in range(i))

    def contains(self, x, tol=1e-12):
        """Whether point x lies in the closure of the polygon."""
        x = np.asarray(x, dtype=float)
        v = self.vertices
        n = len(v)
        scale = max(1.0, np.abs(v).max())
        inside = False
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            if _point_on_segment(x, a, b, tol * scale):
                return True
            if (a[1] > x[1]) != (b[1] > x[1]):
                t = (x[1] - a[1]) / (b[1] - a[1])
                if a[0] + t * (b[0] - a[0]) > x[0]:
                    inside = not inside
        return inside


def build_polygon(vertices):
    """Validate a vertex list and return the normalized CCW domain.

    Raises SelfIntersecting if the boundary crosses itself and
    DegenerateCorner if two consecutive edges back-track (opening 0 or a
    full turn).  Collinear interior points (opening exactly pi) are
    accepted.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("need an (n, 2) array with n >= 3")
    scale = max(1.0, np.abs(v).max())
    d = np.roll(v, -1, axis=0) - v
    if np.any(np.linalg.norm(d, axis=1) < 1e-14 * scale):
        raise ValueError("two consecutive vertices coincide")

    # normalize to counter-clockwise
    area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
    if area2 < 0:
        v = v[::-1].copy()
        d = np.roll(v, -1, axis=0) - v

    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j == i + 1) or (i == 0 and j == n - 1):
                continue
            if _segments_touch(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], 1e-13 * scale):
                raise SelfIntersecting(f"edges {i} and {j} intersect")

    din = v - np.roll(v, 1, axis=0)
    cross = din[:, 0] * d[:, 1] - din[:, 1] * d[:, 0]
    dot = din[:, 0] * d[:, 0] + din[:, 1] * d[:, 1]
    bad = (np.abs(cross) < 1e-13 * scale**2) & (dot < 0)
    if bad.any():
        raise DegenerateCorner(f"back-tracking edges at vertex {int(np.nonzero(bad)[0][0])}")
    turn = np.arctan2(cross, dot)
    openings = np.pi - turn
    if np.any(openings <= 0) or np.any(openings >= 2 * np.pi):
        raise DegenerateCorner("corner opening outside (0, 2*pi)")
    if abs(turn.sum() - 2 * np.pi) > 1e-9:
        raise SelfIntersecting("signed turning does not sum to one full turn")

    radius = _grading_radii(v)
    for arr in (v, openings, radius):
        arr.setflags(write=False)
    return PolygonDomain(vertices=v, openings=openings, grading_radius=radius)


def distance_to_corner(domain, j, x):
    """Euclidean distance r_j(x) from x (inside the closure) to corner j."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - domain.vertices[j]))


def _grading_radii(v):
    """Per-corner sector radius: quarter of shortest adjacent edge, capped
    by half the distance to the non-adjacent boundary."""
    n = len(v)
    elen = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    radius = np.empty(n)
    for j in range(n):
        r = 0.25 * min(elen[j], elen[(j - 1) % n])
        for k in range(n):
            if k in (j, (j - 1) % n):
                continue
            r = min(r, 0.5 * _point_segment_distance(v[j], v[k], v[(k + 1) % n]))
        radius[j] = r
    return radius


def _point_segment_distance(p, a, b):
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_on_segment(p, a, b, tol):
    return _point_segment_distance(np.asarray(p, float), a, b) <= tol


def _segments_touch(a, b, c, d, tol):
    """Whether non-adjacent closed segments ab and cd have a common point."""
    def orient(p, q, r):
        val = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if abs(val) <= tol * max(1.0, abs(q[0] - p[0]) + abs(q[1] - p[1])):
            return 0
        return 1 if val > 0 else -1

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    for p, q, r in ((a, b, c), (a, b, d), (c, d, a), (c, d, b)):
        if orient(p, q, r) == 0 and _point_on_segment(r, p, q, tol):
            return True
    return False


# ---------------------------------------------------------------------------
# mesh


@dataclass(frozen=True)
class Mesh:
    """Conforming triangulation of a PolygonDomain.

    boundary_facets rows are (node_a, node_b) pairs lying on the polygon
    boundary, facet_labels gives the polygon edge index of each facet and
    facet_arcs optionally replaces a straight facet by a circular arc
    (cx, cy, radius) for quadrature purposes.
    """

    domain: PolygonDomain
    nodes: np.ndarray             # (N, 2)
    triangles: np.ndarray         # (M, 3) CCW
    corner_tags: np.ndarray       # (N,) nearest corner index
    grading: np.ndarray           # (n_corners,) exponent mu_j
    boundary_facets: np.ndarray   # (K, 2)
    facet_labels: np.ndarray      # (K,)
    facet_arcs: dict = field(default_factory=dict, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def tri_vertices(self):
        return self.nodes[self.triangles]

    def areas(self):
        tv = self.tri_vertices()
        e1 = tv[:, 1] - tv[:, 0]
        e2 = tv[:, 2] - tv[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def diameters(self):
        tv = self.tri_vertices()
        d01 = np.linalg.norm(tv[:, 1] - tv[:, 0], axis=1)
        d12 = np.linalg.norm(tv[:, 2] - tv[:, 1], axis=1)
        d20 = np.linalg.norm(tv[:, 0] - tv[:, 2], axis=1)
        return np.maximum(np.maximum(d01, d12), d20)

    def min_angle_deg(self):
        return float(np.degrees(_tri_angles(self.tri_vertices()).min()))

    def corner_node(self, j):
        """Mesh node index sitting exactly at corner j."""
        d = np.linalg.norm(self.nodes - self.domain.vertices[j], axis=1)
        i = int(np.argmin(d))
        if d[i] > 1e-12 * max(1.0, np.abs(self.nodes).max()):
            raise ValueError(f"corner {j} is not a mesh node")
        return i


def _tri_angles(tv):
    """(M, 3) interior angles in radians."""
    out = np.empty(tv.shape[:2])
    for k in range(3):
        a = tv[:, (k + 1) % 3] - tv[:, k]
        b = tv[:, (k + 2) % 3] - tv[:, k]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        cosang = np.clip(np.einsum("ij,ij->i", a, b) / (na * nb), -1.0, 1.0)
        out[:, k] = np.arccos(cosang)
    return out


def _ear_quality(tv):
    a = _tri_angles(tv[None, :, :])[0]
    return a.min()


def _ear_clip(v):
    """Best-ear clipping: keeps the fattest available ear each step."""
    n = len(v)
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * n * n:
            raise MeshFailure("ear clipping failed to terminate")
        best = None
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = v[i0], v[i1], v[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 1e-14:
                continue  # reflex or collinear vertex
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                if _in_triangle(v[j], a, b, c):
                    ok = False
                    break
            if not ok:
                continue
            q = _ear_quality(np.array([a, b, c]))
            if best is None or q > best[0] + 1e-12:
                best = (q, k, (i0, i1, i2))
        if best is None:
            raise MeshFailure("no valid ear found (polygon too degenerate)")
        _, k, tri = best
        tris.append(tri)
        del idx[k]
    a, b, c = (v[i] for i in idx)
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    if cross <= 1e-14:
        raise MeshFailure("final triangle degenerate")
    tris.append(tuple(idx))
    return np.array(tris, dtype=np.int32)


def _in_triangle(p, a, b, c, eps=1e-12):
    d = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1])
    l1 = ((b[1] - c[1]) * (p[0] - c[0]) + (c[0] - b[0]) * (p[1] - c[1])) / d
    l2 = ((c[1] - a[1]) * (p[0] - c[0]) + (a[0] - c[0]) * (p[1] - c[1])) / d
    l3 = 1.0 - l1 - l2
    return l1 >= -eps and l2 >= -eps and l3 >= -eps


def _improve_by_flips(nodes, tris, boundary_edges):
    """Max-min-angle edge flips on the coarse triangulation (deterministic)."""
    tris = [list(t) for t in tris]
    frozen = {tuple(sorted(e)) for e in boundary_edges}
    for _ in range(20):
        flipped = False
        edge_owner = {}
        for ti, t in enumerate(tris):
            for k in range(3):
                e = tuple(sorted((t[k], t[(k + 1) % 3])))
                edge_owner.setdefault(e, []).append(ti)
        for e in sorted(edge_owner):
            owners = edge_owner[e]
            if len(owners) != 2 or e in frozen:
                continue
            t1, t2 = owners
            a, b = e
            c = next(x for x in tris[t1] if x not in e)
            d_ = next(x for x in tris[t2] if x not in e)
            quad = np.array([nodes[a], nodes[c], nodes[b], nodes[d_]])
            # flip only if the quad is strictly convex
            convex = True
            for k in range(4):
                u = quad[(k + 1) % 4] - quad[k]
                w = quad[(k + 2) % 4] - quad[(k + 1) % 4]
                if u[0] * w[1] - u[1] * w[0] <= 1e-14:
                    convex = False
                    break
            if not convex:
                continue
            old = min(_ear_quality(np.array([nodes[a], nodes[b], nodes[c]])),
                      _ear_quality(np.array([nodes[a], nodes[b], nodes[d_]])))
            new = min(_ear_quality(np.array([nodes[c], nodes[d_], nodes[a]])),
                      _ear_quality(np.array([nodes[c], nodes[d_], nodes[b]])))
            if new > old + 1e-9:
                tris[t1] = [c, d_, a]
                tris[t2] = [d_, c, b]
                flipped = True
                break  # edge_owner is stale; rebuild
        if not flipped:
            break
    return np.array(tris, dtype=np.int32)


def _orient_ccw(nodes, tris):
    tv = nodes[tris]
    e1 = tv[:, 1] - tv[:, 0]
    e2 = tv[:, 2] - tv[:, 0]
    neg = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) < 0
    tris = tris.copy()
    tris[neg] = tris[neg][:, [0, 2, 1]]
    return tris


def _refine(nodes, tris, facets, labels):
    """One red refinement; boundary facets split in two with labels kept."""
    edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(edges, axis=0, return_inverse=True)
    mid = 0.5 * (nodes[uniq[:, 0]] + nodes[uniq[:, 1]])
    offset = len(nodes)
    new_nodes = np.vstack([nodes, mid])
    m01 = offset + inv[: len(tris)]
    m12 = offset + inv[len(tris): 2 * len(tris)]
    m20 = offset + inv[2 * len(tris):]
    t = tris
    new_tris = np.concatenate([
        np.stack([t[:, 0], m01, m20], axis=1),
        np.stack([t[:, 1], m12, m01], axis=1),
        np.stack([t[:, 2], m20, m12], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    # interleave children of one parent adjacently for determinism
    order = np.argsort(np.tile(np.arange(len(t)), 4), kind="stable")
    new_tris = new_tris[order].astype(np.int32)

    key = {tuple(e): offset + i for i, e in enumerate(map(tuple, uniq))}
    new_facets = []
    new_labels = []
    for (a, b), lab in zip(facets, labels):
        m = key[tuple(sorted((int(a), int(b))))]
        new_facets.append((a, m))
        new_facets.append((m, b))
        new_labels.extend((lab, lab))
    return new_nodes, new_tris, np.array(new_facets, dtype=np.int32), np.array(new_labels, dtype=np.int32)


def _corner_tags(nodes, domain):
    d = np.linalg.norm(nodes[:, None, :] - domain.vertices[None, :, :], axis=2)
    return np.argmin(d, axis=1).astype(np.int32)


def _finalize(domain, nodes, tris, facets, labels, grading, min_angle_deg, arcs=None):
    tris = _orient_ccw(nodes, tris)
    nodes = np.ascontiguousarray(nodes)
    mesh = Mesh(
        domain=domain,
        nodes=nodes,
        triangles=np.ascontiguousarray(tris),
        corner_tags=_corner_tags(nodes, domain),
        grading=np.asarray(grading, dtype=float),
        boundary_facets=np.ascontiguousarray(facets),
        facet_labels=np.ascontiguousarray(labels),
        facet_arcs=arcs or {},
    )
    if np.any(mesh.areas() <= 0):
        raise MeshFailure("degenerate element (non-positive area)")
    if mesh.min_angle_deg() < min_angle_deg:
        raise MeshFailure(
            f"minimum angle {mesh.min_angle_deg():.2f} deg below threshold {min_angle_deg} deg"
        )
    return mesh


def _graded_refine(nodes, tris, domain, h, mu, max_rounds=400):
    """Longest-edge (Rivara) bisection toward the graded corners.

    Elements inside the grading disk of corner j are bisected while
    their diameter exceeds 0.8*h*(r_max/R_j)^(1-1/mu_j); the corner-
    touching fixed point of that rule yields diameters ~ h**mu_j.
    Conformity by propagation: an element with any hanging midpoint
    splits its own longest edge, so right-isosceles meshes stay
    right-isosceles and the minimum angle cannot collapse.
    """
    nodes = [tuple(p) for p in nodes]
    tris = [tuple(int(i) for i in t) for t in tris]
    edge_mid = {}
    graded = [j for j in range(domain.n_corners) if mu[j] > 1.0 + 1e-12]

    def key(a, b):
        return (a, b) if a < b else (b, a)

    def longest_edge(t, npn):
        best = None
        for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            ln = float(np.hypot(npn[u][0] - npn[v][0], npn[u][1] - npn[v][1]))
            k = key(u, v)
            if best is None or ln > best[0] * (1 + 1e-12) or (
                    abs(ln - best[0]) <= 1e-12 * best[0] and k < best[1]):
                best = (ln, k)
        return best[1]

    for _ in range(max_rounds):
        npn = np.asarray(nodes)
        tarr = np.asarray(tris)
        tv = npn[tarr]
        d01 = np.linalg.norm(tv[:, 1] - tv[:, 0], axis=1)
        d12 = np.linalg.norm(tv[:, 2] - tv[:, 1], axis=1)
        d20 = np.linalg.norm(tv[:, 0] - tv[:, 2], axis=1)
        diam = np.maximum(np.maximum(d01, d12), d20)
        size_mark = np.zeros(len(tris), dtype=bool)
        for j in graded:
            R = domain.grading_radius[j]
            dist = np.linalg.norm(tv - domain.vertices[j], axis=2)
            inside = dist.min(axis=1) < R
            target = 0.8 * h * (np.minimum(dist.max(axis=1), R) / R) ** (1.0 - 1.0 / mu[j])
            size_mark |= inside & (diam > target)

        # every element that must split (too big, or hanging midpoint on
        # some edge) bisects its own longest edge; midpoint records are
        # permanent, so the neighbor across a split edge follows suit in
        # a later round, which is Rivara's propagation
        le_of = {}
        for i, t in enumerate(tris):
            hang = any(key(*e) in edge_mid for e in
                       ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])))
            if not (size_mark[i] or hang):
                continue
            le = longest_edge(t, nodes)
            le_of[i] = le
            if le not in edge_mid:
                a, b = le
                edge_mid[le] = len(nodes)
                nodes.append((0.5 * (nodes[a][0] + nodes[b][0]),
                              0.5 * (nodes[a][1] + nodes[b][1])))
        if not le_of:
            break
        new_tris = []
        for i, t in enumerate(tris):
            le = le_of.get(i)
            if le is None:
                new_tris.append(t)
                continue
            a, b = le
            c = next(x for x in t if x != a and x != b)
            m = edge_mid[le]
            new_tris.extend([(a, m, c), (m, b, c)])
        tris = new_tris
    else:
        raise MeshFailure("graded refinement did not terminate")
    return np.asarray(nodes), np.asarray(tris, dtype=np.int32)


def _rebuild_boundary(nodes, tris, domain):
    """Boundary facets (edges used once) labeled by the polygon edge."""
    all_edges = np.sort(np.concatenate(
        [tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(all_edges, axis=0, return_counts=True)
    bnd = uniq[counts == 1]
    scale = max(1.0, np.abs(domain.vertices).max())
    labels = np.empty(len(bnd), dtype=np.int32)
    n = domain.n_corners
    for i, (a, b) in enumerate(bnd):
        mid = 0.5 * (nodes[a] + nodes[b])
        lab = -1
        for j in range(n):
            p, q = domain.edge(j)
            if _point_segment_distance(mid, p, q) <= 1e-10 * scale:
                lab = j
                break
        if lab < 0:
            raise MeshFailure("boundary facet not on any polygon edge")
        labels[i] = lab
    return bnd.astype(np.int32), labels


def generate_graded_mesh(domain, h, grading=None, min_angle_deg=DEFAULT_MIN_ANGLE_DEG):
    """Deterministic corner-graded triangulation with target size h.

    grading may be None (quasi-uniform), a dict {corner_index: mu} or a
    per-corner sequence; mu_j >= 1 pulls nodes radially toward corner j
    so that diameters of corner-adjacent elements scale like h**mu_j.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    n = domain.n_corners
    mu = np.ones(n)
    if grading is not None:
        if isinstance(grading, dict):
            for j, m in grading.items():
                mu[int(j)] = float(m)
        else:
            mu = np.asarray(grading, dtype=float).copy()
            if len(mu) != n:
                raise ValueError("grading length must match corner count")
    if np.any(mu < 1):
        raise ValueError("grading exponents must be >= 1")

    v = domain.vertices
    facets = np.array([(i, (i + 1) % n) for i in range(n)], dtype=np.int32)
    labels = np.arange(n, dtype=np.int32)
    tris = _ear_clip(v)
    tris = _improve_by_flips(v, tris, facets)
    nodes = v.copy()

    tv = nodes[tris]
    dmax = float(np.max([np.linalg.norm(tv[:, 1] - tv[:, 0], axis=1),
                         np.linalg.norm(tv[:, 2] - tv[:, 1], axis=1),
                         np.linalg.norm(tv[:, 0] - tv[:, 2], axis=1)]))
    levels = max(0, int(np.ceil(np.log2(dmax / h))))
    for _ in range(levels):
        nodes, tris, facets, labels = _refine(nodes, tris, facets, labels)

    if np.any(mu > 1.0 + 1e-12):
        nodes, tris = _graded_refine(nodes, tris, domain, h, mu)
        facets, labels = _rebuild_boundary(nodes, tris, domain)

    return _finalize(domain, nodes, tris, facets, labels, mu, min_angle_deg)


def sector_domain(alpha, radius=1.0, n_arc=None):
    """Polygonal stand-in for the circular sector 0<r<radius, 0<phi<alpha.

    Corner 0 is the sector tip at the origin; the arc is sampled with
    n_arc chords (chosen for mesh quality when omitted).
    """
    if not 0 < alpha < 2 * np.pi:
        raise ValueError("alpha must lie in (0, 2*pi)")
    if n_arc is None:
        n_arc = max(3, int(np.ceil(alpha / 0.45)))
    phi = np.linspace(0.0, alpha, n_arc + 1)
    pts = [(0.0, 0.0)] + [(radius * np.cos(p), radius * np.sin(p)) for p in phi]
    return build_polygon(pts), n_arc


def sector_mesh(alpha, radius=1.0, h=0.1, min_angle_deg=DEFAULT_MIN_ANGLE_DEG):
    """Structured polar mesh of a sector; outer facets carry arc metadata.

    Layered construction: geometric radial layers (ratio tuned to the
    angular step for isotropy) closed by a fan at the tip.  Facets on
    the outer circle store (cx, cy, radius) so weighted quadrature can
    integrate over the true curved sector instead of the chord polygon.
    """
    domain, n_arc = sector_domain(alpha, radius)
    theta = alpha / n_arc
    q = min(0.8, max(0.55, 1.0 - 0.75 * theta))
    n_layers = max(1, int(np.ceil(np.log(max(h, 1e-6) / radius) / np.log(q))))
    radii = radius * q ** np.arange(n_layers + 1)

    phi = np.linspace(0.0, alpha, n_arc + 1)
    nodes = [(0.0, 0.0)]
    ring_ids = []
    for r in radii:
        ring = []
        for p in phi:
            ring.append(len(nodes))
            nodes.append((r * np.cos(p), r * np.sin(p)))
        ring_ids.append(ring)
    nodes = np.array(nodes)

    tris = []
    for i in range(n_layers):
        outer, inner = ring_ids[i], ring_ids[i + 1]
        for k in range(n_arc):
            tris.append((inner[k], outer[k], outer[k + 1]))
            tris.append((inner[k], outer[k + 1], inner[k + 1]))
    last = ring_ids[-1]
    for k in range(n_arc):
        tris.append((0, last[k], last[k + 1]))
    tris = np.array(tris, dtype=np.int32)

    facets = []
    labels = []
    arcs = {}
    # edge 0: tip -> (radius, 0); edges 1..n_arc: chords; edge n_arc+1: back to tip
    for i in range(n_layers, -1, -1):
        a = 0 if i == n_layers else ring_ids[i + 1][0]
        facets.append((a if i < n_layers else 0, ring_ids[i][0]))
        labels.append(0)
    for k in range(n_arc):
        arcs[len(facets)] = (0.0, 0.0, radius)
        facets.append((ring_ids[0][k], ring_ids[0][k + 1]))
        labels.append(1 + k)
    for i in range(n_layers + 1):
        b = 0 if i == n_layers else ring_ids[i + 1][n_arc]
        facets.append((ring_ids[i][n_arc], b))
        labels.append(n_arc + 1)
    facets = np.array(facets, dtype=np.int32)
    labels = np.array(labels, dtype=np.int32)

    return _finalize(domain, nodes, tris, facets, labels,
                     np.ones(domain.n_corners), min_angle_deg, arcs)


def unit_square():
    return build_polygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def l_shape():
    return build_polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
