"""Plain-text artifact formats.

POLYSTOKES-MESH v1: polygon table, node table, triangle table and
facet-label table (optional arc table for curved quadrature metadata),
floats stored with shortest round-trip repr.  POLYSTOKES-FIELD v1:
element family plus complex coefficient table, referencing its mesh
file by name.
"""

import numpy as np

from . import fem, geometry

MESH_MAGIC = "POLYSTOKES-MESH v1"
FIELD_MAGIC = "POLYSTOKES-FIELD v1"


def _fmt(x):
    return repr(float(x))


def write_mesh(mesh, path):
    lines = [MESH_MAGIC]
    v = mesh.domain.vertices
    lines.append(f"polygon {len(v)}")
    lines.extend(f"{_fmt(p[0])} {_fmt(p[1])}" for p in v)
    lines.append(f"grading {len(mesh.grading)}")
    lines.extend(_fmt(g) for g in mesh.grading)
    lines.append(f"nodes {mesh.n_nodes}")
    lines.extend(f"{_fmt(p[0])} {_fmt(p[1])}" for p in mesh.nodes)
    lines.append(f"triangles {mesh.n_triangles}")
    lines.extend(f"{t[0]} {t[1]} {t[2]}" for t in mesh.triangles)
    lines.append(f"facets {len(mesh.boundary_facets)}")
    lines.extend(f"{a} {b} {lab}" for (a, b), lab in
                 zip(mesh.boundary_facets, mesh.facet_labels))
    lines.append(f"arcs {len(mesh.facet_arcs)}")
    for fi in sorted(mesh.facet_arcs):
        cx, cy, r = mesh.facet_arcs[fi]
        lines.append(f"{fi} {_fmt(cx)} {_fmt(cy)} {_fmt(r)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MESH_MAGIC:
        raise ValueError(f"not a {MESH_MAGIC} file")
    pos = 1

    def section(name):
        nonlocal pos
        tag, count = lines[pos].split()
        if tag != name:
            raise ValueError(f"expected section {name!r}, found {tag!r}")
        pos += 1
        rows = lines[pos:pos + int(count)]
        pos += int(count)
        return rows

    poly = np.array([[float(a) for a in r.split()] for r in section("polygon")])
    grading = np.array([float(r) for r in section("grading")])
    nodes = np.array([[float(a) for a in r.split()] for r in section("nodes")])
    tris = np.array([[int(a) for a in r.split()] for r in section("triangles")],
                    dtype=np.int32)
    facet_rows = [r.split() for r in section("facets")]
    facets = np.array([[int(r[0]), int(r[1])] for r in facet_rows], dtype=np.int32)
    labels = np.array([int(r[2]) for r in facet_rows], dtype=np.int32)
    arcs = {}
    for r in section("arcs"):
        parts = r.split()
        arcs[int(parts[0])] = (float(parts[1]), float(parts[2]), float(parts[3]))

    domain = geometry.build_polygon(poly)
    return geometry.Mesh(
        domain=domain, nodes=nodes, triangles=tris,
        corner_tags=geometry._corner_tags(nodes, domain),
        grading=grading, boundary_facets=facets, facet_labels=labels,
        facet_arcs=arcs)


def write_field(fld, path, mesh_name="-"):
    lines = [FIELD_MAGIC, f"family {fld.family}", f"mesh {mesh_name}",
             f"coeffs {len(fld.coeffs)}"]
    lines.extend(f"{_fmt(c.real)} {_fmt(c.imag)}" for c in fld.coeffs)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path, mesh):
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != FIELD_MAGIC:
        raise ValueError(f"not a {FIELD_MAGIC} file")
    family = lines[1].split()[1]
    n = int(lines[3].split()[1])
    coeffs = np.empty(n, dtype=np.complex128)
    for i, r in enumerate(lines[4:4 + n]):
        a, b = r.split()
        coeffs[i] = complex(float(a), float(b))
    return fem.DiscreteField(mesh, family, coeffs)
