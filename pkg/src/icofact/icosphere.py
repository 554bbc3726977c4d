"""Icosahedron subdivision meshes on the unit sphere.

A level-n mesh has 20*4^n faces, 30*4^n edges and 10*4^n + 2 nodes. Each
subdivision splits every triangle into four via its edge midpoints, which
are re-projected onto the sphere. Face indices are the spatial reference
for all data matrices in this package.
"""

import math

import numpy as np

from .errors import ConfigError

DEFAULT_MAX_LEVEL = 9  # 20 * 4^9 ~ 5.2M faces; guards against runaway memory


class Mesh:
    """Triangle mesh with unit-norm nodes and consistently oriented faces."""

    def __init__(self, nodes, faces):
        self.nodes = np.asarray(nodes, dtype=np.float64)
        self.faces = np.asarray(faces, dtype=np.int64)
        self._edges = None

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def edges(self):
        """Undirected edges as a lexicographically sorted (E, 2) array."""
        if self._edges is None:
            f = self.faces
            pairs = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            pairs.sort(axis=1)
            self._edges = np.unique(pairs, axis=0)
        return self._edges

    @property
    def n_edges(self):
        return self.edges.shape[0]


class IcosphereHierarchy:
    """Nested icosphere meshes with explicit parent/child face links.

    Level 0 is the icosahedron. ``children[l][f]`` holds the 4 face ids at
    level l+1 produced by splitting face f of level l; the first child is
    the central (midpoint) triangle, the rest follow the parent node order.
    """

    def __init__(self, levels, parents, children):
        self.levels = levels
        self._parents = parents  # _parents[l]: (n_faces_l,) parent ids, l >= 1
        self._children = children  # _children[l]: (n_faces_l, 4), l < max_level

    @property
    def max_level(self):
        return len(self.levels) - 1

    def mesh(self, level):
        return self.levels[level]

    def parent_of(self, level, face):
        """Parent face id at level-1 of `face` at `level` (level >= 1)."""
        if level < 1:
            raise ConfigError("level-0 faces have no parent")
        return int(self._parents[level][face])

    def children_of(self, level, face):
        """The 4 face ids at level+1 obtained by splitting `face`."""
        if level >= self.max_level:
            raise ConfigError(f"level {level} has no finer level in this hierarchy")
        return self._children[level][face].copy()


def base_icosahedron():
    """Regular icosahedron inscribed in the unit sphere (12/30/20)."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    nodes = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    # Outward-oriented face list (verified: normal . centroid > 0 for all).
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return Mesh(nodes, faces)


def new_hierarchy():
    """Hierarchy holding only the base icosahedron."""
    return IcosphereHierarchy([base_icosahedron()], [None], [])


def subdivide(hier, max_level=DEFAULT_MAX_LEVEL):
    """Append one subdivision level and return the extended hierarchy.

    The input hierarchy is left untouched; existing meshes are shared.
    Each face (v1, v2, v3) yields the central midpoint triangle followed
    by the three corner triangles in parent node order, so the children of
    face f are faces 4f..4f+3 of the next level.
    """
    if hier.max_level >= max_level:
        raise ConfigError(f"refusing to subdivide beyond level {max_level}")
    mesh = hier.levels[-1]
    nodes = [row for row in mesh.nodes]
    midpoint_index = {}

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        idx = midpoint_index.get(key)
        if idx is None:
            m = nodes[i] + nodes[j]
            m = m / np.linalg.norm(m)
            idx = len(nodes)
            nodes.append(m)
            midpoint_index[key] = idx
        return idx

    new_faces = []
    parents = np.empty(4 * mesh.n_faces, dtype=np.int64)
    children = np.empty((mesh.n_faces, 4), dtype=np.int64)
    for f, (v1, v2, v3) in enumerate(mesh.faces):
        m12 = midpoint(v1, v2)
        m23 = midpoint(v2, v3)
        m31 = midpoint(v3, v1)
        base = len(new_faces)
        new_faces.append((m12, m23, m31))  # central child first
        new_faces.append((v1, m12, m31))
        new_faces.append((v2, m23, m12))
        new_faces.append((v3, m31, m23))
        parents[base : base + 4] = f
        children[f] = (base, base + 1, base + 2, base + 3)

    fine = Mesh(np.array(nodes), np.array(new_faces, dtype=np.int64))
    return IcosphereHierarchy(
        hier.levels + [fine],
        hier._parents + [parents],
        hier._children + [children],
    )


def build_hierarchy(level, max_level=DEFAULT_MAX_LEVEL):
    """Build a hierarchy with levels 0..level."""
    if level < 0:
        raise ConfigError(f"level must be >= 0, got {level}")
    hier = new_hierarchy()
    for _ in range(level):
        hier = subdivide(hier, max_level=max_level)
    return hier


def face_centers(mesh):
    """Per-face normalized centroids, shape (n_faces, 3), unit norm."""
    c = mesh.nodes[mesh.faces].mean(axis=1)
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def counts(level):
    """(faces, edges, nodes) of the level-n icosphere."""
    if level < 0:
        raise ConfigError(f"level must be >= 0, got {level}")
    p = 4**level
    return (20 * p, 30 * p, 10 * p + 2)


def mesh_to_obj(mesh):
    """OBJ text with v/f records and 1-based face indices."""
    lines = []
    for x, y, z in mesh.nodes:
        lines.append(f"v {x!r} {y!r} {z!r}")
    for i, j, k in mesh.faces:
        lines.append(f"f {i + 1} {j + 1} {k + 1}")
    return "\n".join(lines) + "\n"


def face_centers_csv(mesh):
    """CSV text `face_id,x,y,z` for every face center."""
    centers = face_centers(mesh)
    lines = ["face_id,x,y,z"]
    for i, (x, y, z) in enumerate(centers):
        lines.append(f"{i},{x!r},{y!r},{z!r}")
    return "\n".join(lines) + "\n"
