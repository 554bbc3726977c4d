"""Positive design matrix built from angular bump functions on the sphere.

Each design column is a bump centered on one face of some hierarchy level,
evaluated at the face centers of the fine data mesh. Refinement replaces
the worst-fitting columns with four half-width copies centered on the face
children, so the basis sharpens exactly where reconstruction error
concentrates. The reduced products K = D^T D, L = X^T D and M = L^T L are
maintained so optimization never touches matrices of the data dimension.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataShapeError, RefinementExhaustedError
from .icosphere import face_centers


@dataclass
class DesignColumn:
    """One positive basis column bound to a hierarchy face."""

    face_id: int
    level: int
    center: np.ndarray  # unit 3-vector
    sigma: float
    tau: float


@dataclass
class DesignMatrix:
    """Dense nonnegative design values plus per-column face bindings."""

    columns: list[DesignColumn]
    values: np.ndarray  # (n_f, n_k), entries >= 0
    data_level: int
    hier: object = field(repr=False)  # IcosphereHierarchy the columns live on

    @property
    def n_f(self):
        return self.values.shape[0]

    @property
    def n_k(self):
        return self.values.shape[1]

    def face_set(self):
        """Set of (level, face_id) pairs currently carrying a column."""
        return {(c.level, c.face_id) for c in self.columns}


@dataclass
class CachedProducts:
    """Reduced products K = D^T D, L = X^T D, M = L^T L."""

    K: np.ndarray  # (n_k, n_k) symmetric PSD
    L: np.ndarray  # (n_s, n_k)
    M: np.ndarray  # (n_k, n_k) symmetric PSD


@dataclass
class RefinementRecord:
    """Faces split (in processing order) and faces skipped in one round."""

    split: list[tuple[int, int]]  # (level, face_id) of removed columns
    skipped: list[tuple[int, int]]


def bump_column(center, sigma, tau, points):
    """Evaluate exp(-theta/(pi*sigma)) with hard cutoff at theta > tau*pi*sigma.

    theta is the angle between `center` and each point; entries beyond the
    cutoff are exactly zero, so column supports are compact.
    """
    if sigma <= 0 or tau <= 0:
        raise ConfigError(f"sigma and tau must be positive, got {sigma}, {tau}")
    cosines = np.clip(np.asarray(points) @ np.asarray(center), -1.0, 1.0)
    scaled = np.arccos(cosines) / (np.pi * sigma)
    return np.where(scaled <= tau, np.exp(-scaled), 0.0)


def initial_design(hier, data_level, sigma0=0.015, tau=3.0):
    """Twenty root columns, one bump per icosahedron face.

    The columns are re-centered copies of one rotationally symmetric map
    (the bump depends only on the angle to its center), evaluated at the
    level-`data_level` face centers.
    """
    if data_level > hier.max_level:
        raise ConfigError(
            f"data_level {data_level} exceeds hierarchy max level {hier.max_level}"
        )
    root_centers = face_centers(hier.mesh(0))
    fine = face_centers(hier.mesh(data_level))
    columns = []
    values = np.empty((fine.shape[0], root_centers.shape[0]))
    for f, center in enumerate(root_centers):
        columns.append(DesignColumn(f, 0, center, float(sigma0), float(tau)))
        values[:, f] = bump_column(center, sigma0, tau, fine)
    return DesignMatrix(columns, values, data_level, hier)


def precompute(X, D):
    """Compute K, L, M for data X and design D (Gram parts symmetrized)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != D.n_f:
        raise DataShapeError(
            f"X has {X.shape[0]} rows but design expects {D.n_f} faces"
        )
    K = D.values.T @ D.values
    K = (K + K.T) / 2.0
    L = X.T @ D.values
    M = L.T @ L
    M = (M + M.T) / 2.0
    return CachedProducts(K, L, M)


def local_error(cp, B, C):
    """Per-column squared residual of the reduced reconstruction.

    Returns e with e_j = sum_s (L^T - K B C)_{js}^2, the signal that picks
    which faces to subdivide. Approximate when design columns overlap.
    """
    R = cp.L.T - cp.K @ (B @ C)
    return np.einsum("js,js->j", R, R)


def refine(D, B, cp, X, e, n_split):
    """Split the n_split worst-error columns into their four face children.

    Processing order is descending error with ties broken by ascending
    column index. Columns already at the data resolution are skipped in
    favor of the next-worst splittable one. Each split halves sigma (tau
    fixed, so the angular cutoff halves too), replaces the B row by four
    copies divided by four, and extends K and L incrementally: surviving
    blocks are reused and only rows/columns involving new design columns
    are computed. M is recomputed from the new L.

    Returns (new design, new B, new products, record).
    """
    if n_split < 1:
        raise ConfigError(f"n_split must be >= 1, got {n_split}")
    n_k = D.n_k
    if e.shape != (n_k,):
        raise DataShapeError(f"error vector has shape {e.shape}, expected ({n_k},)")

    order = np.lexsort((np.arange(n_k), -np.asarray(e)))
    split_idx = []
    skipped = []
    for j in order:
        if len(split_idx) == n_split:
            break
        col = D.columns[j]
        if col.level < D.data_level:
            split_idx.append(int(j))
        else:
            skipped.append((col.level, col.face_id))
    if not split_idx:
        raise RefinementExhaustedError(
            "no splittable design column: all columns sit at the data resolution"
        )

    hier = D.hier
    fine = face_centers(hier.mesh(D.data_level))
    split_set = set(split_idx)
    keep = [j for j in range(n_k) if j not in split_set]

    new_columns = []
    new_values = []
    new_rows_B = []
    for j in split_idx:
        col = D.columns[j]
        child_level = col.level + 1
        child_ids = hier.children_of(col.level, col.face_id)
        child_mesh = hier.mesh(child_level)
        centers = child_mesh.nodes[child_mesh.faces[child_ids]].mean(axis=1)
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        for cid, center in zip(child_ids, centers):
            new_columns.append(
                DesignColumn(int(cid), child_level, center, col.sigma / 2.0, col.tau)
            )
            new_values.append(bump_column(center, col.sigma / 2.0, col.tau, fine))
        new_rows_B.append(np.repeat(B[j : j + 1] / 4.0, 4, axis=0))

    N = np.column_stack(new_values)
    kept_values = D.values[:, keep]
    values = np.hstack([kept_values, N])
    columns = [D.columns[j] for j in keep] + new_columns
    B_new = np.vstack([B[keep]] + new_rows_B)

    n_keep, n_new = len(keep), N.shape[1]
    K_new = np.empty((n_keep + n_new, n_keep + n_new))
    K_new[:n_keep, :n_keep] = cp.K[np.ix_(keep, keep)]
    cross = kept_values.T @ N
    K_new[:n_keep, n_keep:] = cross
    K_new[n_keep:, :n_keep] = cross.T
    block = N.T @ N
    K_new[n_keep:, n_keep:] = (block + block.T) / 2.0

    L_new = np.hstack([cp.L[:, keep], np.asarray(X).T @ N])
    M_new = L_new.T @ L_new
    M_new = (M_new + M_new.T) / 2.0

    record = RefinementRecord(
        split=[(D.columns[j].level, D.columns[j].face_id) for j in split_idx],
        skipped=skipped,
    )
    new_design = DesignMatrix(columns, values, D.data_level, hier)
    return new_design, B_new, CachedProducts(K_new, L_new, M_new), record


def design_to_csv(D):
    """CSV dump: face_id/level/sigma header lines, then row-major values."""
    lines = [
        "face_id," + ",".join(str(c.face_id) for c in D.columns),
        "level," + ",".join(str(c.level) for c in D.columns),
        "sigma," + ",".join(f"{c.sigma:.17g}" for c in D.columns),
    ]
    for row in D.values:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def design_from_csv(text, hier, data_level, tau=3.0):
    """Rebuild a DesignMatrix from its CSV dump, re-deriving centers."""
    lines = text.strip().split("\n")
    face_ids = [int(v) for v in lines[0].split(",")[1:]]
    levels = [int(v) for v in lines[1].split(",")[1:]]
    sigmas = [float(v) for v in lines[2].split(",")[1:]]
    values = np.array(
        [[float(v) for v in line.split(",")] for line in lines[3:]], dtype=np.float64
    )
    columns = []
    for fid, lvl, sig in zip(face_ids, levels, sigmas):
        mesh = hier.mesh(lvl)
        center = mesh.nodes[mesh.faces[fid]].mean(axis=0)
        center /= np.linalg.norm(center)
        columns.append(DesignColumn(fid, lvl, center, sig, tau))
    return DesignMatrix(columns, values, data_level, hier)
