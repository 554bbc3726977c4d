"""File formats for matrices: ICOD binary and CSV variants.

ICOD is a compact little-endian container: magic ``ICOD``, two u32 dims,
then the f64 payload in row-major order. It round-trips values exactly.
The data CSV carries a ``face_id,s1..sN`` header so files can be checked
against the mesh resolution they were produced for.
"""

import struct

import numpy as np

from .errors import DataShapeError

ICOD_MAGIC = b"ICOD"


def save_icod(path, matrix):
    a = np.ascontiguousarray(matrix, dtype="<f8")
    if a.ndim != 2:
        raise DataShapeError(f"ICOD stores 2-D matrices, got ndim={a.ndim}")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", ICOD_MAGIC, a.shape[0], a.shape[1]))
        fh.write(a.tobytes())


def load_icod(path):
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) != 12:
            raise DataShapeError(f"{path}: truncated ICOD header")
        magic, rows, cols = struct.unpack("<4sII", header)
        if magic != ICOD_MAGIC:
            raise DataShapeError(f"{path}: bad magic {magic!r}, expected {ICOD_MAGIC!r}")
        payload = fh.read()
    expected = 8 * rows * cols
    if len(payload) != expected:
        raise DataShapeError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def save_matrix_csv(path, matrix):
    """Plain numeric CSV, one row per line, %.17g (exact float64 round-trip)."""
    a = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w") as fh:
        for row in a:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_matrix_csv(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))


def save_data_csv(path, X):
    """Data matrix with header ``face_id,s1..sN`` and one row per face."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n_s = X.shape[1]
    with open(path, "w") as fh:
        fh.write("face_id," + ",".join(f"s{j + 1}" for j in range(n_s)) + "\n")
        for i, row in enumerate(X):
            fh.write(f"{i}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def load_data_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        fields = header.split(",")
        if not fields or fields[0] != "face_id":
            raise DataShapeError(f"{path}: expected header starting with face_id")
        rows = []
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(fields):
                raise DataShapeError(
                    f"{path}: row {line_no} has {len(parts)} fields, header has {len(fields)}"
                )
            if int(parts[0]) != line_no:
                raise DataShapeError(
                    f"{path}: face_id {parts[0]} out of order at row {line_no}"
                )
            rows.append([float(v) for v in parts[1:]])
    return np.array(rows, dtype=np.float64)


def load_matrix_auto(path):
    """Load a matrix from ICOD, data CSV, or plain CSV, sniffing the format."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(ICOD_MAGIC):
        return load_icod(path)
    if head.startswith(b"face_id"):
        return load_data_csv(path)
    return load_matrix_csv(path)
