"""CSV file formats: point clouds, metrics, plans, matrices, reports.

Every output file begins with comment lines carrying the tool version, the
seed and the manifest hash, so artifacts are traceable to the run that made
them. Readers skip comment lines and report parse errors with line numbers.
"""

from __future__ import annotations

import numpy as np

from .geometry import PointCloud

VERSION = "0.1.0"


class CloudParseError(ValueError):
    pass


def header_lines(seed, manifest_hash: str = "none") -> str:
    return (f"# lipflow {VERSION}\n"
            f"# seed={seed}\n"
            f"# manifest={manifest_hash}\n")


def write_cloud_csv(path, cloud: PointCloud, seed=0, manifest_hash="none",
                    include_weights=None):
    if include_weights is None:
        include_weights = not cloud.is_uniform()
    with open(path, "w") as fh:
        fh.write(header_lines(seed, manifest_hash))
        fh.write(f"dim={cloud.dim}\n")
        for p, w in zip(cloud.points, cloud.weights):
            row = ",".join(repr(float(v)) for v in p)
            if include_weights:
                row += f",{float(w)!r}"
            fh.write(row + "\n")


def read_cloud_csv(path) -> PointCloud:
    """Point-cloud CSV: `dim=<n>` header, rows of n floats + optional weight."""
    dim = None
    points, weights = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if dim is None:
                if not line.startswith("dim="):
                    raise CloudParseError(f"{path}:{lineno}: expected 'dim=<n>' header")
                try:
                    dim = int(line[4:])
                except ValueError:
                    raise CloudParseError(f"{path}:{lineno}: bad dimension {line[4:]!r}")
                if dim < 1:
                    raise CloudParseError(f"{path}:{lineno}: dimension must be >= 1")
                continue
            fields = line.split(",")
            if len(fields) not in (dim, dim + 1):
                raise CloudParseError(
                    f"{path}:{lineno}: expected {dim} or {dim + 1} fields, "
                    f"got {len(fields)}")
            try:
                values = [float(v) for v in fields]
            except ValueError as e:
                raise CloudParseError(f"{path}:{lineno}: {e}")
            points.append(values[:dim])
            weights.append(values[dim] if len(fields) == dim + 1 else None)
    if dim is None or not points:
        raise CloudParseError(f"{path}: no points found")
    has_w = [w is not None for w in weights]
    if any(has_w) and not all(has_w):
        raise CloudParseError(f"{path}: weight column must be all-or-none")
    if all(has_w):
        w = np.array(weights, dtype=float)
        total = w.sum()
        if total <= 0:
            raise CloudParseError(f"{path}: weights must have positive total")
        return PointCloud(np.array(points), w / total)
    return PointCloud.uniform(np.array(points))


def write_metrics_csv(path, history, seed=0, manifest_hash="none"):
    with open(path, "w") as fh:
        fh.write(header_lines(seed, manifest_hash))
        fh.write("iteration,w1,mean_f_pg,mean_f_pr,k_emp,j_d\n")
        for row in history:
            it, w1, fg, fr, k, jd = row.as_tuple()
            fh.write(f"{it},{w1!r},{fg!r},{fr!r},{k!r},{jd!r}\n")


def read_metrics_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("iteration"):
                continue
            it, *rest = line.split(",")
            rows.append((int(it), *(float(v) for v in rest)))
    return rows


def write_matrix_csv(path, matrix, seed=0, manifest_hash="none"):
    matrix = np.atleast_2d(np.asarray(matrix, float))
    with open(path, "w") as fh:
        fh.write(header_lines(seed, manifest_hash))
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(v) for v in line.split(",")])
    return np.array(rows)


def write_field_csv(path, pairs, seed=0, manifest_hash="none"):
    """Gradient-field CSV: point coordinates then gradient coordinates."""
    with open(path, "w") as fh:
        fh.write(header_lines(seed, manifest_hash))
        for point, grad in pairs:
            vals = list(point) + list(grad)
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def write_reports(path, reports, seed=0, manifest_hash="none"):
    """One record per theorem: id, pass, json detail."""
    with open(path, "w") as fh:
        fh.write(header_lines(seed, manifest_hash))
        for r in reports:
            fh.write(r.to_record() + "\n")
