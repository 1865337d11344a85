"""Euclidean kernel: Cayley-Menger determinants, K-lateration and hyperplane reflections.

Points are 1-D float arrays of length K. The solvers call the list-based
cores (:func:`laterate`, :func:`reflector_from_list`) directly because for
K <= 3 plain float arithmetic is an order of magnitude faster than small
numpy calls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, DegeneracyError, InfeasibleError

# |CM| divided by the product of squared consecutive edge lengths must exceed this.
CM_THRESHOLD = 1e-10
# Roots of a K-lateration closer than this are collapsed into one.
TANGENT_TOL = 1e-9


def _as_points(points) -> np.ndarray:
    try:
        pts = np.asarray(points, dtype=float)
    except ValueError:
        raise ArgumentError("points must all have the same dimension") from None
    if pts.ndim != 2:
        raise ArgumentError(f"expected a 2-D array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ArgumentError("points must be finite")
    return pts


def _square_points(points, what: str) -> np.ndarray:
    pts = _as_points(points)
    if pts.shape[0] != pts.shape[1]:
        raise ArgumentError(f"{what} needs exactly K points of dimension K, got shape {pts.shape}")
    return pts


def cayley_menger(points) -> float:
    """Cayley-Menger determinant of K points in R^K.

    The bordered matrix is ``[[0, 1, ..., 1], [1, D]]`` with ``D`` the matrix
    of squared pairwise distances.
    """
    return cayley_menger_any(_square_points(points, "cayley_menger"))


def cayley_menger_any(points) -> float:
    """Cayley-Menger determinant of an arbitrary number of points."""
    pts = _as_points(points)
    m = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    border = np.ones((m + 1, m + 1))
    border[0, 0] = 0.0
    border[1:, 1:] = np.einsum("abk,abk->ab", diff, diff)
    return float(np.linalg.det(border))


def scaled_cayley_menger(points) -> float:
    """|CM| normalised by the product of squared consecutive edge lengths.

    Dimensionless; for a triangle it equals ``4 sin^2`` of the middle angle.
    """
    pts = _as_points(points)
    steps = np.diff(pts, axis=0)
    scale = float(np.prod(np.einsum("ak,ak->a", steps, steps)))
    if scale == 0.0:
        return 0.0
    return abs(cayley_menger_any(pts)) / scale


def is_degenerate(points, threshold: float = CM_THRESHOLD) -> bool:
    return scaled_cayley_menger(points) <= threshold


def _det(m: list) -> float:
    """Determinant by Gaussian elimination with partial pivoting (small matrices)."""
    m = [row[:] for row in m]
    n = len(m)
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[piv][col] == 0.0:
            return 0.0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det *= p
        for r in range(col + 1, n):
            f = m[r][col] / p
            if f:
                row, top = m[r], m[col]
                for c in range(col + 1, n):
                    row[c] -= f * top[c]
    return det


def _cofactor_normal(a: list, k: int) -> list:
    """Vector v with det[a_1; ...; a_{K-1}; y] = v . y for every y."""
    if k == 2:
        return [-a[0][1], a[0][0]]
    if k == 3:
        (p0, p1, p2), (q0, q1, q2) = a
        return [p1 * q2 - p2 * q1, p2 * q0 - p0 * q2, p0 * q1 - p1 * q0]
    out = []
    for col in range(k):
        minor = [row[:col] + row[col + 1:] for row in a]
        sign = -1.0 if (k - 1 + col) % 2 else 1.0
        out.append(sign * _det(minor))
    return out


class _Frame(NamedTuple):
    basis: list  # orthonormal rows spanning the center differences
    rmat: list  # rmat[l][q] = <a_l, basis_q>, lower triangular
    normal: list  # unit, det[a; normal] > 0
    scaled_cm: float


def _frame(cs: list) -> _Frame:
    """Modified Gram-Schmidt frame of c_l - c_1 plus an oriented unit normal."""
    k = len(cs)
    c0 = cs[0]
    a = [[ci - c0i for ci, c0i in zip(c, c0)] for c in cs[1:]]
    scale = 1.0
    for p, q in zip(cs, cs[1:]):
        scale *= sum((pi - qi) ** 2 for pi, qi in zip(p, q))
    cof = _cofactor_normal(a, k)
    vol2 = sum(v * v for v in cof)
    # |CM| of K points = 2^(K-1) * ((K-1)! * volume)^2 = 2^(K-1) * |cofactor|^2
    scaled = (2.0 ** (k - 1)) * vol2 / scale if scale > 0.0 else 0.0
    basis, rmat = [], []
    for row in a:
        v = row
        coeffs = []
        for e in basis:
            dot = sum(vi * ei for vi, ei in zip(v, e))
            coeffs.append(dot)
            v = [vi - dot * ei for vi, ei in zip(v, e)]
        nv = math.sqrt(sum(vi * vi for vi in v))
        coeffs.append(nv)
        basis.append([vi / nv for vi in v] if nv > 0.0 else v)
        rmat.append(coeffs)
    nn = math.sqrt(vol2)
    normal = [v / nn for v in cof] if nn > 0.0 else cof
    return _Frame(basis, rmat, normal, scaled)


def _degeneracy(what: str, scaled: float, vertex) -> DegeneracyError:
    where = f" for vertex {vertex}" if vertex is not None else ""
    return DegeneracyError(f"degenerate {what} (scaled Cayley-Menger {scaled:.3e}){where}", vertex=vertex)


class Lateration(NamedTuple):
    plus: np.ndarray
    minus: np.ndarray
    tangent: bool


def k_laterate(centers, radii, tolerance: float = 1e-4, vertex=None) -> Lateration:
    """Intersect K spheres in R^K.

    ``minus`` is the root whose signed volume det[c_2-c_1, ..., c_K-c_1, x-c_1]
    is non-positive; ``plus`` is its mirror image through the centers'
    hyperplane.  Raises DegeneracyError when the centers do not span a
    (K-1)-flat and InfeasibleError when the spheres miss each other by more
    than ``tolerance * max(1, r_1)``.  On tangency both roots are the same
    point and ``tangent`` is set.
    """
    c = _square_points(centers, "k_laterate")
    r = np.asarray(radii, dtype=float)
    if r.shape != (c.shape[0],):
        raise ArgumentError("one radius per center required")
    if not np.all(r > 0.0):
        raise ArgumentError("radii must be positive")
    plus, minus, tangent = laterate(c.tolist(), r.tolist(), tolerance, vertex)
    return Lateration(np.array(plus), np.array(minus), tangent)


def laterate(cs: list, rs: list, tolerance: float, vertex=None):
    """Float-list core of :func:`k_laterate`; returns ``(plus, minus, tangent)``."""
    k = len(cs)
    if k == 3:
        return _laterate3(cs, rs, tolerance, vertex)
    if k == 1:
        return [cs[0][0] + rs[0]], [cs[0][0] - rs[0]], False
    fr = _frame(cs)
    if not fr.scaled_cm > CM_THRESHOLD:
        raise _degeneracy("centers", fr.scaled_cm, vertex)
    r0 = rs[0]
    # <a_l, y> = (|a_l|^2 + r_1^2 - r_l^2) / 2, solved by forward substitution in the basis
    alpha = []
    for l, row in enumerate(fr.rmat):
        rhs = 0.5 * (sum(v * v for v in row) + r0 * r0 - rs[l + 1] * rs[l + 1])
        for q in range(l):
            rhs -= row[q] * alpha[q]
        alpha.append(rhs / row[l])
    y0 = [0.0] * k
    for al, e in zip(alpha, fr.basis):
        for q in range(k):
            y0[q] += al * e[q]
    y2 = sum(v * v for v in y0)
    h2 = r0 * r0 - y2
    if h2 < 0.0:
        miss = math.sqrt(y2) - r0
        if miss > tolerance * max(1.0, r0):
            where = f" for vertex {vertex}" if vertex is not None else ""
            raise InfeasibleError(f"spheres do not intersect (gap {miss:.3e}){where}", residual=miss, vertex=vertex)
        h2 = 0.0
    h = math.sqrt(h2)
    base = [c + y for c, y in zip(cs[0], y0)]
    if 2.0 * h < TANGENT_TOL:
        return base, base[:], True
    nrm = fr.normal
    return [b + h * v for b, v in zip(base, nrm)], [b - h * v for b, v in zip(base, nrm)], False


def _laterate3(cs, rs, tolerance, vertex):
    (x0, y0, z0), (x1, y1, z1), (x2, y2, z2) = cs
    ax, ay, az = x1 - x0, y1 - y0, z1 - z0
    bx, by, bz = x2 - x0, y2 - y0, z2 - z0
    nx, ny, nz = ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx
    vol2 = nx * nx + ny * ny + nz * nz
    a2 = ax * ax + ay * ay + az * az
    b2 = bx * bx + by * by + bz * bz
    cx, cy, cz = x2 - x1, y2 - y1, z2 - z1
    scale = a2 * (cx * cx + cy * cy + cz * cz)
    scaled = 4.0 * vol2 / scale if scale > 0.0 else 0.0
    if not scaled > CM_THRESHOLD:
        raise _degeneracy("centers", scaled, vertex)
    r0, r1, r2 = rs
    p = 0.5 * (a2 + r0 * r0 - r1 * r1)
    q = 0.5 * (b2 + r0 * r0 - r2 * r2)
    # in-plane point: (p (b x n) + q (n x a)) / |n|^2
    ux = (p * (by * nz - bz * ny) + q * (ny * az - nz * ay)) / vol2
    uy = (p * (bz * nx - bx * nz) + q * (nz * ax - nx * az)) / vol2
    uz = (p * (bx * ny - by * nx) + q * (nx * ay - ny * ax)) / vol2
    u2 = ux * ux + uy * uy + uz * uz
    h2 = r0 * r0 - u2
    if h2 < 0.0:
        miss = math.sqrt(u2) - r0
        if miss > tolerance * max(1.0, r0):
            where = f" for vertex {vertex}" if vertex is not None else ""
            raise InfeasibleError(f"spheres do not intersect (gap {miss:.3e}){where}", residual=miss, vertex=vertex)
        h2 = 0.0
    h = math.sqrt(h2)
    base = [x0 + ux, y0 + uy, z0 + uz]
    if 2.0 * h < TANGENT_TOL:
        return base, base[:], True
    f = h / math.sqrt(vol2)
    ex, ey, ez = f * nx, f * ny, f * nz
    return (
        [base[0] + ex, base[1] + ey, base[2] + ez],
        [base[0] - ex, base[1] - ey, base[2] - ez],
        False,
    )


@dataclass(frozen=True)
class HyperplaneReflector:
    """Affine reflection through the hyperplane with unit ``normal`` passing through ``anchor``."""

    normal: np.ndarray
    anchor: np.ndarray

    def __call__(self, y):
        return reflect(self, y)


def build_reflector(points, vertex=None) -> HyperplaneReflector:
    """Reflector through the hyperplane spanned by K affinely independent points.

    The anchor is the last point; the normal is oriented like the ``plus``
    root of :func:`k_laterate` so results are reproducible.
    """
    return reflector_from_list(_square_points(points, "build_reflector").tolist(), vertex)


def hyperplane(cs: list, vertex=None) -> tuple[list, list]:
    """(unit normal, anchor) as float lists for the hyperplane through K points."""
    k = len(cs)
    if k == 1:
        return [1.0], list(cs[0])
    if k == 3:
        (x0, y0, z0), (x1, y1, z1), (x2, y2, z2) = cs
        ax, ay, az = x1 - x0, y1 - y0, z1 - z0
        bx, by, bz = x2 - x0, y2 - y0, z2 - z0
        nx, ny, nz = ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx
        vol2 = nx * nx + ny * ny + nz * nz
        cx, cy, cz = x2 - x1, y2 - y1, z2 - z1
        scale = (ax * ax + ay * ay + az * az) * (cx * cx + cy * cy + cz * cz)
        scaled = 4.0 * vol2 / scale if scale > 0.0 else 0.0
        if not scaled > CM_THRESHOLD:
            raise _degeneracy("hyperplane", scaled, vertex)
        f = 1.0 / math.sqrt(vol2)
        return [nx * f, ny * f, nz * f], list(cs[-1])
    fr = _frame(cs)
    if not fr.scaled_cm > CM_THRESHOLD:
        raise _degeneracy("hyperplane", fr.scaled_cm, vertex)
    return fr.normal, list(cs[-1])


def reflector_from_list(cs: list, vertex=None) -> HyperplaneReflector:
    normal, anchor = hyperplane(cs, vertex)
    return HyperplaneReflector(np.array(normal), np.array(anchor, dtype=float))


def reflect_list(normal: list, anchor: list, y: list) -> list:
    """Float-list version of :func:`reflect` for a single point."""
    off = 0.0
    for yi, ai, ni in zip(y, anchor, normal):
        off += (yi - ai) * ni
    off *= 2.0
    return [yi - off * ni for yi, ni in zip(y, normal)]


def reflect(r: HyperplaneReflector, y):
    """(I - 2 n n^T)(y - anchor) + anchor; ``y`` may be one point or a stack of points."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != r.normal.shape[0]:
        raise ArgumentError(f"dimension mismatch: reflector is {r.normal.shape[0]}-D, point is {y.shape[-1]}-D")
    offset = (y - r.anchor) @ r.normal
    return y - 2.0 * np.multiply.outer(offset, r.normal)


def place_clique(sq_dist) -> np.ndarray:
    """Canonical realisation of a K-clique from its squared distance matrix.

    Point 1 at the origin, point 2 on the first axis, point a in the span of
    the first a-1 axes with positive (a-1)-th coordinate.
    """
    d2 = np.asarray(sq_dist, dtype=float)
    k = d2.shape[0]
    x = np.zeros((k, k))
    if k == 1:
        return x
    gram = 0.5 * (d2[0, 1:, None] + d2[0, None, 1:] - d2[1:, 1:])
    try:
        low = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("initial clique distances are not realisable in general position") from exc
    x[1:, : k - 1] = low
    return x


def canonicalize(points) -> np.ndarray:
    """Move a realisation by a proper rigid motion into the canonical root-clique frame.

    The first K points end up in the form produced by :func:`place_clique`;
    the last axis is fixed by requiring a rotation (det = +1), so a mirror
    image maps to the canonical form with its last coordinate negated.
    """
    x = _as_points(points)
    k = x.shape[1]
    shifted = x - x[0]
    if k == 1:
        return shifted
    q, r = np.linalg.qr(shifted[1:k].T, mode="complete")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q[:, : k - 1] *= signs
    if np.linalg.det(q) < 0:
        q[:, -1] *= -1.0
    return shifted @ q
