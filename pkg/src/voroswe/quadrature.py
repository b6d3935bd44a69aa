"""Quadrature rules on the reference segment, triangle and square.

Triangle rules come from a Duffy (collapsed tensor Gauss) construction: all
weights positive, exactness degree verified by the test suite against
closed-form monomial integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (n, dim)
    weights: np.ndarray  # (n,)
    degree: int          # integrates polynomials up to this total degree exactly


def segment_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1] exact for polynomials up to `degree`."""
    n = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    pts = 0.5 * (x + 1.0)
    return QuadratureRule(pts.reshape(-1, 1), 0.5 * w, degree=2 * n - 1)


def triangle_rule(degree: int) -> QuadratureRule:
    """Duffy rule on T_std = {xi1 >= 0, xi2 >= 0, xi1 + xi2 <= 1}.

    Weights sum to the reference area 1/2.
    """
    n = max(1, (degree + 3) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    xi1 = (U * (1.0 - V)).ravel()
    xi2 = V.ravel()
    wts = (WU * WV * (1.0 - V)).ravel()
    return QuadratureRule(np.column_stack([xi1, xi2]), wts, degree=degree)


def map_to_triangle(tri_xy, rule: QuadratureRule):
    """Map a reference rule to physical triangles.

    tri_xy: (..., 3, 2) vertex coordinates.
    Returns points (..., n, 2) and weights (..., n) scaled by |J| = 2*area.
    """
    tri_xy = np.asarray(tri_xy)
    v0 = tri_xy[..., 0, :]
    e1 = tri_xy[..., 1, :] - v0
    e2 = tri_xy[..., 2, :] - v0
    xi = rule.points
    pts = (
        v0[..., None, :]
        + xi[:, 0, None] * e1[..., None, :]
        + xi[:, 1, None] * e2[..., None, :]
    )
    jac = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    wts = rule.weights * jac[..., None]
    return pts, wts


def triangle_area(tri_xy):
    tri_xy = np.asarray(tri_xy)
    v0 = tri_xy[..., 0, :]
    e1 = tri_xy[..., 1, :] - v0
    e2 = tri_xy[..., 2, :] - v0
    return 0.5 * (e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0])


def map_to_segment(p0, p1, rule: QuadratureRule):
    """Map a [0,1] rule onto segments p0->p1; weights carry the length."""
    p0 = np.asarray(p0)
    p1 = np.asarray(p1)
    s = rule.points[:, 0]
    pts = p0[..., None, :] + s[:, None] * (p1 - p0)[..., None, :]
    length = np.linalg.norm(p1 - p0, axis=-1)
    wts = rule.weights * length[..., None]
    return pts, wts
