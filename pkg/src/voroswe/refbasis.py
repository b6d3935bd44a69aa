"""Reference-element bases.

Modal Taylor exponent tables for polygonal cells, nodal Lagrange bases on the
reference triangle (equidistant principal-lattice nodes) and on the unit
square (tensor Newton-Cotes nodes).  Value/gradient tables are normalized so
the partition of unity (and zero gradient sum) holds to the last bit, which
the well-balance property relies on.
"""

from __future__ import annotations

import numpy as np


def n_modal(M: int) -> int:
    return (M + 1) * (M + 2) // 2


def modal_exponents(M: int) -> np.ndarray:
    """(n_modal, 2) integer exponent pairs, first entry (0, 0)."""
    exps = []
    for d in range(M + 1):
        for r in range(d, -1, -1):
            exps.append((r, d - r))
    return np.array(exps, dtype=int)


def _mono_vals(exps, pts):
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    return x ** exps[:, 0] * y ** exps[:, 1]


def _mono_grads(exps, pts):
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    r = exps[:, 0]
    q = exps[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        gx = np.where(r > 0, r * x ** np.maximum(r - 1, 0) * y ** q, 0.0)
        gy = np.where(q > 0, q * x ** r * y ** np.maximum(q - 1, 0), 0.0)
    return gx, gy


class NodalTriBasis:
    """Lagrange basis on T_std with nodes (l1/M, l2/M), l1 + l2 <= M."""

    def __init__(self, M: int):
        self.M = M
        if M == 0:
            self.nodes = np.array([[1.0 / 3.0, 1.0 / 3.0]])
        else:
            nd = [(l1 / M, l2 / M) for l1 in range(M + 1) for l2 in range(M + 1 - l1)]
            self.nodes = np.array(nd)
        self.n = len(self.nodes)
        self.exps = modal_exponents(M)
        V = _mono_vals(self.exps, self.nodes)
        self.coef = np.linalg.inv(V)  # coef[l, k]: phi_k = sum_l coef[l,k] mono_l

    def values(self, pts):
        """(npts, n) with exact partition of unity."""
        vals = _mono_vals(self.exps, np.asarray(pts)) @ self.coef
        vals -= (vals.sum(axis=1, keepdims=True) - 1.0) / self.n
        return vals

    def grads(self, pts):
        """(npts, n, 2) reference gradients with exact zero sum."""
        gx, gy = _mono_grads(self.exps, np.asarray(pts))
        g = np.stack([gx @ self.coef, gy @ self.coef], axis=-1)
        g -= g.sum(axis=1, keepdims=True) / self.n
        return g


class NodalQuadBasis:
    """Tensor Lagrange basis on Q_std with nodes (l1/M, l2/M), 0 <= l1, l2 <= M."""

    def __init__(self, M: int):
        self.M = M
        if M == 0:
            self.nodes1d = np.array([0.5])
        else:
            self.nodes1d = np.arange(M + 1) / M
        n1 = len(self.nodes1d)
        self.n = n1 * n1
        V1 = self.nodes1d[:, None] ** np.arange(n1)
        self.coef1 = np.linalg.inv(V1)
        l1, l2 = np.meshgrid(np.arange(n1), np.arange(n1), indexing="ij")
        self.nodes = np.column_stack(
            [self.nodes1d[l1.ravel()], self.nodes1d[l2.ravel()]]
        )

    def _vals1d(self, t):
        n1 = len(self.nodes1d)
        return (np.asarray(t)[:, None] ** np.arange(n1)) @ self.coef1

    def values(self, pts):
        """(npts, n) with exact partition of unity; index k = l1*(M+1) + l2."""
        pts = np.asarray(pts)
        a = self._vals1d(pts[:, 0])
        b = self._vals1d(pts[:, 1])
        vals = (a[:, :, None] * b[:, None, :]).reshape(len(pts), self.n)
        vals -= (vals.sum(axis=1, keepdims=True) - 1.0) / self.n
        return vals


def bilinear_map(quad_xy, xi):
    """Map reference-square points xi (n, 2) through quads (..., 4, 2)."""
    quad_xy = np.asarray(quad_xy)
    x1, x2 = xi[:, 0], xi[:, 1]
    w = np.stack(
        [(1 - x1) * (1 - x2), x1 * (1 - x2), x1 * x2, (1 - x1) * x2], axis=-1
    )
    return np.einsum("nv,...vc->...nc", w, quad_xy)


def invert_bilinear(quad_xy, pts, iters=30):
    """Invert the bilinear map for physical points inside each quad.

    quad_xy (n, 4, 2), pts (n, 2) -> xi (n, 2).  Damped Newton from the
    center; quads here come from a staggered dual grid and are star-shaped
    enough that this converges to machine precision.
    """
    quad_xy = np.asarray(quad_xy)
    pts = np.asarray(pts)
    a = quad_xy[:, 0]
    b = quad_xy[:, 1] - quad_xy[:, 0]
    c = quad_xy[:, 3] - quad_xy[:, 0]
    d = quad_xy[:, 2] - quad_xy[:, 1] - quad_xy[:, 3] + quad_xy[:, 0]
    xi = np.full_like(pts, 0.5)
    for _ in range(iters):
        x1 = xi[:, 0:1]
        x2 = xi[:, 1:2]
        f = a + b * x1 + c * x2 + d * (x1 * x2) - pts
        j11 = b[:, 0] + d[:, 0] * xi[:, 1]
        j12 = c[:, 0] + d[:, 0] * xi[:, 0]
        j21 = b[:, 1] + d[:, 1] * xi[:, 1]
        j22 = c[:, 1] + d[:, 1] * xi[:, 0]
        det = j11 * j22 - j12 * j21
        step = np.empty_like(xi)
        step[:, 0] = (j22 * f[:, 0] - j12 * f[:, 1]) / det
        step[:, 1] = (-j21 * f[:, 0] + j11 * f[:, 1]) / det
        nrm = np.abs(step).max(axis=1)
        damp = np.where(nrm > 0.5, 0.5 / np.maximum(nrm, 1e-300), 1.0)
        xi = xi - step * damp[:, None]
    return xi
