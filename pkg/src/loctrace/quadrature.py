"""Adaptive plane quadrature.

Cells are axis-aligned rectangles carrying a tensor Gauss-Legendre rule of
order 8.  A cell is accepted when the sum over its four children agrees with
the parent value within the cell's share of the global tolerance; otherwise
the children are refined, down to a depth limit.  All cells at one depth are
evaluated in a single vectorized call, and sums run in a fixed traversal
order so results are reproducible bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["integrate_rect", "integrate_box", "QuadratureResult"]

GL_ORDER = 8
_nodes, _weights = np.polynomial.legendre.leggauss(GL_ORDER)
_W2 = np.outer(_weights, _weights)


class QuadratureResult:
    __slots__ = ("value", "est_error", "cells", "converged")

    def __init__(self, value, est_error, cells, converged):
        self.value = complex(value)
        self.est_error = float(est_error)
        self.cells = int(cells)
        self.converged = bool(converged)

    def __repr__(self):
        return (
            f"QuadratureResult({self.value:.10g}, est={self.est_error:.3g}, "
            f"cells={self.cells}, converged={self.converged})"
        )


def _cell_values(f_xy, cells):
    """Gauss-Legendre values for an (n, 4) array of rectangles."""
    x0, x1, y0, y1 = cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3]
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    cx = 0.5 * (x1 + x0)
    cy = 0.5 * (y1 + y0)
    X = cx[:, None, None] + hx[:, None, None] * _nodes[None, :, None]
    Y = cy[:, None, None] + hy[:, None, None] * _nodes[None, None, :]
    X = np.broadcast_to(X, (len(cells), GL_ORDER, GL_ORDER))
    Y = np.broadcast_to(Y, (len(cells), GL_ORDER, GL_ORDER))
    vals = np.asarray(f_xy(X.reshape(-1), Y.reshape(-1)), dtype=complex)
    vals = vals.reshape(len(cells), GL_ORDER, GL_ORDER)
    return (hx * hy) * np.einsum("nij,ij->n", vals, _W2)


def _children(cells):
    x0, x1, y0, y1 = cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3]
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    quads = [
        np.stack([x0, xm, y0, ym], axis=1),
        np.stack([xm, x1, y0, ym], axis=1),
        np.stack([x0, xm, ym, y1], axis=1),
        np.stack([xm, x1, ym, y1], axis=1),
    ]
    # interleave so children of one parent are contiguous
    return np.stack(quads, axis=1).reshape(-1, 4)


def integrate_rect(f_xy, rect, tol=1e-6, max_depth=12, threads=1):
    """Integrate f(x, y) dx dy over a rectangle (x0, x1, y0, y1)."""
    x0, x1, y0, y1 = (float(v) for v in rect)
    if x1 <= x0 or y1 <= y0:
        return QuadratureResult(0.0, 0.0, 0, True)
    if threads > 1:
        return _integrate_split(f_xy, rect, tol, max_depth, threads)
    total_area = (x1 - x0) * (y1 - y0)
    cells = np.array([[x0, x1, y0, y1]])
    coarse = _cell_values(f_xy, cells)
    value = 0j
    est = 0.0
    ncells = 1
    converged = True
    for depth in range(1, max_depth + 1):
        kids = _children(cells)
        kid_vals = _cell_values(f_xy, kids)
        ncells += len(kids)
        fine = kid_vals.reshape(-1, 4).sum(axis=1)
        err = np.abs(fine - coarse)
        areas = (cells[:, 1] - cells[:, 0]) * (cells[:, 3] - cells[:, 2])
        thresh = tol * areas / total_area
        accept = err <= thresh
        if depth == max_depth:
            converged = not bool(np.any(~accept))
            accept = np.ones_like(accept)
        for i in np.where(accept)[0]:
            value += fine[i]
            est += err[i]
        keep = ~accept
        if not np.any(keep):
            break
        cells = kids.reshape(-1, 4, 4)[keep].reshape(-1, 4)
        coarse = kid_vals.reshape(-1, 4)[keep].reshape(-1)
    return QuadratureResult(value, est, ncells, converged)


def _integrate_split(f_xy, rect, tol, max_depth, threads):
    x0, x1, y0, y1 = rect
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    quads = [
        (x0, xm, y0, ym),
        (xm, x1, y0, ym),
        (x0, xm, ym, y1),
        (xm, x1, ym, y1),
    ]
    with ThreadPoolExecutor(max_workers=min(int(threads), 4)) as pool:
        futs = [
            pool.submit(integrate_rect, f_xy, q, tol * 0.25, max_depth - 1, 1)
            for q in quads
        ]
        parts = [f.result() for f in futs]
    return QuadratureResult(
        sum(p.value for p in parts),
        sum(p.est_error for p in parts),
        sum(p.cells for p in parts),
        all(p.converged for p in parts),
    )


def integrate_box(f_z, rect, tol=1e-6, max_depth=12, threads=1):
    """Same engine with a complex-plane integrand f(z) and measure dx dy."""

    def f_xy(x, y):
        return f_z(x + 1j * y)

    return integrate_rect(f_xy, rect, tol, max_depth, threads)
