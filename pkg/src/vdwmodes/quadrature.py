"""Gauss-Legendre quadrature on the positive imaginary-frequency half line."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyError


@dataclass(frozen=True)
class QuadSpec:
    """Node budget for an xi-integral.

    ``nodes`` is the starting Gauss-Legendre order. With ``tol`` set, the
    order is doubled until two successive results agree to ``tol``
    (relative) or ``max_nodes`` is exceeded. ``tol=None`` means one fixed
    rule with ``nodes`` points.
    """

    nodes: int = 16
    tol: float | None = 1e-6
    max_nodes: int = 512

    def fixed(self, nodes: int | None = None) -> "QuadSpec":
        return QuadSpec(nodes=nodes or self.nodes, tol=None, max_nodes=self.max_nodes)


@lru_cache(maxsize=32)
def _leggauss(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def half_line_rule(n: int, scale: float):
    """Nodes and weights for int_0^inf dxi under xi = scale (1+t)/(1-t)."""
    t, w = _leggauss(n)
    xi = scale * (1.0 + t) / (1.0 - t)
    wx = w * 2.0 * scale / (1.0 - t) ** 2
    return xi, wx


def integrate_half_line(f, scale: float, quad: QuadSpec = QuadSpec()):
    """Integrate a vectorized ``f(xi_array)`` over (0, inf).

    Returns ``(value, nodes_used, rel_change)``; ``rel_change`` is 0 for a
    fixed rule.
    """
    n = quad.nodes
    xi, w = half_line_rule(n, scale)
    value = float(np.dot(w, f(xi)))
    if quad.tol is None:
        return value, n, 0.0
    rel = float("nan")
    while True:
        n2 = 2 * n
        if n2 > quad.max_nodes:
            raise AccuracyError(
                f"xi quadrature not converged at {n} nodes (rel change {rel:.2e})",
                achieved=rel,
            )
        xi, w = half_line_rule(n2, scale)
        new = float(np.dot(w, f(xi)))
        rel = abs(new - value) / max(abs(new), 1e-300)
        if rel < quad.tol or new == value:
            return new, n2, rel
        value, n = new, n2
