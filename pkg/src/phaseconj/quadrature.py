"""Product Gauss-Hermite quadrature over the complex plane.

Integrals ``int d^2 alpha f(alpha)`` are evaluated as ``sum_i w_i f(alpha_i)``
with nodes placed for a Gaussian envelope ``exp(-c |alpha - m|^2)``.  The rule is
exact when ``f`` is that envelope times a polynomial of degree ``< 2K`` in each
real coordinate, which covers every Fock-basis matrix element used here.  The
integrand itself is always evaluated in full; the envelope only sets node
placement and spread (the radial extent is ``~ sqrt(2K / c)``).

A :class:`QuadratureGrid` doubles the per-axis node count until two
successive results agree to ``tol``; failure to do so by ``max_nodes`` raises
:class:`GridNotConvergedError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np


class GridNotConvergedError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def _hermite_rule(k: int):
    t, w = np.polynomial.hermite.hermgauss(k)
    with np.errstate(divide="ignore"):
        # w * exp(t^2), done in logs so large k does not overflow
        scaled = np.exp(np.log(w) + t * t)
    return t, scaled


def line_rule(center: float, precision: float, k: int):
    """Nodes and weights for ``int dx f(x)`` around ``exp(-precision (x - center)^2)``."""
    t, w = _hermite_rule(k)
    s = 1.0 / math.sqrt(precision)
    return center + s * t, s * w


def plane_rule(center: complex, precision: float, k: int):
    """Flattened ``k*k`` product rule for ``int d^2 alpha f(alpha)``."""
    xr, wr = line_rule(center.real, precision, k)
    xi, wi = line_rule(center.imag, precision, k)
    points = (xr[:, None] + 1j * xi[None, :]).ravel()
    weights = (wr[:, None] * wi[None, :]).ravel()
    return points, weights


@dataclass(frozen=True)
class QuadratureGrid:
    """Refinement policy for the plane quadrature.

    ``nodes`` is the starting per-axis count (``None`` lets each caller pick
    the count at which its polynomial part is integrated exactly).
    """

    nodes: Optional[int] = None
    max_nodes: int = 256
    tol: float = 1e-6

    def __post_init__(self):
        if self.nodes is not None and self.nodes < 2:
            raise ValueError("need at least 2 nodes per axis")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def start(self, suggested: int) -> int:
        return self.nodes if self.nodes is not None else max(int(suggested), 4)

    def converge(self, evaluate: Callable[[int], object], suggested: int, *, max_nodes=None):
        """Evaluate at ``K, 2K, 4K, ...`` until successive results agree.

        ``evaluate(K)`` returns a scalar or array.  Returns ``(value, K)`` for the
        finer of the two agreeing evaluations.
        """
        cap = max_nodes or self.max_nodes
        k = self.start(suggested)
        prev = np.asarray(evaluate(k))
        while 2 * k <= cap:
            k *= 2
            cur = np.asarray(evaluate(k))
            diff = float(np.max(np.abs(cur - prev))) if cur.size else 0.0
            if diff <= self.tol:
                return cur, k
            prev = cur
        raise GridNotConvergedError(
            f"quadrature did not settle below {self.tol:g} by {k} nodes per axis"
        )
