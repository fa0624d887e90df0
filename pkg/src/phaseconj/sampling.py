"""Measurement models on coherent states.

All samplers take amplitudes (scalars or arrays) and a NumPy ``Generator`` and
return outcomes of the same shape.  Quadrature units follow
:mod:`phaseconj.phase_space` (vacuum variance 1/2).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .phase_space import SQRT2, beamsplitter
from .rng import standard_normal

_HALF_SD = math.sqrt(0.5)


class JointOutcome(NamedTuple):
    """Values of the commuting pair ``x1 + x2`` and ``p1 - p2``."""

    u: np.ndarray
    v: np.ndarray


def _normal_like(a, rng, count=1):
    shape = np.shape(a)
    z = standard_normal(rng, (count, *shape))
    return z if count > 1 else z[0]


def heterodyne(a, rng: np.random.Generator):
    """Sample the Q-function of ``|a>``: ``beta ~ (1/pi) exp(-|beta - a|^2)``."""
    a = np.asarray(a, dtype=complex)
    z = _normal_like(a, rng, 2)
    beta = a + _HALF_SD * (z[0] + 1j * z[1])
    return complex(beta) if beta.ndim == 0 else beta


def homodyne_x(a, rng: np.random.Generator):
    a = np.asarray(a, dtype=complex)
    out = SQRT2 * a.real + _HALF_SD * _normal_like(a, rng)
    return float(out) if out.ndim == 0 else out


def homodyne_p(a, rng: np.random.Generator):
    a = np.asarray(a, dtype=complex)
    out = SQRT2 * a.imag + _HALF_SD * _normal_like(a, rng)
    return float(out) if out.ndim == 0 else out


def heterodyne_via_beamsplitter(a, rng: np.random.Generator):
    """Heterodyne built from a 50:50 split with vacuum and two homodynes.

    Each output port carries ``a/sqrt(2)``, whose ``x`` (resp. ``p``) homodyne
    has mean ``Re a`` (resp. ``Im a``) and variance 1/2: exactly the marginals
    of the Q-function, so no rescaling is needed.
    """
    out1, out2 = beamsplitter(a, np.zeros_like(np.asarray(a, dtype=complex)))
    beta = np.asarray(homodyne_x(out1, rng)) + 1j * np.asarray(homodyne_p(out2, rng))
    return complex(beta) if beta.ndim == 0 else beta


def joint_epr_measure(a1, a2, rng: np.random.Generator) -> JointOutcome:
    """Sample ``(x1 + x2, p1 - p2)`` on ``|a1>|a2>``.

    The two observables commute, so they are drawn independently, each with
    variance 1 (two vacuum units).
    """
    a1 = np.asarray(a1, dtype=complex)
    a2 = np.asarray(a2, dtype=complex)
    shape = np.broadcast_shapes(a1.shape, a2.shape)
    z = standard_normal(rng, (2, *shape))
    u = SQRT2 * (a1 + a2).real + z[0]
    v = SQRT2 * (a1 - a2).imag + z[1]
    if u.ndim == 0:
        return JointOutcome(float(u), float(v))
    return JointOutcome(u, v)


def joint_epr_via_beamsplitter(a1, a2, rng: np.random.Generator) -> JointOutcome:
    """Same statistics as :func:`joint_epr_measure`, realised optically.

    Port 1 of the beam splitter carries ``(a1 + a2)/sqrt(2)`` and port 2
    ``(a1 - a2)/sqrt(2)``; homodyne ``x`` on port 1 and ``p`` on port 2, each
    scaled by ``sqrt(2)``, give ``x1 + x2`` and ``p1 - p2``.
    """
    out1, out2 = beamsplitter(a1, a2)
    u = SQRT2 * np.asarray(homodyne_x(out1, rng))
    v = SQRT2 * np.asarray(homodyne_p(out2, rng))
    if u.ndim == 0:
        return JointOutcome(float(u), float(v))
    return JointOutcome(u, v)
