"""Coherent-state amplitudes, quadratures and passive linear optics.

Conventions (used by every module in the package):

* A coherent-state amplitude is a Python/NumPy ``complex``.  Functions accept
  scalars or arrays and broadcast.
* Quadratures are ``x = (a + a^dag)/sqrt(2)`` and ``p = (a - a^dag)/(i sqrt(2))``,
  so the vacuum variance of either quadrature is 1/2 and
  ``alpha = (x + i p) / sqrt(2)``.
* The balanced beam splitter maps ``(a1, a2) -> ((a1 + a2)/sqrt(2), (a1 - a2)/sqrt(2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .rng import standard_normal

SQRT2 = math.sqrt(2.0)
VACUUM_QUADRATURE_VARIANCE = 0.5
CONCENTRATE_ATOL = 1e-12

Amplitude = complex


class QuadraturePair(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class GaussianPrior:
    """Isotropic Gaussian prior ``P(alpha) = (lam/pi) exp(-lam |alpha|^2)``.

    ``lam`` is the precision; the mean of ``|alpha|^2`` is ``1/lam``.
    ``lam = 0`` is the flat (non-normalizable) limit and is only accepted by
    operations whose formulas have a finite limit there.
    """

    lam: float

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"prior precision must be finite and >= 0, got {self.lam}")

    @property
    def normalizable(self) -> bool:
        return self.lam > 0

    def density(self, alpha):
        if not self.normalizable:
            raise ValueError("flat prior (lam = 0) has no normalized density")
        return self.lam / math.pi * np.exp(-self.lam * np.abs(alpha) ** 2)


def conjugate(a):
    return np.conj(a)


def quadratures(a) -> QuadraturePair:
    a = np.asarray(a)
    return QuadraturePair(SQRT2 * a.real, SQRT2 * a.imag)


def amplitude_from_quadratures(x, p):
    return (np.asarray(x) + 1j * np.asarray(p)) / SQRT2


def beamsplitter(a1, a2, transmissivity=0.5):
    """Real beam splitter acting on coherent amplitudes.

    Outputs ``sqrt(T) a1 + sqrt(1-T) a2`` and ``sqrt(1-T) a1 - sqrt(T) a2``.
    At the default ``T = 1/2`` this is ``((a1 + a2)/sqrt(2), (a1 - a2)/sqrt(2))``;
    for the phase-conjugate pair ``(alpha, alpha*)`` the outputs are ``x_alpha``
    (real) and ``i p_alpha`` (imaginary).
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    a1 = np.asarray(a1, dtype=complex)
    a2 = np.asarray(a2, dtype=complex)
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    return t * a1 + r * a2, r * a1 - t * a2


def concentrate(copies: Sequence[complex]) -> complex:
    """Merge ``N`` identical coherent states into one mode of amplitude ``sqrt(N) alpha``.

    The merge is a cascade of beam splitters: mode ``k`` (``k = 2..N``) is
    combined with the accumulated mode at transmissivity ``(k-1)/k`` so the
    discarded port is left in vacuum (for N = 2 this is the 50:50 splitter).
    Raises if the inputs are not identical or a discarded port is not empty.
    """
    copies = [complex(c) for c in copies]
    if not copies:
        raise ValueError("concentrate needs at least one copy")
    ref = copies[0]
    for c in copies[1:]:
        if abs(c - ref) > CONCENTRATE_ATOL:
            raise ValueError("concentrate requires identical amplitudes")

    acc = ref
    for k, c in enumerate(copies[1:], start=2):
        acc, dump = beamsplitter(acc, c, transmissivity=(k - 1) / k)
        acc, dump = complex(acc), complex(dump)
        if abs(dump) > CONCENTRATE_ATOL * max(1.0, abs(ref)) * k:
            raise ValueError(f"non-vacuum discarded port ({abs(dump):.3g}) at step {k}")
    return acc


def sample_prior(prior: GaussianPrior, rng: np.random.Generator, size=None):
    """Draw amplitudes from the Gaussian prior.

    Each of the real and imaginary parts is normal with variance ``1/(2 lam)``.
    """
    if not prior.normalizable:
        raise ValueError(
            "cannot sample the flat prior (lam = 0); use fixed-alpha mode instead"
        )
    sd = math.sqrt(1.0 / (2.0 * prior.lam))
    shape = () if size is None else tuple(np.atleast_1d(size))
    z = standard_normal(rng, (2, *shape))
    a = sd * (z[0] + 1j * z[1])
    return complex(a) if size is None else a


def overlap2(a, b):
    """``|<a|b>|^2 = exp(-|a - b|^2)`` for coherent states."""
    return np.exp(-np.abs(np.asarray(a) - np.asarray(b)) ** 2)
