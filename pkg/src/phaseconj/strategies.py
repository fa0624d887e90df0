"""Local and joint measure-and-prepare strategies for ``|alpha>|alpha*>``.

The local strategy heterodynes every copy, undoes the conjugation on the
``|alpha*>`` outcomes and prepares a coherent state at the shrunk average
``sum(beta_i) / (N + lam)``.  The joint strategy concentrates the ``N/2`` pairs
into one pair, measures ``x1 + x2`` and ``p1 - p2`` and prepares a coherent state
at ``2 sqrt(N) beta / (2N + lam)``.

Both Monte Carlo drivers split the work into fixed chunks with their own seeds
(see :mod:`phaseconj.rng`) and reduce with ``math.fsum`` in chunk order, so a
result is bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .phase_space import GaussianPrior, conjugate, overlap2, sample_prior
from .rng import chunk_rng, chunk_sizes
from .sampling import heterodyne, joint_epr_measure

MIN_SAMPLES = 1000

LOCAL_STREAM = 1
NONLOCAL_STREAM = 2


@dataclass(frozen=True)
class FidelityEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ScenarioConfig:
    """One Monte Carlo scenario.

    ``mode`` is ``"sample-prior"`` (alpha drawn from the prior) or
    ``"fixed-alpha"`` (alpha held at ``fixed_alpha``; the estimator still uses
    ``prior.lam`` as its shrinkage).  ``conjugate_pairs`` selects the
    ``|alpha>|alpha*>`` ensemble for the local strategy; ``False`` gives
    ``N`` identical copies.
    """

    n_states: int
    prior: GaussianPrior
    mode: str = "sample-prior"
    fixed_alpha: Optional[complex] = None
    conjugate_pairs: bool = True

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if self.mode not in ("sample-prior", "fixed-alpha"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "fixed-alpha" and self.fixed_alpha is None:
            raise ValueError("fixed-alpha mode needs fixed_alpha")
        if self.mode == "sample-prior" and not self.prior.normalizable:
            raise ValueError("lam = 0 requires fixed-alpha mode (flat prior cannot be sampled)")

    def conjugation_flags(self) -> list[bool]:
        # Copies alternate |alpha>, |alpha*>, ...
        return [self.conjugate_pairs and i % 2 == 1 for i in range(self.n_states)]


def _check_even(n):
    if n < 2 or n % 2:
        raise ValueError(f"joint strategy needs an even number of states >= 2, got {n}")


def local_fidelity_bound(n: int, lam: float) -> float:
    if n < 1 or lam < 0:
        raise ValueError("need n >= 1 and lam >= 0")
    return (n + lam) / (n + lam + 1)


def nonlocal_fidelity_bound(n: int, lam: float) -> float:
    _check_even(n)
    if lam < 0:
        raise ValueError("need lam >= 0")
    return (2 * n + lam) / (2 * n + lam + 1)


def correspondence_gap(n: int, lam: float) -> float:
    """Joint bound on ``n`` states minus local bound on ``2n`` states (identically 0)."""
    return nonlocal_fidelity_bound(n, lam) - local_fidelity_bound(2 * n, lam)


def local_estimate(outcomes: Sequence, conjugated_flags: Sequence[bool], lam: float):
    """Shrunk average of heterodyne outcomes.

    ``outcomes`` is a sequence of ``N`` outcomes (scalars or equal-shape arrays).
    Outcomes taken on a ``|alpha*>`` copy are conjugated first, which maps the
    strategy onto one for identical copies.
    """
    if len(outcomes) == 0:
        raise ValueError("need at least one outcome")
    if len(outcomes) != len(conjugated_flags):
        raise ValueError("outcomes and conjugated_flags differ in length")
    total = 0
    for beta, flipped in zip(outcomes, conjugated_flags):
        total = total + (conjugate(beta) if flipped else beta)
    return total / (len(outcomes) + lam)


def joint_outcome_to_beta(u, v):
    """Map ``(x1 + x2, p1 - p2)`` to ``beta = (x + i p)/sqrt(2)``.

    ``x = u/sqrt(2)`` and ``p = v/sqrt(2)`` are the homodyne values on the two
    beam-splitter ports, so ``beta = (u + i v)/2``.
    """
    return (np.asarray(u) + 1j * np.asarray(v)) / 2.0


def nonlocal_gain(n: int, lam: float) -> float:
    _check_even(n)
    return 2.0 * math.sqrt(n) / (2 * n + lam)


def nonlocal_estimate(u, v, n: int, lam: float):
    """Amplitude to prepare after the joint measurement of ``n/2`` concentrated pairs.

    With ``u, v`` measured on ``|sqrt(n/2) alpha>|sqrt(n/2) alpha*>`` the
    noiseless values are ``u = sqrt(2n) x_alpha``, ``v = sqrt(2n) p_alpha``, so
    ``beta = sqrt(n) alpha`` and the gain ``2 sqrt(n)/(2n + lam)`` returns
    ``alpha`` exactly at ``lam = 0``.
    """
    est = nonlocal_gain(n, lam) * joint_outcome_to_beta(u, v)
    return complex(est) if np.ndim(est) == 0 else est


def _alphas(cfg: ScenarioConfig, rng, size):
    if cfg.mode == "fixed-alpha":
        return np.full(size, complex(cfg.fixed_alpha))
    return sample_prior(cfg.prior, rng, size)


def _local_chunk(cfg: ScenarioConfig, rng, size):
    alpha = _alphas(cfg, rng, size)
    flags = cfg.conjugation_flags()
    outcomes = [heterodyne(conjugate(alpha) if f else alpha, rng) for f in flags]
    est = local_estimate(outcomes, flags, cfg.prior.lam)
    return overlap2(alpha, est)


def _nonlocal_chunk(cfg: ScenarioConfig, rng, size):
    alpha = _alphas(cfg, rng, size)
    scale = math.sqrt(cfg.n_states / 2)
    out = joint_epr_measure(scale * alpha, scale * conjugate(alpha), rng)
    est = nonlocal_estimate(out.u, out.v, cfg.n_states, cfg.prior.lam)
    return overlap2(alpha, est)


def _run(chunk_fn, cfg, samples, seed, stream, workers) -> FidelityEstimate:
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be >= {MIN_SAMPLES}, got {samples}")
    sizes = chunk_sizes(samples)

    def work(i):
        f = chunk_fn(cfg, chunk_rng(seed, stream, i), sizes[i])
        return math.fsum(f), math.fsum(f * f)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    else:
        parts = [work(i) for i in range(len(sizes))]

    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 - s1 * s1 / samples, 0.0) / (samples - 1)
    return FidelityEstimate(mean, math.sqrt(var / samples), samples, seed)


def run_local_mc(cfg: ScenarioConfig, samples: int, seed: int, workers: int = 1) -> FidelityEstimate:
    """Monte Carlo mean fidelity of the local heterodyne strategy."""
    return _run(_local_chunk, cfg, samples, seed, LOCAL_STREAM, workers)


def run_nonlocal_mc(cfg: ScenarioConfig, samples: int, seed: int, workers: int = 1) -> FidelityEstimate:
    """Monte Carlo mean fidelity of the beam-splitter joint strategy."""
    _check_even(cfg.n_states)
    return _run(_nonlocal_chunk, cfg, samples, seed, NONLOCAL_STREAM, workers)
