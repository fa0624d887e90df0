"""Truncated Fock-space checks of the fidelity bounds.

Operators are dense ``D x D`` complex matrices in the photon-number basis and
states are length-``D`` complex vectors.  Integrals over the coherent-state
label use :mod:`phaseconj.quadrature`.

Operators built here:

``A_phi``
    ``int d^2a P(a) |<sqrt(n) a|phi>|^2 |a><a|``, the fidelity operator of one
    measurement outcome ``phi`` on ``n`` concentrated copies.
``C``
    ``C1 (x) C1`` with ``C1 = int d^2a P(a) |sqrt(n) a><sqrt(n) a|``.
``B``
    ``int P(a1) P(a2) |<a1|a2>|^2 |sqrt(n) a1><..| (x) |sqrt(n) a2><..|``.
``O_beta``
    ``int d^2a P(a) g(x - sqrt(n) x_a) g(p - sqrt(n) p_a) |a><a|`` with
    ``g(t) = exp(-t^2)/sqrt(pi)`` (the variance-1/2 homodyne density) and
    ``(x, p) = sqrt(2) (Re beta, Im beta)``.  It is the joint density of the
    outcome and the state, so ``int dx dp <f|O_beta|f>`` is the strategy's
    fidelity with no extra normalisation.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gammainc

from .phase_space import SQRT2, GaussianPrior
from .quadrature import QuadratureGrid, line_rule, plane_rule

TAIL_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
INEQUALITY_TOL = 1e-9
# Fraction of Tr A_phi allowed to fall outside the truncated basis.
TRACE_CAPTURE_TOL = 1e-12
MAX_DIM = 400

DEFAULT_GRID = QuadratureGrid()


class TruncationError(ValueError):
    """The Fock cut-off is too small for the requested amplitude."""


@dataclass
class CheckReport:
    check: str
    params: dict
    lhs: float
    rhs: float
    holds: bool
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = asdict(self)
        if not rec.pop("extra"):
            return rec
        rec.update(self.extra)
        return rec


def dump_reports(reports, path):
    with open(path, "w") as fh:
        json.dump([r.to_record() for r in reports], fh, indent=2)


# -- states ------------------------------------------------------------------


def fock_tail(a, dim: int) -> float:
    """Photon-number weight of ``|a>`` at or above ``dim``: ``P(Poisson(|a|^2) >= dim)``."""
    mu = abs(complex(a)) ** 2
    return 0.0 if mu == 0 else float(gammainc(dim, mu))


def required_dim(a, tol: float = TAIL_TOL, minimum: int = 2) -> int:
    dim = max(minimum, 2)
    while fock_tail(a, dim) > tol:
        dim += 1
        if dim > MAX_DIM:
            raise TruncationError(f"|alpha| = {abs(a):.3g} needs more than {MAX_DIM} levels")
    return dim


def coherent_matrix(alphas, dim: int) -> np.ndarray:
    """Rows ``c_k(alpha) = exp(-|alpha|^2/2) alpha^k / sqrt(k!)`` for ``k < dim``."""
    alphas = np.asarray(alphas, dtype=complex).ravel()
    out = np.empty((alphas.size, dim), dtype=complex)
    out[:, 0] = np.exp(-0.5 * np.abs(alphas) ** 2)
    for k in range(1, dim):
        out[:, k] = out[:, k - 1] * alphas / math.sqrt(k)
    return out


def coherent_fock(a, dim: int, tail_tol: float = TAIL_TOL) -> np.ndarray:
    if dim < 2:
        raise ValueError("Fock dimension must be >= 2")
    tail = fock_tail(a, dim)
    if tail > tail_tol:
        raise TruncationError(
            f"|alpha| = {abs(complex(a)):.4g} loses {tail:.2e} of its norm at D = {dim} "
            f"(limit {tail_tol:.0e}); need D >= {required_dim(a, tail_tol)}"
        )
    return coherent_matrix([a], dim)[0]


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def vacuum(dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    return v


def quadrature_operator(dim: int) -> np.ndarray:
    """Truncated ``x = (a + a^dag)/sqrt(2)``."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    return (a + a.conj().T) / SQRT2


# -- linear algebra ------------------------------------------------------------


def hermiticity_defect(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _require_hermitian(m):
    d = hermiticity_defect(m)
    if d > HERMITIAN_TOL:
        raise ValueError(f"operator is not Hermitian (defect {d:.2e})")


def top_eigenpair(m):
    """Largest eigenvalue of a Hermitian matrix and its unit eigenvector."""
    m = np.asarray(m)
    _require_hermitian(m)
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    val, vec = float(vals[-1]), vecs[:, -1]
    resid = np.linalg.norm(h @ vec - val * vec)
    if resid > 1e-8 * max(1.0, abs(val)):
        raise np.linalg.LinAlgError(f"eigen-solver residual {resid:.2e}")
    return val, vec


def _weighted_gram(rows, weights):
    # sum_i w_i rows_i rows_i^dagger  ->  M_jk = sum_i w_i r_ij conj(r_ik)
    return (rows.T * weights) @ rows.conj()


# -- A_phi ---------------------------------------------------------------------


def _check_prior(lam):
    if not lam > 0:
        raise ValueError("operator construction needs a normalizable prior (lam > 0)")
    return GaussianPrior(lam)


def _a_phi_at(phi, n, prior, dim, k):
    # Node envelope exp(-(lam + n)|a|^2) covers the outcome likelihood and prior.
    pts, w = plane_rule(0j, prior.lam + n, k)
    like = np.abs(coherent_matrix(math.sqrt(n) * pts, phi.size).conj() @ phi) ** 2
    wt = w * prior.density(pts) * like
    rows = coherent_matrix(pts, dim)
    full_trace = float(np.sum(wt))
    return _weighted_gram(rows, wt), full_trace


def build_A_phi(phi, n: int, lam: float, dim: Optional[int] = None, grid: QuadratureGrid = DEFAULT_GRID):
    """Fidelity operator ``A_phi`` for outcome state ``phi`` on ``n`` copies.

    With ``dim=None`` the basis grows until ``Tr A_phi`` in the truncated basis
    captures all but ``TRACE_CAPTURE_TOL`` of the untruncated trace, so the
    matrix carries the operator's full spectrum.  Returns the matrix.
    """
    return build_A_phi_info(phi, n, lam, dim, grid)[0]


def build_A_phi_info(phi, n, lam, dim=None, grid=DEFAULT_GRID):
    """As :func:`build_A_phi`, also returning ``{"dim", "nodes", "full_trace"}``."""
    phi = np.asarray(phi, dtype=complex)
    if n < 1:
        raise ValueError("n must be >= 1")
    prior = _check_prior(lam)
    d = dim if dim is not None else max(phi.size, 16)
    while True:
        suggested = (phi.size + d) // 2 + 4
        packed, k = grid.converge(
            lambda kk: _pack(*_a_phi_at(phi, n, prior, d, kk)), suggested
        )
        mat, full_trace = _unpack(packed, d)
        lost = full_trace - float(np.trace(mat).real)
        if dim is not None or lost <= TRACE_CAPTURE_TOL * full_trace:
            break
        d = int(d * 1.5) + 1
        if d > MAX_DIM:
            raise TruncationError("A_phi does not fit in the maximum Fock dimension")
    return mat, {"dim": d, "nodes": k, "full_trace": full_trace}


def _pack(mat, scalar):
    return np.concatenate([mat.ravel(), [scalar]])


def _unpack(packed, d):
    return packed[:-1].reshape(d, d), float(packed[-1].real)


def pnorm_coefficient(p: int, n: int, lam: float) -> float:
    """``(n + lam) / ((n + lam + 1)^p - 1)^(1/p)``."""
    s = n + lam
    return s / ((s + 1) ** p - 1) ** (1.0 / p)


def pnorm_inequality_check(phi, p: int, n: int, lam: float, grid: QuadratureGrid = DEFAULT_GRID) -> CheckReport:
    """``||A_phi||_p <= coefficient * ||A_phi||_1`` from the spectrum of ``A_phi``."""
    if p < 2 or int(p) != p:
        raise ValueError("p must be an integer >= 2")
    mat, info = build_A_phi_info(phi, n, lam, grid=grid)
    ev = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    lhs = float(np.sum(np.abs(ev) ** p) ** (1.0 / p))
    one = float(np.sum(np.abs(ev)))
    rhs = pnorm_coefficient(p, n, lam) * one
    return CheckReport(
        "pnorm_inequality",
        {"p": p, "n": n, "lambda": lam, "dim_phi": int(np.size(phi))},
        lhs,
        rhs,
        lhs <= rhs + INEQUALITY_TOL,
        {"min_eigenvalue": float(ev[0]), "fock_dim": info["dim"]},
    )


# -- B and C on the two-mode space --------------------------------------------


@lru_cache(maxsize=16)
def _build_C1(n, lam, dim, grid):
    prior = _check_prior(lam)

    def at(k):
        pts, w = plane_rule(0j, lam + n, k)
        return _weighted_gram(coherent_matrix(math.sqrt(n) * pts, dim), w * prior.density(pts))

    mat, _ = grid.converge(at, dim + 2)
    mat.setflags(write=False)
    return mat


def build_C(n: int, lam: float, dim: int, grid: QuadratureGrid = DEFAULT_GRID):
    """``C = C1 (x) C1`` on the ``dim**2`` two-mode space (p = 2)."""
    c1 = _build_C1(n, lam, dim, grid)
    return np.kron(c1, c1)


def _B_at(n, lam, dim, k):
    # Rotate to s = (a1 + a2)/sqrt(2), d = (a1 - a2)/sqrt(2): the Gaussian part
    # exp(-(lam + n)(|a1|^2 + |a2|^2) - |a1 - a2|^2) separates into precisions
    # (lam + n) for s and (lam + n + 2) for d.
    prior = GaussianPrior(lam)
    s_pts, s_w = plane_rule(0j, lam + n, k)
    d_pts, d_w = plane_rule(0j, lam + n + 2, k)
    rn = math.sqrt(n)
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    block = max(1, 32768 // d_pts.size)
    for start in range(0, s_pts.size, block):
        s = s_pts[start : start + block, None]
        a1 = ((s + d_pts[None, :]) / SQRT2).ravel()
        a2 = ((s - d_pts[None, :]) / SQRT2).ravel()
        w = (s_w[start : start + block, None] * d_w[None, :]).ravel()
        w = w * prior.density(a1) * prior.density(a2) * np.exp(-np.abs(a1 - a2) ** 2)
        v1 = coherent_matrix(rn * a1, dim)
        v2 = coherent_matrix(rn * a2, dim)
        rows = (v1[:, :, None] * v2[:, None, :]).reshape(-1, dim * dim)
        out += _weighted_gram(rows, w)
    return out


@lru_cache(maxsize=16)
def _build_B_cached(n, lam, dim, grid):
    _check_prior(lam)
    mat, _ = grid.converge(lambda k: _B_at(n, lam, dim, k), 2 * dim)
    mat.setflags(write=False)
    return mat


def build_B(n: int, lam: float, dim: int, grid: QuadratureGrid = DEFAULT_GRID):
    """Overlap-kernel operator ``B`` for ``p = 2`` on the ``dim**2`` two-mode space."""
    if dim > 16:
        raise ValueError("two-mode operators are limited to dim <= 16")
    return _build_B_cached(n, float(lam), dim, grid)


def trace_coefficient(p: int, n: int, lam: float) -> float:
    s = n + lam
    return s**p / ((s + 1) ** p - 1)


def trace_inequality_check(phi, n: int, lam: float, p: int = 2, grid: QuadratureGrid = DEFAULT_GRID) -> CheckReport:
    """``Tr[(|phi><phi|)^(x)2 B] <= coefficient * Tr[(|phi><phi|)^(x)2 C]``."""
    if p != 2:
        raise ValueError("trace inequality is only implemented for p = 2")
    phi = np.asarray(phi, dtype=complex)
    dim = phi.size
    pp = np.kron(phi, phi)
    b = build_B(n, lam, dim, grid)
    c1 = _build_C1(n, float(lam), dim, grid)
    lhs = float(np.real(pp.conj() @ b @ pp))
    c_val = float(np.real(phi.conj() @ c1 @ phi)) ** 2
    rhs = trace_coefficient(p, n, lam) * c_val
    holds = lhs <= rhs + INEQUALITY_TOL and lhs >= -PSD_TOL
    return CheckReport("trace_inequality", {"p": p, "n": n, "lambda": lam, "dim": dim}, lhs, rhs, holds)


# -- O_beta and the joint strategy ---------------------------------------------


def _posterior(beta, n, lam):
    """Centre and node precision of the alpha-integrand of ``O_beta``."""
    prec = lam + 2 * n
    centre = 2.0 * math.sqrt(n) * complex(beta) / (2 * n + lam)
    return centre, prec


def _o_beta_weights(beta, n, prior, pts, w):
    x, p = SQRT2 * beta.real, SQRT2 * beta.imag
    scale = math.sqrt(2 * n)
    g = np.exp(-((x - scale * pts.real) ** 2) - (p - scale * pts.imag) ** 2) / math.pi
    return w * prior.density(pts) * g


def _check_even(n):
    if n < 2 or n % 2:
        raise ValueError(f"joint strategy needs an even number of states >= 2, got {n}")


def build_O_beta(beta, n: int, lam: float, dim: int = 40, grid: QuadratureGrid = DEFAULT_GRID):
    """Outcome operator ``O_beta`` of the joint strategy; its top eigenvector is
    the state to prepare after outcome ``beta``."""
    _check_even(n)
    prior = _check_prior(lam)
    beta = complex(beta)
    centre, prec = _posterior(beta, n, lam)
    reach = abs(centre) + 5.0 / math.sqrt(prec)
    tail = fock_tail(reach, dim)
    if tail > TAIL_TOL:
        raise TruncationError(
            f"D = {dim} cannot hold the posterior around {centre:.3g} "
            f"(tail {tail:.1e}); need D >= {required_dim(reach)}"
        )

    def at(k):
        pts, w = plane_rule(centre, prec, k)
        return _weighted_gram(coherent_matrix(pts, dim), _o_beta_weights(beta, n, prior, pts, w))

    mat, _ = grid.converge(at, dim // 2 + 4)
    return mat


def eigenvector_check(beta, n: int, lam: float, dim: int = 40, grid: QuadratureGrid = DEFAULT_GRID,
                      threshold: float = 0.999) -> CheckReport:
    """Top eigenvector of ``O_beta`` against ``|2 sqrt(n) beta / (2n + lam)>``."""
    op = build_O_beta(beta, n, lam, dim, grid)
    _, vec = top_eigenpair(op)
    target = coherent_fock(2 * math.sqrt(n) * complex(beta) / (2 * n + lam), dim)
    ov = float(abs(np.vdot(target, vec)) ** 2)
    return CheckReport(
        "O_beta_eigenvector",
        {"beta": [complex(beta).real, complex(beta).imag], "n": n, "lambda": lam, "dim": dim},
        ov,
        threshold,
        ov >= threshold,
        {"hermiticity_defect": hermiticity_defect(op), "min_eigenvalue": float(np.linalg.eigvalsh(op)[0])},
    )


def _joint_fidelity_at(n, lam, dim, k_beta, k_alpha):
    prior = GaussianPrior(lam)
    gain = 2.0 * math.sqrt(n) / (2 * n + lam)
    b_pts, b_w = plane_rule(0j, 2.0 * lam / (2 * n + lam), k_beta)
    total = 0.0
    terms = []
    for beta, wb in zip(b_pts, b_w):
        centre, prec = _posterior(beta, n, lam)
        d = max(dim or 0, required_dim(abs(centre) + 5.0 / math.sqrt(prec), minimum=8))
        pts, w = plane_rule(centre, prec, k_alpha)
        wt = _o_beta_weights(beta, n, prior, pts, w)
        f = coherent_matrix([gain * beta], d)[0]
        # <f|O_beta|f> with O_beta = sum_i wt_i |a_i><a_i|
        amp = coherent_matrix(pts, d) @ f.conj()
        terms.append(wb * float(np.sum(wt * np.abs(amp) ** 2)))
    total = math.fsum(terms)
    # dx dp = 2 d^2 beta
    return 2.0 * total


def nonlocal_bound_via_oracle(n: int, lam: float, dim: Optional[int] = None,
                              grid: QuadratureGrid = DEFAULT_GRID) -> float:
    """Fidelity of the joint strategy, ``int dx dp <f_beta|O_beta|f_beta>``.

    The prepared state is ``f_beta = |2 sqrt(n) beta / (2n + lam)>``.  The Fock
    cut-off at each outcome node is raised as needed to hold that state and the
    posterior; ``dim`` sets a floor.
    """
    _check_even(n)
    _check_prior(lam)
    k0 = grid.start(8)
    value, _ = grid.converge(lambda k: _joint_fidelity_at(n, lam, dim, k, k + 8), k0, max_nodes=64)
    return float(value)


# -- conjugation identity --------------------------------------------------------


def locc_conjugation_check(op, a, tail_tol: float = 1e-7) -> CheckReport:
    """``Tr[op |a*><a*|] == Tr[conj(op) |a><a|]`` with entrywise conjugation.

    The identity holds exactly in any truncated basis because the Fock
    coefficients satisfy ``c_k(a*) = conj(c_k(a))``, so the tail gate here only
    guards against nonsensical cut-offs and is looser than elsewhere.
    """
    op = np.asarray(op, dtype=complex)
    _require_hermitian(op)
    dim = op.shape[0]
    a = complex(a)
    ket = coherent_fock(a, dim, tail_tol)
    ket_c = coherent_fock(a.conjugate(), dim, tail_tol)
    lhs = complex(ket_c.conj() @ op @ ket_c)
    rhs = complex(ket.conj() @ op.conj() @ ket)
    return CheckReport(
        "locc_conjugation",
        {"alpha": [a.real, a.imag], "dim": dim},
        lhs.real,
        rhs.real,
        abs(lhs - rhs) <= 1e-10,
    )
