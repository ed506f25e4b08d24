"""Squeezing parameters, Fock populations and the energy estimator.

A pure Gaussian state of the oscillator, referenced to frequency ``omega``,
is a rotated squeezed vacuum characterized by a squeezing parameter ``r`` and
an ellipse angle ``theta``.  In dimensionless quadratures (Q = sqrt(omega) q,
P = p / sqrt(omega)) the covariances are

    omega <q^2>  = (cosh 2r - sinh 2r cos 2theta) / 2
    <p^2>/omega  = (cosh 2r + sinh 2r cos 2theta) / 2
    <qp>_sym     = (sinh 2r sin 2theta) / 2

so ``cosh 2r = omega <q^2> + <p^2>/omega`` equals the nonadiabaticity Q* and
the irreversible work at frequency omega is ``omega sinh^2 r``.  The same
squeezed vacuum carries population only in even Fock levels,
``P_0 = 1/cosh r`` with the two-photon recurrence implemented in
``fock_populations``; its mean occupation is sinh^2 r.  ``estimate_r``
inverts a measured Fock distribution back to r through the mean energy, the
route an ion-trap sideband measurement takes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import CovarianceTriple
from .errors import NotPureError, TruncationError

__all__ = [
    "SqueezingDecomposition",
    "decompose",
    "reconstruct",
    "qstar_from_r",
    "r_from_qstar",
    "wirr_from_r",
    "FockDistribution",
    "fock_populations",
    "energy_from_populations",
    "EstimateReport",
    "estimate_r",
    "sample_populations",
    "bootstrap_stderr",
    "write_populations_csv",
]

_CLAMP_SLACK = 1e-12
_NMAX_CAP = 4096


@dataclass(frozen=True)
class SqueezingDecomposition:
    """Squeezing parameter ``r >= 0`` and ellipse angle ``theta`` in (-pi/2, pi/2]."""

    r: float
    theta: float


def decompose(cov: CovarianceTriple, omega: float,
              purity_tol: float = 1e-6) -> SqueezingDecomposition:
    """Extract (r, theta) from pure-state covariances at frequency ``omega``.

    Parameters
    ----------
    cov : CovarianceTriple
        Symmetrized covariances.
    omega : float
        Reference frequency defining the squeezing decomposition.
    purity_tol : float
        Allowed deviation of ``q2 p2 - qp^2`` from 1/4.  Beyond it the
        covariances do not describe a pure state and ``NotPureError`` is
        raised rather than returning a meaningless r.

    Returns
    -------
    SqueezingDecomposition
        ``theta`` is 0 (not an arbitrary angle) when r = 0, since the ellipse
        of an unsqueezed state is a circle.
    """
    purity = cov.q2 * cov.p2 - cov.qp**2
    if abs(purity - 0.25) > purity_tol:
        raise NotPureError(
            f"q2*p2 - qp^2 = {purity}, expected 0.25 within {purity_tol}"
        )
    c2r = omega * cov.q2 + cov.p2 / omega
    if c2r < 1.0 - _CLAMP_SLACK:
        raise ValueError(f"cosh 2r = {c2r} < 1; covariances are not physical")
    if c2r <= 1.0:
        return SqueezingDecomposition(r=0.0, theta=0.0)
    r = 0.5 * math.acosh(c2r)
    theta = 0.5 * math.atan2(2.0 * cov.qp, cov.p2 / omega - omega * cov.q2)
    return SqueezingDecomposition(r=r, theta=theta)


def reconstruct(dec: SqueezingDecomposition, omega: float) -> CovarianceTriple:
    """Inverse of ``decompose``: covariances of the squeezed vacuum (r, theta)."""
    c2r = math.cosh(2.0 * dec.r)
    s2r = math.sinh(2.0 * dec.r)
    return CovarianceTriple(
        q2=(c2r - s2r * math.cos(2.0 * dec.theta)) / (2.0 * omega),
        p2=0.5 * omega * (c2r + s2r * math.cos(2.0 * dec.theta)),
        qp=0.5 * s2r * math.sin(2.0 * dec.theta),
    )


def qstar_from_r(r: float) -> float:
    """Nonadiabaticity of a squeezed vacuum: ``Q* = cosh 2r``."""
    return math.cosh(2.0 * r)


def r_from_qstar(qstar: float) -> float:
    """Invert ``Q* = cosh 2r``; clamps Q* in [1 - 1e-12, 1) to 1."""
    if qstar < 1.0 - _CLAMP_SLACK:
        raise ValueError(f"Q* = {qstar} < 1 cannot come from a squeezed vacuum")
    return 0.5 * math.acosh(max(qstar, 1.0))


def wirr_from_r(r: float, omega_final: float) -> float:
    """Irreversible work of terminal squeezing r at ``omega_final``: ``omega sinh^2 r``."""
    return omega_final * math.sinh(r) ** 2


@dataclass(frozen=True, eq=False)
class FockDistribution:
    """Populations over Fock levels 0..nmax of an oscillator at ``omega``."""

    omega: float
    populations: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.populations, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("populations must be a non-empty 1-D array")
        if not np.all(np.isfinite(p)) or np.any(p < 0.0):
            raise ValueError("populations must be finite and nonnegative")
        if not (self.omega > 0.0):
            raise ValueError("omega must be positive")
        object.__setattr__(self, "populations", p)

    @property
    def nmax(self) -> int:
        return self.populations.size - 1


def fock_populations(r: float, nmax: int | None = None, omega: float = 1.0,
                     tail_budget: float = 1e-10) -> FockDistribution:
    """Fock populations of the squeezed vacuum with parameter ``r``.

    Only even levels are occupied: ``P_0 = 1/cosh r`` and

        P_{2(m+1)} = P_{2m} tanh^2 r (2m+1) / (2m+2).

    Parameters
    ----------
    r : float
        Squeezing parameter (only |r| matters).
    nmax : int, optional
        Truncation level.  When omitted, the smallest even nmax whose
        left-out tail is at most ``tail_budget`` is chosen automatically
        (capped at 4096).
    omega : float
        Oscillator frequency attached to the distribution.
    tail_budget : float
        Maximum probability mass allowed outside the truncation.

    Raises
    ------
    TruncationError
        If the requested (or capped) truncation leaves more than
        ``tail_budget`` outside.
    """
    t2 = math.tanh(r) ** 2
    p0 = 1.0 / math.cosh(r)

    def even_terms(n_even_max: int) -> np.ndarray:
        terms = np.empty(n_even_max // 2 + 1)
        terms[0] = p0
        for m in range(n_even_max // 2):
            terms[m + 1] = terms[m] * t2 * (2 * m + 1) / (2 * m + 2)
        return terms

    if nmax is None:
        chosen = None
        n_try = 0
        while n_try <= _NMAX_CAP:
            if 1.0 - math.fsum(even_terms(n_try)) <= tail_budget:
                chosen = n_try
                break
            n_try = max(2, 2 * n_try)
        if chosen is None:
            raise TruncationError(
                f"tail budget {tail_budget} not reachable below nmax {_NMAX_CAP}"
            )
        # walk back down to the smallest even truncation that still fits
        terms = even_terms(chosen)
        csum = np.cumsum(terms)
        k = int(np.searchsorted(csum, 1.0 - tail_budget, side="left"))
        nmax = 2 * min(k, terms.size - 1)
    else:
        if int(nmax) != nmax or nmax < 0:
            raise ValueError(f"nmax must be a nonnegative integer, got {nmax!r}")
        nmax = int(nmax)

    terms = even_terms(nmax if nmax % 2 == 0 else nmax - 1)
    tail = 1.0 - math.fsum(terms)
    if tail > tail_budget:
        raise TruncationError(
            f"truncation at nmax={nmax} leaves tail {tail:.3e} > budget {tail_budget}"
        )
    populations = np.zeros(nmax + 1)
    populations[0 : 2 * terms.size : 2] = terms
    return FockDistribution(omega=omega, populations=populations)


def energy_from_populations(dist: FockDistribution) -> float:
    """Mean energy ``omega sum_n (n + 1/2) P_n`` of the distribution as given.

    No normalization is applied; a truncated theoretical distribution or an
    empirical frequency table is taken at face value.
    """
    n = np.arange(dist.populations.size)
    return dist.omega * float(np.dot(n + 0.5, dist.populations))


@dataclass(frozen=True)
class EstimateReport:
    """Result of inverting a Fock distribution to a squeezing parameter."""

    r: float
    qstar: float
    energy: float
    beta: float
    clamped: bool

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "qstar": self.qstar,
            "r": self.r,
            "beta": self.beta,
            "clamped": self.clamped,
        }


def estimate_r(dist: FockDistribution) -> EstimateReport:
    """Estimate r from measured Fock populations through the mean energy.

    ``qstar = 2 E / omega`` and ``r = acosh(qstar)/2``.  Shot noise can push
    the empirical qstar below the physical floor of 1; such values are
    clamped to 1 (r = 0) and flagged with ``clamped=True``.  ``beta`` is the
    variance ratio ``exp(2 r)``, the figure an experiment usually quotes.
    """
    energy = energy_from_populations(dist)
    qstar = 2.0 * energy / dist.omega
    clamped = qstar < 1.0
    q = max(qstar, 1.0)
    r = 0.5 * math.acosh(q)
    return EstimateReport(
        r=r, qstar=q, energy=energy, beta=math.exp(2.0 * r), clamped=clamped
    )


def sample_populations(dist: FockDistribution, shots: int,
                       rng=None) -> FockDistribution:
    """Simulate ``shots`` projective Fock measurements; returns frequencies.

    ``rng`` may be a ``numpy.random.Generator``, an integer seed, or None for
    a nondeterministic generator.  The distribution is normalized before
    sampling (the tail left out by truncation is redistributed).
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    p = dist.populations / dist.populations.sum()
    counts = gen.multinomial(shots, p)
    return FockDistribution(omega=dist.omega, populations=counts / shots)


def bootstrap_stderr(dist: FockDistribution, shots: int, n_boot: int = 200,
                     rng=None) -> float:
    """Bootstrap standard error of ``estimate_r(...).r`` at the given shot count.

    Resamples the (typically empirical) distribution ``n_boot`` times with
    ``shots`` draws each and returns the sample standard deviation of the
    re-estimated r values.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    p = dist.populations / dist.populations.sum()
    values = np.empty(n_boot)
    for b in range(n_boot):
        counts = gen.multinomial(shots, p)
        resampled = FockDistribution(omega=dist.omega, populations=counts / shots)
        values[b] = estimate_r(resampled).r
    return float(np.std(values, ddof=1))


def write_populations_csv(path, dist: FockDistribution) -> None:
    """Write ``n, P`` rows with full precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("n,P\n")
        for n, p in enumerate(dist.populations):
            fh.write("%d,%.17g\n" % (n, p))
